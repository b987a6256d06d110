//! Linear stability of the compressed base state.

mod characteristic;
mod eigen;
mod modes;
mod operator;
mod threshold;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use characteristic::{boundary_matrix, char_roots, characteristic_det, refine_root, Problem};
pub use eigen::{eigen_residual, leading_spectrum, longitudinal_eigenvalue, EigenPair, ModeKind};
pub use modes::{adjoint_mode, critical_mode, gamma_inner, AdjointMode, CriticalMode};
pub use operator::{assemble_operator, BoundaryRow, LinearOperator};
pub use threshold::{
    find_flutter_onset, find_flutter_onset_in, find_hopf_threshold, find_hopf_threshold_in,
    leading_pair_discriminant, transverse_eigenvalues, HopfPoint, ThresholdOptions,
};

/// Complex perturbation `(x, y, theta)` sampled on the grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeShape {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub theta: Vec<Complex64>,
}

impl ModeShape {
    pub fn zeros(n: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); n];
        Self {
            x: z.clone(),
            y: z.clone(),
            theta: z,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Stacked `(x, y, theta)` vector.
    pub fn stacked(&self) -> Vec<Complex64> {
        self.x.iter().chain(&self.y).chain(&self.theta).copied().collect()
    }

    pub fn from_stacked(v: &[Complex64], n: usize) -> Self {
        Self {
            x: v[..n].to_vec(),
            y: v[n..2 * n].to_vec(),
            theta: v[2 * n..3 * n].to_vec(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let f = |v: &Vec<Complex64>| v.iter().map(|z| z * c).collect();
        Self {
            x: f(&self.x),
            y: f(&self.y),
            theta: f(&self.theta),
        }
    }

    pub fn conj(&self) -> Self {
        let f = |v: &Vec<Complex64>| v.iter().map(|z| z.conj()).collect();
        Self {
            x: f(&self.x),
            y: f(&self.y),
            theta: f(&self.theta),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.x
            .iter()
            .chain(&self.y)
            .chain(&self.theta)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}
