use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::characteristic::{eigenfunction, refine_root, Problem};
use super::operator::LinearOperator;
use super::ModeShape;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::GammaWeights;
use crate::params::RodParams;

const STALE_TOLERANCE: f64 = 1e-6;
const ADJOINT_BC_LIMIT: f64 = 1e-4;

/// Neutral transverse mode `(0, Y, Theta)` at the Hopf point, normalized to `Y(1) = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalMode {
    pub y: Vec<Complex64>,
    pub theta: Vec<Complex64>,
    pub omega_c: f64,
    /// Eigenvalue found on the operator; equals `i omega_c` within the stale-threshold tolerance.
    pub eigenvalue: Complex64,
}

impl CriticalMode {
    /// Mode from given profiles, rescaled so the tip deflection is one.
    pub fn from_profiles(y: Vec<Complex64>, theta: Vec<Complex64>, omega_c: f64) -> Result<Self> {
        if theta.len() != y.len() {
            return Err(Error::Shape {
                expected: y.len(),
                actual: theta.len(),
            });
        }
        Ok(Self {
            y,
            theta,
            omega_c,
            eigenvalue: Complex64::new(0.0, omega_c),
        })
    }

    pub fn x(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.y.len()]
    }

    pub fn shape(&self) -> ModeShape {
        ModeShape {
            x: self.x(),
            y: self.y.clone(),
            theta: self.theta.clone(),
        }
    }

    /// Residuals of `Y'(1) - nu Theta(1) = 0` and `Theta'(1) = 0`.
    pub fn tip_residuals(&self, grid: &Grid, params: &RodParams) -> (f64, f64) {
        let last = grid.n() - 1;
        let yp = grid.d1c(&self.y)[last];
        let thp = grid.d1c(&self.theta)[last];
        ((yp - self.theta[last] * params.nu()).norm(), thp.norm())
    }
}

/// Adjoint mode `(0, Psi_Y, Psi_Theta)` for eigenvalue `-i omega_c`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdjointMode {
    pub psi_y: Vec<Complex64>,
    pub psi_theta: Vec<Complex64>,
    pub eigenvalue: Complex64,
    /// Largest relative residual of the two adjoint tip conditions.
    pub bc_residual: f64,
}

impl AdjointMode {
    pub fn shape(&self) -> ModeShape {
        ModeShape {
            x: vec![Complex64::new(0.0, 0.0); self.psi_y.len()],
            y: self.psi_y.clone(),
            theta: self.psi_theta.clone(),
        }
    }

    /// Relative residuals of `k2 Psi_Y'(1) - mu Psi_Theta(1) = 0` and
    /// `Psi_Theta'(1) + F Psi_Y(1) = 0`.
    pub fn tip_residuals(&self, grid: &Grid, params: &RodParams) -> (f64, f64) {
        let last = grid.n() - 1;
        let a = grid.d1c(&self.psi_y)[last] * params.k2_tilde;
        let b = self.psi_theta[last] * params.mu();
        let c = grid.d1c(&self.psi_theta)[last];
        let d = self.psi_y[last] * params.force_tilde;
        let rel = |p: Complex64, q: Complex64| (p - q).norm() / (p.norm() + q.norm()).max(1.0);
        (rel(a, b), rel(c, -d))
    }
}

/// Critical eigenmode of an operator assembled at the Hopf threshold.
pub fn critical_mode(op: &LinearOperator, omega_c: f64) -> Result<CriticalMode> {
    let params = op.params();
    let target = Complex64::new(0.0, omega_c);
    let stale = |w: Complex64| Error::StaleThreshold {
        found_re: w.re,
        found_im: w.im,
        omega_c,
        tolerance: STALE_TOLERANCE,
    };
    let w = refine_root(target, params, Problem::Direct, 1e-2 * omega_c.abs().max(1.0))
        .map_err(|_| stale(target))?;
    if (w - target).norm() > STALE_TOLERANCE {
        return Err(stale(w));
    }
    let nodes = op.grid().nodes();
    let (mut y, mut theta) = eigenfunction(w, params, Problem::Direct, nodes);
    let last = nodes.len() - 1;
    let s = y[last];
    for v in y.iter_mut().chain(theta.iter_mut()) {
        *v /= s;
    }
    y[last] = Complex64::new(1.0, 0.0);
    y[0] = Complex64::new(0.0, 0.0);
    theta[0] = Complex64::new(0.0, 0.0);
    Ok(CriticalMode {
        y,
        theta,
        omega_c,
        eigenvalue: w,
    })
}

/// Adjoint eigenmode for `-i omega_c`, scaled to unit Gamma-norm.
///
/// Built from the exact adjoint boundary value problem; the tip conditions are
/// then checked on the collocation derivatives.
pub fn adjoint_mode(op: &LinearOperator, weights: &GammaWeights, omega_c: f64) -> Result<AdjointMode> {
    let params = op.params();
    let grid = op.grid();
    let target = Complex64::new(0.0, -omega_c);
    let w = refine_root(target, params, Problem::Adjoint, 1e-2 * omega_c.abs().max(1.0)).map_err(|_| {
        Error::StaleThreshold {
            found_re: target.re,
            found_im: target.im,
            omega_c,
            tolerance: STALE_TOLERANCE,
        }
    })?;
    let (psi_y, psi_theta) = eigenfunction(w, params, Problem::Adjoint, grid.nodes());
    let mut mode = AdjointMode {
        psi_y,
        psi_theta,
        eigenvalue: w,
        bc_residual: 0.0,
    };
    mode.psi_y[0] = Complex64::new(0.0, 0.0);
    mode.psi_theta[0] = Complex64::new(0.0, 0.0);
    let shape = mode.shape();
    let norm = gamma_inner(grid, weights, &shape, &shape)?.re.sqrt();
    // fix the phase by making the tip deflection real and positive
    let last = grid.n() - 1;
    let tip = mode.psi_y[last];
    let phase = if tip.norm() > 0.0 { tip.conj() / tip.norm() } else { Complex64::new(1.0, 0.0) };
    let c = phase / norm;
    for v in mode.psi_y.iter_mut().chain(mode.psi_theta.iter_mut()) {
        *v *= c;
    }
    let (r1, r2) = mode.tip_residuals(grid, params);
    mode.bc_residual = r1.max(r2);
    if mode.bc_residual > ADJOINT_BC_LIMIT {
        return Err(Error::DiscretizationInconsistency {
            residual: mode.bc_residual,
            tolerance: ADJOINT_BC_LIMIT,
        });
    }
    Ok(mode)
}

/// `(psi, xi)_Gamma = int_0^1 psi^H Gamma xi du`, conjugate-linear in `psi`.
pub fn gamma_inner(grid: &Grid, weights: &GammaWeights, psi: &ModeShape, xi: &ModeShape) -> Result<Complex64> {
    for len in [psi.x.len(), psi.y.len(), psi.theta.len(), xi.x.len(), xi.y.len(), xi.theta.len()] {
        grid.check_len(len)?;
    }
    let w = grid.quad_weights();
    let [g1, g2, g3] = weights.as_array();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..grid.n() {
        let v = psi.x[i].conj() * xi.x[i] * g1 + psi.y[i].conj() * xi.y[i] * g2 + psi.theta[i].conj() * xi.theta[i] * g3;
        s += v * w[i];
    }
    Ok(s)
}
