use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::characteristic::{eigenfunction, refine_root, Problem};
use super::operator::LinearOperator;
use super::ModeShape;
use crate::error::{Error, Result};

/// Eigenvalues beyond this modulus are artifacts of the discretization.
const SPURIOUS_MODULUS: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeKind {
    Longitudinal,
    Transverse,
}

/// Growth rate and eigenfunction of the linearized dynamics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenPair {
    pub eigenvalue: Complex64,
    pub mode: ModeShape,
    pub kind: ModeKind,
    /// `max |L xi - w xi| / max |xi|` over interior collocation rows.
    pub residual: f64,
    /// Componentwise backward error of the same rows,
    /// `max_i |r_i| / (sum_j |L_ij| |xi_j| + |w| |xi_i|)`.
    pub backward_error: f64,
    /// Whether the eigenvalue was polished on the exact characteristic equation.
    pub refined: bool,
}

/// `-k1 ((j + 1/2) pi)^2 / gamma1`, with eigenfunction `sin((j + 1/2) pi u)`.
pub fn longitudinal_eigenvalue(op: &LinearOperator, j: usize) -> f64 {
    let p = op.params();
    let q = (j as f64 + 0.5) * PI;
    -p.k1_tilde * q * q / p.gamma1_tilde
}

/// Raw and backward-error residuals of a candidate eigenpair on the interior rows.
pub fn eigen_residual(op: &LinearOperator, eigenvalue: Complex64, mode: &ModeShape) -> (f64, f64) {
    let n = op.grid().n();
    let xi = mode.stacked();
    let full = op.full();
    let scale = mode.max_abs().max(f64::MIN_POSITIVE);
    let mut raw = 0.0_f64;
    let mut backward = 0.0_f64;
    for f in 0..3 {
        for i in 1..n - 1 {
            let row = f * n + i;
            let mut r = -eigenvalue * xi[row];
            let mut mag = eigenvalue.norm() * xi[row].norm();
            for (k, x) in xi.iter().enumerate() {
                let a = full[(row, k)];
                if a != 0.0 {
                    r += x * a;
                    mag += a.abs() * x.norm();
                }
            }
            raw = raw.max(r.norm() / scale);
            if mag > 0.0 {
                backward = backward.max(r.norm() / mag);
            }
        }
    }
    (raw, backward)
}

fn longitudinal_pair(op: &LinearOperator, j: usize) -> EigenPair {
    let q = (j as f64 + 0.5) * PI;
    let n = op.grid().n();
    let mut mode = ModeShape::zeros(n);
    for (i, u) in op.grid().nodes().iter().enumerate() {
        mode.x[i] = Complex64::new((q * u).sin(), 0.0);
    }
    let w = Complex64::new(longitudinal_eigenvalue(op, j), 0.0);
    let (residual, backward_error) = eigen_residual(op, w, &mode);
    EigenPair {
        eigenvalue: w,
        mode,
        kind: ModeKind::Longitudinal,
        residual,
        backward_error,
        refined: true,
    }
}

/// Transverse eigenvector of the collocation matrix by inverse iteration.
fn collocation_vector(op: &LinearOperator, w: Complex64) -> ModeShape {
    let m = op.interior();
    let n = op.grid().n();
    let t = op.transverse();
    let shift = w + Complex64::new(1e-10 * w.norm().max(1.0), 0.0);
    let a = Mat::<Complex64>::from_fn(2 * m, 2 * m, |i, j| {
        let v = Complex64::new(t[(i, j)], 0.0);
        if i == j { v - shift } else { v }
    });
    let lu = a.partial_piv_lu();
    let mut v = Mat::<Complex64>::from_fn(2 * m, 1, |i, _| Complex64::new(1.0 + i as f64 * 1e-3, 0.0));
    for _ in 0..3 {
        v = lu.solve(&v);
        let s = (0..2 * m).map(|i| v[(i, 0)].norm()).fold(0.0, f64::max);
        for i in 0..2 * m {
            v[(i, 0)] /= s;
        }
    }
    let lift = op.lift();
    let mut full = vec![Complex64::new(0.0, 0.0); 3 * n];
    for (r, out) in full.iter_mut().enumerate() {
        for c in 0..2 * m {
            let l = lift[(r, m + c)];
            if l != 0.0 {
                *out += v[(c, 0)] * l;
            }
        }
    }
    ModeShape::from_stacked(&full, n)
}

fn transverse_pair(op: &LinearOperator, guess: Complex64) -> EigenPair {
    let params = op.params();
    let nodes = op.grid().nodes();
    let n = nodes.len();
    let max_shift = 1e-4 * guess.norm().max(1.0);
    let (w, mode, refined) = match refine_root(guess, params, Problem::Direct, max_shift) {
        Ok(w) => {
            let (y, theta) = eigenfunction(w, params, Problem::Direct, nodes);
            let mut mode = ModeShape::zeros(n);
            mode.y = y;
            mode.theta = theta;
            let s = mode.max_abs();
            (w, mode.scaled(Complex64::new(1.0 / s, 0.0)), true)
        }
        Err(_) => (guess, collocation_vector(op, guess), false),
    };
    let (residual, backward_error) = eigen_residual(op, w, &mode);
    EigenPair {
        eigenvalue: w,
        mode,
        kind: ModeKind::Transverse,
        residual,
        backward_error,
        refined,
    }
}

/// The `count` eigenpairs with largest real part, in descending order.
///
/// Transverse eigenvalues come from the collocation matrix and are polished on
/// the exact characteristic equation; longitudinal ones are known in closed form.
pub fn leading_spectrum(op: &LinearOperator, count: usize) -> Result<Vec<EigenPair>> {
    if count == 0 {
        return Err(Error::InvalidConfig("eigenpair count must be at least 1".into()));
    }
    let t = op.transverse();
    let size = t.nrows();
    let evs = t.eigenvalues().map_err(|_| Error::EigenSolver {
        size,
        condition_estimate: condition_estimate(&t),
    })?;
    let mut guesses: Vec<Complex64> = evs
        .into_iter()
        .filter(|w| w.is_finite() && w.norm() <= SPURIOUS_MODULUS && w.im >= 0.0)
        .collect();
    if guesses.is_empty() {
        return Err(Error::EigenSolver {
            size,
            condition_estimate: condition_estimate(&t),
        });
    }
    guesses.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.abs().total_cmp(&a.im.abs())));

    // (real part, source): source >= 0 indexes transverse guesses, < 0 encodes longitudinal j
    let mut slots: Vec<(f64, i64)> = Vec::new();
    for (k, g) in guesses.iter().enumerate().take(count) {
        slots.push((g.re, k as i64));
    }
    for j in 0..count {
        let w = longitudinal_eigenvalue(op, j);
        if w.abs() <= SPURIOUS_MODULUS {
            slots.push((w, -(j as i64) - 1));
        }
    }
    slots.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut out = Vec::with_capacity(count + 1);
    for (_, src) in slots {
        if out.len() >= count {
            break;
        }
        if src < 0 {
            out.push(longitudinal_pair(op, (-src - 1) as usize));
        } else {
            let g = guesses[src as usize];
            let pair = transverse_pair(op, g);
            let complex = g.im.abs() > 1e-9 * g.norm().max(1.0);
            if complex {
                let partner = EigenPair {
                    eigenvalue: pair.eigenvalue.conj(),
                    mode: pair.mode.conj(),
                    ..pair.clone()
                };
                out.push(pair);
                out.push(partner);
            } else {
                out.push(pair);
            }
        }
    }
    out.truncate(count);
    out.sort_by(|a, b| {
        b.eigenvalue
            .re
            .total_cmp(&a.eigenvalue.re)
            .then(b.eigenvalue.im.total_cmp(&a.eigenvalue.im))
    });
    Ok(out)
}

/// Cheap 1-norm condition estimate `||A||_1 ||A^{-1}||_1` for diagnostics.
fn condition_estimate(a: &Mat<f64>) -> f64 {
    let n = a.nrows();
    let norm1 = |m: &Mat<f64>| {
        (0..m.ncols())
            .map(|j| (0..m.nrows()).map(|i| m[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let inv = a.partial_piv_lu().solve(Mat::<f64>::identity(n, n));
    let v = norm1(a) * norm1(&inv);
    if v.is_finite() { v } else { f64::INFINITY }
}
