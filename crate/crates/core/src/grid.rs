//! Chebyshev–Gauss–Lobatto collocation on `[0, 1]`.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 96;

/// Spectral grid with dense differentiation and integration operators.
///
/// Nodes are `u_i = (1 - cos(pi i / N)) / 2`, `i = 0..=N`, so `u_0 = 0` is the
/// clamped end and `u_N = 1` the loaded tip.
#[derive(Debug, Clone)]
pub struct Grid {
    n: usize,
    nodes: Vec<f64>,
    diff1: Mat<f64>,
    diff2: Mat<f64>,
    quad_weights: Vec<f64>,
    cumulative: Mat<f64>,
}

impl Grid {
    /// Grid with `n` nodes (`n - 1` Chebyshev intervals).
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidConfig(format!(
                "grid needs at least 4 nodes, got {n}"
            )));
        }
        let big_n = n - 1;
        let x: Vec<f64> = (0..n).map(|i| (PI * i as f64 / big_n as f64).cos()).collect();
        let nodes: Vec<f64> = (0..n)
            .map(|i| {
                // sin^2 form keeps the nodes near u = 0 accurate to full relative precision
                let s = (PI * i as f64 / (2.0 * big_n as f64)).sin();
                s * s
            })
            .collect();

        let c = |i: usize| {
            let w = if i == 0 || i == big_n { 2.0 } else { 1.0 };
            if i.is_multiple_of(2) { w } else { -w }
        };
        // d/du = -2 d/dx
        let mut diff1 = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                if i != j {
                    let v = -2.0 * c(i) / c(j) / (x[i] - x[j]);
                    diff1[(i, j)] = v;
                    row_sum += v;
                }
            }
            diff1[(i, i)] = -row_sum;
        }
        let diff2 = &diff1 * &diff1;

        Ok(Self {
            n,
            quad_weights: clenshaw_curtis(big_n),
            cumulative: cumulative_matrix(big_n),
            nodes,
            diff1,
            diff2,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn diff1(&self) -> &Mat<f64> {
        &self.diff1
    }

    pub fn diff2(&self) -> &Mat<f64> {
        &self.diff2
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// `(Q f)_i = int_0^{u_i} f(s) ds` for the interpolant of `f`.
    pub fn cumulative(&self) -> &Mat<f64> {
        &self.cumulative
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n {
            Ok(())
        } else {
            Err(Error::Shape {
                expected: self.n,
                actual: len,
            })
        }
    }

    pub fn d1(&self, f: &[f64]) -> Vec<f64> {
        apply(&self.diff1, f)
    }

    pub fn d2(&self, f: &[f64]) -> Vec<f64> {
        apply(&self.diff2, f)
    }

    pub fn d1c(&self, f: &[Complex64]) -> Vec<Complex64> {
        apply_c(&self.diff1, f)
    }

    pub fn d2c(&self, f: &[Complex64]) -> Vec<Complex64> {
        apply_c(&self.diff2, f)
    }

    pub fn cumulative_c(&self, f: &[Complex64]) -> Vec<Complex64> {
        apply_c(&self.cumulative, f)
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.quad_weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_c(&self, f: &[Complex64]) -> Complex64 {
        self.quad_weights.iter().zip(f).map(|(w, v)| v * *w).sum()
    }
}

pub(crate) fn apply(m: &Mat<f64>, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.nrows()];
    for (j, fj) in f.iter().enumerate().take(m.ncols()) {
        for (o, v) in out.iter_mut().zip(m.col_as_slice(j)) {
            *o += v * fj;
        }
    }
    out
}

pub(crate) fn apply_c(m: &Mat<f64>, f: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); m.nrows()];
    for (j, fj) in f.iter().enumerate().take(m.ncols()) {
        for (o, v) in out.iter_mut().zip(m.col_as_slice(j)) {
            *o += fj * *v;
        }
    }
    out
}

/// Clenshaw–Curtis weights for `[0, 1]` on the `N + 1` Lobatto nodes.
fn clenshaw_curtis(big_n: usize) -> Vec<f64> {
    let nf = big_n as f64;
    let mut w = vec![0.0; big_n + 1];
    let theta = |i: usize| PI * i as f64 / nf;
    let mut v = vec![1.0; big_n.saturating_sub(1)];
    if big_n.is_multiple_of(2) {
        w[0] = 1.0 / (nf * nf - 1.0);
        for k in 1..big_n / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta(i + 1)).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= (nf * theta(i + 1)).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        for k in 1..=(big_n - 1) / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta(i + 1)).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    w[big_n] = w[0];
    for (i, vi) in v.iter().enumerate() {
        w[i + 1] = 2.0 * vi / nf;
    }
    w.iter().map(|x| x / 2.0).collect()
}

/// Exact indefinite integration of the degree-`N` interpolant, via Chebyshev
/// coefficients.
fn cumulative_matrix(big_n: usize) -> Mat<f64> {
    let n = big_n + 1;
    let nf = big_n as f64;
    // value -> coefficient map, f(x) = sum a_k T_k(x)
    let to_coef = Mat::<f64>::from_fn(n, n, |k, j| {
        let cj = if j == 0 || j == big_n { 0.5 } else { 1.0 };
        let ck = if k == 0 || k == big_n { 0.5 } else { 1.0 };
        2.0 / nf * ck * cj * (PI * (j * k) as f64 / nf).cos()
    });
    // antiderivative coefficients b_1..b_{N+1}
    let mut integ = Mat::<f64>::zeros(n + 1, n);
    for k in 1..=n {
        for j in 0..n {
            let a_prev = to_coef[(k - 1, j)] * if k == 1 { 2.0 } else { 1.0 };
            let a_next = if k + 1 < n { to_coef[(k + 1, j)] } else { 0.0 };
            integ[(k, j)] = (a_prev - a_next) / (2.0 * k as f64);
        }
    }
    // int_0^u f du' = (G(1) - G(x)) / 2 with x = 1 - 2u
    Mat::<f64>::from_fn(n, n, |i, j| {
        let mut s = 0.0;
        for k in 1..=n {
            let tk = (PI * (k * i) as f64 / nf).cos();
            s += integ[(k, j)] * (1.0 - tk);
        }
        0.5 * s
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_ordered_and_anchored() {
        let g = Grid::new(DEFAULT_NODES).unwrap();
        let u = g.nodes();
        assert_eq!(u[0], 0.0);
        assert_eq!(u[u.len() - 1], 1.0);
        assert!(u.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn differentiation_of_constants_vanishes() {
        let g = Grid::new(DEFAULT_NODES).unwrap();
        let ones = vec![1.0; g.n()];
        // roundoff relative to the row magnitude; rows reach ~2e4 at this size
        for (i, v) in g.d1(&ones).iter().enumerate() {
            let row: f64 = (0..g.n()).map(|j| g.diff1()[(i, j)].abs()).sum();
            assert!(v.abs() < 1e-15 * row, "row {i}: {v} vs {row}");
        }
    }

    #[test]
    fn differentiation_is_spectral() {
        let g = Grid::new(40).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|u| (3.0 * u).sin()).collect();
        let d1 = g.d1(&f);
        let d2 = g.d2(&f);
        for (i, u) in g.nodes().iter().enumerate() {
            assert!((d1[i] - 3.0 * (3.0 * u).cos()).abs() < 1e-10);
            assert!((d2[i] + 9.0 * (3.0 * u).sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn quadrature_exact_on_low_monomials() {
        for n in [5, 16, 64, 96, 97] {
            let g = Grid::new(n).unwrap();
            for p in 0..=4 {
                let f: Vec<f64> = g.nodes().iter().map(|u| u.powi(p)).collect();
                let exact = 1.0 / (p as f64 + 1.0);
                assert!((g.integrate(&f) - exact).abs() < 1e-12, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn cumulative_integration_of_polynomials() {
        for n in [12, 96, 97] {
            let g = Grid::new(n).unwrap();
            let f: Vec<f64> = g.nodes().iter().map(|u| 1.0 + 2.0 * u - 5.0 * u.powi(4)).collect();
            let fc: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let q = g.cumulative_c(&fc);
            for (i, u) in g.nodes().iter().enumerate() {
                let exact = u + u * u - u.powi(5);
                assert!((q[i].re - exact).abs() < 1e-12, "n={n}");
            }
        }
    }
}
