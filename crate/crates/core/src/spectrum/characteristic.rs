//! Exact characteristic determinant of the transverse eigenproblem.
//!
//! With constant coefficients the transverse system has solutions
//! `exp(m u)` where `s = m^2` solves a quadratic. Imposing the four boundary
//! conditions on the four-dimensional solution space gives a 4x4 matrix whose
//! determinant vanishes exactly at eigenvalues. Collocation supplies the
//! initial guess; Newton on the determinant supplies the digits.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::RodParams;

/// Which boundary value problem the determinant encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Direct,
    Adjoint,
}

/// Transverse profile and first derivative at one point.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Sample {
    pub y: Complex64,
    pub yp: Complex64,
    pub th: Complex64,
    pub thp: Complex64,
}

/// The two values of `s = m^2` at growth rate `omega`.
pub fn char_roots(omega: Complex64, params: &RodParams) -> (Complex64, Complex64) {
    let (k2, g3, f) = (params.k2_tilde, params.gamma3_tilde, params.force_tilde);
    let (nu, mu) = (params.nu(), params.mu());
    // mu^2 - k2 mu nu = mu F, written without the cancellation
    let b = Complex64::from(mu * f / k2) - omega * g3 - omega / k2;
    let c = omega * (omega * g3 + mu * nu) / k2;
    let disc = (b * b - c * 4.0).sqrt();
    let (p, q) = (-b - disc, -b + disc);
    let s1 = if p.norm() >= q.norm() { p / 2.0 } else { q / 2.0 };
    let s2 = if s1.norm() > 0.0 { c / s1 } else { Complex64::new(0.0, 0.0) };
    (s1, s2)
}

fn sinh_over(m: Complex64, u: f64) -> Complex64 {
    if m.norm() < 1e-8 {
        Complex64::from(u) * (Complex64::from(1.0) + m * m * (u * u / 6.0))
    } else {
        (m * u).sinh() / m
    }
}

/// The four basis solutions at `u`.
pub(crate) fn basis(omega: Complex64, params: &RodParams, u: f64) -> [Sample; 4] {
    let (s1, s2) = char_roots(omega, params);
    let mu = params.mu();
    let mut out = [Sample::default(); 4];
    for (k, s) in [s1, s2].into_iter().enumerate() {
        let m = s.sqrt();
        let q = s * params.k2_tilde - omega;
        if m.re > 2.0 {
            // boundary-layer pair exp(m (u - 1)), exp(-m u): no overflow, no cancellation
            let ep = (m * (u - 1.0)).exp();
            let em = (-m * u).exp();
            out[2 * k] = Sample {
                y: ep * m * mu,
                yp: ep * s * mu,
                th: q * ep,
                thp: q * m * ep,
            };
            out[2 * k + 1] = Sample {
                y: -em * m * mu,
                yp: em * s * mu,
                th: q * em,
                thp: -q * m * em,
            };
            continue;
        }
        let ch = (m * u).cosh();
        let msh = m * (m * u).sinh();
        let sh_m = sinh_over(m, u);
        out[2 * k] = Sample {
            y: msh * mu,
            yp: ch * s * mu,
            th: q * ch,
            thp: q * msh,
        };
        out[2 * k + 1] = Sample {
            y: ch * mu,
            yp: msh * mu,
            th: q * sh_m,
            thp: q * ch,
        };
    }
    out
}

/// Boundary matrix: rows are the conditions, columns the basis solutions.
pub fn boundary_matrix(omega: Complex64, params: &RodParams, problem: Problem) -> [[Complex64; 4]; 4] {
    let b0 = basis(omega, params, 0.0);
    let b1 = basis(omega, params, 1.0);
    let (nu, mu, k2, f) = (params.nu(), params.mu(), params.k2_tilde, params.force_tilde);
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for j in 0..4 {
        m[0][j] = b0[j].y;
        m[1][j] = b0[j].th;
        match problem {
            Problem::Direct => {
                m[2][j] = b1[j].yp - b1[j].th * nu;
                m[3][j] = b1[j].thp;
            }
            Problem::Adjoint => {
                m[2][j] = b1[j].yp * k2 - b1[j].th * mu;
                m[3][j] = b1[j].thp + b1[j].y * f;
            }
        }
    }
    m
}

fn column_scales(m: &[[Complex64; 4]; 4]) -> [f64; 4] {
    let mut s = [0.0; 4];
    for (j, sj) in s.iter_mut().enumerate() {
        *sj = (0..4).map(|i| m[i][j].norm()).fold(0.0, f64::max);
        if *sj == 0.0 || !sj.is_finite() {
            *sj = 1.0;
        }
    }
    s
}

fn det4(m: &[[Complex64; 4]; 4], scales: &[f64; 4]) -> Complex64 {
    let mut a = *m;
    for row in a.iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v /= scales[j];
        }
    }
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..4 {
        let p = (k..4)
            .max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm()))
            .unwrap_or(k);
        if a[p][k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..4 {
            let l = a[i][k] / a[k][k];
            for j in k..4 {
                let t = a[k][j];
                a[i][j] -= l * t;
            }
        }
    }
    det
}

/// Column-scaled characteristic determinant.
pub fn characteristic_det(omega: Complex64, params: &RodParams, problem: Problem) -> Complex64 {
    let m = boundary_matrix(omega, params, problem);
    det4(&m, &column_scales(&m))
}

/// Newton refinement of a root of the characteristic determinant.
///
/// Fails when Newton stalls, when it lands on the degenerate point `s1 = s2`
/// (where the basis collapses and the determinant vanishes spuriously), or when
/// the root wanders further than `max_shift` from the guess.
pub fn refine_root(guess: Complex64, params: &RodParams, problem: Problem, max_shift: f64) -> Result<Complex64> {
    let fail = || Error::Refinement {
        guess_re: guess.re,
        guess_im: guess.im,
    };
    let mut w = guess;
    let mut last_step = f64::INFINITY;
    for _ in 0..60 {
        let m = boundary_matrix(w, params, problem);
        let scales = column_scales(&m);
        let f0 = det4(&m, &scales);
        if f0.norm() == 0.0 {
            last_step = 0.0;
            break;
        }
        let h = 1e-7 * w.norm().max(1.0);
        let fp = det4(&boundary_matrix(w + h, params, problem), &scales);
        let fm = det4(&boundary_matrix(w - h, params, problem), &scales);
        let dfdw = (fp - fm) / (2.0 * h);
        if dfdw.norm() == 0.0 || !dfdw.is_finite() {
            return Err(fail());
        }
        let step = f0 / dfdw;
        w -= step;
        if !w.is_finite() {
            return Err(fail());
        }
        last_step = step.norm();
        if last_step <= 1e-15 * w.norm().max(1.0) {
            break;
        }
    }
    let converged = last_step <= 1e-11 * w.norm().max(1.0);
    if !converged || (w - guess).norm() > max_shift {
        return Err(fail());
    }
    let (s1, s2) = char_roots(w, params);
    if (s1 - s2).norm() <= 1e-6 * (s1.norm() + s2.norm()) {
        return Err(fail());
    }
    Ok(w)
}

/// Basis coefficients spanning the null space of the boundary matrix.
pub(crate) fn null_coefficients(omega: Complex64, params: &RodParams, problem: Problem) -> [Complex64; 4] {
    let m = boundary_matrix(omega, params, problem);
    let scales = column_scales(&m);
    let a = Mat::<Complex64>::from_fn(4, 4, |i, j| m[i][j] / scales[j]);
    let svd = a.svd().expect("4x4 svd converges");
    let s = svd.S();
    let v = svd.V();
    let mut k = 0;
    for i in 1..4 {
        if s[i].re < s[k].re {
            k = i;
        }
    }
    let mut c = [Complex64::new(0.0, 0.0); 4];
    for (j, cj) in c.iter_mut().enumerate() {
        *cj = v[(j, k)] / scales[j];
    }
    c
}

/// Transverse eigenfunction `(y, theta)` at the given points.
pub(crate) fn eigenfunction(
    omega: Complex64,
    params: &RodParams,
    problem: Problem,
    points: &[f64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let c = null_coefficients(omega, params, problem);
    points
        .iter()
        .map(|&u| {
            let b = basis(omega, params, u);
            let mut y = Complex64::new(0.0, 0.0);
            let mut th = Complex64::new(0.0, 0.0);
            for j in 0..4 {
                y += c[j] * b[j].y;
                th += c[j] * b[j].th;
            }
            (y, th)
        })
        .unzip()
}
