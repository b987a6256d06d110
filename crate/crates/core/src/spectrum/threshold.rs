use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::characteristic::{refine_root, Problem};
use super::operator::assemble_operator;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::RodParams;

/// Flutter onset, Hopf threshold and critical frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint {
    pub force_star: f64,
    pub force_crit: f64,
    pub omega_c: f64,
    /// Real part of the critical eigenvalue at `force_crit`.
    pub growth_residual: f64,
}

/// Bracket and resolution of the threshold searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptions {
    pub force_lo: f64,
    pub force_hi: f64,
    pub scan_step: f64,
    pub force_tol: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            force_lo: 0.0,
            force_hi: 200.0,
            scan_step: 1.0,
            force_tol: 1e-6,
        }
    }
}

/// Eigenvalues of the transverse collocation block, finite ones only, by
/// descending real part.
pub fn transverse_eigenvalues(params: &RodParams, grid: &Grid) -> Result<Vec<Complex64>> {
    let op = assemble_operator(params, grid);
    let t = op.transverse();
    let mut ev: Vec<Complex64> = t
        .eigenvalues()
        .map_err(|_| Error::EigenSolver {
            size: t.nrows(),
            condition_estimate: f64::NAN,
        })?
        .into_iter()
        .filter(|w| w.is_finite() && w.norm() <= 1e8)
        .collect();
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(ev)
}

/// `(w1 - w2)^2` of the two least stable transverse eigenvalues: positive while
/// they are real and distinct, negative once they form a complex pair.
///
/// Unlike the eigenvalues themselves this is smooth through the merger.
pub fn leading_pair_discriminant(params: &RodParams, grid: &Grid) -> Result<f64> {
    let ev = transverse_eigenvalues(params, grid)?;
    if ev.len() < 2 {
        return Err(Error::EigenSolver {
            size: ev.len(),
            condition_estimate: f64::NAN,
        });
    }
    let (a, b) = (ev[0], ev[1]);
    if a.im.abs() > 0.0 && (a - b.conj()).norm() <= 1e-9 * a.norm().max(1.0) {
        Ok(-4.0 * a.im * a.im)
    } else {
        Ok((a.re - b.re).powi(2) - (a.im - b.im).powi(2))
    }
}

fn bisect<F: FnMut(f64) -> Result<bool>>(mut lo: f64, mut hi: f64, tol: f64, mut above: F) -> Result<(f64, f64)> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// Force at which the two leading real eigenvalues merge into a complex pair.
pub fn find_flutter_onset(template: &RodParams, grid: &Grid) -> Result<f64> {
    find_flutter_onset_in(template, grid, &ThresholdOptions::default())
}

pub fn find_flutter_onset_in(template: &RodParams, grid: &Grid, opts: &ThresholdOptions) -> Result<f64> {
    let disc = |f: f64| leading_pair_discriminant(&template.with_force(f), grid);
    let mut lo = opts.force_lo;
    if disc(lo)? <= 0.0 {
        return Err(Error::Bracket {
            quantity: "leading-pair discriminant",
            lo: opts.force_lo,
            hi: opts.force_hi,
        });
    }
    loop {
        let hi = (lo + opts.scan_step).min(opts.force_hi);
        if disc(hi)? < 0.0 {
            let (a, b) = bisect(lo, hi, opts.force_tol, |f| Ok(disc(f)? < 0.0))?;
            return Ok(0.5 * (a + b));
        }
        if hi >= opts.force_hi {
            return Err(Error::Bracket {
                quantity: "leading-pair discriminant",
                lo: opts.force_lo,
                hi: opts.force_hi,
            });
        }
        lo = hi;
    }
}

/// Least stable complex eigenvalue with positive imaginary part.
fn leading_oscillatory(params: &RodParams, grid: &Grid) -> Result<Option<Complex64>> {
    Ok(transverse_eigenvalues(params, grid)?
        .into_iter()
        .find(|w| w.im > 1e-9 * w.norm().max(1.0)))
}

/// Force at which the complex pair crosses the imaginary axis.
pub fn find_hopf_threshold(template: &RodParams, grid: &Grid) -> Result<HopfPoint> {
    find_hopf_threshold_in(template, grid, &ThresholdOptions::default())
}

pub fn find_hopf_threshold_in(template: &RodParams, grid: &Grid, opts: &ThresholdOptions) -> Result<HopfPoint> {
    let force_star = find_flutter_onset_in(template, grid, opts)?;
    let bracket_err = || Error::Bracket {
        quantity: "real part of the leading complex pair",
        lo: force_star,
        hi: opts.force_hi,
    };

    // coarse scan on collocation eigenvalues
    let mut lo = force_star;
    let mut hi;
    loop {
        hi = (lo + opts.scan_step).min(opts.force_hi);
        if let Some(w) = leading_oscillatory(&template.with_force(hi), grid)? {
            if w.re > 0.0 {
                break;
            }
        }
        if hi >= opts.force_hi {
            return Err(bracket_err());
        }
        lo = hi;
    }

    // polish on the exact determinant, continuing the root in the force
    let mut guess = leading_oscillatory(&template.with_force(hi), grid)?.ok_or_else(bracket_err)?;
    let root_at = |f: f64, g: Complex64| -> Result<Complex64> {
        refine_root(g, &template.with_force(f), Problem::Direct, 0.05 * g.norm().max(1.0))
    };
    guess = root_at(hi, guess)?;
    let w_lo = {
        let g = leading_oscillatory(&template.with_force(lo), grid)?.unwrap_or(guess);
        root_at(lo, g)?
    };
    if w_lo.re >= 0.0 || guess.re <= 0.0 {
        return Err(bracket_err());
    }
    let mut last = guess;
    let (mut a, mut b) = bisect(lo, hi, opts.force_tol, |f| {
        let w = root_at(f, last)?;
        last = w;
        Ok(w.re > 0.0)
    })?;

    // secant polish of Re w(F) = 0 inside the final bracket
    let mut wa = root_at(a, last)?;
    let mut wb = root_at(b, wa)?;
    let mut f_c = 0.5 * (a + b);
    let mut w_c = wb;
    for _ in 0..20 {
        if (wb.re - wa.re).abs() == 0.0 {
            break;
        }
        f_c = b - wb.re * (b - a) / (wb.re - wa.re);
        w_c = root_at(f_c, wb)?;
        if w_c.re.abs() < 1e-12 {
            break;
        }
        a = b;
        wa = wb;
        b = f_c;
        wb = w_c;
    }
    Ok(HopfPoint {
        force_star,
        force_crit: f_c,
        omega_c: w_c.im,
        growth_residual: w_c.re,
    })
}
