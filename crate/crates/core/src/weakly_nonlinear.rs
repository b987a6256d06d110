//! Second-order longitudinal corrections, resonant cubic forcing and the
//! Stuart–Landau coefficients obtained from the solvability condition.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::GammaWeights;
use crate::params::RodParams;
use crate::spectrum::{
    adjoint_mode, assemble_operator, critical_mode, find_hopf_threshold, gamma_inner, AdjointMode, CriticalMode, HopfPoint,
    ModeShape,
};

type C = Complex64;

const CONSISTENCY_LIMIT: f64 = 1e-6;
const NORMALIZATION_FLOOR: f64 = 1e-10;

fn c0() -> C {
    C::new(0.0, 0.0)
}

fn ci() -> C {
    C::new(0.0, 1.0)
}

fn max_abs(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
}

/// Second-order longitudinal mode shapes and stresses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadraticCorrections {
    pub x0: Vec<C>,
    pub x2: Vec<C>,
    pub p0: Vec<C>,
    pub p2: Vec<C>,
    /// `sqrt(-2 i omega_c gamma1 / k1)`; either branch gives the same `X2`.
    pub lambda: C,
}

/// Derivatives of the critical mode taken once on the grid.
struct ModeDerivs {
    ypp: Vec<C>,
    thp: Vec<C>,
    h2: Vec<C>,
}

fn derivs(mode: &CriticalMode, params: &RodParams, grid: &Grid) -> Result<ModeDerivs> {
    grid.check_len(mode.y.len())?;
    grid.check_len(mode.theta.len())?;
    let yp = grid.d1c(&mode.y);
    let ypp = grid.d2c(&mode.y);
    let thp = grid.d1c(&mode.theta);
    let nu = params.nu();
    let h2 = yp.iter().zip(&mode.theta).map(|(a, t)| a - t * nu).collect();
    Ok(ModeDerivs { ypp, thp, h2 })
}

/// Right-hand sides `r0`, `r2` of `k1 X0'' = r0`, `k1 X2'' - 2 i w gamma1 X2 = r2`
/// and the tip data `X0'(1) = b0`, `X2'(1) = b2`.
fn longitudinal_forcing(mode: &CriticalMode, params: &RodParams, d: &ModeDerivs) -> (Vec<C>, Vec<C>, C, C) {
    let (k1, k2, g1) = (params.k1_tilde, params.k2_tilde, params.gamma1_tilde);
    let w = mode.omega_c;
    let aniso = k2 - k1;
    let n = mode.y.len();
    let mut r0 = Vec::with_capacity(n);
    let mut r2 = Vec::with_capacity(n);
    for i in 0..n {
        let core = ci() * w * g1 * mode.y[i] - d.ypp[i] * k1;
        r0.push(mode.theta[i].conj() * core + d.thp[i] * d.h2[i].conj() * aniso);
        r2.push(mode.theta[i] * core + d.thp[i] * d.h2[i] * aniso);
    }
    let th1 = mode.theta[n - 1];
    let nu = params.nu();
    (r0, r2, C::from(-0.5 * nu * th1.norm_sqr()), -th1 * th1 * (0.5 * nu))
}

/// Collocation solve of `a X'' + c X = r`, `X(0) = 0`, `X'(1) = b`.
fn collocation_bvp(grid: &Grid, a: f64, c: C, r: &[C], b: C) -> Vec<C> {
    let n = grid.n();
    let d = grid.diff1();
    let d2 = grid.diff2();
    let mut m = Mat::<C>::from_fn(n, n, |i, j| {
        let v = C::from(a * d2[(i, j)]);
        if i == j { v + c } else { v }
    });
    let mut rhs = Mat::<C>::from_fn(n, 1, |i, _| r[i]);
    for j in 0..n {
        m[(0, j)] = c0();
        m[(n - 1, j)] = C::from(d[(n - 1, j)]);
    }
    m[(0, 0)] = C::from(1.0);
    rhs[(0, 0)] = c0();
    rhs[(n - 1, 0)] = b;
    let x = m.partial_piv_lu().solve(&rhs);
    let mut out: Vec<C> = (0..n).map(|i| x[(i, 0)]).collect();
    out[0] = c0();
    out
}

/// Branch constant of the `X2` problem.
pub fn x2_lambda(omega_c: f64, params: &RodParams) -> C {
    (C::new(0.0, -2.0 * omega_c * params.gamma1_tilde / params.k1_tilde)).sqrt()
}

/// `X0 = b u - int_0^u int_s^1 g`, with `g = r0 / k1`.
pub fn solve_x0_closed_form(mode: &CriticalMode, params: &RodParams, grid: &Grid) -> Result<Vec<C>> {
    let d = derivs(mode, params, grid)?;
    let (r0, _, b0, _) = longitudinal_forcing(mode, params, &d);
    let g: Vec<C> = r0.iter().map(|v| v / params.k1_tilde).collect();
    let big_g = grid.cumulative_c(&g);
    let total = big_g[grid.n() - 1];
    let tail: Vec<C> = big_g.iter().map(|v| total - v).collect();
    let inner = grid.cumulative_c(&tail);
    Ok(grid.nodes().iter().zip(&inner).map(|(u, q)| b0 * *u - q).collect())
}

/// Variation-of-parameters solution of `X2'' + lambda^2 X2 = g`, `g = r2 / k1`.
pub fn solve_x2_closed_form(mode: &CriticalMode, params: &RodParams, grid: &Grid, lambda: C) -> Result<Vec<C>> {
    let d = derivs(mode, params, grid)?;
    let (_, r2, _, b2) = longitudinal_forcing(mode, params, &d);
    let u = grid.nodes();
    let n = grid.n();
    let g: Vec<C> = r2.iter().map(|v| v / params.k1_tilde).collect();
    let gc: Vec<C> = g.iter().zip(u).map(|(v, s)| v * (lambda * s).cos()).collect();
    let gs: Vec<C> = g.iter().zip(u).map(|(v, s)| v * (lambda * s).sin()).collect();
    let ic = grid.cumulative_c(&gc);
    let is = grid.cumulative_c(&gs);
    // particular part vanishes at 0; homogeneous sin(lambda u) fixes the tip slope
    let xp: Vec<C> = (0..n)
        .map(|i| ((lambda * u[i]).sin() * ic[i] - (lambda * u[i]).cos() * is[i]) / lambda)
        .collect();
    let xp_slope = lambda.cos() * ic[n - 1] + lambda.sin() * is[n - 1];
    let amp = (b2 - xp_slope) / (lambda * lambda.cos());
    Ok((0..n).map(|i| xp[i] + amp * (lambda * u[i]).sin()).collect())
}

/// Zero-frequency longitudinal correction by collocation, cross-checked
/// against the closed form.
pub fn solve_x0(mode: &CriticalMode, params: &RodParams, grid: &Grid) -> Result<Vec<C>> {
    let d = derivs(mode, params, grid)?;
    let (r0, _, b0, _) = longitudinal_forcing(mode, params, &d);
    let x0 = collocation_bvp(grid, params.k1_tilde, c0(), &r0, b0);
    let oracle = solve_x0_closed_form(mode, params, grid)?;
    check_consistency("X0", &x0, &oracle)?;
    Ok(x0)
}

/// Second-harmonic longitudinal correction and its branch constant.
pub fn solve_x2(mode: &CriticalMode, params: &RodParams, grid: &Grid) -> Result<(Vec<C>, C)> {
    let d = derivs(mode, params, grid)?;
    let (_, r2, _, b2) = longitudinal_forcing(mode, params, &d);
    let c = ci() * (-2.0 * mode.omega_c * params.gamma1_tilde);
    let x2 = collocation_bvp(grid, params.k1_tilde, c, &r2, b2);
    let lambda = x2_lambda(mode.omega_c, params);
    let oracle = solve_x2_closed_form(mode, params, grid, lambda)?;
    check_consistency("X2", &x2, &oracle)?;
    Ok((x2, lambda))
}

fn check_consistency(what: &'static str, a: &[C], b: &[C]) -> Result<()> {
    let diff = max_diff(a, b) / max_abs(a).max(1.0);
    if diff > CONSISTENCY_LIMIT || !diff.is_finite() {
        return Err(Error::Consistency { what, difference: diff });
    }
    Ok(())
}

/// `P0 = k1 (X0' + Theta* H2 + nu |Theta|^2 / 2)`, `P2 = k1 (X2' + Theta H2 + nu Theta^2 / 2)`.
pub fn stress_corrections(
    x0: &[C],
    x2: &[C],
    mode: &CriticalMode,
    params: &RodParams,
    grid: &Grid,
) -> Result<(Vec<C>, Vec<C>)> {
    grid.check_len(x0.len())?;
    grid.check_len(x2.len())?;
    let d = derivs(mode, params, grid)?;
    let x0p = grid.d1c(x0);
    let x2p = grid.d1c(x2);
    let (k1, nu) = (params.k1_tilde, params.nu());
    let p0 = (0..grid.n())
        .map(|i| {
            let t = mode.theta[i];
            (x0p[i] + t.conj() * d.h2[i] + t.norm_sqr() * nu * 0.5) * k1
        })
        .collect();
    let p2 = (0..grid.n())
        .map(|i| {
            let t = mode.theta[i];
            (x2p[i] + t * d.h2[i] + t * t * (nu * 0.5)) * k1
        })
        .collect();
    Ok((p0, p2))
}

/// All second-order quantities for a critical mode.
pub fn quadratic_corrections(mode: &CriticalMode, params: &RodParams, grid: &Grid) -> Result<QuadraticCorrections> {
    let x0 = solve_x0(mode, params, grid)?;
    let (x2, lambda) = solve_x2(mode, params, grid)?;
    let (p0, p2) = stress_corrections(&x0, &x2, mode, params, grid)?;
    Ok(QuadraticCorrections { x0, x2, p0, p2, lambda })
}

/// Which printed form of the resonant forcing to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForcingForm {
    /// Equal stretch and shear stiffness only.
    Isotropic,
    /// General `k1 != k2` form; reduces to the isotropic one when `k1 = k2`.
    Anisotropic,
}

/// Resonant third-order forcing and the second-order data it is built from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForcingAssembly {
    pub form: ForcingForm,
    /// `Y' - nu Theta`.
    pub h2: Vec<C>,
    /// `k2 nu + F_c`.
    pub mu: f64,
    pub g1: Vec<C>,
    pub g2: Vec<C>,
    pub g3: Vec<C>,
    pub g4: Vec<C>,
    /// Right-hand sides of the `X0` and `X2` equations.
    pub f0: Vec<C>,
    pub f2: Vec<C>,
    /// Tip slopes imposed on `X0` and `X2`.
    pub b0: C,
    pub b2: C,
    /// Coefficient of `|A|^2 A`: `(0, g1, g3 / gamma3)`.
    pub cubic: ModeShape,
    /// Coefficient of `chi A`: `(0, g2, g4 / gamma3)`.
    pub linear: ModeShape,
    /// Coefficient of `dA/dT`: `-(0, Y, Theta)`.
    pub rate: ModeShape,
}

/// Assemble the resonant forcing columns.
pub fn assemble_forcing(
    mode: &CriticalMode,
    corr: &QuadraticCorrections,
    params: &RodParams,
    grid: &Grid,
    form: ForcingForm,
) -> Result<ForcingAssembly> {
    if form == ForcingForm::Isotropic && !params.is_isotropic() {
        return Err(Error::InvalidConfig(
            "isotropic forcing requested for k1_tilde != k2_tilde".into(),
        ));
    }
    let d = derivs(mode, params, grid)?;
    for v in [&corr.x0, &corr.x2, &corr.p0, &corr.p2] {
        grid.check_len(v.len())?;
    }
    let (f0, f2, b0, b2) = longitudinal_forcing(mode, params, &d);
    let n = grid.n();
    let u = grid.nodes();
    let w = mode.omega_c;
    let (k1, k2, g1c, g3c) = (params.k1_tilde, params.k2_tilde, params.gamma1_tilde, params.gamma3_tilde);
    let mu = params.mu();
    let (y, th, thp, h2) = (&mode.y, &mode.theta, &d.thp, &d.h2);
    let (x2, p0, p2) = (&corr.x2, &corr.p0, &corr.p2);
    let th1 = th[n - 1];

    let cubic_core = |i: usize| x2[i] * th[i].conj() * 2.0 - y[i].conj() * th[i] * th[i] + y[i] * th[i].norm_sqr() * 2.0;
    let (g1, g2, g3, g4): (Vec<C>, Vec<C>, Vec<C>, Vec<C>) = match form {
        ForcingForm::Isotropic => {
            let g1 = (0..n).map(|i| ci() * w * (1.0 - g1c) * cubic_core(i)).collect();
            let g2 = (0..n).map(|i| ci() * w / k1 * th1 * u[i]).collect();
            let g3 = (0..n)
                .map(|i| th[i].conj() * (thp[i] * thp[i] - p2[i]) + th[i] * (thp[i].norm_sqr() - p0[i].re) * 2.0)
                .collect();
            let g4 = (0..n).map(|i| th[i] - th1).collect();
            (g1, g2, g3, g4)
        }
        ForcingForm::Anisotropic => {
            let r = k2 / k1;
            let a = 1.0 - r;
            let g1 = (0..n)
                .map(|i| {
                    let q = p2[i] + h2[i] * k2;
                    ci() * w * (1.0 - r * g1c) * cubic_core(i) + (thp[i].conj() * q + thp[i] * (2.0 * q.re)) * a
                })
                .collect();
            let g2 = (0..n).map(|i| ci() * w / k1 * th1 * u[i] - thp[i] * a).collect();
            let g3 = (0..n)
                .map(|i| {
                    th[i].conj() * (thp[i] * thp[i] - p2[i] * (mu / k1))
                        + th[i] * (thp[i].norm_sqr() - mu / k1 * p0[i].re) * 2.0
                        - (p2[i] * h2[i].conj() + h2[i] * (2.0 * p0[i].re)) * a
                })
                .collect();
            let g4 = (0..n).map(|i| (th[i] - th1) * (mu / k1) + h2[i] * a).collect();
            (g1, g2, g3, g4)
        }
    };

    let zeros = vec![c0(); n];
    let cubic = ModeShape {
        x: zeros.clone(),
        y: g1.clone(),
        theta: g3.iter().map(|v| v / g3c).collect(),
    };
    let linear = ModeShape {
        x: zeros.clone(),
        y: g2.clone(),
        theta: g4.iter().map(|v| v / g3c).collect(),
    };
    let rate = ModeShape {
        x: zeros,
        y: y.iter().map(|v| -v).collect(),
        theta: th.iter().map(|v| -v).collect(),
    };
    Ok(ForcingAssembly {
        form,
        h2: h2.clone(),
        mu,
        g1,
        g2,
        g3,
        g4,
        f0,
        f2,
        b0,
        b2,
        cubic,
        linear,
        rate,
    })
}

/// Character of the bifurcation implied by the Landau coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criticality {
    Supercritical,
    Subcritical,
    Degenerate,
}

/// Stuart–Landau model `dA/dT = alpha |A|^2 A + beta chi A` and its predictions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandauModel {
    pub alpha: C,
    pub beta: C,
    pub normalization: C,
    pub omega_c: f64,
    pub force_crit: f64,
    pub form: ForcingForm,
    pub criticality: Criticality,
    /// Saturated `|A|` for `chi = 1`; present only when supercritical.
    pub rho_abs: Option<f64>,
    /// Slow-time frequency shift for `chi = 1`; present only when supercritical.
    pub sigma: Option<f64>,
    /// Arbitrary phase of the saturated amplitude, reported as zero.
    pub phase: f64,
}

impl LandauModel {
    pub fn from_coefficients(alpha: C, beta: C, normalization: C, omega_c: f64, force_crit: f64, form: ForcingForm) -> Self {
        let criticality = if alpha.re < 0.0 && beta.re > 0.0 {
            Criticality::Supercritical
        } else if alpha.re > 0.0 && beta.re > 0.0 {
            Criticality::Subcritical
        } else {
            Criticality::Degenerate
        };
        let (rho_abs, sigma) = if criticality == Criticality::Supercritical {
            let ratio = beta.re / alpha.re;
            (Some((-ratio).sqrt()), Some(-alpha.im * ratio + beta.im))
        } else {
            (None, None)
        };
        Self {
            alpha,
            beta,
            normalization,
            omega_c,
            force_crit,
            form,
            criticality,
            rho_abs,
            sigma,
            phase: 0.0,
        }
    }

    /// Tip amplitude prefactor `C = 2 |rho|`.
    pub fn amplitude_constant(&self) -> Option<f64> {
        self.rho_abs.map(|r| 2.0 * r)
    }
}

fn normalization(mode: &CriticalMode, adjoint: &AdjointMode, weights: &GammaWeights, grid: &Grid) -> Result<C> {
    let n = gamma_inner(grid, weights, &adjoint.shape(), &mode.shape())?;
    let psi = gamma_inner(grid, weights, &adjoint.shape(), &adjoint.shape())?.re.sqrt();
    let xi = gamma_inner(grid, weights, &mode.shape(), &mode.shape())?.re.sqrt();
    let rel = n.norm() / (psi * xi);
    if !(rel > NORMALIZATION_FLOOR) {
        return Err(Error::DegenerateNormalization { magnitude: rel });
    }
    Ok(n)
}

/// Landau coefficients from the Gamma-weighted projection of the forcing onto
/// the adjoint mode, with the general forcing form.
pub fn landau_coefficients(
    mode: &CriticalMode,
    adjoint: &AdjointMode,
    corr: &QuadraticCorrections,
    params: &RodParams,
    grid: &Grid,
) -> Result<LandauModel> {
    landau_coefficients_with(mode, adjoint, corr, params, grid, ForcingForm::Anisotropic)
}

pub fn landau_coefficients_with(
    mode: &CriticalMode,
    adjoint: &AdjointMode,
    corr: &QuadraticCorrections,
    params: &RodParams,
    grid: &Grid,
    form: ForcingForm,
) -> Result<LandauModel> {
    let weights = GammaWeights::from_params(params);
    let forcing = assemble_forcing(mode, corr, params, grid, form)?;
    let norm = normalization(mode, adjoint, &weights, grid)?;
    let psi = adjoint.shape();
    let alpha = gamma_inner(grid, &weights, &psi, &forcing.cubic)? / norm;
    let beta = gamma_inner(grid, &weights, &psi, &forcing.linear)? / norm;
    Ok(LandauModel::from_coefficients(
        alpha,
        beta,
        norm,
        mode.omega_c,
        params.force_tilde,
        form,
    ))
}

/// Tip amplitude `2 |rho| sqrt(F - F_c)` and frequency `omega_c + (F - F_c) sigma`.
pub fn predict_tip(landau: &LandauModel, force_tilde: f64) -> Result<(f64, f64)> {
    let (rho, sigma) = match (landau.rho_abs, landau.sigma) {
        (Some(r), Some(s)) => (r, s),
        _ => {
            return Err(Error::NotApplicable(format!(
                "{:?} bifurcation (Re alpha = {:.6e}, Re beta = {:.6e})",
                landau.criticality, landau.alpha.re, landau.beta.re
            )))
        }
    };
    let delta = force_tilde - landau.force_crit;
    let amplitude = if delta > 0.0 { 2.0 * rho * delta.sqrt() } else { 0.0 };
    Ok((amplitude, landau.omega_c + delta * sigma))
}

/// Forcing channels kept in the solvability check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Channels {
    pub cubic: bool,
    pub linear: bool,
}

impl Channels {
    pub const ALL: Channels = Channels {
        cubic: true,
        linear: true,
    };
}

/// Relative size of `(Psi, G)_Gamma` once `dA/dT` is replaced by the Landau
/// right-hand side; zero when the coefficients close the hierarchy.
pub fn solvability_residual(
    mode: &CriticalMode,
    adjoint: &AdjointMode,
    corr: &QuadraticCorrections,
    landau: &LandauModel,
    params: &RodParams,
    grid: &Grid,
    channels: Channels,
) -> Result<f64> {
    let weights = GammaWeights::from_params(params);
    let forcing = assemble_forcing(mode, corr, params, grid, landau.form)?;
    let psi = adjoint.shape();
    let a = if channels.cubic { 1.0 } else { 0.0 };
    let c = if channels.linear { 1.0 } else { 0.0 };
    let rate = landau.alpha * a + landau.beta * c;
    let n = grid.n();
    let combine = |f: fn(&ModeShape) -> &Vec<C>| -> Vec<C> {
        (0..n)
            .map(|i| f(&forcing.cubic)[i] * a + f(&forcing.linear)[i] * c + f(&forcing.rate)[i] * rate)
            .collect()
    };
    let total = ModeShape {
        x: combine(|s| &s.x),
        y: combine(|s| &s.y),
        theta: combine(|s| &s.theta),
    };
    let r = gamma_inner(grid, &weights, &psi, &total)?;
    let scale = landau.normalization.norm() * (a * landau.alpha.norm() + c * landau.beta.norm());
    if scale == 0.0 {
        return Ok(r.norm());
    }
    Ok(r.norm() / scale)
}

/// Everything the weakly nonlinear reduction produces for one rod.
#[derive(Debug, Clone)]
pub struct HopfAnalysis {
    pub hopf: HopfPoint,
    /// The template with the force set to the threshold.
    pub params: RodParams,
    pub mode: CriticalMode,
    pub adjoint: AdjointMode,
    pub corrections: QuadraticCorrections,
    pub landau: LandauModel,
}

/// Threshold search, critical and adjoint modes, quadratic corrections and
/// Landau coefficients for a parameter template (its force is ignored).
pub fn analyze_hopf(template: &RodParams, grid: &Grid, form: ForcingForm) -> Result<HopfAnalysis> {
    let hopf = find_hopf_threshold(template, grid)?;
    let params = template.with_force(hopf.force_crit);
    let op = assemble_operator(&params, grid);
    let mode = critical_mode(&op, hopf.omega_c)?;
    let adjoint = adjoint_mode(&op, &GammaWeights::from_params(&params), hopf.omega_c)?;
    let corrections = quadratic_corrections(&mode, &params, grid)?;
    let landau = landau_coefficients_with(&mode, &adjoint, &corrections, &params, grid, form)?;
    Ok(HopfAnalysis {
        hopf,
        params,
        mode,
        adjoint,
        corrections,
        landau,
    })
}
