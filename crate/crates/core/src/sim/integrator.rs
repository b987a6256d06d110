use std::f64::consts::FRAC_1_SQRT_2;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;

use super::dynamics::Dynamics;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::Configuration;
use crate::params::RodParams;

/// Diagonal coefficient of the L-stable two-stage Rosenbrock scheme.
pub const ROS2_GAMMA: f64 = 1.0 + FRAC_1_SQRT_2;

/// Smallest step the adaptive controller may take.
pub const DT_MIN: f64 = 1e-12;

/// Two-stage linearly implicit Rosenbrock (ROS2) integrator.
///
/// Each step solves with `W = I - gamma h J`. The scheme is second order for
/// any `J`, so the Jacobian may be reused for `jacobian_every` steps; with
/// `jacobian_every = 1` it is refreshed at every step.
pub struct Integrator {
    dynamics: Dynamics,
    jacobian_every: usize,
    jacobian: Option<Mat<f64>>,
    age: usize,
    factor: Option<(f64, PartialPivLu<f64>)>,
}

impl Integrator {
    pub fn new(dynamics: Dynamics, jacobian_every: usize) -> Self {
        Self {
            dynamics,
            jacobian_every: jacobian_every.max(1),
            jacobian: None,
            age: 0,
            factor: None,
        }
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    fn prepare(&mut self, z: &[f64], h: f64) {
        if self.jacobian.is_none() || self.age >= self.jacobian_every {
            self.jacobian = Some(self.dynamics.jacobian(z));
            self.age = 0;
            self.factor = None;
        }
        if self.factor.as_ref().is_none_or(|(hf, _)| *hf != h) {
            let j = self.jacobian.as_ref().expect("jacobian prepared");
            let dim = j.nrows();
            let mut w = j * (-ROS2_GAMMA * h);
            for r in 0..dim {
                w[(r, r)] += 1.0;
            }
            self.factor = Some((h, w.partial_piv_lu()));
        }
    }

    fn solve(&self, rhs: Vec<f64>) -> Vec<f64> {
        let (_, lu) = self.factor.as_ref().expect("factor prepared");
        let b = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = lu.solve(&b);
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }

    /// One step of size `h` from `z` at time `t` (used only for diagnostics).
    pub fn step(&mut self, z: &[f64], h: f64, t: f64) -> Result<Vec<f64>> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Stiffness {
                time: t,
                dt: h,
                reason: "non-positive step".into(),
            });
        }
        self.prepare(z, h);
        let k1 = self.solve(self.dynamics.rhs(z));
        let z1: Vec<f64> = z.iter().zip(&k1).map(|(a, k)| a + h * k).collect();
        let f1 = self.dynamics.rhs(&z1);
        let k2 = self.solve(f1.iter().zip(&k1).map(|(f, k)| f - 2.0 * k).collect());
        self.age += 1;
        let out: Vec<f64> = z
            .iter()
            .zip(k1.iter().zip(&k2))
            .map(|(a, (p, q))| a + h * (1.5 * p + 0.5 * q))
            .collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Stiffness {
                time: t,
                dt: h,
                reason: "state became non-finite".into(),
            });
        }
        Ok(out)
    }

    /// Step-doubling error control. Returns the accepted state, the step that
    /// was taken and a proposal for the next one.
    pub fn step_adaptive(&mut self, z: &[f64], h: f64, t: f64, rtol: f64) -> Result<(Vec<f64>, f64, f64)> {
        let mut h = h;
        loop {
            if h < DT_MIN {
                return Err(Error::Stiffness {
                    time: t,
                    dt: h,
                    reason: format!("step size underflow below {DT_MIN:e}"),
                });
            }
            self.jacobian = None;
            let full = self.step(z, h, t)?;
            let half = self.step(z, 0.5 * h, t)?;
            let two = self.step(&half, 0.5 * h, t + 0.5 * h)?;
            let scale = two.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            let err = full
                .iter()
                .zip(&two)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
                / (rtol * scale);
            let grow = if err == 0.0 { 2.0 } else { (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 2.0) };
            if err <= 1.0 {
                return Ok((two, h, h * grow));
            }
            h *= grow;
        }
    }
}

/// One ROS2 step of a clamped configuration with a freshly evaluated Jacobian.
pub fn step(state: &Configuration, dt: f64, params: &RodParams, grid: &Grid) -> Result<Configuration> {
    let dynamics = Dynamics::new(params, grid);
    let z = dynamics.pack(state);
    let mut integ = Integrator::new(dynamics, 1);
    let out = integ.step(&z, dt, 0.0)?;
    Ok(integ.dynamics().unpack(&out))
}
