//! Time integration of the full nonlinear rod dynamics and limit-cycle
//! post-processing.

mod cycle;
mod dynamics;
mod integrator;
mod io;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use cycle::{
    detect_saturation, extract_cycle_series, find_extrema, parabolic_vertex, up_crossings, CycleEstimate,
    CycleTracker, SaturationCriteria, MIN_PEAKS, TAIL_FRACTION,
};
pub use dynamics::{rhs, Dynamics, Rates};
pub use integrator::{step, Integrator, DT_MIN, ROS2_GAMMA};
pub use io::{read_tip_csv, write_snapshots_csv, write_tip_csv, RunMetadata};

use crate::error::{Error, Result};
use crate::grid::{Grid, DEFAULT_NODES};
use crate::model::{base_state, Configuration};
use crate::params::RodParams;
use crate::spectrum::{assemble_operator, critical_mode, find_hopf_threshold, transverse_eigenvalues};

/// Shape of the transverse perturbation added to the base state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationShape {
    /// Real part of the critical mode, normalized to unit tip deflection.
    CriticalMode,
    /// `y = sin(pi u / 2)`, `theta = y'`.
    Bump,
    /// Explicit nodal profiles on the simulation grid.
    Profile { y: Vec<f64>, theta: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub amplitude: f64,
    #[serde(default = "default_shape")]
    pub shape: PerturbationShape,
}

fn default_shape() -> PerturbationShape {
    PerturbationShape::CriticalMode
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            amplitude: 1e-3,
            shape: PerturbationShape::CriticalMode,
        }
    }
}

/// Settings of a single nonlinear run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub params: RodParams,
    #[serde(default = "default_nodes")]
    pub n: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default)]
    pub perturbation: Perturbation,
    #[serde(default)]
    pub saturation: SaturationCriteria,
    /// Record the tip every this many steps.
    #[serde(default = "one")]
    pub sample_every: usize,
    /// Refresh the Jacobian every this many steps.
    #[serde(default = "default_jacobian_every")]
    pub jacobian_every: usize,
    /// Step-doubling relative tolerance; fixed steps when absent.
    #[serde(default)]
    pub adaptive_tol: Option<f64>,
    /// Store full configurations at roughly this time interval.
    #[serde(default)]
    pub snapshot_interval: Option<f64>,
    /// Oscillation frequency used for the horizon check and decay window.
    #[serde(default)]
    pub omega_estimate: Option<f64>,
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}
fn default_dt() -> f64 {
    1e-4
}
fn default_t_max() -> f64 {
    20.0
}
fn one() -> usize {
    1
}
fn default_jacobian_every() -> usize {
    1
}

impl SimConfig {
    pub fn new(params: RodParams) -> Self {
        Self {
            params,
            n: default_nodes(),
            dt: default_dt(),
            t_max: default_t_max(),
            perturbation: Perturbation::default(),
            saturation: SaturationCriteria::default(),
            sample_every: 1,
            jacobian_every: default_jacobian_every(),
            adaptive_tol: None,
            snapshot_interval: None,
            omega_estimate: None,
        }
    }

    /// Checks that do not need an oscillation frequency.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n < 8 {
            return bad(format!("n = {} is too small for the simulation grid", self.n));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_max.is_finite() && self.t_max > self.dt) {
            return bad(format!("t_max = {} must exceed dt = {}", self.t_max, self.dt));
        }
        let a = self.perturbation.amplitude;
        if !(a > 0.0 && a <= 0.1) {
            return bad(format!("perturbation amplitude {a} outside (0, 0.1]"));
        }
        if let PerturbationShape::Profile { y, theta } = &self.perturbation.shape {
            if y.len() != self.n || theta.len() != self.n {
                return bad(format!(
                    "profile lengths ({}, {}) do not match n = {}",
                    y.len(),
                    theta.len(),
                    self.n
                ));
            }
        }
        let s = &self.saturation;
        if !(s.drift_tol > 0.0 && s.periods > 0 && s.decay_ratio > 0.0 && s.decay_ratio < 1.0) {
            return bad("saturation criteria must be positive with decay_ratio < 1".into());
        }
        if self.sample_every == 0 || self.jacobian_every == 0 {
            return bad("sample_every and jacobian_every must be at least 1".into());
        }
        if let Some(tol) = self.adaptive_tol {
            if !(tol > 0.0 && tol < 1.0) {
                return bad(format!("adaptive tolerance {tol} outside (0, 1)"));
            }
        }
        if let Some(w) = self.omega_estimate {
            if !(w.is_finite() && w > 0.0) {
                return bad(format!("omega estimate must be positive, got {w}"));
            }
        }
        Ok(())
    }

    /// The horizon must cover at least 100 oscillation periods.
    pub fn validate_horizon(&self, omega: f64) -> Result<()> {
        let need = 100.0 * 2.0 * PI / omega;
        if self.t_max <= need {
            return Err(Error::InvalidConfig(format!(
                "t_max = {} does not cover 100 periods ({need:.4}) at omega = {omega:.4}",
                self.t_max
            )));
        }
        Ok(())
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Saturated,
    Decayed,
    Horizon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub config: Configuration,
}

/// Tip time series and the limit-cycle measurements of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub times: Vec<f64>,
    pub tip_x: Vec<f64>,
    pub tip_y: Vec<f64>,
    pub saturated: bool,
    pub outcome: Outcome,
    /// Half peak-to-peak of `y(1, t)` on the saturated tail.
    pub amplitude: Option<f64>,
    /// Angular frequency of the saturated tail.
    pub frequency: Option<f64>,
    pub saturation_time: Option<f64>,
    pub steps: usize,
    pub snapshots: Vec<Snapshot>,
}

impl SimRecord {
    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// Amplitude and angular frequency over the final fifth of the tip series.
pub fn extract_cycle(record: &SimRecord) -> Result<(f64, f64)> {
    let c = extract_cycle_series(&record.times, &record.tip_y)?;
    Ok((c.amplitude, c.frequency))
}

/// Nodal `(y, theta)` of the perturbation shape and a frequency estimate, if one
/// came for free.
fn resolve_shape(config: &SimConfig, grid: &Grid) -> Result<(Vec<f64>, Vec<f64>, Option<f64>)> {
    match &config.perturbation.shape {
        PerturbationShape::CriticalMode => {
            let hopf = find_hopf_threshold(&config.params, grid)?;
            let op = assemble_operator(&config.params.with_force(hopf.force_crit), grid);
            let mode = critical_mode(&op, hopf.omega_c)?;
            Ok((
                mode.y.iter().map(|v| v.re).collect(),
                mode.theta.iter().map(|v| v.re).collect(),
                Some(hopf.omega_c),
            ))
        }
        PerturbationShape::Bump => {
            let y = grid.nodes().iter().map(|u| (0.5 * PI * u).sin()).collect();
            let th = grid.nodes().iter().map(|u| 0.5 * PI * (0.5 * PI * u).cos()).collect();
            Ok((y, th, None))
        }
        PerturbationShape::Profile { y, theta } => Ok((y.clone(), theta.clone(), None)),
    }
}

fn leading_frequency(params: &RodParams, grid: &Grid) -> Result<Option<f64>> {
    Ok(transverse_eigenvalues(params, grid)?
        .into_iter()
        .find(|w| w.im > 1e-9 * w.norm().max(1.0))
        .map(|w| w.im))
}

/// Integrate until saturation, decay or the horizon.
///
/// After saturation is detected the run continues for the longer of 20
/// periods and a quarter of the elapsed time, so the extraction window lies
/// entirely in the saturated regime.
pub fn run(config: &SimConfig) -> Result<SimRecord> {
    config.validate()?;
    let grid = Grid::new(config.n)?;
    let (ys, ths, mode_omega) = resolve_shape(config, &grid)?;
    let omega = match config.omega_estimate.or(mode_omega) {
        Some(w) => Some(w),
        None => leading_frequency(&config.params, &grid)?,
    };
    if let Some(w) = omega {
        config.validate_horizon(w)?;
    }

    let dynamics = Dynamics::new(&config.params, &grid);
    let base = base_state(&config.params, &grid);
    let delta = config.perturbation.amplitude;
    let init = Configuration {
        x: base.x.clone(),
        y: ys.iter().map(|v| delta * v).collect(),
        theta: ths.iter().map(|v| delta * v).collect(),
    };
    let mut z = dynamics.pack(&init);
    let mut integ = Integrator::new(dynamics, config.jacobian_every);

    let mut times = Vec::new();
    let mut tip_x = Vec::new();
    let mut tip_y = Vec::new();
    let mut snapshots = Vec::new();
    let mut tracker = CycleTracker::new(config.saturation);
    let (x0, y0) = integ.dynamics().tip(&z);
    times.push(0.0);
    tip_x.push(x0);
    tip_y.push(y0);
    tracker.push(0.0, y0);
    if config.snapshot_interval.is_some() {
        snapshots.push(Snapshot {
            time: 0.0,
            config: integ.dynamics().unpack(&z),
        });
    }
    let reference = if y0 != 0.0 {
        y0.abs()
    } else {
        init.y.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    };
    let decay_window = omega.map_or(0.05, |w| 2.0 * 2.0 * PI / w);

    let mut t = 0.0;
    let mut h = config.dt;
    let mut steps = 0usize;
    let mut saturation_time = None;
    let mut stop_at = config.t_max;
    let mut next_snapshot = config.snapshot_interval;
    let mut outcome = Outcome::Horizon;
    while t < stop_at - 1e-12 * stop_at {
        let h_try = h.min(stop_at - t);
        let (z_new, taken) = match config.adaptive_tol {
            Some(tol) => {
                let (zn, used, next) = integ.step_adaptive(&z, h_try, t, tol)?;
                h = next;
                (zn, used)
            }
            None => (integ.step(&z, h_try, t)?, h_try),
        };
        z = z_new;
        t += taken;
        steps += 1;

        if steps.is_multiple_of(config.sample_every) {
            let (xt, yt) = integ.dynamics().tip(&z);
            times.push(t);
            tip_x.push(xt);
            tip_y.push(yt);
            if tracker.push(t, yt) && saturation_time.is_none() {
                saturation_time = Some(t);
                let period = tracker.period().or(omega.map(|w| 2.0 * PI / w)).unwrap_or(0.0);
                stop_at = (t + (20.0 * period).max(0.25 * t)).min(config.t_max);
                outcome = Outcome::Saturated;
            }
            if saturation_time.is_none() && t > decay_window && times.len() % 16 == 0 {
                let from = times.partition_point(|s| *s < t - decay_window);
                let env = tip_y[from..].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if env < config.saturation.decay_ratio * reference {
                    outcome = Outcome::Decayed;
                    break;
                }
            }
        }
        if let (Some(next), Some(every)) = (next_snapshot, config.snapshot_interval) {
            if t >= next {
                snapshots.push(Snapshot {
                    time: t,
                    config: integ.dynamics().unpack(&z),
                });
                next_snapshot = Some(next + every);
            }
        }
    }

    let mut record = SimRecord {
        times,
        tip_x,
        tip_y,
        saturated: outcome == Outcome::Saturated,
        outcome,
        amplitude: None,
        frequency: None,
        saturation_time,
        steps,
        snapshots,
    };
    if record.saturated {
        let (a, w) = extract_cycle(&record)?;
        record.amplitude = Some(a);
        record.frequency = Some(w);
    }
    Ok(record)
}
