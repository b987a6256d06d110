//! JSON run specifications shared by all subcommands.

use std::path::{Path, PathBuf};

use rodhopf::sim::{Perturbation, PerturbationShape, SaturationCriteria, SimConfig};
use rodhopf::{Error, Result, RodParams};
use serde::{Deserialize, Serialize};

/// Rod parameters without a committed force. Either `kappa` (shear-stretch
/// isotropic rod) or both `k1_tilde` and `k2_tilde` must be given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsTemplate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1_tilde: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2_tilde: Option<f64>,
    pub gamma1_tilde: f64,
    pub gamma3_tilde: f64,
}

impl ParamsTemplate {
    pub fn at(&self, force_tilde: f64) -> Result<RodParams> {
        match (self.kappa, self.k1_tilde, self.k2_tilde) {
            (Some(k), None, None) => RodParams::isotropic(k, self.gamma1_tilde, self.gamma3_tilde, force_tilde),
            (None, Some(k1), Some(k2)) => RodParams::new(k1, k2, self.gamma1_tilde, self.gamma3_tilde, force_tilde),
            _ => Err(Error::InvalidConfig(
                "params: give either `kappa` or both `k1_tilde` and `k2_tilde`".into(),
            )),
        }
    }
}

/// Explicit force list or an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ForceSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl ForceSpec {
    /// Expanded values; must be non-empty and strictly ascending.
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            ForceSpec::List(v) => v.clone(),
            ForceSpec::Range { start, stop, step } => {
                if !(step.is_finite() && *step > 0.0) {
                    return Err(Error::InvalidConfig(format!("forces.step must be positive, got {step}")));
                }
                if !(start.is_finite() && stop.is_finite()) || stop < start {
                    return Err(Error::InvalidConfig(format!("empty force range [{start}, {stop}]")));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|k| start + k as f64 * step).collect()
            }
        };
        if v.is_empty() {
            return Err(Error::InvalidConfig("force list is empty".into()));
        }
        if v.iter().any(|f| !f.is_finite()) {
            return Err(Error::InvalidConfig("force values must be finite".into()));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("force values must be strictly ascending".into()));
        }
        Ok(v)
    }
}

/// Per-run simulation settings; anything left out keeps the library default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimOverrides {
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub perturbation_amplitude: Option<f64>,
    pub jacobian_every: Option<usize>,
    pub sample_every: Option<usize>,
    pub adaptive_tol: Option<f64>,
    pub saturation: Option<SaturationCriteria>,
}

impl SimOverrides {
    /// Simulation settings for one force, started from the given profile.
    pub fn config(&self, params: RodParams, n: usize, shape: PerturbationShape, omega: Option<f64>) -> SimConfig {
        let mut c = SimConfig::new(params);
        c.n = n;
        c.perturbation = Perturbation {
            amplitude: self.perturbation_amplitude.unwrap_or(c.perturbation.amplitude),
            shape,
        };
        c.dt = self.dt.unwrap_or(c.dt);
        c.t_max = self.t_max.unwrap_or(c.t_max);
        c.jacobian_every = self.jacobian_every.unwrap_or(c.jacobian_every);
        c.sample_every = self.sample_every.unwrap_or(c.sample_every);
        c.adaptive_tol = self.adaptive_tol.or(c.adaptive_tol);
        c.saturation = self.saturation.unwrap_or(c.saturation);
        c.omega_estimate = omega;
        c
    }
}

fn default_window() -> f64 {
    2.0
}

fn default_asymptotic() -> f64 {
    1.0
}

/// Tolerances used by `compare`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareTolerances {
    pub amplitude_rel: f64,
    pub frequency_rel: f64,
    /// Rows with `F - F_c` above this are annotated and not graded.
    pub asymptotic_range: f64,
    /// Largest accepted difference between the thresholds of the two inputs.
    pub force_crit_match: f64,
}

impl Default for CompareTolerances {
    fn default() -> Self {
        Self {
            amplitude_rel: 0.10,
            frequency_rel: 0.05,
            asymptotic_range: default_asymptotic(),
            force_crit_match: 1e-3,
        }
    }
}

/// One JSON document drives every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub params: ParamsTemplate,
    #[serde(default)]
    pub forces: Option<ForceSpec>,
    #[serde(default)]
    pub sim: SimOverrides,
    /// Upper end of the `F - F_c` fit window.
    #[serde(default = "default_window")]
    pub fit_window: f64,
    #[serde(default)]
    pub compare: CompareTolerances,
    /// Output directory; the `--out` flag takes precedence.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: SweepSpec = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::InvalidConfig(format!(
                "config error at `{path}` (line {}, column {}): {inner}",
                inner.line(),
                inner.column()
            ))
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.at(0.0)?;
        if !(self.fit_window.is_finite() && self.fit_window > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "fit_window must be positive, got {}",
                self.fit_window
            )));
        }
        if let Some(f) = &self.forces {
            f.values()?;
        }
        Ok(())
    }

    pub fn force_values(&self) -> Result<Vec<f64>> {
        self.forces
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("config has no `forces`".into()))?
            .values()
    }
}
