use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of the series, counted from the end, used for cycle extraction.
pub const TAIL_FRACTION: f64 = 0.2;

/// Minimum number of maxima required in the extraction window.
pub const MIN_PEAKS: usize = 5;

/// Thresholds for declaring a saturated limit cycle or a decayed response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SaturationCriteria {
    /// Largest accepted relative change of the cycle amplitude over `periods` cycles.
    pub drift_tol: f64,
    pub periods: usize,
    /// The run counts as decayed once the tip envelope falls below this
    /// fraction of its initial value.
    pub decay_ratio: f64,
}

impl Default for SaturationCriteria {
    fn default() -> Self {
        Self {
            drift_tol: 1e-3,
            periods: 5,
            decay_ratio: 1e-6,
        }
    }
}

/// Steady oscillation measured on the tail of a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleEstimate {
    /// Half peak-to-peak.
    pub amplitude: f64,
    /// Angular frequency.
    pub frequency: f64,
    pub peaks: usize,
    pub window: (f64, f64),
}

/// Vertex of the parabola through three samples.
pub fn parabolic_vertex(t: [f64; 3], v: [f64; 3]) -> (f64, f64) {
    let (a, b) = (t[0] - t[1], t[2] - t[1]);
    let (fa, fb) = (v[0] - v[1], v[2] - v[1]);
    // f(s) = v1 + p s + q s^2 through (a, fa), (b, fb)
    let det = a * b * (b - a);
    if det == 0.0 {
        return (t[1], v[1]);
    }
    let q = (fb * a - fa * b) / det;
    let p = (fa * b * b - fb * a * a) / det;
    if q == 0.0 {
        return (t[1], v[1]);
    }
    let s = -p / (2.0 * q);
    if s.abs() > a.abs().max(b.abs()) {
        return (t[1], v[1]);
    }
    (t[1] + s, v[1] + p * s + q * s * s)
}

/// Refined local maxima and minima.
pub fn find_extrema(times: &[f64], values: &[f64]) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        let win = ([times[i - 1], times[i], times[i + 1]], [a, b, c]);
        if b > a && b >= c {
            maxima.push(parabolic_vertex(win.0, win.1));
        } else if b < a && b <= c {
            minima.push(parabolic_vertex(win.0, win.1));
        }
    }
    (maxima, minima)
}

/// Linearly interpolated times at which the series crosses `level` upwards.
pub fn up_crossings(times: &[f64], values: &[f64], level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..values.len() {
        let (a, b) = (values[i - 1] - level, values[i] - level);
        if a < 0.0 && b >= 0.0 {
            out.push(times[i - 1] + (times[i] - times[i - 1]) * (-a) / (b - a));
        }
    }
    out
}

/// Amplitude and angular frequency over the final fifth of the series.
pub fn extract_cycle_series(times: &[f64], values: &[f64]) -> Result<CycleEstimate> {
    if times.len() != values.len() {
        return Err(Error::Shape {
            expected: times.len(),
            actual: values.len(),
        });
    }
    let (Some(&t0), Some(&t1)) = (times.first(), times.last()) else {
        return Err(Error::InsufficientData("empty series".into()));
    };
    let start = t1 - TAIL_FRACTION * (t1 - t0);
    let first = times.partition_point(|t| *t < start);
    let (tw, vw) = (&times[first..], &values[first..]);
    let (maxima, minima) = find_extrema(tw, vw);
    if maxima.len() < MIN_PEAKS || minima.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{} peaks in the window [{start}, {t1}], need at least {MIN_PEAKS}",
            maxima.len()
        )));
    }
    let hi = maxima.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = minima.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let ups = up_crossings(tw, vw, 0.5 * (hi + lo));
    if ups.len() < 2 {
        return Err(Error::InsufficientData("fewer than two up-crossings in the window".into()));
    }
    let period = (ups[ups.len() - 1] - ups[0]) / (ups.len() - 1) as f64;
    Ok(CycleEstimate {
        amplitude: 0.5 * (hi - lo),
        frequency: 2.0 * PI / period,
        peaks: maxima.len(),
        window: (start, t1),
    })
}

/// Online detector of cycle-amplitude saturation.
#[derive(Debug, Clone)]
pub struct CycleTracker {
    criteria: SaturationCriteria,
    last: Vec<(f64, f64)>,
    last_min: Option<f64>,
    max_times: Vec<f64>,
    amplitudes: Vec<f64>,
}

impl CycleTracker {
    pub fn new(criteria: SaturationCriteria) -> Self {
        Self {
            criteria,
            last: Vec::with_capacity(3),
            last_min: None,
            max_times: Vec::new(),
            amplitudes: Vec::new(),
        }
    }

    /// Feed one sample; returns `true` once the saturation criterion holds.
    pub fn push(&mut self, t: f64, v: f64) -> bool {
        if self.last.len() == 3 {
            self.last.remove(0);
        }
        self.last.push((t, v));
        if self.last.len() < 3 {
            return false;
        }
        let ts = [self.last[0].0, self.last[1].0, self.last[2].0];
        let vs = [self.last[0].1, self.last[1].1, self.last[2].1];
        if vs[1] < vs[0] && vs[1] <= vs[2] {
            self.last_min = Some(parabolic_vertex(ts, vs).1);
        } else if vs[1] > vs[0] && vs[1] >= vs[2] {
            let (tp, vp) = parabolic_vertex(ts, vs);
            self.max_times.push(tp);
            if let Some(lo) = self.last_min {
                self.amplitudes.push(0.5 * (vp - lo));
                return self.saturated();
            }
        }
        false
    }

    pub fn saturated(&self) -> bool {
        let k = self.criteria.periods;
        let a = &self.amplitudes;
        if a.len() <= k {
            return false;
        }
        let (now, then) = (a[a.len() - 1], a[a.len() - 1 - k]);
        now > 0.0 && (now - then).abs() < self.criteria.drift_tol * now
    }

    /// Cycle amplitudes, one per detected maximum after the first minimum.
    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Mean spacing of the last few maxima.
    pub fn period(&self) -> Option<f64> {
        let m = &self.max_times;
        if m.len() < 2 {
            return None;
        }
        let k = (m.len() - 1).min(self.criteria.periods);
        Some((m[m.len() - 1] - m[m.len() - 1 - k]) / k as f64)
    }
}

/// Time at which the saturation criterion first holds, if ever.
pub fn detect_saturation(times: &[f64], values: &[f64], criteria: SaturationCriteria) -> Option<f64> {
    let mut tracker = CycleTracker::new(criteria);
    times
        .iter()
        .zip(values)
        .find(|(t, v)| tracker.push(**t, **v))
        .map(|(t, _)| *t)
}
