//! Square-root scaling fits of saturated amplitudes.

use serde::{Deserialize, Serialize};

/// Amplitudes below this are excluded from the log-log exponent fit.
pub const NOISE_FLOOR: f64 = 1e-4;

/// Least-squares fits of simulated amplitudes against `dF = F - F_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Slope of `amplitude^2 = m dF`, fitted through the origin.
    pub slope_m: f64,
    pub c_fit: f64,
    /// Exponent of `amplitude = K dF^p`; absent with fewer than two usable points.
    pub exponent_p: Option<f64>,
    pub prefactor_k: Option<f64>,
    /// `(0, window_max]` in `dF`.
    pub window: (f64, f64),
    pub points: usize,
    pub rms_residual_squared: f64,
    pub rms_residual_log: Option<f64>,
}

/// Fit `(force, amplitude)` pairs with `0 < F - F_c <= window_max`.
/// Returns `None` when no point lies in the window.
pub fn fit_scaling(force_crit: f64, samples: &[(f64, f64)], window_max: f64) -> Option<ScalingFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(f, a)| (f - force_crit, a))
        .filter(|&(d, a)| d > 0.0 && d <= window_max && a.is_finite())
        .collect();
    if pts.is_empty() {
        return None;
    }
    let sxx: f64 = pts.iter().map(|(d, _)| d * d).sum();
    let sxy: f64 = pts.iter().map(|(d, a)| d * a * a).sum();
    let m = sxy / sxx;
    let rms2 = (pts.iter().map(|(d, a)| (a * a - m * d).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();

    let logs: Vec<(f64, f64)> = pts
        .iter()
        .filter(|(_, a)| *a >= NOISE_FLOOR)
        .map(|(d, a)| (d.ln(), a.ln()))
        .collect();
    let (p, k, rms_log) = if logs.len() >= 2 {
        let n = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        if sxx > 0.0 {
            let p = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
            let b = my - p * mx;
            let r = (logs.iter().map(|(x, y)| (y - b - p * x).powi(2)).sum::<f64>() / n).sqrt();
            (Some(p), Some(b.exp()), Some(r))
        } else {
            (None, None, None)
        }
    } else {
        (None, None, None)
    };

    Some(ScalingFit {
        slope_m: m,
        c_fit: m.sqrt(),
        exponent_p: p,
        prefactor_k: k,
        window: (0.0, window_max),
        points: pts.len(),
        rms_residual_squared: rms2,
        rms_residual_log: rms_log,
    })
}
