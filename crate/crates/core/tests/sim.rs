use std::f64::consts::PI;
use std::sync::OnceLock;

use rodhopf::model::base_state;
use rodhopf::sim::*;
use rodhopf::spectrum::assemble_operator;
use rodhopf::weakly_nonlinear::{analyze_hopf, predict_tip, ForcingForm, HopfAnalysis};
use rodhopf::{make_params, Error, Grid, RodParams};

fn rod(force: f64) -> RodParams {
    make_params(1e4, 1e4, 0.5, 1e-4, force).unwrap()
}

fn analysis() -> &'static HopfAnalysis {
    static A: OnceLock<HopfAnalysis> = OnceLock::new();
    A.get_or_init(|| analyze_hopf(&rod(0.0), &Grid::new(96).unwrap(), ForcingForm::Anisotropic).unwrap())
}

fn mode_profile(scale: f64) -> PerturbationShape {
    let a = analysis();
    PerturbationShape::Profile {
        y: a.mode.y.iter().map(|v| scale * v.re).collect(),
        theta: a.mode.theta.iter().map(|v| scale * v.re).collect(),
    }
}

fn config(force: f64, shape: PerturbationShape) -> SimConfig {
    let mut c = SimConfig::new(rod(force));
    c.perturbation.shape = shape;
    c.omega_estimate = Some(analysis().hopf.omega_c);
    c
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (p, q)| m.max((p - q).abs()))
}

/// Smooth interior state `(X, y, theta)` of unit size.
fn smooth_state(d: &Dynamics) -> Vec<f64> {
    let u = d.grid().nodes();
    let m = d.interior();
    let mut z = Vec::with_capacity(3 * m);
    z.extend((1..=m).map(|i| 0.3 * (1.3 * u[i]).sin()));
    z.extend((1..=m).map(|i| u[i] * u[i] * (1.5 - u[i])));
    z.extend((1..=m).map(|i| u[i] * (2.0 - u[i]) - 0.2 * u[i].powi(3)));
    z
}

#[test]
fn base_state_is_a_fixed_point() {
    let g = Grid::new(96).unwrap();
    for p in [rod(0.0), rod(10.0), rod(37.65), rod(60.0), make_params(1e4, 5e3, 0.5, 1e-4, 40.0).unwrap()] {
        let r = rhs(&base_state(&p, &g), &p, &g);
        assert!(r.max_abs() < 1e-10, "F = {}: {}", p.force_tilde, r.max_abs());
    }
}

#[test]
fn step_preserves_base_state() {
    let g = Grid::new(64).unwrap();
    for f in [0.0, 40.0, 120.0] {
        let p = rod(f);
        let base = base_state(&p, &g);
        for dt in [1e-6, 1e-4, 1e-2, 1.0] {
            let next = step(&base, dt, &p, &g).unwrap();
            let err = max_diff(&next.x, &base.x)
                .max(max_abs(&next.y))
                .max(max_abs(&next.theta));
            assert!(err < 1e-12, "F = {f}, dt = {dt}: {err}");
        }
    }
}

#[test]
fn jacobian_at_base_is_the_linear_operator() {
    let g = Grid::new(48).unwrap();
    for p in [rod(20.0), make_params(3e3, 1e3, 0.7, 1e-2, 15.0).unwrap()] {
        let d = Dynamics::new(&p, &g);
        let base = d.pack(&base_state(&p, &g));
        let j = d.jacobian(&base);
        let l = assemble_operator(&p, &g);
        let l = l.reduced();
        let mut scale: f64 = 0.0;
        let mut diff: f64 = 0.0;
        for r in 0..j.nrows() {
            for c in 0..j.ncols() {
                scale = scale.max(l[(r, c)].abs());
                diff = diff.max((j[(r, c)] - l[(r, c)]).abs());
            }
        }
        assert!(diff / scale < 1e-13, "{}", diff / scale);
    }
}

fn order(errors: &[f64], ratio: f64) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).ln() / ratio.ln()).collect()
}

#[test]
fn rhs_differences_converge_to_the_linear_operator() {
    let g = Grid::new(48).unwrap();
    let p = rod(30.0);
    let d = Dynamics::new(&p, &g);
    let xi = smooth_state(&d);
    let op = assemble_operator(&p, &g);
    let l = op.reduced();
    let lxi: Vec<f64> = (0..l.nrows()).map(|r| (0..l.ncols()).map(|c| l[(r, c)] * xi[c]).sum()).collect();
    let scale = max_abs(&lxi);
    let mut errs = Vec::new();
    for eps in [4e-2, 2e-2, 1e-2, 5e-3] {
        let plus: Vec<f64> = xi.iter().map(|v| eps * v).collect();
        let minus: Vec<f64> = xi.iter().map(|v| -eps * v).collect();
        let fd: Vec<f64> = d
            .rhs(&plus)
            .iter()
            .zip(d.rhs(&minus))
            .map(|(a, b)| (a - b) / (2.0 * eps))
            .collect();
        errs.push(max_diff(&fd, &lxi) / scale);
    }
    let ord = order(&errs, 2.0);
    assert!(ord.iter().all(|o| *o >= 1.9), "errors {errs:?}, orders {ord:?}");
}

#[test]
fn analytic_jacobian_matches_differences_away_from_base() {
    let g = Grid::new(48).unwrap();
    let p = rod(40.0);
    let d = Dynamics::new(&p, &g);
    let z: Vec<f64> = smooth_state(&d).iter().map(|v| 0.1 * v).collect();
    let xi: Vec<f64> = smooth_state(&d).iter().rev().copied().collect();
    let j = d.jacobian(&z);
    let jxi: Vec<f64> = (0..j.nrows()).map(|r| (0..j.ncols()).map(|c| j[(r, c)] * xi[c]).sum()).collect();
    let scale = max_abs(&jxi);
    let mut errs = Vec::new();
    for eps in [1e-3, 5e-4, 2.5e-4] {
        let a: Vec<f64> = z.iter().zip(&xi).map(|(v, w)| v + eps * w).collect();
        let b: Vec<f64> = z.iter().zip(&xi).map(|(v, w)| v - eps * w).collect();
        let fd: Vec<f64> = d.rhs(&a).iter().zip(d.rhs(&b)).map(|(p, q)| (p - q) / (2.0 * eps)).collect();
        errs.push(max_diff(&fd, &jxi) / scale);
    }
    assert!(errs[2] < 1e-6, "{errs:?}");
    assert!(order(&errs, 2.0).iter().all(|o| *o >= 1.9), "{errs:?}");
}

#[test]
fn rates_extend_consistently_to_the_tip() {
    let g = Grid::new(48).unwrap();
    let p = rod(40.0);
    let d = Dynamics::new(&p, &g);
    let z: Vec<f64> = smooth_state(&d).iter().map(|v| 0.05 * v).collect();
    let r = d.rates(&z);
    assert_eq!((r.x[0], r.y[0], r.theta[0]), (0.0, 0.0, 0.0));
    // tip rates follow from differentiating the closure in time
    let h = 1e-9;
    let dz = d.rhs(&z);
    let za: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a + h * b).collect();
    let zb: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a - h * b).collect();
    let (ca, cb) = (d.unpack(&za), d.unpack(&zb));
    let last = g.n() - 1;
    for (fd, exact) in [
        ((ca.theta[last] - cb.theta[last]) / (2.0 * h), r.theta[last]),
        ((ca.y[last] - cb.y[last]) / (2.0 * h), r.y[last]),
        ((ca.x[last] - cb.x[last]) / (2.0 * h), r.x[last]),
    ] {
        assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{fd} vs {exact}");
    }
}

fn integrate(p: &RodParams, g: &Grid, z0: &[f64], dt: f64, t_end: f64) -> Vec<f64> {
    let mut integ = Integrator::new(Dynamics::new(p, g), 1);
    let steps = (t_end / dt).round() as usize;
    let mut z = z0.to_vec();
    for k in 0..steps {
        z = integ.step(&z, dt, k as f64 * dt).unwrap();
    }
    z
}

fn bump_state(d: &Dynamics, p: &RodParams, amp: f64) -> Vec<f64> {
    let g = d.grid();
    let mut c = base_state(p, g);
    for (i, u) in g.nodes().iter().enumerate() {
        c.y[i] = amp * (0.5 * PI * u).sin();
        c.theta[i] = amp * 0.5 * PI * (0.5 * PI * u).cos();
    }
    d.pack(&c)
}

#[test]
fn rosenbrock_step_is_second_order() {
    let g = Grid::new(48).unwrap();
    let p = rod(40.0);
    let d = Dynamics::new(&p, &g);
    // relax the initial layer first: the bump is not on the slow manifold and the
    // stiff transient it excites reduces the observed order
    let z0 = integrate(&p, &g, &bump_state(&d, &p, 0.05), 1e-6, 0.01);
    let t_end = 2e-3;
    let sols: Vec<Vec<f64>> = [4e-5, 2e-5, 1e-5, 5e-6]
        .iter()
        .map(|dt| integrate(&p, &g, &z0, *dt, t_end))
        .collect();
    let errs: Vec<f64> = sols.windows(2).map(|w| max_diff(&w[0], &w[1])).collect();
    let ord = order(&errs, 2.0);
    assert!(ord.iter().all(|o| (1.8..=2.2).contains(o)), "differences {errs:?}, orders {ord:?}");
}

#[test]
fn mirrored_perturbation_mirrors_the_trajectory() {
    let g = Grid::new(48).unwrap();
    let p = rod(40.0);
    let d = Dynamics::new(&p, &g);
    let a = bump_state(&d, &p, 0.05);
    let m = d.interior();
    let b: Vec<f64> = a.iter().enumerate().map(|(k, v)| if k < m { *v } else { -v }).collect();
    let mut ia = Integrator::new(Dynamics::new(&p, &g), 1);
    let mut ib = Integrator::new(Dynamics::new(&p, &g), 1);
    let (mut za, mut zb) = (a, b);
    let mut worst: f64 = 0.0;
    for k in 0..400 {
        za = ia.step(&za, 1e-4, k as f64 * 1e-4).unwrap();
        zb = ib.step(&zb, 1e-4, k as f64 * 1e-4).unwrap();
        let (ta, tb) = (d.tip(&za), d.tip(&zb));
        worst = worst.max((ta.1 + tb.1).abs()).max((ta.0 - tb.0).abs());
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn pure_tone_is_recovered() {
    let dt = 1e-4;
    let t: Vec<f64> = (0..=100_000).map(|k| k as f64 * dt).collect();
    let v: Vec<f64> = t.iter().map(|s| 0.1 * (50.0 * s).cos()).collect();
    let c = extract_cycle_series(&t, &v).unwrap();
    assert!((c.amplitude - 0.1).abs() < 1e-6 * 0.1, "{c:?}");
    assert!((c.frequency - 50.0).abs() < 1e-6 * 50.0, "{c:?}");
    assert!(detect_saturation(&t, &v, SaturationCriteria::default()).is_some());
}

#[test]
fn decaying_series_never_saturates() {
    let t: Vec<f64> = (0..=20_000).map(|k| k as f64 * 5e-4).collect();
    let v: Vec<f64> = t.iter().map(|s| (-0.5 * s).exp() * (50.0 * s).cos()).collect();
    assert_eq!(detect_saturation(&t, &v, SaturationCriteria::default()), None);
}

#[test]
fn second_harmonic_shifts_amplitude_as_predicted() {
    let t: Vec<f64> = (0..=50_000).map(|k| k as f64 * 1e-4).collect();
    // cos + 0.01 cos(2 .) has extrema 1.01 and -0.99 exactly: half peak-to-peak 1
    let v: Vec<f64> = t.iter().map(|s| (50.0 * s).cos() + 0.01 * (100.0 * s).cos()).collect();
    let c = extract_cycle_series(&t, &v).unwrap();
    assert!((c.amplitude - 1.0).abs() < 1e-6, "{c:?}");
    // with a phase-shifted harmonic the extremum moves but stays within 1.5%
    let v: Vec<f64> = t.iter().map(|s| (50.0 * s).cos() + 0.01 * (100.0 * s + 0.9).cos()).collect();
    let c = extract_cycle_series(&t, &v).unwrap();
    assert!((c.amplitude - 1.0).abs() < 0.015, "{c:?}");
    assert!((c.frequency - 50.0).abs() < 1e-4, "{c:?}");
}

#[test]
fn too_few_peaks_is_an_error() {
    let t: Vec<f64> = (0..=1000).map(|k| k as f64 * 1e-3).collect();
    let v: Vec<f64> = t.iter().map(|s| (10.0 * s).sin()).collect();
    assert!(matches!(extract_cycle_series(&t, &v), Err(Error::InsufficientData(_))));
}

#[test]
fn config_validation() {
    let ok = SimConfig::new(rod(40.0));
    assert!(ok.validate().is_ok());
    for amp in [0.0, -1e-3, 0.2] {
        let mut c = ok.clone();
        c.perturbation.amplitude = amp;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
    }
    let mut c = ok.clone();
    c.dt = 0.0;
    assert!(c.validate().is_err());
    let mut c = ok.clone();
    c.t_max = 1.0;
    assert!(c.validate_horizon(191.2).is_err());
    c.omega_estimate = Some(191.2);
    c.perturbation.shape = PerturbationShape::Bump;
    assert!(matches!(run(&c), Err(Error::InvalidConfig(_))));
    let mut c = ok.clone();
    c.perturbation.shape = PerturbationShape::Profile { y: vec![0.0; 3], theta: vec![0.0; 3] };
    assert!(c.validate().is_err());
}

#[test]
fn config_json_round_trip() {
    let mut c = config(40.0, PerturbationShape::Bump);
    c.adaptive_tol = Some(1e-7);
    let text = serde_json::to_string(&c).unwrap();
    let back: SimConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, c);
    let minimal = r#"{"params": {"k1_tilde": 1e4, "k2_tilde": 1e4, "gamma1_tilde": 0.5, "gamma3_tilde": 1e-4, "force_tilde": 40}}"#;
    let m: SimConfig = serde_json::from_str(minimal).unwrap();
    assert_eq!(m, SimConfig::new(rod(40.0)));
    assert!(serde_json::from_str::<SimConfig>(&minimal.replace("}}", "}, \"bogus\": 1}")).is_err());
}

#[test]
fn below_flutter_onset_the_tip_decays_monotonically() {
    let mut c = config(10.0, PerturbationShape::Bump);
    c.omega_estimate = None;
    let r = run(&c).unwrap();
    assert_eq!(r.outcome, Outcome::Decayed);
    assert!(!r.saturated && r.amplitude.is_none());
    let peak = r.tip_y.iter().enumerate().fold((0, 0.0), |b, (i, v)| if v.abs() > b.1 { (i, v.abs()) } else { b }).0;
    let tail = &r.tip_y[peak..];
    assert!(tail.iter().all(|v| *v > 0.0));
    assert!(tail.windows(2).all(|w| w[1] <= w[0]));
    assert!(tail.last().unwrap().abs() < 1e-6 * r.tip_y[0].abs());
}

#[test]
fn between_thresholds_the_oscillation_is_damped() {
    let r = run(&config(30.0, mode_profile(1.0))).unwrap();
    assert_eq!(r.outcome, Outcome::Decayed);
    assert!(r.amplitude.is_none());
    let crossings = r.tip_y.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    assert!(crossings >= 6, "{crossings}");
    let n = r.tip_y.len();
    let window = r.tip_y[n - n / 10..].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    assert!(window < 1e-6 * r.tip_y[0].abs(), "{window}");
}

fn run_at_40(n: usize) -> &'static SimRecord {
    static R96: OnceLock<SimRecord> = OnceLock::new();
    static R144: OnceLock<SimRecord> = OnceLock::new();
    let cell = if n == 96 { &R96 } else { &R144 };
    cell.get_or_init(|| {
        let mut c = config(40.0, PerturbationShape::CriticalMode);
        c.n = n;
        if n == 96 {
            c.perturbation.shape = mode_profile(1.0);
        }
        run(&c).unwrap()
    })
}

#[test]
fn above_threshold_a_limit_cycle_saturates() {
    let r = run_at_40(96);
    assert_eq!(r.outcome, Outcome::Saturated);
    assert!(r.saturated);
    let (amp, freq) = (r.amplitude.unwrap(), r.frequency.unwrap());
    assert!(amp >= 0.0 && freq > 0.0);

    // the record's own tail satisfies the saturation criterion
    let ts = r.saturation_time.unwrap();
    let k = r.times.partition_point(|t| *t < ts);
    let mut tracker = CycleTracker::new(SaturationCriteria::default());
    for (t, v) in r.times[k..].iter().zip(&r.tip_y[k..]) {
        tracker.push(*t, *v);
    }
    let a = tracker.amplitudes();
    let last = a[a.len() - 1];
    assert!(a[a.len() - 6..].iter().all(|x| (x - last).abs() < 1e-3 * last));

    let (pa, pw) = predict_tip(&analysis().landau, 40.0).unwrap();
    assert!((amp - pa).abs() < 0.10 * pa, "amplitude {amp} vs {pa}");
    assert!((freq - pw).abs() < 0.05 * pw, "frequency {freq} vs {pw}");
    assert!(r.tip_y.iter().all(|v| v.abs() < 1.0));
}

#[test]
fn saturated_amplitude_is_resolution_independent() {
    let a = run_at_40(96).amplitude.unwrap();
    let b = run_at_40(144).amplitude.unwrap();
    assert!((a - b).abs() < 0.01 * b, "{a} vs {b}");
}

#[test]
fn artifacts_round_trip() {
    let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.01).collect();
    let record = SimRecord {
        tip_x: t.iter().map(|s| 1.0 - 1e-3 * s).collect(),
        tip_y: t.iter().map(|s| (3.0 * s).sin() / 7.0).collect(),
        times: t,
        saturated: false,
        outcome: Outcome::Horizon,
        amplitude: None,
        frequency: None,
        saturation_time: None,
        steps: 49,
        snapshots: vec![],
    };
    let dir = tempfile::tempdir().unwrap();
    let tip = dir.path().join("tip.csv");
    write_tip_csv(&record, &tip).unwrap();
    let (t, x, y) = read_tip_csv(&tip).unwrap();
    assert_eq!((t, x, y), (record.times.clone(), record.tip_x.clone(), record.tip_y.clone()));
    let header = std::fs::read_to_string(&tip).unwrap();
    assert!(header.starts_with("t,x_tip,y_tip\n"));

    let meta = RunMetadata::new(&SimConfig::new(rod(40.0)), &record);
    let path = dir.path().join("meta.json");
    meta.write(&path).unwrap();
    assert_eq!(RunMetadata::read(&path).unwrap(), meta);
}
