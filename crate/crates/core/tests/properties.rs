use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use rodhopf::model::{base_state, constitutive, Configuration, GammaWeights, Strains};
use rodhopf::sim::{extract_cycle_series, Dynamics};
use rodhopf::spectrum::{gamma_inner, ModeShape};
use rodhopf::{make_params, Grid, RodParams};

const N: usize = 24;

fn grid() -> Grid {
    Grid::new(N).unwrap()
}

fn params() -> impl Strategy<Value = RodParams> {
    (1e2..1e5f64, 0.2..1.0f64, 0.1..2.0f64, 1e-5..1e-1f64, -50.0..80.0f64)
        .prop_map(|(k1, r, g1, g3, f)| make_params(k1, k1 * r, g1, g3, f).unwrap())
}

fn complex_vec() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b)), N)
}

fn shape() -> impl Strategy<Value = ModeShape> {
    (complex_vec(), complex_vec(), complex_vec()).prop_map(|(x, y, theta)| ModeShape { x, y, theta })
}

fn scalar() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn combine(a: Complex64, p: &ModeShape, b: Complex64, q: &ModeShape) -> ModeShape {
    let mix = |u: &[Complex64], v: &[Complex64]| u.iter().zip(v).map(|(s, t)| a * s + b * t).collect();
    ModeShape {
        x: mix(&p.x, &q.x),
        y: mix(&p.y, &q.y),
        theta: mix(&p.theta, &q.theta),
    }
}

/// Smooth interior state with modes up to `coeffs.len()`, scaled by `amp`.
fn smooth_state(d: &Dynamics, coeffs: &[f64], amp: f64) -> Vec<f64> {
    let u = d.grid().nodes();
    let m = d.interior();
    let mut z = Vec::with_capacity(3 * m);
    for field in 0..3 {
        z.extend((1..=m).map(|i| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| amp * c * ((k + 1) as f64 * u[i] + field as f64).sin())
                .sum::<f64>()
        }));
    }
    z
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_inner_is_sesquilinear_and_hermitian(
        p in shape(), q in shape(), r in shape(), a in scalar(), b in scalar(),
        g1 in 0.1..3.0f64, g3 in 1e-4..1.0f64,
    ) {
        let g = grid();
        let w = GammaWeights::new(g1, g3).unwrap();
        let ip = |s: &ModeShape, t: &ModeShape| gamma_inner(&g, &w, s, t).unwrap();
        let scale = 10.0 * (1.0 + a.norm() + b.norm());
        let lin = ip(&r, &combine(a, &p, b, &q)) - (a * ip(&r, &p) + b * ip(&r, &q));
        prop_assert!(lin.norm() < 1e-13 * scale);
        let anti = ip(&combine(a, &p, b, &q), &r) - (a.conj() * ip(&p, &r) + b.conj() * ip(&q, &r));
        prop_assert!(anti.norm() < 1e-13 * scale);
        prop_assert!((ip(&p, &q) - ip(&q, &p).conj()).norm() < 1e-14 * scale);
        let norm = ip(&p, &p);
        prop_assert!(norm.re > 0.0 && norm.im.abs() < 1e-15 * norm.re);
    }

    #[test]
    fn params_json_round_trips(p in params()) {
        prop_assert_eq!(RodParams::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn nonpositive_or_nonfinite_params_are_rejected(
        bad in prop_oneof![Just(0.0), Just(-1.0), Just(f64::NAN), Just(f64::INFINITY), -1e3..0.0f64],
        slot in 0usize..4,
    ) {
        let mut v = [1e4, 1e4, 0.5, 1e-3];
        v[slot] = bad;
        prop_assert!(make_params(v[0], v[1], v[2], v[3], 10.0).is_err());
    }

    #[test]
    fn isotropic_rod_has_mu_equal_to_kappa(kappa in 1e2..1e5f64, f in -100.0..100.0f64) {
        let p = RodParams::isotropic(kappa, 0.5, 1e-3, f).unwrap();
        prop_assert!((p.mu() - kappa).abs() <= 1e-12 * kappa);
        prop_assert!((p.nu() - (1.0 - f / kappa)).abs() < 1e-15);
    }

    #[test]
    fn constitutive_law_is_affine(
        p in params(),
        h in prop::collection::vec(-1.0..1.0f64, 6 * N),
        a in -2.0..2.0f64,
    ) {
        let part = |o: usize| Strains { h1: h[o..o + N].to_vec(), h2: h[o + N..o + 2 * N].to_vec(), pi: h[o + 2 * N..o + 3 * N].to_vec() };
        let (s, t) = (part(0), part(3 * N));
        let mix = |u: &[f64], v: &[f64]| -> Vec<f64> { u.iter().zip(v).map(|(x, y)| a * x + (1.0 - a) * y).collect() };
        let st = Strains { h1: mix(&s.h1, &t.h1), h2: mix(&s.h2, &t.h2), pi: mix(&s.pi, &t.pi) };
        let (fs, ft, fst) = (constitutive(&s, &p).unwrap(), constitutive(&t, &p).unwrap(), constitutive(&st, &p).unwrap());
        let scale = 10.0 * p.k1_tilde.max(p.k2_tilde);
        for (x, (y, z)) in [(&fs.f1, (&ft.f1, &fst.f1)), (&fs.f2, (&ft.f2, &fst.f2)), (&fs.m, (&ft.m, &fst.m))] {
            for i in 0..N {
                prop_assert!((a * x[i] + (1.0 - a) * y[i] - z[i]).abs() < 1e-13 * scale);
            }
        }
    }

    #[test]
    fn base_state_is_a_fixed_point_for_any_rod(p in params()) {
        let g = grid();
        let d = Dynamics::new(&p, &g);
        let base = base_state(&p, &g);
        prop_assert!(base.is_clamped());
        let r = d.rhs(&d.pack(&base));
        let scale = (p.k1_tilde + p.force_tilde.abs()) * (N * N) as f64 / p.gamma1_tilde.min(p.gamma3_tilde).min(1.0);
        let worst = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(worst < 1e-14 * scale, "{} vs {}", worst, scale);
    }

    #[test]
    fn mirroring_commutes_with_the_dynamics(
        p in params(),
        coeffs in prop::collection::vec(-1.0..1.0f64, 1..4),
        amp in 1e-3..0.3f64,
    ) {
        let g = grid();
        let d = Dynamics::new(&p, &g);
        let m = d.interior();
        let z = smooth_state(&d, &coeffs, amp);
        let mirror = |v: &[f64]| -> Vec<f64> { v.iter().enumerate().map(|(i, x)| if i < m { *x } else { -x }).collect() };
        let (a, b) = (d.rhs(&mirror(&z)), mirror(&d.rhs(&z)));
        let scale = a.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() <= 1e-14 * scale);
        }
    }

    #[test]
    fn pack_unpack_round_trips(p in params(), coeffs in prop::collection::vec(-1.0..1.0f64, 1..4), amp in 1e-3..0.3f64) {
        let g = grid();
        let d = Dynamics::new(&p, &g);
        let z = smooth_state(&d, &coeffs, amp);
        let c: Configuration = d.unpack(&z);
        prop_assert!(c.is_clamped());
        let back = d.pack(&c);
        for (u, v) in z.iter().zip(&back) {
            prop_assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn tone_amplitude_and_frequency_are_recovered(
        amp in 1e-3..1.0f64,
        omega in 50.0..400.0f64,
        phase in 0.0..(2.0 * PI),
        offset in -1.0..1.0f64,
        per_period in 40usize..200,
    ) {
        let dt = 2.0 * PI / omega / per_period as f64;
        let t: Vec<f64> = (0..=per_period * 60).map(|k| k as f64 * dt).collect();
        let v: Vec<f64> = t.iter().map(|s| offset + amp * (omega * s + phase).sin()).collect();
        let c = extract_cycle_series(&t, &v).unwrap();
        prop_assert!((c.amplitude - amp).abs() < 1e-3 * amp, "{:?}", c);
        prop_assert!((c.frequency - omega).abs() < 1e-4 * omega, "{:?}", c);
    }
}
