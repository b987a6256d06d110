use std::sync::OnceLock;

use num_complex::Complex64;
use rodhopf::model::GammaWeights;
use rodhopf::spectrum::*;
use rodhopf::{make_params, Grid, RodParams};

fn reference(force: f64) -> RodParams {
    make_params(1e4, 1e4, 0.5, 1e-4, force).unwrap()
}

fn hopf() -> &'static HopfPoint {
    static H: OnceLock<HopfPoint> = OnceLock::new();
    H.get_or_init(|| find_hopf_threshold(&reference(0.0), &Grid::new(96).unwrap()).unwrap())
}

#[test]
fn unloaded_rod_has_real_decaying_spectrum() {
    let g = Grid::new(96).unwrap();
    let op = assemble_operator(&reference(0.0), &g);
    let pairs = leading_spectrum(&op, 10).unwrap();
    assert_eq!(pairs.len(), 10);
    for p in &pairs {
        assert!(p.eigenvalue.im.abs() < 1e-8, "{}", p.eigenvalue);
        assert!(p.eigenvalue.re < 0.0);
    }
    assert!(pairs.windows(2).all(|w| w[0].eigenvalue.re >= w[1].eigenvalue.re));
}

#[test]
fn unloaded_operator_is_gamma_symmetric() {
    // smooth fields obeying the tip conditions with nu = 1
    let g = Grid::new(96).unwrap();
    let p = reference(0.0);
    let op = assemble_operator(&p, &g);
    let n = g.n();
    let u = g.nodes();
    let pi = std::f64::consts::PI;
    let field = |a: f64, b: f64| -> Vec<f64> {
        let mut v = Vec::with_capacity(3 * n);
        v.extend(u.iter().map(|s| (pi * s / 2.0).sin() * a));
        v.extend(u.iter().map(|s| (b / 2.0 + a / 6.0) * s * s));
        v.extend(u.iter().map(|s| b * (1.0 - (pi * s).cos()) / 2.0 + a * (s * s - 2.0 * s * s * s / 3.0)));
        v
    };
    // y'(1) = theta(1) for both fields
    let f1 = field(1.0, 0.2);
    let f2 = field(-0.4, 1.0);
    for f in [&f1, &f2] {
        let y: Vec<f64> = f[n..2 * n].to_vec();
        let t: Vec<f64> = f[2 * n..].to_vec();
        assert!((g.d1(&y)[n - 1] - t[n - 1]).abs() < 1e-9);
        assert!(g.d1(&t)[n - 1].abs() < 1e-9);
    }
    let w = g.quad_weights();
    let gw = [p.gamma1_tilde, 1.0, p.gamma3_tilde];
    let apply = |f: &[f64]| -> Vec<f64> {
        (0..3 * n).map(|i| (0..3 * n).map(|j| op.full()[(i, j)] * f[j]).sum()).collect()
    };
    let form = |a: &[f64], b: &[f64]| -> f64 {
        (0..3).map(|c| (0..n).map(|i| gw[c] * w[i] * a[c * n + i] * b[c * n + i]).sum::<f64>()).sum()
    };
    let l1 = apply(&f1);
    let l2 = apply(&f2);
    let lhs = form(&f1, &l2);
    let rhs = form(&l1, &f2);
    let scale = lhs.abs().max(rhs.abs());
    assert!((lhs - rhs).abs() / scale < 1e-8, "{lhs} vs {rhs}");
}

#[test]
fn block_structure_decouples_axial_motion() {
    let g = Grid::new(32).unwrap();
    let op = assemble_operator(&reference(30.0), &g);
    let m = op.interior();
    let r = op.reduced();
    for i in 0..m {
        for j in m..3 * m {
            assert_eq!(r[(i, j)], 0.0);
            assert_eq!(r[(j, i)], 0.0);
        }
    }
    assert_eq!(op.boundary_rows().len(), 6);
}

#[test]
fn regimes_below_and_between_thresholds() {
    let g = Grid::new(96).unwrap();
    let below = leading_spectrum(&assemble_operator(&reference(10.0), &g), 2).unwrap();
    assert!(below.iter().all(|p| p.eigenvalue.im == 0.0 || p.eigenvalue.im.abs() < 1e-9));
    assert!((below[0].eigenvalue.re - below[1].eigenvalue.re).abs() > 1e-3);

    let between = leading_spectrum(&assemble_operator(&reference(30.0), &g), 2).unwrap();
    let (a, b) = (between[0].eigenvalue, between[1].eigenvalue);
    assert!(a.im > 1.0 && (a - b.conj()).norm() < 1e-9 * a.norm());
    assert!(a.re < 0.0);
}

#[test]
fn eigen_residuals_are_small() {
    let g = Grid::new(96).unwrap();
    for f in [0.0, 10.0, 30.0, 37.66, 45.0] {
        let op = assemble_operator(&reference(f), &g);
        for p in leading_spectrum(&op, 8).unwrap() {
            assert!(p.backward_error < 1e-8, "F={f} w={} be={}", p.eigenvalue, p.backward_error);
        }
    }
}

#[test]
fn leading_eigenvalue_is_grid_independent() {
    for f in [0.0, 30.0] {
        let a = leading_spectrum(&assemble_operator(&reference(f), &Grid::new(64).unwrap()), 1).unwrap();
        let b = leading_spectrum(&assemble_operator(&reference(f), &Grid::new(128).unwrap()), 1).unwrap();
        let (wa, wb) = (a[0].eigenvalue, b[0].eigenvalue);
        assert!((wa - wb).norm() < 1e-8 * wa.norm().max(1.0), "{wa} {wb}");
    }
}

#[test]
fn thresholds_match_reference_values() {
    let h = hopf();
    assert!((h.force_star - 20.01).abs() < 0.05, "{h:?}");
    assert!((h.force_crit - 37.66).abs() < 0.05, "{h:?}");
    assert!(h.growth_residual.abs() < 1e-8);
    assert!(h.force_star < h.force_crit);
    assert!((h.omega_c - 191.209209).abs() < 1e-4, "{h:?}");
}

#[test]
fn threshold_brackets_the_sign_change() {
    let h = hopf();
    let g = Grid::new(96).unwrap();
    let lead = |f: f64| leading_spectrum(&assemble_operator(&reference(f), &g), 1).unwrap()[0].eigenvalue.re;
    assert!(lead(h.force_crit - 0.01) < 0.0);
    assert!(lead(h.force_crit + 0.01) > 0.0);
    assert!(lead(h.force_crit).abs() < 1e-8);
}

#[test]
fn thresholds_converge_under_refinement() {
    let h = hopf();
    let fine = find_hopf_threshold(&reference(0.0), &Grid::new(144).unwrap()).unwrap();
    assert!((fine.force_crit - h.force_crit).abs() < 1e-6);
    assert!((fine.omega_c - h.omega_c).abs() < 1e-6);

    let s64 = find_flutter_onset(&reference(0.0), &Grid::new(64).unwrap()).unwrap();
    let s128 = find_flutter_onset(&reference(0.0), &Grid::new(128).unwrap()).unwrap();
    assert!((s64 - s128).abs() < 1e-4, "{s64} {s128}");
}

#[test]
fn axial_drag_does_not_move_the_threshold() {
    let g = Grid::new(64).unwrap();
    let a = find_hopf_threshold(&make_params(1e4, 1e4, 0.5, 1e-4, 0.0).unwrap(), &g).unwrap();
    let b = find_hopf_threshold(&make_params(1e4, 1e4, 2.0, 1e-4, 0.0).unwrap(), &g).unwrap();
    assert!((a.force_crit - b.force_crit).abs() < 1e-10);
    assert!((a.omega_c - b.omega_c).abs() < 1e-10);
    assert!((a.force_star - b.force_star).abs() < 1e-10);
}

#[test]
fn stiffer_rotation_drag_still_flutters() {
    let g = Grid::new(96).unwrap();
    let f = find_flutter_onset(&make_params(1e4, 1e4, 0.5, 1e-2, 0.0).unwrap(), &g).unwrap();
    assert!(f > 0.0);
    // regression baseline
    assert!((f - FLUTTER_ONSET_GAMMA3_1EM2).abs() < 1e-4, "{f}");
}

const FLUTTER_ONSET_GAMMA3_1EM2: f64 = 18.148034;

#[test]
fn critical_mode_normalization_and_tip_conditions() {
    let h = hopf();
    let g = Grid::new(96).unwrap();
    let p = reference(h.force_crit);
    let op = assemble_operator(&p, &g);
    let mode = critical_mode(&op, h.omega_c).unwrap();
    let last = g.n() - 1;
    assert_eq!(mode.y[last], Complex64::new(1.0, 0.0));
    assert_eq!(mode.y[0], Complex64::new(0.0, 0.0));
    assert_eq!(mode.theta[0], Complex64::new(0.0, 0.0));
    assert!(mode.x().iter().all(|v| v.norm() < 1e-10));
    let (r1, r2) = mode.tip_residuals(&g, &p);
    assert!(r1 < 1e-8 && r2 < 1e-8, "{r1} {r2}");

    let stale = assemble_operator(&reference(h.force_crit + 0.5), &g);
    assert!(matches!(
        critical_mode(&stale, h.omega_c),
        Err(rodhopf::Error::StaleThreshold { .. })
    ));
}

#[test]
fn adjoint_mode_properties() {
    let h = hopf();
    let g = Grid::new(96).unwrap();
    let p = reference(h.force_crit);
    let op = assemble_operator(&p, &g);
    let weights = GammaWeights::from_params(&p);
    let mode = critical_mode(&op, h.omega_c).unwrap();
    let adj = adjoint_mode(&op, &weights, h.omega_c).unwrap();

    assert_eq!(adj.psi_y[0], Complex64::new(0.0, 0.0));
    assert!(adj.bc_residual < 1e-8, "{}", adj.bc_residual);
    assert!((adj.eigenvalue - mode.eigenvalue.conj()).norm() < 1e-8);

    let psi = adj.shape();
    let xi = mode.shape();
    let norm = |s: &ModeShape| gamma_inner(&g, &weights, s, s).unwrap().re.sqrt();
    let n = gamma_inner(&g, &weights, &psi, &xi).unwrap();
    assert!(n.norm() / (norm(&psi) * norm(&xi)) > 1e-6);

    let spectrum = leading_spectrum(&op, 16).unwrap();
    let mut others: Vec<&EigenPair> = spectrum
        .iter()
        .filter(|e| (e.eigenvalue - mode.eigenvalue).norm() > 1e-6)
        .collect();
    others.sort_by(|a, b| {
        (a.eigenvalue - mode.eigenvalue)
            .norm()
            .total_cmp(&(b.eigenvalue - mode.eigenvalue).norm())
    });
    for e in others.iter().take(5) {
        let ip = gamma_inner(&g, &weights, &psi, &e.mode).unwrap();
        let rel = ip.norm() / (norm(&psi) * norm(&e.mode));
        assert!(rel < 1e-8, "w={} rel={rel}", e.eigenvalue);
    }
}

#[test]
fn gamma_inner_product_axioms() {
    let g = Grid::new(24).unwrap();
    let w = GammaWeights::new(0.5, 1e-4).unwrap();
    let n = g.n();
    let mut a = ModeShape::zeros(n);
    let mut b = ModeShape::zeros(n);
    for (i, &u) in g.nodes().iter().enumerate() {
        a.x[i] = Complex64::new(u.sin(), u * u);
        a.y[i] = Complex64::new(1.0 - u, 0.3);
        a.theta[i] = Complex64::new(u, -u);
        b.y[i] = Complex64::new(u.cos(), u);
        b.theta[i] = Complex64::new(2.0, u * u * u);
    }
    assert!(gamma_inner(&g, &w, &a, &a).unwrap().re > 0.0);
    let c = Complex64::new(0.3, -1.7);
    let lhs = gamma_inner(&g, &w, &a.scaled(c), &b).unwrap();
    let rhs = c.conj() * gamma_inner(&g, &w, &a, &b).unwrap();
    assert!((lhs - rhs).norm() < 1e-12);

    let mut one = ModeShape::zeros(n);
    one.y = vec![Complex64::new(1.0, 0.0); n];
    assert!((gamma_inner(&g, &w, &one, &one).unwrap() - 1.0).norm() < 1e-12);

    let short = ModeShape::zeros(n - 1);
    assert!(gamma_inner(&g, &w, &short, &one).is_err());
}
