use std::f64::consts::PI;

use proptest::prelude::*;

use powergeom::curvature::hessian_metric;
use powergeom::fd::StepPolicy;
use powergeom::field::ScalarField;
use powergeom::lcr::{
    self, lcr_metric_closed, lcr_metric_oracle, reconcile, recommend_capacitor_range, CapacitorScan,
    LcrModel, LcrState, RECONCILIATION_TOLERANCE,
};
use powergeom::lr::{self, LrImpedancePower, LrPower, LrState};

const OMEGAS: [f64; 3] = [1.0, PI, 2.0 * PI * 50.0];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn omega() -> impl Strategy<Value = f64> {
    prop::sample::select(OMEGAS.to_vec())
}

fn lcr_state() -> impl Strategy<Value = LcrState> {
    (1e-3..1.0f64, 1e-3..1.0f64, 0.05..1.0f64, omega())
        .prop_filter_map("pole", |(r, l, c, w)| LcrState::new(r, l, c, w).ok())
}

// Entries and partials cross zero inside the sampled box, so errors are
// measured against the norm of all entries of the same order.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lr_closed_form_matches_oracle(r in 1e-3..1.0f64, l in 1e-3..1.0f64, w in omega()) {
        let s = LrState::new(r, l, w).unwrap();
        let closed = lr::lr_metric_closed(&s).unwrap();
        let oracle = lr::lr_metric_oracle(&s, &StepPolicy::default()).unwrap();
        let norm = closed.frobenius_norm();
        for i in 0..2 {
            for j in 0..2 {
                let err = (oracle.get(i, j) - closed.get(i, j)).abs() / norm;
                prop_assert!(err < 1e-6, "g[{i}][{j}]: {err}");
            }
        }
    }

    #[test]
    fn lr_det_identity(r in 1e-3..1.0f64, l in 1e-3..1.0f64, w in omega()) {
        let s = LrState::new(r, l, w).unwrap();
        let g = lr::lr_metric_closed(&s).unwrap();
        let det = lr::lr_det(&s).unwrap();
        let formula = -4.0 * w * w / (r * r + w * w * l * l).powi(3);
        prop_assert!(rel(det, formula) < 1e-10);
        prop_assert!(rel(g.get(0, 0) * g.get(1, 1) - g.get(0, 1).powi(2), formula) < 1e-10);
    }

    #[test]
    fn lr_metric_is_indefinite(r in 0.0..1.0f64, l in 0.0..1.0f64, w in omega()) {
        prop_assume!(r > 0.0 || l > 0.0);
        let v = lr::classify_lr(&LrState::new(r, l, w).unwrap()).unwrap();
        prop_assert!(v.det_g < 0.0);
        prop_assert!(!v.joint_reliable);
    }

    #[test]
    fn lr_exact_partials_match_fd(r in 1e-3..1.0f64, l in 1e-3..1.0f64, w in omega()) {
        let f = LrPower { omega: w };
        let policy = StepPolicy::default();
        for order in [vec![vec![0], vec![1]], vec![vec![0, 0], vec![0, 1], vec![1, 1]]] {
            let exact: Vec<f64> = order.iter().map(|i| f.exact_partial(&[r, l], i).unwrap()).collect();
            let norm = exact.iter().map(|v| v * v).sum::<f64>().sqrt();
            for (idx, e) in order.iter().zip(&exact) {
                let fd = powergeom::fd::partial(&f, &[r, l], idx, &policy).unwrap().value;
                prop_assert!((fd - e).abs() / norm < 1e-7, "{idx:?}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn lr_impedance_basis_change(r in 1e-3..1.0f64, l in 1e-3..1.0f64, w in omega()) {
        let x = w * l;
        let closed_imp = -4.0 / (r * r + x * x).powi(3);
        let det = lr::lr_det(&LrState::new(r, l, w).unwrap()).unwrap();
        prop_assert!(rel(closed_imp * w * w, det) < 1e-10);
        let fd_imp = hessian_metric(&LrImpedancePower, &[r, x], &StepPolicy::default()).unwrap().determinant();
        prop_assert!(rel(fd_imp, closed_imp) < 1e-6);
    }

    #[test]
    fn lr_curvature_is_flat(r in 1e-3..1.0f64, l in 1e-3..1.0f64, w in omega()) {
        let rep = lr::lr_curvature(&LrState::new(r, l, w).unwrap(), &StepPolicy::default()).unwrap();
        prop_assert!(rep.scaled_ricci().abs() < lr::FLATNESS_TOLERANCE);
    }

    #[test]
    fn boundary_separates_resistive_verdicts(r in 1e-3..1.0f64, w in omega(), f in 0.1..0.9f64) {
        let b = lr::lr_reliability_boundary(r, w).unwrap();
        let below = lr::classify_lr(&LrState::new(r, b * f, w).unwrap()).unwrap();
        let above = lr::classify_lr(&LrState::new(r, b / f, w).unwrap()).unwrap();
        prop_assert!(below.resistive_reliable);
        prop_assert!(!above.resistive_reliable);
    }

    #[test]
    fn printed_lcr_entries_reconcile_except_g_ll(s in lcr_state()) {
        let closed = lcr_metric_closed(&s).unwrap();
        let oracle = lcr_metric_oracle(&s, &StepPolicy::default()).unwrap();
        let all = reconcile(&closed, &oracle, -1.0);
        prop_assert_eq!(all.len(), 6);
        for d in all {
            if d.entry == "g_LL" {
                prop_assert!(d.relative > RECONCILIATION_TOLERANCE);
            } else {
                prop_assert!(d.relative <= RECONCILIATION_TOLERANCE, "{}: {}", d.entry, d.relative);
            }
        }
    }

    #[test]
    fn lcr_verdict_reads_leading_minors(s in lcr_state()) {
        let v = lcr::classify_lcr(&s).unwrap();
        let minors = v.metric.principal_minors();
        prop_assert_eq!(v.p2_surface, minors[1]);
        prop_assert_eq!(v.det_g, minors[2]);
        prop_assert_eq!(v.metric.coordinate_order(), &["L", "C", "r"]);
        prop_assert_eq!(v.surface_stable, v.p2_surface > 0.0);
        prop_assert_eq!(v.volume_stable, v.det_g > 0.0);
    }

    #[test]
    fn resonance_is_regular(r in 1e-3..1.0f64, l in 1e-3..1.0f64, w in omega()) {
        // Stencils along C shrink like C/Q; beyond Q ~ 4e3 they hit the step floor.
        prop_assume!(w * l / r <= 1e3);
        let c = 1.0 / (w * w * l);
        let s = LcrState::new(r, l, c, w).unwrap();
        prop_assert!(s.reactance().abs() < 1e-9 * (w * l));
        let v = lcr::classify_lcr(&s).unwrap();
        prop_assert!(v.det_g.is_finite());
        prop_assert!(v.metric.entries().iter().flatten().all(|x| x.is_finite()));
        let ricci = v.ricci_scalar;
        prop_assert!(ricci.is_some_and(f64::is_finite), "{ricci:?}");
    }
}

#[test]
fn sharp_resonance_reports_degenerate_step() {
    let (w, l) = (2.0 * PI * 50.0, 0.5);
    let s = LcrState::new(1e-3, l, 1.0 / (w * w * l), w).unwrap();
    let err = lcr::classify_lcr(&s).unwrap_err();
    assert!(matches!(err, powergeom::Error::DegenerateStep { .. }), "{err:?}");
    assert!(err.is_numerical());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn capacitor_interval_moves_continuously(l in 0.27..0.33f64, up in any::<bool>()) {
        let scan = CapacitorScan { c_min: 0.2, c_max: 0.6, resolution: 1e-3 };
        let model = LcrModel::default();
        let a = recommend_capacitor_range(0.5, l, PI, &scan, &model).unwrap();
        let l2 = if up { l * 1.01 } else { l * 0.99 };
        let b = recommend_capacitor_range(0.5, l2, PI, &scan, &model).unwrap();
        let (a, b) = (a.interval.unwrap(), b.interval.unwrap());
        let jump = 10.0 * scan.resolution;
        prop_assert!((a.0 - b.0).abs() <= jump + 1e-12, "{a:?} {b:?}");
        prop_assert!((a.1 - b.1).abs() <= jump + 1e-12, "{a:?} {b:?}");
    }
}

// Endpoints from a numpy chain-rule Hessian of S(r, ωL − 1/(ωC)) scanned at
// the same resolution: (0.296, 0.432).
#[test]
fn capacitor_interval_near_resonance() {
    let scan = CapacitorScan { c_min: 1e-3, c_max: 1.0, resolution: 1e-3 };
    let range = recommend_capacitor_range(0.5, 0.3, PI, &scan, &LcrModel::default()).unwrap();
    let (lo, hi) = range.interval.unwrap();
    assert!((lo - 0.296).abs() <= 1.5e-3, "{lo}");
    assert!((hi - 0.432).abs() <= 1.5e-3, "{hi}");
    assert_eq!(range.scanned_cells, 1000);
}
