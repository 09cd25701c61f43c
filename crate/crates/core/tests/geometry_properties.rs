use proptest::prelude::*;

use powergeom::curvature::{hessian_estimate, ricci_scalar_2d, ricci_scalar_nd, HessianMetric};
use powergeom::fd::{partial, StepPolicy};
use powergeom::field::{FnField, ScalarField};
use powergeom::metric::MetricTensor;

/// `exp(a x + b y) + ε sin(p x) cos(q y)` with analytic partials of any order.
#[derive(Debug, Clone, Copy)]
struct ExpTrig {
    a: f64,
    b: f64,
    eps: f64,
    p: f64,
    q: f64,
}

impl ScalarField for ExpTrig {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.a * x[0] + self.b * x[1]).exp() + self.eps * (self.p * x[0]).sin() * (self.q * x[1]).cos()
    }

    fn exact_partial(&self, x: &[f64], multi_index: &[usize]) -> Option<f64> {
        let i = multi_index.iter().filter(|&&k| k == 0).count() as i32;
        let j = multi_index.len() as i32 - i;
        let half_pi = std::f64::consts::FRAC_PI_2;
        let e = self.a.powi(i) * self.b.powi(j) * (self.a * x[0] + self.b * x[1]).exp();
        let t = self.eps
            * self.p.powi(i)
            * (self.p * x[0] + i as f64 * half_pi).sin()
            * self.q.powi(j)
            * (self.q * x[1] + j as f64 * half_pi).cos();
        Some(e + t)
    }
}

fn exp_trig() -> impl Strategy<Value = ExpTrig> {
    (0.5..1.5f64, 0.5..1.5f64, 0.0..0.05f64, 0.2..1.0f64, 0.2..1.0f64)
        .prop_map(|(a, b, eps, p, q)| ExpTrig { a, b, eps, p, q })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// Smooth potential with curvature: a quadratic plus a cubic plus an exponential.
fn smooth_field(c: [f64; 6]) -> impl Fn(&[f64]) -> f64 {
    move |x: &[f64]| {
        let (u, v) = (x[0], x[1]);
        c[0] * (0.7 * u - 0.4 * v).exp() + c[1] * u * u + c[2] * v * v + c[3] * u * v + c[4] * u.powi(3)
            + c[5] * v.powi(3)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fd_partials_match_exact(f in exp_trig(), x in 0.0..1.0f64, y in 0.0..1.0f64) {
        let policy = StepPolicy::default();
        let p = [x, y];
        for (idx, tol) in [
            (vec![0], 1e-7), (vec![1], 1e-7),
            (vec![0, 0], 1e-7), (vec![0, 1], 1e-7), (vec![1, 1], 1e-7),
            (vec![0, 0, 0], 1e-5), (vec![0, 0, 1], 1e-5), (vec![0, 1, 1], 1e-5), (vec![1, 1, 1], 1e-5),
        ] {
            let fd = partial(&f, &p, &idx, &policy).unwrap().value;
            let exact = f.exact_partial(&p, &idx).unwrap();
            prop_assert!(rel(fd, exact) < tol, "{idx:?}: {fd} vs {exact}");
        }
    }

    #[test]
    fn raw_mixed_partials_agree(f in exp_trig(), x in 0.0..1.0f64, y in 0.0..1.0f64) {
        let est = hessian_estimate(&f, &[x, y], &StepPolicy::default()).unwrap();
        prop_assert!(rel(est.raw[0][1], est.raw[1][0]) < 1e-8);
        prop_assert_eq!(est.metric.get(0, 1), est.metric.get(1, 0));
    }

    #[test]
    fn symmetric_metric_for_lr_power(r in 1e-3..1.0f64, l in 1e-3..1.0f64) {
        let f = powergeom::lr::LrPower { omega: std::f64::consts::PI };
        let est = hessian_estimate(&f, &[r, l], &StepPolicy::default()).unwrap();
        prop_assert!(rel(est.raw[0][1], est.raw[1][0]) < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn curvature_pipelines_agree(
        c in prop::array::uniform6(-2.0..2.0f64),
        x in -1.0..1.0f64,
        y in -1.0..1.0f64,
    ) {
        let field = FnField::new(2, smooth_field(c));
        let policy = StepPolicy::default();
        let closed = ricci_scalar_2d(&field, &[x, y], &policy);
        prop_assume!(closed.is_ok());
        let closed = closed.unwrap();
        prop_assume!(closed.regular && closed.scaled_ricci().abs() > 1e-3);
        let general = ricci_scalar_nd(&HessianMetric::new(FnField::new(2, smooth_field(c))), &[x, y], &policy).unwrap();
        prop_assert!(
            rel(general.ricci_scalar, closed.ricci_scalar) < 1e-6,
            "{} vs {}", general.ricci_scalar, closed.ricci_scalar
        );
    }

    #[test]
    fn minors_match_cofactor_expansion(v in prop::array::uniform6(-3.0..3.0f64)) {
        let m = MetricTensor::from_rows(vec![
            vec![v[0], v[1], v[2]],
            vec![v[1], v[3], v[4]],
            vec![v[2], v[4], v[5]],
        ]).unwrap();
        let minors = m.principal_minors();
        let d2 = v[0] * v[3] - v[1] * v[1];
        let d3 = v[0] * (v[3] * v[5] - v[4] * v[4]) - v[1] * (v[1] * v[5] - v[4] * v[2])
            + v[2] * (v[1] * v[4] - v[3] * v[2]);
        let scale = v.iter().map(|x| x.abs()).fold(1.0, f64::max);
        prop_assert_eq!(minors[0], v[0]);
        prop_assert!((minors[1] - d2).abs() <= 1e-12 * scale * scale);
        prop_assert!((minors[2] - d3).abs() <= 1e-12 * scale.powi(3));
        prop_assert_eq!(minors[2], m.determinant());
    }

    #[test]
    fn block_determinant_is_multiplicative(
        a in prop::array::uniform3(-3.0..3.0f64),
        b in prop::array::uniform6(-3.0..3.0f64),
    ) {
        let two = MetricTensor::from_rows(vec![vec![a[0], a[1]], vec![a[1], a[2]]]).unwrap();
        let three = MetricTensor::from_rows(vec![
            vec![b[0], b[1], b[2]],
            vec![b[1], b[3], b[4]],
            vec![b[2], b[4], b[5]],
        ]).unwrap();
        let product = two.determinant() * three.determinant();
        prop_assume!(product.abs() > 1e-6);
        let blocks = vec![("p".to_string(), two), ("q".to_string(), three)];
        let assembled = MetricTensor::block_diagonal(&blocks).unwrap();
        prop_assert_eq!(assembled.dim(), 5);
        prop_assert!(rel(assembled.determinant(), product) < 1e-10);
    }
}
