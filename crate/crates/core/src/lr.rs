//! Resistive-inductive lines: effective power `P = r/(r² + ω²L²)`, its
//! Hessian metric over (r, L), and the reliability verdicts read from it.

use serde::{Deserialize, Serialize};

use crate::curvature::{hessian_metric, ricci_scalar_2d, CurvatureReport};
use crate::error::{Error, Result};
use crate::fd::StepPolicy;
use crate::field::ScalarField;
use crate::metric::MetricTensor;

/// Scaled Ricci scalars below this count as flat.
pub const FLATNESS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrState {
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub omega: f64,
}

impl LrState {
    pub fn new(r: f64, l: f64, omega: f64) -> Result<Self> {
        let s = LrState { r, l, omega };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if !(self.r >= 0.0 && self.l >= 0.0 && self.r.is_finite() && self.l.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "r and L must be finite and non-negative, got r = {}, L = {}",
                self.r, self.l
            )));
        }
        if self.r == 0.0 && self.l == 0.0 {
            return Err(Error::SingularInput(
                "r = L = 0: the effective power has a pole at the origin".into(),
            ));
        }
        Ok(())
    }

    pub fn coords(&self) -> [f64; 2] {
        [self.r, self.l]
    }

    /// `|Z|² = r² + ω²L²`.
    pub fn impedance_sq(&self) -> f64 {
        self.r * self.r + self.omega * self.omega * self.l * self.l
    }
}

/// `P(r, L)` as a scalar field over (r, L) at fixed ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrPower {
    pub omega: f64,
}

impl ScalarField for LrPower {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (r, wl) = (x[0], self.omega * x[1]);
        r / (r * r + wl * wl)
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite()) && (x[0] != 0.0 || x[1] != 0.0)
    }

    fn scales(&self, x: &[f64]) -> Vec<f64> {
        let z = x[0].hypot(self.omega * x[1]);
        vec![z, z / self.omega]
    }

    fn coordinate_names(&self) -> Vec<String> {
        vec!["r".into(), "L".into()]
    }

    fn exact_partial(&self, x: &[f64], multi_index: &[usize]) -> Option<f64> {
        let (r, l, w) = (x[0], x[1], self.omega);
        let d = r * r + w * w * l * l;
        let mut idx = multi_index.to_vec();
        idx.sort_unstable();
        match idx.as_slice() {
            [] => Some(r / d),
            [0] => Some((w * w * l * l - r * r) / (d * d)),
            [1] => Some(-2.0 * r * w * w * l / (d * d)),
            [0, 0] | [0, 1] | [1, 1] => {
                let g = metric_entries(r, l, w);
                Some(match idx.as_slice() {
                    [0, 0] => g[0],
                    [0, 1] => g[1],
                    _ => g[2],
                })
            }
            _ => None,
        }
    }
}

/// `P(r, X_L) = r/(r² + X_L²)`, the same power over the impedance basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrImpedancePower;

impl ScalarField for LrImpedancePower {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        x[0] / (x[0] * x[0] + x[1] * x[1])
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite()) && (x[0] != 0.0 || x[1] != 0.0)
    }

    fn scales(&self, x: &[f64]) -> Vec<f64> {
        let z = x[0].hypot(x[1]);
        vec![z, z]
    }

    fn coordinate_names(&self) -> Vec<String> {
        vec!["r".into(), "X_L".into()]
    }
}

/// Effective power of an LR line.
///
/// ```
/// use powergeom::lr::{lr_power, LrState};
///
/// let p = lr_power(&LrState::new(1.0, 1.0, 1.0).unwrap()).unwrap();
/// assert_eq!(p, 0.5);
/// ```
pub fn lr_power(state: &LrState) -> Result<f64> {
    state.validate()?;
    Ok(LrPower { omega: state.omega }.value(&state.coords()))
}

// (g_rr, g_rL, g_LL)
fn metric_entries(r: f64, l: f64, w: f64) -> [f64; 3] {
    let w2 = w * w;
    let d = r * r + w2 * l * l;
    let d3 = d * d * d;
    let b = r * r - 3.0 * w2 * l * l;
    [
        2.0 * r * b / d3,
        2.0 * w2 * l * (3.0 * r * r - w2 * l * l) / d3,
        -2.0 * r * w2 * b / d3,
    ]
}

/// Closed-form Hessian metric over (r, L).
pub fn lr_metric_closed(state: &LrState) -> Result<MetricTensor> {
    state.validate()?;
    let [rr, rl, ll] = metric_entries(state.r, state.l, state.omega);
    MetricTensor::new(
        vec![vec![rr, rl], vec![rl, ll]],
        vec!["r".into(), "L".into()],
    )
}

/// Finite-difference Hessian metric over (r, L).
pub fn lr_metric_oracle(state: &LrState, policy: &StepPolicy) -> Result<MetricTensor> {
    state.validate()?;
    hessian_metric(&LrPower { omega: state.omega }, &state.coords(), policy)
}

/// `det g = −4ω²/(r² + ω²L²)³`, negative everywhere.
pub fn lr_det(state: &LrState) -> Result<f64> {
    state.validate()?;
    let d = state.impedance_sq();
    Ok(-4.0 * state.omega * state.omega / (d * d * d))
}

/// Inductance on the boundary `r² = 3ω²L²`; below it `g_rr > 0`.
///
/// ```
/// use powergeom::lr::lr_reliability_boundary;
///
/// let l = lr_reliability_boundary(3f64.sqrt(), 1.0).unwrap();
/// assert!((l - 1.0).abs() < 1e-15);
/// ```
pub fn lr_reliability_boundary(r: f64, omega: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) || !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "boundary needs r > 0 and omega > 0, got r = {r}, omega = {omega}"
        )));
    }
    Ok(r / (3f64.sqrt() * omega))
}

/// Curvature of the LR metric, from the two-dimensional Hessian formula.
pub fn lr_curvature(state: &LrState, policy: &StepPolicy) -> Result<CurvatureReport> {
    state.validate()?;
    ricci_scalar_2d(&LrPower { omega: state.omega }, &state.coords(), policy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrVerdict {
    pub g_rr: f64,
    #[serde(rename = "g_rL")]
    pub g_rl: f64,
    #[serde(rename = "g_LL")]
    pub g_ll: f64,
    pub det_g: f64,
    /// `r² − 3ω²L²`
    pub boundary_residual: f64,
    pub resistive_reliable: bool,
    pub joint_reliable: bool,
    pub globally_reliable: bool,
}

/// Reliability verdict of an LR line.
pub fn classify_lr(state: &LrState) -> Result<LrVerdict> {
    classify_lr_with(state, &StepPolicy::default())
}

pub fn classify_lr_with(state: &LrState, policy: &StepPolicy) -> Result<LrVerdict> {
    let g = lr_metric_closed(state)?;
    let (g_rr, g_rl, g_ll) = (g.get(0, 0), g.get(0, 1), g.get(1, 1));
    let det_g = lr_det(state)?;
    let globally_reliable = match lr_curvature(state, policy) {
        Ok(rep) => rep.scaled_ricci().abs() < FLATNESS_TOLERANCE,
        Err(e) if e.is_numerical() => false,
        Err(e) => return Err(e),
    };
    Ok(LrVerdict {
        g_rr,
        g_rl,
        g_ll,
        det_g,
        boundary_residual: state.r * state.r - 3.0 * (state.omega * state.l).powi(2),
        resistive_reliable: g_rr > 0.0,
        joint_reliable: det_g > 0.0,
        globally_reliable,
    })
}

/// Published (line, r, L, Det(g)) rows of the LR reference table.
pub const TABLE_1: [(u32, f64, f64, f64); 7] = [
    (1, 0.02, 0.60, -852772.88),
    (2, 0.08, 0.24, -208.19),
    (3, 0.06, 0.18, -1169.78),
    (4, 0.06, 0.68, -0.41),
    (5, 0.04, 0.12, -13324.57),
    (6, 0.01, 0.03, -54577464.92),
    (7, 0.08, 0.024, -22377541.16),
];

/// Row 1's inductance under the reading that reproduces its printed value.
pub const TABLE_1_ROW_1_ALT_L: f64 = 0.06;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub line: String,
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub det_g: f64,
    pub published: f64,
    pub relative_error: f64,
}

fn table_row(line: String, r: f64, l: f64, omega: f64, published: f64) -> Result<Table1Row> {
    let det_g = lr_det(&LrState::new(r, l, omega)?)?;
    Ok(Table1Row {
        line,
        r,
        l,
        det_g,
        published,
        relative_error: (det_g - published) / published.abs(),
    })
}

/// Determinants of every reference row at `omega`, in table order.
pub fn reproduce_table_1(omega: f64) -> Result<Vec<Table1Row>> {
    TABLE_1
        .iter()
        .map(|&(t, r, l, p)| table_row(format!("T{t}"), r, l, omega, p))
        .collect()
}

/// Row 1 evaluated with `L = 0.06` instead of the printed 0.60.
pub fn table_1_row_1_alternate(omega: f64) -> Result<Table1Row> {
    let (_, r, _, p) = TABLE_1[0];
    table_row("T1 (L=0.06)".into(), r, TABLE_1_ROW_1_ALT_L, omega, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn power_examples() {
        assert_eq!(lr_power(&LrState::new(1.0, 0.0, PI).unwrap()).unwrap(), 1.0);
        let p = lr_power(&LrState::new(0.08, 0.24, PI).unwrap()).unwrap();
        assert!((p - 0.139157246511145).abs() < 1e-12);
    }

    #[test]
    fn origin_is_rejected() {
        assert!(matches!(LrState::new(0.0, 0.0, 1.0), Err(Error::SingularInput(_))));
        assert!(LrState::new(-0.1, 0.2, 1.0).is_err());
    }

    #[test]
    fn unit_point_metric() {
        let g = lr_metric_closed(&LrState::new(1.0, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(g.entries(), &[vec![2.0, 0.0], vec![0.0, -2.0]]);
        assert_eq!(lr_det(&LrState::new(1.0, 0.0, 1.0).unwrap()).unwrap(), -4.0);
    }

    #[test]
    fn boundary_zeroes_diagonal() {
        let l = lr_reliability_boundary(0.1, PI).unwrap();
        assert!((l - 0.0183776298473931).abs() < 1e-15);
        let g = lr_metric_closed(&LrState::new(0.1, l, PI).unwrap()).unwrap();
        assert!(g.get(0, 0).abs() < 1e-12 * g.get(0, 1).abs());
        assert!(g.get(1, 1).abs() < 1e-12 * g.get(0, 1).abs());
    }

    #[test]
    fn boundary_brackets_a_sign_change() {
        let l = lr_reliability_boundary(0.06, PI).unwrap();
        assert!((l - 0.011027).abs() < 1e-6);
        let below = lr_metric_closed(&LrState::new(0.06, l * (1.0 - 1e-3), PI).unwrap()).unwrap();
        let above = lr_metric_closed(&LrState::new(0.06, l * (1.0 + 1e-3), PI).unwrap()).unwrap();
        assert!(below.get(0, 0) > 0.0 && above.get(0, 0) < 0.0);
    }

    #[test]
    fn boundary_needs_positive_inputs() {
        assert!(lr_reliability_boundary(0.0, 1.0).is_err());
        assert!(lr_reliability_boundary(1.0, -1.0).is_err());
    }

    #[test]
    fn oracle_matches_closed_form() {
        let s = LrState::new(0.08, 0.24, PI).unwrap();
        let a = lr_metric_closed(&s).unwrap();
        let b = lr_metric_oracle(&s, &StepPolicy::default()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(rel(b.get(i, j), a.get(i, j)) < 1e-6);
            }
        }
        assert!((a.get(0, 0) - -1.43079749388747).abs() < 1e-12);
    }

    #[test]
    fn verdicts() {
        let v = classify_lr(&LrState::new(0.08, 0.24, PI).unwrap()).unwrap();
        assert!(!v.joint_reliable);
        assert!(v.globally_reliable);
        assert!(classify_lr(&LrState::new(1.0, 0.01, 1.0).unwrap()).unwrap().resistive_reliable);
        assert!(!classify_lr(&LrState::new(0.01, 1.0, 1.0).unwrap()).unwrap().resistive_reliable);
    }

    #[test]
    fn table_rows_in_order() {
        let rows = reproduce_table_1(PI).unwrap();
        assert_eq!(rows.len(), 7);
        assert_eq!(rows[1].line, "T2");
        assert!(rel(rows[1].det_g, -207.78) < 1e-4);
        assert!((rows[0].det_g - -0.88).abs() < 0.01);
        let alt = table_1_row_1_alternate(PI).unwrap();
        assert!(alt.relative_error.abs() < 5e-3);
    }
}
