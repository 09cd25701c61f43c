//! Lines with a capacitive element: effective power
//! `S = (r + u)/(r² + u²)` with `u = ωL − 1/(ωC)`, its Hessian metric over
//! (L, C, r), and the stability verdicts read from it.
//!
//! All verdicts come from the finite-difference Hessian ([`lcr_metric_oracle`]).
//! A closed-form metric ([`lcr_metric_closed`]) is kept for reconciliation
//! only: [`LcrModel::analyze`] evaluates it and reports where it disagrees.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{ricci_scalar_nd, CurvatureReport, HessianMetric};
use crate::error::{Error, Result};
use crate::fd::StepPolicy;
use crate::field::ScalarField;
use crate::metric::MetricTensor;

/// Default `|R|` at which a configuration counts as globally unstable.
pub const BLOW_UP_THRESHOLD: f64 = 1e6;

/// Default relative tolerance of the closed-form reconciliation.
pub const RECONCILIATION_TOLERANCE: f64 = 1e-4;

pub const COORDINATES: [&str; 3] = ["L", "C", "r"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcrState {
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub omega: f64,
}

impl LcrState {
    pub fn new(r: f64, l: f64, c: f64, omega: f64) -> Result<Self> {
        let s = LcrState { r, l, c, omega };
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
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::SingularInput(format!(
                "C must be positive (C = 0 is a pole of 1/(wC)), got {}",
                self.c
            )));
        }
        if !(self.impedance_sq() > 0.0) {
            return Err(Error::SingularInput(
                "r = 0 at resonance: the effective power has a pole".into(),
            ));
        }
        Ok(())
    }

    /// Net reactance `u = ωL − 1/(ωC)`.
    pub fn reactance(&self) -> f64 {
        self.omega * self.l - 1.0 / (self.omega * self.c)
    }

    pub fn impedance_sq(&self) -> f64 {
        let u = self.reactance();
        self.r * self.r + u * u
    }

    /// Coordinates in metric order (L, C, r).
    pub fn coords(&self) -> [f64; 3] {
        [self.l, self.c, self.r]
    }
}

/// `S(L, C, r)` at fixed ω, coordinates in the order (L, C, r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcrPower {
    pub omega: f64,
}

impl LcrPower {
    fn parts(&self, x: &[f64]) -> (f64, f64) {
        let u = self.omega * x[0] - 1.0 / (self.omega * x[1]);
        (x[2], u)
    }
}

impl ScalarField for LcrPower {
    fn dim(&self) -> usize {
        3
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (r, u) = self.parts(x);
        (r + u) / (r * r + u * u)
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        if !x.iter().all(|v| v.is_finite()) || !(x[1] > 0.0) {
            return false;
        }
        let (r, u) = self.parts(x);
        r * r + u * u > 0.0
    }

    fn scales(&self, x: &[f64]) -> Vec<f64> {
        let (r, u) = self.parts(x);
        let z = r.hypot(u);
        let xc = 1.0 / (self.omega * x[1]);
        vec![z / self.omega, x[1] * (z / xc).min(1.0), z]
    }

    fn coordinate_names(&self) -> Vec<String> {
        COORDINATES.iter().map(|s| s.to_string()).collect()
    }
}

/// `S(r, X_L, X_C) = (r + X_L − X_C)/(r² + (X_L − X_C)²)` over the impedance
/// basis (r, X_L, X_C).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcrImpedancePower;

impl ScalarField for LcrImpedancePower {
    fn dim(&self) -> usize {
        3
    }

    fn value(&self, x: &[f64]) -> f64 {
        lcr_effective_power_impedance(x[0], x[1], x[2])
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        let u = x[1] - x[2];
        x.iter().all(|v| v.is_finite()) && x[0] * x[0] + u * u > 0.0
    }

    fn scales(&self, x: &[f64]) -> Vec<f64> {
        let z = x[0].hypot(x[1] - x[2]);
        vec![z, z, z]
    }

    fn coordinate_names(&self) -> Vec<String> {
        vec!["r".into(), "X_L".into(), "X_C".into()]
    }
}

pub fn lcr_effective_power_impedance(r: f64, x_l: f64, x_c: f64) -> f64 {
    let u = x_l - x_c;
    (r + u) / (r * r + u * u)
}

/// Effective power through the component.
///
/// ```
/// use powergeom::lcr::{lcr_effective_power, LcrState};
///
/// // At resonance the reactive part cancels.
/// let s = LcrState::new(0.1, 1.0, 1.0, 1.0).unwrap();
/// assert!((lcr_effective_power(&s).unwrap() - 10.0).abs() < 1e-12);
/// ```
pub fn lcr_effective_power(state: &LcrState) -> Result<f64> {
    state.validate()?;
    Ok(LcrPower { omega: state.omega }.value(&state.coords()))
}

/// Closed-form metric as published, in the order (L, C, r).
///
/// Evaluated verbatim, including its `g_LL` entry, which does not equal the
/// Hessian (it repeats `g_LC`); see [`lcr_metric_oracle`].
pub fn lcr_metric_closed(state: &LcrState) -> Result<MetricTensor> {
    state.validate()?;
    let (r, l, c, w) = (state.r, state.l, state.c, state.omega);
    let den = (r * r * w * w * c * c + w.powi(4) * l * l * c * c - 2.0 * w * w * l * c + 1.0).powi(3);
    let a = r.powi(3) * w.powi(3) * c.powi(3) - 3.0 * r * w.powi(5) * c.powi(3) * l * l
        + 6.0 * r * w.powi(3) * c * c * l
        - 3.0 * r * w * c
        + 3.0 * r * r * w.powi(4) * c.powi(3) * l
        - 3.0 * r * r * w * w * c * c
        - w.powi(6) * l.powi(3) * c.powi(3)
        + 3.0 * w.powi(4) * l * l * c * c
        - 3.0 * w * w * l * c
        + 1.0;
    let b = r.powi(3) * w.powi(3) * c.powi(3) - 3.0 * r * w.powi(5) * c.powi(3) * l * l
        + 6.0 * r * w.powi(3) * c * c * l
        - 3.0 * r * w * c
        - 3.0 * r * r * w.powi(4) * c.powi(3) * l
        + 3.0 * r * r * w * w * c * c
        + w.powi(6) * l.powi(3) * c.powi(3)
        - 3.0 * w.powi(4) * l * l * c * c
        + 3.0 * w * w * l * c
        - 1.0;
    let cc_num = w * l - r - 3.0 * r * r * w * c + 3.0 * w.powi(5) * c * c * l.powi(3)
        + 3.0 * r.powi(3) * w * w * c * c
        + 3.0 * r * r * w.powi(3) * c * c * l
        + 3.0 * r * w.powi(4) * c * c * l * l
        - 2.0 * r * w.powi(6) * l.powi(3) * c.powi(3)
        - 2.0 * r.powi(3) * w.powi(4) * c.powi(3) * l
        - 3.0 * w.powi(3) * l * l * c
        - w.powi(7) * c.powi(3) * l.powi(4)
        + r.powi(4) * w.powi(3) * c.powi(3);

    let g_rr = 2.0 * w.powi(3) * c.powi(3) * a / den;
    let g_rl = -2.0 * w.powi(4) * c.powi(3) * b / den;
    let g_rc = -2.0 * w * w * c * b / den;
    let g_ll = -2.0 * w.powi(3) * c * a / den;
    let g_lc = -2.0 * w.powi(3) * c * a / den;
    let g_cc = -2.0 * w * w * cc_num / den;
    MetricTensor::new(
        vec![
            vec![g_ll, g_lc, g_rl],
            vec![g_lc, g_cc, g_rc],
            vec![g_rl, g_rc, g_rr],
        ],
        names(),
    )
}

fn names() -> Vec<String> {
    COORDINATES.iter().map(|s| s.to_string()).collect()
}

/// Finite-difference Hessian of the effective power over (L, C, r).
pub fn lcr_metric_oracle(state: &LcrState, policy: &StepPolicy) -> Result<MetricTensor> {
    state.validate()?;
    crate::curvature::hessian_metric(&LcrPower { omega: state.omega }, &state.coords(), policy)
}

/// Leading (L, C) minor of the oracle metric.
pub fn lc_surface_minor(state: &LcrState, policy: &StepPolicy) -> Result<f64> {
    Ok(lcr_metric_oracle(state, policy)?.principal_minors()[1])
}

/// Determinant of the oracle metric.
pub fn lcr_det(state: &LcrState, policy: &StepPolicy) -> Result<f64> {
    Ok(lcr_metric_oracle(state, policy)?.determinant())
}

/// Ricci scalar of the Hessian metric by the general metric-derivative route.
pub fn lcr_scalar_curvature(state: &LcrState, policy: &StepPolicy) -> Result<CurvatureReport> {
    state.validate()?;
    let field = HessianMetric::new(LcrPower { omega: state.omega });
    ricci_scalar_nd(&field, &state.coords(), policy)
}

/// Closed forms along `L = r = 0`, as published.
pub mod reference {
    /// `8(1 − 3ω²C²)ω⁷C³`
    pub fn limit_det(c: f64, omega: f64) -> f64 {
        let wc = omega * c;
        8.0 * (1.0 - 3.0 * wc * wc) * omega.powi(7) * c.powi(3)
    }

    /// `½(−6 + 25ω²C² − 51ω⁴C⁴)/((1 − 3ω²C²)² ωC)`
    pub fn limit_ricci(c: f64, omega: f64) -> f64 {
        let x = omega * c;
        let x2 = x * x;
        0.5 * (-6.0 + 25.0 * x2 - 51.0 * x2 * x2) / ((1.0 - 3.0 * x2).powi(2) * x)
    }

    /// The published `r = 0` surface minor.
    pub fn surface_minor_r0(l: f64, c: f64, omega: f64) -> f64 {
        let w = omega;
        let poly = 1.0 - 20.0 * w.powi(6) * l.powi(3) * c.powi(3)
            - 20.0 * w.powi(8) * l.powi(3) * c.powi(5)
            + 15.0 * w.powi(10) * l.powi(4) * c.powi(6)
            + 15.0 * w.powi(8) * l.powi(4) * c.powi(4)
            - 6.0 * w.powi(4) * c.powi(3) * l
            - 6.0 * w.powi(10) * l.powi(5) * c.powi(5)
            - 6.0 * w * w * l * c
            - 6.0 * w.powi(12) * l.powi(5) * c.powi(7)
            + 15.0 * w.powi(4) * l * l * c * c
            + 15.0 * w.powi(6) * l * l * c.powi(4)
            + w.powi(14) * l.powi(6) * c.powi(8)
            + w.powi(12) * l.powi(6) * c.powi(6)
            + w * w * c * c;
        let den = (1.0 + w.powi(4) * l * l * c * c - 2.0 * w * w * l * c).powi(6);
        -4.0 * w.powi(6) * c.powi(4) * poly / den
    }
}

/// Closed forms along `L = r = 0` of the true Hessian metric.
pub mod exact {
    /// `−16ω⁹C⁵`
    pub fn limit_det(c: f64, omega: f64) -> f64 {
        -16.0 * omega.powi(9) * c.powi(5)
    }

    /// `2/(ωC)`
    pub fn limit_ricci(c: f64, omega: f64) -> f64 {
        2.0 / (omega * c)
    }

    /// `4C²ω⁶/(ω²LC − 1)⁵`
    pub fn surface_minor_r0(l: f64, c: f64, omega: f64) -> f64 {
        4.0 * c * c * omega.powi(6) / (omega * omega * l * c - 1.0).powi(5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcrVerdict {
    pub metric: MetricTensor,
    pub p2_surface: f64,
    pub det_g: f64,
    /// Absent when the metric is degenerate.
    pub ricci_scalar: Option<f64>,
    pub surface_stable: bool,
    pub volume_stable: bool,
    pub globally_stable: bool,
}

/// One entry where the closed form and the oracle disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub entry: String,
    pub closed_form: f64,
    pub oracle: f64,
    pub relative: f64,
}

/// Entrywise comparison of `closed` against `oracle` (upper triangle).
pub fn reconcile(closed: &MetricTensor, oracle: &MetricTensor, tolerance: f64) -> Vec<Discrepancy> {
    let n = oracle.dim();
    let names = oracle.coordinate_order();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let (c, o) = (closed.get(i, j), oracle.get(i, j));
            let relative = if o != 0.0 { (c - o).abs() / o.abs() } else { (c - o).abs() };
            if !(relative <= tolerance) {
                out.push(Discrepancy {
                    entry: format!("g_{}{}", names[i], names[j]),
                    closed_form: c,
                    oracle: o,
                    relative,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcrAnalysis {
    pub state: LcrState,
    pub verdict: LcrVerdict,
    pub discrepancies: Vec<Discrepancy>,
}

pub type ClosedForm = fn(&LcrState) -> Result<MetricTensor>;

/// Classification settings plus the closed form to reconcile against.
#[derive(Debug, Clone, Copy)]
pub struct LcrModel {
    pub closed_form: ClosedForm,
    pub blow_up_threshold: f64,
    pub reconciliation_tolerance: f64,
    pub policy: StepPolicy,
}

impl Default for LcrModel {
    fn default() -> Self {
        LcrModel {
            closed_form: lcr_metric_closed,
            blow_up_threshold: BLOW_UP_THRESHOLD,
            reconciliation_tolerance: RECONCILIATION_TOLERANCE,
            policy: StepPolicy::default(),
        }
    }
}

impl LcrModel {
    /// Verdict from the oracle metric alone.
    pub fn classify(&self, state: &LcrState) -> Result<LcrVerdict> {
        let metric = lcr_metric_oracle(state, &self.policy)?;
        let minors = metric.principal_minors();
        let (p2_surface, det_g) = (minors[1], minors[2]);
        let ricci_scalar = if metric.is_degenerate() {
            None
        } else {
            match lcr_scalar_curvature(state, &self.policy) {
                Ok(rep) => Some(rep.ricci_scalar),
                Err(e) if e.is_numerical() => None,
                Err(e) => return Err(e),
            }
        };
        let globally_stable = matches!(ricci_scalar, Some(r) if r.is_finite() && r.abs() < self.blow_up_threshold);
        Ok(LcrVerdict {
            metric,
            p2_surface,
            det_g,
            ricci_scalar,
            surface_stable: p2_surface > 0.0,
            volume_stable: det_g > 0.0,
            globally_stable,
        })
    }

    /// Verdict plus the closed-form reconciliation.
    pub fn analyze(&self, state: &LcrState) -> Result<LcrAnalysis> {
        let verdict = self.classify(state)?;
        let closed = (self.closed_form)(state)?;
        let discrepancies = reconcile(&closed, &verdict.metric, self.reconciliation_tolerance);
        Ok(LcrAnalysis {
            state: *state,
            verdict,
            discrepancies,
        })
    }
}

/// Stability verdict with default settings.
pub fn classify_lcr(state: &LcrState) -> Result<LcrVerdict> {
    LcrModel::default().classify(state)
}

/// Value of the oracle determinant and Ricci scalar along `L = r = h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub offset: f64,
    pub det_g: f64,
    pub ricci_scalar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitStudy {
    #[serde(rename = "C")]
    pub c: f64,
    pub omega: f64,
    pub points: Vec<LimitPoint>,
    /// Linear extrapolation to `h = 0` from the two smallest offsets.
    pub extrapolated_det: f64,
    pub extrapolated_ricci: Option<f64>,
}

impl LimitStudy {
    pub fn dets(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.det_g).collect()
    }

    pub fn riccis(&self) -> Option<Vec<f64>> {
        self.points.iter().map(|p| p.ricci_scalar).collect()
    }

    pub fn offsets(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.offset).collect()
    }
}

/// Sample the oracle along `L = r = h` for each `h` in `offsets`
/// (decreasing).
pub fn limit_study(c: f64, omega: f64, offsets: &[f64], policy: &StepPolicy) -> Result<LimitStudy> {
    if offsets.len() < 2 {
        return Err(Error::InvalidArgument("need at least two offsets".into()));
    }
    let mut points = Vec::with_capacity(offsets.len());
    for &h in offsets {
        let state = LcrState::new(h, h, c, omega)?;
        let det_g = lcr_det(&state, policy)?;
        let ricci_scalar = match lcr_scalar_curvature(&state, policy) {
            Ok(rep) => Some(rep.ricci_scalar),
            Err(e) if e.is_numerical() => None,
            Err(e) => return Err(e),
        };
        points.push(LimitPoint {
            offset: h,
            det_g,
            ricci_scalar,
        });
    }
    let n = points.len();
    let (a, b) = (&points[n - 2], &points[n - 1]);
    let extrapolate = |va: f64, vb: f64| vb - (va - vb) * b.offset / (a.offset - b.offset);
    Ok(LimitStudy {
        c,
        omega,
        extrapolated_det: extrapolate(a.det_g, b.det_g),
        extrapolated_ricci: match (a.ricci_scalar, b.ricci_scalar) {
            (Some(x), Some(y)) => Some(extrapolate(x, y)),
            _ => None,
        },
        points,
    })
}

/// Smallest observed convergence order of `values(h)` towards `target`
/// over consecutive pairs of a decreasing offset sequence.
///
/// Returns `f64::INFINITY` if some error is exactly zero, and a non-positive
/// number when the sequence does not approach `target`.
pub fn observed_order(offsets: &[f64], values: &[f64], target: f64) -> f64 {
    offsets
        .windows(2)
        .zip(values.windows(2))
        .map(|(h, v)| {
            let (e0, e1) = ((v[0] - target).abs(), (v[1] - target).abs());
            if e1 == 0.0 {
                f64::INFINITY
            } else {
                (e0 / e1).ln() / (h[0] / h[1]).ln()
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// `start:stop:count`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridRange {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "invalid range {start}:{stop}:{count}"
            )));
        }
        if count == 1 && start != stop {
            return Err(Error::InvalidArgument(format!(
                "a one-point range needs start = stop, got {start}:{stop}:1"
            )));
        }
        Ok(GridRange { start, stop, count })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + i as f64 * step
                }
            })
            .collect()
    }

    fn min(&self) -> f64 {
        self.start.min(self.stop)
    }
}

impl FromStr for GridRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidArgument(format!("expected start:stop:count, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        GridRange::new(start, stop, count)
    }
}

impl fmt::Display for GridRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

/// Why a grid cell has no numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellFlag {
    Ok,
    /// The metric is degenerate, so the curvature is undefined.
    DegenerateMetric,
    /// A difference stencil left the domain.
    OutOfDomain,
    /// The point is too close to a pole to resolve with finite differences.
    DegenerateStep,
}

impl CellFlag {
    pub fn token(self) -> &'static str {
        match self {
            CellFlag::Ok => "ok",
            CellFlag::DegenerateMetric => "degenerate_metric",
            CellFlag::OutOfDomain => "out_of_domain",
            CellFlag::DegenerateStep => "degenerate_step",
        }
    }

    fn from_error(e: &Error) -> Option<Self> {
        match e {
            Error::SingularConfiguration { .. } => Some(CellFlag::DegenerateMetric),
            Error::OutOfDomain { .. } => Some(CellFlag::OutOfDomain),
            Error::DegenerateStep { .. } => Some(CellFlag::DegenerateStep),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "P2")]
    pub p2: Option<f64>,
    pub det_g: Option<f64>,
    #[serde(rename = "R")]
    pub ricci: Option<f64>,
    pub surface_stable: bool,
    pub volume_stable: bool,
    pub globally_stable: bool,
    pub singular_flag: CellFlag,
}

fn grid_cell(model: &LcrModel, r: f64, l: f64, c: f64, omega: f64) -> Result<GridRow> {
    let state = LcrState::new(r, l, c, omega)?;
    let mut row = GridRow {
        l,
        c,
        p2: None,
        det_g: None,
        ricci: None,
        surface_stable: false,
        volume_stable: false,
        globally_stable: false,
        singular_flag: CellFlag::Ok,
    };
    match model.classify(&state) {
        Ok(v) => {
            row.p2 = Some(v.p2_surface);
            row.det_g = Some(v.det_g);
            row.ricci = v.ricci_scalar;
            row.surface_stable = v.surface_stable;
            row.volume_stable = v.volume_stable;
            row.globally_stable = v.globally_stable;
            if v.ricci_scalar.is_none() {
                row.singular_flag = CellFlag::DegenerateMetric;
            }
        }
        Err(e) => match CellFlag::from_error(&e) {
            Some(flag) => row.singular_flag = flag,
            None => return Err(e),
        },
    }
    Ok(row)
}

/// Classify every (L, C) cell at fixed `r`; rows are L-major.
pub fn sweep_grid(
    r: f64,
    l_range: &GridRange,
    c_range: &GridRange,
    omega: f64,
    model: &LcrModel,
) -> Result<Vec<GridRow>> {
    if !(r >= 0.0) || !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sweep needs r >= 0 and omega > 0, got r = {r}, omega = {omega}"
        )));
    }
    if !(l_range.min() >= 0.0) {
        return Err(Error::InvalidArgument("L range must be non-negative".into()));
    }
    if !(c_range.min() > 0.0) {
        return Err(Error::InvalidArgument(
            "C range must be strictly positive".into(),
        ));
    }
    let cells: Vec<(f64, f64)> = l_range
        .values()
        .into_iter()
        .flat_map(|l| c_range.values().into_iter().map(move |c| (l, c)))
        .collect();
    cells
        .par_iter()
        .map(|&(l, c)| grid_cell(model, r, l, c, omega))
        .collect()
}

pub const GRID_CSV_HEADER: &str =
    "L,C,P2,det_g,R,surface_stable,volume_stable,globally_stable,singular_flag";

/// Token written in place of a number that could not be computed.
pub const MISSING_TOKEN: &str = "NA";

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:e}"),
        _ => MISSING_TOKEN.to_string(),
    }
}

/// Write grid rows as CSV with full-precision scientific notation.
pub fn write_grid_csv<W: Write>(rows: &[GridRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{GRID_CSV_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{:e},{:e},{},{},{},{},{},{},{}",
            row.l,
            row.c,
            fmt_opt(row.p2),
            fmt_opt(row.det_g),
            fmt_opt(row.ricci),
            row.surface_stable,
            row.volume_stable,
            row.globally_stable,
            row.singular_flag.token()
        )?;
    }
    Ok(())
}

/// Capacitance scan used by [`recommend_capacitor_range`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitorScan {
    pub c_min: f64,
    pub c_max: f64,
    pub resolution: f64,
}

impl Default for CapacitorScan {
    fn default() -> Self {
        CapacitorScan {
            c_min: 1e-3,
            c_max: 1.0,
            resolution: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitorRange {
    /// Smallest and largest scanned C of the longest all-stable run.
    pub interval: Option<(f64, f64)>,
    pub resolution: f64,
    pub stable_cells: usize,
    pub scanned_cells: usize,
}

impl CapacitorRange {
    pub fn is_empty(&self) -> bool {
        self.interval.is_none()
    }
}

/// Longest run of C values, on a uniform scan, at which the line is
/// surface-, volume- and globally stable.
pub fn recommend_capacitor_range(
    r: f64,
    l: f64,
    omega: f64,
    scan: &CapacitorScan,
    model: &LcrModel,
) -> Result<CapacitorRange> {
    if !(scan.c_min > 0.0 && scan.c_max >= scan.c_min && scan.resolution > 0.0) {
        return Err(Error::InvalidArgument(format!("invalid capacitor scan {scan:?}")));
    }
    let count = ((scan.c_max - scan.c_min) / scan.resolution).round() as usize + 1;
    let range = GridRange::new(scan.c_min, scan.c_min + (count - 1) as f64 * scan.resolution, count)?;
    let rows = sweep_grid(r, &GridRange::new(l, l, 1)?, &range, omega, model)?;
    let stable: Vec<bool> = rows
        .iter()
        .map(|row| row.surface_stable && row.volume_stable && row.globally_stable)
        .collect();

    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, &s) in stable.iter().chain(std::iter::once(&false)).enumerate() {
        match (s, start) {
            (true, None) => start = Some(i),
            (false, Some(a)) => {
                if best.is_none_or(|(b0, b1)| i - 1 - a > b1 - b0) {
                    best = Some((a, i - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    Ok(CapacitorRange {
        interval: best.map(|(a, b)| (rows[a].c, rows[b].c)),
        resolution: scan.resolution,
        stable_cells: stable.iter().filter(|&&s| s).count(),
        scanned_cells: rows.len(),
    })
}

/// Published (line, r, L, C, P2, Det(g), R) rows of the LCR reference table.
pub const TABLE_2: [(u32, f64, f64, f64, f64, f64, f64); 7] = [
    (1, 0.02, 0.60, 0.30, -272.93, -11519.51, -4.92),
    (2, 0.08, 0.24, 0.025, -0.20e-2, 0.68, 36.89),
    (3, 0.06, 0.18, 0.020, -0.74e-3, 0.27, 46.58),
    (4, 0.06, 0.68, 0.020, -0.14e-2, 0.79, 41.45),
    (5, 0.04, 0.12, 0.015, -0.21e-3, 0.96e-1, 62.82),
    (6, 0.01, 0.03, 0.010, -0.38e-4, 0.24e-1, 95.40),
    (7, 0.08, 0.024, 0.025, -0.15e-2, 0.39, 39.90),
];

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn p() -> StepPolicy {
        StepPolicy::default()
    }

    #[test]
    fn power_examples() {
        let s = LcrState::new(0.0, 0.0, 0.2, 1.0).unwrap();
        assert!((lcr_effective_power(&s).unwrap() + 0.2).abs() < 1e-15);
        let s = LcrState::new(0.08, 0.24, 0.025, PI).unwrap();
        assert!((lcr_effective_power(&s).unwrap() - -0.0829222532821266).abs() < 1e-13);
        let x = [s.r, s.omega * s.l, 1.0 / (s.omega * s.c)];
        assert!(rel(LcrImpedancePower.value(&x), lcr_effective_power(&s).unwrap()) < 1e-14);
    }

    #[test]
    fn invalid_states() {
        assert!(matches!(LcrState::new(0.1, 0.1, 0.0, 1.0), Err(Error::SingularInput(_))));
        assert!(matches!(LcrState::new(0.0, 1.0, 1.0, 1.0), Err(Error::SingularInput(_))));
        assert!(LcrState::new(-0.1, 0.1, 0.1, 1.0).is_err());
    }

    #[test]
    fn oracle_matches_frozen_hessian() {
        let s = LcrState::new(0.05, 0.2, 0.1, 1.0).unwrap();
        let g = lcr_metric_oracle(&s, &p()).unwrap();
        let expect = [
            [-0.00209211092066681524, -0.209211092066681481, 0.00215715522371439945],
            [-0.209211092066681481, -0.310564422947636420, 0.215715522371439927],
            [0.00215715522371439945, 0.215715522371439927, 0.00209211092066681568],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!(rel(g.get(i, j), expect[i][j]) < 1e-7, "{i}{j}: {}", g.get(i, j));
            }
        }
        assert!(rel(g.principal_minors()[1], -0.043119545822914137) < 1e-7);
        assert!(rel(g.determinant(), -0.0001861183053286411) < 1e-6);
    }

    #[test]
    fn closed_form_differs_only_in_g_ll() {
        let s = LcrState::new(0.05, 0.2, 0.1, 1.0).unwrap();
        let closed = lcr_metric_closed(&s).unwrap();
        let oracle = lcr_metric_oracle(&s, &p()).unwrap();
        let d = reconcile(&closed, &oracle, RECONCILIATION_TOLERANCE);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].entry, "g_LL");
        assert!(rel(closed.get(0, 0), -0.209211092066681481) < 1e-12);
        assert!(rel(closed.determinant(), 0.0095863603880311184) < 1e-10);
    }

    #[test]
    fn resonance_is_regular() {
        let s = LcrState::new(0.1, 1.0, 1.0, 1.0).unwrap();
        let closed = lcr_metric_closed(&s).unwrap();
        assert!(closed.entries().iter().flatten().all(|v| v.is_finite()));
        let v = classify_lcr(&s).unwrap();
        assert!(rel(v.p2_surface, 400000.0) < 1e-6);
        assert!(rel(v.det_g, 1.6e9) < 1e-6);
        assert!(rel(v.ricci_scalar.unwrap(), -0.1) < 1e-5);
    }

    #[test]
    fn curvature_matches_frozen_value() {
        let s = LcrState::new(0.05, 0.2, 0.1, 1.0).unwrap();
        let rep = lcr_scalar_curvature(&s, &p()).unwrap();
        assert!(rel(rep.ricci_scalar, 19.854657870137807) < 1e-6, "{}", rep.ricci_scalar);
        let s = LcrState::new(0.2, 0.5, 0.3, 2.0).unwrap();
        let rep = lcr_scalar_curvature(&s, &p()).unwrap();
        assert!(rel(rep.ricci_scalar, 8.1135622615328145) < 1e-6);
        assert!(rel(rep.det_g, -6119.9164162319102) < 1e-6);
    }

    #[test]
    fn surface_minor_is_second_leading_minor() {
        let s = LcrState::new(0.03, 0.4, 0.2, 1.0).unwrap();
        let m = lcr_metric_oracle(&s, &p()).unwrap();
        assert_eq!(lc_surface_minor(&s, &p()).unwrap(), m.principal_minors()[1]);
    }

    #[test]
    fn small_r_surface_minor_tracks_exact_r0_form() {
        let s = LcrState::new(1e-6, 0.1, 0.1, 1.0).unwrap();
        let v = lc_surface_minor(&s, &p()).unwrap();
        assert!(rel(v, -0.0420614285125340) < 1e-4, "{v}");
        assert!(rel(exact::surface_minor_r0(0.1, 0.1, 1.0), -0.0420614285125340) < 1e-12);
        assert!(rel(reference::surface_minor_r0(0.1, 0.1, 1.0), -0.000429111543) < 1e-6);
    }

    #[test]
    fn limit_values_of_the_oracle() {
        for c in [0.1, 0.5, 1.0 / 3f64.sqrt()] {
            let s = LcrState::new(1e-6, 1e-6, c, 1.0).unwrap();
            let d = lcr_det(&s, &p()).unwrap();
            assert!(rel(d, exact::limit_det(c, 1.0)) < 1e-4, "C = {c}: {d}");
        }
        let s = LcrState::new(1e-5, 1e-5, 0.1, 1.0).unwrap();
        let r = lcr_scalar_curvature(&s, &p()).unwrap().ricci_scalar;
        assert!(rel(r, 20.0) < 1e-3, "{r}");
    }

    #[test]
    fn reference_limit_arithmetic() {
        assert!(rel(reference::limit_det(0.1, 1.0), 0.00776) < 1e-12);
        assert!(rel(reference::limit_det(0.5, 1.0), 0.25) < 1e-12);
        assert!(rel(reference::limit_ricci(0.1, 1.0), -30.5824) < 1e-4);
    }

    #[test]
    fn range_parsing() {
        let r: GridRange = "0.01:1:50".parse().unwrap();
        let v = r.values();
        assert_eq!(v.len(), 50);
        assert_eq!(v[0], 0.01);
        assert_eq!(v[49], 1.0);
        assert!("1:2".parse::<GridRange>().is_err());
        assert!("1:2:0".parse::<GridRange>().is_err());
        assert!("a:2:3".parse::<GridRange>().is_err());
    }

    #[test]
    fn sweep_is_l_major_and_writes_csv() {
        let lr: GridRange = "0.1:0.3:3".parse().unwrap();
        let cr: GridRange = "0.1:0.2:2".parse().unwrap();
        let rows = sweep_grid(1e-3, &lr, &cr, 1.0, &LcrModel::default()).unwrap();
        let cells: Vec<(f64, f64)> = rows.iter().map(|r| (r.l, r.c)).collect();
        assert_eq!(cells[0], (0.1, 0.1));
        assert_eq!(cells[1], (0.1, 0.2));
        assert_eq!(cells[2].0, 0.2);
        let mut buf = Vec::new();
        write_grid_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], GRID_CSV_HEADER);
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("1e-1,1e-1,"));
        assert_eq!(lines[1].split(',').count(), 9);
    }

    #[test]
    fn sweep_rejects_nonpositive_capacitance() {
        let lr: GridRange = "0.1:0.3:3".parse().unwrap();
        let cr: GridRange = "0:0.2:2".parse().unwrap();
        assert!(sweep_grid(1e-3, &lr, &cr, 1.0, &LcrModel::default()).is_err());
    }

    #[test]
    fn pole_cell_is_flagged() {
        // L = C = 1 at omega = 1 is resonance; r = 1e-6 leaves no room for
        // stencils.
        let lr: GridRange = "1:1:1".parse().unwrap();
        let rows = sweep_grid(1e-6, &lr, &lr, 1.0, &LcrModel::default()).unwrap();
        assert_eq!(rows[0].singular_flag, CellFlag::DegenerateStep);
        let mut buf = Vec::new();
        write_grid_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains(",NA,NA,NA,false,false,false,degenerate_step"));
    }

    #[test]
    fn empty_capacitor_range_is_explicit() {
        // det < 0 away from a thin band around resonance, which this scan
        // never reaches (resonance would need C = 100).
        let rec = recommend_capacitor_range(1e-6, 0.01, 1.0, &CapacitorScan::default(), &LcrModel::default())
            .unwrap();
        assert!(rec.is_empty());
        assert_eq!(rec.scanned_cells, 1000);
    }
}
