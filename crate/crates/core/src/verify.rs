//! Comparison of computed quantities against published reference values.
//!
//! Reports never fail on a mismatch; each check carries a status instead.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::StepPolicy;
use crate::lcr::{
    self, exact, lcr_metric_closed, limit_study, observed_order, reference, sweep_grid, GridRange,
    GridRow, LcrModel, LcrState, TABLE_2,
};
use crate::lr::{
    lr_curvature, reproduce_table_1, table_1_row_1_alternate, LrState, FLATNESS_TOLERANCE,
};

/// Relative tolerance for the LR determinant table.
pub const TABLE_1_TOLERANCE: f64 = 5e-3;

/// The three angular frequencies the tables are compared under.
pub const CANDIDATE_OMEGAS: [(&str, f64); 3] = [("1", 1.0), ("pi", PI), ("2pi50", 2.0 * PI * 50.0)];

/// Frequency at which the published tables are reproduced digit for digit.
#[allow(clippy::approx_constant)]
pub const TRUNCATED_PI: f64 = 3.14;

/// Offsets `L = r = h` of the limit sequences.
pub const LIMIT_OFFSETS: [f64; 5] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Table1,
    Table2,
    Limits,
    Flatness,
    Figures,
    All,
}

impl FromStr for Which {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(Which::Table1),
            "table2" => Ok(Which::Table2),
            "limits" => Ok(Which::Limits),
            "flatness" => Ok(Which::Flatness),
            "figures" => Ok(Which::Figures),
            "all" => Ok(Which::All),
            _ => Err(Error::InvalidArgument(format!(
                "unknown check set {s:?} (expected table1, table2, limits, flatness, figures or all)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// Computed value disagrees with the reference.
    Flag,
    /// Recorded for comparison only.
    Info,
}

impl Status {
    fn word(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Flag => "FLAG",
            Status::Info => "info",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub computed: Option<f64>,
    pub reference: Option<f64>,
    pub relative_error: Option<f64>,
    pub status: Status,
    pub note: String,
}

impl Check {
    fn compare(name: impl Into<String>, computed: f64, reference: f64, tolerance: f64) -> Self {
        let rel = rel_err(computed, reference);
        Check {
            name: name.into(),
            computed: Some(computed),
            reference: Some(reference),
            relative_error: Some(rel),
            status: if rel.abs() <= tolerance { Status::Pass } else { Status::Flag },
            note: String::new(),
        }
    }

    fn info(name: impl Into<String>, computed: Option<f64>, reference: Option<f64>) -> Self {
        Check {
            name: name.into(),
            computed,
            reference,
            relative_error: match (computed, reference) {
                (Some(c), Some(r)) => Some(rel_err(c, r)),
                _ => None,
            },
            status: Status::Info,
            note: String::new(),
        }
    }

    fn failed(name: impl Into<String>, err: &Error) -> Self {
        Check {
            name: name.into(),
            computed: None,
            reference: None,
            relative_error: None,
            status: Status::Flag,
            note: err.to_string(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

fn rel_err(computed: f64, reference: f64) -> f64 {
    (computed - reference) / reference.abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub assumptions: Vec<String>,
    pub checks: Vec<Check>,
}

impl Section {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Pass).count()
    }

    pub fn flagged(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Flag).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub sections: Vec<Section>,
}

/// Run the requested comparisons. `omega` is used by the LR table and the
/// flatness scan; the other sections fix their own frequencies.
pub fn verify_reference(which: Which, omega: f64, policy: &StepPolicy) -> VerificationReport {
    let model = LcrModel {
        policy: *policy,
        ..LcrModel::default()
    };
    let mut sections = Vec::new();
    let all = which == Which::All;
    if all || which == Which::Table1 {
        sections.push(table1_section(omega));
    }
    if all || which == Which::Table2 {
        sections.push(table2_section(&model));
    }
    if all || which == Which::Limits {
        sections.push(limits_section(policy));
    }
    if all || which == Which::Flatness {
        sections.push(flatness_section(omega, policy));
    }
    if all || which == Which::Figures {
        sections.push(figures_section(&model));
    }
    VerificationReport { sections }
}

fn table1_section(omega: f64) -> Section {
    let mut s = Section {
        name: "table1".into(),
        assumptions: vec![
            format!("omega = {omega}"),
            format!(
                "relative tolerance {TABLE_1_TOLERANCE}; omega = {TRUNCATED_PI} reproduces every published digit under truncation"
            ),
        ],
        checks: Vec::new(),
    };
    let rows = match reproduce_table_1(omega) {
        Ok(rows) => rows,
        Err(e) => {
            s.checks.push(Check::failed("table1", &e));
            return s;
        }
    };
    for row in rows {
        let mut c = Check::compare(
            format!("{} det_g (r={}, L={})", row.line, row.r, row.l),
            row.det_g,
            row.published,
            TABLE_1_TOLERANCE,
        );
        if row.line == "T1" {
            c.status = Status::Flag;
            c.note = "erratum: published value corresponds to L = 0.06".into();
        } else if c.status == Status::Flag && (row.det_g - row.published).abs() < 0.005 {
            c.note = "within half a unit of the last published digit".into();
        }
        s.checks.push(c);
    }
    match table_1_row_1_alternate(omega) {
        Ok(row) => s.checks.push(Check::compare(
            format!("{} det_g", row.line),
            row.det_g,
            row.published,
            TABLE_1_TOLERANCE,
        )),
        Err(e) => s.checks.push(Check::failed("T1 (L=0.06)", &e)),
    }
    s
}

/// Mean |ln(computed/published)| over cells whose signs agree, plus the
/// number of sign disagreements; lower is better.
fn table2_score(cells: &[(f64, f64)]) -> (usize, f64) {
    let mut mismatches = 0;
    let mut sum = 0.0;
    let mut n = 0;
    for &(c, p) in cells {
        if c.is_finite() && c.signum() == p.signum() {
            sum += (c / p).ln().abs();
            n += 1;
        } else {
            mismatches += 1;
        }
    }
    (mismatches, if n > 0 { sum / n as f64 } else { f64::INFINITY })
}

fn table2_section(model: &LcrModel) -> Section {
    let mut s = Section {
        name: "table2".into(),
        assumptions: vec![
            "comparison only, not a gate".into(),
            "oracle = finite-difference Hessian over (L, C, r); P2 = leading (L, C) minor; R in the sphere-positive convention".into(),
            format!("closed-form rows use the published metric formulas at omega = {TRUNCATED_PI}; their P2 is the (L, r) minor"),
        ],
        checks: Vec::new(),
    };
    let mut best: Option<(String, (usize, f64))> = None;
    for (label, omega) in CANDIDATE_OMEGAS {
        let mut cells = Vec::new();
        for &(t, r, l, c, p2, det, ricci) in &TABLE_2 {
            let state = match LcrState::new(r, l, c, omega) {
                Ok(st) => st,
                Err(e) => {
                    s.checks.push(Check::failed(format!("T{t} omega={label}"), &e));
                    continue;
                }
            };
            match model.classify(&state) {
                Ok(v) => {
                    let triples = [
                        ("P2", Some(v.p2_surface), p2),
                        ("det_g", Some(v.det_g), det),
                        ("R", v.ricci_scalar, ricci),
                    ];
                    for (q, computed, published) in triples {
                        if let Some(x) = computed {
                            cells.push((x, published));
                        }
                        let ratio = computed.map(|x| x / published);
                        s.checks.push(
                            Check::info(format!("T{t} {q} omega={label}"), computed, Some(published))
                                .with_note(match ratio {
                                    Some(x) => format!("ratio {x:.6e}"),
                                    None => "degenerate metric".into(),
                                }),
                        );
                    }
                }
                Err(e) => s.checks.push(Check::failed(format!("T{t} omega={label}"), &e)),
            }
        }
        let score = table2_score(&cells);
        if best.as_ref().is_none_or(|(_, b)| score < *b) {
            best = Some((label.to_string(), score));
        }
        s.checks.push(
            Check::info(format!("score omega={label}"), Some(score.1), None).with_note(format!(
                "{} sign mismatches; mean |ln ratio| over sign-matching cells",
                score.0
            )),
        );
    }
    if let Some((label, (mism, score))) = best {
        s.assumptions.push(format!(
            "best-matching omega among candidates: {label} ({mism} sign mismatches, mean |ln ratio| {score:.3})"
        ));
    }
    for &(t, r, l, c, p2, det, ricci) in &TABLE_2 {
        let Ok(state) = LcrState::new(r, l, c, TRUNCATED_PI) else {
            continue;
        };
        let Ok(g) = lcr_metric_closed(&state) else {
            continue;
        };
        let lr_minor = g.get(0, 0) * g.get(2, 2) - g.get(0, 2) * g.get(0, 2);
        s.checks
            .push(Check::info(format!("T{t} P2(L,r) closed form"), Some(lr_minor), Some(p2)));
        s.checks.push(Check::info(format!("T{t} det_g closed form"), Some(g.determinant()), Some(det)));
        let rep = crate::curvature::ricci_scalar_nd(&ClosedFormField { omega: TRUNCATED_PI }, &state.coords(), &model.policy);
        s.checks.push(match rep {
            Ok(rep) => Check::info(format!("T{t} R closed form"), Some(rep.ricci_scalar), Some(ricci)),
            Err(e) => Check::failed(format!("T{t} R closed form"), &e),
        });
    }
    s
}

/// The published closed-form metric as a metric field over (L, C, r).
pub struct ClosedFormField {
    pub omega: f64,
}

impl crate::curvature::MetricField for ClosedFormField {
    fn dim(&self) -> usize {
        3
    }

    fn metric_entries(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let state = LcrState {
            l: x[0],
            c: x[1],
            r: x[2],
            omega: self.omega,
        };
        if !(state.c > 0.0) {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
        Ok(lcr_metric_closed(&state)?.entries().to_vec())
    }

    fn scales(&self, x: &[f64]) -> Vec<f64> {
        use crate::field::ScalarField;
        lcr::LcrPower { omega: self.omega }.scales(x)
    }
}

/// Capacitances approaching the pole `C = 1/(√3 ω)` of the published limit.
pub fn pole_approach(omega: f64) -> Vec<f64> {
    let pole = 1.0 / (3f64.sqrt() * omega);
    (1..=5).map(|k| pole * (1.0 - 10f64.powi(-k))).collect()
}

fn limits_section(policy: &StepPolicy) -> Section {
    let omega = 1.0;
    let mut s = Section {
        name: "limits".into(),
        assumptions: vec![
            format!("omega = {omega}; L = r = h for h in {LIMIT_OFFSETS:?}"),
            "reference limits: det 8(1 - 3w^2C^2) w^7 C^3, R (1/2)(-6 + 25w^2C^2 - 51w^4C^4)/((1 - 3w^2C^2)^2 wC)".into(),
            "exact limits of the Hessian metric: det -16 w^9 C^5, R 2/(wC)".into(),
        ],
        checks: Vec::new(),
    };
    for (c, det_tol, r_tol) in [(0.5, 1e-3, 5e-2), (0.1, 1e-3, 5e-2)] {
        let study = match limit_study(c, omega, &LIMIT_OFFSETS, policy) {
            Ok(st) => st,
            Err(e) => {
                s.checks.push(Check::failed(format!("C={c}"), &e));
                continue;
            }
        };
        let dets = study.dets();
        let h = study.offsets();
        let last = *dets.last().expect("non-empty");
        let target = reference::limit_det(c, omega);
        s.checks.push(Check::compare(format!("det limit C={c}"), last, target, det_tol));
        let order = observed_order(&h, &dets, target);
        s.checks.push(
            Check {
                status: if order >= 1.0 { Status::Pass } else { Status::Flag },
                ..Check::info(format!("det convergence order C={c}"), Some(order), Some(1.0))
            }
            .with_note("minimum over consecutive offsets; needs >= 1"),
        );
        s.checks.push(Check::info(
            format!("det exact limit C={c}"),
            Some(study.extrapolated_det),
            Some(exact::limit_det(c, omega)),
        ));
        match study.riccis() {
            Some(rs) => {
                let target = reference::limit_ricci(c, omega);
                let last = *rs.last().expect("non-empty");
                s.checks.push(Check::compare(format!("R limit C={c}"), last, target, r_tol));
                let order = observed_order(&h, &rs, target);
                s.checks.push(
                    Check {
                        status: if order >= 1.0 { Status::Pass } else { Status::Flag },
                        ..Check::info(format!("R convergence order C={c}"), Some(order), Some(1.0))
                    }
                    .with_note("minimum over consecutive offsets; needs >= 1"),
                );
                s.checks.push(Check::info(
                    format!("R exact limit C={c}"),
                    study.extrapolated_ricci,
                    Some(exact::limit_ricci(c, omega)),
                ));
            }
            None => s.checks.push(Check::failed(
                format!("R limit C={c}"),
                &Error::InvalidArgument("curvature undefined along the sequence".into()),
            )),
        }
    }

    let h = LIMIT_OFFSETS[4];
    let mut dets = Vec::new();
    let mut rs = Vec::new();
    for c in pole_approach(omega) {
        let Ok(state) = LcrState::new(h, h, c, omega) else { continue };
        let m = crate::lcr::lcr_metric_oracle(&state, policy);
        if let Ok(m) = m {
            dets.push((m.determinant(), m.degeneracy_epsilon()));
        }
        rs.push(lcr::lcr_scalar_curvature(&state, policy).map(|r| r.ricci_scalar.abs()).ok());
    }
    let degenerate = dets.last().is_some_and(|&(d, eps)| d.abs() <= eps);
    let det_shrinks = dets.windows(2).all(|w| w[1].0.abs() < w[0].0.abs());
    s.checks.push(
        Check {
            status: if degenerate && det_shrinks { Status::Pass } else { Status::Flag },
            ..Check::info("det degenerates at C = 1/(sqrt3 w)", dets.last().map(|d| d.0), Some(0.0))
        }
        .with_note(format!(
            "|det| along the approach: {:?}",
            dets.iter().map(|d| d.0.abs()).collect::<Vec<_>>()
        )),
    );
    let grows = rs.iter().all(Option::is_some)
        && rs.windows(2).all(|w| w[1].unwrap_or(0.0) > w[0].unwrap_or(f64::INFINITY));
    s.checks.push(
        Check {
            status: if grows { Status::Pass } else { Status::Flag },
            ..Check::info("|R| grows towards C = 1/(sqrt3 w)", rs.last().copied().flatten(), None)
        }
        .with_note(format!("|R| along the approach: {rs:?}")),
    );
    s
}

/// Deterministic 10×10 log-spaced (r, L) grid over `[1e-3, 1]²`.
pub fn flatness_points() -> Vec<(f64, f64)> {
    let axis: Vec<f64> = (0..10).map(|i| 10f64.powf(-3.0 + 3.0 * i as f64 / 9.0)).collect();
    axis.iter()
        .flat_map(|&r| axis.iter().map(move |&l| (r, l)))
        .collect()
}

fn flatness_section(omega: f64, policy: &StepPolicy) -> Section {
    let mut s = Section {
        name: "flatness".into(),
        assumptions: vec![
            format!("omega = {omega}; 100 log-spaced points r, L in [1e-3, 1]"),
            "scaled |R| = |R| / (sum of absolute values of the terms of R)".into(),
        ],
        checks: Vec::new(),
    };
    let mut worst: Option<(f64, f64, f64)> = None;
    let mut failures = 0;
    for (r, l) in flatness_points() {
        let rep = LrState::new(r, l, omega).and_then(|st| lr_curvature(&st, policy));
        match rep {
            Ok(rep) => {
                let v = rep.scaled_ricci().abs();
                if worst.is_none_or(|w| v > w.2) {
                    worst = Some((r, l, v));
                }
            }
            Err(_) => failures += 1,
        }
    }
    let (r, l, v) = worst.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    s.checks.push(
        Check {
            status: if failures == 0 && v < FLATNESS_TOLERANCE { Status::Pass } else { Status::Flag },
            ..Check::info("max scaled |R| over LR scan", Some(v), Some(FLATNESS_TOLERANCE))
        }
        .with_note(format!("worst at r = {r}, L = {l}; {failures} points failed")),
    );
    s
}

/// Sign changes of `det_g` along a grid row (cells without a value skipped).
pub fn det_sign_changes(row: &[GridRow]) -> usize {
    let signs: Vec<bool> = row.iter().filter_map(|c| c.det_g).map(|d| d > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Properties of the 50×50 grid at `r = 1e-6`, `ω = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSummary {
    /// (L, det sign changes along C) for the rows with L ≤ 0.1.
    pub sign_changes: Vec<(f64, usize)>,
    /// (L, C at maximal |R|) for the same rows.
    pub ricci_argmax: Vec<(f64, f64)>,
    pub pole: f64,
    pub c_spacing: f64,
}

impl FigureSummary {
    pub fn one_sign_change_per_row(&self) -> bool {
        !self.sign_changes.is_empty() && self.sign_changes.iter().all(|&(_, n)| n == 1)
    }

    pub fn maxima_on_pole(&self) -> bool {
        !self.ricci_argmax.is_empty()
            && self
                .ricci_argmax
                .iter()
                .all(|&(_, c)| (c - self.pole).abs() <= self.c_spacing)
    }
}

pub fn figure_summary(model: &LcrModel) -> Result<FigureSummary> {
    let omega = 1.0;
    let lr: GridRange = "0.01:1:50".parse()?;
    let cr: GridRange = "0.01:1:50".parse()?;
    let rows = sweep_grid(1e-6, &lr, &cr, omega, model)?;
    let mut sign_changes = Vec::new();
    let mut ricci_argmax = Vec::new();
    for chunk in rows.chunks(cr.count) {
        let l = chunk[0].l;
        if l > 0.1 {
            continue;
        }
        sign_changes.push((l, det_sign_changes(chunk)));
        if let Some(c) = chunk
            .iter()
            .filter_map(|cell| cell.ricci.map(|r| (cell.c, r.abs())))
            .max_by(|a, b| a.1.total_cmp(&b.1))
        {
            ricci_argmax.push((l, c.0));
        }
    }
    Ok(FigureSummary {
        sign_changes,
        ricci_argmax,
        pole: 1.0 / (3f64.sqrt() * omega),
        c_spacing: (cr.stop - cr.start) / (cr.count - 1) as f64,
    })
}

fn figures_section(model: &LcrModel) -> Section {
    let mut s = Section {
        name: "figures".into(),
        assumptions: vec!["grid r = 1e-6, omega = 1, L and C in 0.01:1:50; rows with L <= 0.1".into()],
        checks: Vec::new(),
    };
    match figure_summary(model) {
        Ok(f) => {
            s.checks.push(
                Check {
                    status: if f.one_sign_change_per_row() { Status::Pass } else { Status::Flag },
                    ..Check::info("one det sign change per small-L row", None, Some(1.0))
                }
                .with_note(format!("(L, changes): {:?}", f.sign_changes)),
            );
            s.checks.push(
                Check {
                    status: if f.maxima_on_pole() { Status::Pass } else { Status::Flag },
                    ..Check::info("|R| maxima on C = 1/(sqrt3 w)", None, Some(f.pole))
                }
                .with_note(format!("(L, C at max |R|): {:?}", f.ricci_argmax)),
            );
        }
        Err(e) => s.checks.push(Check::failed("figure grid", &e)),
    }
    s
}

fn fmt_num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.6e}"),
        Some(x) => format!("{x}"),
        None => "NA".to_string(),
    }
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            let _ = writeln!(out, "== {} ({} pass, {} flagged)", s.name, s.passed(), s.flagged());
            for a in &s.assumptions {
                let _ = writeln!(out, "   {a}");
            }
            let rows: Vec<[String; 6]> = s
                .checks
                .iter()
                .map(|c| {
                    [
                        c.status.word().to_string(),
                        c.name.clone(),
                        fmt_num(c.computed),
                        fmt_num(c.reference),
                        c.relative_error.map_or("NA".into(), |e| format!("{e:+.3e}")),
                        c.note.clone(),
                    ]
                })
                .collect();
            let header = ["status", "check", "computed", "reference", "rel_err", "note"];
            let mut w = header.map(str::len);
            for r in &rows {
                for (wi, cell) in w.iter_mut().zip(r) {
                    *wi = (*wi).max(cell.len());
                }
            }
            let mut line = |cells: &[String]| {
                let text = cells
                    .iter()
                    .zip(&w)
                    .map(|(c, wi)| format!("{c:<wi$}"))
                    .collect::<Vec<_>>()
                    .join("  ");
                let _ = writeln!(out, "{}", text.trim_end());
            };
            line(&header.map(String::from));
            for r in &rows {
                line(r);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn which_parses() {
        assert_eq!("table1".parse::<Which>().unwrap(), Which::Table1);
        assert!("tableX".parse::<Which>().is_err());
    }

    #[test]
    fn table1_report() {
        let rep = verify_reference(Which::Table1, PI, &StepPolicy::default());
        let s = &rep.sections[0];
        assert_eq!(s.checks.len(), 8);
        assert_eq!(s.checks[0].status, Status::Flag);
        assert_eq!(s.checks[7].status, Status::Pass);
        let text = rep.to_text();
        assert!(text.contains("T2 det_g"));
    }

    #[test]
    fn table1_at_truncated_pi_matches_truncated_digits() {
        let rep = verify_reference(Which::Table1, TRUNCATED_PI, &StepPolicy::default());
        let s = &rep.sections[0];
        for (i, c) in s.checks.iter().enumerate().skip(1) {
            if i == 3 {
                // -0.4152 printed as -0.41
                assert_eq!((c.computed.unwrap() * 100.0).trunc() / 100.0, -0.41);
            } else {
                assert_eq!(c.status, Status::Pass, "{}", c.name);
            }
        }
    }

    #[test]
    fn flatness_passes() {
        let rep = verify_reference(Which::Flatness, PI, &StepPolicy::default());
        assert_eq!(rep.sections[0].checks[0].status, Status::Pass);
    }

    #[test]
    fn closed_form_field_reproduces_published_row_2() {
        let st = LcrState::new(0.08, 0.24, 0.025, TRUNCATED_PI).unwrap();
        let rep = crate::curvature::ricci_scalar_nd(
            &ClosedFormField { omega: TRUNCATED_PI },
            &st.coords(),
            &StepPolicy::default(),
        )
        .unwrap();
        assert!((rep.ricci_scalar - 36.8901631685).abs() < 1e-4, "{}", rep.ricci_scalar);
        assert!((rep.det_g - 0.684011618817).abs() < 1e-9);
    }

    #[test]
    fn sign_change_counting() {
        let cell = |d: Option<f64>| GridRow {
            l: 0.0,
            c: 0.0,
            p2: None,
            det_g: d,
            ricci: None,
            surface_stable: false,
            volume_stable: false,
            globally_stable: false,
            singular_flag: lcr::CellFlag::Ok,
        };
        let row = vec![cell(Some(1.0)), cell(None), cell(Some(-1.0)), cell(Some(2.0))];
        assert_eq!(det_sign_changes(&row), 2);
    }
}
