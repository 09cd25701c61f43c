//! Case files, bus power injections, the impedance-basis Jacobian and
//! block-diagonal bus metrics.
//!
//! A case file is TOML:
//!
//! ```toml
//! omega = 3.141592653589793   # optional, defaults to pi
//!
//! [[buses]]
//! id = "1"
//! v = 1.0                     # optional, defaults to 1
//! delta = 0.0                 # optional, defaults to 0
//!
//! [[lines]]
//! id = "T1"
//! from = "1"
//! to = "2"
//! r = 0.02
//! l = 0.6
//! c = 0.3                     # optional; absent means an LR line
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::StepPolicy;
use crate::lcr::{lcr_metric_oracle, LcrModel, LcrState, LcrVerdict};
use crate::lr::{classify_lr_with, lr_metric_oracle, lr_reliability_boundary, LrState, LrVerdict};
use crate::metric::MetricTensor;

pub const DEFAULT_OMEGA: f64 = std::f64::consts::PI;

/// Five-bus sample with the LR reference-table lines T1..T7.
pub const SAMPLE_LR: &str = include_str!("../data/ieee5_lr.toml");

/// The same network with the LCR reference-table capacitances attached.
pub const SAMPLE_LCR: &str = include_str!("../data/ieee5_lcr.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    pub v: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "C")]
    pub c: Option<f64>,
}

impl LineSpec {
    /// Net reactance `ωL − 1/(ωC)` (just `ωL` without a capacitor).
    pub fn reactance(&self, omega: f64) -> f64 {
        omega * self.l - self.c.map_or(0.0, |c| 1.0 / (omega * c))
    }

    pub fn lr_state(&self, omega: f64) -> Result<LrState> {
        LrState::new(self.r, self.l, omega)
    }

    pub fn lcr_state(&self, omega: f64) -> Result<Option<LcrState>> {
        self.c.map(|c| LcrState::new(self.r, self.l, c, omega)).transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub omega: f64,
    pub buses: Vec<Bus>,
    pub lines: Vec<LineSpec>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawId {
    Text(String),
    Int(i64),
}

impl From<RawId> for String {
    fn from(id: RawId) -> String {
        match id {
            RawId::Text(s) => s,
            RawId::Int(i) => i.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCase {
    omega: Option<f64>,
    #[serde(default)]
    buses: Vec<RawBus>,
    #[serde(default)]
    lines: Vec<RawLine>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBus {
    id: RawId,
    v: Option<f64>,
    delta: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLine {
    id: RawId,
    from: RawId,
    to: RawId,
    r: f64,
    l: f64,
    c: Option<f64>,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

fn invariant(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Invariant {
        path: path.into(),
        message: message.into(),
    }
}

/// Parse and validate a case file.
///
/// ```
/// use powergeom::network::load_network;
///
/// let spec = load_network("[[buses]]\nid = 1\n[[buses]]\nid = 2\n\n[[lines]]\nid = \"a\"\nfrom = 1\nto = 2\nr = 0.1\nl = 0.2\n").unwrap();
/// assert_eq!(spec.lines.len(), 1);
/// assert_eq!(spec.buses[0].v, 1.0);
/// assert_eq!(spec.omega, std::f64::consts::PI);
/// ```
pub fn load_network(source: &str) -> Result<NetworkSpec> {
    let raw: RawCase = toml::from_str(source).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(source, s.start));
        Error::Parse {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;
    let spec = NetworkSpec {
        omega: raw.omega.unwrap_or(DEFAULT_OMEGA),
        buses: raw
            .buses
            .into_iter()
            .map(|b| Bus {
                id: b.id.into(),
                v: b.v.unwrap_or(1.0),
                delta: b.delta.unwrap_or(0.0),
            })
            .collect(),
        lines: raw
            .lines
            .into_iter()
            .map(|l| LineSpec {
                id: l.id.into(),
                from: l.from.into(),
                to: l.to.into(),
                r: l.r,
                l: l.l,
                c: l.c,
            })
            .collect(),
    };
    validate(&spec)?;
    Ok(spec)
}

/// Check every invariant of a network, naming the offending field.
pub fn validate(spec: &NetworkSpec) -> Result<()> {
    if !(spec.omega > 0.0 && spec.omega.is_finite()) {
        return Err(invariant("omega", "must be positive and finite"));
    }
    let mut ids = BTreeSet::new();
    for (i, b) in spec.buses.iter().enumerate() {
        if !ids.insert(b.id.as_str()) {
            return Err(invariant(format!("buses[{i}].id"), format!("duplicate bus id `{}`", b.id)));
        }
        if !(b.v > 0.0 && b.v.is_finite()) {
            return Err(invariant(format!("buses[{i}].v"), "voltage magnitude must be positive"));
        }
        if !b.delta.is_finite() {
            return Err(invariant(format!("buses[{i}].delta"), "phase must be finite"));
        }
    }
    let mut line_ids = BTreeSet::new();
    for (i, l) in spec.lines.iter().enumerate() {
        let at = |field: &str| format!("lines[{i}].{field}");
        if !line_ids.insert(l.id.as_str()) {
            return Err(invariant(at("id"), format!("duplicate line id `{}`", l.id)));
        }
        for (field, bus) in [("from", &l.from), ("to", &l.to)] {
            if !ids.contains(bus.as_str()) {
                return Err(invariant(at(field), format!("unknown bus `{bus}`")));
            }
        }
        if l.from == l.to {
            return Err(invariant(at("to"), "line must join two different buses"));
        }
        if !(l.r >= 0.0 && l.r.is_finite()) {
            return Err(invariant(at("r"), "must be finite and non-negative"));
        }
        if !(l.l >= 0.0 && l.l.is_finite()) {
            return Err(invariant(at("l"), "must be finite and non-negative"));
        }
        if l.r == 0.0 && l.l == 0.0 {
            return Err(invariant(at("r"), "r and l cannot both be zero"));
        }
        if let Some(c) = l.c {
            if !(c > 0.0 && c.is_finite()) {
                return Err(invariant(
                    at("c"),
                    "must be positive: the reactance 1/(omega C) and the impedance-basis transform are singular at C = 0",
                ));
            }
            if l.r == 0.0 && l.reactance(spec.omega) == 0.0 {
                return Err(invariant(at("r"), "r = 0 at resonance is a pole of the effective power"));
            }
        }
    }
    Ok(())
}

fn toml_str(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

/// Serialize a network in the canonical case-file layout.
///
/// Loading the output gives back an equal network, and serializing that
/// again gives the same bytes.
pub fn to_case_file(spec: &NetworkSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "omega = {:?}", spec.omega);
    for b in &spec.buses {
        let _ = write!(
            out,
            "\n[[buses]]\nid = {}\nv = {:?}\ndelta = {:?}\n",
            toml_str(&b.id),
            b.v,
            b.delta
        );
    }
    for l in &spec.lines {
        let _ = write!(
            out,
            "\n[[lines]]\nid = {}\nfrom = {}\nto = {}\nr = {:?}\nl = {:?}\n",
            toml_str(&l.id),
            toml_str(&l.from),
            toml_str(&l.to),
            l.r,
            l.l
        );
        if let Some(c) = l.c {
            let _ = writeln!(out, "c = {c:?}");
        }
    }
    out
}

impl NetworkSpec {
    pub fn bus(&self, id: &str) -> Result<&Bus> {
        self.buses
            .iter()
            .find(|b| b.id == id)
            .ok_or_else(|| Error::UnknownBus(id.to_string()))
    }

    /// Lines touching `bus`, in file order.
    pub fn incident_lines<'a>(&'a self, bus: &'a str) -> impl Iterator<Item = &'a LineSpec> + 'a {
        self.lines.iter().filter(move |l| l.from == bus || l.to == bus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusPower {
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
}

/// Real and reactive injection at `bus` from the stored voltages:
/// `P_i = Σ |V_i||V_j||Y_ij| cos(θ_ij + δ_j − δ_i)` and likewise `Q_i` with
/// `sin`, where `tan θ_ij = X_ij / r_ij` and `|Y_ij| = 1/√(r² + X²)`.
///
/// ```
/// use powergeom::network::{bus_power, load_network};
///
/// let spec = load_network("[[buses]]\nid = 1\n[[buses]]\nid = 2\n\n[[lines]]\nid = \"a\"\nfrom = 1\nto = 2\nr = 0.5\nl = 0.0\n").unwrap();
/// let s = bus_power(&spec, "1").unwrap();
/// assert_eq!((s.p, s.q), (2.0, 0.0));
/// ```
pub fn bus_power(spec: &NetworkSpec, bus: &str) -> Result<BusPower> {
    let here = spec.bus(bus)?;
    let mut p = 0.0;
    let mut q = 0.0;
    for line in spec.incident_lines(bus) {
        let other = spec.bus(if line.from == bus { &line.to } else { &line.from })?;
        let x = line.reactance(spec.omega);
        let y = 1.0 / line.r.hypot(x);
        let theta = x.atan2(line.r);
        let a = theta + other.delta - here.delta;
        let mag = here.v * other.v * y;
        p += mag * a.cos();
        q += mag * a.sin();
    }
    Ok(BusPower { p, q })
}

/// Jacobian of `(r, L, C) ↦ (r, ωL, 1/(ωC))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jacobian {
    pub matrix: Vec<Vec<f64>>,
    pub det: f64,
}

/// `diag(1, ω, −1/(ωC²))`, with determinant `−1/C²`.
pub fn impedance_basis_jacobian(c: f64, omega: f64) -> Result<Jacobian> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    if c == 0.0 {
        return Err(Error::SingularTransform("C = 0 has no impedance-basis image".into()));
    }
    if !c.is_finite() {
        return Err(Error::InvalidArgument(format!("C must be finite, got {c}")));
    }
    let d = -1.0 / (omega * c * c);
    Ok(Jacobian {
        matrix: vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, omega, 0.0],
            vec![0.0, 0.0, d],
        ],
        det: -1.0 / (c * c),
    })
}

/// `diag(1, ω)` for `(r, L) ↦ (r, ωL)`; determinant `ω`.
pub fn lr_impedance_jacobian(omega: f64) -> Result<Jacobian> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    Ok(Jacobian {
        matrix: vec![vec![1.0, 0.0], vec![0.0, omega]],
        det: omega,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusBlockMetric {
    pub bus: String,
    pub line_ids: Vec<String>,
    pub blocks: Vec<MetricTensor>,
    pub assembled: MetricTensor,
    pub minors: Vec<f64>,
    /// All leading minors positive.
    pub stable: bool,
}

/// Oracle metric of one line at equilibrium: (r, L) for LR lines,
/// (L, C, r) for lines with a capacitor.
pub fn line_metric(line: &LineSpec, omega: f64, policy: &StepPolicy) -> Result<MetricTensor> {
    match line.lcr_state(omega)? {
        Some(s) => lcr_metric_oracle(&s, policy),
        None => lr_metric_oracle(&line.lr_state(omega)?, policy),
    }
}

/// Block-diagonal metric of a bus from its incident lines.
pub fn bus_block_metric(spec: &NetworkSpec, bus: &str, policy: &StepPolicy) -> Result<BusBlockMetric> {
    spec.bus(bus)?;
    let lines: Vec<&LineSpec> = spec.incident_lines(bus).collect();
    if lines.is_empty() {
        return Err(Error::IsolatedBus(bus.to_string()));
    }
    let mut blocks = Vec::with_capacity(lines.len());
    for l in &lines {
        blocks.push((l.id.clone(), line_metric(l, spec.omega, policy)?));
    }
    let assembled = MetricTensor::block_diagonal(&blocks)?;
    let minors = assembled.principal_minors();
    Ok(BusBlockMetric {
        bus: bus.to_string(),
        line_ids: blocks.iter().map(|(id, _)| id.clone()).collect(),
        stable: minors.iter().all(|&m| m > 0.0),
        blocks: blocks.into_iter().map(|(_, m)| m).collect(),
        assembled,
        minors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LineVerdict {
    Lr(LrVerdict),
    Lcr(LcrVerdict),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub id: String,
    pub from: String,
    pub to: String,
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub verdict: Option<LineVerdict>,
    /// Inductance at which `g_rr` changes sign; listed for LR lines that are
    /// not resistive-reliable.
    pub boundary_l: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusRecord {
    pub id: String,
    pub lines: Vec<String>,
    pub minors: Vec<f64>,
    pub det_g: Option<f64>,
    pub stable: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkReport {
    pub omega: f64,
    pub lines: Vec<LineRecord>,
    pub buses: Vec<BusRecord>,
}

fn line_record(line: &LineSpec, omega: f64, model: &LcrModel) -> LineRecord {
    let mut rec = LineRecord {
        id: line.id.clone(),
        from: line.from.clone(),
        to: line.to.clone(),
        r: line.r,
        l: line.l,
        c: line.c,
        verdict: None,
        boundary_l: None,
        error: None,
    };
    let verdict = match line.c {
        Some(_) => line
            .lcr_state(omega)
            .and_then(|s| model.classify(&s.expect("capacitor present")))
            .map(LineVerdict::Lcr),
        None => line
            .lr_state(omega)
            .and_then(|s| classify_lr_with(&s, &model.policy))
            .map(LineVerdict::Lr),
    };
    match verdict {
        Ok(v) => {
            if let LineVerdict::Lr(lr) = &v {
                if !lr.resistive_reliable && line.r > 0.0 {
                    rec.boundary_l = lr_reliability_boundary(line.r, omega).ok();
                }
            }
            rec.verdict = Some(v);
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Verdicts for every line and bus of a network.
pub fn analyze_network(spec: &NetworkSpec, model: &LcrModel) -> NetworkReport {
    let lines = spec
        .lines
        .iter()
        .map(|l| line_record(l, spec.omega, model))
        .collect();
    let buses = spec
        .buses
        .iter()
        .map(|b| match bus_block_metric(spec, &b.id, &model.policy) {
            Ok(m) => BusRecord {
                id: b.id.clone(),
                lines: m.line_ids,
                det_g: m.minors.last().copied(),
                minors: m.minors,
                stable: m.stable,
                error: None,
            },
            Err(e) => BusRecord {
                id: b.id.clone(),
                lines: spec.incident_lines(&b.id).map(|l| l.id.clone()).collect(),
                minors: Vec::new(),
                det_g: None,
                stable: false,
                error: Some(e.to_string()),
            },
        })
        .collect();
    NetworkReport {
        omega: spec.omega,
        lines,
        buses,
    }
}

fn num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.6e}"),
        _ => "NA".to_string(),
    }
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let _ = writeln!(out, "{}", line(header.to_vec()));
    for row in rows {
        let _ = writeln!(out, "{}", line(row.iter().map(String::as_str).collect()));
    }
}

impl NetworkReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable") + "\n"
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "omega = {}", self.omega);
        let yn = |b: bool| if b { "yes" } else { "no" }.to_string();

        let mut lr_rows = Vec::new();
        let mut lcr_rows = Vec::new();
        let mut failed = Vec::new();
        for l in &self.lines {
            match &l.verdict {
                Some(LineVerdict::Lr(v)) => lr_rows.push(vec![
                    l.id.clone(),
                    l.from.clone(),
                    l.to.clone(),
                    num(Some(l.r)),
                    num(Some(l.l)),
                    num(Some(v.g_rr)),
                    num(Some(v.det_g)),
                    yn(v.resistive_reliable),
                    yn(v.joint_reliable),
                    yn(v.globally_reliable),
                    num(l.boundary_l),
                ]),
                Some(LineVerdict::Lcr(v)) => lcr_rows.push(vec![
                    l.id.clone(),
                    l.from.clone(),
                    l.to.clone(),
                    num(Some(l.r)),
                    num(Some(l.l)),
                    num(l.c),
                    num(Some(v.p2_surface)),
                    num(Some(v.det_g)),
                    num(v.ricci_scalar),
                    yn(v.surface_stable),
                    yn(v.volume_stable),
                    yn(v.globally_stable),
                ]),
                None => failed.push(vec![l.id.clone(), l.error.clone().unwrap_or_default()]),
            }
        }
        if !lr_rows.is_empty() {
            let _ = writeln!(out, "\nLR lines");
            table(
                &mut out,
                &["line", "from", "to", "r", "L", "g_rr", "det_g", "resistive", "joint", "global", "boundary_L"],
                &lr_rows,
            );
        }
        if !lcr_rows.is_empty() {
            let _ = writeln!(out, "\nLCR lines");
            table(
                &mut out,
                &["line", "from", "to", "r", "L", "C", "P2", "det_g", "R", "surface", "volume", "global"],
                &lcr_rows,
            );
        }
        if !failed.is_empty() {
            let _ = writeln!(out, "\nLines not analyzed");
            table(&mut out, &["line", "error"], &failed);
        }
        let bus_rows: Vec<Vec<String>> = self
            .buses
            .iter()
            .map(|b| {
                vec![
                    b.id.clone(),
                    b.lines.join(","),
                    num(b.det_g),
                    match &b.error {
                        Some(e) => e.clone(),
                        None => yn(b.stable),
                    },
                ]
            })
            .collect();
        if !bus_rows.is_empty() {
            let _ = writeln!(out, "\nBuses");
            table(&mut out, &["bus", "lines", "det_g", "stable"], &bus_rows);
        }
        out
    }
}
