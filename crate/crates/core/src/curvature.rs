//! Connection and curvature of metric fields.
//!
//! Two independent routes to the Ricci scalar are provided:
//!
//! * [`ricci_scalar_nd`] contracts the fully covariant Riemann tensor built
//!   from the metric and its first and second derivatives;
//! * [`ricci_scalar_2d`] uses the closed form for a two-dimensional Hessian
//!   metric, which only needs second and third partials of the potential.
//!
//! Both use the convention in which the round sphere has positive curvature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::{partial_vec, sorted_indices, PartialTable, StepPolicy};
use crate::field::ScalarField;
use crate::metric::MetricTensor;

/// Metric, first and second derivatives of the metric at a point.
///
/// `dg[k][i][j] = ∂_k g_ij`, `ddg[k][l][i][j] = ∂_k ∂_l g_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricJet {
    pub g: Vec<Vec<f64>>,
    pub dg: Vec<Vec<Vec<f64>>>,
    pub ddg: Vec<Vec<Vec<Vec<f64>>>>,
}

impl MetricJet {
    pub fn dim(&self) -> usize {
        self.g.len()
    }
}

/// A point-dependent metric.
pub trait MetricField {
    fn dim(&self) -> usize;

    fn metric_entries(&self, x: &[f64]) -> Result<Vec<Vec<f64>>>;

    fn scales(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| v.abs().max(1.0)).collect()
    }

    fn coordinate_names(&self) -> Vec<String> {
        (0..self.dim()).map(|i| format!("x{i}")).collect()
    }

    /// Metric and derivatives; by default by finite differences of the
    /// metric entries.
    fn jet(&self, x: &[f64], policy: &StepPolicy) -> Result<MetricJet> {
        fd_metric_jet(self, x, policy)
    }
}

/// Finite-difference jet of any metric field.
pub fn fd_metric_jet<M: MetricField + ?Sized>(
    field: &M,
    x: &[f64],
    policy: &StepPolicy,
) -> Result<MetricJet> {
    let n = field.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let eval = |p: &[f64], out: &mut [f64]| -> Result<()> {
        let g = field.metric_entries(p)?;
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::OutOfDomain { point: p.to_vec() });
                }
                out[i * n + j] = *v;
            }
        }
        Ok(())
    };
    let scales = field.scales(x);
    let unflatten = |flat: Vec<f64>| -> Vec<Vec<f64>> {
        (0..n).map(|i| flat[i * n..(i + 1) * n].to_vec()).collect()
    };

    let g = unflatten(
        partial_vec(eval, n * n, x, &[], &scales)?
            .into_iter()
            .map(|d| d.value)
            .collect(),
    );
    let steps1 = policy.steps(1, &scales);
    let mut dg = Vec::with_capacity(n);
    for k in 0..n {
        let d = partial_vec(eval, n * n, x, &[k], &steps1)?;
        dg.push(unflatten(d.into_iter().map(|d| d.value).collect()));
    }
    let steps2 = policy.steps(2, &scales);
    let mut ddg = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for idx in sorted_indices(n, 2) {
        let d = partial_vec(eval, n * n, x, &idx, &steps2)?;
        let block = unflatten(d.into_iter().map(|d| d.value).collect());
        ddg[idx[0]][idx[1]] = block.clone();
        ddg[idx[1]][idx[0]] = block;
    }
    Ok(MetricJet { g, dg, ddg })
}

/// Metric given by a closure returning its entries.
pub struct FnMetric<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<Vec<f64>>> FnMetric<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnMetric { dim, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<Vec<f64>>> MetricField for FnMetric<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn metric_entries(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok((self.f)(x))
    }
}

/// The Hessian of a scalar field, viewed as a metric field.
///
/// Its jet is read off partial tables of orders 2, 3 and 4 of the field, so
/// `∂_k g_ij = S_ijk` and `∂_k∂_l g_ij = S_ijkl` are exactly symmetric in all
/// indices.
pub struct HessianMetric<F> {
    field: F,
}

impl<F: ScalarField> HessianMetric<F> {
    pub fn new(field: F) -> Self {
        HessianMetric { field }
    }

    pub fn field(&self) -> &F {
        &self.field
    }
}

impl<F: ScalarField> MetricField for HessianMetric<F> {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn metric_entries(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let t = PartialTable::compute(&self.field, x, 2, &StepPolicy::default())?;
        let n = self.dim();
        Ok((0..n)
            .map(|i| (0..n).map(|j| t.get(&[i, j])).collect())
            .collect())
    }

    fn scales(&self, x: &[f64]) -> Vec<f64> {
        self.field.scales(x)
    }

    fn coordinate_names(&self) -> Vec<String> {
        self.field.coordinate_names()
    }

    fn jet(&self, x: &[f64], policy: &StepPolicy) -> Result<MetricJet> {
        let n = self.dim();
        let t2 = PartialTable::compute(&self.field, x, 2, policy)?;
        let t3 = PartialTable::compute(&self.field, x, 3, policy)?;
        let t4 = PartialTable::compute(&self.field, x, 4, policy)?;
        let g = (0..n)
            .map(|i| (0..n).map(|j| t2.get(&[i, j])).collect())
            .collect();
        let dg = (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| (0..n).map(|j| t3.get(&[k, i, j])).collect())
                    .collect()
            })
            .collect();
        let ddg = (0..n)
            .map(|k| {
                (0..n)
                    .map(|l| {
                        (0..n)
                            .map(|i| (0..n).map(|j| t4.get(&[k, l, i, j])).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(MetricJet { g, dg, ddg })
    }
}

/// Hessian of `field` at `x` together with the unsymmetrized estimates.
///
/// `raw[i][j]` differentiates along `i` first and `j` second, so the two
/// mixed estimates go through different rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianEstimate {
    pub metric: MetricTensor,
    pub raw: Vec<Vec<f64>>,
}

pub fn hessian_estimate<F: ScalarField + ?Sized>(
    field: &F,
    x: &[f64],
    policy: &StepPolicy,
) -> Result<HessianEstimate> {
    let n = field.dim();
    let steps = policy.steps(2, &field.scales(x));
    let mut raw = vec![vec![0.0; n]; n];
    for (i, row) in raw.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = crate::fd::fd_partial_with_steps(field, x, &[i, j], &steps)?.value;
        }
    }
    let metric = MetricTensor::new(raw.clone(), field.coordinate_names())?;
    Ok(HessianEstimate { metric, raw })
}

/// The Hessian metric `g_ij = ∂_i ∂_j S`; mixed entries average both
/// differentiation orders.
///
/// ```
/// use powergeom::curvature::hessian_metric;
/// use powergeom::fd::StepPolicy;
/// use powergeom::field::FnField;
///
/// let s = FnField::new(2, |x: &[f64]| 0.5 * (x[0] * x[0] + x[1] * x[1]));
/// let g = hessian_metric(&s, &[0.3, -1.2], &StepPolicy::default()).unwrap();
/// assert!((g.get(0, 0) - 1.0).abs() < 1e-9);
/// assert!(g.get(0, 1).abs() < 1e-9);
/// ```
pub fn hessian_metric<F: ScalarField + ?Sized>(
    field: &F,
    x: &[f64],
    policy: &StepPolicy,
) -> Result<MetricTensor> {
    Ok(hessian_estimate(field, x, policy)?.metric)
}

/// `Γ[k][i][j] = Γ_{k,ij} = ½(∂_i g_jk + ∂_j g_ik − ∂_k g_ij)`.
pub fn christoffel_from_jet(jet: &MetricJet) -> Vec<Vec<Vec<f64>>> {
    let n = jet.dim();
    let dg = &jet.dg;
    (0..n)
        .map(|k| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| 0.5 * ((dg[i][j][k] + dg[j][i][k]) - dg[k][i][j]))
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Christoffel symbols of the first kind of `field` at `x`.
pub fn christoffel_first_kind<M: MetricField + ?Sized>(
    field: &M,
    x: &[f64],
    policy: &StepPolicy,
) -> Result<Vec<Vec<Vec<f64>>>> {
    Ok(christoffel_from_jet(&field.jet(x, policy)?))
}

/// Curvature summary at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub metric: MetricTensor,
    /// Only present in two dimensions.
    pub riemann_1212: Option<f64>,
    pub ricci_scalar: f64,
    pub det_g: f64,
    pub regular: bool,
    pub minors: Vec<f64>,
    /// Sum of absolute values of every term that enters `ricci_scalar`; the
    /// size the scalar would have if nothing cancelled.
    pub scale: f64,
}

impl CurvatureReport {
    /// Ricci scalar relative to its no-cancellation size.
    pub fn scaled_ricci(&self) -> f64 {
        if self.scale > 0.0 {
            self.ricci_scalar / self.scale
        } else {
            0.0
        }
    }
}

fn checked_metric(g: Vec<Vec<f64>>, names: Vec<String>) -> Result<(MetricTensor, f64)> {
    let metric = MetricTensor::new(g, names)?;
    let det = metric.determinant();
    let threshold = metric.degeneracy_epsilon();
    if !(det.abs() > threshold) {
        return Err(Error::SingularConfiguration { det, threshold });
    }
    Ok((metric, det))
}

/// Ricci scalar from a metric jet, with its no-cancellation scale.
///
/// `R_iklm = ½(g_im,kl + g_kl,im − g_il,km − g_km,il)
///         + g^ab (Γ_a,kl Γ_b,im − Γ_a,km Γ_b,il)` and `R = g^km g^il R_iklm`.
pub fn ricci_from_jet(jet: &MetricJet, names: Vec<String>) -> Result<CurvatureReport> {
    let n = jet.dim();
    let (metric, det) = checked_metric(jet.g.clone(), names)?;
    let gi = metric.inverse()?;
    let gam = christoffel_from_jet(jet);
    let dd = &jet.ddg;

    let mut ricci = 0.0;
    let mut scale = 0.0;
    for i in 0..n {
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    let w = gi[k][m] * gi[i][l];
                    if w == 0.0 {
                        continue;
                    }
                    let second = [dd[k][l][i][m], dd[i][m][k][l], -dd[k][m][i][l], -dd[i][l][k][m]];
                    let mut term = 0.5 * second.iter().sum::<f64>();
                    let mut mag = 0.5 * second.iter().map(|v| v.abs()).sum::<f64>();
                    for a in 0..n {
                        for b in 0..n {
                            let p = gi[a][b] * gam[a][k][l] * gam[b][i][m];
                            let q = gi[a][b] * gam[a][k][m] * gam[b][i][l];
                            term += p - q;
                            mag += p.abs() + q.abs();
                        }
                    }
                    ricci += w * term;
                    scale += w.abs() * mag;
                }
            }
        }
    }

    let minors = metric.principal_minors();
    Ok(CurvatureReport {
        metric,
        riemann_1212: None,
        ricci_scalar: ricci,
        det_g: det,
        regular: true,
        minors,
        scale,
    })
}

/// Ricci scalar of a metric field by the general metric-derivative route.
///
/// ```
/// use powergeom::curvature::{ricci_scalar_nd, FnMetric};
/// use powergeom::fd::StepPolicy;
///
/// // Round 2-sphere of radius 3.
/// let sphere = FnMetric::new(2, |x: &[f64]| {
///     vec![vec![9.0, 0.0], vec![0.0, 9.0 * x[0].sin().powi(2)]]
/// });
/// let rep = ricci_scalar_nd(&sphere, &[1.0, 0.5], &StepPolicy::default()).unwrap();
/// assert!((rep.ricci_scalar - 2.0 / 9.0).abs() < 1e-8);
/// ```
pub fn ricci_scalar_nd<M: MetricField + ?Sized>(
    field: &M,
    x: &[f64],
    policy: &StepPolicy,
) -> Result<CurvatureReport> {
    if field.dim() < 2 {
        return Err(Error::InvalidArgument(
            "curvature needs at least two dimensions".into(),
        ));
    }
    let jet = field.jet(x, policy)?;
    ricci_from_jet(&jet, field.coordinate_names())
}

/// Second and third partials of a 2-D potential, the input of the closed
/// Hessian-metric curvature formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianJet2 {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
    pub s111: f64,
    pub s112: f64,
    pub s122: f64,
    pub s222: f64,
}

impl HessianJet2 {
    pub fn compute<F: ScalarField + ?Sized>(
        field: &F,
        x: &[f64],
        policy: &StepPolicy,
    ) -> Result<Self> {
        if field.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: field.dim(),
            });
        }
        let t2 = PartialTable::compute(field, x, 2, policy)?;
        let t3 = PartialTable::compute(field, x, 3, policy)?;
        Ok(HessianJet2 {
            s11: t2.get(&[0, 0]),
            s12: t2.get(&[0, 1]),
            s22: t2.get(&[1, 1]),
            s111: t3.get(&[0, 0, 0]),
            s112: t3.get(&[0, 0, 1]),
            s122: t3.get(&[0, 1, 1]),
            s222: t3.get(&[1, 1, 1]),
        })
    }

    /// The six products of the numerator `N`, signed.
    fn numerator_terms(&self) -> [f64; 6] {
        [
            self.s11 * self.s122 * self.s122,
            -self.s11 * self.s112 * self.s222,
            self.s22 * self.s112 * self.s112,
            -self.s22 * self.s111 * self.s122,
            self.s12 * self.s111 * self.s222,
            -self.s12 * self.s112 * self.s122,
        ]
    }

    /// `N = S11(S122² − S112 S222) + S22(S112² − S111 S122) + S12(S111 S222 − S112 S122)`.
    pub fn numerator(&self) -> f64 {
        self.s11 * (self.s122 * self.s122 - self.s112 * self.s222)
            + self.s22 * (self.s112 * self.s112 - self.s111 * self.s122)
            + self.s12 * (self.s111 * self.s222 - self.s112 * self.s122)
    }

    pub fn det(&self) -> f64 {
        self.s11 * self.s22 - self.s12 * self.s12
    }

    /// `D = 4(S11 S22 − S12²)`.
    pub fn denominator(&self) -> f64 {
        4.0 * self.det()
    }

    pub fn riemann_1212(&self) -> f64 {
        self.numerator() / self.denominator()
    }
}

/// `R_1212 = N / D` of the Hessian metric of a two-dimensional potential.
pub fn riemann_2d_hessian<F: ScalarField + ?Sized>(
    field: &F,
    x: &[f64],
    policy: &StepPolicy,
) -> Result<f64> {
    Ok(ricci_scalar_2d(field, x, policy)?
        .riemann_1212
        .expect("two-dimensional report"))
}

/// Ricci scalar `R = 2 R_1212 / det g` of the Hessian metric of a 2-D
/// potential.
///
/// ```
/// use powergeom::curvature::ricci_scalar_2d;
/// use powergeom::fd::StepPolicy;
/// use powergeom::field::FnField;
///
/// let s = FnField::new(2, |x: &[f64]| x[0].powi(2) + 3.0 * x[0] * x[1] - x[1].powi(2));
/// let rep = ricci_scalar_2d(&s, &[0.4, 0.7], &StepPolicy::default()).unwrap();
/// assert!(rep.ricci_scalar.abs() < 1e-9);
/// ```
pub fn ricci_scalar_2d<F: ScalarField + ?Sized>(
    field: &F,
    x: &[f64],
    policy: &StepPolicy,
) -> Result<CurvatureReport> {
    let jet = HessianJet2::compute(field, x, policy)?;
    report_from_hessian_jet(&jet, field.coordinate_names())
}

pub(crate) fn report_from_hessian_jet(
    jet: &HessianJet2,
    names: Vec<String>,
) -> Result<CurvatureReport> {
    let g = vec![vec![jet.s11, jet.s12], vec![jet.s12, jet.s22]];
    let (metric, det) = checked_metric(g, names)?;
    let n_mag: f64 = jet.numerator_terms().iter().map(|t| t.abs()).sum();
    let r1212 = jet.numerator() / (4.0 * det);
    let ricci = 2.0 * r1212 / det;
    let scale = 2.0 * n_mag / (4.0 * det * det);
    let minors = metric.principal_minors();
    Ok(CurvatureReport {
        metric,
        riemann_1212: Some(r1212),
        ricci_scalar: ricci,
        det_g: det,
        regular: true,
        minors,
        scale,
    })
}
