//! Central finite differences with one Richardson extrapolation step.
//!
//! A partial derivative is described by a multi-index: `[0, 0, 1]` is
//! ∂³/∂x₀²∂x₁. Each distinct coordinate gets the compact central stencil for
//! its multiplicity and the stencils are combined as a tensor product, so
//! every estimate has an even error expansion in the step. Evaluating at `h`
//! and `h/2` and combining as `(4·D(h/2) − D(h))/3` removes the `h²` term.

use crate::error::{Error, Result};
use crate::field::ScalarField;

pub const MAX_ORDER: usize = 4;

/// Steps below this fraction of |x| lose all significant digits.
const MIN_RELATIVE_STEP: f64 = 1.0 / 1_048_576.0; // 2^-20

/// A derivative estimate and its Richardson error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub error: f64,
}

/// Chooses steps per coordinate as `relative[order - 1] * scale`.
///
/// Higher derivatives divide by higher powers of the step, so they use larger
/// relative steps to keep round-off in check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub relative: [f64; MAX_ORDER],
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            relative: [1e-3, 4e-3, 8e-3, 1.5e-2],
        }
    }
}

impl StepPolicy {
    pub fn steps(&self, order: usize, scales: &[f64]) -> Vec<f64> {
        let k = order.clamp(1, MAX_ORDER) - 1;
        scales.iter().map(|s| self.relative[k] * s).collect()
    }
}

// (offset in units of h, weight); the divisor is h^m.
const STENCIL_1: &[(f64, f64)] = &[(-1.0, -0.5), (1.0, 0.5)];
const STENCIL_2: &[(f64, f64)] = &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)];
const STENCIL_3: &[(f64, f64)] = &[(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)];
const STENCIL_4: &[(f64, f64)] = &[
    (-2.0, 1.0),
    (-1.0, -4.0),
    (0.0, 6.0),
    (1.0, -4.0),
    (2.0, 1.0),
];

fn stencil(multiplicity: usize) -> &'static [(f64, f64)] {
    match multiplicity {
        1 => STENCIL_1,
        2 => STENCIL_2,
        3 => STENCIL_3,
        4 => STENCIL_4,
        _ => unreachable!("multiplicity bounded by MAX_ORDER"),
    }
}

/// Group a multi-index into (coordinate, multiplicity) in order of first
/// appearance. The grouping order is the nesting order of the stencils.
fn group(multi_index: &[usize]) -> Vec<(usize, usize)> {
    let mut groups: Vec<(usize, usize)> = Vec::new();
    for &i in multi_index {
        match groups.iter_mut().find(|(c, _)| *c == i) {
            Some(g) => g.1 += 1,
            None => groups.push((i, 1)),
        }
    }
    groups
}

/// Finite-difference partial of a vector-valued map with `width` outputs.
///
/// `eval` writes the map's value at a point into its output slice and fails
/// if the point is unusable. One estimate per output is returned.
pub fn partial_vec<G>(
    mut eval: G,
    width: usize,
    x: &[f64],
    multi_index: &[usize],
    steps: &[f64],
) -> Result<Vec<Derivative>>
where
    G: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    if multi_index.len() > MAX_ORDER {
        return Err(Error::OrderTooHigh(multi_index.len()));
    }
    if steps.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: steps.len(),
        });
    }
    if let Some(&i) = multi_index.iter().find(|&&i| i >= x.len()) {
        return Err(Error::InvalidArgument(format!(
            "coordinate index {i} out of range for dimension {}",
            x.len()
        )));
    }
    let groups = group(multi_index);
    for &(i, _) in &groups {
        let h = steps[i];
        if !(h > 0.0 && h.is_finite()) || h < MIN_RELATIVE_STEP * x[i].abs() {
            return Err(Error::DegenerateStep {
                index: i,
                step: h,
                magnitude: x[i].abs(),
            });
        }
    }

    if groups.is_empty() {
        let mut out = vec![0.0; width];
        eval(x, &mut out)?;
        return Ok(out
            .into_iter()
            .map(|value| Derivative { value, error: 0.0 })
            .collect());
    }

    let coarse = apply(&mut eval, width, x, &groups, steps, 1.0)?;
    let fine = apply(&mut eval, width, x, &groups, steps, 0.5)?;
    Ok(coarse
        .iter()
        .zip(&fine)
        .map(|(&d1, &d2)| Derivative {
            value: (4.0 * d2 - d1) / 3.0,
            error: (d2 - d1).abs() / 3.0,
        })
        .collect())
}

fn apply<G>(
    eval: &mut G,
    width: usize,
    x: &[f64],
    groups: &[(usize, usize)],
    steps: &[f64],
    factor: f64,
) -> Result<Vec<f64>>
where
    G: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let mut point = x.to_vec();
    let mut acc = vec![0.0; width];
    let mut buf = vec![0.0; width];
    nest(eval, x, groups, steps, factor, 0, 1.0, &mut point, &mut acc, &mut buf)?;

    let mut divisor = 1.0;
    for &(i, m) in groups {
        divisor *= (steps[i] * factor).powi(m as i32);
    }
    Ok(acc.into_iter().map(|a| a / divisor).collect())
}

#[allow(clippy::too_many_arguments)]
fn nest<G>(
    eval: &mut G,
    x: &[f64],
    groups: &[(usize, usize)],
    steps: &[f64],
    factor: f64,
    level: usize,
    weight: f64,
    point: &mut [f64],
    acc: &mut [f64],
    buf: &mut [f64],
) -> Result<()>
where
    G: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    if level == groups.len() {
        eval(point, buf)?;
        for (a, b) in acc.iter_mut().zip(buf.iter()) {
            *a += weight * b;
        }
        return Ok(());
    }
    let (i, m) = groups[level];
    let h = steps[i] * factor;
    // Partial sums per level keep the nesting order visible in the rounding.
    let mut level_acc = vec![0.0; acc.len()];
    for &(offset, w) in stencil(m) {
        point[i] = x[i] + offset * h;
        nest(
            eval,
            x,
            groups,
            steps,
            factor,
            level + 1,
            w,
            point,
            &mut level_acc,
            buf,
        )?;
    }
    point[i] = x[i];
    for (a, l) in acc.iter_mut().zip(level_acc) {
        *a += weight * l;
    }
    Ok(())
}

fn field_eval<F: ScalarField + ?Sized>(field: &F) -> impl FnMut(&[f64], &mut [f64]) -> Result<()> + '_ {
    move |p: &[f64], out: &mut [f64]| {
        if !field.in_domain(p) {
            return Err(Error::OutOfDomain { point: p.to_vec() });
        }
        let v = field.value(p);
        if !v.is_finite() {
            return Err(Error::OutOfDomain { point: p.to_vec() });
        }
        out[0] = v;
        Ok(())
    }
}

/// Partial derivative of `field` at `x` with per-coordinate steps.
pub fn fd_partial_with_steps<F: ScalarField + ?Sized>(
    field: &F,
    x: &[f64],
    multi_index: &[usize],
    steps: &[f64],
) -> Result<Derivative> {
    if x.len() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: x.len(),
        });
    }
    let d = partial_vec(field_eval(field), 1, x, multi_index, steps)?;
    Ok(d[0])
}

/// Partial derivative of `field` at `x` using the same step `step` along
/// every coordinate.
///
/// ```
/// use powergeom::fd::fd_partial;
/// use powergeom::field::FnField;
///
/// let f = FnField::new(2, |x: &[f64]| x[0] * x[0] * x[1]);
/// let d = fd_partial(&f, &[1.0, 2.0], &[0, 0], 1e-2).unwrap();
/// assert!((d.value - 4.0).abs() < 1e-8);
/// ```
pub fn fd_partial<F: ScalarField + ?Sized>(
    field: &F,
    x: &[f64],
    multi_index: &[usize],
    step: f64,
) -> Result<Derivative> {
    fd_partial_with_steps(field, x, multi_index, &vec![step; x.len()])
}

/// Partial derivative with steps chosen by `policy` from the field's scales.
pub fn partial<F: ScalarField + ?Sized>(
    field: &F,
    x: &[f64],
    multi_index: &[usize],
    policy: &StepPolicy,
) -> Result<Derivative> {
    let steps = policy.steps(multi_index.len(), &field.scales(x));
    fd_partial_with_steps(field, x, multi_index, &steps)
}

/// All partials of one order, keyed by sorted multi-index.
///
/// Mixed partials are computed once per sorted index, so symmetric
/// combinations of them cancel exactly.
#[derive(Debug, Clone)]
pub struct PartialTable {
    dim: usize,
    entries: Vec<(Vec<usize>, Derivative)>,
}

impl PartialTable {
    pub fn compute<F: ScalarField + ?Sized>(
        field: &F,
        x: &[f64],
        order: usize,
        policy: &StepPolicy,
    ) -> Result<Self> {
        let dim = field.dim();
        let steps = policy.steps(order, &field.scales(x));
        let mut entries = Vec::new();
        for idx in sorted_indices(dim, order) {
            let d = fd_partial_with_steps(field, x, &idx, &steps)?;
            entries.push((idx, d));
        }
        Ok(PartialTable { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Value for any ordering of the multi-index.
    pub fn get(&self, multi_index: &[usize]) -> f64 {
        self.derivative(multi_index).value
    }

    pub fn derivative(&self, multi_index: &[usize]) -> Derivative {
        let mut key = multi_index.to_vec();
        key.sort_unstable();
        self.entries
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, d)| *d)
            .expect("multi-index of the tabulated order")
    }
}

/// Non-decreasing multi-indices of the given length over `dim` coordinates.
pub(crate) fn sorted_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, order: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == order {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(dim, order, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, order, 0, &mut Vec::new(), &mut out);
    out
}
