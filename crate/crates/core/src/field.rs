//! Scalar fields over component parameter space and the points they are
//! evaluated at.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A smooth real-valued function of a few coordinates.
///
/// Implementors declare their own domain and characteristic length scales;
/// the finite-difference machinery uses the scales to size its stencils and
/// refuses to sample outside the domain.
pub trait ScalarField {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Whether `x` is inside the open set on which the field is smooth.
    fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite())
    }

    /// Length over which the field changes appreciably along each coordinate.
    fn scales(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| v.abs().max(1.0)).collect()
    }

    fn coordinate_names(&self) -> Vec<String> {
        (0..self.dim()).map(|i| format!("x{i}")).collect()
    }

    /// Analytic partial derivative, when one is known. Used by tests to check
    /// the numerical derivatives; the numerics never consult it.
    fn exact_partial(&self, _x: &[f64], _multi_index: &[usize]) -> Option<f64> {
        None
    }
}

impl<T: ScalarField + ?Sized> ScalarField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        (**self).in_domain(x)
    }
    fn scales(&self, x: &[f64]) -> Vec<f64> {
        (**self).scales(x)
    }
    fn coordinate_names(&self) -> Vec<String> {
        (**self).coordinate_names()
    }
    fn exact_partial(&self, x: &[f64], multi_index: &[usize]) -> Option<f64> {
        (**self).exact_partial(x, multi_index)
    }
}

/// Closure-backed field, handy for tests and ad hoc analysis.
pub struct FnField<F> {
    dim: usize,
    f: F,
    names: Option<Vec<String>>,
}

impl<F: Fn(&[f64]) -> f64> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f, names: None }
    }

    pub fn with_names(mut self, names: &[&str]) -> Self {
        self.names = Some(names.iter().map(|s| s.to_string()).collect());
        self
    }
}

impl<F: Fn(&[f64]) -> f64> ScalarField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn coordinate_names(&self) -> Vec<String> {
        match &self.names {
            Some(n) => n.clone(),
            None => (0..self.dim).map(|i| format!("x{i}")).collect(),
        }
    }
}

/// Coordinate system a [`ParameterPoint`] is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// (r, L, C)
    Component,
    /// (r, X_L, X_C)
    Impedance,
    /// (r, L)
    Lr,
    /// (r, X_L), the impedance image of [`Basis::Lr`]
    LrImpedance,
}

impl Basis {
    pub fn arity(self) -> usize {
        match self {
            Basis::Component | Basis::Impedance => 3,
            Basis::Lr | Basis::LrImpedance => 2,
        }
    }

    pub fn coordinate_names(self) -> &'static [&'static str] {
        match self {
            Basis::Component => &["r", "L", "C"],
            Basis::Impedance => &["r", "X_L", "X_C"],
            Basis::Lr => &["r", "L"],
            Basis::LrImpedance => &["r", "X_L"],
        }
    }
}

/// A component state: coordinates in some basis plus the angular frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    basis: Basis,
    coords: Vec<f64>,
    omega: f64,
}

impl ParameterPoint {
    pub fn new(basis: Basis, coords: Vec<f64>, omega: f64) -> Result<Self> {
        if coords.len() != basis.arity() {
            return Err(Error::DimensionMismatch {
                expected: basis.arity(),
                got: coords.len(),
            });
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "omega must be positive and finite, got {omega}"
            )));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "coordinates must be finite, got {coords:?}"
            )));
        }
        Ok(ParameterPoint {
            basis,
            coords,
            omega,
        })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Map (r, L, C) to (r, ωL, 1/(ωC)), or (r, L) to (r, ωL).
    ///
    /// Points already in an impedance basis are returned unchanged.
    pub fn to_impedance(&self) -> Result<ParameterPoint> {
        let w = self.omega;
        let coords = match self.basis {
            Basis::Component => {
                let (r, l, c) = (self.coords[0], self.coords[1], self.coords[2]);
                if c == 0.0 {
                    return Err(Error::SingularTransform(
                        "C = 0 has no impedance-basis image".into(),
                    ));
                }
                vec![r, w * l, 1.0 / (w * c)]
            }
            Basis::Lr => vec![self.coords[0], w * self.coords[1]],
            Basis::Impedance | Basis::LrImpedance => return Ok(self.clone()),
        };
        let basis = match self.basis {
            Basis::Lr => Basis::LrImpedance,
            _ => Basis::Impedance,
        };
        Ok(ParameterPoint {
            basis,
            coords,
            omega: w,
        })
    }
}
