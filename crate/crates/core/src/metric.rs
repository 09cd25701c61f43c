//! Symmetric metric tensors and their leading principal minors.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A symmetric real matrix with named coordinates.
///
/// Entries are symmetrized on construction by averaging `(i, j)` and `(j, i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTensor {
    coordinate_order: Vec<String>,
    entries: Vec<Vec<f64>>,
}

impl MetricTensor {
    pub fn new(entries: Vec<Vec<f64>>, coordinate_order: Vec<String>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::InvalidArgument("metric must have dimension >= 1".into()));
        }
        if let Some(row) = entries.iter().find(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        if coordinate_order.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: coordinate_order.len(),
            });
        }
        let mut sym = entries;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (sym[i][j] + sym[j][i]);
                sym[i][j] = avg;
                sym[j][i] = avg;
            }
        }
        Ok(MetricTensor {
            coordinate_order,
            entries: sym,
        })
    }

    /// Convenience constructor naming coordinates `x0, x1, ...`.
    pub fn from_rows(entries: Vec<Vec<f64>>) -> Result<Self> {
        let names = (0..entries.len()).map(|i| format!("x{i}")).collect();
        Self::new(entries, names)
    }

    pub fn identity(dim: usize) -> Self {
        let entries = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::from_rows(entries).expect("square")
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| if i == j { values[i] } else { 0.0 }).collect())
            .collect();
        Self::from_rows(entries).expect("square")
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn coordinate_order(&self) -> &[String] {
        &self.coordinate_order
    }

    /// Copy with the coordinates renamed; entries untouched.
    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: names.len(),
            });
        }
        self.coordinate_order = names;
        Ok(self)
    }

    fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.entries[i][j])
    }

    pub fn determinant(&self) -> f64 {
        leading_block_det(&self.entries, self.dim())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Singularity threshold `1e-10 · ‖DgD‖_F^dim / det(D)²`, where `D` is
    /// the diagonal from [`equilibration`](Self::equilibration).
    ///
    /// Equivalent to testing `|det(DgD)| ≤ 1e-10 · ‖DgD‖_F^dim`, so the
    /// verdict does not depend on the units of each coordinate. For a
    /// matrix whose rows are already balanced this is `1e-10 · ‖g‖_F^dim`.
    pub fn degeneracy_epsilon(&self) -> f64 {
        let n = self.dim();
        let d = self.equilibration();
        let mut norm_sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                norm_sq += (d[i] * self.entries[i][j] * d[j]).powi(2);
            }
        }
        let det_d_sq: f64 = d.iter().map(|v| v * v).product();
        1e-10 * norm_sq.sqrt().powi(n as i32) / det_d_sq
    }

    /// Positive diagonal `d` such that every row of `diag(d)·g·diag(d)` has
    /// max-norm close to one (symmetric Ruiz scaling). Zero rows keep `d = 1`.
    pub fn equilibration(&self) -> Vec<f64> {
        let n = self.dim();
        let mut d = vec![1.0; n];
        for _ in 0..64 {
            let row_max: Vec<f64> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (d[i] * self.entries[i][j] * d[j]).abs())
                        .fold(0.0, f64::max)
                })
                .collect();
            if row_max.iter().all(|m| *m == 0.0 || (m - 1.0).abs() < 1e-6) {
                break;
            }
            for (di, m) in d.iter_mut().zip(&row_max) {
                if *m > 0.0 && m.is_finite() {
                    *di /= m.sqrt();
                }
            }
        }
        d
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.determinant().abs() > self.degeneracy_epsilon())
    }

    /// Leading principal minors, smallest block first; the last one is the
    /// determinant.
    pub fn principal_minors(&self) -> Vec<f64> {
        principal_minors(self)
    }

    /// Inverse metric, or a singular-configuration error when degenerate.
    pub fn inverse(&self) -> Result<Vec<Vec<f64>>> {
        let det = self.determinant();
        let threshold = self.degeneracy_epsilon();
        if !(det.abs() > threshold) {
            return Err(Error::SingularConfiguration { det, threshold });
        }
        let n = self.dim();
        let inv = self
            .to_matrix()
            .try_inverse()
            .ok_or(Error::SingularConfiguration { det, threshold })?;
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|j| 0.5 * (inv[(i, j)] + inv[(j, i)]))
                    .collect()
            })
            .collect())
    }

    /// Block-diagonal assembly, names prefixed by the block's label.
    pub fn block_diagonal(blocks: &[(String, MetricTensor)]) -> Result<Self> {
        let n: usize = blocks.iter().map(|(_, b)| b.dim()).sum();
        if n == 0 {
            return Err(Error::InvalidArgument("no blocks to assemble".into()));
        }
        let mut entries = vec![vec![0.0; n]; n];
        let mut names = Vec::with_capacity(n);
        let mut offset = 0;
        for (label, block) in blocks {
            for i in 0..block.dim() {
                for j in 0..block.dim() {
                    entries[offset + i][offset + j] = block.get(i, j);
                }
                names.push(format!("{label}.{}", block.coordinate_order[i]));
            }
            offset += block.dim();
        }
        Self::new(entries, names)
    }
}

fn leading_block_det(entries: &[Vec<f64>], k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => entries[0][0],
        2 => entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0],
        3 => {
            let e = entries;
            e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
                - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
                + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0])
        }
        _ => DMatrix::from_fn(k, k, |i, j| entries[i][j]).determinant(),
    }
}

/// Leading principal minors of `metric` in its coordinate order.
pub fn principal_minors(metric: &MetricTensor) -> Vec<f64> {
    (1..=metric.dim())
        .map(|k| leading_block_det(&metric.entries, k))
        .collect()
}
