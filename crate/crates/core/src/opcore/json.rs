//! Matrix JSON schema `{"n": int, "re": [[float]], "im": [[float]]}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linalg::ComplexMatrix;
use crate::error::{Result, SimError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    /// Row-major representation of a (possibly rectangular) matrix; `n` is the row count.
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            n: m.nrows(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    /// Square matrices only; ragged or non-square arrays are rejected.
    pub fn to_square(&self) -> Result<ComplexMatrix> {
        let m = self.to_rect()?;
        if m.nrows() != m.ncols() {
            return Err(SimError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Ok(m)
    }

    /// Rectangular matrices (observation operators); rows must have equal length.
    pub fn to_rect(&self) -> Result<ComplexMatrix> {
        let rows = self.re.len();
        if rows != self.n {
            return Err(SimError::Parse(format!(
                "n = {} but re has {} rows",
                self.n, rows
            )));
        }
        let cols = self.re.first().map_or(0, |r| r.len());
        if self.re.iter().any(|r| r.len() != cols) {
            return Err(SimError::Parse("ragged re array".into()));
        }
        let has_im = !self.im.is_empty();
        if has_im && (self.im.len() != rows || self.im.iter().any(|r| r.len() != cols)) {
            return Err(SimError::Parse("im array shape differs from re".into()));
        }
        let m = ComplexMatrix::from_fn(rows, cols, |i, j| {
            Complex64::new(self.re[i][j], if has_im { self.im[i][j] } else { 0.0 })
        });
        if let Some((i, j)) = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .find(|&(i, j)| !m[(i, j)].re.is_finite() || !m[(i, j)].im.is_finite())
        {
            return Err(SimError::NonFinite { row: i, col: j });
        }
        Ok(m)
    }
}

pub fn matrix_from_json_str(s: &str) -> Result<ComplexMatrix> {
    let mj: MatrixJson = serde_json::from_str(s).map_err(|e| SimError::Parse(e.to_string()))?;
    mj.to_square()
}
