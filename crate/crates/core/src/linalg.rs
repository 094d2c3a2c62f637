//! Small dense matrices: just enough linear algebra for the graph machinery.
//!
//! Matrices here are at most a few dozen rows, so everything is row-major
//! `Vec<f64>` with no blocking.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("row {row} has length {found}, expected {expected}")]
    RaggedRows {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(LinalgError::RaggedRows {
                    row: i,
                    found: row.len(),
                    expected: cols,
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::Dimension(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Singular values of `a`, sorted in descending order.
///
/// One-sided Jacobi: columns of a working copy are rotated pairwise until
/// they are mutually orthogonal; the column norms are then the singular
/// values. Wide matrices are handled through their transpose.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let work = if a.rows >= a.cols {
        a.clone()
    } else {
        a.transpose()
    };
    let (m, n) = (work.rows, work.cols);
    // column-major copy so rotations touch contiguous memory
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..m).map(|i| work[(i, j)]).collect())
        .collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Exact determinant of an integer matrix (Bareiss fraction-free elimination).
pub fn det_exact(a: &[Vec<i64>]) -> Result<i128, LinalgError> {
    let n = a.len();
    if let Some(row) = a.iter().find(|row| row.len() != n) {
        return Err(LinalgError::NotSquare {
            rows: n,
            cols: row.len(),
        });
    }
    if n == 0 {
        return Ok(1);
    }
    let mut m: Vec<Vec<i128>> = a
        .iter()
        .map(|r| r.iter().map(|&x| i128::from(x)).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&i| m[i][k] != 0) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    Ok(sign * m[n - 1][n - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_singular_values() {
        assert_eq!(singular_values(&Matrix::identity(3)), vec![1.0; 3]);
    }

    #[test]
    fn zero_matrix_singular_values() {
        assert_eq!(singular_values(&Matrix::zeros(4, 4)), vec![0.0; 4]);
    }

    #[test]
    fn diagonal_sorted_descending() {
        let m = Matrix::from_rows(&[vec![0.5, 0.0], vec![0.0, -3.0]]).unwrap();
        let sv = singular_values(&m);
        assert!((sv[0] - 3.0).abs() < 1e-15);
        assert!((sv[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wide_matrix_uses_transpose() {
        let m = Matrix::from_rows(&[vec![3.0, 0.0, 4.0]]).unwrap();
        let sv = singular_values(&m);
        assert_eq!(sv.len(), 1);
        assert!((sv[0] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let a = vec![vec![2, 0, -1], vec![-1, 1, 0], vec![0, -1, 1]];
        assert_eq!(det_exact(&a).unwrap(), 1);
        let b = vec![vec![0, 1], vec![1, 0]];
        assert_eq!(det_exact(&b).unwrap(), -1);
        let singular = vec![vec![1, -1], vec![-1, 1]];
        assert_eq!(det_exact(&singular).unwrap(), 0);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert!(matches!(err, LinalgError::RaggedRows { row: 1, .. }));
    }
}
