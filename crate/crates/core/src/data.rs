//! Row-major matrices and the aligned `(x, y, z)` sample container.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Data(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::Data(format!(
                "row {i} has {} entries, expected {cols}",
                rows[i].len()
            )));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Data("columns have different lengths".into()));
        }
        let cols = columns.len();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            data.extend(columns.iter().map(|c| c[i]));
        }
        Ok(Self { rows, cols, data })
    }

    /// A single-column matrix.
    pub fn column_vector(values: Vec<f64>) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Horizontal concatenation.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::Data(format!(
                "cannot stack {} rows with {} rows",
                self.rows, other.rows
            )));
        }
        let mut data = Vec::with_capacity(self.rows * (self.cols + other.cols));
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        })
    }

    pub fn select_rows(&self, order: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(order.len() * self.cols);
        for &i in order {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: order.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Per-column `(mean, variance)` with the `1/(n−1)` variance normalization.
    pub fn column_moments(&self) -> Vec<ColumnMoments> {
        let n = self.rows as f64;
        (0..self.cols)
            .map(|j| {
                let mean = (0..self.rows).map(|i| self.get(i, j)).sum::<f64>() / n;
                let ss: f64 = (0..self.rows).map(|i| (self.get(i, j) - mean).powi(2)).sum();
                ColumnMoments {
                    mean,
                    variance: ss / (n - 1.0).max(1.0),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ColumnMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Aligned i.i.d. samples of `(X, Y, Z)`; `z` may have zero columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Matrix,
    pub z: Matrix,
}

impl Dataset {
    pub fn new(x: Matrix, y: Matrix, z: Matrix) -> Result<Self> {
        let n = x.n_rows();
        if y.n_rows() != n || z.n_rows() != n {
            return Err(Error::Data(format!(
                "row counts differ: x {n}, y {}, z {}",
                y.n_rows(),
                z.n_rows()
            )));
        }
        if n < 2 {
            return Err(Error::Data(format!("need at least 2 samples, got {n}")));
        }
        if x.n_cols() == 0 || y.n_cols() == 0 {
            return Err(Error::Data("x and y need at least one column each".into()));
        }
        for (name, m) in [("x", &x), ("y", &y), ("z", &z)] {
            if let Some(pos) = m.as_slice().iter().position(|v| !v.is_finite()) {
                let cols = m.n_cols();
                return Err(Error::Data(format!(
                    "non-finite value in {name} at row {}, column {}",
                    pos / cols,
                    pos % cols
                )));
            }
        }
        Ok(Self { x, y, z })
    }

    /// Unconditional dataset (`d_Z = 0`).
    pub fn unconditional(x: Matrix, y: Matrix) -> Result<Self> {
        let n = x.n_rows();
        Self::new(x, y, Matrix::zeros(n, 0))
    }

    pub fn n(&self) -> usize {
        self.x.n_rows()
    }

    /// `(d_X, d_Y, d_Z)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.x.n_cols(), self.y.n_cols(), self.z.n_cols())
    }
}

/// Per-column affine map to zero mean and unit variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(m: &Matrix) -> Result<Self> {
        let moments = m.column_moments();
        if let Some(j) = moments.iter().position(|c| !(c.variance > 0.0)) {
            return Err(Error::Data(format!("column {j} is constant")));
        }
        Ok(Self {
            means: moments.iter().map(|c| c.mean).collect(),
            scales: moments.iter().map(|c| c.variance.sqrt()).collect(),
        })
    }

    pub fn apply(&self, m: &Matrix) -> Matrix {
        let mut out = m.clone();
        for i in 0..out.n_rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.means[j]) / self.scales[j];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_and_access() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(m.row(1), &[3.0, 4.0]);
        assert_eq!(m.column(1), vec![2.0, 4.0, 6.0]);
        let c = Matrix::from_columns(&[vec![1.0, 3.0, 5.0], vec![2.0, 4.0, 6.0]]).unwrap();
        assert_eq!(m, c);
        let s = m.hstack(&Matrix::column_vector(vec![7.0, 8.0, 9.0])).unwrap();
        assert_eq!(s.row(2), &[5.0, 6.0, 9.0]);
        assert_eq!(m.select_rows(&[2, 0]).row(0), &[5.0, 6.0]);
        assert!(Matrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(Matrix::new(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn dataset_validation() {
        let x = Matrix::column_vector(vec![1.0, 2.0, 3.0]);
        assert!(Dataset::unconditional(x.clone(), x.clone()).is_ok());
        let short = Matrix::column_vector(vec![1.0, 2.0]);
        assert!(Dataset::unconditional(x.clone(), short).is_err());
        let one = Matrix::column_vector(vec![1.0]);
        assert!(Dataset::unconditional(one.clone(), one).is_err());
        let bad = Matrix::column_vector(vec![1.0, f64::NAN, 3.0]);
        let err = Dataset::unconditional(x, bad).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
    }

    #[test]
    fn standardizer_centers_and_scales() {
        let m = Matrix::from_columns(&[vec![1.0, 2.0, 3.0, 4.0], vec![10.0, 10.0, 30.0, 30.0]]).unwrap();
        let s = Standardizer::fit(&m).unwrap();
        let out = s.apply(&m);
        for c in out.column_moments() {
            assert!(c.mean.abs() < 1e-12 && (c.variance - 1.0).abs() < 1e-12);
        }
        let constant = Matrix::column_vector(vec![2.0; 4]);
        assert!(Standardizer::fit(&constant).is_err());
    }
}
