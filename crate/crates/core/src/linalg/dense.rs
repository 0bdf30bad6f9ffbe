use crate::error::{Error, Result};

/// Row-major dense real matrix with cached squared row, column and
/// Frobenius norms.
///
/// The matrix is immutable once built: the norm caches and the column-major
/// copy used for fast column access are computed in the constructor and never
/// invalidated.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    // column-major copy, so `col(j)` is a contiguous slice
    data_t: Vec<f64>,
    row_norms_sq: Vec<f64>,
    col_norms_sq: Vec<f64>,
    frob_sq: f64,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidData {
                rows,
                cols,
                got: data.len(),
            });
        }
        let mut data_t = vec![0.0; rows * cols];
        let mut row_norms_sq = vec![0.0; rows];
        let mut col_norms_sq = vec![0.0; cols];
        for i in 0..rows {
            for j in 0..cols {
                let v = data[i * cols + j];
                data_t[j * rows + i] = v;
                row_norms_sq[i] += v * v;
                col_norms_sq[j] += v * v;
            }
        }
        let frob_sq = row_norms_sq.iter().sum();
        Ok(Self {
            rows,
            cols,
            data,
            data_t,
            row_norms_sq,
            col_norms_sq,
            frob_sq,
        })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in d.iter().enumerate() {
            data[i * n + i] = v;
        }
        Self::new(n, n, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data_t[j * self.rows..(j + 1) * self.rows]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row_norms_sq(&self) -> &[f64] {
        &self.row_norms_sq
    }

    pub fn col_norms_sq(&self) -> &[f64] {
        &self.col_norms_sq
    }

    pub fn frob_sq(&self) -> f64 {
        self.frob_sq
    }

    /// `X v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, v.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// `X^T u`.
    pub fn matvec_t(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows, u.len())?;
        Ok((0..self.cols).map(|j| dot(self.col(j), u)).collect())
    }

    /// Gram matrix of the smaller dimension: `X^T X` when `cols <= rows`,
    /// otherwise `X X^T`. Returned row-major together with its order.
    pub fn small_gram(&self) -> (Vec<f64>, usize) {
        if self.cols <= self.rows {
            (gram_of(&self.data_t, self.cols, self.rows), self.cols)
        } else {
            (gram_of(&self.data, self.rows, self.cols), self.rows)
        }
    }

    /// `X^T X` (order `cols`).
    pub fn gram_cols(&self) -> Vec<f64> {
        gram_of(&self.data_t, self.cols, self.rows)
    }

    /// `X X^T` (order `rows`).
    pub fn gram_rows(&self) -> Vec<f64> {
        gram_of(&self.data, self.rows, self.cols)
    }
}

// Gram matrix of `k` contiguous vectors of length `len`.
fn gram_of(vectors: &[f64], k: usize, len: usize) -> Vec<f64> {
    let mut g = vec![0.0; k * k];
    for a in 0..k {
        let va = &vectors[a * len..(a + 1) * len];
        for b in a..k {
            let v = dot(va, &vectors[b * len..(b + 1) * len]);
            g[a * k + b] = v;
            g[b * k + a] = v;
        }
    }
    g
}

/// `X v` as a free function.
pub fn matvec(x: &DenseMatrix, v: &[f64]) -> Result<Vec<f64>> {
    x.matvec(v)
}

/// Applies `P_i = I - (X^i)^T X^i / ||X^i||^2` to `w` in O(n), without
/// forming the projector.
pub fn apply_row_projector(x: &DenseMatrix, i: usize, w: &[f64]) -> Result<Vec<f64>> {
    check_len(x.cols(), w.len())?;
    if i >= x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: i,
        });
    }
    let mut out = w.to_vec();
    project_out_row(x, i, &mut out)?;
    Ok(out)
}

/// In-place form of [`apply_row_projector`].
pub fn project_out_row(x: &DenseMatrix, i: usize, w: &mut [f64]) -> Result<()> {
    let norm_sq = x.row_norms_sq()[i];
    if norm_sq <= 0.0 {
        return Err(Error::ZeroRow(i));
    }
    let row = x.row(i);
    let scale = dot(row, w) / norm_sq;
    axpy(-scale, row, w);
    Ok(())
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Squared Euclidean distance between two vectors.
#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
