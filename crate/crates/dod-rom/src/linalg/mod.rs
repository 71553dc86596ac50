//! Dense linear algebra under an arbitrary SPD inner product.
//!
//! Everything here works with respect to a Gram matrix `G`: norms are
//! `‖u‖ = √(uᵀGu)`, orthonormality means `VᵀGV = I`. With `G = I` the
//! usual Euclidean notions are recovered.

mod eig;
mod orth;

pub use eig::{singular_values, sym_eig};
pub use orth::{orth, project_onto, OrthMode};

use crate::error::{dim_err, Error, Result};
use serde::{Deserialize, Serialize};

/// Dense real matrix, column-major storage. Columns of tall-skinny
/// snapshot stacks are contiguous, which is the dominant access pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(dim_err(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds from a list of rows (handy in tests).
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        let c = cols.len();
        let r = cols[0].len();
        let mut m = Matrix::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged columns");
            m.col_mut(j).copy_from_slice(col);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, f(i, j));
            }
        }
        m
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
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    /// Contiguous view of column `j`.
    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `self * other`
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let bcol = other.col(j);
            let ocol = out.col_mut(j);
            for (k, &b) in bcol.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                let acol = &self.data[k * self.rows..(k + 1) * self.rows];
                for i in 0..self.rows {
                    ocol[i] += acol[i] * b;
                }
            }
        }
        out
    }

    /// `self * x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for (k, &xv) in x.iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            let col = self.col(k);
            for i in 0..self.rows {
                out[i] += col[i] * xv;
            }
        }
        out
    }

    /// `selfᵀ * x`
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "tr_matvec dimension mismatch");
        (0..self.cols).map(|j| dot(self.col(j), x)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Keeps the first `k` columns.
    pub fn truncate_cols(&self, k: usize) -> Matrix {
        assert!(k >= 1 && k <= self.cols);
        Matrix {
            rows: self.rows,
            cols: k,
            data: self.data[..k * self.rows].to_vec(),
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn euclidean_norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// SPD inner-product weight on the high-fidelity space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum GramMatrix {
    /// Euclidean inner product.
    Identity { dim: usize },
    /// Diagonal weights, all strictly positive (e.g. quadrature weights).
    Diagonal { weights: Vec<f64> },
    /// Full SPD matrix, verified by Cholesky at construction.
    Dense { matrix: Matrix },
}

impl GramMatrix {
    pub fn identity(dim: usize) -> Self {
        GramMatrix::Identity { dim }
    }

    pub fn diagonal(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("empty diagonal".into()));
        }
        if !weights.iter().all(|&w| w.is_finite() && w > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(GramMatrix::Diagonal { weights })
    }

    /// Accepts a dense SPD matrix. Symmetry is enforced up to 1e-10
    /// relative asymmetry; positive definiteness is checked by Cholesky.
    pub fn dense(matrix: Matrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(dim_err("Gram matrix must be square"));
        }
        let asym = asymmetry(&matrix);
        if asym > 1e-10 {
            return Err(Error::NotSymmetric(asym));
        }
        let sym = symmetrize(&matrix);
        cholesky(&sym)?;
        Ok(GramMatrix::Dense { matrix: sym })
    }

    pub fn dim(&self) -> usize {
        match self {
            GramMatrix::Identity { dim } => *dim,
            GramMatrix::Diagonal { weights } => weights.len(),
            GramMatrix::Dense { matrix } => matrix.rows(),
        }
    }

    /// `G * u`
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        match self {
            GramMatrix::Identity { .. } => u.to_vec(),
            GramMatrix::Diagonal { weights } => {
                u.iter().zip(weights).map(|(x, w)| x * w).collect()
            }
            GramMatrix::Dense { matrix } => matrix.matvec(u),
        }
    }
}

/// `uᵀ G v`.
pub fn g_inner(u: &[f64], v: &[f64], g: &GramMatrix) -> Result<f64> {
    if u.len() != v.len() || u.len() != g.dim() {
        return Err(dim_err(format!(
            "g_inner: |u|={}, |v|={}, dim(G)={}",
            u.len(),
            v.len(),
            g.dim()
        )));
    }
    Ok(match g {
        GramMatrix::Identity { .. } => dot(u, v),
        GramMatrix::Diagonal { weights } => u
            .iter()
            .zip(v)
            .zip(weights)
            .map(|((x, y), w)| x * y * w)
            .sum(),
        GramMatrix::Dense { matrix } => dot(u, &matrix.matvec(v)),
    })
}

/// `√(uᵀ G u)`. Coincides with the Euclidean norm for `G = I`.
pub fn g_norm(u: &[f64], g: &GramMatrix) -> Result<f64> {
    Ok(g_inner(u, u, g)?.max(0.0).sqrt())
}

/// Relative asymmetry `max|m - mᵀ| / (1 + max|m|)`.
pub(crate) fn asymmetry(m: &Matrix) -> f64 {
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            scale = scale.max(m.get(i, j).abs());
            worst = worst.max((m.get(i, j) - m.get(j, i)).abs());
        }
    }
    worst / (1.0 + scale)
}

pub(crate) fn symmetrize(m: &Matrix) -> Matrix {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| {
        0.5 * (m.get(i, j) + m.get(j, i))
    })
}

/// Lower Cholesky factor; fails with `NotPositiveDefinite` on a
/// non-SPD input.
pub fn cholesky(m: &Matrix) -> Result<Matrix> {
    let n = m.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let dj = d.sqrt();
        l.set(j, j, dj);
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / dj);
        }
    }
    Ok(l)
}
