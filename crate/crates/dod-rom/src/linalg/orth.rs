//! G-orthonormalization of a full-column-rank matrix.

use super::{dot, g_inner, GramMatrix, Matrix};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A column counts as dependent when its post-projection G-norm drops
/// below `RANK_TOL · (pre-projection G-norm + 1)`.
pub(crate) const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrthMode {
    /// Modified Gram-Schmidt with one reorthogonalization pass.
    /// Supports any Gram matrix.
    ModifiedGramSchmidt,
    /// Reduced Householder QR. Euclidean inner product only.
    HouseholderQR,
}

/// Orthonormalizes the columns of `w` so that `ṼᵀGṼ = I` and
/// `span(Ṽ) = span(w)`.
///
/// `HouseholderQR` is restricted to `G = I`; it is the fast path on
/// ambient coordinates where the inner product is already Euclidean.
pub fn orth(w: &Matrix, g: &GramMatrix, mode: OrthMode) -> Result<Matrix> {
    if g.dim() != w.rows() {
        return Err(Error::DimensionMismatch(format!(
            "orth: matrix has {} rows, Gram dimension is {}",
            w.rows(),
            g.dim()
        )));
    }
    if w.cols() > w.rows() {
        return Err(Error::DimensionMismatch(
            "orth: more columns than rows".into(),
        ));
    }
    match mode {
        OrthMode::ModifiedGramSchmidt => modified_gram_schmidt(w, g),
        OrthMode::HouseholderQR => {
            if !matches!(g, GramMatrix::Identity { .. }) {
                return Err(Error::InvalidInput(
                    "HouseholderQR supports the identity Gram matrix only".into(),
                ));
            }
            householder_q(w)
        }
    }
}

/// Modified Gram-Schmidt under an arbitrary G, with one
/// reorthogonalization pass per column. Classical GS loses
/// orthogonality at ~√ε; the second pass restores it to round-off.
fn modified_gram_schmidt(w: &Matrix, g: &GramMatrix) -> Result<Matrix> {
    let n = w.cols();
    let mut q = w.clone();
    for j in 0..n {
        let pre_norm = g_inner(q.col(j), q.col(j), g)?.max(0.0).sqrt();
        for _pass in 0..2 {
            for k in 0..j {
                let r = g_inner(q.col(k), q.col(j), g)?;
                let (head, tail) = q.split_cols(k, j);
                axpy(-r, head, tail);
            }
        }
        let norm = g_inner(q.col(j), q.col(j), g)?.max(0.0).sqrt();
        if norm < RANK_TOL * (pre_norm + 1.0) {
            return Err(Error::RankDeficient {
                col: j,
                pivot: norm,
            });
        }
        let inv = 1.0 / norm;
        for v in q.col_mut(j) {
            *v *= inv;
        }
    }
    Ok(q)
}

/// Reduced Q factor from Householder reflections, with the sign fixed
/// so the diagonal of R is non-negative.
fn householder_q(w: &Matrix) -> Result<Matrix> {
    let m = w.rows();
    let n = w.cols();
    let mut r = w.clone();
    // Householder vectors, one per column.
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let pre_norm = euclid(&r.col(j)[j.min(m)..]).hypot(euclid(&r.col(j)[..j.min(m)]));
        let mut v = vec![0.0; m - j];
        v.copy_from_slice(&r.col(j)[j..]);
        let alpha = euclid(&v);
        if alpha < RANK_TOL * (pre_norm + 1.0) {
            return Err(Error::RankDeficient {
                col: j,
                pivot: alpha,
            });
        }
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vnorm = euclid(&v);
        for x in &mut v {
            *x /= vnorm;
        }
        // Apply reflection to the trailing columns.
        for c in j..n {
            let col = r.col_mut(c);
            let tail = &mut col[j..];
            let proj = 2.0 * dot(&v, tail);
            for (t, hv) in tail.iter_mut().zip(&v) {
                *t -= proj * hv;
            }
        }
        vs.push(v);
    }
    // Record the sign of each R diagonal before normalizing it away.
    let diag_signs: Vec<f64> = (0..n)
        .map(|j| if r.get(j, j) >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    // Accumulate Q = H₁…Hₙ applied to the first n identity columns.
    let mut q = Matrix::zeros(m, n);
    for j in 0..n {
        q.set(j, j, 1.0);
    }
    for j in (0..n).rev() {
        let v = &vs[j];
        for c in 0..n {
            let col = q.col_mut(c);
            let tail = &mut col[j..];
            let proj = 2.0 * dot(v, tail);
            for (t, hv) in tail.iter_mut().zip(v) {
                *t -= proj * hv;
            }
        }
    }
    for j in 0..n {
        if diag_signs[j] < 0.0 {
            for v in q.col_mut(j) {
                *v = -*v;
            }
        }
    }
    Ok(q)
}

#[inline]
fn euclid(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

impl Matrix {
    /// Borrows column `k` immutably and column `j` mutably, `k < j`.
    fn split_cols(&mut self, k: usize, j: usize) -> (&[f64], &mut [f64]) {
        debug_assert!(k < j);
        let rows = self.rows();
        let (lo, hi) = self.data.split_at_mut(j * rows);
        (&lo[k * rows..(k + 1) * rows], &mut hi[..rows])
    }
}

/// G-orthogonal projector `P = Ṽ Ṽᵀ G` applied to `u`.
pub fn project_onto(basis: &Matrix, g: &GramMatrix, u: &[f64]) -> Result<Vec<f64>> {
    let gu = g.apply(u);
    let coeffs = basis.tr_matvec(&gu);
    Ok(basis.matvec(&coeffs))
}
