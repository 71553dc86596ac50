//! Symmetric eigendecomposition by cyclic Jacobi rotations, and the
//! small-matrix singular values built on top of it.

use super::{asymmetry, symmetrize, Matrix};
use crate::error::{Error, Result};

/// Convergence threshold: off-diagonal Frobenius mass below
/// `JACOBI_TOL · ‖m‖_F` stops the sweeps.
const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
/// Relative asymmetry beyond which the input is rejected.
const SYMMETRY_TOL: f64 = 1e-10;

/// Eigendecomposition of a symmetric matrix.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues sorted in
/// descending order and eigenvectors as orthonormal columns, so that
/// `m ξᵢ = λᵢ ξᵢ`. The input is symmetrized as `(m + mᵀ)/2` first; an
/// asymmetry above 1e-10 relative is an error.
pub fn sym_eig(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if m.rows() != m.cols() {
        return Err(Error::DimensionMismatch(
            "sym_eig requires a square matrix".into(),
        ));
    }
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let n = m.rows();
    let mut a = symmetrize(m);
    let mut q = Matrix::identity(n);
    let norm = a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for r in (p + 1)..n {
                off += 2.0 * a.get(p, r) * a.get(p, r);
            }
        }
        if off.sqrt() <= JACOBI_TOL * norm || norm == 0.0 {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for r in (p + 1)..n {
                let apq = a.get(p, r);
                if apq == 0.0 {
                    continue;
                }
                // Rotation angle that annihilates a[p][r].
                let theta = 0.5 * (a.get(r, r) - a.get(p, p)) / apq;
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, r);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, r, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(r, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(r, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let qkp = q.get(k, p);
                    let qkq = q.get(k, r);
                    q.set(k, p, c * qkp - s * qkq);
                    q.set(k, r, s * qkp + c * qkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.col_mut(dst).copy_from_slice(q.col(src));
    }
    Ok((eigenvalues, vectors))
}

/// Singular values of an arbitrary matrix, descending.
///
/// Computed as `σᵢ = √max(λᵢ, 0)` from the eigenvalues of `mᵀm`, which
/// is plenty for the small products that appear in subspace distances.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    let mtm = m.transpose().matmul(m);
    let (eigs, _) = sym_eig(&mtm)?;
    Ok(eigs.into_iter().map(|l| l.max(0.0).sqrt()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_matrix_sorted() {
        let m = Matrix::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 5.0, 0.0], &[0.0, 0.0, 3.0]]);
        let (eigs, _) = sym_eig(&m).unwrap();
        assert_eq!(eigs, vec![5.0, 3.0, 1.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1 with eigenvectors ±[1,1]/√2, ±[1,−1]/√2.
        let m = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let (eigs, vecs) = sym_eig(&m).unwrap();
        assert!((eigs[0] - 3.0).abs() < 1e-12);
        assert!((eigs[1] - 1.0).abs() < 1e-12);
        let s = 1.0 / 2.0_f64.sqrt();
        let v0 = vecs.col(0);
        assert!((v0[0].abs() - s).abs() < 1e-10 && (v0[1].abs() - s).abs() < 1e-10);
        assert!((v0[0] - v0[1]).abs() < 1e-10); // same sign components
        let v1 = vecs.col(1);
        assert!((v1[0] + v1[1]).abs() < 1e-10); // opposite sign components
    }

    fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let w = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let g = super::super::GramMatrix::identity(n);
        super::super::orth(&w, &g, super::super::OrthMode::ModifiedGramSchmidt).unwrap()
    }

    #[test]
    fn recovers_constructed_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 6;
        let q = random_orthogonal(n, &mut rng);
        let d = [9.0, 5.5, 3.0, 1.25, 0.5, 0.125];
        let mut dm = Matrix::zeros(n, n);
        for i in 0..n {
            dm.set(i, i, d[i]);
        }
        let m = q.matmul(&dm).matmul(&q.transpose());
        let (eigs, vecs) = sym_eig(&m).unwrap();
        for (got, want) in eigs.iter().zip(d.iter()) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        // Residual m·ξ = λ·ξ and reconstruction ‖m − XΛXᵀ‖.
        let norm = m.frobenius_norm();
        for k in 0..n {
            let mx = m.matvec(vecs.col(k));
            for i in 0..n {
                assert!((mx[i] - eigs[k] * vecs.get(i, k)).abs() < 1e-8 * norm);
            }
        }
        let mut lam = Matrix::zeros(n, n);
        for i in 0..n {
            lam.set(i, i, eigs[i]);
        }
        let back = vecs.matmul(&lam).matmul(&vecs.transpose());
        let mut diff = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                diff += (back.get(i, j) - m.get(i, j)).powi(2);
            }
        }
        assert!(diff.sqrt() < 1e-8 * norm);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(sym_eig(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn singular_values_identity() {
        let sv = singular_values(&Matrix::identity(4)).unwrap();
        for s in sv {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_values_closed_form() {
        // [[0,2],[1,0]] has singular values 2 and 1.
        let m = Matrix::from_rows(&[&[0.0, 2.0], &[1.0, 0.0]]);
        let sv = singular_values(&m).unwrap();
        assert!((sv[0] - 2.0).abs() < 1e-12);
        assert!((sv[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_values_zero_matrix() {
        let sv = singular_values(&Matrix::zeros(3, 2)).unwrap();
        assert_eq!(sv, vec![0.0, 0.0]);
    }
}
