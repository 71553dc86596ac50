//! Generalized POD under an arbitrary Gram inner product: ambient-space
//! construction by the method of snapshots, truncation diagnostics, and
//! projection errors.

use crate::error::{dim_err, Error, Result};
use crate::linalg::{g_norm, sym_eig, GramMatrix, Matrix};

/// Eigenvalues below `EIG_CLIP · λ₁` count as numerical null space and
/// cannot be retained: the `Λ^{-1/2}` scaling would blow up on them.
const EIG_CLIP: f64 = 1e-14;
/// Retaining a mode needs `λ_k > TRUNC_TOL · λ₁`.
const TRUNC_TOL: f64 = 1e-12;

/// Paired parameter samples and high-fidelity snapshot vectors.
///
/// `mu` is `N_samples × p`, `nu` is `N_samples × p'`, and `u` stacks the
/// snapshots as columns (`N_h × N_samples`).
#[derive(Debug, Clone)]
pub struct SnapshotSet {
    pub mu: Matrix,
    pub nu: Matrix,
    pub u: Matrix,
    pub g: GramMatrix,
}

impl SnapshotSet {
    pub fn new(mu: Matrix, nu: Matrix, u: Matrix, g: GramMatrix) -> Result<Self> {
        if mu.rows() != u.cols() || nu.rows() != u.cols() {
            return Err(dim_err(format!(
                "sample counts disagree: mu has {}, nu has {}, u has {}",
                mu.rows(),
                nu.rows(),
                u.cols()
            )));
        }
        if g.dim() != u.rows() {
            return Err(dim_err(format!(
                "snapshot dimension {} does not match Gram dimension {}",
                u.rows(),
                g.dim()
            )));
        }
        Ok(SnapshotSet { mu, nu, u, g })
    }

    pub fn len(&self) -> usize {
        self.u.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.u.rows()
    }

    pub fn mu_sample(&self, i: usize) -> Vec<f64> {
        self.mu.row(i)
    }

    pub fn nu_sample(&self, i: usize) -> Vec<f64> {
        self.nu.row(i)
    }

    pub fn snapshot(&self, i: usize) -> &[f64] {
        self.u.col(i)
    }

    /// Sub-set restricted to the given sample indices (order preserved).
    pub fn select(&self, indices: &[usize]) -> SnapshotSet {
        let mu = Matrix::from_fn(indices.len(), self.mu.cols(), |i, j| {
            self.mu.get(indices[i], j)
        });
        let nu = Matrix::from_fn(indices.len(), self.nu.cols(), |i, j| {
            self.nu.get(indices[i], j)
        });
        let u = Matrix::from_columns(&indices.iter().map(|&i| self.snapshot(i).to_vec()).collect::<Vec<_>>());
        SnapshotSet {
            mu,
            nu,
            u,
            g: self.g.clone(),
        }
    }
}

/// G-orthonormal basis spanning the leading POD modes of a snapshot set,
/// together with the retained spectrum and the energy lost to truncation.
#[derive(Debug, Clone)]
pub struct AmbientBasis {
    pub a: Matrix,
    pub g: GramMatrix,
    pub retained_eigenvalues: Vec<f64>,
    pub discarded_energy: f64,
}

impl AmbientBasis {
    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn full_dim(&self) -> usize {
        self.a.rows()
    }

    /// Ambient coordinates `ÃᵀGu`.
    pub fn project(&self, u: &[f64]) -> Result<Vec<f64>> {
        ambient_project(self, u)
    }

    /// Lift `c ↦ A·c` back to the high-fidelity space.
    pub fn lift(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.a.cols() {
            return Err(dim_err(format!(
                "lift: got {} coefficients for an ambient of dimension {}",
                coeffs.len(),
                self.a.cols()
            )));
        }
        Ok(self.a.matvec(coeffs))
    }

    /// Orthogonal reconstruction `A AᵀG u`.
    pub fn reconstruct(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.lift(&self.project(u)?)
    }
}

/// Builds the ambient space from snapshots: form the correlation matrix
/// `M = UᵀGU`, eigendecompose it, and set `A = U Ξ Λ^{-1/2}` keeping the
/// `n_a` leading modes.
///
/// Truncation must stay above the numerical null space
/// (`λ_{n_a} > 1e-12·λ₁`); otherwise the request exceeds the numerical
/// rank of the data and a `RankDeficient` error is returned.
pub fn build_ambient(snaps: &SnapshotSet, n_a: usize) -> Result<AmbientBasis> {
    let n = snaps.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty snapshot set".into()));
    }
    if n_a < 1 || n_a > n {
        return Err(Error::InvalidInput(format!(
            "ambient dimension {n_a} must lie in 1..={n}"
        )));
    }
    let correlation = correlation_matrix(snaps);
    let (eigs, vecs) = sym_eig(&correlation)?;
    let lambda1 = eigs[0].max(0.0);
    if lambda1 <= 0.0 {
        return Err(Error::RankDeficient { col: 0, pivot: 0.0 });
    }
    if eigs[n_a - 1] <= TRUNC_TOL * lambda1 || eigs[n_a - 1] <= EIG_CLIP * lambda1 {
        return Err(Error::RankDeficient {
            col: n_a - 1,
            pivot: eigs[n_a - 1],
        });
    }
    let mut a = Matrix::zeros(snaps.dim(), n_a);
    for k in 0..n_a {
        let scale = 1.0 / eigs[k].sqrt();
        let xi = vecs.col(k);
        let acol = a.col_mut(k);
        for (i, &w) in xi.iter().enumerate() {
            let ucol = snaps.u.col(i);
            let c = w * scale;
            for (av, &uv) in acol.iter_mut().zip(ucol) {
                *av += c * uv;
            }
        }
    }
    let discarded_energy = eigs[n_a..].iter().map(|&l| l.max(0.0)).sum();
    Ok(AmbientBasis {
        a,
        g: snaps.g.clone(),
        retained_eigenvalues: eigs[..n_a].to_vec(),
        discarded_energy,
    })
}

/// `M = UᵀGU`, the Gram matrix of the snapshots themselves.
fn correlation_matrix(snaps: &SnapshotSet) -> Matrix {
    let n = snaps.len();
    let gu: Vec<Vec<f64>> = (0..n).map(|i| snaps.g.apply(snaps.snapshot(i))).collect();
    Matrix::from_fn(n, n, |i, j| crate::linalg::dot(snaps.snapshot(i), &gu[j]))
}

/// Numerical rank of the snapshot set: eigenvalues above `1e-12·λ₁`.
pub fn numerical_rank(snaps: &SnapshotSet) -> Result<usize> {
    let (eigs, _) = sym_eig(&correlation_matrix(snaps))?;
    let lambda1 = eigs[0].max(0.0);
    if lambda1 <= 0.0 {
        return Ok(0);
    }
    Ok(eigs.iter().filter(|&&l| l > TRUNC_TOL * lambda1).count())
}

/// Ambient coordinates `AᵀGu`.
pub fn ambient_project(basis: &AmbientBasis, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != basis.a.rows() {
        return Err(dim_err(format!(
            "ambient_project: vector length {} vs space dimension {}",
            u.len(),
            basis.a.rows()
        )));
    }
    let gu = basis.g.apply(u);
    Ok(basis.a.tr_matvec(&gu))
}

/// Mean relative projection error over matching snapshot columns,
/// measured in the G-norm: `mean_i ‖uᵢ − ûᵢ‖ / ‖uᵢ‖`.
pub fn mrpe(reconstructions: &Matrix, truth: &Matrix, g: &GramMatrix) -> Result<f64> {
    if reconstructions.rows() != truth.rows() || reconstructions.cols() != truth.cols() {
        return Err(dim_err(format!(
            "mrpe: shapes {}x{} vs {}x{}",
            reconstructions.rows(),
            reconstructions.cols(),
            truth.rows(),
            truth.cols()
        )));
    }
    let mut acc = 0.0;
    for j in 0..truth.cols() {
        let t = truth.col(j);
        let r = reconstructions.col(j);
        let tnorm = g_norm(t, g)?;
        if tnorm == 0.0 {
            return Err(Error::DegenerateSample { index: j });
        }
        let diff: Vec<f64> = t.iter().zip(r).map(|(a, b)| a - b).collect();
        acc += g_norm(&diff, g)? / tnorm;
    }
    Ok(acc / truth.cols() as f64)
}

/// Total squared G-reconstruction error of a basis over a snapshot stack,
/// `Σᵢ ‖uᵢ − B BᵀG uᵢ‖²`. This is the quantity POD minimizes at fixed rank.
pub fn stack_sq_error(basis: &Matrix, snaps: &SnapshotSet) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..snaps.len() {
        let u = snaps.snapshot(i);
        let gu = snaps.g.apply(u);
        let c = basis.tr_matvec(&gu);
        let recon = basis.matvec(&c);
        let diff: Vec<f64> = u.iter().zip(&recon).map(|(a, b)| a - b).collect();
        total += g_norm(&diff, &snaps.g)?.powi(2);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{g_inner, orth, OrthMode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dummy_params(n: usize) -> (Matrix, Matrix) {
        (Matrix::zeros(n, 1), Matrix::zeros(n, 1))
    }

    fn random_snapshots(
        n_h: usize,
        n: usize,
        g: GramMatrix,
        rng: &mut ChaCha8Rng,
    ) -> SnapshotSet {
        let u = Matrix::from_fn(n_h, n, |_, _| rng.gen_range(-1.0..1.0));
        let (mu, nu) = dummy_params(n);
        SnapshotSet::new(mu, nu, u, g).unwrap()
    }

    #[test]
    fn orthogonal_snapshots_scaled() {
        let mut u = Matrix::zeros(4, 2);
        u.set(0, 0, 2.0);
        u.set(1, 1, 2.0);
        let (mu, nu) = dummy_params(2);
        let snaps = SnapshotSet::new(mu, nu, u, GramMatrix::identity(4)).unwrap();
        let amb = build_ambient(&snaps, 2).unwrap();
        // span(A) = span(e1, e2) and AᵀA = I.
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (g_inner(amb.a.col(i), amb.a.col(j), &amb.g).unwrap() - want).abs() < 1e-12
                );
            }
        }
        for j in 0..2 {
            assert!(amb.a.get(2, j).abs() < 1e-12);
            assert!(amb.a.get(3, j).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_single_mode() {
        let base = vec![1.0, 2.0, -1.0];
        let cols: Vec<Vec<f64>> = [1.0, -0.5, 2.0]
            .iter()
            .map(|&s| base.iter().map(|&x| s * x).collect())
            .collect();
        let u = Matrix::from_columns(&cols);
        let (mu, nu) = dummy_params(3);
        let g = GramMatrix::diagonal(vec![0.5, 1.0, 2.0]).unwrap();
        let snaps = SnapshotSet::new(mu, nu, u, g).unwrap();
        let amb = build_ambient(&snaps, 1).unwrap();
        // Single mode parallel to the snapshots, unit G-norm.
        let mode = amb.a.col(0);
        let cross = mode[0] * base[1] - mode[1] * base[0];
        assert!(cross.abs() < 1e-12);
        assert!((g_norm(mode, &amb.g).unwrap() - 1.0).abs() < 1e-12);
        // Requesting rank 2 from rank-1 data must fail.
        assert!(matches!(
            build_ambient(&snaps, 2),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn eigenvalue_tail_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let weights: Vec<f64> = (0..20).map(|_| rng.gen_range(0.5..1.5)).collect();
        let g = GramMatrix::diagonal(weights).unwrap();
        let snaps = random_snapshots(20, 8, g, &mut rng);
        let amb = build_ambient(&snaps, 5).unwrap();
        // Squared G-reconstruction error over the training stack equals
        // the truncated eigenvalue tail.
        let err = stack_sq_error(&amb.a, &snaps).unwrap();
        assert!(
            (err - amb.discarded_energy).abs() <= 1e-8 * amb.discarded_energy.max(1e-300),
            "err={err}, tail={}",
            amb.discarded_energy
        );
    }

    #[test]
    fn ambient_project_in_span_and_pythagoras() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = GramMatrix::diagonal((0..12).map(|_| rng.gen_range(0.5..2.0)).collect()).unwrap();
        let snaps = random_snapshots(12, 6, g, &mut rng);
        let amb = build_ambient(&snaps, 4).unwrap();

        // In-span idempotence: lift∘project reproduces u.
        let coeffs: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = amb.lift(&coeffs).unwrap();
        let back = amb.reconstruct(&u).unwrap();
        let unorm = g_norm(&u, &amb.g).unwrap();
        let diff: Vec<f64> = u.iter().zip(&back).map(|(a, b)| a - b).collect();
        assert!(g_norm(&diff, &amb.g).unwrap() <= 1e-9 * unorm);

        // G-orthogonal residual has zero coefficients.
        let v: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let recon = amb.reconstruct(&v).unwrap();
        let resid: Vec<f64> = v.iter().zip(&recon).map(|(a, b)| a - b).collect();
        for c in amb.project(&resid).unwrap() {
            assert!(c.abs() < 1e-10);
        }

        // Pythagoras in G: ‖u‖² = ‖u − AAᵀGu‖² + |AᵀGu|².
        let w: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = amb.project(&w).unwrap();
        let rec = amb.lift(&c).unwrap();
        let res: Vec<f64> = w.iter().zip(&rec).map(|(a, b)| a - b).collect();
        let lhs = g_norm(&w, &amb.g).unwrap().powi(2);
        let rhs = g_norm(&res, &amb.g).unwrap().powi(2) + crate::linalg::dot(&c, &c);
        assert!((lhs - rhs).abs() <= 1e-9 * lhs);
    }

    #[test]
    fn pod_beats_random_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = GramMatrix::diagonal((0..15).map(|_| rng.gen_range(0.5..2.0)).collect()).unwrap();
        let snaps = random_snapshots(15, 10, g.clone(), &mut rng);
        let amb = build_ambient(&snaps, 3).unwrap();
        let pod_err = stack_sq_error(&amb.a, &snaps).unwrap();
        for _ in 0..50 {
            let w = Matrix::from_fn(15, 3, |_, _| rng.gen_range(-1.0..1.0));
            let basis = orth(&w, &g, OrthMode::ModifiedGramSchmidt).unwrap();
            let err = stack_sq_error(&basis, &snaps).unwrap();
            assert!(pod_err <= err + 1e-10, "POD {pod_err} vs random {err}");
        }
    }

    #[test]
    fn nesting_of_leading_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = GramMatrix::identity(16);
        let snaps = random_snapshots(16, 7, g, &mut rng);
        let big = build_ambient(&snaps, 5).unwrap();
        let small = build_ambient(&snaps, 3).unwrap();
        for k in 0..3 {
            let a = big.a.col(k);
            let b = small.a.col(k);
            let sign = if crate::linalg::dot(a, b) >= 0.0 { 1.0 } else { -1.0 };
            for (x, y) in a.iter().zip(b) {
                assert!((x - sign * y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mrpe_edges() {
        let g = GramMatrix::identity(3);
        let truth = Matrix::from_columns(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0]]);
        assert_eq!(mrpe(&truth, &truth, &g).unwrap(), 0.0);
        let zeros = Matrix::zeros(3, 2);
        assert_eq!(mrpe(&zeros, &truth, &g).unwrap(), 1.0);
        // Hand-built columns with relative errors 0.1 and 0.3 average to 0.2.
        let recon = Matrix::from_columns(&[vec![0.9, 0.0, 0.0], vec![0.0, 1.4, 0.0]]);
        assert!((mrpe(&recon, &truth, &g).unwrap() - 0.2).abs() < 1e-12);
        // Zero-norm truth column is degenerate.
        let bad = Matrix::from_columns(&[vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]);
        assert!(matches!(
            mrpe(&zeros, &bad, &g),
            Err(Error::DegenerateSample { index: 1 })
        ));
    }

    #[test]
    fn empty_snapshot_set_rejected() {
        let (mu, nu) = dummy_params(1);
        let u = Matrix::zeros(4, 1);
        let snaps = SnapshotSet::new(mu, nu, u, GramMatrix::identity(4)).unwrap();
        // Zero snapshots cannot happen through the Matrix type (cols >= 1),
        // but a zero stack has no rank to retain.
        assert!(build_ambient(&snaps, 1).is_err());
    }
}
