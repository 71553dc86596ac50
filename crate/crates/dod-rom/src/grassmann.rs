//! Subspace geometry on the Grassmann manifold: the projection 2-norm
//! distance between spans, the adaptivity score of a parameter-dependent
//! basis, its Monte Carlo estimator, and the sample-size bound.

use crate::error::{dim_err, Result};
use crate::linalg::{orth, singular_values, GramMatrix, Matrix, OrthMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Two same-shape full-column-rank matrices whose spans are compared.
#[derive(Debug, Clone)]
pub struct SubspacePair {
    pub v: Matrix,
    pub w: Matrix,
}

impl SubspacePair {
    pub fn new(v: Matrix, w: Matrix) -> Result<Self> {
        if v.rows() != w.rows() || v.cols() != w.cols() {
            return Err(dim_err(format!(
                "subspace pair shapes {}x{} vs {}x{}",
                v.rows(),
                v.cols(),
                w.rows(),
                w.cols()
            )));
        }
        Ok(SubspacePair { v, w })
    }
}

/// Squared distances below this snap to zero: near `σ_min = 1` the
/// subtraction `1 − σ²` is pure round-off, so distances under 1e-6
/// cannot be resolved and are reported as exactly zero.
const DIST_SQ_FLOOR: f64 = 1e-12;

/// Projection 2-norm distance between `span(v)` and `span(w)`.
///
/// Both inputs are orthonormalized in the Euclidean sense, then
/// `d = √(1 − σ_min²)` where `σ_min` is the smallest singular value of
/// `ṼᵀW̃`. The result lies in `[0, 1]`, is symmetric, and depends only
/// on the spans. `σ_min` is clamped to `[0, 1]` so round-off slightly
/// above one cannot produce a NaN, and equal spans yield exactly zero.
pub fn grassmann_distance(pair: &SubspacePair) -> Result<f64> {
    let g = GramMatrix::identity(pair.v.rows());
    let vq = orth(&pair.v, &g, OrthMode::ModifiedGramSchmidt)?;
    let wq = orth(&pair.w, &g, OrthMode::ModifiedGramSchmidt)?;
    let product = vq.transpose().matmul(&wq);
    let sv = singular_values(&product)?;
    let sigma_min = sv.last().copied().unwrap_or(0.0).clamp(0.0, 1.0);
    let dist_sq = (1.0 - sigma_min * sigma_min).max(0.0);
    if dist_sq < DIST_SQ_FLOOR {
        return Ok(0.0);
    }
    Ok(dist_sq.sqrt())
}

/// Anything that maps a parameter vector to an inner basis
/// (`N_A × n`, full column rank). Trained models implement this, and so
/// do plain closures in tests.
pub trait InnerBasisMap {
    fn inner_basis(&self, mu: &[f64]) -> Result<Matrix>;
}

impl<F> InnerBasisMap for F
where
    F: Fn(&[f64]) -> Result<Matrix>,
{
    fn inner_basis(&self, mu: &[f64]) -> Result<Matrix> {
        self(mu)
    }
}

/// Draws i.i.d. parameter vectors.
pub trait ParamSampler {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
}

/// Uniform sampler over an axis-aligned box.
#[derive(Debug, Clone)]
pub struct UniformBox {
    pub bounds: Vec<(f64, f64)>,
}

impl UniformBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        assert!(bounds.iter().all(|(lo, hi)| lo <= hi), "empty box");
        UniformBox { bounds }
    }
}

impl ParamSampler for UniformBox {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        use rand::Rng;
        self.bounds
            .iter()
            .map(|&(lo, hi)| if lo == hi { lo } else { rng.gen_range(lo..hi) })
            .collect()
    }
}

/// Monte Carlo adaptivity estimate together with its sampling error.
#[derive(Debug, Clone)]
pub struct AdaptivityReport {
    /// `√(mean of d²)` over independent parameter pairs; 0 for a constant
    /// basis, approaching 1 only for a discontinuously adaptive one.
    pub score: f64,
    pub n_pairs: usize,
    /// Standard error of the mean of the squared distances
    /// (sample std of the d² values divided by √n_pairs).
    pub standard_error: f64,
}

/// Estimates the adaptivity score of a basis map by classical Monte
/// Carlo: draw `2·n_pairs` parameters, pair them up, and average the
/// squared subspace distances. Deterministic for a fixed seed; pair
/// evaluations accumulate in index order.
pub fn adaptivity_score(
    model: &dyn InnerBasisMap,
    mu_sampler: &dyn ParamSampler,
    n_pairs: usize,
    seed: u64,
) -> Result<AdaptivityReport> {
    if n_pairs == 0 {
        return Err(crate::error::Error::InvalidInput(
            "adaptivity_score needs at least one pair".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sq = Vec::with_capacity(n_pairs);
    for _ in 0..n_pairs {
        let mu_a = mu_sampler.draw(&mut rng);
        let mu_b = mu_sampler.draw(&mut rng);
        let va = model.inner_basis(&mu_a)?;
        let vb = model.inner_basis(&mu_b)?;
        let d = grassmann_distance(&SubspacePair::new(va, vb)?)?;
        sq.push(d * d);
    }
    let mean = sq.iter().sum::<f64>() / n_pairs as f64;
    let var = if n_pairs > 1 {
        sq.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n_pairs as f64 - 1.0)
    } else {
        0.0
    };
    Ok(AdaptivityReport {
        score: mean.max(0.0).sqrt(),
        n_pairs,
        standard_error: (var / n_pairs as f64).sqrt(),
    })
}

/// Number of Monte Carlo pairs guaranteeing `|Adpt − Adpt_MC| ≤ ε` with
/// probability `1 − δ`: `⌈δ⁻¹ ε⁻⁴ / 4⌉`.
pub fn required_pairs(delta: f64, epsilon: f64) -> Result<usize> {
    if !(0.0 < delta && delta < 1.0) || !(0.0 < epsilon && epsilon <= 1.0) {
        return Err(crate::error::Error::InvalidInput(format!(
            "required_pairs needs delta in (0,1) and epsilon in (0,1], got delta={delta}, epsilon={epsilon}"
        )));
    }
    Ok((1.0 / (4.0 * delta * epsilon.powi(4))).ceil() as usize)
}
