//! Analytic synthetic parametric problems with exactly known slice
//! structure: every μ-slice of the solution manifold is an exact
//! two-dimensional subspace, while the manifold as a whole is not.
//! Ground truth is closed-form, so desk-scale runs need no PDE solver.

use crate::error::{Error, Result};
use crate::grassmann::{ParamSampler, UniformBox};
use crate::linalg::{g_norm, GramMatrix, Matrix};
use crate::pod::{build_ambient, numerical_rank, SnapshotSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Uniform grid over an interval or a square.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "dim")]
pub enum GridSpec {
    #[serde(rename = "1")]
    OneD { points: usize, extent: (f64, f64) },
    #[serde(rename = "2")]
    TwoD {
        nx: usize,
        ny: usize,
        extent: (f64, f64),
    },
}

impl GridSpec {
    pub fn n_points(&self) -> usize {
        match self {
            GridSpec::OneD { points, .. } => *points,
            GridSpec::TwoD { nx, ny, .. } => nx * ny,
        }
    }

    pub fn space_dim(&self) -> usize {
        match self {
            GridSpec::OneD { .. } => 1,
            GridSpec::TwoD { .. } => 2,
        }
    }

    pub fn width(&self) -> f64 {
        match self {
            GridSpec::OneD { extent, .. } | GridSpec::TwoD { extent, .. } => extent.1 - extent.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            GridSpec::OneD { points, extent } => *points >= 16 && extent.1 > extent.0,
            GridSpec::TwoD { nx, ny, extent } => *nx >= 16 && *ny >= 16 && extent.1 > extent.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(
                "grid needs at least 16 points per axis and a nonempty extent".into(),
            ))
        }
    }

    /// Grid node coordinates; 2D nodes are ordered x-fastest.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        match self {
            GridSpec::OneD { points, extent } => {
                let h = (extent.1 - extent.0) / (*points as f64 - 1.0);
                (0..*points).map(|i| vec![extent.0 + h * i as f64]).collect()
            }
            GridSpec::TwoD { nx, ny, extent } => {
                let hx = (extent.1 - extent.0) / (*nx as f64 - 1.0);
                let hy = (extent.1 - extent.0) / (*ny as f64 - 1.0);
                let mut out = Vec::with_capacity(nx * ny);
                for iy in 0..*ny {
                    for ix in 0..*nx {
                        out.push(vec![extent.0 + hx * ix as f64, extent.0 + hy * iy as f64]);
                    }
                }
                out
            }
        }
    }

    /// Trapezoidal quadrature weights (diagonal Gram matrix entries):
    /// the discrete stand-in for the L² inner product on the grid.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        fn axis(n: usize, h: f64) -> Vec<f64> {
            (0..n)
                .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
                .collect()
        }
        match self {
            GridSpec::OneD { points, extent } => {
                axis(*points, (extent.1 - extent.0) / (*points as f64 - 1.0))
            }
            GridSpec::TwoD { nx, ny, extent } => {
                let wx = axis(*nx, (extent.1 - extent.0) / (*nx as f64 - 1.0));
                let wy = axis(*ny, (extent.1 - extent.0) / (*ny as f64 - 1.0));
                let mut out = Vec::with_capacity(nx * ny);
                for y in &wy {
                    for x in &wx {
                        out.push(x * y);
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// `u(x; μ, ν) = ν₁·exp(−‖x−c₁(μ)‖²/σ²) + ν₂·exp(−‖x−c₂(μ)‖²/σ²)`
    /// with centers moving along circle arcs as μ varies and
    /// `σ = 0.1 ·` domain width. Every μ-slice is exactly 2-dimensional.
    ModalSuperposition,
    /// `u(x; μ, ν) = ν₁·‖x − μ‖₂ + ν₂`: straight-ray travel time from a
    /// point source at μ under unit speed, plus an offset. Every μ-slice
    /// is exactly 2-dimensional.
    TravelTime,
}

/// A fully specified synthetic problem: grid, parameter boxes, and the
/// quadrature-weighted inner product.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticProblem {
    pub kind: ProblemKind,
    pub grid: GridSpec,
    /// Bounds for μ, one `(lo, hi)` pair per component.
    pub theta_box: Vec<(f64, f64)>,
    /// Bounds for ν.
    pub theta_prime_box: Vec<(f64, f64)>,
}

impl SyntheticProblem {
    pub fn new(
        kind: ProblemKind,
        grid: GridSpec,
        theta_box: Vec<(f64, f64)>,
        theta_prime_box: Vec<(f64, f64)>,
    ) -> Result<Self> {
        grid.validate()?;
        if theta_box.is_empty() || theta_prime_box.is_empty() {
            return Err(Error::InvalidInput("parameter boxes must be nonempty".into()));
        }
        if theta_box.iter().chain(&theta_prime_box).any(|(lo, hi)| lo > hi) {
            return Err(Error::InvalidInput("box bounds out of order".into()));
        }
        let expected_p = match kind {
            ProblemKind::ModalSuperposition => 1,
            ProblemKind::TravelTime => grid.space_dim(),
        };
        if theta_box.len() != expected_p {
            return Err(Error::InvalidInput(format!(
                "{kind:?} expects {expected_p} μ-components, got {}",
                theta_box.len()
            )));
        }
        if theta_prime_box.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "ν must have 2 components, got {}",
                theta_prime_box.len()
            )));
        }
        Ok(SyntheticProblem {
            kind,
            grid,
            theta_box,
            theta_prime_box,
        })
    }

    /// Default 1D instance on 256 points, sized for fast test runs.
    pub fn modal_superposition_1d() -> Self {
        SyntheticProblem::new(
            ProblemKind::ModalSuperposition,
            GridSpec::OneD {
                points: 256,
                extent: (0.0, 1.0),
            },
            vec![(0.0, 1.0)],
            vec![(0.25, 2.0), (0.25, 2.0)],
        )
        .unwrap()
    }

    /// Default 2D instance on a 48×48 grid, sized for benchmark runs.
    pub fn modal_superposition_2d() -> Self {
        SyntheticProblem::new(
            ProblemKind::ModalSuperposition,
            GridSpec::TwoD {
                nx: 48,
                ny: 48,
                extent: (0.0, 1.0),
            },
            vec![(0.0, 1.0)],
            vec![(0.25, 2.0), (0.25, 2.0)],
        )
        .unwrap()
    }

    /// Default 1D travel-time instance.
    pub fn travel_time_1d() -> Self {
        SyntheticProblem::new(
            ProblemKind::TravelTime,
            GridSpec::OneD {
                points: 256,
                extent: (0.0, 1.0),
            },
            vec![(0.2, 0.8)],
            vec![(0.5, 2.0), (0.25, 1.0)],
        )
        .unwrap()
    }

    /// Default 2D travel-time instance.
    pub fn travel_time_2d() -> Self {
        SyntheticProblem::new(
            ProblemKind::TravelTime,
            GridSpec::TwoD {
                nx: 48,
                ny: 48,
                extent: (0.0, 1.0),
            },
            vec![(0.25, 0.75), (0.25, 0.75)],
            vec![(0.5, 2.0), (0.25, 1.0)],
        )
        .unwrap()
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "modal-1d" => Ok(Self::modal_superposition_1d()),
            "modal-2d" => Ok(Self::modal_superposition_2d()),
            "travel-1d" => Ok(Self::travel_time_1d()),
            "travel-2d" => Ok(Self::travel_time_2d()),
            other => Err(Error::UnknownPreset(other.into())),
        }
    }

    pub fn n_dof(&self) -> usize {
        self.grid.n_points()
    }

    pub fn p(&self) -> usize {
        self.theta_box.len()
    }

    pub fn p_prime(&self) -> usize {
        self.theta_prime_box.len()
    }

    /// Diagonal Gram matrix of trapezoidal quadrature weights.
    pub fn gram(&self) -> GramMatrix {
        GramMatrix::diagonal(self.grid.trapezoid_weights()).expect("positive weights")
    }

    pub fn mu_sampler(&self) -> UniformBox {
        UniformBox::new(self.theta_box.clone())
    }

    pub fn nu_sampler(&self) -> UniformBox {
        UniformBox::new(self.theta_prime_box.clone())
    }

    fn check_in_box(params: &[f64], bounds: &[(f64, f64)]) -> Result<()> {
        if params.len() != bounds.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} parameter components, got {}",
                bounds.len(),
                params.len()
            )));
        }
        const SLACK: f64 = 1e-12;
        for (k, (&v, &(lo, hi))) in params.iter().zip(bounds).enumerate() {
            if !(v >= lo - SLACK && v <= hi + SLACK) {
                return Err(Error::OutOfBox {
                    component: k,
                    value: v,
                });
            }
        }
        Ok(())
    }

    /// Gaussian centers for the modal superposition: two points moving
    /// along circle arcs, never coinciding over the μ-box.
    fn modal_centers(&self, mu: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = self.theta_box[0];
        let t = if hi > lo { (mu[0] - lo) / (hi - lo) } else { 0.0 };
        let (a, b) = match &self.grid {
            GridSpec::OneD { extent, .. } | GridSpec::TwoD { extent, .. } => *extent,
        };
        let mid = 0.5 * (a + b);
        let radius = 0.25 * (b - a);
        match self.grid.space_dim() {
            1 => {
                // Projected arc: angles stay in [0, π/3] so the two
                // centers keep a separation of at least one radius.
                let theta = std::f64::consts::FRAC_PI_3 * t;
                (
                    vec![mid + radius * theta.cos()],
                    vec![mid - radius * theta.sin()],
                )
            }
            _ => {
                let theta = std::f64::consts::PI * t;
                (
                    vec![mid + radius * theta.cos(), mid + radius * theta.sin()],
                    vec![mid - radius * theta.cos(), mid - radius * theta.sin()],
                )
            }
        }
    }

    /// The two μ-dependent slice generators: the snapshot at (μ, ν) is
    /// exactly `ν₁·f₁ + ν₂·f₂`.
    pub fn slice_generators(&self, mu: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        Self::check_in_box(mu, &self.theta_box)?;
        let nodes = self.grid.nodes();
        match self.kind {
            ProblemKind::ModalSuperposition => {
                let sigma = 0.1 * self.grid.width();
                let (c1, c2) = self.modal_centers(mu);
                let bump = |c: &[f64]| -> Vec<f64> {
                    nodes
                        .iter()
                        .map(|x| {
                            let d2: f64 =
                                x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                            (-d2 / (sigma * sigma)).exp()
                        })
                        .collect()
                };
                Ok((bump(&c1), bump(&c2)))
            }
            ProblemKind::TravelTime => {
                let dist: Vec<f64> = nodes
                    .iter()
                    .map(|x| {
                        x.iter()
                            .zip(mu)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .collect();
                let ones = vec![1.0; nodes.len()];
                Ok((dist, ones))
            }
        }
    }

    /// Evaluates the parameter-to-solution map at (μ, ν).
    pub fn evaluate(&self, mu: &[f64], nu: &[f64]) -> Result<Vec<f64>> {
        Self::check_in_box(nu, &self.theta_prime_box)?;
        let (f1, f2) = self.slice_generators(mu)?;
        Ok(f1
            .iter()
            .zip(&f2)
            .map(|(a, b)| nu[0] * a + nu[1] * b)
            .collect())
    }

    /// Draws train and test snapshot sets from disjoint, seeded RNG
    /// streams: identical seeds reproduce identical datasets.
    pub fn sample_dataset(
        &self,
        n_train: usize,
        n_test: usize,
        seed: u64,
    ) -> Result<(SnapshotSet, SnapshotSet)> {
        if n_train == 0 || n_test == 0 {
            return Err(Error::InvalidInput(
                "sample_dataset needs at least one train and one test sample".into(),
            ));
        }
        let train = self.sample_stream(n_train, seed, 1)?;
        let test = self.sample_stream(n_test, seed, 2)?;
        Ok((train, test))
    }

    fn sample_stream(&self, n: usize, seed: u64, stream: u64) -> Result<SnapshotSet> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mu_sampler = self.mu_sampler();
        let nu_sampler = self.nu_sampler();
        let mut mus = Vec::with_capacity(n);
        let mut nus = Vec::with_capacity(n);
        let mut cols = Vec::with_capacity(n);
        for _ in 0..n {
            let mu = mu_sampler.draw(&mut rng);
            let nu = nu_sampler.draw(&mut rng);
            cols.push(self.evaluate(&mu, &nu)?);
            mus.push(mu);
            nus.push(nu);
        }
        let mu = Matrix::from_fn(n, self.p(), |i, j| mus[i][j]);
        let nu = Matrix::from_fn(n, self.p_prime(), |i, j| nus[i][j]);
        let u = Matrix::from_columns(&cols);
        SnapshotSet::new(mu, nu, u, self.gram())
    }

    /// Per-rank projection errors of the μ-slice at fixed μ: sample
    /// `n_probe` values of ν, build the slice POD, and report the MRPE
    /// of the rank-k projection for k = 1..n_max (truncated at the
    /// slice's numerical rank).
    pub fn slice_width_estimate(
        &self,
        mu: &[f64],
        n_probe: usize,
        n_max: usize,
        seed: u64,
    ) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(3);
        let nu_sampler = self.nu_sampler();
        let mut cols = Vec::with_capacity(n_probe);
        let mut nus = Vec::with_capacity(n_probe);
        for _ in 0..n_probe {
            let nu = nu_sampler.draw(&mut rng);
            cols.push(self.evaluate(mu, &nu)?);
            nus.push(nu);
        }
        let mu_mat = Matrix::from_fn(n_probe, self.p(), |_, j| mu[j]);
        let nu_mat = Matrix::from_fn(n_probe, self.p_prime(), |i, j| nus[i][j]);
        let u = Matrix::from_columns(&cols);
        let snaps = SnapshotSet::new(mu_mat, nu_mat, u, self.gram())?;
        per_rank_mrpe(&snaps, n_max)
    }
}

/// MRPE of the nested POD projections of `snaps` at ranks `1..=n_max`,
/// truncated to the numerical rank of the stack. The rank-k residual is
/// formed by explicit mode subtraction, which keeps near-exact
/// projections accurate to round-off.
pub fn per_rank_mrpe(snaps: &SnapshotSet, n_max: usize) -> Result<Vec<f64>> {
    let rank = numerical_rank(snaps)?.min(n_max).max(1);
    let basis = build_ambient(snaps, rank)?;
    let mut out = vec![0.0; rank];
    for i in 0..snaps.len() {
        let u = snaps.snapshot(i);
        let unorm = g_norm(u, &snaps.g)?;
        if unorm == 0.0 {
            return Err(Error::DegenerateSample { index: i });
        }
        let c = basis.project(u)?;
        let mut residual = u.to_vec();
        for (k, ck) in c.iter().enumerate() {
            let mode = basis.a.col(k);
            for (r, &m) in residual.iter_mut().zip(mode) {
                *r -= ck * m;
            }
            out[k] += g_norm(&residual, &snaps.g)? / unorm;
        }
    }
    for v in &mut out {
        *v /= snaps.len() as f64;
    }
    Ok(out)
}
