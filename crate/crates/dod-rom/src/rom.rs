//! Non-intrusive reduced order models on top of bases: the adaptive
//! basis paired with a segregated coefficient network, ambient-space
//! benchmark regressors, and the exact error-splitting diagnostics.

use crate::dod::DodModel;
use crate::error::{dim_err, Error, Result};
use crate::linalg::{dot, g_norm, OrthMode};
use crate::nets::{
    adam_step, AdamHyper, AdamState, DenseNet, NetSpec, Tape, DEFAULT_LEAKY_SLOPE,
};
use crate::pod::{AmbientBasis, SnapshotSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Coefficient map `φ(μ, ν) = diag[φ₁(μ)ᵀ φ₂(ν)]`, evaluated as the
/// Hadamard product of the two `m × n` net outputs followed by a
/// columnwise summation — the `m × m` product is never materialized.
#[derive(Debug, Clone)]
pub struct SegregatedNet {
    pub phi1: DenseNet,
    pub phi2: DenseNet,
    pub m: usize,
    pub n: usize,
}

impl SegregatedNet {
    pub fn new(phi1: DenseNet, phi2: DenseNet, m: usize, n: usize) -> Result<Self> {
        if phi1.output_dim() != m * n || phi2.output_dim() != m * n {
            return Err(dim_err(format!(
                "segregated nets must emit {}·{} = {} values, got {} and {}",
                m,
                n,
                m * n,
                phi1.output_dim(),
                phi2.output_dim()
            )));
        }
        Ok(SegregatedNet { phi1, phi2, m, n })
    }

    /// `output_j = Σ_k φ₁(μ)_{k,j} · φ₂(ν)_{k,j}` with both outputs read
    /// as `m × n` column-major stacks.
    pub fn eval(&self, mu: &[f64], nu: &[f64]) -> Result<Vec<f64>> {
        let a = self.phi1.forward(mu)?;
        let b = self.phi2.forward(nu)?;
        Ok((0..self.n)
            .map(|j| dot(&a[j * self.m..(j + 1) * self.m], &b[j * self.m..(j + 1) * self.m]))
            .collect())
    }

    pub fn param_count(&self) -> usize {
        self.phi1.param_count() + self.phi2.param_count()
    }
}

/// Standalone evaluation, mirroring [`SegregatedNet::eval`].
pub fn seg_eval(net: &SegregatedNet, mu: &[f64], nu: &[f64]) -> Result<Vec<f64>> {
    net.eval(mu, nu)
}

/// Shapes of the two segregated branches: `input ↦ hidden ↦ m·n`, with
/// an optional rotational-symmetry feature on the μ branch.
#[derive(Debug, Clone)]
pub struct SegregatedArch {
    pub phi1: NetSpec,
    pub phi2: NetSpec,
    pub m: usize,
    pub n: usize,
}

impl SegregatedArch {
    pub fn plain(p: usize, p_prime: usize, hidden: usize, m: usize, n: usize) -> Self {
        SegregatedArch {
            phi1: NetSpec::new(p)
                .dense(hidden)
                .leaky_relu(DEFAULT_LEAKY_SLOPE)
                .dense(m * n)
                .reshape(m, n),
            phi2: NetSpec::new(p_prime)
                .dense(hidden)
                .leaky_relu(DEFAULT_LEAKY_SLOPE)
                .dense(m * n)
                .reshape(m, n),
            m,
            n,
        }
    }

    pub fn build(&self, rng: &mut ChaCha8Rng) -> Result<SegregatedNet> {
        SegregatedNet::new(self.phi1.build(rng)?, self.phi2.build(rng)?, self.m, self.n)
    }
}

/// Adaptive-basis ROM: the basis model plus the coefficient network.
/// `coeff_orth_mode` records the orthonormalization the coefficient
/// targets were computed with; predictions must use the same mode, since
/// coefficients (unlike projections) depend on the ORTH block.
#[derive(Debug, Clone)]
pub struct DodNnModel {
    pub dod: DodModel,
    pub phi: SegregatedNet,
    pub coeff_orth_mode: OrthMode,
}

impl DodNnModel {
    /// Trainable parameters of the full ROM: inner basis module plus
    /// both coefficient branches (the ambient basis is data, not
    /// parameters).
    pub fn param_count(&self) -> usize {
        self.dod.param_count() + self.phi.param_count()
    }

    /// Full-order prediction `V_μ · φ(μ, ν)`, always inside the ambient
    /// span.
    pub fn predict(&self, mu: &[f64], nu: &[f64]) -> Result<Vec<f64>> {
        let basis = self.dod.eval_basis_with(mu, self.coeff_orth_mode)?;
        let coeff = self.phi.eval(mu, nu)?;
        Ok(basis.matvec(&coeff))
    }
}

#[derive(Debug, Clone)]
pub struct CoeffTrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for CoeffTrainConfig {
    fn default() -> Self {
        CoeffTrainConfig {
            epochs: 2000,
            learning_rate: 1e-2,
            seed: 0,
        }
    }
}

/// Fits the segregated coefficient network by mean-square regression on
/// the basis coefficients `c_{μᵢ,νᵢ} = V_μᵢᵀ G uᵢ`.
///
/// Targets are computed once with the Gram-Schmidt orthonormalization
/// (the training-time ORTH block) and cached; the returned model records
/// that mode and uses it at prediction time.
pub fn train_coefficients(
    dod: &DodModel,
    snaps: &SnapshotSet,
    arch: &SegregatedArch,
    cfg: &CoeffTrainConfig,
) -> Result<(DodNnModel, Vec<f64>)> {
    if arch.n != dod.n {
        return Err(dim_err(format!(
            "coefficient net emits {} components, basis rank is {}",
            arch.n, dod.n
        )));
    }
    let coeff_mode = OrthMode::ModifiedGramSchmidt;
    let targets: Vec<Vec<f64>> = (0..snaps.len())
        .map(|i| {
            dod.project_with(&snaps.mu_sample(i), snaps.snapshot(i), coeff_mode)
                .map(|(c, _)| c)
        })
        .collect::<Result<Vec<_>>>()?;
    let mus: Vec<Vec<f64>> = (0..snaps.len()).map(|i| snaps.mu_sample(i)).collect();
    let nus: Vec<Vec<f64>> = (0..snaps.len()).map(|i| snaps.nu_sample(i)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut phi = arch.build(&mut rng)?;
    let history = train_regression(
        &mut phi.phi1,
        &mut phi.phi2,
        Some((phi.m, phi.n)),
        &mus,
        &nus,
        &targets,
        cfg.epochs,
        cfg.learning_rate,
    )?;
    Ok((
        DodNnModel {
            dod: dod.clone(),
            phi,
            coeff_orth_mode: coeff_mode,
        },
        history,
    ))
}

/// Ambient-coefficient benchmark regressors: either one monolithic
/// network on the stacked parameter vector, or a segregated pair with
/// the ambient dimension as output.
#[derive(Debug, Clone)]
pub enum BenchmarkVariant {
    Monolithic(DenseNet),
    Segregated(SegregatedNet),
}

#[derive(Debug, Clone)]
pub struct BenchmarkModel {
    pub variant: BenchmarkVariant,
    pub ambient: AmbientBasis,
}

impl BenchmarkModel {
    pub fn param_count(&self) -> usize {
        match &self.variant {
            BenchmarkVariant::Monolithic(net) => net.param_count(),
            BenchmarkVariant::Segregated(net) => net.param_count(),
        }
    }

    /// `u ≈ A · φ(μ, ν)`.
    pub fn predict(&self, mu: &[f64], nu: &[f64]) -> Result<Vec<f64>> {
        let coeff = match &self.variant {
            BenchmarkVariant::Monolithic(net) => {
                let stacked: Vec<f64> = mu.iter().chain(nu).copied().collect();
                net.forward(&stacked)?
            }
            BenchmarkVariant::Segregated(net) => net.eval(mu, nu)?,
        };
        self.ambient.lift(&coeff)
    }
}

/// Monolithic benchmark shape `(p+p') ↦ h ↦ h ↦ N_A`.
pub fn benchmark_monolithic_arch(p: usize, p_prime: usize, hidden: usize, n_a: usize) -> NetSpec {
    NetSpec::new(p + p_prime)
        .dense(hidden)
        .leaky_relu(DEFAULT_LEAKY_SLOPE)
        .dense(hidden)
        .leaky_relu(DEFAULT_LEAKY_SLOPE)
        .dense(n_a)
}

/// Picks the hidden width of the monolithic benchmark so its parameter
/// count lands as close as possible to `target` (the full ROM's count).
pub fn monolithic_width_for_parity(p: usize, p_prime: usize, n_a: usize, target: usize) -> usize {
    let count = |h: usize| benchmark_monolithic_arch(p, p_prime, h, n_a).param_count_estimate();
    let mut best = (1usize, usize::MAX);
    for h in 1..2048 {
        let c = count(h);
        let gap = c.abs_diff(target);
        if gap < best.1 {
            best = (h, gap);
        }
        if c > 4 * target {
            break;
        }
    }
    best.0
}

/// Picks the hidden width of the segregated benchmark branches for
/// parameter parity.
pub fn segregated_width_for_parity(
    p: usize,
    p_prime: usize,
    m: usize,
    n_a: usize,
    target: usize,
) -> usize {
    let count = |h: usize| {
        SegregatedArch::plain(p, p_prime, h, m, n_a)
            .phi1
            .param_count_estimate()
            + SegregatedArch::plain(p, p_prime, h, m, n_a)
                .phi2
                .param_count_estimate()
    };
    let mut best = (1usize, usize::MAX);
    for h in 1..2048 {
        let c = count(h);
        let gap = c.abs_diff(target);
        if gap < best.1 {
            best = (h, gap);
        }
        if c > 4 * target {
            break;
        }
    }
    best.0
}

impl NetSpec {
    /// Parameter count implied by the architecture alone.
    pub fn param_count_estimate(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                crate::nets::LayerSpec::Dense { input, output } => input * output + output,
                _ => 0,
            })
            .sum()
    }
}

#[derive(Debug, Clone)]
pub enum BenchmarkArch {
    Monolithic(NetSpec),
    Segregated(SegregatedArch),
}

/// Trains a benchmark regressor on the ambient coefficients
/// `ũᵢ = AᵀG uᵢ` by mean-square Adam regression.
pub fn train_benchmark(
    ambient: &AmbientBasis,
    snaps: &SnapshotSet,
    arch: &BenchmarkArch,
    cfg: &CoeffTrainConfig,
) -> Result<(BenchmarkModel, Vec<f64>)> {
    let targets: Vec<Vec<f64>> = (0..snaps.len())
        .map(|i| ambient.project(snaps.snapshot(i)))
        .collect::<Result<Vec<_>>>()?;
    let mus: Vec<Vec<f64>> = (0..snaps.len()).map(|i| snaps.mu_sample(i)).collect();
    let nus: Vec<Vec<f64>> = (0..snaps.len()).map(|i| snaps.nu_sample(i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    match arch {
        BenchmarkArch::Monolithic(spec) => {
            if spec.output_dim() != ambient.dim() {
                return Err(dim_err(format!(
                    "benchmark must emit {} ambient coefficients, spec emits {}",
                    ambient.dim(),
                    spec.output_dim()
                )));
            }
            let mut net = spec.build(&mut rng)?;
            let stacked: Vec<Vec<f64>> = mus
                .iter()
                .zip(&nus)
                .map(|(m, n)| m.iter().chain(n).copied().collect())
                .collect();
            let history = train_single_regression(&mut net, &stacked, &targets, cfg)?;
            Ok((
                BenchmarkModel {
                    variant: BenchmarkVariant::Monolithic(net),
                    ambient: ambient.clone(),
                },
                history,
            ))
        }
        BenchmarkArch::Segregated(seg) => {
            if seg.n != ambient.dim() {
                return Err(dim_err(format!(
                    "segregated benchmark must emit {} ambient coefficients, arch emits {}",
                    ambient.dim(),
                    seg.n
                )));
            }
            let mut phi = seg.build(&mut rng)?;
            let history = train_regression(
                &mut phi.phi1,
                &mut phi.phi2,
                Some((phi.m, phi.n)),
                &mus,
                &nus,
                &targets,
                cfg.epochs,
                cfg.learning_rate,
            )?;
            Ok((
                BenchmarkModel {
                    variant: BenchmarkVariant::Segregated(phi),
                    ambient: ambient.clone(),
                },
                history,
            ))
        }
    }
}

/// Full-batch Adam on `(1/N) Σ |net(xᵢ) − tᵢ|²` for a single network.
fn train_single_regression(
    net: &mut DenseNet,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    cfg: &CoeffTrainConfig,
) -> Result<Vec<f64>> {
    let mut params = Vec::new();
    net.get_params(&mut params);
    let mut adam = AdamState::new(params.len());
    let hyper = AdamHyper::with_lr(cfg.learning_rate);
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        net.set_params(&params)?;
        let mut tape = Tape::new();
        let nodes = net.register_params(&mut tape);
        let mut losses = Vec::with_capacity(inputs.len());
        for (x, t) in inputs.iter().zip(targets) {
            let xn = tape.constant(x.clone());
            let tn = tape.constant(t.clone());
            let out = net.forward_on_tape(&mut tape, xn, &nodes)?;
            let resid = tape.sub_vec(out, tn)?;
            losses.push(tape.squared_norm(resid));
        }
        let loss_node = tape.mean_scalars(&losses);
        history.push(tape.scalar(loss_node));
        let grads = tape.backward(loss_node)?;
        adam_step(&mut params, &grads, &mut adam, &hyper)?;
    }
    net.set_params(&params)?;
    Ok(history)
}

/// Full-batch Adam on the segregated combination of two branch nets.
#[allow(clippy::too_many_arguments)]
fn train_regression(
    phi1: &mut DenseNet,
    phi2: &mut DenseNet,
    seg_shape: Option<(usize, usize)>,
    mus: &[Vec<f64>],
    nus: &[Vec<f64>],
    targets: &[Vec<f64>],
    epochs: usize,
    learning_rate: f64,
) -> Result<Vec<f64>> {
    let (m, n) = seg_shape.expect("segregated shape required");
    let mut params = Vec::new();
    phi1.get_params(&mut params);
    phi2.get_params(&mut params);
    let split = phi1.param_count();
    let mut adam = AdamState::new(params.len());
    let hyper = AdamHyper::with_lr(learning_rate);
    let mut history = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        phi1.set_params(&params[..split])?;
        phi2.set_params(&params[split..])?;
        let mut tape = Tape::new();
        let nodes1 = phi1.register_params(&mut tape);
        let nodes2 = phi2.register_params(&mut tape);
        let mut losses = Vec::with_capacity(mus.len());
        for i in 0..mus.len() {
            let xm = tape.constant(mus[i].clone());
            let xn = tape.constant(nus[i].clone());
            let a = phi1.forward_on_tape(&mut tape, xm, &nodes1)?;
            let b = phi2.forward_on_tape(&mut tape, xn, &nodes2)?;
            let out = tape.seg_diag(a, b, m, n)?;
            let tn = tape.constant(targets[i].clone());
            let resid = tape.sub_vec(out, tn)?;
            losses.push(tape.squared_norm(resid));
        }
        let loss_node = tape.mean_scalars(&losses);
        history.push(tape.scalar(loss_node));
        let grads = tape.backward(loss_node)?;
        adam_step(&mut params, &grads, &mut adam, &hyper)?;
    }
    phi1.set_params(&params[..split])?;
    phi2.set_params(&params[split..])?;
    Ok(history)
}

/// Squared-error decomposition of a full ROM over a test set:
/// `total² = ambient² + basis² + coeff²`, reported together with the
/// residual of that identity.
#[derive(Debug, Clone)]
pub struct ErrorDecomposition {
    /// Mean squared ambient residual `‖u − A AᵀG u‖²`.
    pub ambient_sq: f64,
    /// Mean squared inner projection residual `|ũ − Ṽ Ṽᵀ ũ|²`.
    pub dod_sq: f64,
    /// Mean squared coefficient error `|c − φ(μ, ν)|²`.
    pub coeff_sq: f64,
    /// Mean squared total error `‖u − u_ROM‖²`.
    pub total_sq: f64,
    /// `|total² − (ambient² + dod² + coeff²)|`.
    pub identity_residual: f64,
}

/// Computes the three error sources of an adaptive-basis ROM and checks
/// the exact splitting identity.
pub fn error_decomposition(model: &DodNnModel, test: &SnapshotSet) -> Result<ErrorDecomposition> {
    let g = &test.g;
    let mut ambient_sq = 0.0;
    let mut dod_sq = 0.0;
    let mut coeff_sq = 0.0;
    let mut total_sq = 0.0;
    for i in 0..test.len() {
        let u = test.snapshot(i);
        let mu = test.mu_sample(i);
        let nu = test.nu_sample(i);

        let ambient_recon = model.dod.ambient.reconstruct(u)?;
        let ambient_resid: Vec<f64> = u.iter().zip(&ambient_recon).map(|(a, b)| a - b).collect();
        ambient_sq += g_norm(&ambient_resid, g)?.powi(2);

        let projected = model.dod.ambient.project(u)?;
        let inner = model.dod.eval_inner_with(&mu, model.coeff_orth_mode)?;
        let inner_c = inner.tr_matvec(&projected);
        let inner_recon = inner.matvec(&inner_c);
        dod_sq += projected
            .iter()
            .zip(&inner_recon)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();

        let (c, _) = model.dod.project_with(&mu, u, model.coeff_orth_mode)?;
        let phi = model.phi.eval(&mu, &nu)?;
        coeff_sq += c
            .iter()
            .zip(&phi)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();

        let pred = model.predict(&mu, &nu)?;
        let total_resid: Vec<f64> = u.iter().zip(&pred).map(|(a, b)| a - b).collect();
        total_sq += g_norm(&total_resid, g)?.powi(2);
    }
    let len = test.len() as f64;
    ambient_sq /= len;
    dod_sq /= len;
    coeff_sq /= len;
    total_sq /= len;
    Ok(ErrorDecomposition {
        ambient_sq,
        dod_sq,
        coeff_sq,
        total_sq,
        identity_residual: (total_sq - (ambient_sq + dod_sq + coeff_sq)).abs(),
    })
}

/// Anything that predicts a full-order vector from (μ, ν).
pub trait RomPredictor {
    fn rom_predict(&self, mu: &[f64], nu: &[f64]) -> Result<Vec<f64>>;
}

impl RomPredictor for DodNnModel {
    fn rom_predict(&self, mu: &[f64], nu: &[f64]) -> Result<Vec<f64>> {
        self.predict(mu, nu)
    }
}

impl RomPredictor for BenchmarkModel {
    fn rom_predict(&self, mu: &[f64], nu: &[f64]) -> Result<Vec<f64>> {
        self.predict(mu, nu)
    }
}

/// Mean relative G-norm error of a ROM over a test set.
pub fn mre(model: &dyn RomPredictor, test: &SnapshotSet) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..test.len() {
        let u = test.snapshot(i);
        let unorm = g_norm(u, &test.g)?;
        if unorm == 0.0 {
            return Err(Error::DegenerateSample { index: i });
        }
        let pred = model.rom_predict(&test.mu_sample(i), &test.nu_sample(i))?;
        let diff: Vec<f64> = u.iter().zip(&pred).map(|(a, b)| a - b).collect();
        acc += g_norm(&diff, &test.g)? / unorm;
    }
    Ok(acc / test.len() as f64)
}
