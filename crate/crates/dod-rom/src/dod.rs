//! The adaptive-basis model: a seed network feeding `n` root networks
//! whose stacked outputs are orthonormalized and lifted through the
//! ambient basis, `V_μ = A · ORTH([R₁(s_μ), …, R_n(s_μ)])`, together
//! with its reconstruction-loss training loop.

use crate::error::{dim_err, Error, Result};
use crate::grassmann::InnerBasisMap;
use crate::linalg::{g_norm, orth, GramMatrix, Matrix, OrthMode};
use crate::nets::{adam_step, gram_schmidt_diff, AdamHyper, AdamState, DenseNet, SeedRootArch, Tape};
use crate::pod::{AmbientBasis, SnapshotSet};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Training aborts after this many consecutive rejected steps
/// (root collapse or non-finite gradients).
const MAX_CONSECUTIVE_SKIPS: usize = 50;

/// Parameter-adaptive G-orthonormal basis of rank `n`.
///
/// Evaluation maps `μ` to an `N_h × n` matrix with `V_μᵀ G V_μ = I`.
/// The inner module output is Euclidean-orthonormal in ambient
/// coordinates; lifting through the ambient basis preserves
/// orthonormality in the G inner product.
#[derive(Debug, Clone)]
pub struct DodModel {
    pub ambient: AmbientBasis,
    pub seed: DenseNet,
    pub roots: Vec<DenseNet>,
    pub orth_mode: OrthMode,
    pub n: usize,
}

impl DodModel {
    /// Assembles a freshly initialized model. Inference defaults to the
    /// reduced QR orthonormalization; training always runs the
    /// differentiable Gram-Schmidt, and the two agree span-wise.
    pub fn new_random(
        ambient: AmbientBasis,
        arch: &SeedRootArch,
        n: usize,
        init_seed: u64,
    ) -> Result<Self> {
        if n < 1 || n > ambient.dim() {
            return Err(Error::InvalidInput(format!(
                "reduced dimension {n} must lie in 1..={}",
                ambient.dim()
            )));
        }
        if arch.root.output_dim() != ambient.dim() {
            return Err(dim_err(format!(
                "root output {} must match ambient dimension {}",
                arch.root.output_dim(),
                ambient.dim()
            )));
        }
        if arch.seed.output_dim() != arch.root.input_dim {
            return Err(dim_err(format!(
                "seed output {} must match root input {}",
                arch.seed.output_dim(),
                arch.root.input_dim
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(init_seed);
        let seed = arch.seed.build(&mut rng)?;
        let roots = (0..n)
            .map(|_| arch.root.build(&mut rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(DodModel {
            ambient,
            seed,
            roots,
            orth_mode: OrthMode::HouseholderQR,
            n,
        })
    }

    pub fn param_dim(&self) -> usize {
        self.seed.input_dim()
    }

    /// Trainable parameter count of the inner module (seed + roots).
    pub fn param_count(&self) -> usize {
        self.seed.param_count() + self.roots.iter().map(|r| r.param_count()).sum::<usize>()
    }

    /// Flattened parameters: seed first, then each root in order.
    pub fn get_params(&self, out: &mut Vec<f64>) {
        self.seed.get_params(out);
        for root in &self.roots {
            root.get_params(out);
        }
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(dim_err(format!(
                "set_params: got {}, model has {}",
                params.len(),
                self.param_count()
            )));
        }
        let mut off = self.seed.param_count();
        self.seed.set_params(&params[..off])?;
        for root in &mut self.roots {
            let n = root.param_count();
            root.set_params(&params[off..off + n])?;
            off += n;
        }
        Ok(())
    }

    /// Raw root stack `[R₁(s_μ), …, R_n(s_μ)]` before orthonormalization.
    pub fn pre_orth_stack(&self, mu: &[f64]) -> Result<Matrix> {
        let features = self.seed.forward(mu)?;
        let cols = self
            .roots
            .iter()
            .map(|r| r.forward(&features))
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_columns(&cols))
    }

    /// Inner module `μ ↦ Ṽ_μ` with Euclidean-orthonormal columns
    /// (`N_A × n`), using the model's inference orthonormalization mode.
    pub fn eval_inner(&self, mu: &[f64]) -> Result<Matrix> {
        self.eval_inner_with(mu, self.orth_mode)
    }

    pub fn eval_inner_with(&self, mu: &[f64], mode: OrthMode) -> Result<Matrix> {
        let stack = self.pre_orth_stack(mu)?;
        let g = GramMatrix::identity(stack.rows());
        orth(&stack, &g, mode)
    }

    /// Full basis `V_μ = A Ṽ_μ` (`N_h × n`), G-orthonormal.
    pub fn eval_basis(&self, mu: &[f64]) -> Result<Matrix> {
        self.eval_basis_with(mu, self.orth_mode)
    }

    pub fn eval_basis_with(&self, mu: &[f64], mode: OrthMode) -> Result<Matrix> {
        let inner = self.eval_inner_with(mu, mode)?;
        Ok(self.ambient.a.matmul(&inner))
    }

    /// Coefficients and reconstruction of `u` in the μ-adapted basis:
    /// `c = V_μᵀ G u`, `û = V_μ c`. The residual is G-orthogonal to
    /// `span(V_μ)`.
    pub fn project(&self, mu: &[f64], u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.project_with(mu, u, self.orth_mode)
    }

    pub fn project_with(
        &self,
        mu: &[f64],
        u: &[f64],
        mode: OrthMode,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        if u.len() != self.ambient.full_dim() {
            return Err(dim_err(format!(
                "project: vector length {} vs space dimension {}",
                u.len(),
                self.ambient.full_dim()
            )));
        }
        let basis = self.eval_basis_with(mu, mode)?;
        let gu = self.ambient.g.apply(u);
        let coefficients = basis.tr_matvec(&gu);
        let reconstruction = basis.matvec(&coefficients);
        Ok((coefficients, reconstruction))
    }
}

impl InnerBasisMap for DodModel {
    fn inner_basis(&self, mu: &[f64]) -> Result<Matrix> {
        self.eval_inner(mu)
    }
}

/// Standalone projection, mirroring [`DodModel::project`].
pub fn dod_project(model: &DodModel, mu: &[f64], u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    model.project(mu, u)
}

/// Training configuration. The defaults are full-batch Adam with the
/// optimizer's stock hyperparameters.
#[derive(Debug, Clone)]
pub struct DodTrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// `None` runs full-batch.
    pub batch_size: Option<usize>,
    pub seed: u64,
    /// Fraction of the training set held out for checkpoint selection.
    pub validation_fraction: f64,
}

impl Default for DodTrainConfig {
    fn default() -> Self {
        DodTrainConfig {
            epochs: 2000,
            learning_rate: 1e-3,
            batch_size: None,
            seed: 0,
            validation_fraction: 0.1,
        }
    }
}

/// Per-epoch record of the training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub loss_history: Vec<f64>,
    pub val_history: Vec<f64>,
    pub best_epoch: usize,
    pub skipped_steps: usize,
}

/// Trains the inner module by minimizing the mean squared ambient-space
/// reconstruction error `(1/N) Σ |ũᵢ − Ṽ_μᵢ Ṽ_μᵢᵀ ũᵢ|²` with Adam,
/// where `ũᵢ = AᵀG uᵢ` are precomputed once.
///
/// A held-out validation split selects the checkpoint that is returned;
/// the ambient basis must come from the same snapshots. Rank-collapsed
/// or non-finite steps are skipped; fifty in a row abort the run.
pub fn train_dod(
    model: &mut DodModel,
    snaps: &SnapshotSet,
    cfg: &DodTrainConfig,
) -> Result<TrainReport> {
    if snaps.is_empty() {
        return Err(Error::InvalidInput("no training snapshots".into()));
    }
    if snaps.dim() != model.ambient.full_dim() {
        return Err(dim_err(format!(
            "snapshots have dimension {}, ambient expects {}",
            snaps.dim(),
            model.ambient.full_dim()
        )));
    }
    if snaps.mu.cols() != model.param_dim() {
        return Err(dim_err(format!(
            "mu has {} components, seed expects {}",
            snaps.mu.cols(),
            model.param_dim()
        )));
    }

    // Ambient projection, computed once for the whole run.
    let projected: Vec<Vec<f64>> = (0..snaps.len())
        .map(|i| model.ambient.project(snaps.snapshot(i)))
        .collect::<Result<Vec<_>>>()?;
    let mus: Vec<Vec<f64>> = (0..snaps.len()).map(|i| snaps.mu_sample(i)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut indices: Vec<usize> = (0..snaps.len()).collect();
    indices.shuffle(&mut rng);
    let n_val = ((snaps.len() as f64) * cfg.validation_fraction).floor() as usize;
    let (val_idx, train_idx) = indices.split_at(n_val);
    let train_idx: Vec<usize> = train_idx.to_vec();
    let val_idx: Vec<usize> = val_idx.to_vec();
    if train_idx.is_empty() {
        return Err(Error::InvalidInput(
            "validation split leaves no training samples".into(),
        ));
    }

    let mut params = Vec::new();
    model.get_params(&mut params);
    let mut adam = AdamState::new(params.len());
    let hyper = AdamHyper::with_lr(cfg.learning_rate);

    let mut loss_history = Vec::with_capacity(cfg.epochs);
    let mut val_history = Vec::with_capacity(cfg.epochs);
    let mut best = (0usize, f64::INFINITY, params.clone());
    let mut skipped_total = 0usize;
    let mut consecutive_skips = 0usize;
    let mut order = train_idx.clone();

    for epoch in 0..cfg.epochs {
        let batches: Vec<Vec<usize>> = match cfg.batch_size {
            None => vec![order.clone()],
            Some(bs) => {
                order.shuffle(&mut rng);
                order.chunks(bs.max(1)).map(|c| c.to_vec()).collect()
            }
        };
        let mut epoch_loss = 0.0;
        let mut epoch_samples = 0usize;
        for batch in batches {
            match batch_loss_and_grad(model, &params, &mus, &projected, &batch) {
                Ok((loss, grads)) => match adam_step(&mut params, &grads, &mut adam, &hyper) {
                    Ok(()) => {
                        consecutive_skips = 0;
                        epoch_loss += loss * batch.len() as f64;
                        epoch_samples += batch.len();
                    }
                    Err(Error::NonFiniteGradient { .. }) => {
                        skipped_total += 1;
                        consecutive_skips += 1;
                    }
                    Err(e) => return Err(e),
                },
                Err(Error::NearRankDeficient { .. }) => {
                    skipped_total += 1;
                    consecutive_skips += 1;
                }
                Err(e) => return Err(e),
            }
            if consecutive_skips >= MAX_CONSECUTIVE_SKIPS {
                return Err(Error::TrainingAborted {
                    skips: consecutive_skips,
                    epoch,
                });
            }
        }
        let train_loss = if epoch_samples > 0 {
            epoch_loss / epoch_samples as f64
        } else {
            f64::NAN
        };
        loss_history.push(train_loss);

        model.set_params(&params)?;
        let monitored = if val_idx.is_empty() {
            train_loss
        } else {
            inner_loss_on(model, &mus, &projected, &val_idx)?
        };
        val_history.push(monitored);
        if monitored < best.1 {
            best = (epoch, monitored, params.clone());
        }
    }

    model.set_params(&best.2)?;
    Ok(TrainReport {
        loss_history,
        val_history,
        best_epoch: best.0,
        skipped_steps: skipped_total,
    })
}

/// Mean ambient-space reconstruction loss of the model over a snapshot
/// set, together with its gradient with respect to the flattened
/// parameters — both computed on the differentiable training graph
/// (Gram-Schmidt path).
pub fn training_loss_and_grad(model: &DodModel, snaps: &SnapshotSet) -> Result<(f64, Vec<f64>)> {
    let projected: Vec<Vec<f64>> = (0..snaps.len())
        .map(|i| model.ambient.project(snaps.snapshot(i)))
        .collect::<Result<Vec<_>>>()?;
    let mus: Vec<Vec<f64>> = (0..snaps.len()).map(|i| snaps.mu_sample(i)).collect();
    let mut params = Vec::new();
    model.get_params(&mut params);
    let batch: Vec<usize> = (0..snaps.len()).collect();
    batch_loss_and_grad(model, &params, &mus, &projected, &batch)
}

/// Records the batch loss on a tape and returns `(loss, gradient)`.
/// The loss value corresponds to the *current* parameters.
fn batch_loss_and_grad(
    model: &DodModel,
    params: &[f64],
    mus: &[Vec<f64>],
    projected: &[Vec<f64>],
    batch: &[usize],
) -> Result<(f64, Vec<f64>)> {
    let mut scratch = model.clone();
    scratch.set_params(params)?;
    let mut tape = Tape::new();
    let seed_nodes = scratch.seed.register_params(&mut tape);
    let root_nodes: Vec<Vec<usize>> = scratch
        .roots
        .iter()
        .map(|r| r.register_params(&mut tape))
        .collect();
    let mut sample_losses = Vec::with_capacity(batch.len());
    for &i in batch {
        let x = tape.constant(mus[i].clone());
        let feat = scratch.seed.forward_on_tape(&mut tape, x, &seed_nodes)?;
        let cols = scratch
            .roots
            .iter()
            .zip(&root_nodes)
            .map(|(r, nodes)| r.forward_on_tape(&mut tape, feat, nodes))
            .collect::<Result<Vec<_>>>()?;
        let q = gram_schmidt_diff(&mut tape, &cols)?;
        let target = tape.constant(projected[i].clone());
        let coeff = tape.mat_tvec(q, target)?;
        let recon = tape.mat_vec(q, coeff)?;
        let resid = tape.sub_vec(target, recon)?;
        sample_losses.push(tape.squared_norm(resid));
    }
    let loss_node = tape.mean_scalars(&sample_losses);
    let loss = tape.scalar(loss_node);
    let grads = tape.backward(loss_node)?;
    Ok((loss, grads))
}

/// Mean inner-module reconstruction loss on the given sample indices,
/// computed on the inference path with the Gram-Schmidt mode (matching
/// the floats of the training graph).
fn inner_loss_on(
    model: &DodModel,
    mus: &[Vec<f64>],
    projected: &[Vec<f64>],
    idx: &[usize],
) -> Result<f64> {
    let mut acc = 0.0;
    for &i in idx {
        let inner = model.eval_inner_with(&mus[i], OrthMode::ModifiedGramSchmidt)?;
        let c = inner.tr_matvec(&projected[i]);
        let recon = inner.matvec(&c);
        acc += projected[i]
            .iter()
            .zip(&recon)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok(acc / idx.len() as f64)
}

/// Reconstruction loss on full vectors in the G-norm:
/// `(1/N) Σ ‖uᵢ − V_μᵢ V_μᵢᵀ G uᵢ‖²`.
pub fn loss_full(model: &DodModel, snaps: &SnapshotSet) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..snaps.len() {
        let (_, recon) = model.project(&snaps.mu_sample(i), snaps.snapshot(i))?;
        let diff: Vec<f64> = snaps
            .snapshot(i)
            .iter()
            .zip(&recon)
            .map(|(a, b)| a - b)
            .collect();
        acc += g_norm(&diff, &snaps.g)?.powi(2);
    }
    Ok(acc / snaps.len() as f64)
}

/// Reconstruction loss in ambient coordinates:
/// `(1/N) Σ |ũᵢ − Ṽ_μᵢ Ṽ_μᵢᵀ ũᵢ|²` with `ũᵢ = AᵀG uᵢ`.
///
/// For any model, `loss_full − loss_ambient` equals the ambient
/// residual energy of the data and is independent of the model.
pub fn loss_ambient(model: &DodModel, snaps: &SnapshotSet) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..snaps.len() {
        let projected = model.ambient.project(snaps.snapshot(i))?;
        let inner = model.eval_inner(&snaps.mu_sample(i))?;
        let c = inner.tr_matvec(&projected);
        let recon = inner.matvec(&c);
        acc += projected
            .iter()
            .zip(&recon)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok(acc / snaps.len() as f64)
}

/// Mean relative G-norm projection error of the adaptive basis over a
/// snapshot set.
pub fn dod_mrpe(model: &DodModel, snaps: &SnapshotSet) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..snaps.len() {
        let u = snaps.snapshot(i);
        let unorm = g_norm(u, &snaps.g)?;
        if unorm == 0.0 {
            return Err(Error::DegenerateSample { index: i });
        }
        let (_, recon) = model.project(&snaps.mu_sample(i), u)?;
        let diff: Vec<f64> = u.iter().zip(&recon).map(|(a, b)| a - b).collect();
        acc += g_norm(&diff, &snaps.g)? / unorm;
    }
    Ok(acc / snaps.len() as f64)
}
