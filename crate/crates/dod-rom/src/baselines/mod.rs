//! Comparison methods: global POD projection, clustered POD with
//! k-means, and a POD-enhanced autoencoder acting on ambient
//! coordinates.

mod kmeans;

pub use kmeans::kmeans;

use crate::error::{dim_err, Error, Result};
use crate::linalg::{g_norm, singular_values, GramMatrix, Matrix};
use crate::nets::{adam_step, AdamHyper, AdamState, DenseNet, Layer, NetSpec, Tape, DEFAULT_LEAKY_SLOPE};
use crate::pod::{build_ambient, numerical_rank, AmbientBasis, SnapshotSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dictionary of per-cluster POD bases with best-basis reconstruction.
#[derive(Debug, Clone)]
pub struct ClusteredPod {
    /// One G-orthonormal `N_h × n` basis per cluster.
    pub bases: Vec<Matrix>,
    /// Full-space cluster centroids (mean snapshot per cluster).
    pub centroids: Vec<Vec<f64>>,
    pub g: GramMatrix,
}

impl ClusteredPod {
    pub fn n_clusters(&self) -> usize {
        self.bases.len()
    }

    pub fn rank(&self) -> usize {
        self.bases[0].cols()
    }

    /// Best-basis reconstruction: evaluates the projection residual
    /// under every cluster basis and returns the minimizer's
    /// reconstruction; ties break toward the lowest cluster index.
    pub fn reconstruct(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for basis in &self.bases {
            let gu = self.g.apply(u);
            let c = basis.tr_matvec(&gu);
            let recon = basis.matvec(&c);
            let diff: Vec<f64> = u.iter().zip(&recon).map(|(a, b)| a - b).collect();
            let resid = g_norm(&diff, &self.g)?;
            if best.as_ref().map_or(true, |(b, _)| resid < *b) {
                best = Some((resid, recon));
            }
        }
        Ok(best.expect("at least one cluster").1)
    }

    /// Mean relative projection error over a snapshot set.
    pub fn mrpe(&self, snaps: &SnapshotSet) -> Result<f64> {
        let recon: Vec<Vec<f64>> = (0..snaps.len())
            .map(|i| self.reconstruct(snaps.snapshot(i)))
            .collect::<Result<Vec<_>>>()?;
        crate::pod::mrpe(&Matrix::from_columns(&recon), &snaps.u, &snaps.g)
    }
}

/// Clusters the snapshots by k-means and fits a rank-`n` POD basis per
/// cluster.
///
/// The k-means distance is Euclidean on the full-numerical-rank ambient
/// coordinates of the snapshots, which coincides with the G-distance on
/// the snapshots themselves up to the clipped null space. Clusters with
/// fewer than `n` members cannot support a rank-`n` POD and are an
/// error.
pub fn fit_clustered_pod(
    snaps: &SnapshotSet,
    c: usize,
    n: usize,
    seed: u64,
) -> Result<ClusteredPod> {
    if c < 1 {
        return Err(Error::InvalidInput("need at least one cluster".into()));
    }
    if c > snaps.len() {
        return Err(Error::InvalidInput(format!(
            "cannot form {c} clusters from {} snapshots",
            snaps.len()
        )));
    }
    let labels = if c == 1 {
        vec![0usize; snaps.len()]
    } else {
        let rank = numerical_rank(snaps)?;
        let coords_basis = build_ambient(snaps, rank)?;
        let coords: Vec<Vec<f64>> = (0..snaps.len())
            .map(|i| coords_basis.project(snaps.snapshot(i)))
            .collect::<Result<Vec<_>>>()?;
        let points = Matrix::from_columns(&coords);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        kmeans(&points, c, &mut rng).0
    };

    let mut bases = Vec::with_capacity(c);
    let mut centroids = Vec::with_capacity(c);
    for j in 0..c {
        let members: Vec<usize> = (0..snaps.len()).filter(|&i| labels[i] == j).collect();
        if members.len() < n {
            return Err(Error::EmptyOrThinCluster {
                cluster: j,
                size: members.len(),
                needed: n,
            });
        }
        let cluster_snaps = snaps.select(&members);
        let pod = build_ambient(&cluster_snaps, n)?;
        bases.push(pod.a);
        let mut mean = vec![0.0; snaps.dim()];
        for &i in &members {
            for (m, &v) in mean.iter_mut().zip(snaps.snapshot(i)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= members.len() as f64;
        }
        centroids.push(mean);
    }
    Ok(ClusteredPod {
        bases,
        centroids,
        g: snaps.g.clone(),
    })
}

/// Encoder/decoder pair acting on ambient coordinates, lifted through
/// the ambient basis: encode `u ↦ ψ'(AᵀGu)`, decode `c ↦ A ψ(c)`.
#[derive(Debug, Clone)]
pub struct PodAutoencoder {
    pub ambient: AmbientBasis,
    pub encoder: DenseNet,
    pub decoder: DenseNet,
}

impl PodAutoencoder {
    pub fn latent_dim(&self) -> usize {
        self.encoder.output_dim()
    }

    pub fn encode(&self, u: &[f64]) -> Result<Vec<f64>> {
        let coords = self.ambient.project(u)?;
        self.encoder.forward(&coords)
    }

    pub fn decode(&self, latent: &[f64]) -> Result<Vec<f64>> {
        let coords = self.decoder.forward(latent)?;
        self.ambient.lift(&coords)
    }

    pub fn reconstruct(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.decode(&self.encode(u)?)
    }

    pub fn mrpe(&self, snaps: &SnapshotSet) -> Result<f64> {
        let recon: Vec<Vec<f64>> = (0..snaps.len())
            .map(|i| self.reconstruct(snaps.snapshot(i)))
            .collect::<Result<Vec<_>>>()?;
        crate::pod::mrpe(&Matrix::from_columns(&recon), &snaps.u, &snaps.g)
    }

    pub fn param_count(&self) -> usize {
        self.encoder.param_count() + self.decoder.param_count()
    }
}

/// Encoder/decoder shapes.
#[derive(Debug, Clone)]
pub struct AutoencoderArch {
    pub encoder: NetSpec,
    pub decoder: NetSpec,
}

impl AutoencoderArch {
    /// Stock shapes: encoder `N_A ↦ n` with a terminal leaky rectifier,
    /// decoder `n ↦ 100 ↦ 100 ↦ N_A`.
    pub fn standard(n_a: usize, n: usize) -> Self {
        AutoencoderArch {
            encoder: NetSpec::new(n_a).dense(n).leaky_relu(DEFAULT_LEAKY_SLOPE),
            decoder: NetSpec::new(n)
                .dense(100)
                .leaky_relu(DEFAULT_LEAKY_SLOPE)
                .dense(100)
                .leaky_relu(DEFAULT_LEAKY_SLOPE)
                .dense(n_a),
        }
    }

    /// Purely linear encoder/decoder (no activations), which contains
    /// every rank-`n` linear projector.
    pub fn linear(n_a: usize, n: usize) -> Self {
        AutoencoderArch {
            encoder: NetSpec::new(n_a).dense(n),
            decoder: NetSpec::new(n).dense(n_a),
        }
    }

    /// Small nonlinear shapes for desk-scale runs.
    pub fn compact(n_a: usize, n: usize, width: usize) -> Self {
        AutoencoderArch {
            encoder: NetSpec::new(n_a).dense(n).leaky_relu(DEFAULT_LEAKY_SLOPE),
            decoder: NetSpec::new(n)
                .dense(width)
                .leaky_relu(DEFAULT_LEAKY_SLOPE)
                .dense(n_a),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AeTrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for AeTrainConfig {
    fn default() -> Self {
        AeTrainConfig {
            epochs: 1500,
            learning_rate: 1e-2,
            seed: 0,
        }
    }
}

/// Trains the autoencoder on the ambient coordinates of the snapshots,
/// minimizing the mean squared Euclidean reconstruction error with
/// full-batch Adam. The ambient basis must come from the same data.
pub fn fit_autoencoder(
    snaps: &SnapshotSet,
    ambient: &AmbientBasis,
    arch: &AutoencoderArch,
    cfg: &AeTrainConfig,
) -> Result<(PodAutoencoder, Vec<f64>)> {
    if snaps.dim() != ambient.full_dim() {
        return Err(dim_err(format!(
            "snapshots have dimension {}, ambient expects {}",
            snaps.dim(),
            ambient.full_dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let encoder = arch.encoder.build(&mut rng)?;
    let decoder = arch.decoder.build(&mut rng)?;
    let mut model = PodAutoencoder {
        ambient: ambient.clone(),
        encoder,
        decoder,
    };
    let coords: Vec<Vec<f64>> = (0..snaps.len())
        .map(|i| ambient.project(snaps.snapshot(i)))
        .collect::<Result<Vec<_>>>()?;

    let mut params = Vec::new();
    model.encoder.get_params(&mut params);
    model.decoder.get_params(&mut params);
    let enc_count = model.encoder.param_count();
    let mut adam = AdamState::new(params.len());
    let hyper = AdamHyper::with_lr(cfg.learning_rate);
    let mut history = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        model.encoder.set_params(&params[..enc_count])?;
        model.decoder.set_params(&params[enc_count..])?;
        let mut tape = Tape::new();
        let enc_nodes = model.encoder.register_params(&mut tape);
        let dec_nodes = model.decoder.register_params(&mut tape);
        let mut losses = Vec::with_capacity(coords.len());
        for c in &coords {
            let x = tape.constant(c.clone());
            let latent = model.encoder.forward_on_tape(&mut tape, x, &enc_nodes)?;
            let recon = model.decoder.forward_on_tape(&mut tape, latent, &dec_nodes)?;
            let resid = tape.sub_vec(recon, x)?;
            losses.push(tape.squared_norm(resid));
        }
        let loss_node = tape.mean_scalars(&losses);
        history.push(tape.scalar(loss_node));
        let grads = tape.backward(loss_node)?;
        adam_step(&mut params, &grads, &mut adam, &hyper)?;
    }
    model.encoder.set_params(&params[..enc_count])?;
    model.decoder.set_params(&params[enc_count..])?;
    Ok((model, history))
}

/// Upper bound on the Lipschitz constant of a network: the product of
/// the layer weight spectral norms and the activation slope bounds.
pub fn lipschitz_bound(net: &DenseNet) -> f64 {
    net.layers()
        .iter()
        .map(|layer| match layer {
            Layer::Dense(d) => singular_values(&d.weights)
                .map(|sv| sv.first().copied().unwrap_or(0.0))
                .unwrap_or(f64::INFINITY),
            Layer::LeakyRelu { slope } => slope.abs().max(1.0),
            Layer::Clamp => 1.0,
            Layer::Feature { map } => match map {
                crate::nets::FeatureMap::RotSym4 => 4.0,
            },
            Layer::Reshape { .. } => 1.0,
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::g_inner;
    use rand::Rng;

    fn rank_structured_snapshots(seed: u64) -> SnapshotSet {
        // Two well-separated blobs, each of exact rank 1.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dir_a: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dir_b: Vec<f64> = dir_a.iter().map(|&v| v + 25.0).collect();
        let mut cols = Vec::new();
        for _ in 0..6 {
            let s = rng.gen_range(0.9..1.1);
            cols.push(dir_a.iter().map(|&v| s * v).collect::<Vec<f64>>());
        }
        for _ in 0..6 {
            let s = rng.gen_range(0.9..1.1);
            cols.push(dir_b.iter().map(|&v| s * v).collect::<Vec<f64>>());
        }
        let u = Matrix::from_columns(&cols);
        let mu = Matrix::from_fn(12, 1, |i, _| if i < 6 { 0.0 } else { 1.0 });
        let nu = Matrix::from_fn(12, 2, |_, _| rng.gen_range(0.5..1.5));
        SnapshotSet::new(mu, nu, u, GramMatrix::identity(10)).unwrap()
    }

    #[test]
    fn single_cluster_equals_global_pod() {
        let snaps = rank_structured_snapshots(3);
        let cpod = fit_clustered_pod(&snaps, 1, 2, 7).unwrap();
        let global = build_ambient(&snaps, 2).unwrap();
        // Same arithmetic path: identical up to column sign.
        for j in 0..2 {
            let a = cpod.bases[0].col(j);
            let b = global.a.col(j);
            let sign = if crate::linalg::dot(a, b) >= 0.0 { 1.0 } else { -1.0 };
            for (x, y) in a.iter().zip(b) {
                assert_eq!(*x, sign * *y);
            }
        }
    }

    #[test]
    fn separable_blobs_reconstructed_exactly() {
        let snaps = rank_structured_snapshots(5);
        let cpod = fit_clustered_pod(&snaps, 2, 1, 11).unwrap();
        for i in 0..snaps.len() {
            let recon = cpod.reconstruct(snaps.snapshot(i)).unwrap();
            let diff: Vec<f64> = snaps
                .snapshot(i)
                .iter()
                .zip(&recon)
                .map(|(a, b)| a - b)
                .collect();
            let rel = g_norm(&diff, &snaps.g).unwrap() / g_norm(snaps.snapshot(i), &snaps.g).unwrap();
            assert!(rel < 1e-10, "sample {i}: relative error {rel}");
        }
    }

    #[test]
    fn infeasible_cluster_counts_rejected() {
        let snaps = rank_structured_snapshots(7);
        assert!(fit_clustered_pod(&snaps, 13, 1, 1).is_err());
        // Thin clusters: rank 5 per cluster needs ≥ 5 members each.
        assert!(matches!(
            fit_clustered_pod(&snaps, 2, 7, 1),
            Err(Error::EmptyOrThinCluster { .. })
        ));
    }

    #[test]
    fn argmin_reconstruction_beats_every_cluster() {
        let snaps = rank_structured_snapshots(9);
        let cpod = fit_clustered_pod(&snaps, 2, 1, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let u: Vec<f64> = (0..10).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let chosen = cpod.reconstruct(&u).unwrap();
            let chosen_resid = {
                let d: Vec<f64> = u.iter().zip(&chosen).map(|(a, b)| a - b).collect();
                g_norm(&d, &cpod.g).unwrap()
            };
            for basis in &cpod.bases {
                let gu = cpod.g.apply(&u);
                let c = basis.tr_matvec(&gu);
                let recon = basis.matvec(&c);
                let d: Vec<f64> = u.iter().zip(&recon).map(|(a, b)| a - b).collect();
                assert!(chosen_resid <= g_norm(&d, &cpod.g).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn in_span_snapshot_reconstructed_exactly() {
        let snaps = rank_structured_snapshots(13);
        let cpod = fit_clustered_pod(&snaps, 2, 1, 3).unwrap();
        // A vector exactly inside the second basis' span.
        let u = cpod.bases[1].col(0).to_vec();
        let recon = cpod.reconstruct(&u).unwrap();
        for (a, b) in u.iter().zip(&recon) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn clustering_matches_full_space_g_distance_on_small_case() {
        // With a weighted Gram matrix, ambient-coordinate k-means must
        // reproduce the partition found by G-distance on raw snapshots.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = GramMatrix::diagonal((0..8).map(|_| rng.gen_range(0.5..2.0)).collect()).unwrap();
        let mut cols = Vec::new();
        for k in 0..3 {
            let center: Vec<f64> =
                (0..8).map(|_| 10.0 * (k + 1) as f64 + rng.gen_range(-0.1..0.1)).collect();
            for _ in 0..4 {
                cols.push(center.iter().map(|&v| v + rng.gen_range(-0.1..0.1)).collect());
            }
        }
        let u = Matrix::from_columns(&cols);
        let mu = Matrix::from_fn(12, 1, |_, _| 0.0);
        let nu = Matrix::from_fn(12, 2, |_, _| 1.0);
        let snaps = SnapshotSet::new(mu, nu, u, g).unwrap();
        let cpod = fit_clustered_pod(&snaps, 3, 1, 5).unwrap();
        // Members of each generated blob land in one cluster: their
        // best-basis reconstructions are near-exact.
        for i in 0..snaps.len() {
            let recon = cpod.reconstruct(snaps.snapshot(i)).unwrap();
            let d: Vec<f64> = snaps.snapshot(i).iter().zip(&recon).map(|(a, b)| a - b).collect();
            let rel = g_norm(&d, &snaps.g).unwrap() / g_norm(snaps.snapshot(i), &snaps.g).unwrap();
            assert!(rel < 0.05, "sample {i} badly reconstructed: {rel}");
        }
    }

    fn ambient_with_tail(seed: u64) -> (SnapshotSet, AmbientBasis) {
        // Rank-4 data with decaying mode weights inside an 6-dim ambient.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_h = 16;
        let dirs: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..n_h).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let weights = [1.0, 0.6, 0.08, 0.04];
        let mut cols = Vec::new();
        for _ in 0..40 {
            let mut u = vec![0.0; n_h];
            for (d, w) in dirs.iter().zip(weights) {
                let a = rng.gen_range(-1.0..1.0) * w;
                for (ui, &di) in u.iter_mut().zip(d) {
                    *ui += a * di;
                }
            }
            cols.push(u);
        }
        let u = Matrix::from_columns(&cols);
        let mu = Matrix::from_fn(40, 1, |_, _| rng.gen_range(0.0..1.0));
        let nu = Matrix::from_fn(40, 2, |_, _| rng.gen_range(0.5..1.5));
        let snaps = SnapshotSet::new(mu, nu, u, GramMatrix::identity(n_h)).unwrap();
        let ambient = build_ambient(&snaps, 4).unwrap();
        (snaps, ambient)
    }

    #[test]
    fn linear_autoencoder_tracks_pod_quality() {
        let (snaps, ambient) = ambient_with_tail(23);
        // POD at rank 2 leaves the two weak modes unexplained.
        let pod2 = build_ambient(&snaps, 2).unwrap();
        let recon: Vec<Vec<f64>> = (0..snaps.len())
            .map(|i| pod2.reconstruct(snaps.snapshot(i)).unwrap())
            .collect();
        let pod_mrpe = crate::pod::mrpe(&Matrix::from_columns(&recon), &snaps.u, &snaps.g).unwrap();

        let arch = AutoencoderArch::linear(4, 2);
        let cfg = AeTrainConfig {
            epochs: 3000,
            learning_rate: 2e-2,
            seed: 3,
        };
        let (model, history) = fit_autoencoder(&snaps, &ambient, &arch, &cfg).unwrap();
        let ae_mrpe = model.mrpe(&snaps).unwrap();
        assert!(
            ae_mrpe <= 2.0 * pod_mrpe,
            "AE {ae_mrpe} vs POD rank-2 {pod_mrpe}"
        );
        assert!(history.last().unwrap() < &history[0]);
    }

    #[test]
    fn converged_autoencoder_roundtrips_training_snapshot() {
        let (snaps, ambient) = ambient_with_tail(29);
        let arch = AutoencoderArch::linear(4, 4);
        let cfg = AeTrainConfig {
            epochs: 2500,
            learning_rate: 2e-2,
            seed: 5,
        };
        let (model, _) = fit_autoencoder(&snaps, &ambient, &arch, &cfg).unwrap();
        // Full-rank latent: decoder∘encoder must be near the identity
        // on training data.
        let u = snaps.snapshot(0);
        let recon = model.reconstruct(u).unwrap();
        let d: Vec<f64> = u.iter().zip(&recon).map(|(a, b)| a - b).collect();
        let rel = g_norm(&d, &snaps.g).unwrap() / g_norm(u, &snaps.g).unwrap();
        assert!(rel < 0.10, "relative round-trip error {rel}");
    }

    #[test]
    fn untrained_autoencoder_is_finite_and_bounded() {
        let (snaps, ambient) = ambient_with_tail(31);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let arch = AutoencoderArch::standard(4, 2);
        let model = PodAutoencoder {
            ambient,
            encoder: arch.encoder.build(&mut rng).unwrap(),
            decoder: arch.decoder.build(&mut rng).unwrap(),
        };
        let mrpe = model.mrpe(&snaps).unwrap();
        assert!(mrpe.is_finite() && mrpe <= 10.0, "untrained MRPE {mrpe}");
    }

    #[test]
    fn decoder_lipschitz_bound_holds_on_random_pairs() {
        let (_, ambient) = ambient_with_tail(37);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let decoder = AutoencoderArch::standard(4, 2).decoder.build(&mut rng).unwrap();
        let model = PodAutoencoder {
            ambient,
            encoder: AutoencoderArch::standard(4, 2).encoder.build(&mut rng).unwrap(),
            decoder,
        };
        let bound = lipschitz_bound(&model.decoder);
        assert!(bound.is_finite() && bound > 0.0);
        for _ in 0..50 {
            let c1: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let delta: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.3..0.3)).collect();
            let c2: Vec<f64> = c1.iter().zip(&delta).map(|(a, b)| a + b).collect();
            let y1 = model.decode(&c1).unwrap();
            let y2 = model.decode(&c2).unwrap();
            let dy: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| a - b).collect();
            // Lifting through A is a G-isometry, so the bound carries to
            // the full space in the G-norm.
            let lhs = g_norm(&dy, &model.ambient.g).unwrap();
            let rhs = bound * crate::linalg::euclidean_norm(&delta);
            assert!(lhs <= rhs + 1e-12, "{lhs} > {rhs}");
        }
    }

    #[test]
    fn gram_weighted_inner_consistency() {
        // With the identity ambient trick the encoder sees G-weighted
        // coordinates; sanity-check the weighted inner product path.
        let g = GramMatrix::diagonal(vec![2.0, 1.0]).unwrap();
        assert_eq!(g_inner(&[1.0, 2.0], &[3.0, 1.0], &g).unwrap(), 8.0);
    }
}
