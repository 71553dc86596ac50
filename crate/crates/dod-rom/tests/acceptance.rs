//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its runtime (visible with `--nocapture`). Criteria 7 and 8
//! share one training run through a lazily built fixture.
//!
//! ```bash
//! cargo test -p dod-rom --test acceptance -- --nocapture
//! ```

use dod_rom::baselines::fit_clustered_pod;
use dod_rom::cli::{benchmark_archs_for_parity, run as cli_run};
use dod_rom::dod::{
    dod_mrpe, loss_ambient, loss_full, train_dod, training_loss_and_grad, DodModel,
    DodTrainConfig,
};
use dod_rom::grassmann::{
    adaptivity_score, grassmann_distance, SubspacePair, UniformBox,
};
use dod_rom::io::{read_csv, read_snapshots_raw, save_model, write_snapshots, AnyModel, ModelMeta};
use dod_rom::linalg::{g_norm, GramMatrix, Matrix, OrthMode};
use dod_rom::nets::{dod_arch_compact, NetSpec, SeedRootArch, DEFAULT_LEAKY_SLOPE};
use dod_rom::pod::{build_ambient, mrpe, stack_sq_error, AmbientBasis, SnapshotSet};
use dod_rom::problems::SyntheticProblem;
use dod_rom::rom::{
    error_decomposition, mre, train_benchmark, train_coefficients, CoeffTrainConfig, DodNnModel,
    SegregatedArch,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

fn report(criterion: usize, what: &str, elapsed: Duration, budget: Duration) {
    println!(
        "criterion {criterion:2} ({what}): PASS in {elapsed:.2?} (budget {budget:.0?})"
    );
    assert!(
        elapsed <= budget,
        "criterion {criterion} exceeded its runtime budget: {elapsed:.2?} > {budget:.2?}"
    );
}

fn problem_data(n_train: usize, n_test: usize, seed: u64) -> (SnapshotSet, SnapshotSet) {
    SyntheticProblem::modal_superposition_1d()
        .sample_dataset(n_train, n_test, seed)
        .unwrap()
}

fn ambient_test_mrpe(basis: &AmbientBasis, set: &SnapshotSet) -> f64 {
    let recon: Vec<Vec<f64>> = (0..set.len())
        .map(|i| basis.reconstruct(set.snapshot(i)).unwrap())
        .collect();
    mrpe(&Matrix::from_columns(&recon), &set.u, &set.g).unwrap()
}

/// Criterion 1 — loss equivalence: for any inner module, the full-space
/// and ambient-space reconstruction losses differ by a model-independent
/// constant. Spread over 20 random models < 1e-9·(1 + c_A).
#[test]
fn criterion_01_loss_equivalence() {
    let start = Instant::now();
    let (train, _) = problem_data(24, 4, 11);
    let ambient = build_ambient(&train, 5).unwrap();
    let arch = dod_arch_compact(1, 5, 8, 4);
    let mut diffs = Vec::new();
    for k in 0..20 {
        let model = DodModel::new_random(ambient.clone(), &arch, 2, 1000 + k).unwrap();
        let lf = loss_full(&model, &train).unwrap();
        let la = loss_ambient(&model, &train).unwrap();
        diffs.push(lf - la);
    }
    let c_a = diffs[0];
    let spread = diffs.iter().fold(0.0_f64, |m, d| m.max((d - c_a).abs()));
    assert!(
        spread < 1e-9 * (1.0 + c_a),
        "offset spread {spread} vs constant {c_a}"
    );
    report(1, "loss equivalence", start.elapsed(), Duration::from_secs(5));
}

/// Criterion 2 — pointwise error splitting: for every sample,
/// ‖u − u_ROM‖² = ‖u − V Vᵀ G u‖² + |c − φ|² within 1e-9·(1 + ‖u‖²).
#[test]
fn criterion_02_pointwise_splitting() {
    let start = Instant::now();
    let (train, test) = problem_data(30, 50, 13);
    let ambient = build_ambient(&train, 6).unwrap();
    let arch = dod_arch_compact(1, 6, 8, 4);
    let dod = DodModel::new_random(ambient, &arch, 2, 21).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let phi = SegregatedArch::plain(1, 2, 6, 3, 2).build(&mut rng).unwrap();
    let model = DodNnModel {
        dod,
        phi,
        coeff_orth_mode: OrthMode::ModifiedGramSchmidt,
    };
    for i in 0..test.len() {
        let u = test.snapshot(i);
        let mu = test.mu_sample(i);
        let nu = test.nu_sample(i);
        let (c, recon) = model
            .dod
            .project_with(&mu, u, model.coeff_orth_mode)
            .unwrap();
        let phi_out = model.phi.eval(&mu, &nu).unwrap();
        let pred = model.predict(&mu, &nu).unwrap();
        let total = {
            let d: Vec<f64> = u.iter().zip(&pred).map(|(a, b)| a - b).collect();
            g_norm(&d, &test.g).unwrap().powi(2)
        };
        let proj = {
            let d: Vec<f64> = u.iter().zip(&recon).map(|(a, b)| a - b).collect();
            g_norm(&d, &test.g).unwrap().powi(2)
        };
        let coeff: f64 = c
            .iter()
            .zip(&phi_out)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let unorm2 = g_norm(u, &test.g).unwrap().powi(2);
        let residual = (total - proj - coeff).abs();
        assert!(
            residual < 1e-9 * (1.0 + unorm2),
            "sample {i}: residual {residual}"
        );
    }
    report(2, "pointwise splitting", start.elapsed(), Duration::from_secs(5));
}

/// Criterion 3 — aggregate decomposition: reported total² equals
/// ambient² + basis² + coeff² within 1e-9 relative, both through the
/// library call and through the `eval` subcommand (which asserts it).
#[test]
fn criterion_03_decomposition_identity() {
    let start = Instant::now();
    let (train, test) = problem_data(24, 30, 17);
    let ambient = build_ambient(&train, 5).unwrap();
    let arch = dod_arch_compact(1, 5, 8, 4);
    let dod = DodModel::new_random(ambient, &arch, 2, 33).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let phi = SegregatedArch::plain(1, 2, 6, 3, 2).build(&mut rng).unwrap();
    let model = DodNnModel {
        dod,
        phi,
        coeff_orth_mode: OrthMode::ModifiedGramSchmidt,
    };
    let dec = error_decomposition(&model, &test).unwrap();
    assert!(
        dec.identity_residual < 1e-9 * (1.0 + dec.total_sq),
        "identity residual {} vs total {}",
        dec.identity_residual,
        dec.total_sq
    );

    // The eval subcommand runs the same assertion internally.
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("rom.model");
    let data_path = dir.path().join("test.snap");
    let report_path = dir.path().join("report.csv");
    save_model(&model_path, &AnyModel::DodNn(model), &ModelMeta::default()).unwrap();
    write_snapshots(&data_path, &test).unwrap();
    // The splitting identity holds for any SPD weight; a problem.json
    // sibling supplies the quadrature inner product the model was
    // built with.
    let problem_path = dir.path().join("problem.json");
    std::fs::write(
        &problem_path,
        serde_json::to_string(&SyntheticProblem::modal_superposition_1d()).unwrap(),
    )
    .unwrap();
    let code = cli_run([
        "dodrom",
        "eval",
        "--model",
        model_path.to_str().unwrap(),
        "--data",
        data_path.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "eval subcommand failed");
    let table = read_csv(&report_path).unwrap();
    let residual: f64 = table.rows[0][8].parse().unwrap();
    let total: f64 = table.rows[0][7].parse().unwrap();
    assert!(residual < 1e-9 * (1.0 + total));
    report(3, "decomposition identity", start.elapsed(), Duration::from_secs(5));
}

/// Criterion 4 — subspace metric: the rotation family collapses to
/// distance zero, orthogonal lines sit at one, and a tilted line
/// reproduces |sin θ|.
#[test]
fn criterion_04_grassmann_metric() {
    let start = Instant::now();
    let frame = |angle: f64| {
        Matrix::from_rows(&[
            &[angle.cos(), -angle.sin()],
            &[angle.sin(), angle.cos()],
            &[0.0, 0.0],
        ])
    };
    let base = frame(0.0);
    for k in 0..20 {
        let mu = -3.1 + 0.32 * k as f64;
        let d = grassmann_distance(&SubspacePair::new(frame(mu), base.clone()).unwrap()).unwrap();
        assert!(d < 1e-10, "rotation family at {mu}: distance {d}");
    }
    let e1 = Matrix::from_columns(&[vec![1.0, 0.0, 0.0]]);
    let e2 = Matrix::from_columns(&[vec![0.0, 1.0, 0.0]]);
    let d = grassmann_distance(&SubspacePair::new(e1.clone(), e2).unwrap()).unwrap();
    assert!((d - 1.0).abs() <= 1e-12, "orthogonal lines: {d}");
    for k in 0..10 {
        let theta = 0.05 + 0.13 * k as f64;
        let w = Matrix::from_columns(&[vec![theta.cos(), theta.sin(), 0.0]]);
        let d = grassmann_distance(&SubspacePair::new(e1.clone(), w).unwrap()).unwrap();
        assert!(
            (d - theta.sin().abs()).abs() < 1e-10,
            "tilt {theta}: {d} vs {}",
            theta.sin()
        );
    }
    report(4, "subspace metric", start.elapsed(), Duration::from_secs(1));
}

/// Criterion 5 — adaptivity estimator: the two-cluster map converges to
/// √½ within three standard errors at 10⁴ pairs; a constant map scores
/// exactly zero.
#[test]
fn criterion_05_adaptivity_estimator() {
    let start = Instant::now();
    let two_cluster = |mu: &[f64]| -> dod_rom::Result<Matrix> {
        Ok(if mu[0] < 0.5 {
            Matrix::from_columns(&[vec![1.0, 0.0, 0.0]])
        } else {
            Matrix::from_columns(&[vec![0.0, 1.0, 0.0]])
        })
    };
    let sampler = UniformBox::new(vec![(0.0, 1.0)]);
    let rep = adaptivity_score(&two_cluster, &sampler, 10_000, 29).unwrap();
    // standard_error tracks the mean of d²; compare on that scale.
    let err = (rep.score * rep.score - 0.5).abs();
    assert!(
        err <= 3.0 * rep.standard_error,
        "score² off by {err}, 3·SE = {}",
        3.0 * rep.standard_error
    );

    let constant = |_mu: &[f64]| -> dod_rom::Result<Matrix> {
        Ok(Matrix::from_columns(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]))
    };
    let rep = adaptivity_score(&constant, &sampler, 500, 31).unwrap();
    assert_eq!(rep.score, 0.0, "constant basis must score exactly zero");
    report(5, "adaptivity estimator", start.elapsed(), Duration::from_secs(10));
}

/// Smallest Gram-Schmidt pivot of the pre-orthonormalization stack over
/// all samples: the curvature of the loss scales like an inverse power
/// of this, so the finite-difference oracle is only trustworthy when it
/// is comfortably away from zero.
fn min_gs_pivot(model: &DodModel, snaps: &SnapshotSet) -> f64 {
    let mut worst = f64::INFINITY;
    for i in 0..snaps.len() {
        let stack = model.pre_orth_stack(&snaps.mu_sample(i)).unwrap();
        let mut cols: Vec<Vec<f64>> = (0..stack.cols()).map(|j| stack.col(j).to_vec()).collect();
        for j in 0..cols.len() {
            for _pass in 0..2 {
                for k in 0..j {
                    let (head, tail) = cols.split_at_mut(j);
                    let r = dod_rom::linalg::dot(&head[k], &tail[0]);
                    for (t, &q) in tail[0].iter_mut().zip(&head[k]) {
                        *t -= r * q;
                    }
                }
            }
            let norm = dod_rom::linalg::euclidean_norm(&cols[j]);
            worst = worst.min(norm);
            if norm > 0.0 {
                for v in cols[j].iter_mut() {
                    *v /= norm;
                }
            }
        }
    }
    worst
}

/// Criterion 6 — gradient correctness: analytic gradients of the full
/// training loss (through the differentiable orthonormalization) match
/// central finite differences to 1e-5 relative on ten small random
/// configurations.
///
/// Configurations whose pre-orthonormalization stacks come within 0.02
/// of rank collapse are redrawn: there the loss curvature grows like an
/// inverse power of the pivot and the step-1e-5 difference quotient is
/// dominated by its own truncation error rather than by the gradient.
#[test]
fn criterion_06_gradient_check() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut checked = 0;
    let mut attempt = 0u64;
    while checked < 10 {
        attempt += 1;
        assert!(attempt < 100, "could not find ten well-posed configurations");
        // Small random shapes, at most 200 parameters.
        let latent = rng.gen_range(2..4usize);
        let hidden = rng.gen_range(3..5usize);
        let n_a = rng.gen_range(4..6usize);
        let n = 2;
        let arch = SeedRootArch {
            seed: NetSpec::new(1)
                .dense(hidden)
                .leaky_relu(DEFAULT_LEAKY_SLOPE)
                .dense(latent)
                .leaky_relu(DEFAULT_LEAKY_SLOPE),
            root: NetSpec::new(latent)
                .dense(hidden)
                .leaky_relu(DEFAULT_LEAKY_SLOPE)
                .dense(n_a),
        };
        // Synthetic data of matching dims.
        let n_h = n_a + 3;
        let u = Matrix::from_fn(n_h, n_a + 2, |_, _| rng.gen_range(-1.0..1.0));
        let mu = Matrix::from_fn(n_a + 2, 1, |_, _| rng.gen_range(0.0..1.0));
        let nu = Matrix::from_fn(n_a + 2, 2, |_, _| rng.gen_range(0.5..1.5));
        let g = GramMatrix::identity(n_h);
        let snaps = SnapshotSet::new(mu, nu, u, g).unwrap();
        let ambient = build_ambient(&snaps, n_a).unwrap();
        let mut model = DodModel::new_random(ambient, &arch, n, 7000 + attempt).unwrap();
        assert!(
            model.param_count() <= 200,
            "attempt {attempt} has {} params",
            model.param_count()
        );
        if min_gs_pivot(&model, &snaps) < 0.02 {
            continue;
        }
        checked += 1;

        let (_, analytic) = training_loss_and_grad(&model, &snaps).unwrap();
        let mut params = Vec::new();
        model.get_params(&mut params);
        let h = 1e-5;
        let mut numeric = vec![0.0; params.len()];
        for i in 0..params.len() {
            let orig = params[i];
            params[i] = orig + h;
            model.set_params(&params).unwrap();
            let fp = training_loss_and_grad(&model, &snaps).unwrap().0;
            params[i] = orig - h;
            model.set_params(&params).unwrap();
            let fm = training_loss_and_grad(&model, &snaps).unwrap().0;
            params[i] = orig;
            numeric[i] = (fp - fm) / (2.0 * h);
        }
        model.set_params(&params).unwrap();
        let diff: f64 = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let scale: f64 = numeric.iter().map(|x| x * x).sum();
        let rel = (diff / scale.max(1e-30)).sqrt();
        assert!(rel < 1e-5, "attempt {attempt}: gradient rel error {rel}");
    }
    report(6, "gradient correctness", start.elapsed(), Duration::from_secs(30));
}

/// Shared training run backing criteria 7 and 8.
struct StructureRun {
    worst_slice_rank2: f64,
    global_pod2_test: f64,
    ambient_test: f64,
    dod_test: f64,
    cpod_test: Vec<f64>,
    pod_rank2_test: f64,
    rom_mre: f64,
    bench1_mre: f64,
    bench2_mre: f64,
    rom_params: usize,
    bench_params: (usize, usize),
    stage7: Duration,
    stage8: Duration,
}

static RUN: OnceLock<StructureRun> = OnceLock::new();

fn structure_run() -> &'static StructureRun {
    RUN.get_or_init(|| {
        let t7 = Instant::now();
        let problem = SyntheticProblem::modal_superposition_1d();
        let (train, test) = problem.sample_dataset(160, 60, 7).unwrap();

        // Slice structure: five probes across the box.
        let mut worst_slice_rank2 = 0.0_f64;
        for k in 0..5 {
            let mu = [0.05 + 0.225 * k as f64];
            let errs = problem.slice_width_estimate(&mu, 30, 2, 100 + k as u64).unwrap();
            worst_slice_rank2 = worst_slice_rank2.max(errs[1]);
        }
        let global_pod2_test = {
            let pod2 = build_ambient(&train, 2).unwrap();
            ambient_test_mrpe(&pod2, &test)
        };

        let n_a = 7;
        let ambient = build_ambient(&train, n_a).unwrap();
        let ambient_test = ambient_test_mrpe(&ambient, &test);

        let arch = dod_arch_compact(problem.p(), n_a, 24, 8);
        let mut dod = DodModel::new_random(ambient.clone(), &arch, 2, 42).unwrap();
        let cfg = DodTrainConfig {
            epochs: 3000,
            learning_rate: 1e-2,
            ..DodTrainConfig::default()
        };
        train_dod(&mut dod, &train, &cfg).unwrap();
        let dod_test = dod_mrpe(&dod, &test).unwrap();
        let stage7 = t7.elapsed();

        let t8 = Instant::now();
        let cpod_test: Vec<f64> = [1usize, 2, 4]
            .iter()
            .map(|&c| {
                fit_clustered_pod(&train, c, 2, 11)
                    .unwrap()
                    .mrpe(&test)
                    .unwrap()
            })
            .collect();
        let pod_rank2_test = global_pod2_test;

        let coeff_arch = SegregatedArch::plain(problem.p(), problem.p_prime(), 24, 5, dod.n);
        let coeff_cfg = CoeffTrainConfig {
            epochs: 4000,
            learning_rate: 1e-2,
            seed: 5,
        };
        let (rom, _) = train_coefficients(&dod, &train, &coeff_arch, &coeff_cfg).unwrap();
        let rom_params = rom.param_count();
        let (mono, seg) =
            benchmark_archs_for_parity(problem.p(), problem.p_prime(), n_a, 5, rom_params);
        let bench_cfg = CoeffTrainConfig {
            epochs: 4000,
            learning_rate: 1e-2,
            seed: 9,
        };
        let (bench1, _) = train_benchmark(&ambient, &train, &mono, &bench_cfg).unwrap();
        let (bench2, _) = train_benchmark(&ambient, &train, &seg, &bench_cfg).unwrap();
        let rom_mre = mre(&rom, &test).unwrap();
        let bench1_mre = mre(&bench1, &test).unwrap();
        let bench2_mre = mre(&bench2, &test).unwrap();
        let bench_params = (bench1.param_count(), bench2.param_count());
        let stage8 = t8.elapsed();

        StructureRun {
            worst_slice_rank2,
            global_pod2_test,
            ambient_test,
            dod_test,
            cpod_test,
            pod_rank2_test,
            rom_mre,
            bench1_mre,
            bench2_mre,
            rom_params,
            bench_params,
            stage7,
            stage8,
        }
    })
}

/// Criterion 7 — structure reproduction: exact slices, a stubborn
/// global manifold, and an adaptive basis that closes the gap.
#[test]
fn criterion_07_structure_reproduction() {
    let run = structure_run();
    // (a) every probed μ-slice is exactly rank 2.
    assert!(
        run.worst_slice_rank2 < 1e-8,
        "worst slice rank-2 MRPE {}",
        run.worst_slice_rank2
    );
    // (b) the global rank-2 basis is at least 10× worse.
    assert!(
        run.global_pod2_test >= 10.0 * run.worst_slice_rank2.max(1e-12),
        "global {} vs worst slice {}",
        run.global_pod2_test,
        run.worst_slice_rank2
    );
    // (c) the trained rank-2 adaptive basis closes the gap.
    assert!(
        run.dod_test <= 2.0 * run.ambient_test,
        "adaptive {} vs ambient {}",
        run.dod_test,
        run.ambient_test
    );
    assert!(
        run.dod_test <= 0.5 * run.global_pod2_test,
        "adaptive {} vs global POD {}",
        run.dod_test,
        run.global_pod2_test
    );
    report(7, "structure reproduction", run.stage7, Duration::from_secs(300));
}

/// Criterion 8 — baseline orderings: growing the clustered-POD
/// dictionary never hurts, one cluster is global POD, and the full ROM
/// beats both benchmark regressors at matched parameter budgets.
#[test]
fn criterion_08_baseline_orderings() {
    let run = structure_run();
    assert!(
        run.cpod_test[2] <= run.cpod_test[1] + 1e-12
            && run.cpod_test[1] <= run.cpod_test[0] + 1e-12,
        "clustered POD not monotone: {:?}",
        run.cpod_test
    );
    assert!(
        (run.cpod_test[0] - run.pod_rank2_test).abs() < 1e-10,
        "c = 1 differs from global POD: {} vs {}",
        run.cpod_test[0],
        run.pod_rank2_test
    );
    for (count, label) in [
        (run.bench_params.0, "monolithic"),
        (run.bench_params.1, "segregated"),
    ] {
        let gap = (count.abs_diff(run.rom_params)) as f64 / run.rom_params as f64;
        assert!(gap < 0.15, "{label} parity gap {gap:.3}");
    }
    assert!(
        run.rom_mre < run.bench1_mre,
        "ROM {} vs monolithic benchmark {}",
        run.rom_mre,
        run.bench1_mre
    );
    assert!(
        run.rom_mre < run.bench2_mre,
        "ROM {} vs segregated benchmark {}",
        run.rom_mre,
        run.bench2_mre
    );
    report(8, "baseline orderings", run.stage8, Duration::from_secs(600));
}

/// Criterion 9 — orthonormalization swap: Gram-Schmidt and Householder
/// QR inference give the same reconstructions to 1e-8 relative.
#[test]
fn criterion_09_orth_swap_invariance() {
    let start = Instant::now();
    let (train, _) = problem_data(24, 4, 19);
    let ambient = build_ambient(&train, 6).unwrap();
    let arch = dod_arch_compact(1, 6, 8, 4);
    let model = DodModel::new_random(ambient, &arch, 2, 55).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..100 {
        let mu = [rng.gen_range(0.0..1.0)];
        let u: Vec<f64> = (0..train.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, r1) = model
            .project_with(&mu, &u, OrthMode::ModifiedGramSchmidt)
            .unwrap();
        let (_, r2) = model
            .project_with(&mu, &u, OrthMode::HouseholderQR)
            .unwrap();
        let scale = g_norm(&u, &train.g).unwrap();
        let diff: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| a - b).collect();
        let gap = g_norm(&diff, &train.g).unwrap();
        assert!(gap < 1e-8 * (1.0 + scale), "reconstruction gap {gap}");
    }
    report(9, "orth swap invariance", start.elapsed(), Duration::from_secs(5));
}

/// Criterion 10 — energy identity: the squared training reconstruction
/// error of the ambient basis equals the truncated eigenvalue tail.
#[test]
fn criterion_10_energy_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for trial in 0..10 {
        let n_h = rng.gen_range(12..30);
        let n_samples = rng.gen_range(6..12);
        let keep = rng.gen_range(2..n_samples.min(6));
        let u = Matrix::from_fn(n_h, n_samples, |_, _| rng.gen_range(-1.0..1.0));
        let mu = Matrix::from_fn(n_samples, 1, |_, _| rng.gen_range(0.0..1.0));
        let nu = Matrix::from_fn(n_samples, 2, |_, _| rng.gen_range(0.5..1.5));
        let g = GramMatrix::diagonal((0..n_h).map(|_| rng.gen_range(0.5..2.0)).collect()).unwrap();
        let snaps = SnapshotSet::new(mu, nu, u, g).unwrap();
        let basis = build_ambient(&snaps, keep).unwrap();
        let err = stack_sq_error(&basis.a, &snaps).unwrap();
        let tail = basis.discarded_energy;
        assert!(
            (err - tail).abs() <= 1e-8 * tail.max(1e-300),
            "trial {trial}: error {err} vs tail {tail}"
        );
    }
    report(10, "energy identity", start.elapsed(), Duration::from_secs(5));
}

/// Criterion 11 — serialization: bitwise round-trips for both file
/// kinds, and CRC corruption rejected with exit code 2 through the CLI.
#[test]
fn criterion_11_serialization() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = problem_data(10, 2, 23);

    // Snapshot round-trip is bitwise.
    let snap_path = dir.path().join("train.snap");
    write_snapshots(&snap_path, &train).unwrap();
    let (mu, nu, u) = read_snapshots_raw(&snap_path).unwrap();
    assert_eq!(mu.data(), train.mu.data());
    assert_eq!(nu.data(), train.nu.data());
    assert_eq!(u.data(), train.u.data());

    // Model round-trip preserves the evaluation bitwise.
    let ambient = build_ambient(&train, 4).unwrap();
    let model_path = dir.path().join("ambient.model");
    save_model(&model_path, &AnyModel::Ambient(ambient.clone()), &ModelMeta::default()).unwrap();
    let (loaded, _) = dod_rom::io::load_model(&model_path).unwrap();
    let AnyModel::Ambient(back) = loaded else {
        panic!("wrong model type");
    };
    assert_eq!(back.a.data(), ambient.a.data());

    // Corrupt one payload byte of the snapshot file: the CLI must exit
    // with code 2.
    let mut bytes = std::fs::read(&snap_path).unwrap();
    let idx = bytes.len() / 2;
    bytes[idx] ^= 0x10;
    std::fs::write(&snap_path, &bytes).unwrap();
    let out = dir.path().join("out.model");
    let code = cli_run([
        "dodrom",
        "ambient",
        "--data",
        snap_path.to_str().unwrap(),
        "--na",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "corrupted snapshot must exit with code 2");

    // Corrupt the model file too.
    let mut bytes = std::fs::read(&model_path).unwrap();
    let last = bytes.len() - 30;
    bytes[last] ^= 0x01;
    std::fs::write(&model_path, &bytes).unwrap();
    let code = cli_run([
        "dodrom",
        "score",
        "--model",
        model_path.to_str().unwrap(),
        "--pairs",
        "10",
        "--seed",
        "1",
    ]);
    assert_eq!(code, 2, "corrupted model must exit with code 2");
    report(11, "serialization", start.elapsed(), Duration::from_secs(30));
}
