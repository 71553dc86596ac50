//! Command-line driver. One thin binary (`dodrom`) dispatches to these
//! subcommands; all real work lives in the library modules.
//!
//! Exit codes: 0 success, 2 IO/format/config, 3 dimension or data
//! problems, 4 training failure.

use crate::baselines::{fit_autoencoder, fit_clustered_pod, AeTrainConfig, AutoencoderArch};
use crate::dod::{train_dod, DodModel, DodTrainConfig};
use crate::error::{Error, Result};
use crate::grassmann::{adaptivity_score, required_pairs};
use crate::io::{
    fmt_float, load_model, read_csv, read_snapshots, save_model, write_csv, write_snapshots,
    AnyModel, CsvTable, ModelMeta, TrainingMeta,
};
use crate::linalg::{GramMatrix, Matrix};
use crate::nets::{dod_arch_compact, dod_arch_preset, SeedRootArch};
use crate::pod::{build_ambient, mrpe, SnapshotSet};
use crate::problems::SyntheticProblem;
use crate::rom::{
    benchmark_monolithic_arch, error_decomposition, mre, monolithic_width_for_parity,
    segregated_width_for_parity, train_coefficients, BenchmarkArch,
    SegregatedArch,
};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "dodrom",
    about = "Adaptive-basis reduced order modeling on synthetic parametric problems",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample train/test snapshot files from a synthetic problem.
    Generate(GenerateArgs),
    /// Build the ambient basis (generalized POD) from a snapshot file.
    Ambient(AmbientArgs),
    /// Train the adaptive basis on a snapshot file.
    TrainDod(TrainDodArgs),
    /// Monte Carlo adaptivity score of a trained basis.
    Score(ScoreArgs),
    /// Train the segregated coefficient network on top of a basis.
    TrainRom(TrainRomArgs),
    /// Fit a comparison method (pod, cpod, ae) and report errors.
    Baseline(BaselineArgs),
    /// Evaluate any model file on a test set and write a report.
    Eval(EvalArgs),
    /// Collate the reports of a run directory into one table.
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Problem preset name (modal-1d, modal-2d, travel-1d, travel-2d)
    /// or path to a problem JSON file.
    #[arg(long)]
    problem: String,
    #[arg(long)]
    train: usize,
    #[arg(long)]
    test: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; writes train.snap, test.snap, problem.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AmbientArgs {
    #[arg(long)]
    data: PathBuf,
    /// Ambient dimension to retain.
    #[arg(long)]
    na: usize,
    #[arg(long)]
    out: PathBuf,
    /// Problem JSON supplying the inner product; defaults to
    /// problem.json next to the data file, then to the identity.
    #[arg(long)]
    problem: Option<PathBuf>,
}

#[derive(Args)]
struct TrainDodArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    ambient: PathBuf,
    /// Architecture preset (eikonal-style, nstokes-style, compact) or
    /// path to a seed/root architecture JSON file.
    #[arg(long, default_value = "compact")]
    arch: String,
    /// Basis rank.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2000)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-2)]
    lr: f64,
    /// Hidden width of the compact preset.
    #[arg(long, default_value_t = 16)]
    width: usize,
    /// Seed-output (feature) dimension of the compact preset.
    #[arg(long, default_value_t = 8)]
    latent: usize,
    #[arg(long)]
    out: PathBuf,
    /// Loss history CSV; defaults to `<out>.loss.csv`.
    #[arg(long)]
    loss_csv: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Failure probability for the sample-size bound readout.
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
    /// Accuracy for the sample-size bound readout.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Problem JSON for the parameter box; defaults to the model's
    /// recorded problem reference.
    #[arg(long)]
    problem: Option<PathBuf>,
}

#[derive(Args)]
struct TrainRomArgs {
    #[arg(long)]
    dod: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Segregation width (rows of the two branch outputs).
    #[arg(long, default_value_t = 5)]
    m: usize,
    #[arg(long, default_value_t = 2000)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-2)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hidden width of the branch networks.
    #[arg(long, default_value_t = 24)]
    hidden: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BaselineArgs {
    /// pod | cpod | ae
    #[arg(long)]
    method: String,
    #[arg(long)]
    data: PathBuf,
    /// Reduced rank n.
    #[arg(long)]
    n: usize,
    /// Cluster count (cpod only).
    #[arg(long, default_value_t = 2)]
    clusters: usize,
    /// Ambient dimension backing the autoencoder (ae only).
    #[arg(long, default_value_t = 8)]
    na: usize,
    #[arg(long, default_value_t = 1500)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional held-out data for a test-error column.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    report: PathBuf,
    /// Optional model output path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    problem: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    dir: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version print and exit cleanly; real parse errors
            // are usage problems.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Ambient(args) => ambient(args),
        Command::TrainDod(args) => train_dod_cmd(args),
        Command::Score(args) => score(args),
        Command::TrainRom(args) => train_rom(args),
        Command::Baseline(args) => baseline(args),
        Command::Eval(args) => eval(args),
        Command::Compare(args) => compare(args),
    }
}

fn load_problem_spec(name_or_path: &str) -> Result<SyntheticProblem> {
    if Path::new(name_or_path).exists() {
        let text = std::fs::read_to_string(name_or_path)?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("problem JSON: {e}")))
    } else {
        SyntheticProblem::by_name(name_or_path)
    }
}

/// Gram matrix for a data file: an explicit problem JSON wins, then a
/// problem.json sibling of the data file, then the identity.
fn gram_for_data(data: &Path, problem: &Option<PathBuf>, n_h: usize) -> Result<GramMatrix> {
    let candidate = match problem {
        Some(p) => Some(p.clone()),
        None => {
            let sibling = data.parent().map(|d| d.join("problem.json"));
            sibling.filter(|p| p.exists())
        }
    };
    match candidate {
        Some(path) => {
            let text = std::fs::read_to_string(&path)?;
            let problem: SyntheticProblem =
                serde_json::from_str(&text).map_err(|e| Error::Format(format!("problem JSON: {e}")))?;
            let g = problem.gram();
            if g.dim() != n_h {
                return Err(Error::DimensionMismatch(format!(
                    "problem grid has {} dof, data has {n_h}",
                    g.dim()
                )));
            }
            Ok(g)
        }
        None => {
            eprintln!("note: no problem definition found, using the identity inner product");
            Ok(GramMatrix::identity(n_h))
        }
    }
}

fn load_set(data: &Path, problem: &Option<PathBuf>) -> Result<SnapshotSet> {
    let (_, _, u) = crate::io::read_snapshots_raw(data)?;
    let g = gram_for_data(data, problem, u.rows())?;
    read_snapshots(data, g)
}

fn generate(args: GenerateArgs) -> Result<()> {
    let problem = load_problem_spec(&args.problem)?;
    let (train, test) = problem.sample_dataset(args.train, args.test, args.seed)?;
    std::fs::create_dir_all(&args.out)?;
    write_snapshots(&args.out.join("train.snap"), &train)?;
    write_snapshots(&args.out.join("test.snap"), &test)?;
    let problem_json = serde_json::to_string_pretty(&problem)
        .map_err(|e| Error::Format(format!("problem JSON: {e}")))?;
    std::fs::write(args.out.join("problem.json"), problem_json.as_bytes())?;
    println!(
        "wrote {} train and {} test snapshots ({} dof) to {}",
        train.len(),
        test.len(),
        train.dim(),
        args.out.display()
    );
    Ok(())
}

fn ambient(args: AmbientArgs) -> Result<()> {
    let snaps = load_set(&args.data, &args.problem)?;
    let basis = build_ambient(&snaps, args.na)?;
    let retained: f64 = basis.retained_eigenvalues.iter().sum();
    println!(
        "ambient dimension {}: retained energy {}, discarded energy {}",
        basis.dim(),
        fmt_float(retained),
        fmt_float(basis.discarded_energy)
    );
    let meta = ModelMeta {
        problem_ref: problem_ref_for(&args.data, &args.problem),
        rng_seed: None,
        training: None,
    };
    save_model(&args.out, &AnyModel::Ambient(basis), &meta)
}

fn problem_ref_for(data: &Path, problem: &Option<PathBuf>) -> Option<String> {
    match problem {
        Some(p) => Some(p.display().to_string()),
        None => {
            let sibling = data.parent().map(|d| d.join("problem.json"))?;
            sibling.exists().then(|| sibling.display().to_string())
        }
    }
}

fn resolve_arch(name_or_path: &str, p: usize, n_a: usize, width: usize, latent: usize) -> Result<SeedRootArch> {
    if name_or_path == "compact" {
        return Ok(dod_arch_compact(p, n_a, width, latent));
    }
    if Path::new(name_or_path).exists() {
        let text = std::fs::read_to_string(name_or_path)?;
        return serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("architecture JSON: {e}")));
    }
    dod_arch_preset(name_or_path, p, n_a)
}

fn train_dod_cmd(args: TrainDodArgs) -> Result<()> {
    let (model_any, amb_meta) = load_model(&args.ambient)?;
    let AnyModel::Ambient(ambient) = model_any else {
        return Err(Error::InvalidInput(format!(
            "--ambient expects an ambient model file, got {}",
            model_any.type_name()
        )));
    };
    let problem = amb_meta.problem_ref.clone().map(PathBuf::from);
    let snaps = load_set(&args.data, &problem)?;
    let arch = resolve_arch(&args.arch, snaps.mu.cols(), ambient.dim(), args.width, args.latent)?;
    let mut model = DodModel::new_random(ambient, &arch, args.n, args.seed)?;
    let cfg = DodTrainConfig {
        epochs: args.epochs,
        learning_rate: args.lr,
        batch_size: None,
        seed: args.seed,
        validation_fraction: 0.1,
    };
    let report = train_dod(&mut model, &snaps, &cfg)?;
    let final_loss = report.loss_history.last().copied();
    println!(
        "trained basis of rank {} for {} epochs; final loss {}, best epoch {}",
        args.n,
        args.epochs,
        final_loss.map(fmt_float).unwrap_or_else(|| "n/a".into()),
        report.best_epoch
    );

    let loss_path = args
        .loss_csv
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.loss.csv", args.out.display())));
    let mut table = CsvTable::new(&["epoch", "train_loss", "val_loss"]);
    for (e, (tr, va)) in report
        .loss_history
        .iter()
        .zip(&report.val_history)
        .enumerate()
    {
        table.push_row(vec![e.to_string(), fmt_float(*tr), fmt_float(*va)]);
    }
    write_csv(&loss_path, &table)?;

    let meta = ModelMeta {
        problem_ref: amb_meta.problem_ref,
        rng_seed: Some(args.seed),
        training: Some(TrainingMeta {
            epochs: args.epochs,
            learning_rate: args.lr,
            final_loss,
        }),
    };
    save_model(&args.out, &AnyModel::Dod(model), &meta)
}

fn score(args: ScoreArgs) -> Result<()> {
    let (model_any, meta) = load_model(&args.model)?;
    let dod: DodModel = match model_any {
        AnyModel::Dod(d) => d,
        AnyModel::DodNn(m) => m.dod,
        other => {
            return Err(Error::InvalidInput(format!(
                "--model expects a basis model, got {}",
                other.type_name()
            )))
        }
    };
    let problem_path = args
        .problem
        .clone()
        .or_else(|| meta.problem_ref.clone().map(PathBuf::from))
        .ok_or_else(|| {
            Error::InvalidInput(
                "no problem reference available; pass --problem for the parameter box".into(),
            )
        })?;
    let text = std::fs::read_to_string(&problem_path)?;
    let problem: SyntheticProblem =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("problem JSON: {e}")))?;
    let report = adaptivity_score(&dod, &problem.mu_sampler(), args.pairs, args.seed)?;
    let needed = required_pairs(args.delta, args.epsilon)?;
    println!("adaptivity score: {}", fmt_float(report.score));
    println!("standard error:   {}", fmt_float(report.standard_error));
    println!("pairs used:       {}", report.n_pairs);
    println!(
        "pairs for |err| <= {} with probability {}: {}",
        args.epsilon,
        1.0 - args.delta,
        needed
    );
    Ok(())
}

fn train_rom(args: TrainRomArgs) -> Result<()> {
    let (model_any, meta) = load_model(&args.dod)?;
    let AnyModel::Dod(dod) = model_any else {
        return Err(Error::InvalidInput(format!(
            "--dod expects a basis model file, got {}",
            model_any.type_name()
        )));
    };
    let problem = meta.problem_ref.clone().map(PathBuf::from);
    let snaps = load_set(&args.data, &problem)?;
    let arch = SegregatedArch::plain(snaps.mu.cols(), snaps.nu.cols(), args.hidden, args.m, dod.n);
    let cfg = crate::rom::CoeffTrainConfig {
        epochs: args.epochs,
        learning_rate: args.lr,
        seed: args.seed,
    };
    let (rom, history) = train_coefficients(&dod, &snaps, &arch, &cfg)?;
    let final_loss = history.last().copied();
    println!(
        "trained coefficient network (m = {}) for {} epochs; final coefficient MSE {}",
        args.m,
        args.epochs,
        final_loss.map(fmt_float).unwrap_or_else(|| "n/a".into())
    );
    let meta = ModelMeta {
        problem_ref: meta.problem_ref,
        rng_seed: Some(args.seed),
        training: Some(TrainingMeta {
            epochs: args.epochs,
            learning_rate: args.lr,
            final_loss,
        }),
    };
    save_model(&args.out, &AnyModel::DodNn(rom), &meta)
}

fn baseline(args: BaselineArgs) -> Result<()> {
    let snaps = load_set(&args.data, &args.problem)?;
    let test = args
        .test
        .as_ref()
        .map(|t| load_set(t, &args.problem))
        .transpose()?;

    let basis_mrpe = |recon: Vec<Vec<f64>>, set: &SnapshotSet| -> Result<f64> {
        mrpe(&Matrix::from_columns(&recon), &set.u, &set.g)
    };

    let (model, train_err, test_err): (AnyModel, f64, Option<f64>) = match args.method.as_str() {
        "pod" => {
            let basis = build_ambient(&snaps, args.n)?;
            let recon = |set: &SnapshotSet| -> Result<Vec<Vec<f64>>> {
                (0..set.len()).map(|i| basis.reconstruct(set.snapshot(i))).collect()
            };
            let train_err = basis_mrpe(recon(&snaps)?, &snaps)?;
            let test_err = test.as_ref().map(|t| -> Result<f64> {
                basis_mrpe(recon(t)?, t)
            }).transpose()?;
            (AnyModel::Ambient(basis), train_err, test_err)
        }
        "cpod" => {
            let cpod = fit_clustered_pod(&snaps, args.clusters, args.n, args.seed)?;
            let train_err = cpod.mrpe(&snaps)?;
            let test_err = test.as_ref().map(|t| cpod.mrpe(t)).transpose()?;
            (AnyModel::ClusteredPod(cpod), train_err, test_err)
        }
        "ae" => {
            let ambient = build_ambient(&snaps, args.na)?;
            let arch = AutoencoderArch::standard(args.na, args.n);
            let cfg = AeTrainConfig {
                epochs: args.epochs,
                learning_rate: 1e-2,
                seed: args.seed,
            };
            let (ae, _) = fit_autoencoder(&snaps, &ambient, &arch, &cfg)?;
            let train_err = ae.mrpe(&snaps)?;
            let test_err = test.as_ref().map(|t| ae.mrpe(t)).transpose()?;
            (AnyModel::Autoencoder(ae), train_err, test_err)
        }
        other => return Err(Error::UnknownPreset(other.into())),
    };

    let clusters = if args.method == "cpod" {
        args.clusters.to_string()
    } else {
        "1".to_string()
    };
    let mut table = CsvTable::new(&["method", "n", "clusters", "train_mrpe", "test_mrpe"]);
    table.push_row(vec![
        args.method.clone(),
        args.n.to_string(),
        clusters,
        fmt_float(train_err),
        test_err.map(fmt_float).unwrap_or_default(),
    ]);
    write_csv(&args.report, &table)?;
    println!(
        "{} (n = {}): train MRPE {}{}",
        args.method,
        args.n,
        fmt_float(train_err),
        test_err
            .map(|e| format!(", test MRPE {}", fmt_float(e)))
            .unwrap_or_default()
    );
    if let Some(out) = &args.out {
        let meta = ModelMeta {
            problem_ref: problem_ref_for(&args.data, &args.problem),
            rng_seed: Some(args.seed),
            training: None,
        };
        save_model(out, &model, &meta)?;
    }
    Ok(())
}

const EVAL_HEADER: [&str; 9] = [
    "model_type",
    "n",
    "mrpe",
    "mre",
    "ambient_sq",
    "dod_sq",
    "coeff_sq",
    "total_sq",
    "identity_residual",
];

fn eval(args: EvalArgs) -> Result<()> {
    let (model, meta) = load_model(&args.model)?;
    let problem = meta.problem_ref.clone().map(PathBuf::from);
    let test = load_set(&args.data, &problem)?;
    let mut table = CsvTable::new(&EVAL_HEADER);
    let row = eval_row(&model, &test)?;
    println!(
        "{}: {}",
        model.type_name(),
        row.iter()
            .zip(EVAL_HEADER.iter())
            .skip(1)
            .filter(|(v, _)| !v.is_empty())
            .map(|(v, h)| format!("{h}={v}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    table.push_row(row);
    write_csv(&args.report, &table)
}

/// Row with a projection-error metric only.
fn basis_row(method: &str, n: usize, mrpe_value: f64) -> Vec<String> {
    let mut row = vec![method.into(), n.to_string(), fmt_float(mrpe_value)];
    row.resize(EVAL_HEADER.len(), String::new());
    row
}

/// One report row; empty fields where a metric does not apply.
fn eval_row(model: &AnyModel, test: &SnapshotSet) -> Result<Vec<String>> {
    Ok(match model {
        AnyModel::Ambient(basis) => {
            let recon: Vec<Vec<f64>> = (0..test.len())
                .map(|i| basis.reconstruct(test.snapshot(i)))
                .collect::<Result<Vec<_>>>()?;
            let err = mrpe(&Matrix::from_columns(&recon), &test.u, &test.g)?;
            basis_row("pod", basis.dim(), err)
        }
        AnyModel::Dod(dod) => basis_row("dod", dod.n, crate::dod::dod_mrpe(dod, test)?),
        AnyModel::ClusteredPod(cpod) => basis_row("cpod", cpod.rank(), cpod.mrpe(test)?),
        AnyModel::Autoencoder(ae) => basis_row("ae", ae.latent_dim(), ae.mrpe(test)?),
        AnyModel::DodNn(rom) => {
            let err = mre(rom, test)?;
            let dec = error_decomposition(rom, test)?;
            assert_splitting(&dec)?;
            vec![
                "dod-nn".into(),
                rom.dod.n.to_string(),
                String::new(),
                fmt_float(err),
                fmt_float(dec.ambient_sq),
                fmt_float(dec.dod_sq),
                fmt_float(dec.coeff_sq),
                fmt_float(dec.total_sq),
                fmt_float(dec.identity_residual),
            ]
        }
        AnyModel::Benchmark(bench) => {
            let err = mre(bench, test)?;
            let mut row = vec![
                "benchmark".into(),
                bench.ambient.dim().to_string(),
                String::new(),
                fmt_float(err),
            ];
            row.resize(EVAL_HEADER.len(), String::new());
            row
        }
    })
}

/// The reported total must split exactly into its three sources.
fn assert_splitting(dec: &crate::rom::ErrorDecomposition) -> Result<()> {
    if dec.identity_residual > 1e-9 * (1.0 + dec.total_sq) {
        return Err(Error::InvalidInput(format!(
            "error-splitting identity violated: residual {} for total {}",
            dec.identity_residual, dec.total_sq
        )));
    }
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let mut out = CsvTable::new(&["method", "n", "clusters", "mrpe", "mre"]);
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&args.dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    entries.sort();
    for path in entries {
        let Ok(table) = read_csv(&path) else { continue };
        let header: Vec<&str> = table.header.iter().map(|s| s.as_str()).collect();
        if header == EVAL_HEADER {
            for row in &table.rows {
                out.push_row(vec![
                    row[0].clone(),
                    row[1].clone(),
                    "1".into(),
                    row[2].clone(),
                    row[3].clone(),
                ]);
            }
        } else if header == ["method", "n", "clusters", "train_mrpe", "test_mrpe"] {
            for row in &table.rows {
                let err = if row[4].is_empty() { &row[3] } else { &row[4] };
                out.push_row(vec![
                    row[0].clone(),
                    row[1].clone(),
                    row[2].clone(),
                    err.clone(),
                    String::new(),
                ]);
            }
        }
    }
    out.rows.sort();
    write_csv(&args.out, &out)?;
    println!("collated {} rows into {}", out.rows.len(), args.out.display());
    Ok(())
}

/// Monolithic and segregated benchmark architectures sized for
/// parameter parity with a full ROM of `target_params` parameters.
pub fn benchmark_archs_for_parity(
    p: usize,
    p_prime: usize,
    n_a: usize,
    m: usize,
    target_params: usize,
) -> (BenchmarkArch, BenchmarkArch) {
    let h1 = monolithic_width_for_parity(p, p_prime, n_a, target_params);
    let h2 = segregated_width_for_parity(p, p_prime, m, n_a, target_params);
    (
        BenchmarkArch::Monolithic(benchmark_monolithic_arch(p, p_prime, h1, n_a)),
        BenchmarkArch::Segregated(SegregatedArch::plain(p, p_prime, h2, m, n_a)),
    )
}
