//! Full non-intrusive ROM pipeline: train the adaptive basis, regress
//! its coefficients with the segregated network, and compare against
//! the two ambient-coefficient benchmark regressors at matched
//! parameter budgets. Also prints the exact error decomposition.
//!
//! ```bash
//! cargo run --release -p dod-rom --example dod_nn_rom
//! ```

use dod_rom::cli::benchmark_archs_for_parity;
use dod_rom::dod::{train_dod, DodModel, DodTrainConfig};
use dod_rom::nets::dod_arch_compact;
use dod_rom::pod::build_ambient;
use dod_rom::problems::SyntheticProblem;
use dod_rom::rom::{error_decomposition, mre, train_benchmark, train_coefficients, CoeffTrainConfig, SegregatedArch};
use std::time::Instant;

fn main() -> dod_rom::Result<()> {
    let problem = SyntheticProblem::modal_superposition_1d();
    let (train, test) = problem.sample_dataset(160, 60, 7)?;
    let n_a = 7;
    let ambient = build_ambient(&train, n_a)?;

    // Stage one: the adaptive basis.
    let arch = dod_arch_compact(problem.p(), n_a, 24, 8);
    let mut dod = DodModel::new_random(ambient.clone(), &arch, 2, 42)?;
    let dod_cfg = DodTrainConfig {
        epochs: 3000,
        learning_rate: 1e-2,
        ..DodTrainConfig::default()
    };
    let t0 = Instant::now();
    train_dod(&mut dod, &train, &dod_cfg)?;
    println!("basis training: {:.1?}", t0.elapsed());

    // Stage two: coefficient regression on top of the frozen basis.
    let coeff_arch = SegregatedArch::plain(problem.p(), problem.p_prime(), 24, 5, dod.n);
    let coeff_cfg = CoeffTrainConfig {
        epochs: 4000,
        learning_rate: 1e-2,
        seed: 5,
    };
    let t0 = Instant::now();
    let (rom, coeff_history) = train_coefficients(&dod, &train, &coeff_arch, &coeff_cfg)?;
    println!(
        "coefficient training: {:.1?} (MSE {:.3e} -> {:.3e})",
        t0.elapsed(),
        coeff_history[0],
        coeff_history.last().unwrap()
    );

    let rom_params = rom.param_count();
    println!("full ROM has {rom_params} trainable parameters");

    // Benchmarks: same data, same ambient space, matched budgets.
    let (mono_arch, seg_arch) =
        benchmark_archs_for_parity(problem.p(), problem.p_prime(), n_a, 5, rom_params);
    let bench_cfg = CoeffTrainConfig {
        epochs: 4000,
        learning_rate: 1e-2,
        seed: 9,
    };
    let t0 = Instant::now();
    let (bench1, _) = train_benchmark(&ambient, &train, &mono_arch, &bench_cfg)?;
    let (bench2, _) = train_benchmark(&ambient, &train, &seg_arch, &bench_cfg)?;
    println!(
        "benchmark training: {:.1?} ({} and {} parameters)",
        t0.elapsed(),
        bench1.param_count(),
        bench2.param_count()
    );

    let rom_mre = mre(&rom, &test)?;
    let b1_mre = mre(&bench1, &test)?;
    let b2_mre = mre(&bench2, &test)?;
    println!("test errors:");
    println!("  adaptive-basis ROM   {rom_mre:.4e}");
    println!("  benchmark monolithic {b1_mre:.4e}");
    println!("  benchmark segregated {b2_mre:.4e}");

    let dec = error_decomposition(&rom, &test)?;
    println!("error decomposition (mean squares):");
    println!("  ambient   {:.4e}", dec.ambient_sq);
    println!("  basis     {:.4e}", dec.dod_sq);
    println!("  coeff     {:.4e}", dec.coeff_sq);
    println!("  total     {:.4e}", dec.total_sq);
    println!("  identity residual {:.2e}", dec.identity_residual);
    Ok(())
}
