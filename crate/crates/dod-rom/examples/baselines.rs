//! Side-by-side comparison of the fixed-basis methods on the modal
//! superposition problem: global POD, clustered POD with a growing
//! dictionary, and the POD-enhanced autoencoder.
//!
//! ```bash
//! cargo run --release -p dod-rom --example baselines
//! ```

use dod_rom::baselines::{fit_autoencoder, fit_clustered_pod, AeTrainConfig, AutoencoderArch};
use dod_rom::linalg::Matrix;
use dod_rom::pod::{build_ambient, mrpe, SnapshotSet};
use dod_rom::problems::SyntheticProblem;

fn pod_errors(train: &SnapshotSet, test: &SnapshotSet, n: usize) -> dod_rom::Result<(f64, f64)> {
    let basis = build_ambient(train, n)?;
    let err = |set: &SnapshotSet| -> dod_rom::Result<f64> {
        let recon: Vec<Vec<f64>> = (0..set.len())
            .map(|i| basis.reconstruct(set.snapshot(i)))
            .collect::<dod_rom::Result<Vec<_>>>()?;
        mrpe(&Matrix::from_columns(&recon), &set.u, &set.g)
    };
    Ok((err(train)?, err(test)?))
}

fn main() -> dod_rom::Result<()> {
    let problem = SyntheticProblem::modal_superposition_1d();
    let (train, test) = problem.sample_dataset(160, 60, 7)?;
    let n = 2;

    println!("method               train MRPE   test MRPE");
    let (pod_train, pod_test) = pod_errors(&train, &test, n)?;
    println!("pod (rank {n})         {pod_train:.4e}   {pod_test:.4e}");

    for c in [1usize, 2, 4, 8] {
        let cpod = fit_clustered_pod(&train, c, n, 11)?;
        println!(
            "cpod c = {c:<2}          {:.4e}   {:.4e}",
            cpod.mrpe(&train)?,
            cpod.mrpe(&test)?
        );
    }

    let n_a = 7;
    let ambient = build_ambient(&train, n_a)?;
    let arch = AutoencoderArch::compact(n_a, n, 32);
    let cfg = AeTrainConfig {
        epochs: 3000,
        learning_rate: 1e-2,
        seed: 3,
    };
    let (ae, history) = fit_autoencoder(&train, &ambient, &arch, &cfg)?;
    println!(
        "autoencoder (n = {n})  {:.4e}   {:.4e}   (loss {:.2e} -> {:.2e})",
        ae.mrpe(&train)?,
        ae.mrpe(&test)?,
        history[0],
        history.last().unwrap()
    );
    Ok(())
}
