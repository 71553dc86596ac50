//! Subspace geometry: the projection 2-norm distance on hand-built
//! families, and the Monte Carlo adaptivity score with its sample-size
//! guarantee.
//!
//! ```bash
//! cargo run --release -p dod-rom --example grassmann_adaptivity
//! ```

use dod_rom::grassmann::{
    adaptivity_score, grassmann_distance, required_pairs, SubspacePair, UniformBox,
};
use dod_rom::linalg::Matrix;
use dod_rom::Result;

fn main() -> Result<()> {
    // A rotating frame spans the same plane for every angle: zero
    // distance, no adaptivity.
    let frame = |angle: f64| {
        Matrix::from_rows(&[
            &[angle.cos(), -angle.sin()],
            &[angle.sin(), angle.cos()],
            &[0.0, 0.0],
        ])
    };
    let d = grassmann_distance(&SubspacePair::new(frame(1.3), frame(0.0))?)?;
    println!("rotating frame vs itself: distance {d:.3e}");

    // A line tilted by θ against a fixed line: distance |sin θ|.
    for theta in [0.1_f64, 0.5, 1.2] {
        let v = Matrix::from_columns(&[vec![1.0, 0.0, 0.0]]);
        let w = Matrix::from_columns(&[vec![theta.cos(), theta.sin(), 0.0]]);
        let d = grassmann_distance(&SubspacePair::new(v, w)?)?;
        println!(
            "tilt {theta:.1}: distance {d:.6} (sin = {:.6})",
            theta.sin()
        );
    }

    // Two-cluster basis map: half the parameter draws see span(e1), the
    // rest span(e2). Each random pair disagrees with probability 1/2,
    // so the squared score converges to 1/2.
    let two_cluster = |mu: &[f64]| -> Result<Matrix> {
        Ok(if mu[0] < 0.5 {
            Matrix::from_columns(&[vec![1.0, 0.0, 0.0]])
        } else {
            Matrix::from_columns(&[vec![0.0, 1.0, 0.0]])
        })
    };
    let sampler = UniformBox::new(vec![(0.0, 1.0)]);
    for n_pairs in [100usize, 1_000, 10_000] {
        let report = adaptivity_score(&two_cluster, &sampler, n_pairs, 17)?;
        println!(
            "two-cluster score with {n_pairs:5} pairs: {:.4} (target {:.4}, SE of score^2 {:.1e})",
            report.score,
            0.5_f64.sqrt(),
            report.standard_error
        );
    }

    // How many pairs guarantee a given accuracy with high probability.
    for (delta, eps) in [(0.25, 0.1), (0.01, 0.1), (0.05, 0.05)] {
        println!(
            "|score error| <= {eps} with probability {}: {} pairs",
            1.0 - delta,
            required_pairs(delta, eps)?
        );
    }
    Ok(())
}
