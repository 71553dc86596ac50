//! Lloyd's k-means with k-means++ seeding, used to partition snapshots
//! for the clustered-POD baseline.

use crate::linalg::Matrix;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const MAX_ITERS: usize = 100;
const N_RESTARTS: usize = 5;

/// Clusters the columns of `points` into `k` groups. Runs five
/// restarts and keeps the assignment with the lowest inertia.
/// Deterministic for a fixed RNG.
pub fn kmeans(points: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<Vec<f64>>) {
    assert!(k >= 1 && k <= points.cols());
    let mut best: Option<(f64, Vec<usize>, Vec<Vec<f64>>)> = None;
    for _ in 0..N_RESTARTS {
        let (inertia, labels, centroids) = run_once(points, k, rng);
        if best.as_ref().map_or(true, |(b, _, _)| inertia < *b) {
            best = Some((inertia, labels, centroids));
        }
    }
    let (_, labels, centroids) = best.unwrap();
    (labels, centroids)
}

fn run_once(points: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> (f64, Vec<usize>, Vec<Vec<f64>>) {
    let n = points.cols();
    let mut centroids = plus_plus_init(points, k, rng);
    let mut labels = vec![0usize; n];
    for _ in 0..MAX_ITERS {
        let mut changed = false;
        for i in 0..n {
            let (j, _) = nearest(points.col(i), &centroids);
            if labels[i] != j {
                labels[i] = j;
                changed = true;
            }
        }
        // Update step; empty clusters keep their previous centroid.
        let mut sums = vec![vec![0.0; points.rows()]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (s, &v) in sums[labels[i]].iter_mut().zip(points.col(i)) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                for (c, s) in centroids[j].iter_mut().zip(&sums[j]) {
                    *c = s / counts[j] as f64;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = (0..n)
        .map(|i| nearest(points.col(i), &centroids).1)
        .sum::<f64>();
    (inertia, labels, centroids)
}

/// k-means++ seeding: each new center is drawn with probability
/// proportional to its squared distance from the nearest chosen one.
fn plus_plus_init(points: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.cols();
    let first = rng.gen_range(0..n);
    let mut centers = vec![points.col(first).to_vec()];
    while centers.len() < k {
        let d2: Vec<f64> = (0..n).map(|i| nearest(points.col(i), &centers).1).collect();
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            rng.gen_range(0..n)
        } else {
            match WeightedIndex::new(&d2) {
                Ok(w) => w.sample(rng),
                Err(_) => rng.gen_range(0..n),
            }
        };
        centers.push(points.col(next).to_vec());
    }
    centers
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0usize, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d2: f64 = point.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 < best.1 {
            best = (j, d2);
        }
    }
    best
}
