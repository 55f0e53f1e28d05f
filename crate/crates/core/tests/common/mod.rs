//! Straightforward re-implementations used as references by the integration tests.
//! They favour obviousness over speed and share no code with the library.

#![allow(dead_code)]

use ndarray::{Array2, ArrayView2};

/// Mean silhouette by the textbook definition, one pair at a time.
pub fn silhouette(points: ArrayView2<f64>, labels: &[usize]) -> f64 {
    let n = points.nrows();
    let dist = |i: usize, j: usize| -> f64 {
        let mut acc = 0.0;
        for k in 0..points.ncols() {
            let d = points[[i, k]] - points[[j, k]];
            acc += d * d;
        }
        acc.sqrt()
    };
    let mut clusters: Vec<usize> = labels.to_vec();
    clusters.sort_unstable();
    clusters.dedup();

    let mut total = 0.0;
    for i in 0..n {
        let own: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == labels[i]).collect();
        if own.is_empty() {
            continue;
        }
        let a = own.iter().map(|&j| dist(i, j)).sum::<f64>() / own.len() as f64;
        let mut b = f64::INFINITY;
        for &c in clusters.iter().filter(|&&c| c != labels[i]) {
            let members: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
            let mean = members.iter().map(|&j| dist(i, j)).sum::<f64>() / members.len() as f64;
            b = b.min(mean);
        }
        let m = if a > b { a } else { b };
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    total / n as f64
}

/// Layers kept by the top-down rule: one more than the highest layer below the
/// top whose score is strictly under `alpha` times the top score, else 1.
pub fn keep_layers(values: &[f64], alpha: f64) -> usize {
    let n = values.len();
    let t = alpha * values[n - 1];
    (1..n).filter(|&layer| values[layer - 1] < t).map(|layer| layer + 1).max().unwrap_or(1)
}

/// Stored parameters counted element by element.
pub struct Storage {
    pub stored: u64,
    pub baseline: u64,
    pub naive: u64,
}

pub fn storage(pretrained: &[u64], adapters: &[Vec<u64>], heads: &[u64], indices: &[usize]) -> Storage {
    let n = pretrained.len();
    let mut stored = 0;
    let mut baseline = 0;
    let mut naive = 0;
    for layer in 0..n {
        stored += pretrained[layer];
        baseline += pretrained[layer];
    }
    for (j, row) in adapters.iter().enumerate() {
        for layer in 0..n {
            baseline += row[layer];
            if layer < indices[j] {
                stored += row[layer];
                naive += row[layer] + pretrained[layer];
            }
        }
        stored += heads[j];
        baseline += heads[j];
        naive += heads[j];
    }
    Storage { stored, baseline, naive }
}

/// KL(P || Q) for a 2-D embedding `y`, with Q from the Student-t kernel.
pub fn kl(p: &Array2<f64>, y: ArrayView2<f64>) -> f64 {
    let n = y.nrows();
    let mut kernel = Array2::<f64>::zeros((n, n));
    let mut z = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let dx = y[[i, 0]] - y[[j, 0]];
                let dy = y[[i, 1]] - y[[j, 1]];
                kernel[[i, j]] = 1.0 / (1.0 + dx * dx + dy * dy);
                z += kernel[[i, j]];
            }
        }
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && p[[i, j]] > 0.0 {
                total += p[[i, j]] * (p[[i, j]] / (kernel[[i, j]] / z)).ln();
            }
        }
    }
    total
}

/// Perplexity of a row of squared distances under bandwidth `sigma`, in bits.
pub fn perplexity(sq_dists: &[f64], sigma: f64) -> f64 {
    let w: Vec<f64> = sq_dists.iter().map(|d| (-d / (2.0 * sigma * sigma)).exp()).collect();
    let z: f64 = w.iter().sum();
    let h: f64 = w.iter().map(|v| v / z).filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum();
    2f64.powf(h)
}
