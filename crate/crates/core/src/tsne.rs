//! Exact t-SNE.
//!
//! All pairwise terms are evaluated directly (O(n²) per iteration); inputs are at
//! most a few thousand samples. Perplexity uses entropy in bits, the KL objective
//! uses the natural log.

use ndarray::{Array2, ArrayView2, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound applied to joint probabilities before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

pub const SIGMA_MIN: f64 = 1e-20;
pub const SIGMA_MAX: f64 = 1e20;
pub const PERPLEXITY_TOL: f64 = 1e-5;
pub const SIGMA_SEARCH_STEPS: usize = 64;

/// Standard deviation of the Gaussian used to initialize the embedding.
pub const INIT_STD: f64 = 1e-4;

/// KL is recorded into [`Embedding::kl_history`] every this many iterations.
pub const KL_SAMPLE_EVERY: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsneConfig {
    pub n_components: usize,
    pub perplexity: f64,
    pub learning_rate: f64,
    pub n_iter: usize,
    pub seed: u64,
    pub early_exaggeration_factor: f64,
    pub early_exaggeration_iters: usize,
    pub momentum_initial: f64,
    pub momentum_final: f64,
    pub momentum_switch_iter: usize,
    /// Floor for the per-coordinate adaptive gains.
    pub min_gain: f64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            n_components: 2,
            perplexity: 30.0,
            learning_rate: 50.0,
            n_iter: 1000,
            seed: 42,
            early_exaggeration_factor: 12.0,
            early_exaggeration_iters: 250,
            momentum_initial: 0.5,
            momentum_final: 0.8,
            momentum_switch_iter: 250,
            min_gain: 0.01,
        }
    }
}

impl TsneConfig {
    /// Checks the configuration against a dataset of `n_samples` points.
    pub fn validate(&self, n_samples: usize) -> Result<()> {
        if !(1..=3).contains(&self.n_components) {
            return Err(Error::argument(format!(
                "n_components must be 1, 2 or 3, got {}",
                self.n_components
            )));
        }
        if !(self.perplexity > 0.0) {
            return Err(Error::argument("perplexity must be positive"));
        }
        if n_samples < 4 {
            return Err(Error::argument(format!(
                "t-SNE needs at least 4 samples, got {}",
                n_samples
            )));
        }
        if self.perplexity >= (n_samples - 1) as f64 {
            return Err(Error::argument(format!(
                "perplexity {} must be below n_samples - 1 = {}",
                self.perplexity,
                n_samples - 1
            )));
        }
        if !(self.learning_rate > 0.0) || !(self.early_exaggeration_factor > 0.0) {
            return Err(Error::argument(
                "learning_rate and early_exaggeration_factor must be positive",
            ));
        }
        if self.n_iter == 0 || self.early_exaggeration_iters == 0 || self.momentum_switch_iter == 0 {
            return Err(Error::argument(
                "n_iter, early_exaggeration_iters and momentum_switch_iter must be positive",
            ));
        }
        if self.early_exaggeration_iters > self.n_iter || self.momentum_switch_iter > self.n_iter {
            return Err(Error::argument(
                "early_exaggeration_iters and momentum_switch_iter must not exceed n_iter",
            ));
        }
        for m in [self.momentum_initial, self.momentum_final] {
            if !(0.0..1.0).contains(&m) {
                return Err(Error::argument(format!("momentum {} is outside [0, 1)", m)));
            }
        }
        if !(self.min_gain > 0.0) {
            return Err(Error::argument("min_gain must be positive"));
        }
        Ok(())
    }
}

/// High-dimensional joint probabilities with their per-point bandwidths.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityModel {
    pub p: Array2<f64>,
    pub sigmas: Vec<f64>,
    pub target_perplexity: f64,
}

impl AffinityModel {
    pub fn n(&self) -> usize {
        self.p.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub y: Array2<f64>,
    pub final_kl: f64,
    /// KL on the un-exaggerated affinities after 0, 50, 100, ... iterations.
    pub kl_history: Vec<f64>,
}

/// Squared Euclidean distance between every pair of rows.
pub fn squared_distances(x: ArrayView2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut out = Array2::zeros((n, n));
    out.axis_iter_mut(ndarray::Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let xi = x.row(i);
            for j in 0..n {
                if j != i {
                    row[j] = xi
                        .iter()
                        .zip(x.row(j).iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                }
            }
        });
    out
}

/// Gaussian conditional distribution of one point over its neighbours.
///
/// `sq_dist_row[self_index]` is ignored and the output there is 0. Exponents are
/// shifted by the smallest distance before exponentiation.
pub fn conditional_probs(sq_dist_row: &[f64], self_index: usize, sigma: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; sq_dist_row.len()];
    fill_conditional(sq_dist_row, self_index, sigma, &mut out)?;
    Ok(out)
}

/// Writes the conditional distribution into `out`; returns its entropy in bits.
fn fill_conditional(sq_dist_row: &[f64], self_index: usize, sigma: f64, out: &mut [f64]) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::argument(format!("sigma must be positive, got {}", sigma)));
    }
    let d_min = sq_dist_row
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != self_index)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    if !d_min.is_finite() {
        return Err(Error::DegenerateRow {
            row: self_index,
            reason: "no neighbour at finite distance".into(),
        });
    }
    let scale = 1.0 / (2.0 * sigma * sigma);
    let mut total = 0.0;
    for (j, (&d, o)) in sq_dist_row.iter().zip(out.iter_mut()).enumerate() {
        *o = if j == self_index {
            0.0
        } else {
            (-(d - d_min) * scale).exp()
        };
        total += *o;
    }
    let mut entropy = 0.0;
    for o in out.iter_mut() {
        *o /= total;
        if *o > 0.0 {
            entropy -= *o * o.log2();
        }
    }
    Ok(entropy)
}

/// Perplexity (2 to the entropy in bits) of one row's conditional distribution.
pub fn row_perplexity(sq_dist_row: &[f64], self_index: usize, sigma: f64) -> Result<f64> {
    let mut scratch = vec![0.0; sq_dist_row.len()];
    Ok(fill_conditional(sq_dist_row, self_index, sigma, &mut scratch)?.exp2())
}

/// Bandwidth whose conditional distribution has the target perplexity.
///
/// Bisects geometrically over `[SIGMA_MIN, SIGMA_MAX]`; perplexity is nondecreasing
/// in sigma. Returns as soon as the perplexity is within `tol` of the target, or the
/// closest sigma seen after `max_iter` evaluations.
pub fn search_sigma(
    sq_dist_row: &[f64],
    self_index: usize,
    target_perplexity: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let neighbours = sq_dist_row
        .iter()
        .enumerate()
        .filter(|&(j, d)| j != self_index && d.is_finite())
        .count();
    if neighbours < 2 {
        return Err(Error::DegenerateRow {
            row: self_index,
            reason: format!("{} finite neighbours, need at least 2", neighbours),
        });
    }
    let mut scratch = vec![0.0; sq_dist_row.len()];
    let (mut lo, mut hi) = (SIGMA_MIN, SIGMA_MAX);
    let mut best = (f64::INFINITY, 1.0);
    for _ in 0..max_iter.max(1) {
        let sigma = (lo * hi).sqrt();
        let perplexity = fill_conditional(sq_dist_row, self_index, sigma, &mut scratch)?.exp2();
        let gap = (perplexity - target_perplexity).abs();
        if gap < best.0 {
            best = (gap, sigma);
        }
        if gap <= tol {
            break;
        }
        if perplexity > target_perplexity {
            hi = sigma;
        } else {
            lo = sigma;
        }
    }
    Ok(best.1)
}

/// Symmetric joint probabilities `p_ij = (p_{j|i} + p_{i|j}) / 2n`.
///
/// Off-diagonal entries are then mapped through `floor + (1 - n(n-1)·floor)·p`, which
/// keeps the total mass at 1 while bounding every entry below by [`PROB_FLOOR`].
pub fn joint_probs(x: ArrayView2<f64>, config: &TsneConfig) -> Result<AffinityModel> {
    let n = x.nrows();
    if n < 4 {
        return Err(Error::argument(format!("need at least 4 samples, got {}", n)));
    }
    if !(config.perplexity > 0.0) || config.perplexity >= (n - 1) as f64 {
        return Err(Error::argument(format!(
            "perplexity {} must be in (0, {})",
            config.perplexity,
            n - 1
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("input features contain non-finite values"));
    }
    let dist = squared_distances(x);
    let target = config.perplexity;

    let rows: Vec<Result<(Vec<f64>, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = dist.row(i);
            let row = row.as_slice().expect("distance rows are contiguous");
            check_reachable(row, i, target)?;
            let sigma = search_sigma(row, i, target, PERPLEXITY_TOL, SIGMA_SEARCH_STEPS)?;
            Ok((conditional_probs(row, i, sigma)?, sigma))
        })
        .collect();
    // Sequential pass so the reported row is the lowest failing one.
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let mut p = Array2::zeros((n, n));
    let denom = 2.0 * n as f64;
    let shrink = 1.0 - (n * (n - 1)) as f64 * PROB_FLOOR;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = PROB_FLOOR + shrink * ((rows[i].0[j] + rows[j].0[i]) / denom);
            p[[i, j]] = v;
            p[[j, i]] = v;
        }
    }
    Ok(AffinityModel {
        p,
        sigmas: rows.into_iter().map(|(_, s)| s).collect(),
        target_perplexity: target,
    })
}

/// Fails when no bandwidth can reach the target: as sigma shrinks the perplexity
/// falls to the number of neighbours tied at the minimum distance, so a row whose
/// nearest duplicates outnumber the target cannot be calibrated.
fn check_reachable(row: &[f64], i: usize, target: f64) -> Result<()> {
    let d_min = row
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    let ties = row
        .iter()
        .enumerate()
        .filter(|&(j, &d)| j != i && d == d_min)
        .count();
    if ties as f64 > target + PERPLEXITY_TOL {
        return Err(Error::DegenerateRow {
            row: i,
            reason: format!(
                "{} neighbours at identical minimum distance exceed perplexity {}",
                ties, target
            ),
        });
    }
    Ok(())
}

/// Student-t kernel weights `(1 + |y_i - y_j|²)⁻¹` with zero diagonal, and their sum.
///
/// Rows are filled independently and summed in row order, so the result does not
/// depend on how rayon schedules the rows.
fn kernel_weights(y: ArrayView2<f64>) -> (Array2<f64>, f64) {
    let (n, s) = y.dim();
    let y = y.as_standard_layout();
    let ys = y.as_slice().expect("standard layout");
    let mut w = vec![0.0; n * n];
    let row_sums: Vec<f64> = w
        .par_chunks_mut(n.max(1))
        .enumerate()
        .map(|(i, row)| {
            let yi = &ys[i * s..(i + 1) * s];
            let mut sum = 0.0;
            for (j, (wij, yj)) in row.iter_mut().zip(ys.chunks_exact(s)).enumerate() {
                if j != i {
                    let d: f64 = yi.iter().zip(yj).map(|(a, b)| (a - b) * (a - b)).sum();
                    *wij = 1.0 / (1.0 + d);
                    sum += *wij;
                }
            }
            sum
        })
        .collect();
    let w = Array2::from_shape_vec((n, n), w).expect("n x n");
    (w, row_sums.iter().sum())
}

/// Low-dimensional joint probabilities `q_ij`.
pub fn low_dim_affinities(y: ArrayView2<f64>) -> Array2<f64> {
    let (mut w, total) = kernel_weights(y);
    w.mapv_inplace(|v| v / total);
    w
}

/// `KL(P || Q) = Σ_{i≠j} p_ij ln(p_ij / q_ij)`, both sides floored at [`PROB_FLOOR`].
pub fn kl_divergence(p: &AffinityModel, q: ArrayView2<f64>) -> Result<f64> {
    if p.p.dim() != q.dim() {
        return Err(Error::argument(format!(
            "shape mismatch: P is {:?}, Q is {:?}",
            p.p.dim(),
            q.dim()
        )));
    }
    Ok(kl_raw(p.p.view(), q))
}

fn kl_raw(p: ArrayView2<f64>, q: ArrayView2<f64>) -> f64 {
    let n = p.nrows();
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let pij = p[[i, j]].max(PROB_FLOOR);
                let qij = q[[i, j]].max(PROB_FLOOR);
                kl += pij * (pij / qij).ln();
            }
        }
    }
    kl
}

/// Analytic gradient of the KL objective with respect to the embedding:
/// `4 Σ_j (p_ij - q_ij)(y_i - y_j)(1 + |y_i - y_j|²)⁻¹`.
pub fn kl_gradient(p: &AffinityModel, y: ArrayView2<f64>) -> Array2<f64> {
    let (w, total) = kernel_weights(y);
    gradient_from_weights(p.p.view(), 1.0, y, &w, total)
}

fn gradient_from_weights(
    p: ArrayView2<f64>,
    p_scale: f64,
    y: ArrayView2<f64>,
    w: &Array2<f64>,
    total: f64,
) -> Array2<f64> {
    let (n, s) = y.dim();
    let y = y.as_standard_layout();
    let ys = y.as_slice().expect("standard layout");
    let p = p.as_standard_layout();
    let ps = p.as_slice().expect("standard layout");
    let ws = w.as_slice().expect("standard layout");
    let inv_total = 1.0 / total;
    let mut grad = vec![0.0; n * s];
    grad.par_chunks_mut(s.max(1)).enumerate().for_each(|(i, g)| {
        let yi = &ys[i * s..(i + 1) * s];
        let p_row = &ps[i * n..(i + 1) * n];
        let w_row = &ws[i * n..(i + 1) * n];
        for (j, yj) in ys.chunks_exact(s).enumerate() {
            if j == i {
                continue;
            }
            let wij = w_row[j];
            let coeff = 4.0 * (p_scale * p_row[j] - wij * inv_total) * wij;
            for k in 0..s {
                g[k] += coeff * (yi[k] - yj[k]);
            }
        }
    });
    Array2::from_shape_vec((n, s), grad).expect("n x s")
}

/// Seeded Gaussian initial embedding with standard deviation [`INIT_STD`].
pub fn initial_embedding(n: usize, config: &TsneConfig) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, INIT_STD).expect("valid normal");
    Array2::from_shape_simple_fn((n, config.n_components), || normal.sample(&mut rng))
}

pub fn run_tsne(x: ArrayView2<f64>, config: &TsneConfig) -> Result<Embedding> {
    config.validate(x.nrows())?;
    let init = initial_embedding(x.nrows(), config);
    run_tsne_from(x, config, init)
}

/// Runs the optimisation from a caller-supplied starting embedding.
///
/// Momentum gradient descent with per-coordinate adaptive gains; the affinities
/// are multiplied by the exaggeration factor for the first
/// `early_exaggeration_iters` iterations.
pub fn run_tsne_from(x: ArrayView2<f64>, config: &TsneConfig, init: Array2<f64>) -> Result<Embedding> {
    let n = x.nrows();
    config.validate(n)?;
    if init.dim() != (n, config.n_components) {
        return Err(Error::argument(format!(
            "initial embedding has shape {:?}, expected {:?}",
            init.dim(),
            (n, config.n_components)
        )));
    }
    let affinity = joint_probs(x, config)?;
    let p = affinity.p.view();

    let mut y = init;
    let mut update = Array2::<f64>::zeros(y.dim());
    let mut gains = Array2::<f64>::ones(y.dim());
    let mut kl_history = vec![kl_raw(p, low_dim_affinities(y.view()).view())];

    for iter in 0..config.n_iter {
        let exaggeration = if iter < config.early_exaggeration_iters {
            config.early_exaggeration_factor
        } else {
            1.0
        };
        let momentum = if iter < config.momentum_switch_iter {
            config.momentum_initial
        } else {
            config.momentum_final
        };

        let (w, total) = kernel_weights(y.view());
        let grad = gradient_from_weights(p, exaggeration, y.view(), &w, total);

        Zip::from(&mut gains)
            .and(&update)
            .and(&grad)
            .for_each(|gain, &u, &g| {
                *gain = if u * g < 0.0 {
                    *gain + 0.2
                } else {
                    (*gain * 0.8).max(config.min_gain)
                };
            });
        Zip::from(&mut update)
            .and(&gains)
            .and(&grad)
            .for_each(|u, &gain, &g| *u = momentum * *u - config.learning_rate * gain * g);
        y += &update;

        if (iter + 1) % KL_SAMPLE_EVERY == 0 {
            kl_history.push(kl_raw(p, low_dim_affinities(y.view()).view()));
        }
    }

    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateRow {
            row: y.outer_iter().position(|r| r.iter().any(|v| !v.is_finite())).unwrap_or(0),
            reason: "embedding diverged to non-finite values".into(),
        });
    }
    let final_kl = if config.n_iter % KL_SAMPLE_EVERY == 0 {
        *kl_history.last().expect("history is never empty")
    } else {
        kl_raw(p, low_dim_affinities(y.view()).view())
    };
    Ok(Embedding { y, final_kl, kl_history })
}
