//! Desk-scale experiments: synthetic layer traces, a linear-probe retrainer driven
//! by a warmup + cosine schedule, and one-shot versus iterative pruning.

use std::f64::consts::PI;
use std::fmt::Write as _;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::{derive_seed, evaluate_all_layers, plan_prune, PruningPlan, ScProfile, Strategy};
use crate::trace::FeatureTrace;
use crate::tsne::TsneConfig;

/// Fraction of each class held out for probe accuracy.
pub const DEFAULT_HOLDOUT: f64 = 0.3;

/// Per-layer Gaussian class blobs whose separation follows a curve over depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_layers: usize,
    pub n_samples: usize,
    pub dim: usize,
    pub n_classes: usize,
    /// Distance of each class centre from the origin, per layer.
    pub separation_curve: Vec<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Separation rising linearly from `first` at layer 1 to `last` at the top layer.
    pub fn linear_ramp(n_layers: usize, n_samples: usize, n_classes: usize, first: f64, last: f64, seed: u64) -> Self {
        let step = if n_layers > 1 { (last - first) / (n_layers - 1) as f64 } else { 0.0 };
        let separation_curve = (0..n_layers).map(|i| first + step * i as f64).collect();
        SyntheticSpec {
            n_layers,
            n_samples,
            dim: 32,
            n_classes,
            separation_curve,
            noise_sigma: 1.0,
            seed,
        }
    }

    /// The monotone generator: 12 layers, 500 samples, 10 classes, separation
    /// rising from 2.5 (clusters barely visible after embedding) to 7 (cleanly split).
    pub fn monotone() -> Self {
        Self::linear_ramp(12, 500, 10, 2.5, 7.0, 7)
    }

    /// Same shape as [`SyntheticSpec::monotone`] but with no class signal at any layer.
    pub fn zero_separation(n_layers: usize, n_samples: usize, n_classes: usize, seed: u64) -> Self {
        Self::linear_ramp(n_layers, n_samples, n_classes, 0.0, 0.0, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_layers == 0 || self.n_samples == 0 || self.dim == 0 {
            return Err(Error::argument("n_layers, n_samples and dim must be positive"));
        }
        if self.n_classes < 2 || self.n_samples < self.n_classes {
            return Err(Error::argument(format!(
                "need at least 2 classes and one sample per class, got {} classes for {} samples",
                self.n_classes, self.n_samples
            )));
        }
        if self.separation_curve.len() != self.n_layers {
            return Err(Error::argument(format!(
                "separation curve has {} entries for {} layers",
                self.separation_curve.len(),
                self.n_layers
            )));
        }
        if self.separation_curve.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::argument("separations must be finite and nonnegative"));
        }
        if !(self.noise_sigma > 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::argument("noise_sigma must be positive"));
        }
        Ok(())
    }
}

/// Sample `s` has label `s mod n_classes`; in layer `i` it is drawn around
/// `separation_curve[i] * u_label` with isotropic noise, `u_c` seeded unit vectors.
pub fn gen_synthetic_trace(spec: &SyntheticSpec) -> Result<FeatureTrace> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let noise = Normal::new(0.0, spec.noise_sigma).expect("valid normal");

    let directions: Vec<Vec<f64>> = (0..spec.n_classes)
        .map(|_| {
            let v: Vec<f64> = (0..spec.dim).map(|_| unit.sample(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    let labels: Vec<u32> = (0..spec.n_samples).map(|s| (s % spec.n_classes) as u32).collect();

    let layers = spec
        .separation_curve
        .iter()
        .map(|&sep| {
            Array2::from_shape_fn((spec.n_samples, spec.dim), |(s, k)| {
                let centre = sep * directions[labels[s] as usize][k];
                (centre + noise.sample(&mut rng)) as f32
            })
        })
        .collect();
    FeatureTrace::new(
        format!("synthetic-seed{}", spec.seed),
        spec.n_classes as u32,
        layers,
        labels,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleShape {
    #[default]
    OneCycleCosine,
}

/// Linear warmup followed by a single cosine decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub base_lr: f64,
    pub warmup_epochs: usize,
    pub total_epochs: usize,
    pub min_lr: f64,
    pub shape: ScheduleShape,
}

impl Default for LrSchedule {
    fn default() -> Self {
        LrSchedule {
            base_lr: 1e-3,
            warmup_epochs: 10,
            total_epochs: 100,
            min_lr: 0.0,
            shape: ScheduleShape::OneCycleCosine,
        }
    }
}

impl LrSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_lr > 0.0) || !(self.min_lr >= 0.0) || self.min_lr > self.base_lr {
            return Err(Error::argument("need 0 <= min_lr <= base_lr and base_lr > 0"));
        }
        if self.total_epochs == 0 || self.warmup_epochs >= self.total_epochs {
            return Err(Error::argument(format!(
                "warmup_epochs {} must be below total_epochs {}",
                self.warmup_epochs, self.total_epochs
            )));
        }
        Ok(())
    }
}

/// Learning rate for `epoch` (0-based).
pub fn lr_at(schedule: &LrSchedule, epoch: usize) -> Result<f64> {
    schedule.validate()?;
    if epoch >= schedule.total_epochs {
        return Err(Error::argument(format!(
            "epoch {} is outside 0..{}",
            epoch, schedule.total_epochs
        )));
    }
    let LrSchedule { base_lr, min_lr, .. } = *schedule;
    let warmup = schedule.warmup_epochs;
    let lr = match schedule.shape {
        ScheduleShape::OneCycleCosine if epoch < warmup => {
            min_lr + (base_lr - min_lr) * epoch as f64 / warmup as f64
        }
        ScheduleShape::OneCycleCosine => {
            let progress = (epoch - warmup) as f64 / (schedule.total_epochs - warmup) as f64;
            min_lr + 0.5 * (base_lr - min_lr) * (1.0 + (PI * progress).cos())
        }
    };
    Ok(lr)
}

/// How a pruned model's probe is retrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrainPreset {
    /// Keep the previous head and run the full warmup + cosine schedule.
    #[default]
    OneCycle,
    /// Reinitialize the head and run the full schedule.
    FromScratch,
    /// Keep the previous head at a constant `base_lr / 100`.
    FineTune,
}

/// Softmax classifier weights, one row per class; the last column is the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProbe {
    pub weights: Array2<f64>,
}

impl LinearProbe {
    pub fn zeros(n_classes: usize, dim: usize) -> Self {
        LinearProbe {
            weights: Array2::zeros((n_classes, dim + 1)),
        }
    }

    fn logits(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let d = x.ncols();
        let w = self.weights.slice(ndarray::s![.., ..d]);
        let b = self.weights.column(d);
        let mut z = x.dot(&w.t());
        z += &b;
        z
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<usize> {
        self.logits(x)
            .outer_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (c, &v)| if v > best.1 { (c, v) } else { best })
                    .0
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub layer_index: usize,
    /// Accuracy on the held-out split.
    pub accuracy: f64,
    pub epochs_run: usize,
    pub final_loss: f64,
}

/// Stratified train / held-out split. Every class with at least two samples puts
/// one or more in each side.
pub fn stratified_split(labels: &[usize], holdout_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&holdout_fraction) || holdout_fraction == 0.0 {
        return Err(Error::argument(format!(
            "holdout_fraction must be in (0, 1), got {}",
            holdout_fraction
        )));
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for members in by_class.iter_mut().filter(|m| !m.is_empty()) {
        members.shuffle(&mut rng);
        let n_test = if members.len() < 2 {
            0
        } else {
            ((members.len() as f64 * holdout_fraction).round() as usize).clamp(1, members.len() - 1)
        };
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    let distinct = |idx: &[usize]| {
        let mut seen: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    };
    if distinct(&train) < 2 || distinct(&test) < 2 {
        return Err(Error::argument("degenerate split: each side needs at least 2 classes"));
    }
    Ok((train, test))
}

/// Full-batch AdamW on softmax cross-entropy, one step per epoch.
struct AdamW {
    m: Array2<f64>,
    v: Array2<f64>,
    t: i32,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const WEIGHT_DECAY: f64 = 1e-4;

impl AdamW {
    fn new(shape: (usize, usize)) -> Self {
        AdamW {
            m: Array2::zeros(shape),
            v: Array2::zeros(shape),
            t: 0,
        }
    }

    fn step(&mut self, w: &mut Array2<f64>, grad: &Array2<f64>, lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - BETA1.powi(self.t);
        let bc2 = 1.0 - BETA2.powi(self.t);
        ndarray::Zip::from(w)
            .and(&mut self.m)
            .and(&mut self.v)
            .and(grad)
            .for_each(|w, m, v, &g| {
                *m = BETA1 * *m + (1.0 - BETA1) * g;
                *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                *w -= lr * WEIGHT_DECAY * *w;
                *w -= lr * (*m / bc1) / ((*v / bc2).sqrt() + ADAM_EPS);
            });
    }
}

/// Mean cross-entropy and its gradient with respect to the probe weights.
fn loss_and_grad(probe: &LinearProbe, x: ArrayView2<f64>, labels: &[usize]) -> (f64, Array2<f64>) {
    let n = x.nrows() as f64;
    let mut z = probe.logits(x);
    let mut loss = 0.0;
    for (mut row, &label) in z.outer_iter_mut().zip(labels) {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let total = row.sum();
        row /= total;
        loss -= row[label].max(1e-300).ln();
        row[label] -= 1.0;
    }
    // z now holds softmax - onehot
    let d = x.ncols();
    let mut grad = Array2::zeros(probe.weights.dim());
    grad.slice_mut(ndarray::s![.., ..d]).assign(&(z.t().dot(&x) / n));
    grad.column_mut(d).assign(&(z.sum_axis(Axis(0)) / n));
    (loss / n, grad)
}

fn select(x: ArrayView2<f64>, labels: &[usize], idx: &[usize]) -> (Array2<f64>, Vec<usize>) {
    (x.select(Axis(0), idx), idx.iter().map(|&i| labels[i]).collect())
}

fn accuracy(probe: &LinearProbe, x: ArrayView2<f64>, labels: &[usize]) -> f64 {
    let hits = probe.predict(x).iter().zip(labels).filter(|(p, l)| p == l).count();
    hits as f64 / labels.len() as f64
}

/// Trains a fresh probe on one layer's features; see [`train_probe_from`].
pub fn train_probe(
    features: ArrayView2<f64>,
    labels: &[usize],
    schedule: &LrSchedule,
    seed: u64,
    holdout_fraction: f64,
) -> Result<ProbeResult> {
    train_probe_from(features, labels, schedule, seed, holdout_fraction, None, RetrainPreset::FromScratch)
        .map(|(r, _)| r)
}

/// Trains a softmax probe with full-batch AdamW, one step per epoch at the
/// schedule's rate, and reports held-out accuracy. `init` warm-starts the weights
/// unless the preset reinitializes them.
pub fn train_probe_from(
    features: ArrayView2<f64>,
    labels: &[usize],
    schedule: &LrSchedule,
    seed: u64,
    holdout_fraction: f64,
    init: Option<&LinearProbe>,
    preset: RetrainPreset,
) -> Result<(ProbeResult, LinearProbe)> {
    schedule.validate()?;
    if labels.len() != features.nrows() {
        return Err(Error::argument(format!(
            "{} labels for {} samples",
            labels.len(),
            features.nrows()
        )));
    }
    let (train_idx, test_idx) = stratified_split(labels, holdout_fraction, seed)?;
    let (x_train, y_train) = select(features, labels, &train_idx);
    let (x_test, y_test) = select(features, labels, &test_idx);
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);

    let fresh = LinearProbe::zeros(n_classes, features.ncols());
    let mut probe = match (preset, init) {
        (RetrainPreset::FromScratch, _) | (_, None) => fresh,
        (_, Some(prev)) if prev.weights.dim() == fresh.weights.dim() => prev.clone(),
        (_, Some(prev)) => {
            return Err(Error::argument(format!(
                "initial probe has shape {:?}, expected {:?}",
                prev.weights.dim(),
                fresh.weights.dim()
            )))
        }
    };

    let mut adam = AdamW::new(probe.weights.dim());
    for epoch in 0..schedule.total_epochs {
        let lr = match preset {
            RetrainPreset::FineTune => schedule.base_lr / 100.0,
            _ => lr_at(schedule, epoch)?,
        };
        let (_, grad) = loss_and_grad(&probe, x_train.view(), &y_train);
        adam.step(&mut probe.weights, &grad, lr);
    }
    let (final_loss, _) = loss_and_grad(&probe, x_train.view(), &y_train);
    let result = ProbeResult {
        layer_index: 0,
        accuracy: accuracy(&probe, x_test.view(), &y_test),
        epochs_run: schedule.total_epochs,
        final_loss,
    };
    Ok((result, probe))
}

/// Spearman rank correlation (average ranks for ties). `None` if either side is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let ra = ranks(a);
    let rb = ranks(b);
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    (va > 0.0 && vb > 0.0).then(|| cov / (va * vb).sqrt())
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut out = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            out[i] = rank;
        }
        start = end;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub depth: usize,
    pub accuracy: f64,
}

/// Probe accuracy after pruning to a plan's depth and retraining.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrainOutcome {
    pub final_depth: usize,
    pub accuracy: f64,
    /// Accuracy after each retraining, from depth `N - 1` down to `final_depth`.
    pub trajectory: Vec<TrajectoryStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaOutcome {
    pub alpha: f64,
    pub plan: PruningPlan,
    pub retrain: RetrainOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub layer: usize,
    pub sc_index: f64,
    pub probe_accuracy: f64,
    pub kept: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub dataset: String,
    pub strategy: Strategy,
    pub preset: RetrainPreset,
    pub alphas: Vec<f64>,
    pub schedule: LrSchedule,
    pub profile: ScProfile,
    pub probes: Vec<ProbeResult>,
    /// Rank correlation between per-layer SC index and probe accuracy.
    pub spearman: Option<f64>,
    pub outcomes: Vec<AlphaOutcome>,
    pub rows: Vec<BenchRow>,
}

impl BenchmarkReport {
    /// Flat table: `layer,sc_index,probe_accuracy,kept@<alpha>...`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer,sc_index,probe_accuracy");
        for alpha in &self.alphas {
            let _ = write!(out, ",kept@{}", alpha);
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{},{},{}", row.layer, row.sc_index, row.probe_accuracy);
            for &k in &row.kept {
                out.push_str(if k { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }
}

pub fn run_benchmark(
    trace: &FeatureTrace,
    alphas: &[f64],
    config: &TsneConfig,
    schedule: &LrSchedule,
    strategy: Strategy,
) -> Result<BenchmarkReport> {
    run_benchmark_with(trace, alphas, config, schedule, strategy, RetrainPreset::OneCycle)
}

/// Profiles every layer, trains one probe per layer, plans for every alpha and
/// retrains the top-layer head at each planned depth.
pub fn run_benchmark_with(
    trace: &FeatureTrace,
    alphas: &[f64],
    config: &TsneConfig,
    schedule: &LrSchedule,
    strategy: Strategy,
    preset: RetrainPreset,
) -> Result<BenchmarkReport> {
    if alphas.is_empty() {
        return Err(Error::argument("at least one alpha is required"));
    }
    schedule.validate()?;
    let profile = evaluate_all_layers(trace, config, 1)?;
    let labels = trace.labels_usize();
    let features: Vec<Array2<f64>> = (0..trace.n_layers()).map(|l| trace.layer_f64(l)).collect();
    let probe_seed = derive_seed(config.seed, 0, usize::MAX);

    let trained: Vec<Result<(ProbeResult, LinearProbe)>> = features
        .par_iter()
        .enumerate()
        .map(|(l, x)| {
            train_probe_from(x.view(), &labels, schedule, probe_seed, DEFAULT_HOLDOUT, None, RetrainPreset::FromScratch)
                .map(|(r, p)| (ProbeResult { layer_index: l + 1, ..r }, p))
                .map_err(|e| Error::Layer { layer: l + 1, source: Box::new(e) })
        })
        .collect();
    let trained = trained.into_iter().collect::<Result<Vec<_>>>()?;
    let head = &trained.last().expect("trace has layers").1;
    let probes: Vec<ProbeResult> = trained.iter().map(|(r, _)| r.clone()).collect();

    let outcomes = alphas
        .iter()
        .map(|&alpha| {
            let plan = plan_prune(&profile, alpha)?.with_strategy(strategy);
            let retrain = retrain_to_depth(&features, &labels, schedule, probe_seed, head, &probes, &plan, preset)?;
            Ok(AlphaOutcome { alpha, plan, retrain })
        })
        .collect::<Result<Vec<_>>>()?;

    let accuracies: Vec<f64> = probes.iter().map(|p| p.accuracy).collect();
    let rows = (0..trace.n_layers())
        .map(|l| BenchRow {
            layer: l + 1,
            sc_index: profile.values[l],
            probe_accuracy: accuracies[l],
            kept: outcomes.iter().map(|o| o.plan.keeps(l + 1)).collect(),
        })
        .collect();

    Ok(BenchmarkReport {
        dataset: trace.dataset_name.clone(),
        strategy,
        preset,
        alphas: alphas.to_vec(),
        schedule: schedule.clone(),
        spearman: spearman(&profile.values, &accuracies),
        profile,
        probes,
        outcomes,
        rows,
    })
}

#[allow(clippy::too_many_arguments)]
fn retrain_to_depth(
    features: &[Array2<f64>],
    labels: &[usize],
    schedule: &LrSchedule,
    seed: u64,
    head: &LinearProbe,
    probes: &[ProbeResult],
    plan: &PruningPlan,
    preset: RetrainPreset,
) -> Result<RetrainOutcome> {
    let n = features.len();
    let target = plan.keep_layers;
    if target == n {
        return Ok(RetrainOutcome {
            final_depth: n,
            accuracy: probes[n - 1].accuracy,
            trajectory: Vec::new(),
        });
    }
    let depths: Vec<usize> = match plan.strategy {
        Strategy::OneShot => vec![target],
        Strategy::Iterative => (target..n).rev().collect(),
    };
    let mut current = head.clone();
    let mut trajectory = Vec::with_capacity(depths.len());
    for depth in depths {
        let (result, probe) = train_probe_from(
            features[depth - 1].view(),
            labels,
            schedule,
            seed,
            DEFAULT_HOLDOUT,
            Some(&current),
            preset,
        )?;
        current = probe;
        trajectory.push(TrajectoryStep { depth, accuracy: result.accuracy });
    }
    let accuracy = trajectory.last().map_or(0.0, |s| s.accuracy);
    Ok(RetrainOutcome { final_depth: target, accuracy, trajectory })
}

/// Shuffles labels in place with a seeded generator; used to build chance-level controls.
pub fn shuffled_labels(labels: &[usize], seed: u64) -> Vec<usize> {
    let mut out = labels.to_vec();
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    out
}

/// Two tight Gaussian blobs at `±separation / 2` on the first axis, `per_blob` points each.
pub fn two_blobs(per_blob: usize, dim: usize, separation: f64, radius: f64, seed: u64) -> (Array2<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, radius).expect("valid normal");
    let n = 2 * per_blob;
    let labels: Vec<usize> = (0..n).map(|i| i / per_blob).collect();
    let x = Array2::from_shape_fn((n, dim), |(i, k)| {
        let centre = if k == 0 {
            if labels[i] == 0 { -separation / 2.0 } else { separation / 2.0 }
        } else {
            0.0
        };
        centre + noise.sample(&mut rng)
    });
    (x, labels)
}
