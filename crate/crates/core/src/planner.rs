//! Per-layer feature evaluation, the top-down pruning rule, and stored-parameter
//! accounting.

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::silhouette_score;
use crate::trace::FeatureTrace;
use crate::tsne::{run_tsne, TsneConfig};

/// Silhouette of the 2-D embedding of every layer's features, lowest layer first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScProfile {
    pub dataset: String,
    pub n_layers: usize,
    pub values: Vec<f64>,
    pub seed: u64,
    pub n_runs: usize,
    pub tsne: TsneConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_run_values: Option<Vec<Vec<f64>>>,
}

impl ScProfile {
    /// A profile from known values, e.g. for planning without running t-SNE.
    pub fn from_values(dataset: impl Into<String>, values: Vec<f64>) -> Self {
        let tsne = TsneConfig::default();
        ScProfile {
            dataset: dataset.into(),
            n_layers: values.len(),
            values,
            seed: tsne.seed,
            n_runs: 1,
            tsne,
            per_run_values: None,
        }
    }

    /// Flat `layer,sc_index` table, layers numbered from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer,sc_index\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, v));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.n_layers {
            return Err(Error::validation(format!(
                "profile declares {} layers but has {} values",
                self.n_layers,
                self.values.len()
            )));
        }
        if let Some(v) = self.values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::validation(format!("SC index {} is outside [-1, 1]", v)));
        }
        if self.n_runs == 0 {
            return Err(Error::validation("n_runs must be positive"));
        }
        if let Some(runs) = &self.per_run_values {
            if runs.len() != self.n_layers || runs.iter().any(|r| r.len() != self.n_runs) {
                return Err(Error::validation("per_run_values must be n_layers x n_runs"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Prune to the target depth at once, then retrain.
    #[default]
    OneShot,
    /// Remove one layer at a time, retraining after each removal.
    Iterative,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::OneShot => "one_shot",
            Strategy::Iterative => "iterative",
        })
    }
}

/// Outcome of the top-down traversal. Layers are numbered from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruningPlan {
    pub dataset: String,
    pub n_layers: usize,
    pub alpha: f64,
    pub threshold: f64,
    /// Layer whose score fell below the threshold; 0 when none did.
    pub stop_index: usize,
    pub first_pruned_layer: usize,
    pub keep_layers: usize,
    /// Inclusive `[first, last]` range of removed layers, `None` when nothing is removed.
    pub pruned_range: Option<[usize; 2]>,
    pub strategy: Strategy,
}

impl PruningPlan {
    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn pruned_count(&self) -> usize {
        self.pruned_range.map_or(0, |[lo, hi]| hi + 1 - lo)
    }

    pub fn keeps(&self, layer: usize) -> bool {
        (1..=self.keep_layers).contains(&layer)
    }

    pub fn validate(&self) -> Result<()> {
        if self.keep_layers == 0 || self.keep_layers + self.pruned_count() != self.n_layers {
            return Err(Error::validation(format!(
                "plan keeps {} and prunes {} of {} layers",
                self.keep_layers,
                self.pruned_count(),
                self.n_layers
            )));
        }
        if self.stop_index + 1 != self.keep_layers || self.first_pruned_layer != self.stop_index + 2 {
            return Err(Error::validation("stop_index, keep_layers and first_pruned_layer disagree"));
        }
        if let Some([lo, hi]) = self.pruned_range {
            if lo != self.first_pruned_layer || hi != self.n_layers {
                return Err(Error::validation("pruned_range must run from first_pruned_layer to n_layers"));
            }
        }
        Ok(())
    }
}

/// Derives an independent seed for one (layer, run) pair.
pub fn derive_seed(base: u64, layer: usize, run: usize) -> u64 {
    let mut z = base
        ^ (layer as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (run as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SC index of each of `n_runs` independent t-SNE runs on one layer.
pub fn evaluate_layer_runs(
    features: ArrayView2<f64>,
    labels: &[usize],
    config: &TsneConfig,
    layer: usize,
    n_runs: usize,
) -> Result<Vec<f64>> {
    if n_runs == 0 {
        return Err(Error::argument("n_runs must be positive"));
    }
    if labels.len() != features.nrows() {
        return Err(Error::argument(format!(
            "{} labels for {} samples",
            labels.len(),
            features.nrows()
        )));
    }
    (0..n_runs)
        .map(|run| {
            let run_config = TsneConfig {
                seed: derive_seed(config.seed, layer, run),
                ..config.clone()
            };
            let embedding = run_tsne(features, &run_config)?;
            silhouette_score(embedding.y.view(), labels)
        })
        .collect()
}

/// Mean SC index of one layer's features over `n_runs` t-SNE runs.
///
/// `layer` is the 1-based layer number and only feeds seed derivation, so the same matrix evaluated as a different
/// layer sees a different initialization.
pub fn evaluate_layer(
    features: ArrayView2<f64>,
    labels: &[usize],
    config: &TsneConfig,
    layer: usize,
    n_runs: usize,
) -> Result<f64> {
    let runs = evaluate_layer_runs(features, labels, config, layer, n_runs)?;
    Ok(mean(&runs))
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Evaluates every layer independently (in parallel) and collects the profile.
pub fn evaluate_all_layers(trace: &FeatureTrace, config: &TsneConfig, n_runs: usize) -> Result<ScProfile> {
    trace.validate()?;
    let labels = trace.labels_usize();
    let results: Vec<Result<Vec<f64>>> = (0..trace.n_layers())
        .into_par_iter()
        .map(|layer| {
            let features = trace.layer_f64(layer);
            evaluate_layer_runs(features.view(), &labels, config, layer + 1, n_runs).map_err(|e| {
                Error::Layer {
                    layer: layer + 1,
                    source: Box::new(e),
                }
            })
        })
        .collect();
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ScProfile {
        dataset: trace.dataset_name.clone(),
        n_layers: trace.n_layers(),
        values: runs.iter().map(|r| mean(r)).collect(),
        seed: config.seed,
        n_runs,
        tsne: config.clone(),
        per_run_values: (n_runs > 1).then_some(runs),
    })
}

/// Threshold `T = alpha * SC_N`, then walk down from layer N-1 and stop at the
/// first layer scoring strictly below `T`; layers from two above it are pruned.
/// If no layer triggers, only layer 1 is kept.
pub fn plan_prune(profile: &ScProfile, alpha: f64) -> Result<PruningPlan> {
    let values = &profile.values;
    let n = values.len();
    if n < 2 {
        return Err(Error::argument(format!("need at least 2 layers to plan, got {}", n)));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::argument(format!("alpha must be a nonnegative number, got {}", alpha)));
    }
    let threshold = alpha * values[n - 1];
    if threshold < 0.0 {
        log::warn!(
            "top-layer SC index {} is negative; threshold {} will rarely trigger",
            values[n - 1],
            threshold
        );
    }
    let stop_index = (1..n).rev().find(|&i| values[i - 1] < threshold).unwrap_or(0);
    let first_pruned_layer = stop_index + 2;
    let plan = PruningPlan {
        dataset: profile.dataset.clone(),
        n_layers: n,
        alpha,
        threshold,
        stop_index,
        first_pruned_layer,
        keep_layers: stop_index + 1,
        pruned_range: (first_pruned_layer <= n).then_some([first_pruned_layer, n]),
        strategy: Strategy::OneShot,
    };
    debug_assert!(plan.validate().is_ok());
    Ok(plan)
}

/// Parameter counts of a backbone shared by K adapter-tuned downstream models.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelStorageSpec {
    /// Pretrained parameters per layer, shared by every dataset.
    pub pretrained_per_layer: Vec<u64>,
    /// `adapter_per_layer[j][i]`: adapter parameters of layer `i + 1` for dataset `j`.
    pub adapter_per_layer: Vec<Vec<u64>>,
    pub head_per_dataset: Vec<u64>,
    #[serde(default)]
    pub dataset_names: Vec<String>,
}

impl ModelStorageSpec {
    pub fn n_layers(&self) -> usize {
        self.pretrained_per_layer.len()
    }

    pub fn n_datasets(&self) -> usize {
        self.head_per_dataset.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_layers();
        let k = self.n_datasets();
        if n == 0 || k == 0 {
            return Err(Error::validation("storage spec needs at least one layer and one dataset"));
        }
        if self.adapter_per_layer.len() != k {
            return Err(Error::validation(format!(
                "{} adapter rows for {} datasets",
                self.adapter_per_layer.len(),
                k
            )));
        }
        if let Some(j) = self.adapter_per_layer.iter().position(|row| row.len() != n) {
            return Err(Error::validation(format!(
                "adapter row {} has {} layers, expected {}",
                j,
                self.adapter_per_layer[j].len(),
                n
            )));
        }
        if !self.dataset_names.is_empty() && self.dataset_names.len() != k {
            return Err(Error::validation(format!(
                "{} dataset names for {} datasets",
                self.dataset_names.len(),
                k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageReport {
    /// Pretrained layers stored once, plus each dataset's retained adapters and head.
    pub stored_total: u64,
    /// Same accounting with nothing pruned: the adapter-tuning baseline.
    pub petl_baseline: u64,
    /// Each dataset storing its own copy of the retained pretrained layers.
    pub naive_copies: u64,
    pub per_dataset_index: Vec<usize>,
    #[serde(default)]
    pub dataset_names: Vec<String>,
}

/// Stored-parameter totals for per-dataset retained depths `indices` (1-based, each in `1..=N`).
pub fn storage_report(spec: &ModelStorageSpec, indices: &[usize]) -> Result<StorageReport> {
    spec.validate()?;
    let n = spec.n_layers();
    if indices.len() != spec.n_datasets() {
        return Err(Error::argument(format!(
            "{} indices for {} datasets",
            indices.len(),
            spec.n_datasets()
        )));
    }
    if let Some(&bad) = indices.iter().find(|&&idx| idx == 0 || idx > n) {
        return Err(Error::argument(format!("index {} is outside 1..={}", bad, n)));
    }

    let pretrained: u64 = spec.pretrained_per_layer.iter().sum();
    let heads: u64 = spec.head_per_dataset.iter().sum();
    let adapters_kept: u64 = spec
        .adapter_per_layer
        .iter()
        .zip(indices)
        .map(|(row, &idx)| row[..idx].iter().sum::<u64>())
        .sum();
    let adapters_all: u64 = spec.adapter_per_layer.iter().flatten().sum();
    let pretrained_copies: u64 = indices
        .iter()
        .map(|&idx| spec.pretrained_per_layer[..idx].iter().sum::<u64>())
        .sum();

    Ok(StorageReport {
        stored_total: pretrained + adapters_kept + heads,
        petl_baseline: pretrained + adapters_all + heads,
        naive_copies: pretrained_copies + adapters_kept + heads,
        per_dataset_index: indices.to_vec(),
        dataset_names: spec.dataset_names.clone(),
    })
}
