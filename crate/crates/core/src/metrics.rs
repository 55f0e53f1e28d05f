//! Silhouette coefficient of a labelled point cloud.

use std::collections::BTreeMap;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
}

impl Metric {
    fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// Per-point silhouette terms and their mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteDetail {
    /// Mean distance to the other members of the point's own cluster.
    pub a: Vec<f64>,
    /// Smallest mean distance to the members of another cluster.
    pub b: Vec<f64>,
    pub s: Vec<f64>,
    pub mean_s: f64,
}

/// Silhouette of `points` clustered by `labels`.
///
/// Points in singleton clusters, and points with `a = b = 0`, score 0. Labels may
/// be any integers; only their equality matters.
pub fn silhouette(points: ArrayView2<f64>, labels: &[usize], metric: Metric) -> Result<SilhouetteDetail> {
    let n = points.nrows();
    if labels.len() != n {
        return Err(Error::argument(format!(
            "{} labels for {} points",
            labels.len(),
            n
        )));
    }
    if n < 2 {
        return Err(Error::argument("silhouette needs at least 2 points"));
    }

    // dense cluster ids in label order
    let ids: BTreeMap<usize, usize> = labels
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(dense, label)| (label, dense))
        .collect();
    let n_clusters = ids.len();
    if n_clusters < 2 {
        return Err(Error::argument("silhouette undefined for p < 2"));
    }
    let cluster: Vec<usize> = labels.iter().map(|l| ids[l]).collect();
    let mut sizes = vec![0usize; n_clusters];
    for &c in &cluster {
        sizes[c] += 1;
    }

    let rows: Vec<Vec<f64>> = points.outer_iter().map(|r| r.to_vec()).collect();
    let terms: Vec<(f64, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut sums = vec![0.0; n_clusters];
            for j in 0..n {
                if j != i {
                    sums[cluster[j]] += metric.distance(&rows[i], &rows[j]);
                }
            }
            let own = cluster[i];
            let b = (0..n_clusters)
                .filter(|&c| c != own)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            if sizes[own] == 1 {
                return (0.0, b, 0.0);
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let denom = a.max(b);
            let s = if denom > 0.0 { (b - a) / denom } else { 0.0 };
            (a, b, s)
        })
        .collect();

    let a = terms.iter().map(|t| t.0).collect();
    let b = terms.iter().map(|t| t.1).collect();
    let s: Vec<f64> = terms.iter().map(|t| t.2).collect();
    let mean_s = s.iter().sum::<f64>() / n as f64;
    Ok(SilhouetteDetail { a, b, s, mean_s })
}

/// Mean silhouette only.
pub fn silhouette_score(points: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
    Ok(silhouette(points, labels, Metric::Euclidean)?.mean_s)
}
