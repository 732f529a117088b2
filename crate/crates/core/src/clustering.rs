//! k-means with k-means++ seeding, silhouette model selection and feature scaling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_LLOYD_ITERATIONS: usize = 300;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, m) in centroids.iter().enumerate() {
        let d = dist2(p, m);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
}

fn kmeans_once(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> KMeansResult {
    let n = data.len();
    let mut centroids = vec![data[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = data.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, w) in d2.iter().enumerate() {
                if r < *w {
                    idx = i;
                    break;
                }
                r -= w;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centroids.push(data[pick].clone());
        for (i, p) in data.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, &centroids[centroids.len() - 1]));
        }
    }

    let dim = data[0].len();
    let mut labels = vec![usize::MAX; n];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut changed = false;
        for (i, p) in data.iter().enumerate() {
            let (c, _) = nearest(p, &centroids);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in data.iter().zip(&labels) {
            counts[c] += 1;
            for d in 0..dim {
                sums[c][d] += p[d];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // re-seed an empty cluster at the point farthest from its centroid
                let far = (0..n)
                    .max_by(|&a, &b| {
                        dist2(&data[a], &centroids[labels[a]]).total_cmp(&dist2(&data[b], &centroids[labels[b]]))
                    })
                    .unwrap();
                centroids[c] = data[far].clone();
            }
        }
    }
    let inertia = data.iter().zip(&labels).map(|(p, &c)| dist2(p, &centroids[c])).sum();
    KMeansResult {
        labels,
        centroids,
        inertia,
    }
}

/// Best-inertia k-means over `restarts` k-means++ initializations.
pub fn kmeans(data: &[Vec<f64>], k: usize, restarts: usize, seed: u64) -> Result<KMeansResult> {
    if k == 0 || k > data.len() {
        return Err(Error::InvalidInput(format!("cannot form {k} clusters from {} points", data.len())));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..restarts.max(1)).map(|_| master.random()).collect();
    let runs: Vec<KMeansResult> = seeds
        .par_iter()
        .map(|&s| kmeans_once(data, k, &mut ChaCha8Rng::seed_from_u64(s)))
        .collect();
    let mut best = 0;
    for i in 1..runs.len() {
        if runs[i].inertia < runs[best].inertia {
            best = i;
        }
    }
    Ok(runs.into_iter().nth(best).unwrap())
}

/// Mean silhouette; points alone in their cluster contribute zero.
pub fn silhouette(data: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let n = data.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut sum = vec![0.0; k];
        let mut cnt = vec![0usize; k];
        for j in 0..n {
            if i != j {
                sum[labels[j]] += dist2(&data[i], &data[j]).sqrt();
                cnt[labels[j]] += 1;
            }
        }
        let own = labels[i];
        if cnt[own] == 0 {
            continue;
        }
        let a = sum[own] / cnt[own] as f64;
        let b = (0..k)
            .filter(|&c| c != own && cnt[c] > 0)
            .map(|c| sum[c] / cnt[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if b.is_finite() {
            let m = a.max(b);
            if m > 0.0 {
                total += (b - a) / m;
            }
        }
    }
    total / n as f64
}

/// Column-wise standardization to zero mean and unit variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Columns kept (non-zero variance).
    pub kept: Vec<usize>,
}

impl Standardizer {
    /// Columns with zero variance are dropped with a warning; if none remain the
    /// features are degenerate.
    pub fn fit(data: &[Vec<f64>]) -> Result<Self> {
        let n = data.len() as f64;
        let dim = data.first().map_or(0, |r| r.len());
        let mean: Vec<f64> = (0..dim).map(|d| data.iter().map(|r| r[d]).sum::<f64>() / n).collect();
        let std: Vec<f64> = (0..dim)
            .map(|d| (data.iter().map(|r| (r[d] - mean[d]).powi(2)).sum::<f64>() / n).sqrt())
            .collect();
        let kept: Vec<usize> = (0..dim)
            .filter(|&d| {
                let ok = std[d] > 1e-12 * mean[d].abs().max(1e-300);
                if !ok {
                    log::warn!("DegenerateFeatures: feature {d} has zero variance and is dropped");
                }
                ok
            })
            .collect();
        if kept.is_empty() {
            return Err(Error::DegenerateFeatures("every feature has zero variance".into()));
        }
        Ok(Self { mean, std, kept })
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        self.kept.iter().map(|&d| (row[d] - self.mean[d]) / self.std[d]).collect()
    }

    /// Back to original units; dropped columns take their constant value.
    pub fn inverse(&self, z: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (j, &d) in self.kept.iter().enumerate() {
            out[d] = self.mean[d] + z[j] * self.std[d];
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSelection {
    pub k: usize,
    pub labels: Vec<usize>,
    /// Centroids in original units.
    pub centroids: Vec<Vec<f64>>,
    /// Centroids in standardized units.
    pub centroids_scaled: Vec<Vec<f64>>,
    /// `(k, mean silhouette)` for every tried k.
    pub silhouettes: Vec<(usize, f64)>,
    pub standardizer: Standardizer,
    pub inertia: f64,
}

/// Standardizes the features, runs k-means for each k in `k_min..=k_max`
/// (capped at `n - 1`) and keeps the k with the largest mean silhouette.
pub fn select_k(features: &[Vec<f64>], k_min: usize, k_max: usize, restarts: usize, seed: u64) -> Result<ClusterSelection> {
    let n = features.len();
    let k_min = k_min.max(2);
    let k_max = k_max.min(n.saturating_sub(1));
    if k_max < k_min {
        return Err(Error::InvalidInput(format!(
            "{n} designs are too few to compare cluster counts from {k_min}"
        )));
    }
    let standardizer = Standardizer::fit(features)?;
    let z: Vec<Vec<f64>> = features.iter().map(|r| standardizer.transform(r)).collect();
    let mut silhouettes = Vec::new();
    let mut best: Option<(f64, KMeansResult)> = None;
    for k in k_min..=k_max {
        let km = kmeans(&z, k, restarts, seed.wrapping_add(k as u64))?;
        let s = silhouette(&z, &km.labels, k);
        silhouettes.push((k, s));
        if best.as_ref().is_none_or(|(bs, _)| s > *bs) {
            best = Some((s, km));
        }
    }
    let (_, km) = best.unwrap();
    Ok(ClusterSelection {
        k: km.centroids.len(),
        labels: km.labels,
        centroids: km.centroids.iter().map(|c| standardizer.inverse(c)).collect(),
        centroids_scaled: km.centroids,
        silhouettes,
        standardizer,
        inertia: km.inertia,
    })
}
