//! Seeded k-means with k-means++ initialization on 2-D points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansConfig {
    pub max_iterations: usize,
    /// Stop once no centroid moves farther than this.
    pub tolerance: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Cluster index per input point.
    pub labels: Vec<usize>,
    pub centroids: Vec<[f64; 2]>,
    pub iterations: usize,
}

impl Clustering {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|i| self.labels[*i] == cluster)
            .collect()
    }
}

fn sq_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn nearest(p: [f64; 2], centroids: &[[f64; 2]]) -> usize {
    let mut best = 0;
    for (i, c) in centroids.iter().enumerate().skip(1) {
        // strict: equidistant points stay with the lowest centroid index
        if sq_dist(p, *c) < sq_dist(p, centroids[best]) {
            best = i;
        }
    }
    best
}

fn plus_plus_init(points: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let mut chosen = vec![rng.gen_range(0..points.len())];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(*p, points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = None;
            for (i, w) in d2.iter().enumerate() {
                if *w > 0.0 {
                    pick = Some(i);
                    if target < *w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.unwrap_or(0)
        } else {
            // all remaining points coincide with a centroid
            (0..points.len()).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(*p, points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i]).collect()
}

/// Partitions `points` into exactly `k` non-empty clusters (requires
/// `1 <= k <= points.len()`). Clusters are relabelled in order of their lowest
/// point index so the output does not depend on initialization order.
pub fn kmeans(points: &[[f64; 2]], k: usize, seed: u64, config: &KMeansConfig) -> Clustering {
    assert!(k >= 1 && k <= points.len(), "k out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let mut labels = vec![0usize; points.len()];
    let mut iterations = 0;

    while iterations < config.max_iterations {
        iterations += 1;
        for (i, p) in points.iter().enumerate() {
            labels[i] = nearest(*p, &centroids);
        }
        fill_empty_clusters(points, &mut labels, &centroids, k);

        let mut sums = vec![[0.0f64; 2]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            sums[labels[i]][0] += p[0];
            sums[labels[i]][1] += p[1];
            counts[labels[i]] += 1;
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            let next = [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
            shift = shift.max(sq_dist(next, centroids[c]).sqrt());
            centroids[c] = next;
        }
        if shift <= config.tolerance {
            break;
        }
    }
    for (i, p) in points.iter().enumerate() {
        labels[i] = nearest(*p, &centroids);
    }
    fill_empty_clusters(points, &mut labels, &centroids, k);
    let mut out = relabel(labels, k, points);
    out.iterations = iterations;
    out
}

/// Moves the point farthest from its centroid (taken from a cluster with at
/// least two members) into each empty cluster.
fn fill_empty_clusters(points: &[[f64; 2]], labels: &mut [usize], centroids: &[[f64; 2]], k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        for l in labels.iter() {
            counts[*l] += 1;
        }
        let Some(empty) = counts.iter().position(|c| *c == 0) else {
            return;
        };
        let mut donor: Option<(f64, usize)> = None;
        for (i, p) in points.iter().enumerate() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let d = sq_dist(*p, centroids[labels[i]]);
            if donor.map_or(true, |(bd, _)| d > bd) {
                donor = Some((d, i));
            }
        }
        match donor {
            Some((_, i)) => labels[i] = empty,
            None => return,
        }
    }
}

fn relabel(labels: Vec<usize>, k: usize, points: &[[f64; 2]]) -> Clustering {
    let mut map = vec![usize::MAX; k];
    let mut next = 0;
    for l in &labels {
        if map[*l] == usize::MAX {
            map[*l] = next;
            next += 1;
        }
    }
    let labels: Vec<usize> = labels.into_iter().map(|l| map[l]).collect();
    let mut sums = vec![[0.0f64; 2]; next];
    let mut counts = vec![0usize; next];
    for (i, p) in points.iter().enumerate() {
        sums[labels[i]][0] += p[0];
        sums[labels[i]][1] += p[1];
        counts[labels[i]] += 1;
    }
    let centroids = (0..next)
        .map(|c| [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64])
        .collect();
    Clustering {
        labels,
        centroids,
        iterations: 0,
    }
}
