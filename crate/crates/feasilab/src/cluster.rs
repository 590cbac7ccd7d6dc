//! One-dimensional k-means over final gaps.

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Labels are ordered by cluster center: label 0 is the cluster with the
/// smallest mean gap, the "best" one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub counts: Vec<usize>,
    /// Centers in ascending order; empty when there are no values.
    pub centers: Vec<f64>,
}

const MAX_ROUNDS: usize = 1000;

/// Lloyd iterations started from the sorted-sample quantiles
/// `(c + 1/2) / k`. Ties go to the lower center, and a cluster that loses all
/// its members keeps its center, so with fewer than `k` distinct values some
/// clusters stay empty.
pub fn cluster_gaps(gaps: &[f64], k: usize) -> Result<Clustering> {
    if k == 0 {
        return Err(HarnessError::Config("cluster count must be at least 1".into()));
    }
    if let Some(g) = gaps.iter().find(|g| !g.is_finite()) {
        return Err(HarnessError::Config(format!("cannot cluster non-finite gap {g}")));
    }
    let n = gaps.len();
    if n == 0 {
        return Ok(Clustering {
            labels: Vec::new(),
            counts: vec![0; k],
            centers: Vec::new(),
        });
    }
    let mut sorted = gaps.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut centers: Vec<f64> = (0..k)
        .map(|c| {
            let pos = ((c as f64 + 0.5) / k as f64 * n as f64) as usize;
            sorted[pos.min(n - 1)]
        })
        .collect();

    let nearest = |centers: &[f64], g: f64| {
        let mut best = 0;
        for (c, &m) in centers.iter().enumerate() {
            if (g - m).abs() < (g - centers[best]).abs() {
                best = c;
            }
        }
        best
    };
    let mut labels: Vec<usize> = gaps.iter().map(|&g| nearest(&centers, g)).collect();
    for _ in 0..MAX_ROUNDS {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&g, &l) in gaps.iter().zip(&labels) {
            sums[l] += g;
            counts[l] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c] / counts[c] as f64;
            }
        }
        let next: Vec<usize> = gaps.iter().map(|&g| nearest(&centers, g)).collect();
        if next == labels {
            break;
        }
        labels = next;
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centers[a].total_cmp(&centers[b]).then(a.cmp(&b)));
    let mut rank = vec![0; k];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    let labels: Vec<usize> = labels.iter().map(|&l| rank[l]).collect();
    let mut counts = vec![0; k];
    for &l in &labels {
        counts[l] += 1;
    }
    Ok(Clustering {
        labels,
        counts,
        centers: order.iter().map(|&c| centers[c]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_values() {
        let c = cluster_gaps(&[0.0, 1.0, 0.0, 1.0, 0.0], 2).unwrap();
        assert_eq!(c.labels, [0, 1, 0, 1, 0]);
        assert_eq!(c.counts, [3, 2]);
        assert_eq!(c.centers, [0.0, 1.0]);
    }

    #[test]
    fn equal_values_form_one_cluster() {
        let c = cluster_gaps(&[0.25; 10], 8).unwrap();
        assert!(c.labels.iter().all(|&l| l == 0));
        assert_eq!(c.counts[0], 10);
        assert_eq!(c.counts.iter().sum::<usize>(), 10);
    }

    #[test]
    fn empty_and_invalid_input() {
        let c = cluster_gaps(&[], 3).unwrap();
        assert_eq!(c.counts, [0, 0, 0]);
        assert!(cluster_gaps(&[1.0], 0).is_err());
        assert!(cluster_gaps(&[f64::NAN], 2).is_err());
    }
}
