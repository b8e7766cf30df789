//! 1-D two-means clustering (Lloyd's algorithm) for the NDVI split.
//!
//! Initialization is deterministic: centers start at the 10th and 90th
//! percentiles of the data, which is robust for the bimodal vegetation /
//! non-vegetation histograms this is used on and removes any seed dependence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoMeans {
    /// Cluster centers, ascending. `centers[1]` is the higher-mean cluster.
    pub centers: [f64; 2],
    /// Decision boundary: values >= threshold belong to the upper cluster.
    pub threshold: f64,
    pub iterations: usize,
    /// Within-cluster sum of squares after each iteration (diagnostic;
    /// non-increasing by construction of Lloyd's algorithm).
    pub wcss_trace: Vec<f64>,
}

impl TwoMeans {
    pub fn assign(&self, value: f64) -> usize {
        (value >= self.threshold) as usize
    }
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// Prefix sums over sorted values so cluster means and WCSS of any
/// contiguous range come out in O(1).
struct Prefix {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Prefix {
    fn new(sorted: &[f64]) -> Self {
        let mut sum = Vec::with_capacity(sorted.len() + 1);
        let mut sum_sq = Vec::with_capacity(sorted.len() + 1);
        sum.push(0.0);
        sum_sq.push(0.0);
        for &v in sorted {
            sum.push(sum.last().unwrap() + v);
            sum_sq.push(sum_sq.last().unwrap() + v * v);
        }
        Prefix { sum, sum_sq }
    }

    fn mean(&self, lo: usize, hi: usize) -> f64 {
        (self.sum[hi] - self.sum[lo]) / (hi - lo) as f64
    }

    /// Sum of squared deviations from the range mean for [lo, hi).
    fn sse(&self, lo: usize, hi: usize) -> f64 {
        let n = (hi - lo) as f64;
        let s = self.sum[hi] - self.sum[lo];
        (self.sum_sq[hi] - self.sum_sq[lo]) - s * s / n
    }
}

/// Lloyd's algorithm for k=2 on 1-D data. Converges when both centers move
/// less than `tol` or the partition stabilizes, capped at `max_iter`.
/// Returns centers that are the exact means of their final assignment.
pub fn two_means(values: &[f64], max_iter: usize, tol: f64) -> Result<TwoMeans> {
    if values.is_empty() {
        return Err(Error::EmptyInput("k-means on empty value set".into()));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in k-means input"));
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    if min == max {
        return Err(Error::DegenerateInput(
            "k-means needs at least 2 distinct values".into(),
        ));
    }

    let prefix = Prefix::new(&sorted);
    let n = sorted.len();
    let mut c0 = percentile(&sorted, 0.10);
    let mut c1 = percentile(&sorted, 0.90);
    if c0 == c1 {
        // heavy duplication can flatten the percentiles; fall back to extremes
        c0 = min;
        c1 = max;
    }

    let mut wcss_trace = Vec::new();
    let mut split = 0usize; // first index assigned to the upper cluster
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let mid = 0.5 * (c0 + c1);
        // values < mid go to the lower cluster, >= mid to the upper
        let new_split = sorted.partition_point(|v| *v < mid);
        // both clusters stay non-empty: min < mid < max
        debug_assert!(new_split > 0 && new_split < n);
        let n0 = prefix.mean(0, new_split);
        let n1 = prefix.mean(new_split, n);
        wcss_trace.push(prefix.sse(0, new_split) + prefix.sse(new_split, n));
        let moved = (n0 - c0).abs().max((n1 - c1).abs());
        let stable = new_split == split && iterations > 1;
        split = new_split;
        c0 = n0;
        c1 = n1;
        if moved < tol || stable {
            break;
        }
    }

    // one final assignment pass so centers are exactly the means of the
    // clusters induced by the reported threshold
    let mid = 0.5 * (c0 + c1);
    let final_split = sorted.partition_point(|v| *v < mid);
    debug_assert!(final_split > 0 && final_split < n);
    let c0 = prefix.mean(0, final_split);
    let c1 = prefix.mean(final_split, n);

    Ok(TwoMeans {
        centers: [c0, c1],
        threshold: 0.5 * (c0 + c1),
        iterations,
        wcss_trace,
    })
}
