//! Approximate paths between vertices 1 and 2: brute-force counts, overlap
//! histograms and the closed-form first moment under `G(n, q)`.
//!
//! An approximate path is a pair `(P_hat, P)` where `P` is a length-`m` path
//! from 1 to 2 in `K_n` and `P_hat` is a set of `m - eps_m` edges of `P`
//! present in the graph. Pairs of approximate paths are ordered.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{for_each_path, pair_index, path_count, sample_erdos_renyi, Graph};
use crate::rng::{self, Stream};
use crate::stats::{binomial, falling_factorial, mean_estimate};

pub const DEFAULT_PATH_BUDGET: u128 = 1_000_000;
pub const DEFAULT_PAIR_BUDGET: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxPathCount {
    pub n: usize,
    pub m: usize,
    pub eps_m: usize,
    pub q: f64,
    pub count: u128,
    /// Ordered pairs whose underlying paths share at least one edge.
    pub pair_count: u128,
    /// `histogram[k]`: ordered pairs whose underlying paths share exactly `k` edges.
    pub histogram: Vec<u128>,
}

fn check_args(graph: &Graph, m: usize, eps_m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::param("m", "path length must be positive"));
    }
    if eps_m > m {
        return Err(Error::param("eps_m", format!("need eps_m <= m = {m}, got {eps_m}")));
    }
    if graph.n() < 2 {
        return Err(Error::param("graph", "need at least two vertices"));
    }
    Ok(())
}

/// Edge mask and number of kept-edge choices for every path with a nonzero count.
fn weighted_paths(graph: &Graph, m: usize, eps_m: usize) -> Result<Vec<(u128, u128)>> {
    check_args(graph, m, eps_m)?;
    let n = graph.n();
    let paths = path_count(n, m);
    if paths > DEFAULT_PATH_BUDGET {
        return Err(Error::budget("path enumeration", paths, DEFAULT_PATH_BUDGET));
    }
    if n * (n - 1) / 2 > 128 {
        return Err(Error::param("graph", "overlap masks support at most 16 vertices"));
    }
    let keep = (m - eps_m) as u64;
    let mut out = Vec::new();
    for_each_path(n, m, |p| {
        let mut mask = 0u128;
        let mut present = 0u64;
        for w in p.windows(2) {
            mask |= 1 << pair_index(n, w[0], w[1]);
            present += graph.has_edge(w[0], w[1]) as u64;
        }
        let c = binomial(present, keep);
        if c > 0 {
            out.push((mask, c));
        }
    });
    Ok(out)
}

/// `N_{m, eps}`: sum over paths `P` of `C(|E(P) & G|, m - eps_m)`.
pub fn count_approx_paths(graph: &Graph, m: usize, eps_m: usize) -> Result<u128> {
    check_args(graph, m, eps_m)?;
    let n = graph.n();
    let paths = path_count(n, m);
    if paths > DEFAULT_PATH_BUDGET {
        return Err(Error::budget("path enumeration", paths, DEFAULT_PATH_BUDGET));
    }
    let keep = (m - eps_m) as u64;
    let mut total = 0u128;
    for_each_path(n, m, |p| {
        let present = p.windows(2).filter(|w| graph.has_edge(w[0], w[1])).count() as u64;
        total += binomial(present, keep);
    });
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapCounts {
    pub pair_count: u128,
    pub histogram: Vec<u128>,
}

/// Ordered pairs of approximate paths, binned by shared edges.
pub fn count_overlap_pairs(graph: &Graph, m: usize, eps_m: usize) -> Result<OverlapCounts> {
    let paths = weighted_paths(graph, m, eps_m)?;
    let pairs = (paths.len() as u128).pow(2);
    if pairs > DEFAULT_PAIR_BUDGET {
        return Err(Error::budget("path-pair enumeration", pairs, DEFAULT_PAIR_BUDGET));
    }
    let mut histogram = vec![0u128; m + 1];
    for &(m1, c1) in &paths {
        for &(m2, c2) in &paths {
            histogram[(m1 & m2).count_ones() as usize] += c1 * c2;
        }
    }
    Ok(OverlapCounts {
        pair_count: histogram[1..].iter().sum(),
        histogram,
    })
}

pub fn approx_path_count(graph: &Graph, m: usize, eps_m: usize, q: f64) -> Result<ApproxPathCount> {
    let count = count_approx_paths(graph, m, eps_m)?;
    let overlap = count_overlap_pairs(graph, m, eps_m)?;
    Ok(ApproxPathCount {
        n: graph.n(),
        m,
        eps_m,
        q,
        count,
        pair_count: overlap.pair_count,
        histogram: overlap.histogram,
    })
}

/// `E N_{m, eps} = (n-2)_{(m-1)} C(m, eps_m) q^{m - eps_m}` under `G(n, q)`.
pub fn expected_count(n: usize, m: usize, eps_m: usize, q: f64) -> f64 {
    if m == 0 || eps_m > m || n < 2 {
        return 0.0;
    }
    let paths = falling_factorial(n as u64 - 2, m as u64 - 1) as f64;
    paths * binomial(m as u64, eps_m as u64) as f64 * q.powi((m - eps_m) as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstMomentReport {
    pub n: usize,
    pub m: usize,
    pub eps_m: usize,
    pub q: f64,
    pub samples: u64,
    pub mean: f64,
    pub stderr: f64,
    pub expected: f64,
    pub second_moment: f64,
    /// `E[N^(2)] / E[N]^2`, present when pair counts were requested.
    pub pair_ratio: Option<f64>,
}

/// Monte-Carlo mean of `N_{m, eps}` over `G(n, q)` samples.
pub fn first_moment_check(
    n: usize,
    m: usize,
    eps_m: usize,
    q: f64,
    samples: u64,
    seed: u64,
    with_pairs: bool,
) -> Result<FirstMomentReport> {
    if samples < 2 {
        return Err(Error::param("samples", "need at least two samples"));
    }
    let rows: Vec<(f64, f64)> = crate::par::try_map_trials(samples, |t| {
        let g = sample_erdos_renyi(n, q, rng::derive_seed(seed, Stream::Instance, t))?;
        let c = count_approx_paths(&g, m, eps_m)? as f64;
        let p = if with_pairs {
            count_overlap_pairs(&g, m, eps_m)?.pair_count as f64
        } else {
            0.0
        };
        Ok((c, p))
    })?;
    let counts: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let est = mean_estimate(&counts);
    let second = counts.iter().map(|c| c * c).sum::<f64>() / counts.len() as f64;
    let pair_ratio = with_pairs.then(|| {
        let mean_pairs = rows.iter().map(|r| r.1).sum::<f64>() / rows.len() as f64;
        mean_pairs / (est.mean * est.mean)
    });
    Ok(FirstMomentReport {
        n,
        m,
        eps_m,
        q,
        samples,
        mean: est.mean,
        stderr: est.stderr,
        expected: expected_count(n, m, eps_m, q),
        second_moment: second,
        pair_ratio,
    })
}
