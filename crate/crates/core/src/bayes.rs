//! Exact posterior means by enumeration, and Monte-Carlo noisy MMSE.
//!
//! All weights are accumulated in log space relative to the largest
//! log-weight. Limits that would involve `0^0` or a degenerate Gaussian
//! (`rho = 0`, `rho = 1`, `lambda = 0`) are handled as exact special cases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{F2Matrix, F2Vector};
use crate::models::{
    for_each_path, pair_index, path_count, sample_gss, sample_psp, sample_rlc_with, sample_tpca,
    subset_sum, GssParams, ModelInstance, ModelParams, Observation, PspParams, Tensor, TpcaParams,
};
use crate::models::Graph;
use crate::noise::{check_rho, noise_observation};
use crate::rng::{self, Stream};
use crate::solvers::f2_solve;
use crate::stats::{binomial, log_sum_exp, mean_estimate, Combinations, CompensatedSum};

/// Enumeration limits. Exceeding one is an error, never a silent subsample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationBudget {
    pub paths: u128,
    pub messages: u128,
    pub subsets: u128,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            paths: 1_000_000,
            messages: 1 << 24,
            subsets: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorMean {
    pub estimate: Vec<f64>,
    /// Log of the sum of unnormalised weights.
    pub log_partition: f64,
}

/// Posterior over message bits, with per-coordinate marginals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RlcPosterior {
    pub mean: PosteriorMean,
    /// `L0 / (L0 + L1)`: posterior probability that bit `j` is 0.
    pub zero_marginals: Vec<f64>,
}

// ---------------------------------------------------------------------------
// PSP

/// Log-probability with an explicit flag for impossible events.
#[derive(Clone, Copy)]
struct LogProb {
    value: f64,
    zero: bool,
}

impl LogProb {
    fn of(p: f64) -> Self {
        LogProb {
            value: if p > 0.0 { p.ln() } else { 0.0 },
            zero: p <= 0.0,
        }
    }
}

pub fn posterior_mean_psp(graph: &Graph, params: &PspParams, rho: f64) -> Result<PosteriorMean> {
    posterior_mean_psp_with_budget(graph, params, rho, &EnumerationBudget::default())
}

/// Posterior mean of the planted-path edge indicators given a noisy graph.
///
/// Relative to the edge-independent background, a candidate path `H` has
/// weight `((1 - rho(1-q)) / q)^{|H & G|} rho^{L - |H & G|}`: a planted pair
/// is observed present with probability `1 - rho(1-q)` and absent with
/// probability `rho(1-q)`, while every other pair stays `Bern(q)`.
pub fn posterior_mean_psp_with_budget(
    graph: &Graph,
    params: &PspParams,
    rho: f64,
    budget: &EnumerationBudget,
) -> Result<PosteriorMean> {
    params.validate()?;
    check_rho(rho)?;
    if graph.n() != params.n {
        return Err(Error::param("graph", "vertex count does not match params.n"));
    }
    let (n, len, q) = (params.n, params.path_len, params.q);
    let count = path_count(n, len);
    if count > budget.paths {
        return Err(Error::budget("planted-path enumeration", count, budget.paths));
    }

    let planted = [LogProb::of(rho * (1.0 - q)), LogProb::of(1.0 - rho * (1.0 - q))];
    let background = [LogProb::of(1.0 - q), LogProb::of(q)];
    // per-pair contribution of a pair being on the path, relative to background
    let flags = graph.pair_flags();
    let contrib: Vec<(f64, i64)> = flags
        .iter()
        .map(|&b| {
            let (pl, bg) = (planted[b as usize], background[b as usize]);
            (pl.value - bg.value, pl.zero as i64 - bg.zero as i64)
        })
        .collect();
    let background_zeros: i64 = flags.iter().map(|&b| background[b as usize].zero as i64).sum();

    let mut log_w = Vec::with_capacity(count as usize);
    let mut edge_lists: Vec<u32> = Vec::with_capacity(count as usize * len);
    for_each_path(n, len, |path| {
        let mut lw = 0.0;
        let mut zeros = background_zeros;
        for w in path.windows(2) {
            let idx = pair_index(n, w[0], w[1]);
            lw += contrib[idx].0;
            zeros += contrib[idx].1;
            edge_lists.push(idx as u32);
        }
        log_w.push(if zeros == 0 { lw } else { f64::NEG_INFINITY });
    });

    let log_z = log_sum_exp(&log_w);
    if log_z == f64::NEG_INFINITY {
        return Err(Error::Inconsistent(
            "no candidate path has positive likelihood".into(),
        ));
    }
    let mut acc = vec![CompensatedSum::new(); graph.num_pairs()];
    for (p, &lw) in log_w.iter().enumerate() {
        if lw == f64::NEG_INFINITY {
            continue;
        }
        let w = (lw - log_z).exp();
        for &idx in &edge_lists[p * len..(p + 1) * len] {
            acc[idx as usize].add(w);
        }
    }
    Ok(PosteriorMean {
        estimate: acc.iter().map(|s| s.value().clamp(0.0, 1.0)).collect(),
        log_partition: log_z,
    })
}

// ---------------------------------------------------------------------------
// RLC

pub fn posterior_mean_rlc(a: &F2Matrix, y_hat: &F2Vector, rho: f64) -> Result<RlcPosterior> {
    posterior_mean_rlc_with_budget(a, y_hat, rho, &EnumerationBudget::default())
}

/// Posterior over `x` given `(A, y_hat)`: weight `(rho / (2 - rho))^{|Ax + y_hat|}`.
///
/// Messages are grouped by residual weight `w`, so the result is
/// `sum_w r^w S_w / sum_w r^w C_w` with exact integer counts `C_w`, `S_w`.
pub fn posterior_mean_rlc_with_budget(
    a: &F2Matrix,
    y_hat: &F2Vector,
    rho: f64,
    budget: &EnumerationBudget,
) -> Result<RlcPosterior> {
    check_rho(rho)?;
    let (m, n) = (a.nrows(), a.ncols());
    if y_hat.len() != m {
        return Err(Error::param("y_hat", "length does not match the rows of A"));
    }
    if m > 128 {
        return Err(Error::param("m", "enumeration supports at most 128 rows"));
    }
    let count = 1u128.checked_shl(n as u32).unwrap_or(u128::MAX);
    if n >= 128 || count > budget.messages {
        return Err(Error::budget("message enumeration", count, budget.messages));
    }

    let cols: Vec<u128> = (0..n).map(|j| a.column_mask(j)).collect();
    let y = y_hat.to_mask();
    // by_weight[w] = (number of messages, per-coordinate counts of ones)
    let mut totals = vec![0u64; m + 1];
    let mut ones = vec![vec![0u64; n]; m + 1];
    let mut x: u64 = 0;
    let mut ax: u128 = 0;
    for step in 0..count as u64 {
        if step > 0 {
            // Gray code: flip the lowest set bit position of step
            let j = step.trailing_zeros() as usize;
            x ^= 1 << j;
            ax ^= cols[j];
        }
        let w = (ax ^ y).count_ones() as usize;
        totals[w] += 1;
        let row = &mut ones[w];
        let mut bits = x;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            row[j] += 1;
            bits &= bits - 1;
        }
    }

    // weights r^(w - w0) relative to the smallest attained residual weight
    let r = if rho == 0.0 { 0.0 } else { rho / (2.0 - rho) };
    let w0 = (0..=m).find(|&w| totals[w] > 0).expect("at least one message");
    if r == 0.0 && w0 > 0 {
        return Err(Error::Inconsistent("A x = y_hat has no solution".into()));
    }
    let rel: Vec<f64> = (0..=m)
        .map(|w| if w < w0 { 0.0 } else { r.powi((w - w0) as i32) })
        .collect();
    let z: CompensatedSum = (w0..=m).map(|w| rel[w] * totals[w] as f64).collect();
    let z = z.value();
    let log_z = z.ln() + if w0 == 0 { 0.0 } else { w0 as f64 * r.ln() };
    let estimate: Vec<f64> = (0..n)
        .map(|j| {
            let s: CompensatedSum = (w0..=m).map(|w| rel[w] * ones[w][j] as f64).collect();
            (s.value() / z).clamp(0.0, 1.0)
        })
        .collect();
    let zero_marginals = estimate.iter().map(|p| 1.0 - p).collect();
    Ok(RlcPosterior {
        mean: PosteriorMean {
            estimate,
            log_partition: log_z,
        },
        zero_marginals,
    })
}

// ---------------------------------------------------------------------------
// GSS

pub fn posterior_mean_gss(x: &[f64], y_hat: f64, params: &GssParams, rho: f64) -> Result<PosteriorMean> {
    posterior_mean_gss_with_budget(x, y_hat, params, rho, &EnumerationBudget::default())
}

/// Posterior membership marginals given `X` and `y_hat = sqrt(1-rho^2) Y + rho Z`.
pub fn posterior_mean_gss_with_budget(
    x: &[f64],
    y_hat: f64,
    params: &GssParams,
    rho: f64,
    budget: &EnumerationBudget,
) -> Result<PosteriorMean> {
    params.validate()?;
    check_rho(rho)?;
    let (n, k) = (params.n_items, params.k);
    if x.len() != n {
        return Err(Error::param("X", "length does not match N"));
    }
    let count = binomial(n as u64, k as u64);
    if count > budget.subsets {
        return Err(Error::budget("subset enumeration", count, budget.subsets));
    }
    if rho == 1.0 {
        return Ok(PosteriorMean {
            estimate: vec![k as f64 / n as f64; n],
            log_partition: (count as f64).ln(),
        });
    }

    let log_w: Vec<f64> = if rho == 0.0 {
        Combinations::new(n, k)
            .map(|s| if subset_sum(x, &s) == y_hat { 0.0 } else { f64::NEG_INFINITY })
            .collect()
    } else {
        let c = (1.0 - rho * rho).sqrt();
        let inv = 1.0 / (2.0 * rho * rho);
        Combinations::new(n, k)
            .map(|s| {
                let r = y_hat - c * subset_sum(x, &s);
                -r * r * inv
            })
            .collect()
    };
    let log_z = log_sum_exp(&log_w);
    if log_z == f64::NEG_INFINITY {
        return Err(Error::Inconsistent("no k-subset sums exactly to Y".into()));
    }
    Ok(PosteriorMean {
        estimate: subset_marginals(n, k, &log_w, log_z, 1.0),
        log_partition: log_z,
    })
}

fn subset_marginals(n: usize, k: usize, log_w: &[f64], log_z: f64, value: f64) -> Vec<f64> {
    let mut acc = vec![CompensatedSum::new(); n];
    for (s, &lw) in Combinations::new(n, k).zip(log_w) {
        if lw == f64::NEG_INFINITY {
            continue;
        }
        let w = (lw - log_z).exp();
        for i in s {
            acc[i].add(w);
        }
    }
    acc.iter().map(|s| value * s.value().clamp(0.0, 1.0)).collect()
}

// ---------------------------------------------------------------------------
// TPCA

fn tpca_log_weights(y: &Tensor, params: &TpcaParams, budget: &EnumerationBudget) -> Result<Vec<f64>> {
    params.validate()?;
    if y.n != params.n || y.d != params.d {
        return Err(Error::param("Y", "tensor shape does not match params"));
    }
    let count = binomial(params.n as u64, params.k as u64);
    if count > budget.subsets {
        return Err(Error::budget("support enumeration", count, budget.subsets));
    }
    let scale = params.lambda.sqrt() * params.spike_value().powi(params.d as i32);
    Ok(Combinations::new(params.n, params.k)
        .map(|s| scale * y.sum_over_cube(&s))
        .collect())
}

pub fn posterior_mean_tpca(y: &Tensor, params: &TpcaParams) -> Result<PosteriorMean> {
    posterior_mean_tpca_with_budget(y, params, &EnumerationBudget::default())
}

/// Posterior mean of `x` with weights `exp(sqrt(lambda) <Y, x'^{(x) d}>)`.
pub fn posterior_mean_tpca_with_budget(
    y: &Tensor,
    params: &TpcaParams,
    budget: &EnumerationBudget,
) -> Result<PosteriorMean> {
    let (n, k) = (params.n, params.k);
    if params.lambda == 0.0 {
        params.validate()?;
        let count = binomial(n as u64, k as u64);
        return Ok(PosteriorMean {
            estimate: vec![(k as f64 / n as f64) * params.spike_value(); n],
            log_partition: (count as f64).ln(),
        });
    }
    let log_w = tpca_log_weights(y, params, budget)?;
    let log_z = log_sum_exp(&log_w);
    Ok(PosteriorMean {
        estimate: subset_marginals(n, k, &log_w, log_z, params.spike_value()),
        log_partition: log_z,
    })
}

/// Posterior mean after `T_rho`: the noisy tensor is itself an instance with
/// signal strength `lambda (1 - rho^2)`.
pub fn posterior_mean_tpca_noisy(y_noisy: &Tensor, params: &TpcaParams, rho: f64) -> Result<PosteriorMean> {
    check_rho(rho)?;
    posterior_mean_tpca(y_noisy, &noisy_tpca_params(params, rho))
}

pub fn noisy_tpca_params(params: &TpcaParams, rho: f64) -> TpcaParams {
    params.with_lambda(params.lambda * (1.0 - rho * rho))
}

/// Posterior mass binned by overlap `|S & S'|`, `p_0, ..., p_k`.
pub fn tpca_overlap_distribution(y: &Tensor, planted_support: &[usize], params: &TpcaParams) -> Result<Vec<f64>> {
    let k = params.k;
    if planted_support.len() != k {
        return Err(Error::param("planted_support", "size differs from k"));
    }
    let log_w = if params.lambda == 0.0 {
        params.validate()?;
        vec![0.0; binomial(params.n as u64, k as u64) as usize]
    } else {
        tpca_log_weights(y, params, &EnumerationBudget::default())?
    };
    let log_z = log_sum_exp(&log_w);
    let mut member = vec![false; params.n];
    for &i in planted_support {
        member[i] = true;
    }
    let mut bins = vec![CompensatedSum::new(); k + 1];
    for (s, &lw) in Combinations::new(params.n, k).zip(&log_w) {
        let overlap = s.iter().filter(|&&i| member[i]).count();
        bins[overlap].add((lw - log_z).exp());
    }
    Ok(bins.iter().map(|b| b.value()).collect())
}

/// Class sizes `N_i = C(k, i) C(n - k, k - i)`.
pub fn overlap_class_sizes(n: usize, k: usize) -> Vec<u128> {
    (0..=k)
        .map(|i| binomial(k as u64, i as u64) * binomial((n - k) as u64, (k - i) as u64))
        .collect()
}

// ---------------------------------------------------------------------------
// Dispatch and MMSE curves

/// Posterior mean of the signal given an observation passed through `T_rho`.
pub fn posterior_mean(obs: &Observation, rho: f64) -> Result<PosteriorMean> {
    match obs {
        Observation::Psp { params, graph } => posterior_mean_psp(graph, params, rho),
        Observation::Rlc { a, y, .. } => posterior_mean_rlc(a, y, rho).map(|p| p.mean),
        Observation::Gss { params, x, y } => posterior_mean_gss(x, *y, params, rho),
        Observation::Tpca { params, y } => posterior_mean_tpca_noisy(y, params, rho),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialOptions {
    /// RLC only: resample `A` within each trial until it has full column rank.
    #[serde(default)]
    pub full_rank_only: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmseReport {
    pub params: ModelParams,
    pub rho: f64,
    pub trials: u64,
    pub mmse_hat: f64,
    pub stderr: f64,
    pub signal_norm: f64,
    pub nmmse_hat: f64,
    /// `E ||E[x|y]||^2` and `E <x, E[x|y]>`, equal in expectation.
    pub posterior_norm_hat: f64,
    pub posterior_norm_stderr: f64,
    pub overlap_hat: f64,
    pub overlap_stderr: f64,
}

/// One trial's contribution to an MMSE estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MmseTrial {
    pub squared_error: f64,
    pub posterior_norm: f64,
    pub overlap: f64,
}

/// Instance `trial` of the experiment with master seed `seed`.
pub fn trial_instance(params: &ModelParams, seed: u64, trial: u64, options: &TrialOptions) -> Result<ModelInstance> {
    let inst_seed = rng::derive_seed(seed, Stream::Instance, trial);
    match params {
        ModelParams::Rlc(p) if options.full_rank_only => {
            p.validate()?;
            let mut rng = rng::from_seed(inst_seed);
            loop {
                let inst = sample_rlc_with(p, &mut rng);
                if f2_solve(&inst.a, &inst.y)?.rank == p.n {
                    return Ok(ModelInstance::Rlc(inst));
                }
            }
        }
        ModelParams::Psp(p) => Ok(ModelInstance::Psp(sample_psp(p, inst_seed)?)),
        ModelParams::Gss(p) => Ok(ModelInstance::Gss(sample_gss(p, inst_seed)?)),
        ModelParams::Tpca(p) => Ok(ModelInstance::Tpca(sample_tpca(p, inst_seed)?)),
        other => other.sample(inst_seed),
    }
}

/// Seed of the noise applied in trial `trial`. Shared across `rho` values.
pub fn trial_noise_seed(seed: u64, trial: u64) -> u64 {
    rng::derive_seed(seed, Stream::Noise, trial)
}

pub fn mmse_trials(
    params: &ModelParams,
    rho: f64,
    trials: u64,
    seed: u64,
    options: &TrialOptions,
) -> Result<Vec<MmseTrial>> {
    params.validate()?;
    check_rho(rho)?;
    crate::par::try_map_trials(trials, |t| {
        let inst = trial_instance(params, seed, t, options)?;
        let noisy = noise_observation(&inst.observation(), rho, trial_noise_seed(seed, t))?;
        let est = posterior_mean(&noisy, rho)?.estimate;
        let x = inst.signal();
        let mut sq = CompensatedSum::new();
        let mut norm = CompensatedSum::new();
        let mut overlap = CompensatedSum::new();
        for (e, xi) in est.iter().zip(&x) {
            sq.add((e - xi) * (e - xi));
            norm.add(e * e);
            overlap.add(e * xi);
        }
        Ok(MmseTrial {
            squared_error: sq.value(),
            posterior_norm: norm.value(),
            overlap: overlap.value(),
        })
    })
}

pub fn mmse_report(params: &ModelParams, rho: f64, trials: &[MmseTrial]) -> MmseReport {
    let sq: Vec<f64> = trials.iter().map(|t| t.squared_error).collect();
    let norm: Vec<f64> = trials.iter().map(|t| t.posterior_norm).collect();
    let ov: Vec<f64> = trials.iter().map(|t| t.overlap).collect();
    let (e, pn, o) = (mean_estimate(&sq), mean_estimate(&norm), mean_estimate(&ov));
    let signal_norm = params.signal_norm();
    MmseReport {
        params: *params,
        rho,
        trials: trials.len() as u64,
        mmse_hat: e.mean,
        stderr: e.stderr,
        signal_norm,
        nmmse_hat: e.mean / signal_norm,
        posterior_norm_hat: pn.mean,
        posterior_norm_stderr: pn.stderr,
        overlap_hat: o.mean,
        overlap_stderr: o.stderr,
    }
}

/// Monte-Carlo `MMSE_rho` at every grid point. Trial `t` uses the same
/// instance and noise seed at every `rho`.
pub fn estimate_mmse_curve(
    params: &ModelParams,
    rho_grid: &[f64],
    trials: u64,
    seed: u64,
    options: &TrialOptions,
) -> Result<Vec<MmseReport>> {
    if trials == 0 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    rho_grid
        .iter()
        .map(|&rho| Ok(mmse_report(params, rho, &mmse_trials(params, rho, trials, seed, options)?)))
        .collect()
}
