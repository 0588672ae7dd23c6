//! Estimator registry, `(rho, eta)`-stability measurement and the barrier
//! check comparing an estimator's error with the noisy MMSE.

use serde::{Deserialize, Serialize};

use crate::bayes::{self, trial_instance, trial_noise_seed, MmseReport, TrialOptions};
use crate::error::{Error, Result};
use crate::models::{pair_index, ModelKind, ModelParams, Observation};
use crate::noise::{check_rho, noise_observation};
use crate::solvers::{f2_solve, lll_subset_sum, shortest_path, F2SolutionKind, LllConfig};
use crate::stats::{mean_estimate, ratio_estimate, CompensatedSum};

/// A deterministic map from an observation to the signal space.
pub trait Estimator: Send + Sync {
    fn name(&self) -> &str;

    fn supports(&self, kind: ModelKind) -> bool;

    fn estimate(&self, obs: &Observation) -> Result<Vec<f64>>;
}

pub const ESTIMATOR_NAMES: [&str; 5] = [
    "posterior_mean",
    "shortest_path_indicator",
    "f2_round",
    "lll_subset_indicator",
    "constant_prior_mean",
];

/// Looks an estimator up by its registry name.
pub fn lookup(name: &str) -> Result<Box<dyn Estimator>> {
    Ok(match name {
        "posterior_mean" => Box::new(PosteriorMeanEstimator),
        "shortest_path_indicator" => Box::new(ShortestPathIndicator),
        "f2_round" => Box::new(F2Round),
        "lll_subset_indicator" => Box::new(LllSubsetIndicator::default()),
        "constant_prior_mean" => Box::new(ConstantPriorMean),
        _ => {
            return Err(Error::UnknownEstimator {
                name: name.to_string(),
                registry: ESTIMATOR_NAMES.join(", "),
            })
        }
    })
}

/// Prior mean of the signal; the best constant estimator.
pub fn prior_mean(obs: &Observation) -> Vec<f64> {
    match obs {
        Observation::Psp { params, .. } => {
            let (n, len) = (params.n, params.path_len);
            let mut v = vec![0.0; params.num_pairs()];
            let end = 1.0 / (n - 2) as f64;
            let inner = if n > 3 {
                2.0 * (len - 2) as f64 / ((n - 2) * (n - 3)) as f64
            } else {
                0.0
            };
            for i in 1..=n {
                for j in i + 1..=n {
                    v[pair_index(n, i, j)] = match (i, j) {
                        (1, 2) => 0.0,
                        (1, _) | (2, _) => end,
                        _ => inner,
                    };
                }
            }
            v
        }
        Observation::Rlc { params, .. } => vec![0.5; params.n],
        Observation::Gss { params, .. } => vec![params.k as f64 / params.n_items as f64; params.n_items],
        Observation::Tpca { params, .. } => {
            vec![(params.k as f64 / params.n as f64) * params.spike_value(); params.n]
        }
    }
}

/// Posterior mean under the noiseless model. If the observation is
/// impossible without noise the prior mean is returned.
pub struct PosteriorMeanEstimator;

impl Estimator for PosteriorMeanEstimator {
    fn name(&self) -> &str {
        "posterior_mean"
    }

    fn supports(&self, _kind: ModelKind) -> bool {
        true
    }

    fn estimate(&self, obs: &Observation) -> Result<Vec<f64>> {
        match bayes::posterior_mean(obs, 0.0) {
            Ok(p) => Ok(p.estimate),
            Err(Error::Inconsistent(_)) => Ok(prior_mean(obs)),
            Err(e) => Err(e),
        }
    }
}

/// Edge indicator of the lexicographically smallest shortest 1-2 path.
pub struct ShortestPathIndicator;

impl Estimator for ShortestPathIndicator {
    fn name(&self) -> &str {
        "shortest_path_indicator"
    }

    fn supports(&self, kind: ModelKind) -> bool {
        kind == ModelKind::Psp
    }

    fn estimate(&self, obs: &Observation) -> Result<Vec<f64>> {
        let Observation::Psp { graph, .. } = obs else {
            return Err(unsupported(self, obs));
        };
        let mut v = vec![0.0; graph.num_pairs()];
        if let Some(path) = shortest_path(graph) {
            for w in path.windows(2) {
                v[graph.pair_index(w[0], w[1])] = 1.0;
            }
        }
        Ok(v)
    }
}

/// Gaussian elimination: the solution with free variables set to 0, or all
/// coordinates 1/2 for an inconsistent system.
pub struct F2Round;

impl Estimator for F2Round {
    fn name(&self) -> &str {
        "f2_round"
    }

    fn supports(&self, kind: ModelKind) -> bool {
        kind == ModelKind::Rlc
    }

    fn estimate(&self, obs: &Observation) -> Result<Vec<f64>> {
        let Observation::Rlc { a, y, .. } = obs else {
            return Err(unsupported(self, obs));
        };
        let sol = f2_solve(a, y)?;
        Ok(match (sol.kind, sol.particular) {
            (F2SolutionKind::Inconsistent, _) | (_, None) => vec![0.5; a.ncols()],
            (_, Some(x)) => x.to_f64(),
        })
    }
}

/// Indicator of the subset found by lattice reduction, or the zero vector.
#[derive(Default)]
pub struct LllSubsetIndicator {
    pub config: LllConfig,
}

impl Estimator for LllSubsetIndicator {
    fn name(&self) -> &str {
        "lll_subset_indicator"
    }

    fn supports(&self, kind: ModelKind) -> bool {
        kind == ModelKind::Gss
    }

    fn estimate(&self, obs: &Observation) -> Result<Vec<f64>> {
        let Observation::Gss { params, x, y } = obs else {
            return Err(unsupported(self, obs));
        };
        let mut v = vec![0.0; params.n_items];
        if let Some(s) = lll_subset_sum(x, *y, params.k, &self.config)? {
            for i in s {
                v[i] = 1.0;
            }
        }
        Ok(v)
    }
}

pub struct ConstantPriorMean;

impl Estimator for ConstantPriorMean {
    fn name(&self) -> &str {
        "constant_prior_mean"
    }

    fn supports(&self, _kind: ModelKind) -> bool {
        true
    }

    fn estimate(&self, obs: &Observation) -> Result<Vec<f64>> {
        Ok(prior_mean(obs))
    }
}

/// `scale * inner(y)`.
pub struct ScaledEstimator<E> {
    pub inner: E,
    pub scale: f64,
    name: String,
}

impl<E: Estimator> ScaledEstimator<E> {
    pub fn new(inner: E, scale: f64) -> Self {
        let name = format!("{}*{}", inner.name(), scale);
        ScaledEstimator { inner, scale, name }
    }
}

impl<E: Estimator> Estimator for ScaledEstimator<E> {
    fn name(&self) -> &str {
        &self.name
    }

    fn supports(&self, kind: ModelKind) -> bool {
        self.inner.supports(kind)
    }

    fn estimate(&self, obs: &Observation) -> Result<Vec<f64>> {
        Ok(self.inner.estimate(obs)?.into_iter().map(|v| v * self.scale).collect())
    }
}

impl Estimator for Box<dyn Estimator> {
    fn name(&self) -> &str {
        self.as_ref().name()
    }

    fn supports(&self, kind: ModelKind) -> bool {
        self.as_ref().supports(kind)
    }

    fn estimate(&self, obs: &Observation) -> Result<Vec<f64>> {
        self.as_ref().estimate(obs)
    }
}

fn unsupported(est: &dyn Estimator, obs: &Observation) -> Error {
    Error::Unsupported {
        estimator: est.name().to_string(),
        model: obs.kind().to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub estimator: String,
    pub params: ModelParams,
    pub rho: f64,
    pub trials: u64,
    /// `E ||A(y) - A(T_rho y)||^2 / E ||A(y)||^2`.
    pub eta_hat: f64,
    pub eta_stderr: f64,
    pub mse_hat: f64,
    pub mse_stderr: f64,
    pub estimator_norm_hat: f64,
    pub estimator_norm_stderr: f64,
    pub displacement_hat: f64,
    pub displacement_stderr: f64,
}

/// Per-trial second moments: `(||A(y) - A(T y)||^2, ||A(y)||^2, ||A(y) - x||^2)`.
pub fn stability_trials(
    estimator: &dyn Estimator,
    params: &ModelParams,
    rho: f64,
    trials: u64,
    seed: u64,
    options: &TrialOptions,
) -> Result<Vec<[f64; 3]>> {
    params.validate()?;
    check_rho(rho)?;
    if !estimator.supports(params.kind()) {
        return Err(Error::Unsupported {
            estimator: estimator.name().to_string(),
            model: params.kind().to_string(),
        });
    }
    crate::par::try_map_trials(trials, |t| {
        let wrap = |e: Error| Error::Trial {
            name: estimator.name().to_string(),
            trial: t,
            source: Box::new(e),
        };
        let inst = trial_instance(params, seed, t, options)?;
        let obs = inst.observation();
        let noisy = noise_observation(&obs, rho, trial_noise_seed(seed, t))?;
        let a = estimator.estimate(&obs).map_err(wrap)?;
        let b = if rho == 0.0 {
            a.clone()
        } else {
            estimator.estimate(&noisy).map_err(wrap)?
        };
        let x = inst.signal();
        let mut disp = CompensatedSum::new();
        let mut norm = CompensatedSum::new();
        let mut err = CompensatedSum::new();
        for i in 0..a.len() {
            disp.add((a[i] - b[i]) * (a[i] - b[i]));
            norm.add(a[i] * a[i]);
            err.add((a[i] - x[i]) * (a[i] - x[i]));
        }
        Ok([disp.value(), norm.value(), err.value()])
    })
}

pub fn measure_stability(
    estimator: &dyn Estimator,
    params: &ModelParams,
    rho: f64,
    trials: u64,
    seed: u64,
    options: &TrialOptions,
) -> Result<StabilityReport> {
    if trials == 0 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    let rows = stability_trials(estimator, params, rho, trials, seed, options)?;
    let col = |c: usize| -> Vec<f64> { rows.iter().map(|r| r[c]).collect() };
    let (disp, norm, err) = (col(0), col(1), col(2));
    let (d, nm, e) = (mean_estimate(&disp), mean_estimate(&norm), mean_estimate(&err));
    let (eta_hat, eta_stderr) = if d.mean == 0.0 {
        (0.0, 0.0)
    } else if nm.mean == 0.0 {
        return Err(Error::IllConditioned(
            "estimator output has zero second moment but moves under noise".into(),
        ));
    } else {
        ratio_estimate(&disp, &norm)
    };
    Ok(StabilityReport {
        estimator: estimator.name().to_string(),
        params: *params,
        rho,
        trials,
        eta_hat,
        eta_stderr,
        mse_hat: e.mean,
        mse_stderr: e.stderr,
        estimator_norm_hat: nm.mean,
        estimator_norm_stderr: nm.stderr,
        displacement_hat: d.mean,
        displacement_stderr: d.stderr,
    })
}

/// `2 sqrt(2 (7 + 4 eta) eta)`.
pub fn penalty_coefficient(eta: f64) -> f64 {
    let eta = eta.max(0.0);
    2.0 * (2.0 * (7.0 + 4.0 * eta) * eta).sqrt()
}

/// Largest `eta` for which an `alpha`-suboptimal estimator is covered:
/// `min(alpha^2 / 400, 1)`.
pub fn eta_threshold(alpha: f64) -> f64 {
    (alpha * alpha / 400.0).min(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierCheck {
    pub estimator: String,
    pub params: ModelParams,
    pub rho: f64,
    pub eta: f64,
    pub penalty_coefficient: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub combined_stderr: f64,
    pub holds_within: f64,
    pub holds: bool,
    /// `MMSE_rho - MSE(A)`, reported but not judged.
    pub mmse_gap: f64,
    pub alpha: Option<f64>,
    pub eta_threshold: Option<f64>,
    pub eta_below_threshold: Option<bool>,
}

/// Tolerance multiplier applied to the combined standard error.
pub const BARRIER_SIGMAS: f64 = 3.0;

/// Compares `MSE(A)` with `MMSE_rho - 2 sqrt(2(7+4 eta) eta) E||x||^2`.
pub fn verify_barrier(
    stab: &StabilityReport,
    mmse_rho: &MmseReport,
    signal_norm: f64,
    alpha: Option<f64>,
) -> Result<BarrierCheck> {
    if stab.params != mmse_rho.params {
        return Err(Error::param("mmse_rho", "reports were computed for different models"));
    }
    if stab.rho != mmse_rho.rho {
        return Err(Error::param(
            "mmse_rho",
            format!("noise levels differ: {} vs {}", stab.rho, mmse_rho.rho),
        ));
    }
    let eta = stab.eta_hat;
    let coef = penalty_coefficient(eta);
    let lhs = stab.mse_hat;
    let rhs = mmse_rho.mmse_hat - coef * signal_norm;
    // spread of the penalty under a one-sigma move of eta
    let pen_se = (penalty_coefficient(eta + stab.eta_stderr) - coef) * signal_norm;
    let combined = (stab.mse_stderr.powi(2) + mmse_rho.stderr.powi(2) + pen_se.powi(2)).sqrt();
    let margin = lhs - rhs;
    let threshold = alpha.map(eta_threshold);
    Ok(BarrierCheck {
        estimator: stab.estimator.clone(),
        params: stab.params,
        rho: stab.rho,
        eta,
        penalty_coefficient: coef,
        lhs,
        rhs,
        margin,
        combined_stderr: combined,
        holds_within: BARRIER_SIGMAS,
        holds: margin >= -BARRIER_SIGMAS * combined,
        mmse_gap: mmse_rho.mmse_hat - lhs,
        alpha,
        eta_threshold: threshold,
        eta_below_threshold: threshold.map(|t| eta <= t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{GssParams, PspParams, RlcParams};

    #[test]
    fn penalty_arithmetic() {
        assert_eq!(penalty_coefficient(0.0), 0.0);
        assert!((penalty_coefficient(1.0) - 2.0 * 22f64.sqrt()).abs() < 1e-15);
        assert!((penalty_coefficient(1.0) - 9.38083).abs() < 1e-5);
        assert_eq!(eta_threshold(10.0), 0.25);
        assert_eq!(eta_threshold(30.0), 1.0);
    }

    #[test]
    fn unknown_name_lists_registry() {
        let err = lookup("nope").err().unwrap();
        let msg = err.to_string();
        for name in ESTIMATOR_NAMES {
            assert!(msg.contains(name));
            assert_eq!(lookup(name).unwrap().name(), name);
        }
        assert!(err.is_usage());
    }

    #[test]
    fn constant_estimator_is_perfectly_stable() {
        let params = ModelParams::Rlc(RlcParams::new(8, 5).unwrap());
        let r = measure_stability(&ConstantPriorMean, &params, 0.7, 50, 1, &TrialOptions::default()).unwrap();
        assert_eq!(r.eta_hat, 0.0);
        assert_eq!(r.estimator_norm_hat, 5.0 * 0.25);
    }

    #[test]
    fn prior_mean_psp_sums_to_path_length() {
        let params = PspParams::new(9, 4, 0.2).unwrap();
        let obs = Observation::Psp {
            params,
            graph: crate::models::Graph::empty(9),
        };
        let total: f64 = prior_mean(&obs).iter().sum();
        assert!((total - 4.0).abs() < 1e-12);
    }

    #[test]
    fn unsupported_pairing() {
        let params = ModelParams::Gss(GssParams::new(8, 2).unwrap());
        let err = measure_stability(&F2Round, &params, 0.3, 5, 0, &TrialOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Unsupported { .. }));
    }

    #[test]
    fn provenance_checked() {
        let params = ModelParams::Rlc(RlcParams::new(8, 5).unwrap());
        let opts = TrialOptions::default();
        let stab = measure_stability(&ConstantPriorMean, &params, 0.5, 20, 1, &opts).unwrap();
        let mmse = bayes::estimate_mmse_curve(&params, &[0.4], 20, 1, &opts).unwrap();
        assert!(verify_barrier(&stab, &mmse[0], 2.5, None).is_err());
        let mmse = bayes::estimate_mmse_curve(&params, &[0.5], 20, 1, &opts).unwrap();
        let chk = verify_barrier(&stab, &mmse[0], 2.5, Some(1.0)).unwrap();
        assert_eq!(chk.rhs, mmse[0].mmse_hat);
        assert_eq!(chk.eta_below_threshold, Some(true));
    }
}
