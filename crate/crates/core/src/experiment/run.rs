use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Command, ExperimentConfig};
use crate::bayes::{self, trial_instance, trial_noise_seed, TrialOptions};
use crate::counting::first_moment_check;
use crate::error::{Error, Result};
use crate::lowdeg::{
    diagram_expectation, hermite_eval, random_gss_poly, random_psp_poly, random_rlc_poly,
    stability_ratio, DiagramSpec, PolySpec,
};
use crate::models::{sample_tpca, ModelInstance, ModelParams, TpcaParams};
use crate::noise::noise_observation;
use crate::rng::{self, Stream};
use crate::solvers::{f2_solve, lll_subset_sum, shortest_path, F2SolutionKind, LllConfig};
use crate::stability::{lookup, measure_stability, verify_barrier};
use crate::stats::{binomial, mean_estimate};

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub model: String,
    pub params_json: String,
    pub rho: Option<f64>,
    pub trials: u64,
    pub metric: String,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
}

struct Rows<'a> {
    model: String,
    params_json: String,
    trials: u64,
    out: &'a mut Vec<ResultRow>,
}

impl Rows<'_> {
    fn push(&mut self, rho: Option<f64>, metric: impl Into<String>, value: f64, stderr: f64) {
        self.out.push(ResultRow {
            model: self.model.clone(),
            params_json: self.params_json.clone(),
            rho,
            trials: self.trials,
            metric: metric.into(),
            value,
            stderr,
        });
    }
}

fn rows_for<'a>(params: &ModelParams, trials: u64, out: &'a mut Vec<ResultRow>) -> Rows<'a> {
    Rows {
        model: params.kind().to_string(),
        params_json: params.params_json(),
        trials,
        out,
    }
}

/// Runs an experiment and returns its rows. Nothing is written to disk.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let mut rows = Vec::new();
    match config.command {
        Command::MmseCurve => mmse_curve(config, &mut rows)?,
        Command::Stability => stability(config, &mut rows)?,
        Command::Barrier => barrier(config, &mut rows)?,
        Command::Solve => solve(config, &mut rows)?,
        Command::CountPaths => count_paths(config, &mut rows)?,
        Command::HermiteCheck => hermite_check(config, &mut rows)?,
        Command::LowdegStability => lowdeg_stability(config, &mut rows)?,
        Command::PcaWindow => pca_window(config, &mut rows)?,
    }
    Ok(RunOutput { rows })
}

fn params(config: &ExperimentConfig) -> ModelParams {
    config.params.expect("validated")
}

fn options(config: &ExperimentConfig) -> TrialOptions {
    TrialOptions {
        full_rank_only: config.full_rank_only,
    }
}

fn mmse_curve(config: &ExperimentConfig, out: &mut Vec<ResultRow>) -> Result<()> {
    let p = params(config);
    let reports = bayes::estimate_mmse_curve(&p, &config.rho_grid, config.trials, config.seed, &options(config))?;
    let mut rows = rows_for(&p, config.trials, out);
    for r in reports {
        let rho = Some(r.rho);
        rows.push(rho, "mmse", r.mmse_hat, r.stderr);
        rows.push(rho, "nmmse", r.nmmse_hat, r.stderr / r.signal_norm);
        rows.push(rho, "posterior_norm", r.posterior_norm_hat, r.posterior_norm_stderr);
        rows.push(rho, "overlap", r.overlap_hat, r.overlap_stderr);
    }
    Ok(())
}

fn stability(config: &ExperimentConfig, out: &mut Vec<ResultRow>) -> Result<()> {
    let p = params(config);
    let opts = options(config);
    let mut rows = rows_for(&p, config.trials, out);
    for name in &config.estimators {
        let est = lookup(name)?;
        for &rho in &config.rho_grid {
            let r = measure_stability(est.as_ref(), &p, rho, config.trials, config.seed, &opts)?;
            let rho = Some(rho);
            rows.push(rho, format!("eta/{name}"), r.eta_hat, r.eta_stderr);
            rows.push(rho, format!("mse/{name}"), r.mse_hat, r.mse_stderr);
            rows.push(rho, format!("estimator_norm/{name}"), r.estimator_norm_hat, r.estimator_norm_stderr);
            rows.push(rho, format!("displacement/{name}"), r.displacement_hat, r.displacement_stderr);
        }
    }
    Ok(())
}

fn barrier(config: &ExperimentConfig, out: &mut Vec<ResultRow>) -> Result<()> {
    let p = params(config);
    let opts = options(config);
    let mmse = bayes::estimate_mmse_curve(&p, &config.rho_grid, config.trials, config.seed, &opts)?;
    let mut rows = rows_for(&p, config.trials, out);
    for name in &config.estimators {
        let est = lookup(name)?;
        for m in &mmse {
            let s = measure_stability(est.as_ref(), &p, m.rho, config.trials, config.seed, &opts)?;
            let c = verify_barrier(&s, m, p.signal_norm(), config.alpha)?;
            let rho = Some(m.rho);
            rows.push(rho, format!("eta/{name}"), c.eta, s.eta_stderr);
            rows.push(rho, format!("lhs/{name}"), c.lhs, s.mse_stderr);
            rows.push(rho, format!("rhs/{name}"), c.rhs, m.stderr);
            rows.push(rho, format!("margin/{name}"), c.margin, c.combined_stderr);
            rows.push(rho, format!("holds/{name}"), c.holds as u8 as f64, 0.0);
            rows.push(rho, format!("mmse_gap/{name}"), c.mmse_gap, c.combined_stderr);
            if let Some(below) = c.eta_below_threshold {
                rows.push(rho, format!("eta_below_threshold/{name}"), below as u8 as f64, 0.0);
            }
        }
    }
    Ok(())
}

fn solve(config: &ExperimentConfig, out: &mut Vec<ResultRow>) -> Result<()> {
    let p = params(config);
    if let ModelParams::Tpca(_) = p {
        return Err(Error::Unsupported {
            estimator: "solve".into(),
            model: "tpca".into(),
        });
    }
    let opts = options(config);
    let mut rows = rows_for(&p, config.trials, out);
    for &rho in &config.rho_grid {
        let outcomes: Vec<(f64, f64)> = crate::par::try_map_trials(config.trials, |t| {
            let inst = trial_instance(&p, config.seed, t, &opts)?;
            let noisy = noise_observation(&inst.observation(), rho, trial_noise_seed(config.seed, t))?;
            let (found, exact) = match (&inst, &noisy) {
                (ModelInstance::Psp(i), crate::models::Observation::Psp { graph, .. }) => {
                    let path = shortest_path(graph);
                    (path.is_some(), path.as_ref() == Some(&i.planted_path))
                }
                (ModelInstance::Rlc(i), crate::models::Observation::Rlc { a, y, .. }) => {
                    let s = f2_solve(a, y)?;
                    let unique = s.kind == F2SolutionKind::Unique;
                    (unique, unique && s.particular.as_ref() == Some(&i.x))
                }
                (ModelInstance::Gss(i), crate::models::Observation::Gss { x, y, .. }) => {
                    let s = lll_subset_sum(x, *y, i.params.k, &LllConfig::default())?;
                    (s.is_some(), s.as_ref() == Some(&i.support))
                }
                _ => unreachable!(),
            };
            Ok((found as u8 as f64, exact as u8 as f64))
        })?;
        let found = mean_estimate(&outcomes.iter().map(|o| o.0).collect::<Vec<_>>());
        let exact = mean_estimate(&outcomes.iter().map(|o| o.1).collect::<Vec<_>>());
        rows.push(Some(rho), "output_rate", found.mean, found.stderr);
        rows.push(Some(rho), "recovery_rate", exact.mean, exact.stderr);
    }
    Ok(())
}

fn count_paths(config: &ExperimentConfig, out: &mut Vec<ResultRow>) -> Result<()> {
    let c = config.counting.clone().unwrap_or_default();
    let r = first_moment_check(c.n, c.m, c.eps_m, c.q, config.trials, config.seed, c.pairs)?;
    let params_json = serde_json::json!({"n": c.n, "m": c.m, "eps_m": c.eps_m, "q": c.q}).to_string();
    let mut rows = Rows {
        model: "gnp".into(),
        params_json,
        trials: config.trials,
        out,
    };
    rows.push(None, "mean_count", r.mean, r.stderr);
    rows.push(None, "expected_count", r.expected, 0.0);
    rows.push(None, "second_moment", r.second_moment, 0.0);
    if let Some(ratio) = r.pair_ratio {
        rows.push(None, "pair_ratio", ratio, 0.0);
    }
    Ok(())
}

/// Random spec with `R = V V^T` for unit vectors `v_i` in `R^3`.
pub(crate) fn random_diagram(max_vars: usize, max_degree: u32, rng: &mut rng::WorkbenchRng) -> (DiagramSpec, Vec<[f64; 3]>) {
    let k = rng.random_range(1..=max_vars);
    let total = rng.random_range(1..=max_degree);
    let mut alpha = vec![0u32; k];
    for _ in 0..total {
        alpha[rng.random_range(0..k)] += 1;
    }
    let vectors: Vec<[f64; 3]> = (0..k)
        .map(|_| {
            let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / norm, v[1] / norm, v[2] / norm]
        })
        .collect();
    let r = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        1.0
                    } else {
                        let (a, b) = (i.min(j), i.max(j));
                        (0..3).map(|t| vectors[a][t] * vectors[b][t]).sum()
                    }
                })
                .collect()
        })
        .collect();
    let shifted = rng.random::<bool>();
    let mu = (0..k)
        .map(|_| if shifted { 0.5 * rng.sample::<f64, _>(StandardNormal) } else { 0.0 })
        .collect();
    (DiagramSpec { alpha, r, mu }, vectors)
}

fn hermite_check(config: &ExperimentConfig, out: &mut Vec<ResultRow>) -> Result<()> {
    let h = &config.hermite;
    let mut rows = Rows {
        model: "gaussian".into(),
        params_json: serde_json::to_string(h)?,
        trials: config.trials,
        out,
    };
    for s in 0..h.specs {
        let mut rng = rng::stream(config.seed, Stream::Spec, s as u64);
        let (spec, vectors) = random_diagram(h.max_variables, h.max_degree, &mut rng);
        let exact = diagram_expectation(&spec)?;
        let samples: Vec<f64> = crate::par::map_trials(config.trials, |t| {
            let mut rng = rng::stream(config.seed ^ s as u64, Stream::Oracle, t);
            let z: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
            spec.alpha
                .iter()
                .enumerate()
                .map(|(i, &a)| {
                    let xi = vectors[i][0] * z[0] + vectors[i][1] * z[1] + vectors[i][2] * z[2] + spec.mu[i];
                    hermite_eval(a, xi)
                })
                .product()
        });
        let mc = mean_estimate(&samples);
        rows.push(None, format!("exact/{s}"), exact, 0.0);
        rows.push(None, format!("mc/{s}"), mc.mean, mc.stderr);
        let z = if mc.stderr > 0.0 { (mc.mean - exact) / mc.stderr } else { 0.0 };
        rows.push(None, format!("z/{s}"), z, 0.0);
    }
    Ok(())
}

fn lowdeg_stability(config: &ExperimentConfig, out: &mut Vec<ResultRow>) -> Result<()> {
    let p = params(config);
    let o = &config.lowdeg;
    let mut rows = rows_for(&p, config.trials, out);
    for j in 0..o.polynomials {
        let mut rng = rng::stream(config.seed, Stream::Polynomial, j as u64);
        let poly: PolySpec = match &p {
            ModelParams::Rlc(rp) => random_rlc_poly(rp, o.degree, o.terms, &mut rng),
            ModelParams::Gss(gp) => random_gss_poly(gp, o.degree as u32, o.terms, &mut rng),
            ModelParams::Psp(_) => random_psp_poly(o.degree, o.max_free, o.terms, &mut rng),
            ModelParams::Tpca(_) => unreachable!(),
        };
        for &rho in &config.rho_grid {
            let r = stability_ratio(&poly, &p, rho, config.trials, config.seed.wrapping_add(j as u64))?;
            rows.push(Some(rho), format!("ratio/{j}"), r.ratio, r.stderr);
            rows.push(Some(rho), format!("bound/{j}"), r.bound, 0.0);
        }
    }
    Ok(())
}

/// Posterior mass on the planted support, per trial.
pub fn overlap_mass_at(params: &TpcaParams, trials: u64, seed: u64) -> Result<Vec<f64>> {
    crate::par::try_map_trials(trials, |t| {
        let inst = sample_tpca(params, rng::derive_seed(seed, Stream::Instance, t))?;
        let p = bayes::tpca_overlap_distribution(&inst.y, &inst.support, params)?;
        Ok(p[params.k])
    })
}

fn pca_window(config: &ExperimentConfig, out: &mut Vec<ResultRow>) -> Result<()> {
    let ModelParams::Tpca(base) = params(config) else {
        unreachable!()
    };
    let scale = (binomial((base.n - base.k) as u64, base.k as u64) as f64).ln();
    for &factor in &config.window.factors {
        let tp = base.with_lambda(factor * scale);
        let model = ModelParams::Tpca(tp);
        let mass = overlap_mass_at(&tp, config.trials, config.seed)?;
        let m = mean_estimate(&mass);
        let above = mean_estimate(&mass.iter().map(|&v| (v > 0.5) as u8 as f64).collect::<Vec<_>>());
        let mut rows = rows_for(&model, config.trials, out);
        rows.push(Some(0.0), "planted_overlap_mass", m.mean, m.stderr);
        rows.push(Some(0.0), "fraction_above_half", above.mean, above.stderr);
    }
    Ok(())
}
