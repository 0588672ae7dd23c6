//! Noise operators `T_rho`.
//!
//! Each operator takes an explicit seed so the same noise realization can be
//! replayed against several estimators. `rho = 0` returns the input
//! unchanged without touching the generator.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::F2Vector;
use crate::models::{Graph, Observation, Tensor};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub rho: f64,
}

impl NoiseParams {
    pub fn new(rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(NoiseParams { rho })
    }
}

pub fn check_rho(rho: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::param("rho", format!("need rho in [0, 1], got {rho}")))
    }
}

/// Resamples every unordered pair from `Bern(q)` with probability `rho`.
pub fn noise_psp(graph: &Graph, q: f64, rho: f64, seed: u64) -> Result<Graph> {
    check_rho(rho)?;
    let mut out = graph.clone();
    if rho == 0.0 {
        return Ok(out);
    }
    let mut rng = rng::from_seed(seed);
    for flag in out.pair_flags_mut() {
        // both uniforms are drawn for every pair so the stream position does
        // not depend on the input
        let resample = rng.random::<f64>() < rho;
        let fresh = rng.random::<f64>() < q;
        if resample {
            *flag = fresh;
        }
    }
    Ok(out)
}

/// Resamples every bit from `Bern(1/2)` with probability `rho`.
pub fn noise_rlc(y: &F2Vector, rho: f64, seed: u64) -> Result<F2Vector> {
    check_rho(rho)?;
    let mut out = y.clone();
    if rho == 0.0 {
        return Ok(out);
    }
    let mut rng = rng::from_seed(seed);
    for i in 0..out.len() {
        let resample = rng.random::<f64>() < rho;
        let fresh = rng.random::<bool>();
        if resample {
            out.set(i, fresh);
        }
    }
    Ok(out)
}

/// `sqrt(1 - rho^2) y + rho z` with `z` standard normal.
pub fn noise_gss(y: f64, rho: f64, seed: u64) -> Result<f64> {
    check_rho(rho)?;
    if rho == 0.0 {
        return Ok(y);
    }
    let mut rng = rng::from_seed(seed);
    let z: f64 = rng.sample(StandardNormal);
    Ok(ou(y, z, rho))
}

/// Entrywise Ornstein-Uhlenbeck step on a tensor.
pub fn noise_tpca(y: &Tensor, rho: f64, seed: u64) -> Result<Tensor> {
    check_rho(rho)?;
    let mut out = y.clone();
    if rho == 0.0 {
        return Ok(out);
    }
    let mut rng = rng::from_seed(seed);
    for v in out.data.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = ou(*v, z, rho);
    }
    Ok(out)
}

#[inline]
pub(crate) fn ou(y: f64, z: f64, rho: f64) -> f64 {
    (1.0 - rho * rho).sqrt() * y + rho * z
}

/// Applies the model's noise operator to the noisy part of an observation.
pub fn noise_observation(obs: &Observation, rho: f64, seed: u64) -> Result<Observation> {
    Ok(match obs {
        Observation::Psp { params, graph } => Observation::Psp {
            params: *params,
            graph: noise_psp(graph, params.q, rho, seed)?,
        },
        Observation::Rlc { params, a, y } => Observation::Rlc {
            params: *params,
            a: a.clone(),
            y: noise_rlc(y, rho, seed)?,
        },
        Observation::Gss { params, x, y } => Observation::Gss {
            params: *params,
            x: x.clone(),
            y: noise_gss(*y, rho, seed)?,
        },
        Observation::Tpca { params, y } => Observation::Tpca {
            params: *params,
            y: noise_tpca(y, rho, seed)?,
        },
    })
}
