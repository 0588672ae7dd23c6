use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::characters::CharacterIndex;
use super::hermite::hermite_all;
use crate::bayes::{trial_instance, trial_noise_seed, TrialOptions};
use crate::error::{Error, Result};
use crate::gf2::{F2Matrix, F2Vector};
use crate::models::{Graph, GssParams, ModelInstance, ModelParams, RlcParams};
use crate::noise::{check_rho, noise_gss, noise_psp, noise_rlc};
use crate::rng::WorkbenchRng;
use crate::stats::{falling_factorial, mean_estimate, ratio_estimate};

/// Upper limit on embeddings of one pattern into `K_n`.
pub const DEFAULT_EMBEDDING_BUDGET: u128 = 1_000_000;

/// Term `prod_i h_{alpha_i}(X_i) h_t(y)` with `y = Y / sqrt(k)`.
/// `alpha` is sparse: `(item, degree)` pairs with distinct items.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HermiteIndex {
    pub alpha: Vec<(usize, u32)>,
    pub t: u32,
}

impl HermiteIndex {
    pub fn degree(&self) -> u32 {
        self.alpha.iter().map(|&(_, a)| a).sum::<u32>() + self.t
    }
}

/// A small graph with the endpoints `1`, `2` labelled and free vertices
/// `3..=2+free`. It stands for the sum over every injective placement of the
/// free vertices into `3..=n` of `prod_e chi_e(G)`, where
/// `chi_e(G) = (G_e - q) / sqrt(q (1 - q))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgePattern {
    pub free: usize,
    pub edges: Vec<(usize, usize)>,
}

impl EdgePattern {
    pub fn degree(&self) -> usize {
        self.edges.len()
    }

    fn validate(&self, n: usize) -> Result<()> {
        let top = self.free + 2;
        let mut touched = vec![false; top + 1];
        for &(a, b) in &self.edges {
            if a == b || a == 0 || b == 0 || a > top || b > top {
                return Err(Error::param("edges", format!("invalid pattern edge ({a}, {b})")));
            }
            touched[a] = true;
            touched[b] = true;
        }
        if (3..=top).any(|v| !touched[v]) {
            return Err(Error::param("edges", "pattern has an isolated free vertex"));
        }
        if self.free > n.saturating_sub(2) {
            return Err(Error::param("free", "more free vertices than available"));
        }
        Ok(())
    }
}

/// A finitely supported polynomial in one model's orthonormal basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum PolySpec {
    Rlc { terms: Vec<(CharacterIndex, f64)> },
    Gss { terms: Vec<(HermiteIndex, f64)> },
    Psp { terms: Vec<(EdgePattern, f64)> },
}

impl PolySpec {
    pub fn degree(&self) -> usize {
        match self {
            PolySpec::Rlc { terms } => terms.iter().map(|(i, _)| i.degree()).max(),
            PolySpec::Gss { terms } => terms.iter().map(|(i, _)| i.degree() as usize).max(),
            PolySpec::Psp { terms } => terms.iter().map(|(p, _)| p.degree()).max(),
        }
        .unwrap_or(0)
    }

    pub fn eval_rlc(&self, a: &F2Matrix, y: &F2Vector) -> f64 {
        let PolySpec::Rlc { terms } = self else {
            return f64::NAN;
        };
        terms.iter().map(|(idx, c)| c * idx.eval(a, y)).sum()
    }

    /// `y` is the normalised sum `Y / sqrt(k)`.
    pub fn eval_gss(&self, x: &[f64], y: f64) -> f64 {
        let PolySpec::Gss { terms } = self else {
            return f64::NAN;
        };
        let max_t = terms.iter().map(|(i, _)| i.t).max().unwrap_or(0);
        let hy = hermite_all(max_t, y);
        terms
            .iter()
            .map(|(idx, c)| {
                let hx: f64 = idx
                    .alpha
                    .iter()
                    .map(|&(i, a)| super::hermite::hermite_eval(a, x[i]))
                    .product();
                c * hx * hy[idx.t as usize]
            })
            .sum()
    }

    pub fn eval_psp(&self, graph: &Graph, q: f64) -> f64 {
        let PolySpec::Psp { terms } = self else {
            return f64::NAN;
        };
        let norm = (q * (1.0 - q)).sqrt();
        let chi: Vec<f64> = graph
            .pair_flags()
            .iter()
            .map(|&b| ((b as u8 as f64) - q) / norm)
            .collect();
        terms
            .iter()
            .map(|(p, c)| c * pattern_sum(p, graph.n(), &chi))
            .sum()
    }

    fn validate(&self, params: &ModelParams) -> Result<()> {
        let mismatch = || Error::param("poly", "polynomial and model differ");
        match (self, params) {
            (PolySpec::Rlc { terms }, ModelParams::Rlc(p)) => {
                terms.iter().try_for_each(|(i, _)| i.validate(p))
            }
            (PolySpec::Gss { terms }, ModelParams::Gss(p)) => {
                if terms.iter().any(|(i, _)| i.alpha.iter().any(|&(j, _)| j >= p.n_items)) {
                    return Err(Error::param("alpha", "item index outside [N]"));
                }
                Ok(())
            }
            (PolySpec::Psp { terms }, ModelParams::Psp(p)) => {
                if !(p.q > 0.0 && p.q < 1.0) {
                    return Err(Error::param("q", "edge characters need 0 < q < 1"));
                }
                for (pat, _) in terms {
                    pat.validate(p.n)?;
                    let count = falling_factorial(p.n as u64 - 2, pat.free as u64);
                    if count > DEFAULT_EMBEDDING_BUDGET {
                        return Err(Error::budget("pattern embeddings", count, DEFAULT_EMBEDDING_BUDGET));
                    }
                }
                Ok(())
            }
            _ => Err(mismatch()),
        }
    }
}

fn pattern_sum(p: &EdgePattern, n: usize, chi: &[f64]) -> f64 {
    let mut place = vec![0usize; p.free + 3];
    place[1] = 1;
    place[2] = 2;
    let mut used = vec![false; n + 1];
    fn rec(p: &EdgePattern, n: usize, chi: &[f64], v: usize, place: &mut [usize], used: &mut [bool]) -> f64 {
        if v > p.free + 2 {
            return p
                .edges
                .iter()
                .map(|&(a, b)| chi[crate::models::pair_index(n, place[a], place[b])])
                .product();
        }
        let mut total = 0.0;
        for u in 3..=n {
            if !used[u] {
                used[u] = true;
                place[v] = u;
                total += rec(p, n, chi, v + 1, place, used);
                used[u] = false;
            }
        }
        total
    }
    rec(p, n, chi, 3, &mut place, &mut used)
}

// ---------------------------------------------------------------------------
// Random polynomials

/// `terms` random characters of degree `1..=degree` (at least one of degree
/// exactly `degree`) with standard-normal coefficients.
pub fn random_rlc_poly(params: &RlcParams, degree: usize, terms: usize, rng: &mut WorkbenchRng) -> PolySpec {
    let (m, n) = (params.m, params.n);
    let cells = m * n + m;
    let terms = (0..terms)
        .map(|t| {
            let d = if t == 0 { degree } else { rng.random_range(1..=degree) };
            let mut s = Vec::new();
            let mut tt = Vec::new();
            for c in sample(rng, cells, d.min(cells)) {
                if c < m * n {
                    s.push((c / n, c % n));
                } else {
                    tt.push(c - m * n);
                }
            }
            (CharacterIndex::new(s, tt), rng.sample(StandardNormal))
        })
        .collect();
    PolySpec::Rlc { terms }
}

/// Random Hermite terms of total degree `1..=degree` in `(X, y)`.
pub fn random_gss_poly(params: &GssParams, degree: u32, terms: usize, rng: &mut WorkbenchRng) -> PolySpec {
    let terms = (0..terms)
        .map(|t| {
            let d = if t == 0 { degree } else { rng.random_range(1..=degree) };
            let ty = rng.random_range(0..=d);
            let mut alpha: Vec<(usize, u32)> = Vec::new();
            for _ in 0..d - ty {
                let i = rng.random_range(0..params.n_items);
                match alpha.iter_mut().find(|(j, _)| *j == i) {
                    Some((_, a)) => *a += 1,
                    None => alpha.push((i, 1)),
                }
            }
            alpha.sort_unstable();
            (HermiteIndex { alpha, t: ty }, rng.sample(StandardNormal))
        })
        .collect();
    PolySpec::Gss { terms }
}

/// Random symmetric patterns with `1..=degree` edges and at most `max_free`
/// free vertices.
pub fn random_psp_poly(degree: usize, max_free: usize, terms: usize, rng: &mut WorkbenchRng) -> PolySpec {
    let top = max_free + 2;
    let all_edges: Vec<(usize, usize)> = (1..=top)
        .flat_map(|a| (a + 1..=top).map(move |b| (a, b)))
        .collect();
    let terms = (0..terms)
        .map(|t| {
            let d = if t == 0 { degree } else { rng.random_range(1..=degree) };
            let chosen: Vec<(usize, usize)> = sample(rng, all_edges.len(), d.min(all_edges.len()))
                .into_iter()
                .map(|i| all_edges[i])
                .collect();
            (compact_pattern(&chosen), rng.sample(StandardNormal))
        })
        .collect();
    PolySpec::Psp { terms }
}

/// Relabels the free vertices that appear in `edges` as `3, 4, ...`.
fn compact_pattern(edges: &[(usize, usize)]) -> EdgePattern {
    let mut free: Vec<usize> = edges
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .filter(|&v| v >= 3)
        .collect();
    free.sort_unstable();
    free.dedup();
    let relabel = |v: usize| if v < 3 { v } else { 3 + free.binary_search(&v).unwrap() };
    let mut edges: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(a, b)| {
            let (a, b) = (relabel(a), relabel(b));
            (a.min(b), a.max(b))
        })
        .collect();
    edges.sort_unstable();
    EdgePattern {
        free: free.len(),
        edges,
    }
}

// ---------------------------------------------------------------------------
// Stability ratio

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRatio {
    pub ratio: f64,
    pub stderr: f64,
    pub degree: usize,
    /// The bound a degree-`D` polynomial is expected to satisfy, without slack.
    pub bound: f64,
    /// Stability-bound hypotheses that the configuration violates.
    pub warnings: Vec<String>,
}

/// Degree-`D` stability bound for the model.
pub fn stability_bound(params: &ModelParams, degree: usize, rho: f64) -> f64 {
    match params {
        ModelParams::Gss(_) => 2.0 * (1.0 - (1.0 - rho * rho).powf(degree as f64 / 2.0)),
        _ => 2.0 * (1.0 - (1.0 - rho).powi(degree as i32)),
    }
}

fn hypothesis_warnings(params: &ModelParams, degree: usize) -> Vec<String> {
    let mut w = Vec::new();
    match params {
        ModelParams::Rlc(p) if 2 * degree > p.n => w.push(format!("2D = {} exceeds n = {}", 2 * degree, p.n)),
        ModelParams::Psp(p) => {
            if 2 * degree >= p.path_len {
                w.push(format!("2D = {} is not below L = {}", 2 * degree, p.path_len));
            }
            if p.q > 0.5 {
                w.push(format!("q = {} exceeds 1/2", p.q));
            }
        }
        ModelParams::Gss(p) if 2 * p.k > p.n_items => w.push(format!("k = {} is not small against N = {}", p.k, p.n_items)),
        _ => {}
    }
    w
}

/// Monte-Carlo `E[(f(y) - f(T_rho y))^2] / E[f(y)^2]` under the planted measure.
pub fn stability_ratio(poly: &PolySpec, params: &ModelParams, rho: f64, trials: u64, seed: u64) -> Result<StabilityRatio> {
    params.validate()?;
    check_rho(rho)?;
    if let ModelParams::Tpca(_) = params {
        return Err(Error::Unsupported {
            estimator: "polynomial".into(),
            model: "tpca".into(),
        });
    }
    poly.validate(params)?;
    if trials < 2 {
        return Err(Error::param("trials", "need at least two trials"));
    }
    let opts = TrialOptions::default();
    let rows: Vec<(f64, f64)> = crate::par::try_map_trials(trials, |t| {
        let inst = trial_instance(params, seed, t, &opts)?;
        let ns = trial_noise_seed(seed, t);
        let (f, g) = match &inst {
            ModelInstance::Rlc(i) => {
                let noisy = noise_rlc(&i.y, rho, ns)?;
                (poly.eval_rlc(&i.a, &i.y), poly.eval_rlc(&i.a, &noisy))
            }
            ModelInstance::Gss(i) => {
                let y = i.y / (i.params.k as f64).sqrt();
                (poly.eval_gss(&i.x, y), poly.eval_gss(&i.x, noise_gss(y, rho, ns)?))
            }
            ModelInstance::Psp(i) => {
                let q = i.params.q;
                let noisy = noise_psp(&i.graph, q, rho, ns)?;
                (poly.eval_psp(&i.graph, q), poly.eval_psp(&noisy, q))
            }
            ModelInstance::Tpca(_) => unreachable!(),
        };
        Ok(((f - g) * (f - g), f * f))
    })?;
    let num: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let den: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let degree = poly.degree();
    let out = |ratio, stderr| StabilityRatio {
        ratio,
        stderr,
        degree,
        bound: stability_bound(params, degree, rho),
        warnings: hypothesis_warnings(params, degree),
    };
    if num.iter().all(|&v| v == 0.0) {
        return Ok(out(0.0, 0.0));
    }
    let d = mean_estimate(&den);
    if d.mean < 10.0 * d.stderr {
        return Err(Error::IllConditioned(format!(
            "E[f^2] = {} is within 10 standard errors ({}) of zero",
            d.mean, d.stderr
        )));
    }
    let (r, se) = ratio_estimate(&num, &den);
    Ok(out(r, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::PspParams;

    #[test]
    fn constant_polynomial_is_stable() {
        let params = ModelParams::Rlc(RlcParams::new(6, 4).unwrap());
        let poly = PolySpec::Rlc {
            terms: vec![(CharacterIndex::empty(), 2.0)],
        };
        let r = stability_ratio(&poly, &params, 0.4, 100, 1).unwrap();
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn zero_rho_ratio_is_zero() {
        let params = ModelParams::Gss(GssParams::new(20, 3).unwrap());
        let poly = random_gss_poly(&GssParams::new(20, 3).unwrap(), 3, 4, &mut crate::rng::from_seed(1));
        assert_eq!(stability_ratio(&poly, &params, 0.0, 200, 2).unwrap().ratio, 0.0);
    }

    #[test]
    fn pattern_sum_counts_embeddings() {
        // sum over v of chi_{1v}: on the complete graph each chi is sqrt((1-q)/q)
        let poly = PolySpec::Psp {
            terms: vec![(EdgePattern { free: 1, edges: vec![(1, 3)] }, 1.0)],
        };
        let q: f64 = 0.25;
        let v = poly.eval_psp(&Graph::complete(6), q);
        assert!((v - 4.0 * ((1.0 - q) / q).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn compact_relabels_free_vertices() {
        let p = compact_pattern(&[(5, 2), (1, 5), (4, 5)]);
        assert_eq!(p, EdgePattern { free: 2, edges: vec![(1, 4), (2, 4), (3, 4)] });
    }

    #[test]
    fn json_shape() {
        let poly = PolySpec::Rlc {
            terms: vec![(CharacterIndex::new(vec![(0, 1)], vec![2]), 0.5)],
        };
        let s = serde_json::to_string(&poly).unwrap();
        assert_eq!(s, r#"{"model":"rlc","terms":[[{"S":[[0,1]],"T":[2]},0.5]]}"#);
        let back: PolySpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, poly);
    }

    #[test]
    fn model_mismatch_rejected() {
        let params = ModelParams::Psp(PspParams::new(6, 3, 0.3).unwrap());
        let poly = PolySpec::Rlc { terms: vec![] };
        assert!(stability_ratio(&poly, &params, 0.3, 10, 0).is_err());
    }
}
