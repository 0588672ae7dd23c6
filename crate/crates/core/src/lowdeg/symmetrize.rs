use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::bayes::{trial_instance, TrialOptions};
use crate::error::{Error, Result};
use crate::models::{pair_index, Edge, Graph, ModelInstance, ModelParams, PspParams};
use crate::rng::{self, Stream, WorkbenchRng};
use crate::stats::{mean_estimate, MeanEstimate};

/// Default number of sampled relabelings used to average an estimator.
pub const DEFAULT_PERMUTATIONS: usize = 2000;

/// `coeff * prod_{e in monomial} G_e`, added to output coordinate `target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeTerm {
    pub target: Edge,
    pub monomial: Vec<Edge>,
    pub coeff: f64,
}

/// Vector-valued polynomial estimator of the planted edge indicators.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgePolynomial {
    pub terms: Vec<EdgeTerm>,
}

impl EdgePolynomial {
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.monomial.len()).max().unwrap_or(0)
    }

    pub fn eval(&self, graph: &Graph) -> Vec<f64> {
        let mut out = vec![0.0; graph.num_pairs()];
        for t in &self.terms {
            if t.monomial.iter().all(|&(i, j)| graph.has_edge(i, j)) {
                out[graph.pair_index(t.target.0, t.target.1)] += t.coeff;
            }
        }
        out
    }

    /// Adds `sigma^{-1} g(sigma^{-1} G)` to `acc`, where `sigma` maps pattern
    /// vertices to graph vertices.
    fn accumulate_relabeled(&self, graph: &Graph, sigma: &[usize], acc: &mut [f64]) {
        let n = graph.n();
        for t in &self.terms {
            if t.monomial.iter().all(|&(i, j)| graph.has_edge(sigma[i], sigma[j])) {
                acc[pair_index(n, sigma[t.target.0], sigma[t.target.1])] += t.coeff;
            }
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let ok = |&(i, j): &Edge| i != j && i >= 1 && j >= 1 && i <= n && j <= n;
        for t in &self.terms {
            if !ok(&t.target) || !t.monomial.iter().all(ok) {
                return Err(Error::param("terms", "edge outside the vertex range"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizeReport {
    pub trials: u64,
    pub permutations: usize,
    pub mse_original: f64,
    pub mse_original_stderr: f64,
    pub mse_symmetrized: f64,
    pub mse_symmetrized_stderr: f64,
    /// Paired `MSE(f) - MSE(g)`.
    pub difference: f64,
    pub difference_stderr: f64,
    /// `MSE(g)` on instances relabeled by one fixed permutation.
    pub mse_relabeled: f64,
    pub relabeled_difference: f64,
    pub relabeled_difference_stderr: f64,
    pub holds: bool,
}

/// Uniform permutation of `1..=n` fixing 1 and 2 (index 0 unused).
pub fn random_fixing_permutation(n: usize, rng: &mut WorkbenchRng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..=n).collect();
    perm[3..].shuffle(rng);
    perm
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Compares the error of `g` with that of its relabeling average
/// `f(G) = avg_sigma sigma^{-1} g(sigma G)` over permutations fixing 1 and 2.
pub fn symmetrize_check(
    g: &EdgePolynomial,
    params: &PspParams,
    trials: u64,
    seed: u64,
    permutations: usize,
) -> Result<SymmetrizeReport> {
    params.validate()?;
    g.validate(params.n)?;
    if trials < 2 || permutations == 0 {
        return Err(Error::param("trials", "need at least two trials and one permutation"));
    }
    let model = ModelParams::Psp(*params);
    let fixed = random_fixing_permutation(params.n, &mut rng::stream(seed, Stream::Oracle, 0));
    let rows: Vec<[f64; 3]> = crate::par::try_map_trials(trials, |t| {
        let ModelInstance::Psp(inst) = trial_instance(&model, seed, t, &TrialOptions::default())? else {
            unreachable!()
        };
        let x = inst.signal();
        let mse_g = squared_distance(&g.eval(&inst.graph), &x);

        let mut rng = rng::stream(seed, Stream::Permutation, t);
        let mut acc = vec![0.0; inst.graph.num_pairs()];
        for _ in 0..permutations {
            let sigma = random_fixing_permutation(params.n, &mut rng);
            g.accumulate_relabeled(&inst.graph, &sigma, &mut acc);
        }
        let inv = 1.0 / permutations as f64;
        acc.iter_mut().for_each(|v| *v *= inv);
        let mse_f = squared_distance(&acc, &x);

        let relabeled = inst.graph.permuted(&fixed);
        let path: Vec<usize> = inst.planted_path.iter().map(|&v| fixed[v]).collect();
        let mut x_rel = vec![0.0; x.len()];
        for w in path.windows(2) {
            x_rel[pair_index(params.n, w[0], w[1])] = 1.0;
        }
        let mse_rel = squared_distance(&g.eval(&relabeled), &x_rel);
        Ok([mse_g, mse_f, mse_rel])
    })?;
    let col = |c: usize| -> Vec<f64> { rows.iter().map(|r| r[c]).collect() };
    let diff = |a: usize, b: usize| -> MeanEstimate { mean_estimate(&rows.iter().map(|r| r[a] - r[b]).collect::<Vec<_>>()) };
    let (mg, mf, mr) = (mean_estimate(&col(0)), mean_estimate(&col(1)), mean_estimate(&col(2)));
    let d = diff(1, 0);
    let dr = diff(2, 0);
    // a tolerance at the rounding scale covers estimators that are already symmetric
    let tiny = 1e-12 * (1.0 + mg.mean.abs());
    Ok(SymmetrizeReport {
        trials,
        permutations,
        mse_original: mg.mean,
        mse_original_stderr: mg.stderr,
        mse_symmetrized: mf.mean,
        mse_symmetrized_stderr: mf.stderr,
        difference: d.mean,
        difference_stderr: d.stderr,
        mse_relabeled: mr.mean,
        relabeled_difference: dr.mean,
        relabeled_difference_stderr: dr.stderr,
        holds: d.mean <= 3.0 * d.stderr + tiny,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_fix_endpoints() {
        let mut rng = rng::from_seed(3);
        for _ in 0..20 {
            let p = random_fixing_permutation(7, &mut rng);
            assert_eq!(&p[..3], &[0, 1, 2]);
            let mut rest = p[3..].to_vec();
            rest.sort_unstable();
            assert_eq!(rest, vec![3, 4, 5, 6, 7]);
        }
    }

    #[test]
    fn relabeled_evaluation_matches_direct() {
        let g = EdgePolynomial {
            terms: vec![EdgeTerm {
                target: (3, 4),
                monomial: vec![(3, 4), (1, 3)],
                coeff: 2.0,
            }],
        };
        let graph = Graph::from_edges(5, &[(1, 5), (5, 4)]);
        let sigma = vec![0, 1, 2, 5, 4, 3];
        let mut acc = vec![0.0; graph.num_pairs()];
        g.accumulate_relabeled(&graph, &sigma, &mut acc);
        assert_eq!(acc[pair_index(5, 4, 5)], 2.0);
        assert_eq!(acc.iter().sum::<f64>(), 2.0);
    }
}
