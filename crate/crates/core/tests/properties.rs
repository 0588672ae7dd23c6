//! Sampling, noise and estimator invariants.

use mmse_workbench::bayes::{estimate_mmse_curve, TrialOptions};
use mmse_workbench::gf2::F2Vector;
use mmse_workbench::models::{sample_gss, sample_psp, sample_rlc, sample_tpca, Graph, Tensor};
use mmse_workbench::noise::{noise_gss, noise_psp, noise_rlc, noise_tpca};
use mmse_workbench::rng::{derive_seed, Stream};
use mmse_workbench::solvers::f2_solve;
use mmse_workbench::stability::{lookup, measure_stability, PosteriorMeanEstimator, ScaledEstimator, ESTIMATOR_NAMES};
use mmse_workbench::stats::{log_sum_exp, mean_estimate};
use mmse_workbench::{GssParams, ModelParams, PspParams, RlcParams, TpcaParams};
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = ModelParams> {
    prop_oneof![
        (4usize..9, 0.05f64..0.9).prop_flat_map(|(n, q)| (2..n).prop_map(move |l| ModelParams::Psp(PspParams::new(n, l, q).unwrap()))),
        (1usize..8, 0usize..6).prop_map(|(n, extra)| ModelParams::Rlc(RlcParams::new(n + extra, n).unwrap())),
        (2usize..12).prop_flat_map(|n| (1..=n).prop_map(move |k| ModelParams::Gss(GssParams::new(n, k).unwrap()))),
        (2usize..6, 0.0f64..5.0).prop_map(|(n, l)| ModelParams::Tpca(TpcaParams::new(n, 1 + n / 3, 3, l).unwrap())),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampling_is_deterministic(params in model_strategy(), seed in any::<u64>()) {
        prop_assert_eq!(params.sample(seed).unwrap(), params.sample(seed).unwrap());
    }

    #[test]
    fn planted_path_is_present(seed in any::<u64>(), q in 0.0f64..1.0) {
        let inst = sample_psp(&PspParams::new(9, 4, q).unwrap(), seed).unwrap();
        prop_assert_eq!(inst.planted_path.first(), Some(&1));
        prop_assert_eq!(inst.planted_path.last(), Some(&2));
        for (i, j) in inst.path_edges() {
            prop_assert!(inst.graph.has_edge(i, j));
        }
    }

    #[test]
    fn rlc_parity_holds(n in 1usize..12, extra in 0usize..6, seed in any::<u64>()) {
        let m = n + extra;
        let inst = sample_rlc(&RlcParams::new(m, n).unwrap(), seed).unwrap();
        for i in 0..m {
            prop_assert_eq!(inst.y.get(i), inst.a.row(i).dot(&inst.x));
        }
    }

    #[test]
    fn zero_noise_is_identity(seed in any::<u64>(), bits in prop::collection::vec(any::<bool>(), 1..40), y in -10.0f64..10.0) {
        let g = Graph::from_edges(5, &[(1, 3), (2, 4), (4, 5)]);
        prop_assert_eq!(noise_psp(&g, 0.3, 0.0, seed).unwrap(), g);
        let v = F2Vector::from_bits(&bits);
        prop_assert_eq!(noise_rlc(&v, 0.0, seed).unwrap(), v);
        prop_assert_eq!(noise_gss(y, 0.0, seed).unwrap().to_bits(), y.to_bits());
        let mut t = Tensor::zeros(3, 2);
        t.data.iter_mut().enumerate().for_each(|(i, x)| *x = y * i as f64);
        prop_assert_eq!(noise_tpca(&t, 0.0, seed).unwrap(), t);
    }

    #[test]
    fn noise_replays_with_the_same_seed(seed in any::<u64>(), rho in 0.0f64..=1.0) {
        let inst = sample_psp(&PspParams::new(8, 3, 0.3).unwrap(), seed).unwrap();
        prop_assert_eq!(noise_psp(&inst.graph, 0.3, rho, seed).unwrap(), noise_psp(&inst.graph, 0.3, rho, seed).unwrap());
        prop_assert_eq!(noise_gss(1.5, rho, seed).unwrap().to_bits(), noise_gss(1.5, rho, seed).unwrap().to_bits());
    }

    #[test]
    fn log_sum_exp_shift(values in prop::collection::vec(-700.0f64..700.0, 1..30), c in -300.0f64..300.0) {
        let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
        let (a, b) = (log_sum_exp(&values) + c, log_sum_exp(&shifted));
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }
}

#[test]
fn stream_labels_separate_seeds() {
    for t in 0..1000 {
        assert_ne!(derive_seed(5, Stream::Instance, t), derive_seed(5, Stream::Noise, t));
        assert_ne!(derive_seed(5, Stream::Instance, t), derive_seed(6, Stream::Instance, t));
    }
}

#[test]
fn non_path_edge_frequency_matches_q() {
    let params = PspParams::new(10, 3, 0.3).unwrap();
    let mut hits = Vec::new();
    for s in 0..3000 {
        let inst = sample_psp(&params, s).unwrap();
        let on_path = inst.path_edges();
        for (i, j) in [(3, 4), (5, 9), (1, 2), (7, 10)] {
            if !on_path.contains(&(i, j)) {
                hits.push(inst.graph.has_edge(i, j) as u8 as f64);
            }
        }
    }
    let m = mean_estimate(&hits);
    assert!((m.mean - 0.3).abs() <= 3.0 * m.stderr, "{} +- {}", m.mean, m.stderr);
}

fn assert_standard_normal(samples: &[f64]) {
    let m = mean_estimate(samples);
    assert!(m.mean.abs() <= 3.0 * m.stderr, "mean {}", m.mean);
    let sq: Vec<f64> = samples.iter().map(|x| x * x).collect();
    let v = mean_estimate(&sq);
    assert!((v.mean - 1.0).abs() <= 3.0 * v.stderr, "second moment {}", v.mean);
}

#[test]
fn gaussian_components_are_standard() {
    let p = GssParams::new(10, 3).unwrap();
    let xs: Vec<f64> = (0..10_000).flat_map(|s| sample_gss(&p, s).unwrap().x).collect();
    assert_standard_normal(&xs);

    // entries outside the planted cube are pure noise
    let p = TpcaParams::new(5, 2, 3, 2.0).unwrap();
    let mut noise = Vec::new();
    for s in 0..1000 {
        let inst = sample_tpca(&p, s).unwrap();
        let planted: Vec<usize> = inst.y.cube_indices(&inst.support);
        noise.extend(inst.y.data.iter().enumerate().filter(|(i, _)| !planted.contains(i)).map(|(_, v)| *v));
    }
    assert!(noise.len() >= 100_000);
    assert_standard_normal(&noise);
}

#[test]
fn ou_semigroup() {
    let (r1, r2) = (0.4, 0.7);
    let r3 = ((r1 * r1) + (r2 * r2) - (r1 * r1 * r2 * r2) as f64).sqrt();
    let y0 = 1.3;
    let n = 100_000u64;
    let twice: Vec<f64> = (0..n)
        .map(|t| {
            let a = noise_gss(y0, r1, derive_seed(1, Stream::Noise, t)).unwrap();
            noise_gss(a, r2, derive_seed(2, Stream::Noise, t)).unwrap()
        })
        .collect();
    let once: Vec<f64> = (0..n).map(|t| noise_gss(y0, r3, derive_seed(3, Stream::Noise, t)).unwrap()).collect();
    for power in [1, 2] {
        let a = mean_estimate(&twice.iter().map(|v| v.powi(power)).collect::<Vec<_>>());
        let b = mean_estimate(&once.iter().map(|v| v.powi(power)).collect::<Vec<_>>());
        let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() <= 3.0 * se, "moment {power}: {} vs {}", a.mean, b.mean);
    }
}

#[test]
fn full_rank_frequency_respects_bound() {
    let (m, n) = (10, 6);
    let p = RlcParams::new(m, n).unwrap();
    let full: Vec<f64> = (0..3000)
        .map(|s| {
            let inst = sample_rlc(&p, s).unwrap();
            (f2_solve(&inst.a, &inst.y).unwrap().rank == n) as u8 as f64
        })
        .collect();
    let f = mean_estimate(&full);
    let bound = 1.0 - 2f64.powi(n as i32 - m as i32);
    assert!(f.mean >= bound - 3.0 * f.stderr, "{} < {bound}", f.mean);
}

#[test]
fn posterior_mean_is_bayes_optimal() {
    let opts = TrialOptions::default();
    let configs = [
        ModelParams::Psp(PspParams::new(7, 3, 0.3).unwrap()),
        ModelParams::Rlc(RlcParams::new(6, 4).unwrap()),
        ModelParams::Gss(GssParams::new(10, 3).unwrap()),
        ModelParams::Tpca(TpcaParams::new(6, 2, 3, 2.0).unwrap()),
    ];
    for params in configs {
        let mmse = &estimate_mmse_curve(&params, &[0.0], 1500, 4, &opts).unwrap()[0];
        for name in ESTIMATOR_NAMES {
            let est = lookup(name).unwrap();
            if !est.supports(params.kind()) {
                continue;
            }
            let r = measure_stability(est.as_ref(), &params, 0.0, 1500, 4, &opts).unwrap();
            let se = (r.mse_stderr.powi(2) + mmse.stderr.powi(2)).sqrt();
            assert!(mmse.mmse_hat <= r.mse_hat + 3.0 * se, "{} {name}: {} > {}", params.kind(), mmse.mmse_hat, r.mse_hat);
        }
    }
}

#[test]
fn nishimori_identity() {
    let opts = TrialOptions::default();
    let configs = [
        ModelParams::Psp(PspParams::new(8, 3, 0.3).unwrap()),
        ModelParams::Rlc(RlcParams::new(8, 4).unwrap()),
        ModelParams::Gss(GssParams::new(10, 3).unwrap()),
    ];
    for params in configs {
        for r in estimate_mmse_curve(&params, &[0.3, 0.7], 2000, 5, &opts).unwrap() {
            let se = (r.posterior_norm_stderr.powi(2) + r.overlap_stderr.powi(2)).sqrt();
            assert!((r.posterior_norm_hat - r.overlap_hat).abs() <= 3.0 * se, "{} rho {}", params.kind(), r.rho);
        }
    }
}

#[test]
fn scaled_estimator_is_equivariant() {
    let params = ModelParams::Rlc(RlcParams::new(8, 5).unwrap());
    let opts = TrialOptions::default();
    let base = measure_stability(&PosteriorMeanEstimator, &params, 0.4, 300, 6, &opts).unwrap();
    let scaled = measure_stability(&ScaledEstimator::new(PosteriorMeanEstimator, 4.0), &params, 0.4, 300, 6, &opts).unwrap();
    assert_eq!(scaled.estimator_norm_hat, 16.0 * base.estimator_norm_hat);
    assert_eq!(scaled.eta_hat, base.eta_hat);
    let odd = measure_stability(&ScaledEstimator::new(PosteriorMeanEstimator, 3.0), &params, 0.4, 300, 6, &opts).unwrap();
    assert!((odd.estimator_norm_hat - 9.0 * base.estimator_norm_hat).abs() < 1e-12 * odd.estimator_norm_hat);
    assert!((odd.eta_hat - base.eta_hat).abs() < 1e-12);
}

#[test]
fn posterior_mean_stability_grows_with_rho() {
    let params = ModelParams::Gss(GssParams::new(10, 3).unwrap());
    let opts = TrialOptions::default();
    let etas: Vec<_> = [0.1, 0.4, 0.8]
        .iter()
        .map(|&rho| measure_stability(&PosteriorMeanEstimator, &params, rho, 1500, 7, &opts).unwrap())
        .collect();
    for w in etas.windows(2) {
        let se = (w[0].eta_stderr.powi(2) + w[1].eta_stderr.powi(2)).sqrt();
        assert!(w[1].eta_hat >= w[0].eta_hat - 3.0 * se);
    }
}
