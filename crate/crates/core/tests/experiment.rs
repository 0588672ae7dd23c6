//! Runner and counting behaviour through the public API.

use mmse_workbench::counting::{count_approx_paths, count_overlap_pairs, expected_count, first_moment_check};
use mmse_workbench::experiment::{render_csv, render_sidecar, run, Command, ExperimentConfig, Sidecar, CSV_HEADER};
use mmse_workbench::models::{for_each_path, path_count, path_edges, sample_erdos_renyi, Graph};
use mmse_workbench::{Error, ModelParams, RlcParams, TpcaParams};

fn config(command: Command, params: Option<&str>) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(command);
    c.params = params.map(|p| serde_json::from_str(p).unwrap());
    c.trials = 30;
    c.seed = 4;
    c
}

#[test]
fn every_command_produces_rows() {
    let cases = [
        (Command::MmseCurve, Some(r#"{"model":"psp","n":6,"L":2,"q":0.3}"#)),
        (Command::Stability, Some(r#"{"model":"rlc","m":5,"n":3}"#)),
        (Command::Barrier, Some(r#"{"model":"tpca","n":5,"k":2,"d":3,"lambda":2}"#)),
        (Command::Solve, Some(r#"{"model":"gss","N":8,"k":2}"#)),
        (Command::CountPaths, None),
        (Command::HermiteCheck, None),
        (Command::LowdegStability, Some(r#"{"model":"psp","n":7,"L":5,"q":0.4}"#)),
        (Command::PcaWindow, Some(r#"{"model":"tpca","n":5,"k":2,"d":3,"lambda":0}"#)),
    ];
    for (command, params) in cases {
        let mut c = config(command, params);
        if command == Command::LowdegStability {
            c.trials = 3000;
        }
        let out = run(&c).unwrap_or_else(|e| panic!("{}: {e}", command.name()));
        assert!(!out.rows.is_empty(), "{}", command.name());
        assert!(out.rows.iter().all(|r| r.value.is_finite() && r.stderr.is_finite()), "{}", command.name());
        let csv = render_csv(&out.rows).unwrap();
        assert_eq!(csv.lines().next(), Some(CSV_HEADER));
        assert_eq!(csv.lines().count(), out.rows.len() + 1);
    }
}

#[test]
fn solve_recovers_at_zero_noise() {
    let mut c = config(Command::Solve, Some(r#"{"model":"rlc","m":12,"n":4}"#));
    c.rho_grid = vec![0.0];
    c.full_rank_only = true;
    let out = run(&c).unwrap();
    let rate = out.rows.iter().find(|r| r.metric == "recovery_rate").unwrap();
    assert_eq!(rate.value, 1.0);
}

#[test]
fn invalid_configs_name_the_field() {
    let mut c = config(Command::MmseCurve, Some(r#"{"model":"rlc","m":5,"n":3}"#));
    c.rho_grid = vec![0.2, -0.1];
    assert!(matches!(run(&c), Err(Error::Param { field: "rho_grid", .. })));
    c.rho_grid = vec![0.5];
    c.trials = 0;
    assert!(matches!(run(&c), Err(Error::Param { field: "trials", .. })));
    let c = config(Command::MmseCurve, None);
    assert!(matches!(run(&c), Err(Error::Param { field: "params", .. })));
    let c = config(Command::PcaWindow, Some(r#"{"model":"rlc","m":5,"n":3}"#));
    assert!(run(&c).unwrap_err().is_usage());
    let mut c = config(Command::Stability, Some(r#"{"model":"gss","N":6,"k":2}"#));
    c.estimators = vec!["f2_round".into()];
    assert!(matches!(run(&c), Err(Error::Unsupported { .. })));
    c.estimators = vec!["oracle".into()];
    let err = run(&c).unwrap_err();
    assert!(matches!(err, Error::UnknownEstimator { .. }));
    assert!(err.to_string().contains("shortest_path_indicator"));
}

#[test]
fn config_json_defaults_and_round_trip() {
    let c = ExperimentConfig::from_json(r#"{"command":"mmse-curve","params":{"model":"gss","N":8,"k":2}}"#).unwrap();
    assert_eq!(c.rho_grid, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    assert!(c.deterministic);
    assert_eq!(c.estimators, vec!["posterior_mean".to_string()]);
    let out = run(&ExperimentConfig { trials: 5, ..c.clone() }).unwrap();
    let back: Sidecar = serde_json::from_str(&render_sidecar(&c, &out).unwrap()).unwrap();
    assert_eq!(back.config, c);
    assert!(ExperimentConfig::from_json(r#"{"command":"fly"}"#).unwrap_err().is_usage());
}

#[cfg(feature = "parallel")]
#[test]
fn results_do_not_depend_on_thread_count() {
    let c = config(Command::Stability, Some(r#"{"model":"gss","N":9,"k":3}"#));
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run(&c).unwrap());
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| run(&c).unwrap());
    assert_eq!(render_csv(&one.rows).unwrap(), render_csv(&four.rows).unwrap());
}

#[test]
fn rlc_curve_endpoints_through_runner() {
    let mut c = config(Command::MmseCurve, Some(r#"{"model":"rlc","m":10,"n":6}"#));
    c.rho_grid = vec![0.0, 1.0];
    c.full_rank_only = true;
    let out = run(&c).unwrap();
    let nmmse: Vec<f64> = out.rows.iter().filter(|r| r.metric == "nmmse").map(|r| r.value).collect();
    assert_eq!(nmmse, vec![0.0, 0.5]);
    assert_eq!(ModelParams::Rlc(RlcParams::new(10, 6).unwrap()).signal_norm(), 3.0);
}

#[test]
fn pca_window_scales_lambda() {
    let c = config(Command::PcaWindow, Some(r#"{"model":"tpca","n":6,"k":2,"d":3,"lambda":0}"#));
    let out = run(&c).unwrap();
    let lambdas: Vec<f64> = out
        .rows
        .iter()
        .filter(|r| r.metric == "planted_overlap_mass")
        .map(|r| serde_json::from_str::<TpcaParams>(&r.params_json).unwrap().lambda)
        .collect();
    let unit = 6f64.ln();
    for (l, f) in lambdas.iter().zip([0.5, 1.0, 2.0, 4.0]) {
        assert!((l - f * unit).abs() < 1e-12);
    }
}

/// Approximate paths by explicit subsets of each path's edges.
fn count_oracle(g: &Graph, m: usize, eps: usize) -> u128 {
    let mut total = 0;
    for_each_path(g.n(), m, |p| {
        let edges = path_edges(p);
        for mask in 0u32..1 << m {
            if mask.count_ones() as usize == m - eps
                && (0..m).filter(|&i| mask >> i & 1 == 1).all(|i| g.has_edge(edges[i].0, edges[i].1))
            {
                total += 1;
            }
        }
    });
    total
}

#[test]
fn approximate_path_counts_match_subset_oracle() {
    for seed in 0..20 {
        let g = sample_erdos_renyi(8, 0.4, seed).unwrap();
        for (m, eps) in [(2, 0), (3, 1), (4, 2), (3, 3)] {
            assert_eq!(count_approx_paths(&g, m, eps).unwrap(), count_oracle(&g, m, eps));
        }
    }
}

#[test]
fn counting_extremes() {
    let empty = Graph::empty(7);
    assert_eq!(count_approx_paths(&empty, 3, 0).unwrap(), 0);
    assert_eq!(count_approx_paths(&empty, 3, 3).unwrap(), path_count(7, 3));
    assert_eq!(expected_count(5, 2, 1, 0.5), 3.0);
    assert_eq!(expected_count(8, 3, 1, 1.0), (6 * 5 * 3) as f64);
    assert_eq!(expected_count(8, 3, 1, 0.0), 0.0);
}

#[test]
fn overlap_histogram_totals() {
    // every ordered pair of approximate paths lands in exactly one bin
    let g = sample_erdos_renyi(7, 0.5, 3).unwrap();
    let (m, eps) = (3, 1);
    let n = count_approx_paths(&g, m, eps).unwrap();
    let o = count_overlap_pairs(&g, m, eps).unwrap();
    assert_eq!(o.histogram.len(), m + 1);
    assert_eq!(o.histogram.iter().sum::<u128>(), n * n);
    assert_eq!(o.pair_count, n * n - o.histogram[0]);
}

#[test]
fn second_moment_dominates_squared_mean() {
    let r = first_moment_check(9, 3, 1, 0.3, 500, 2, true).unwrap();
    assert!(r.second_moment >= r.mean * r.mean);
    assert!(r.pair_ratio.unwrap() > 0.0);
}
