//! WebAssembly bindings behind the static demo page in `www/`.

use mmse_workbench::bayes::{estimate_mmse_curve, tpca_overlap_distribution, TrialOptions};
use mmse_workbench::lowdeg::{diagram_expectation, DiagramSpec};
use mmse_workbench::models::sample_tpca;
use mmse_workbench::rng::{derive_seed, Stream};
use mmse_workbench::stats::binomial;
use mmse_workbench::{ModelParams, RlcParams, TpcaParams};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// NMMSE of the RLC posterior mean over an evenly spaced noise grid, as JSON
/// rows `{rho, nmmse, stderr}`.
pub fn rlc_curve_json(m: usize, n: usize, points: usize, trials: u64, seed: u64, full_rank: bool) -> Result<String, String> {
    let params = ModelParams::Rlc(RlcParams::new(m, n).map_err(|e| e.to_string())?);
    let points = points.max(2);
    let grid: Vec<f64> = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
    let opts = TrialOptions { full_rank_only: full_rank };
    let curve = estimate_mmse_curve(&params, &grid, trials, seed, &opts).map_err(|e| e.to_string())?;
    let rows: Vec<_> = curve
        .iter()
        .map(|r| json!({"rho": r.rho, "nmmse": r.nmmse_hat, "stderr": r.stderr / r.signal_norm}))
        .collect();
    Ok(serde_json::Value::from(rows).to_string())
}

/// Mean posterior mass on the planted support for `lambda = f log C(n-k, k)`
/// at each factor `f`, as JSON rows `{factor, lambda, mass, above_half}`.
pub fn tpca_window_json(n: usize, k: usize, factors: &[f64], trials: u64, seed: u64) -> Result<String, String> {
    let base = TpcaParams::new(n, k, 3, 0.0).map_err(|e| e.to_string())?;
    let unit = (binomial((n - k) as u64, k as u64) as f64).ln();
    let mut rows = Vec::new();
    for &f in factors {
        let p = base.with_lambda(f * unit);
        let (mut mass, mut above) = (0.0, 0.0);
        for t in 0..trials {
            let inst = sample_tpca(&p, derive_seed(seed, Stream::Instance, t)).map_err(|e| e.to_string())?;
            let pk = tpca_overlap_distribution(&inst.y, &inst.support, &p).map_err(|e| e.to_string())?[k];
            mass += pk;
            above += (pk > 0.5) as u8 as f64;
        }
        let t = trials.max(1) as f64;
        rows.push(json!({"factor": f, "lambda": p.lambda, "mass": mass / t, "above_half": above / t}));
    }
    Ok(serde_json::Value::from(rows).to_string())
}

/// Closed-form Hermite expectation for a JSON `{alpha, R, mu}` spec.
pub fn diagram_value(spec_json: &str) -> Result<f64, String> {
    let spec: DiagramSpec = serde_json::from_str(spec_json).map_err(|e| e.to_string())?;
    diagram_expectation(&spec).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = rlcCurve)]
pub fn rlc_curve(m: usize, n: usize, points: usize, trials: u32, seed: u32, full_rank: bool) -> Result<String, JsValue> {
    rlc_curve_json(m, n, points, trials as u64, seed as u64, full_rank).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = tpcaWindow)]
pub fn tpca_window(n: usize, k: usize, factors: Vec<f64>, trials: u32, seed: u32) -> Result<String, JsValue> {
    tpca_window_json(n, k, &factors, trials as u64, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = diagramExpectation)]
pub fn diagram(spec_json: &str) -> Result<f64, JsValue> {
    diagram_value(spec_json).map_err(|e| JsValue::from_str(&e))
}
