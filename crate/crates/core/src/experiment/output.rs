use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ResultRow, RunOutput};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "model,params_json,rho,trials,metric,value,stderr";

/// JSON record written next to the CSV so a run can be reproduced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
}

pub fn render_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(','))
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    for r in rows {
        let rho = r.rho.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            r.model.as_str(),
            r.params_json.as_str(),
            rho.as_str(),
            &r.trials.to_string(),
            r.metric.as_str(),
            &r.value.to_string(),
            &r.stderr.to_string(),
        ])
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render_sidecar(config: &ExperimentConfig, output: &RunOutput) -> Result<String> {
    let sidecar = Sidecar {
        config: config.clone(),
        rows: output.rows.clone(),
    };
    Ok(serde_json::to_string_pretty(&sidecar)?)
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line chart of `metric` against rho, one polyline per parameter set.
/// Defaults to `nmmse`; falls back to the first metric that has a rho.
pub fn render_svg(rows: &[ResultRow]) -> String {
    let metric = if rows.iter().any(|r| r.metric == "nmmse") {
        Some("nmmse".to_string())
    } else {
        rows.iter().find(|r| r.rho.is_some()).map(|r| r.metric.clone())
    };
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    if let Some(metric) = &metric {
        for r in rows.iter().filter(|r| &r.metric == metric && r.value.is_finite()) {
            let Some(rho) = r.rho else { continue };
            let label = format!("{} {}", r.model, r.params_json);
            match series.iter_mut().find(|s| s.0 == label) {
                Some(s) => s.1.push((rho, r.value)),
                None => series.push((label, vec![(rho, r.value)])),
            }
        }
    }
    let ymax = series
        .iter()
        .flat_map(|s| s.1.iter().map(|p| p.1))
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let sx = |x: f64| pad + x * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - y / ymax * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{pad} {pad} V{} H{}" stroke="black" fill="none"/>"#,
        h - pad,
        w - pad
    );
    for t in [0.0, 0.5, 1.0] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{t}</text>"#, sx(t), h - pad + 16.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{:.3}</text>"#, pad - 4.0, sy(t * ymax) + 4.0, t * ymax);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">rho</text>"#, w / 2.0, h - 10.0);
    if let Some(metric) = &metric {
        let _ = writeln!(s, r#"<text x="{}" y="20" font-size="13" text-anchor="middle">{}</text>"#, w / 2.0, escape(metric));
    }
    for (i, (label, pts)) in series.iter().enumerate() {
        let mut pts = pts.clone();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="2"/>"#, coords.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
            pad + 8.0,
            pad + 14.0 * (i as f64 + 1.0),
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

/// Writes the CSV to `path`, plus a `.json` sidecar and, if requested, an
/// `.svg` chart beside it. Returns the paths written.
pub fn write_outputs(config: &ExperimentConfig, output: &RunOutput, path: &Path) -> Result<Vec<PathBuf>> {
    fs::write(path, render_csv(&output.rows)?)?;
    let json = sibling(path, "json");
    fs::write(&json, render_sidecar(config, output)?)?;
    let mut written = vec![path.to_path_buf(), json];
    if config.svg {
        let svg = sibling(path, "svg");
        fs::write(&svg, render_svg(&output.rows))?;
        written.push(svg);
    }
    Ok(written)
}
