//! Experiment configuration, runner and emitters behind the command-line
//! front end.

mod output;
mod run;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelParams;
use crate::stability;

pub use output::{render_csv, render_sidecar, render_svg, write_outputs, Sidecar, CSV_HEADER};
pub use run::{run, ResultRow, RunOutput};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    MmseCurve,
    Stability,
    Barrier,
    Solve,
    CountPaths,
    HermiteCheck,
    LowdegStability,
    PcaWindow,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::MmseCurve,
        Command::Stability,
        Command::Barrier,
        Command::Solve,
        Command::CountPaths,
        Command::HermiteCheck,
        Command::LowdegStability,
        Command::PcaWindow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::MmseCurve => "mmse-curve",
            Command::Stability => "stability",
            Command::Barrier => "barrier",
            Command::Solve => "solve",
            Command::CountPaths => "count-paths",
            Command::HermiteCheck => "hermite-check",
            Command::LowdegStability => "lowdeg-stability",
            Command::PcaWindow => "pca-window",
        }
    }

    fn needs_params(self) -> bool {
        !matches!(self, Command::CountPaths | Command::HermiteCheck)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingOptions {
    pub n: usize,
    pub m: usize,
    pub eps_m: usize,
    pub q: f64,
    /// Also count overlapping pairs in every sample.
    #[serde(default)]
    pub pairs: bool,
}

impl Default for CountingOptions {
    fn default() -> Self {
        CountingOptions {
            n: 12,
            m: 3,
            eps_m: 1,
            q: 0.25,
            pairs: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LowdegOptions {
    pub degree: usize,
    pub polynomials: usize,
    pub terms: usize,
    /// PSP patterns: maximum number of unlabelled vertices.
    pub max_free: usize,
}

impl Default for LowdegOptions {
    fn default() -> Self {
        LowdegOptions {
            degree: 2,
            polynomials: 5,
            terms: 4,
            max_free: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HermiteOptions {
    pub specs: usize,
    pub max_variables: usize,
    pub max_degree: u32,
}

impl Default for HermiteOptions {
    fn default() -> Self {
        HermiteOptions {
            specs: 10,
            max_variables: 3,
            max_degree: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowOptions {
    /// Signal strengths as multiples of `log C(n - k, k)`.
    pub factors: Vec<f64>,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions {
            factors: vec![0.5, 1.0, 2.0, 4.0],
        }
    }
}

fn default_rho_grid() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0]
}

fn default_trials() -> u64 {
    200
}

fn default_estimators() -> Vec<String> {
    vec!["posterior_mean".to_string()]
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub params: Option<ModelParams>,
    #[serde(default = "default_rho_grid")]
    pub rho_grid: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<String>,
    /// CSV path; the sidecar and chart are written next to it.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub deterministic: bool,
    #[serde(default)]
    pub full_rank_only: bool,
    #[serde(default)]
    pub svg: bool,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub counting: Option<CountingOptions>,
    #[serde(default)]
    pub lowdeg: LowdegOptions,
    #[serde(default)]
    pub hermite: HermiteOptions,
    #[serde(default)]
    pub window: WindowOptions,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            params: None,
            rho_grid: default_rho_grid(),
            trials: default_trials(),
            seed: 0,
            estimators: default_estimators(),
            output: None,
            deterministic: true,
            full_rank_only: false,
            svg: false,
            alpha: None,
            counting: None,
            lowdeg: LowdegOptions::default(),
            hermite: HermiteOptions::default(),
            window: WindowOptions::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::param("config", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::param("trials", "need at least one trial"));
        }
        if let Some(&r) = self.rho_grid.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::param("rho_grid", format!("entry {r} outside [0, 1]")));
        }
        if self.rho_grid.is_empty() && !matches!(self.command, Command::CountPaths | Command::HermiteCheck | Command::PcaWindow) {
            return Err(Error::param("rho_grid", "grid is empty"));
        }
        match (&self.params, self.command.needs_params()) {
            (None, true) => {
                return Err(Error::param("params", format!("`{}` needs model parameters", self.command.name())))
            }
            (Some(p), _) => p.validate()?,
            _ => {}
        }
        if matches!(self.command, Command::Stability | Command::Barrier) {
            if self.estimators.is_empty() {
                return Err(Error::param("estimators", "no estimator given"));
            }
            for name in &self.estimators {
                let est = stability::lookup(name)?;
                let kind = self.params.as_ref().map(|p| p.kind());
                if let Some(kind) = kind {
                    if !est.supports(kind) {
                        return Err(Error::Unsupported {
                            estimator: name.clone(),
                            model: kind.to_string(),
                        });
                    }
                }
            }
        }
        if self.command == Command::PcaWindow {
            if !matches!(self.params, Some(ModelParams::Tpca(_))) {
                return Err(Error::param("params", "`pca-window` needs tpca parameters"));
            }
            if self.window.factors.iter().any(|f| !(*f >= 0.0)) {
                return Err(Error::param("window.factors", "factors must be nonnegative"));
            }
        }
        if self.command == Command::LowdegStability {
            if matches!(self.params, Some(ModelParams::Tpca(_))) {
                return Err(Error::param("params", "`lowdeg-stability` supports psp, rlc and gss"));
            }
            if self.lowdeg.degree == 0 || self.lowdeg.polynomials == 0 || self.lowdeg.terms == 0 {
                return Err(Error::param("lowdeg", "degree, polynomials and terms must be positive"));
            }
        }
        if self.command == Command::HermiteCheck && (self.hermite.max_variables == 0 || self.hermite.max_degree == 0) {
            return Err(Error::param("hermite", "max_variables and max_degree must be positive"));
        }
        Ok(())
    }
}

/// Sets the worker count of the global thread pool. Has no effect without
/// the `parallel` feature. Fails if the pool was already started.
pub fn configure_threads(threads: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::param("threads", e.to_string()))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}
