//! JSON report and manifest schemas. Every command writes a manifest with
//! the fully resolved configuration; re-running from that manifest
//! reproduces the outputs byte-for-byte.

use bubblekit::calibrate::FitResult;
use bubblekit::divergence::DivergenceReport;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Resolved configuration of `simulate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub schema_version: u32,
    pub command: String,
    pub model: String,
    pub alpha: Option<f64>,
    pub gamma_star: Option<f64>,
    pub b: Option<f64>,
    pub psi: f64,
    pub elasticity: Option<f64>,
    pub earnings: f64,
    pub p0: f64,
    pub n: usize,
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
    pub scheme: String,
}

/// Resolved configuration of `analyze`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    pub schema_version: u32,
    pub command: String,
    pub alpha: f64,
    pub gamma_star: f64,
    pub earnings: f64,
    pub p0: f64,
    pub psi_grid: Vec<f64>,
    pub p0_grid: Vec<f64>,
    /// Mean-reversion strengths for the duration sweep (defaults to [alpha]).
    pub alpha_grid: Vec<f64>,
    pub t_max: f64,
    pub t_points: usize,
}

/// Resolved configuration of `calibrate` / `test`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitConfig {
    pub schema_version: u32,
    pub command: String,
    pub input: String,
    pub gamma0: f64,
    pub window_start: Option<String>,
    pub window_end: Option<String>,
    pub dt: f64,
    #[serde(default)]
    pub df_override: Option<u32>,
}

#[derive(Debug, Serialize)]
pub struct CalibrateReport {
    pub schema_version: u32,
    pub config: FitConfig,
    pub earnings: f64,
    pub n_observations: usize,
    pub window: (String, String),
    pub two_loglik: f64,
    pub fit: FitResult,
    pub regime: String,
}

#[derive(Debug, Serialize)]
pub struct TestCell {
    pub alternative: String,
    pub kind: String,
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub stars: String,
    pub theta_alt: Vec<f64>,
    pub valid: bool,
    /// Present when the cell failed outright.
    pub error: Option<String>,
}

impl TestCell {
    pub fn from_report(r: &DivergenceReport) -> Self {
        TestCell {
            alternative: match r.alternative {
                bubblekit::calibrate::ModelKind::Cir => "CIR",
                bubblekit::calibrate::ModelKind::Bm => "BM",
                bubblekit::calibrate::ModelKind::Gbm => "GBM",
                bubblekit::calibrate::ModelKind::Ckls => "CKLS",
            }
            .to_string(),
            kind: r.kind.name().to_string(),
            statistic: r.statistic,
            df: r.df,
            p_value: r.p_value,
            stars: r.stars().to_string(),
            theta_alt: r.theta_alt.clone(),
            valid: r.valid,
            error: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub config: FitConfig,
    pub earnings: f64,
    pub n_observations: usize,
    pub null_fit: FitResult,
    pub cells: Vec<TestCell>,
}
