//! Phi-divergence model-comparison tests.
//!
//! The CIR null is compared against BM, GBM and CKLS alternatives through
//! statistics of the form T = 2n * (1/n) sum_t phi(p_t(theta_alt) / p_t(theta_null)),
//! where p_t is the Gaussian Euler transition density of the respective
//! model. Under the null T is treated as chi-square; the default degrees of
//! freedom are 4, overridable per report.

use crate::calibrate::{fit_model, FitDiagnostics, FitResult, ModelFit, ModelKind};
use crate::error::{Error, Result};
use crate::sde::SeriesSample;
use crate::specfun::chi2_sf;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const LN_2PI: f64 = 1.8378770664093453;

/// Default degrees of freedom of the limiting chi-square.
pub const DEFAULT_DF: u32 = 4;

/// The three divergence generators. Each phi is convex on [0, inf) with
/// phi(1) = 0 and phi'(1) = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DivergenceKind {
    /// Kullback-Leibler: phi(x) = x (ln x - 1) + 1.
    Kl,
    /// Balakrishnan-Sanghvi: phi(x) = ((x-1)/(x+1))^2.
    Bs,
    /// Rathie-Kannappan: phi(x) = (sqrt(x) - 1)^2.
    Rk,
}

impl DivergenceKind {
    pub const ALL: [DivergenceKind; 3] =
        [DivergenceKind::Kl, DivergenceKind::Bs, DivergenceKind::Rk];

    pub fn name(&self) -> &'static str {
        match self {
            DivergenceKind::Kl => "KL",
            DivergenceKind::Bs => "BS",
            DivergenceKind::Rk => "RK",
        }
    }

    /// The generator phi evaluated at a likelihood ratio x >= 0.
    pub fn phi(&self, x: f64) -> f64 {
        match self {
            DivergenceKind::Kl => {
                if x == 0.0 {
                    1.0 // x ln x -> 0
                } else {
                    x * (x.ln() - 1.0) + 1.0
                }
            }
            DivergenceKind::Bs => {
                let r = (x - 1.0) / (x + 1.0);
                r * r
            }
            DivergenceKind::Rk => {
                let r = x.sqrt() - 1.0;
                r * r
            }
        }
    }
}

/// ln of the Gaussian Euler transition density of `kind` with parameters
/// `theta`: increment mean mu(theta, x_prev) dt, variance sigma^2(theta, x_prev) dt.
fn log_euler_transition(
    kind: ModelKind,
    theta: &[f64],
    x_prev: f64,
    x_next: f64,
    dt: f64,
) -> Result<f64> {
    let model = kind.model(theta)?;
    let var = model.diffusion_var(x_prev);
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::domain(format!(
            "{} transition has nonpositive variance at state {x_prev}",
            kind.name()
        )));
    }
    let s2 = var * dt;
    let r = x_next - x_prev - model.drift(x_prev) * dt;
    Ok(-0.5 * (LN_2PI + s2.ln() + r * r / s2))
}

/// Gaussian Euler transition density (positive; log-space internally).
pub fn euler_transition_density(
    kind: ModelKind,
    theta: &[f64],
    x_prev: f64,
    x_next: f64,
    dt: f64,
) -> Result<f64> {
    Ok(log_euler_transition(kind, theta, x_prev, x_next, dt)?.exp())
}

/// Empirical divergence D = (1/n) sum_t phi(p_t(alt) / p_t(null)) between a
/// fitted alternative and the CIR null on the same series.
pub fn empirical_divergence(
    series: &SeriesSample,
    alt_kind: ModelKind,
    theta_alt: &[f64],
    theta_null: &[f64],
    kind: DivergenceKind,
) -> Result<f64> {
    let n = series.values.len() - 1;
    if n == 0 {
        return Err(Error::invalid(
            "series too short for a divergence".to_string(),
        ));
    }
    let mut sum = 0.0;
    for w in series.values.windows(2) {
        let log_alt = log_euler_transition(alt_kind, theta_alt, w[0], w[1], series.dt)?;
        let log_null = log_euler_transition(ModelKind::Cir, theta_null, w[0], w[1], series.dt)?;
        sum += kind.phi((log_alt - log_null).exp());
    }
    Ok(sum / n as f64)
}

/// Outcome of one (alternative model, divergence kind) test cell.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DivergenceReport {
    pub alternative: ModelKind,
    pub kind: DivergenceKind,
    /// T = 2 n D_emp.
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub theta_null: Vec<f64>,
    pub theta_alt: Vec<f64>,
    pub alt_diagnostics: FitDiagnostics,
    /// False when the alternative fit did not converge; the statistic is
    /// reported anyway but should not be trusted.
    pub valid: bool,
}

impl DivergenceReport {
    /// Significance stars at the 0.05 / 0.01 / 0.001 levels.
    pub fn stars(&self) -> &'static str {
        significance_stars(self.p_value)
    }
}

pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Fit the alternative on the same series and run one divergence test
/// against the fitted CIR null. The CKLS alternative is warm-started from
/// the null triple (with elasticity 0.5, where it nests the null exactly).
pub fn run_test(
    series: &SeriesSample,
    null_fit: &FitResult,
    alternative: ModelKind,
    kind: DivergenceKind,
    df_override: Option<u32>,
) -> Result<DivergenceReport> {
    if alternative == ModelKind::Cir {
        return Err(Error::invalid(
            "the alternative must differ from the CIR null".to_string(),
        ));
    }
    let alt = fit_alternative(series, null_fit, alternative)?;
    run_test_with_alt(series, null_fit, &alt, kind, df_override)
}

fn fit_alternative(
    series: &SeriesSample,
    null_fit: &FitResult,
    alternative: ModelKind,
) -> Result<ModelFit> {
    let init = match alternative {
        ModelKind::Ckls => vec![
            null_fit.theta_hat.b,
            null_fit.theta_hat.alpha,
            null_fit.theta_hat.psi,
            0.5,
        ],
        _ => alternative.default_init(),
    };
    fit_model(series, alternative, &alternative.default_bounds(), &init)
}

fn run_test_with_alt(
    series: &SeriesSample,
    null_fit: &FitResult,
    alt: &ModelFit,
    kind: DivergenceKind,
    df_override: Option<u32>,
) -> Result<DivergenceReport> {
    let theta_null = vec![
        null_fit.theta_hat.b,
        null_fit.theta_hat.alpha,
        null_fit.theta_hat.psi,
    ];
    let n = series.values.len() - 1;
    let d_emp = empirical_divergence(series, alt.kind, &alt.theta, &theta_null, kind)?;
    let statistic = 2.0 * n as f64 * d_emp;
    let df = df_override.unwrap_or(DEFAULT_DF);
    let p_value = chi2_sf(statistic, df)?;
    Ok(DivergenceReport {
        alternative: alt.kind,
        kind,
        statistic,
        df,
        p_value,
        theta_null,
        theta_alt: alt.theta.clone(),
        alt_diagnostics: alt.diagnostics.clone(),
        valid: alt.diagnostics.converged,
    })
}

/// The full 3 alternatives x 3 kinds matrix. Each alternative is fitted
/// once; the nine cells evaluate in parallel when the `parallel` feature is
/// active. Per-cell failures are carried as `Err` entries without aborting
/// the rest.
pub fn run_matrix(
    series: &SeriesSample,
    null_fit: &FitResult,
    df_override: Option<u32>,
) -> Vec<Result<DivergenceReport>> {
    let alternatives = [ModelKind::Bm, ModelKind::Gbm, ModelKind::Ckls];
    let cells: Vec<(ModelKind, DivergenceKind)> = alternatives
        .iter()
        .flat_map(|&alt| DivergenceKind::ALL.iter().map(move |&k| (alt, k)))
        .collect();

    // one fit per alternative, shared across its three kinds
    let fit_for = |alt: ModelKind| fit_alternative(series, null_fit, alt);
    #[cfg(feature = "parallel")]
    let fits: Vec<(ModelKind, Result<ModelFit>)> =
        alternatives.par_iter().map(|&a| (a, fit_for(a))).collect();
    #[cfg(not(feature = "parallel"))]
    let fits: Vec<(ModelKind, Result<ModelFit>)> =
        alternatives.iter().map(|&a| (a, fit_for(a))).collect();

    let run_cell = |&(alt, kind): &(ModelKind, DivergenceKind)| -> Result<DivergenceReport> {
        let fit = fits
            .iter()
            .find(|(a, _)| *a == alt)
            .expect("every alternative was fitted");
        match &fit.1 {
            Ok(model_fit) => run_test_with_alt(series, null_fit, model_fit, kind, df_override),
            Err(e) => Err(e.clone()),
        }
    };
    #[cfg(feature = "parallel")]
    {
        cells.par_iter().map(run_cell).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        cells.iter().map(run_cell).collect()
    }
}
