//! Quasi-maximum-likelihood calibration of yield dynamics.
//!
//! The objective is the exact Gaussian log-density of the Euler-discretized
//! transition: the increment over one step dt has mean mu(theta, x) dt and
//! variance sigma^2(theta, x) dt, so
//!
//! ```text
//! loglik = -1/2 sum_t [ ln(2 pi) + ln(sigma^2_t dt) + r_t^2 / (sigma^2_t dt) ]
//! r_t = dx_t - mu(theta, x_{t-1}) dt
//! ```
//!
//! including the additive constants (that is the fixed convention here;
//! reported values are comparable only under the same convention). The
//! optimizer is the in-crate projected quasi-Newton method with the box
//! bounds and starting point of the reference setup: bounds [0, 100]^3 and
//! init (0.01, 0.01, 0.01) for the CIR fit.

use crate::error::{Error, Result};
use crate::model::{classify_regime, Regime, YieldParams};
use crate::optim::{maximize, Bounds, Options};
use crate::sde::{SeriesSample, YieldModel};

const LN_2PI: f64 = 1.8378770664093453;

/// Minimum number of observations for a fit.
pub const MIN_SERIES_LEN: usize = 30;

/// Which parametric family to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ModelKind {
    Cir,
    Bm,
    Gbm,
    Ckls,
}

impl ModelKind {
    pub fn n_params(&self) -> usize {
        match self {
            ModelKind::Cir => 3,
            ModelKind::Bm | ModelKind::Gbm => 2,
            ModelKind::Ckls => 4,
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            ModelKind::Cir => &["b", "alpha", "psi"],
            ModelKind::Bm => &["b", "psi"],
            ModelKind::Gbm => &["alpha", "psi"],
            ModelKind::Ckls => &["b", "alpha", "psi", "v"],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Cir => "CIR",
            ModelKind::Bm => "BM",
            ModelKind::Gbm => "GBM",
            ModelKind::Ckls => "CKLS",
        }
    }

    /// Build the dynamics from a packed parameter vector.
    pub fn model(&self, theta: &[f64]) -> Result<YieldModel> {
        if theta.len() != self.n_params() {
            return Err(Error::invalid(format!(
                "{} expects {} parameters, got {}",
                self.name(),
                self.n_params(),
                theta.len()
            )));
        }
        Ok(match self {
            ModelKind::Cir => YieldModel::Cir {
                b: theta[0],
                alpha: theta[1],
                psi: theta[2],
            },
            ModelKind::Bm => YieldModel::Bm {
                b: theta[0],
                psi: theta[1],
            },
            ModelKind::Gbm => YieldModel::Gbm {
                alpha: theta[0],
                psi: theta[1],
            },
            ModelKind::Ckls => YieldModel::Ckls {
                b: theta[0],
                alpha: theta[1],
                psi: theta[2],
                v: theta[3],
            },
        })
    }

    /// Reference box bounds. CIR and CKLS drift/diffusion parameters live in
    /// [0, 100]; BM and GBM drifts may be negative; the CKLS elasticity is
    /// confined to (0, 1.5].
    pub fn default_bounds(&self) -> Bounds {
        match self {
            ModelKind::Cir => {
                Bounds::new(vec![0.0, 0.0, 0.0], vec![100.0, 100.0, 100.0]).expect("static bounds")
            }
            ModelKind::Bm => {
                Bounds::new(vec![-100.0, 0.0], vec![100.0, 100.0]).expect("static bounds")
            }
            ModelKind::Gbm => {
                Bounds::new(vec![-100.0, 0.0], vec![100.0, 100.0]).expect("static bounds")
            }
            ModelKind::Ckls => {
                Bounds::new(vec![0.0, 0.0, 0.0, 1e-3], vec![100.0, 100.0, 100.0, 1.5])
                    .expect("static bounds")
            }
        }
    }

    /// Reference starting point: 0.01 in every coordinate, elasticity 0.5.
    pub fn default_init(&self) -> Vec<f64> {
        match self {
            ModelKind::Cir => vec![0.01, 0.01, 0.01],
            ModelKind::Bm | ModelKind::Gbm => vec![0.01, 0.01],
            ModelKind::Ckls => vec![0.01, 0.01, 0.01, 0.5],
        }
    }

    /// Drift and its gradient in theta at state x.
    fn drift_and_grad(&self, theta: &[f64], x: f64, grad: &mut [f64]) -> f64 {
        match self {
            ModelKind::Cir | ModelKind::Ckls => {
                grad[0] = 1.0;
                grad[1] = -x;
                theta[0] - theta[1] * x
            }
            ModelKind::Bm => {
                grad[0] = 1.0;
                theta[0]
            }
            ModelKind::Gbm => {
                grad[0] = -x;
                -theta[0] * x
            }
        }
    }

    /// Squared diffusion and its gradient in theta at state x.
    fn diffusion_var_and_grad(&self, theta: &[f64], x: f64, grad: &mut [f64]) -> f64 {
        match self {
            ModelKind::Cir => {
                let psi = theta[2];
                grad[2] = 2.0 * psi * x;
                psi * psi * x
            }
            ModelKind::Bm => {
                let psi = theta[1];
                grad[1] = 2.0 * psi;
                psi * psi
            }
            ModelKind::Gbm => {
                let psi = theta[1];
                grad[1] = 2.0 * psi * x * x;
                psi * psi * x * x
            }
            ModelKind::Ckls => {
                let (psi, v) = (theta[2], theta[3]);
                let pw = x.powf(2.0 * v);
                grad[2] = 2.0 * psi * pw;
                grad[3] = psi * psi * pw * 2.0 * x.ln();
                psi * psi * pw
            }
        }
    }
}

/// Quasi-log-likelihood and its analytic gradient for an arbitrary model.
/// Returns `None` if any step has nonpositive variance (out of the model's
/// state space for this series).
fn loglik_and_grad(
    series: &SeriesSample,
    kind: ModelKind,
    theta: &[f64],
) -> Option<(f64, Vec<f64>)> {
    let n_par = kind.n_params();
    let dt = series.dt;
    let mut value = 0.0;
    let mut grad = vec![0.0; n_par];
    let mut dmu = vec![0.0; n_par];
    let mut dvar = vec![0.0; n_par];
    for w in series.values.windows(2) {
        let (x_prev, x_next) = (w[0], w[1]);
        for g in dmu.iter_mut() {
            *g = 0.0;
        }
        for g in dvar.iter_mut() {
            *g = 0.0;
        }
        let mu = kind.drift_and_grad(theta, x_prev, &mut dmu);
        let var = kind.diffusion_var_and_grad(theta, x_prev, &mut dvar);
        if !(var > 0.0) || !var.is_finite() {
            return None;
        }
        let r = x_next - x_prev - mu * dt;
        let s2 = var * dt;
        value += -0.5 * (LN_2PI + s2.ln() + r * r / s2);
        for k in 0..n_par {
            grad[k] += r * dmu[k] / var + 0.5 * dvar[k] * (r * r / (var * var * dt) - 1.0 / var);
        }
    }
    Some((value, grad))
}

/// Quasi-log-likelihood of a yield series under the CIR dynamics.
/// Time stamps do not enter; only the increments and the step dt do.
pub fn quasi_loglik(series: &SeriesSample, theta: &YieldParams) -> Result<f64> {
    check_positive_series(series)?;
    let packed = [theta.b, theta.alpha, theta.psi];
    loglik_and_grad(series, ModelKind::Cir, &packed)
        .map(|(v, _)| v)
        .ok_or_else(|| Error::domain("nonpositive variance in quasi-log-likelihood".to_string()))
}

/// Analytic gradient of [`quasi_loglik`] in (b, alpha, psi).
pub fn quasi_loglik_grad(series: &SeriesSample, theta: &YieldParams) -> Result<[f64; 3]> {
    check_positive_series(series)?;
    let packed = [theta.b, theta.alpha, theta.psi];
    let (_, g) = loglik_and_grad(series, ModelKind::Cir, &packed)
        .ok_or_else(|| Error::domain("nonpositive variance in quasi-log-likelihood".to_string()))?;
    Ok([g[0], g[1], g[2]])
}

fn check_positive_series(series: &SeriesSample) -> Result<()> {
    if series.values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::domain(
            "yield series must be strictly positive".to_string(),
        ));
    }
    Ok(())
}

/// A yield series recovered from prices, together with the implied constant
/// earnings E = gamma0 * P[0].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct YieldSeries {
    pub series: SeriesSample,
    pub earnings: f64,
}

/// Map a strictly positive price series to its yield series gamma_t = E/P_t,
/// anchoring E by the initial yield gamma0.
pub fn yield_series_from_prices(prices: &SeriesSample, gamma0: f64) -> Result<YieldSeries> {
    if !(gamma0 > 0.0) {
        return Err(Error::invalid(format!("gamma0 must be > 0, got {gamma0}")));
    }
    if prices.values.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::invalid(
            "prices must be strictly positive".to_string(),
        ));
    }
    let earnings = gamma0 * prices.values[0];
    let values = prices.values.iter().map(|p| earnings / p).collect();
    Ok(YieldSeries {
        series: SeriesSample::new(values, prices.dt, prices.t0)?,
        earnings,
    })
}

/// Derived report quantities computed from a fitted parameter triple.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DerivedReport {
    pub gamma_star_hat: f64,
    pub p_star_hat: f64,
    pub h_hat: f64,
    pub mu_star_hat: f64,
    /// Amplification factor; `None` in the explosive regime where the mean
    /// price does not exist.
    pub phi_hat: Option<f64>,
    /// phi_hat * p_star_hat.
    pub p_dagger_hat: Option<f64>,
    /// 2 alpha gamma* <= psi^2.
    pub explosive: bool,
    /// alpha landed on zero, so the ratio-derived quantities are unreliable.
    pub degenerate: bool,
}

/// Sequentially derive gamma*, P*, H, mu*, phi and P-dagger from the fitted
/// triple and the earnings anchor.
pub fn derived_report(theta: &YieldParams, earnings: f64) -> DerivedReport {
    let psi2 = theta.psi * theta.psi;
    if theta.alpha == 0.0 {
        return DerivedReport {
            gamma_star_hat: f64::NAN,
            p_star_hat: f64::NAN,
            h_hat: 0.0,
            mu_star_hat: f64::NAN,
            phi_hat: None,
            p_dagger_hat: None,
            explosive: true,
            degenerate: true,
        };
    }
    let gamma_star = theta.b / theta.alpha;
    let p_star = earnings / gamma_star;
    let h = 2.0 * theta.alpha * earnings / psi2;
    let mu_star = 2.0 * theta.alpha * gamma_star / psi2;
    let explosive = 2.0 * theta.alpha * gamma_star <= psi2;
    let phi = if explosive {
        None
    } else {
        Some(1.0 / (1.0 - psi2 / (2.0 * theta.alpha * gamma_star)))
    };
    DerivedReport {
        gamma_star_hat: gamma_star,
        p_star_hat: p_star,
        h_hat: h,
        mu_star_hat: mu_star,
        phi_hat: phi,
        p_dagger_hat: phi.map(|f| f * p_star),
        explosive,
        degenerate: false,
    }
}

/// Optimizer diagnostics attached to a fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
}

/// A CIR fit: estimates, Fisher standard errors, the quasi-log-likelihood at
/// the optimum and the derived bubble report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub theta_hat: YieldParams,
    /// Standard errors of (b, alpha, psi); `None` when the numeric Hessian
    /// is singular or not negative definite.
    pub stderr: Option<[f64; 3]>,
    pub loglik: f64,
    pub derived: DerivedReport,
    pub diagnostics: FitDiagnostics,
}

impl FitResult {
    pub fn regime(&self) -> Regime {
        classify_regime(&self.theta_hat)
    }
}

/// A fit of any of the four model families (used for the alternatives in
/// model comparison).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelFit {
    pub kind: ModelKind,
    pub theta: Vec<f64>,
    pub loglik: f64,
    pub diagnostics: FitDiagnostics,
}

/// Fit any model family by QMLE inside the given box.
pub fn fit_model(
    series: &SeriesSample,
    kind: ModelKind,
    bounds: &Bounds,
    init: &[f64],
) -> Result<ModelFit> {
    if series.values.len() < MIN_SERIES_LEN {
        return Err(Error::invalid(format!(
            "series has {} observations; at least {MIN_SERIES_LEN} are required",
            series.values.len()
        )));
    }
    check_positive_series(series)?;
    if bounds.dim() != kind.n_params() || init.len() != kind.n_params() {
        return Err(Error::invalid(format!(
            "{} needs {}-dimensional bounds and init",
            kind.name(),
            kind.n_params()
        )));
    }
    let objective = |theta: &[f64]| match loglik_and_grad(series, kind, theta) {
        Some((v, g)) => (v, g),
        None => (f64::NEG_INFINITY, vec![0.0; kind.n_params()]),
    };
    let sol = maximize(objective, init, bounds, &Options::default())?;
    Ok(ModelFit {
        kind,
        theta: sol.x,
        loglik: sol.f,
        diagnostics: FitDiagnostics {
            iterations: sol.iterations,
            converged: sol.converged,
            gradient_norm: sol.projected_grad_norm,
        },
    })
}

/// Fit the CIR triple (b, alpha, psi) and assemble the full report.
/// `earnings` anchors the derived price-level quantities.
pub fn fit_qmle(
    series: &SeriesSample,
    bounds: &Bounds,
    init: &[f64],
    earnings: f64,
) -> Result<FitResult> {
    let fit = fit_model(series, ModelKind::Cir, bounds, init)?;
    let theta = YieldParams {
        b: fit.theta[0],
        alpha: fit.theta[1],
        psi: fit.theta[2],
    };
    let stderr = fisher_stderr(series, &fit.theta);
    Ok(FitResult {
        derived: derived_report(&theta, earnings),
        theta_hat: theta,
        stderr,
        loglik: fit.loglik,
        diagnostics: fit.diagnostics,
    })
}

/// Fit with the reference bounds [0, 100]^3 and init (0.01, 0.01, 0.01).
pub fn fit_qmle_default(series: &SeriesSample, earnings: f64) -> Result<FitResult> {
    let kind = ModelKind::Cir;
    fit_qmle(
        series,
        &kind.default_bounds(),
        &kind.default_init(),
        earnings,
    )
}

/// Standard errors from the inverse of the negative numeric Hessian
/// (central differences of the analytic gradient, step 1e-4 relative).
fn fisher_stderr(series: &SeriesSample, theta: &[f64]) -> Option<[f64; 3]> {
    let n = 3;
    let mut hess = vec![vec![0.0; n]; n];
    for j in 0..n {
        let h = 1e-4 * theta[j].abs().max(1e-8);
        let mut tp = theta.to_vec();
        tp[j] += h;
        let mut tm = theta.to_vec();
        tm[j] -= h;
        let (_, gp) = loglik_and_grad(series, ModelKind::Cir, &tp)?;
        let (_, gm) = loglik_and_grad(series, ModelKind::Cir, &tm)?;
        for i in 0..n {
            hess[i][j] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    // symmetrize and invert -H
    let mut neg_h = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            neg_h[i][j] = -0.5 * (hess[i][j] + hess[j][i]);
        }
    }
    let cov = invert_small(&neg_h)?;
    let mut se = [0.0; 3];
    for i in 0..n {
        if !(cov[i][i] > 0.0) {
            return None;
        }
        se[i] = cov[i][i].sqrt();
    }
    Some(se)
}

/// Gauss-Jordan inverse with partial pivoting for tiny dense systems.
fn invert_small(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv = vec![vec![0.0; n]; n];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..n {
        let pivot_row =
            (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pivot = a[col][col];
        for j in 0..n {
            a[col][j] /= pivot;
            inv[col][j] /= pivot;
        }
        for i in 0..n {
            if i != col {
                let factor = a[i][col];
                for j in 0..n {
                    a[i][j] -= factor * a[col][j];
                    inv[i][j] -= factor * inv[col][j];
                }
            }
        }
    }
    Some(inv)
}
