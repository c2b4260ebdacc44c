//! Parameter algebra of the earning-yield model.
//!
//! The price is tied to the yield through P = E / gamma. With the yield
//! following the mean-reverting square-root diffusion
//! `d gamma = (b - alpha gamma) dt + psi sqrt(gamma) dW`, everything about
//! the long-run price distribution is a function of the derived quantities
//! gamma* = b/alpha, P* = E/gamma*, H = 2 alpha E / psi^2 and
//! mu* = H/P* = 2 alpha gamma* / psi^2.

use crate::error::{Error, Result};
use crate::specfun::ln_gamma;

/// Drift/diffusion triple (b, alpha, psi) of the yield process, with
/// b >= 0, alpha > 0, psi > 0. Rates are per unit time (years by
/// convention); psi is per sqrt(time).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct YieldParams {
    pub b: f64,
    pub alpha: f64,
    pub psi: f64,
}

impl YieldParams {
    pub fn new(b: f64, alpha: f64, psi: f64) -> Result<Self> {
        if !(b >= 0.0) {
            return Err(Error::invalid(format!("b must be >= 0, got {b}")));
        }
        if !(alpha > 0.0) {
            return Err(Error::invalid(format!("alpha must be > 0, got {alpha}")));
        }
        if !(psi > 0.0) {
            return Err(Error::invalid(format!("psi must be > 0, got {psi}")));
        }
        Ok(YieldParams { b, alpha, psi })
    }

    /// Construct from the mean-reversion form (alpha, gamma*, psi), b = alpha gamma*.
    pub fn from_mean_reversion(alpha: f64, gamma_star: f64, psi: f64) -> Result<Self> {
        if !(gamma_star >= 0.0) {
            return Err(Error::invalid(format!(
                "gamma* must be >= 0, got {gamma_star}"
            )));
        }
        YieldParams::new(alpha * gamma_star, alpha, psi)
    }

    /// Long-run mean yield gamma* = b / alpha.
    pub fn gamma_star(&self) -> f64 {
        self.b / self.alpha
    }
}

/// Anchors of the price <-> yield bijection: earnings E, initial yield
/// gamma0 and the implied initial price P0 = E / gamma0.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PriceContext {
    pub earnings: f64,
    pub gamma0: f64,
    pub p0: f64,
}

impl PriceContext {
    pub fn new(earnings: f64, gamma0: f64) -> Result<Self> {
        if !(earnings > 0.0) {
            return Err(Error::invalid(format!(
                "earnings must be > 0, got {earnings}"
            )));
        }
        if !(gamma0 > 0.0) {
            return Err(Error::invalid(format!("gamma0 must be > 0, got {gamma0}")));
        }
        Ok(PriceContext {
            earnings,
            gamma0,
            p0: earnings / gamma0,
        })
    }

    /// Same context anchored by the initial price instead of the yield.
    pub fn from_initial_price(earnings: f64, p0: f64) -> Result<Self> {
        if !(p0 > 0.0) {
            return Err(Error::invalid(format!("p0 must be > 0, got {p0}")));
        }
        PriceContext::new(earnings, earnings / p0)
    }

    /// Fundamental price P* = E / gamma*.
    pub fn p_star(&self, params: &YieldParams) -> f64 {
        self.earnings / params.gamma_star()
    }

    /// Threshold price H = 2 alpha E / psi^2; the regime boundary in price units.
    pub fn h_threshold(&self, params: &YieldParams) -> f64 {
        2.0 * params.alpha * self.earnings / (params.psi * params.psi)
    }

    /// Tail exponent mu* = H / P* = 2 alpha gamma* / psi^2 of the stationary
    /// price distribution.
    pub fn mu_star(&self, params: &YieldParams) -> f64 {
        2.0 * params.alpha * params.gamma_star() / (params.psi * params.psi)
    }
}

/// The two qualitative regimes of the yield/price dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Regime {
    /// 2 alpha gamma* > psi^2: the yield stays strictly positive, the price
    /// is stationary with finite mean.
    NonExplosive,
    /// 2 alpha gamma* <= psi^2: the yield touches zero with positive
    /// probability and the price exhibits recurrent finite-time explosions.
    RecurrentExplosive,
}

/// A moment that may legitimately be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Moment {
    Finite(f64),
    Infinite,
}

impl Moment {
    pub fn is_finite(&self) -> bool {
        matches!(self, Moment::Finite(_))
    }

    /// The finite value, or +inf.
    pub fn value(&self) -> f64 {
        match self {
            Moment::Finite(v) => *v,
            Moment::Infinite => f64::INFINITY,
        }
    }
}

/// Stationary mean and variance of the cumulative return R = P/P0.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StationaryMoments {
    pub mean_return: Moment,
    pub var_return: Moment,
}

/// Classify the regime: NonExplosive iff 2 alpha gamma* > psi^2 (strict);
/// the boundary case belongs to the explosive branch.
pub fn classify_regime(params: &YieldParams) -> Regime {
    if 2.0 * params.alpha * params.gamma_star() > params.psi * params.psi {
        Regime::NonExplosive
    } else {
        Regime::RecurrentExplosive
    }
}

/// Amplification factor phi = (1 - P*/H)^-1 = (1 - psi^2/(2 alpha gamma*))^-1.
///
/// The long-run expected price is phi P*, not P*; phi > 1 whenever defined.
/// Errors in the explosive regime (P* >= H), where the mean price diverges.
pub fn amplification_phi(params: &YieldParams, ctx: &PriceContext) -> Result<f64> {
    let p_star = ctx.p_star(params);
    let h = ctx.h_threshold(params);
    if p_star >= h {
        return Err(Error::regime(format!(
            "amplification factor undefined: P* = {p_star} >= H = {h} (mean price infinite)"
        )));
    }
    Ok(1.0 / (1.0 - p_star / h))
}

/// Emergent risk premium rate rho_e = ln phi = -ln(1 - P*/H).
pub fn emergent_premium(params: &YieldParams, ctx: &PriceContext) -> Result<f64> {
    let p_star = ctx.p_star(params);
    let h = ctx.h_threshold(params);
    if p_star >= h {
        return Err(Error::regime(format!(
            "emergent premium undefined: P* = {p_star} >= H = {h}"
        )));
    }
    // -ln(1 - x) via ln_1p keeps the small-x first-order behavior exact
    Ok(-(-p_star / h).ln_1p())
}

/// Stationary (invariant) density of the price,
/// pi(p) = H^mu* / Gamma(mu*) e^{-H/p} p^{-(1+mu*)} - an inverse-gamma
/// density with shape mu* and scale H. Valid in both regimes.
pub fn stationary_pdf(p: f64, params: &YieldParams, ctx: &PriceContext) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::domain(format!(
            "stationary_pdf requires p > 0, got {p}"
        )));
    }
    let mu = ctx.mu_star(params);
    let h = ctx.h_threshold(params);
    let log_pdf = mu * h.ln() - ln_gamma(mu)? - h / p - (1.0 + mu) * p.ln();
    Ok(log_pdf.exp())
}

/// Long-run mean and variance of R = P/P0 under the stationary distribution.
///
/// Mean (P*/P0)(1 - P*/H)^-1 exists for H > P*; the variance additionally
/// needs H > 2P*. Nonexistent moments are reported as `Moment::Infinite`,
/// not as errors.
pub fn stationary_moments(params: &YieldParams, ctx: &PriceContext) -> StationaryMoments {
    let p_star = ctx.p_star(params);
    let h = ctx.h_threshold(params);
    let p0 = ctx.p0;
    let mean = if h > p_star {
        Moment::Finite((p_star / p0) / (1.0 - p_star / h))
    } else {
        Moment::Infinite
    };
    let var = if h > 2.0 * p_star {
        let r = p_star / h;
        let m1 = 1.0 / (1.0 - r);
        let v = (p_star * p_star) / (p0 * p0) * m1 * (1.0 / (1.0 - 2.0 * r) - m1);
        Moment::Finite(v)
    } else {
        Moment::Infinite
    };
    StationaryMoments {
        mean_return: mean,
        var_return: var,
    }
}
