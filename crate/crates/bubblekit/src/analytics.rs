//! Closed-form transition density, conditional moments and the
//! super-exponential bubble diagnostics.
//!
//! All densities are assembled in log space from the [`crate::specfun`]
//! kernel and exponentiated once at the end.

use crate::dd::{dd_log_kummer_qq1, Dd};
use crate::error::{Error, Result};
use crate::model::{Moment, PriceContext, YieldParams};
use crate::specfun::{log_bessel_i, log_kummer_1f1};

/// Transition densities are undefined at t = 0 (the limit is a Dirac mass at
/// the starting point); times below this floor are rejected.
pub const T_MIN: f64 = 1e-8;

/// The coefficient set (c, u, v, q) of the price transition density at lag t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionCoeffs {
    /// (1 - e^(-alpha t)) / H
    pub c: f64,
    /// (H / P0) / (e^(alpha t) - 1)
    pub u: f64,
    /// (H / Pt) / (1 - e^(-alpha t))
    pub v: f64,
    /// H / P* - 1
    pub q: f64,
}

impl TransitionCoeffs {
    pub fn new(
        t: f64,
        p0: f64,
        p_t: f64,
        params: &YieldParams,
        ctx: &PriceContext,
    ) -> Result<Self> {
        if !(t >= T_MIN) {
            return Err(Error::domain(format!(
                "transition coefficients need t >= {T_MIN} (t -> 0 is a Dirac mass at P0), got {t}"
            )));
        }
        if !(p0 > 0.0 && p_t > 0.0) {
            return Err(Error::domain(format!(
                "prices must be > 0, got p0={p0}, p_t={p_t}"
            )));
        }
        let h = ctx.h_threshold(params);
        let p_star = ctx.p_star(params);
        // 1 - e^(-alpha t) via expm1 for accuracy at small alpha t
        let em = -(-params.alpha * t).exp_m1();
        let ep = (params.alpha * t).exp_m1();
        Ok(TransitionCoeffs {
            c: em / h,
            u: (h / p0) / ep,
            v: (h / p_t) / em,
            q: h / p_star - 1.0,
        })
    }
}

/// Transition density f(p_t, t | p0) of the price process:
/// c e^{-(u+v)} v^{q/2+2} u^{-q/2} I_q(2 sqrt(u v)), assembled in logs.
pub fn transition_pdf(
    p_t: f64,
    t: f64,
    p0: f64,
    params: &YieldParams,
    ctx: &PriceContext,
) -> Result<f64> {
    let co = TransitionCoeffs::new(t, p0, p_t, params, ctx)?;
    if co.q <= -1.0 {
        return Err(Error::domain(format!(
            "transition density needs Bessel order q > -1, got q = {}",
            co.q
        )));
    }
    // u underflows to exactly 0 at very large alpha t; the u -> 0 limit of
    // u^{-q/2} I_q(2 sqrt(uv)) is v^{q/2} / Gamma(q+1), i.e. the stationary
    // density
    if co.u == 0.0 {
        let log_f =
            co.c.ln() - co.v + (co.q + 2.0) * co.v.ln() - crate::specfun::ln_gamma(co.q + 1.0)?;
        return Ok(log_f.exp());
    }
    let bessel = log_bessel_i(co.q, 2.0 * (co.u * co.v).sqrt())?;
    if bessel.is_zero() {
        return Ok(0.0);
    }
    let log_f = co.c.ln() - (co.u + co.v) + (co.q / 2.0 + 2.0) * co.v.ln()
        - (co.q / 2.0) * co.u.ln()
        + bessel.ln()?;
    Ok(log_f.exp())
}

/// CIR transition density in yield space:
/// d e^{-(u+v)} (v/u)^{q/2} I_q(2 sqrt(u v)) with d = 2 alpha / (psi^2 (1 - e^(-alpha t))),
/// u = d gamma0 e^(-alpha t), v = d gamma_t, q = 2 b / psi^2 - 1.
pub fn cir_transition_pdf(g_t: f64, t: f64, g0: f64, params: &YieldParams) -> Result<f64> {
    if !(t >= T_MIN) {
        return Err(Error::domain(format!(
            "cir_transition_pdf needs t >= {T_MIN}, got {t}"
        )));
    }
    if !(g_t > 0.0 && g0 > 0.0) {
        return Err(Error::domain(format!(
            "yields must be > 0, got g0={g0}, g_t={g_t}"
        )));
    }
    let psi2 = params.psi * params.psi;
    let em = -(-params.alpha * t).exp_m1();
    let d = 2.0 * params.alpha / (psi2 * em);
    let u = d * g0 * (-params.alpha * t).exp();
    let v = d * g_t;
    let q = 2.0 * params.b / psi2 - 1.0;
    if q <= -1.0 {
        return Err(Error::domain(format!(
            "cir_transition_pdf needs q > -1, got q = {q}"
        )));
    }
    if u == 0.0 {
        // stationary (gamma-distribution) limit of the transition kernel
        let log_f = d.ln() - v + q * v.ln() - crate::specfun::ln_gamma(q + 1.0)?;
        return Ok(log_f.exp());
    }
    let bessel = log_bessel_i(q, 2.0 * (u * v).sqrt())?;
    if bessel.is_zero() {
        return Ok(0.0);
    }
    let log_f = d.ln() - (u + v) + (q / 2.0) * (v.ln() - u.ln()) + bessel.ln()?;
    Ok(log_f.exp())
}

/// ln E(R_t | P0) = -u - ln(c q P0) + ln 1F1(q, q+1, u).
fn log_cond_mean_return(t: f64, p0: f64, params: &YieldParams, ctx: &PriceContext) -> Result<f64> {
    let h = ctx.h_threshold(params);
    let p_star = ctx.p_star(params);
    if h <= p_star {
        return Err(Error::regime(format!(
            "conditional mean requires H > P*, got H = {h}, P* = {p_star}"
        )));
    }
    let co = TransitionCoeffs::new(t, p0, p0, params, ctx)?;
    let f = log_kummer_1f1(co.q, co.q + 1.0, co.u)?;
    Ok(-co.u - (co.c * co.q * p0).ln() + f.ln()?)
}

/// Conditional expectation of the cumulative return R_t = P_t / P0.
pub fn cond_mean_return(t: f64, p0: f64, params: &YieldParams, ctx: &PriceContext) -> Result<f64> {
    Ok(log_cond_mean_return(t, p0, params, ctx)?.exp())
}

/// Conditional variance of R_t. Finite only for q > 1 (H > 2 P*); reported
/// as `Moment::Infinite` otherwise, in line with the long-run behavior.
pub fn cond_var_return(
    t: f64,
    p0: f64,
    params: &YieldParams,
    ctx: &PriceContext,
) -> Result<Moment> {
    let h = ctx.h_threshold(params);
    let p_star = ctx.p_star(params);
    if h <= p_star {
        return Err(Error::regime(format!(
            "conditional variance requires H > P*, got H = {h}, P* = {p_star}"
        )));
    }
    let co = TransitionCoeffs::new(t, p0, p0, params, ctx)?;
    if co.q <= 1.0 {
        return Ok(Moment::Infinite);
    }
    // E(R^2) = e^{-u} / (c^2 q (q-1) P0^2) 1F1(q-1, q+1, u)
    let log_m2 = -co.u - 2.0 * (co.c * p0).ln() - (co.q * (co.q - 1.0)).ln()
        + log_kummer_1f1(co.q - 1.0, co.q + 1.0, co.u)?.ln()?;
    let log_m1 = log_cond_mean_return(t, p0, params, ctx)?;
    // var = m2 - m1^2, computed as m2 (1 - exp(2 log m1 - log m2)); the
    // difference can land a hair below zero from rounding when the variance
    // is many orders below the second moment
    let ratio = (2.0 * log_m1 - log_m2).exp();
    Ok(Moment::Finite((log_m2.exp() * (1.0 - ratio)).max(0.0)))
}

/// Super-exponential growth condition: true iff the expected log-price is
/// still convex at t = 1, i.e. the quadratic
/// -g e^a P0 W^2 + [e^a H + g (1 + e^a q) P0] W - [(e^a + 1) H + P0 g (q-1)] > 0
/// with W = e^z q / 1F1(q, q+1, z) and z = H / (P0 g).
///
/// The three terms cancel to ~1e-12 of their own size at realistic
/// parameters, so the quadratic is evaluated in double-double precision.
pub fn superexp_condition(p0: f64, params: &YieldParams, ctx: &PriceContext) -> Result<bool> {
    let h = ctx.h_threshold(params);
    let p_star = ctx.p_star(params);
    if h <= p_star {
        return Err(Error::regime(format!(
            "super-exponential condition is defined in the non-explosive regime only (H = {h} <= P* = {p_star})"
        )));
    }
    if !(p0 > 0.0) {
        return Err(Error::domain(format!("p0 must be > 0, got {p0}")));
    }
    let q = h / p_star - 1.0;

    let alpha = Dd::from(params.alpha);
    let g = alpha.exp_m1();
    let ea = g.add(Dd::ONE);
    let hd = Dd::from(2.0 * params.alpha)
        .mul(Dd::from(ctx.earnings))
        .div(Dd::from(params.psi).mul(Dd::from(params.psi)));
    let p0d = Dd::from(p0);
    let qd = hd.div(Dd::from(p_star)).sub(Dd::ONE);
    let z = hd.div(p0d.mul(g));

    // W = exp(z + ln q - ln 1F1(q, q+1, z))
    let log_f = dd_log_kummer_qq1(q, z.hi);
    let omega = z.add(qd.ln()).sub(log_f).exp();

    let term2 = ea
        .mul(hd)
        .add(g.mul(Dd::ONE.add(ea.mul(qd))).mul(p0d))
        .mul(omega);
    let term1 = g.mul(ea).mul(p0d).mul(omega).mul(omega);
    let term3 = ea.add(Dd::ONE).mul(hd).add(p0d.mul(g).mul(qd.sub(Dd::ONE)));
    let value = term2.sub(term1).sub(term3);
    Ok(value.hi > 0.0)
}

/// Error budget for the duration search.
#[derive(Debug, Clone, Copy)]
struct DurationSearch {
    t_lo: f64,
    t_hi: f64,
    bracket_ratio: f64,
}

const DURATION_SEARCH: DurationSearch = DurationSearch {
    t_lo: 1.0,
    t_hi: 1e6,
    bracket_ratio: 1.25,
};

/// Second derivative of ln E(P_t | P0) in t by central differences on the
/// analytic log-mean, step h = max(1e-3, 1e-3 t).
fn log_mean_curvature(t: f64, p0: f64, params: &YieldParams, ctx: &PriceContext) -> Result<f64> {
    let h = (1e-3_f64).max(1e-3 * t);
    let f_minus = log_cond_mean_return(t - h, p0, params, ctx)?;
    let f_0 = log_cond_mean_return(t, p0, params, ctx)?;
    let f_plus = log_cond_mean_return(t + h, p0, params, ctx)?;
    Ok((f_plus - 2.0 * f_0 + f_minus) / (h * h))
}

/// Duration t_c of the super-exponential regime: the smallest t > 1 where
/// the curvature of ln E(P_t | P0) crosses zero. Sign-bracketing on a
/// geometric grid (ratio 1.25) from t = 1, then bisection to a relative
/// width of 1e-4.
pub fn superexp_duration(p0: f64, params: &YieldParams, ctx: &PriceContext) -> Result<f64> {
    if !superexp_condition(p0, params, ctx)? {
        return Err(Error::regime(
            "super-exponential condition does not hold at these parameters".to_string(),
        ));
    }
    let s = DURATION_SEARCH;
    let mut t_lo = s.t_lo;
    let mut t_hi = None;
    let mut t = s.t_lo * s.bracket_ratio;
    while t <= s.t_hi {
        if log_mean_curvature(t, p0, params, ctx)? < 0.0 {
            t_hi = Some(t);
            break;
        }
        t_lo = t;
        t *= s.bracket_ratio;
    }
    let mut hi = t_hi.ok_or(Error::NoSignChange {
        what: "log-mean curvature stayed positive".to_string(),
        lo: s.t_lo,
        hi: s.t_hi,
    })?;
    let mut lo = t_lo;
    while hi - lo > 1e-4 * hi {
        let mid = 0.5 * (lo + hi);
        if log_mean_curvature(mid, p0, params, ctx)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
