//! Projected limited-memory quasi-Newton optimization with box constraints.
//!
//! L-BFGS two-loop recursion restricted to the free variables, with
//! gradient-projection active-set identification and a strong-Wolfe line
//! search capped at the distance to the nearest bound. Memory 10 by default.
//! Convergence is declared on the infinity norm of the projected gradient.

use crate::error::{Error, Result};
use std::collections::VecDeque;

/// Box constraints; `lower[i] <= x[i] <= upper[i]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::invalid(
                "bound vectors must have equal length".to_string(),
            ));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::invalid(
                "lower bound exceeds upper bound".to_string(),
            ));
        }
        Ok(Bounds { lower, upper })
    }

    pub fn project(&self, x: &mut [f64]) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = xi.clamp(self.lower[i], self.upper[i]);
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
}

/// Tuning knobs of the optimizer.
#[derive(Debug, Clone, Copy)]
pub struct Options {
    /// Number of stored curvature pairs.
    pub memory: usize,
    /// Iteration budget before reporting non-convergence.
    pub max_iterations: usize,
    /// Converged when |projected gradient|_inf <= tol * (1 + |f|).
    pub tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            memory: 10,
            max_iterations: 500,
            tol: 1e-8,
        }
    }
}

/// Result of a maximization run.
#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    /// Objective value (in the caller's orientation, i.e. the maximum).
    pub f: f64,
    pub iterations: usize,
    /// True when the projected-gradient tolerance was met, or when the line
    /// search could no longer improve the objective by a representable
    /// amount (machine-precision optimum). False only on iteration-budget
    /// exhaustion.
    pub converged: bool,
    /// Infinity norm of the projected gradient at the final point.
    pub projected_grad_norm: f64,
    /// Objective value after each accepted iteration (caller orientation).
    pub trace: Vec<f64>,
}

const ACTIVE_EPS: f64 = 1e-10;
const WOLFE_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;

/// Maximize `f` over the box. The callback returns (value, gradient); points
/// where the objective is undefined should return `f64::NEG_INFINITY`
/// (the line search backs away from them).
pub fn maximize<F>(f: F, x0: &[f64], bounds: &Bounds, opts: &Options) -> Result<Solution>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    if x0.len() != bounds.dim() {
        return Err(Error::invalid(
            "x0 and bounds dimension mismatch".to_string(),
        ));
    }
    // minimize the negation
    let neg = |x: &[f64]| {
        let (v, mut g) = f(x);
        for gi in &mut g {
            *gi = -*gi;
        }
        (-v, g)
    };
    let mut sol = minimize_inner(&neg, x0, bounds, opts)?;
    for v in &mut sol.trace {
        *v = -*v;
    }
    Ok(Solution { f: -sol.f, ..sol })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected-gradient residual P(x - g) - x; zero exactly at a KKT point.
fn projected_gradient(x: &[f64], g: &[f64], bounds: &Bounds) -> Vec<f64> {
    x.iter()
        .zip(g)
        .enumerate()
        .map(|(i, (&xi, &gi))| (xi - gi).clamp(bounds.lower[i], bounds.upper[i]) - xi)
        .collect()
}

fn minimize_inner<F>(f: &F, x0: &[f64], bounds: &Bounds, opts: &Options) -> Result<Solution>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let (mut fx, mut g) = f(&x);
    if !fx.is_finite() {
        return Err(Error::invalid(
            "objective is not finite at the starting point".to_string(),
        ));
    }

    let mut s_store: VecDeque<Vec<f64>> = VecDeque::new();
    let mut y_store: VecDeque<Vec<f64>> = VecDeque::new();
    let mut trace = vec![fx];

    let mut pg_norm = inf_norm(&projected_gradient(&x, &g, bounds));
    for iter in 0..opts.max_iterations {
        if pg_norm <= opts.tol * (1.0 + fx.abs()) {
            return Ok(Solution {
                x,
                f: fx,
                iterations: iter,
                converged: true,
                projected_grad_norm: pg_norm,
                trace,
            });
        }

        // gradient-projection active set: bound is binding and the gradient
        // pushes outward
        let active: Vec<bool> = (0..n)
            .map(|i| {
                let span = (bounds.upper[i] - bounds.lower[i]).max(1.0);
                (x[i] <= bounds.lower[i] + ACTIVE_EPS * span && g[i] > 0.0)
                    || (x[i] >= bounds.upper[i] - ACTIVE_EPS * span && g[i] < 0.0)
            })
            .collect();

        // two-loop recursion on the free subspace
        let mut q: Vec<f64> = g
            .iter()
            .zip(&active)
            .map(|(&gi, &a)| if a { 0.0 } else { gi })
            .collect();
        let m = s_store.len();
        let mut alphas = vec![0.0; m];
        for k in (0..m).rev() {
            let rho = 1.0 / dot(&y_store[k], &s_store[k]);
            alphas[k] = rho * dot(&s_store[k], &q);
            for i in 0..n {
                q[i] -= alphas[k] * y_store[k][i];
            }
        }
        let gamma = if m > 0 {
            let k = m - 1;
            dot(&s_store[k], &y_store[k]) / dot(&y_store[k], &y_store[k])
        } else {
            1.0
        };
        for qi in &mut q {
            *qi *= gamma;
        }
        for k in 0..m {
            let rho = 1.0 / dot(&y_store[k], &s_store[k]);
            let beta = rho * dot(&y_store[k], &q);
            for i in 0..n {
                q[i] += s_store[k][i] * (alphas[k] - beta);
            }
        }
        let mut d: Vec<f64> = q
            .iter()
            .zip(&active)
            .map(|(&qi, &a)| if a { 0.0 } else { -qi })
            .collect();

        // clip the direction to the feasible cone: the quasi-Newton metric
        // may push a non-active coordinate straight into its bound
        let clip_to_cone = |d: &mut [f64], x: &[f64]| {
            for i in 0..d.len() {
                let span = (bounds.upper[i] - bounds.lower[i]).max(1.0);
                if (x[i] >= bounds.upper[i] - ACTIVE_EPS * span && d[i] > 0.0)
                    || (x[i] <= bounds.lower[i] + ACTIVE_EPS * span && d[i] < 0.0)
                {
                    d[i] = 0.0;
                }
            }
        };
        clip_to_cone(&mut d, &x);

        // fall back to steepest descent on the free subspace if the
        // quasi-Newton direction lost descent
        if dot(&d, &g) >= 0.0 {
            for i in 0..n {
                d[i] = if active[i] { 0.0 } else { -g[i] };
            }
            clip_to_cone(&mut d, &x);
            s_store.clear();
            y_store.clear();
        }
        if inf_norm(&d) == 0.0 {
            // no feasible descent direction: KKT point (possibly a corner)
            return Ok(Solution {
                x,
                f: fx,
                iterations: iter,
                converged: true,
                projected_grad_norm: pg_norm,
                trace,
            });
        }

        // largest step keeping x + alpha d inside the box
        let mut alpha_max = f64::INFINITY;
        for i in 0..n {
            if d[i] > 0.0 {
                alpha_max = alpha_max.min((bounds.upper[i] - x[i]) / d[i]);
            } else if d[i] < 0.0 {
                alpha_max = alpha_max.min((bounds.lower[i] - x[i]) / d[i]);
            }
        }
        alpha_max = alpha_max.max(0.0);

        let (alpha, fx_new, g_new) = strong_wolfe(f, &x, fx, &g, &d, alpha_max, bounds);
        if alpha == 0.0 {
            // the line search found no step improving f by a representable
            // amount: the iterate is optimal to machine precision, which is
            // the strongest certificate double precision can give
            return Ok(Solution {
                x,
                f: fx,
                iterations: iter,
                converged: true,
                projected_grad_norm: pg_norm,
                trace,
            });
        }

        let mut x_new = x.clone();
        for i in 0..n {
            x_new[i] += alpha * d[i];
        }
        bounds.project(&mut x_new);

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * inf_norm(&s) * inf_norm(&y) && sy > 0.0 {
            s_store.push_back(s);
            y_store.push_back(y);
            if s_store.len() > opts.memory {
                s_store.pop_front();
                y_store.pop_front();
            }
        }

        x = x_new;
        fx = fx_new;
        g = g_new;
        trace.push(fx);
        pg_norm = inf_norm(&projected_gradient(&x, &g, bounds));
    }

    // budget exhausted: report the best point with converged = false so the
    // caller can surface the diagnostics
    Ok(Solution {
        x,
        f: fx,
        iterations: opts.max_iterations,
        converged: false,
        projected_grad_norm: pg_norm,
        trace,
    })
}

/// Strong-Wolfe line search (Nocedal-Wright bracket + zoom) on
/// phi(a) = f(P(x + a d)), capped at `alpha_max`. Returns (alpha, f, g) with
/// alpha = 0 on failure.
fn strong_wolfe<F>(
    f: &F,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    d: &[f64],
    alpha_max: f64,
    bounds: &Bounds,
) -> (f64, f64, Vec<f64>)
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let n = x.len();
    let dphi0 = dot(g0, d);
    if dphi0 >= 0.0 || alpha_max <= 0.0 {
        return (0.0, f0, g0.to_vec());
    }
    let eval = |alpha: f64| {
        let mut xt = x.to_vec();
        for i in 0..n {
            xt[i] += alpha * d[i];
        }
        bounds.project(&mut xt);
        let (v, g) = f(&xt);
        let slope = dot(&g, d);
        (v, g, slope)
    };

    let mut alpha_prev = 0.0;
    let mut f_prev = f0;
    let mut alpha = alpha_max.min(1.0);
    let mut result: Option<(f64, f64, Vec<f64>)> = None;
    let mut bracket: Option<(f64, f64, f64, f64)> = None; // (lo, f_lo, hi, f_hi)

    for _ in 0..30 {
        let (fv, g, slope) = eval(alpha);
        if !fv.is_finite()
            || fv > f0 + WOLFE_C1 * alpha * dphi0
            || (alpha_prev > 0.0 && fv >= f_prev)
        {
            bracket = Some((alpha_prev, f_prev, alpha, fv));
            break;
        }
        if slope.abs() <= -WOLFE_C2 * dphi0 {
            result = Some((alpha, fv, g));
            break;
        }
        if slope >= 0.0 {
            bracket = Some((alpha, fv, alpha_prev, f_prev));
            break;
        }
        if alpha >= alpha_max {
            // boundary step satisfying Armijo: accept it
            result = Some((alpha, fv, g));
            break;
        }
        alpha_prev = alpha;
        f_prev = fv;
        alpha = (alpha * 2.0).min(alpha_max);
    }

    if let Some(r) = result {
        return r;
    }
    let (mut lo, mut f_lo, mut hi, _) = match bracket {
        Some(b) => b,
        None => return (0.0, f0, g0.to_vec()),
    };

    // zoom (bisection variant; f_lo tracks the best Armijo point)
    for _ in 0..40 {
        let alpha = 0.5 * (lo + hi);
        if (hi - lo).abs() < 1e-16 * (1.0 + lo.abs()) {
            break;
        }
        let (fv, g, slope) = eval(alpha);
        if !fv.is_finite() || fv > f0 + WOLFE_C1 * alpha * dphi0 || fv >= f_lo {
            hi = alpha;
        } else {
            if slope.abs() <= -WOLFE_C2 * dphi0 {
                return (alpha, fv, g);
            }
            if slope * (hi - lo) >= 0.0 {
                hi = lo;
            }
            lo = alpha;
            f_lo = fv;
        }
    }
    // fall back to the best low point found, if it improves
    if f_lo < f0 && lo > 0.0 {
        let (fv, g, _) = eval(lo);
        return (lo, fv, g);
    }
    (0.0, f0, g0.to_vec())
}
