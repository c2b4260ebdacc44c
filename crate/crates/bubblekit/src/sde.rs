//! Path simulation for the yield process and the induced price paths.
//!
//! Four yield dynamics are supported: the CIR null model and the BM, GBM and
//! CKLS alternatives used in model comparison. CIR additionally has an exact
//! transition sampler (noncentral chi-square via a Poisson-gamma mixture)
//! alongside the full-truncation Euler scheme.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::model::YieldParams;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Yield floor used when converting to prices; values at or below it are
/// clamped and flagged.
pub const GAMMA_FLOOR: f64 = 1e-12;

/// A uniformly sampled path: values at t0, t0 + dt, t0 + 2 dt, ...
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeriesSample {
    pub values: Vec<f64>,
    pub dt: f64,
    pub t0: f64,
}

impl SeriesSample {
    pub fn new(values: Vec<f64>, dt: f64, t0: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid(
                "a series needs at least 2 points".to_string(),
            ));
        }
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
        }
        Ok(SeriesSample { values, dt, t0 })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Time stamp of sample i.
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Final value of the path.
    pub fn last(&self) -> f64 {
        *self.values.last().expect("series is non-empty")
    }
}

/// Which yield dynamics to simulate or fit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum YieldModel {
    /// d x = (b - alpha x) dt + psi sqrt(x) dW. psi = 0 degenerates to the
    /// deterministic mean-reverting ODE.
    Cir { b: f64, alpha: f64, psi: f64 },
    /// d x = b dt + psi dW (b may be negative).
    Bm { b: f64, psi: f64 },
    /// d x = -alpha x dt + psi x dW.
    Gbm { alpha: f64, psi: f64 },
    /// d x = (b - alpha x) dt + psi x^v dW, elasticity v in (0, 1.5].
    /// Nests CIR at v = 0.5.
    Ckls {
        b: f64,
        alpha: f64,
        psi: f64,
        v: f64,
    },
}

impl YieldModel {
    pub fn cir(params: &YieldParams) -> Self {
        YieldModel::Cir {
            b: params.b,
            alpha: params.alpha,
            psi: params.psi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            YieldModel::Cir { b, alpha, psi } => {
                if !(b >= 0.0 && alpha >= 0.0 && psi >= 0.0) {
                    return Err(Error::invalid(format!(
                        "CIR requires b, alpha, psi >= 0, got ({b}, {alpha}, {psi})"
                    )));
                }
            }
            YieldModel::Bm { b, psi } => {
                if !(b.is_finite() && psi >= 0.0) {
                    return Err(Error::invalid(format!(
                        "BM requires finite b and psi >= 0, got ({b}, {psi})"
                    )));
                }
            }
            YieldModel::Gbm { alpha, psi } => {
                if !(alpha.is_finite() && psi >= 0.0) {
                    return Err(Error::invalid(format!(
                        "GBM requires finite alpha and psi >= 0, got ({alpha}, {psi})"
                    )));
                }
            }
            YieldModel::Ckls { b, alpha, psi, v } => {
                if !(b.is_finite() && alpha.is_finite() && psi >= 0.0) {
                    return Err(Error::invalid(format!(
                        "CKLS requires finite drift and psi >= 0, got ({b}, {alpha}, {psi})"
                    )));
                }
                if !(v > 0.0 && v <= 1.5) {
                    return Err(Error::invalid(format!(
                        "CKLS elasticity must lie in (0, 1.5], got {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Drift mu(x) of the SDE.
    pub fn drift(&self, x: f64) -> f64 {
        match *self {
            YieldModel::Cir { b, alpha, .. } => b - alpha * x,
            YieldModel::Bm { b, .. } => b,
            YieldModel::Gbm { alpha, .. } => -alpha * x,
            YieldModel::Ckls { b, alpha, .. } => b - alpha * x,
        }
    }

    /// Squared diffusion sigma^2(x) of the SDE.
    pub fn diffusion_var(&self, x: f64) -> f64 {
        match *self {
            YieldModel::Cir { psi, .. } => psi * psi * x,
            YieldModel::Bm { psi, .. } => psi * psi,
            YieldModel::Gbm { psi, .. } => psi * psi * x * x,
            YieldModel::Ckls { psi, v, .. } => psi * psi * x.powf(2.0 * v),
        }
    }

    /// Whether the recorded path should be truncated at zero (state-dependent
    /// square-root/power diffusions where negative yields are meaningless).
    fn truncates_output(&self) -> bool {
        matches!(self, YieldModel::Cir { .. } | YieldModel::Ckls { .. })
    }
}

/// Discretization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Scheme {
    /// Euler-Maruyama with drift and diffusion evaluated at max(x, 0).
    EulerFullTruncation,
    /// Exact CIR transition (noncentral chi-square); CIR only.
    ExactCir,
}

/// Full description of a simulation run. Identical specs (including the
/// seed) produce bit-identical output.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimSpec {
    pub model: YieldModel,
    pub x0: f64,
    pub n_steps: usize,
    pub dt: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.x0 > 0.0) {
            return Err(Error::invalid(format!("x0 must be > 0, got {}", self.x0)));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps must be >= 1".to_string()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::invalid(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.scheme == Scheme::ExactCir && !matches!(self.model, YieldModel::Cir { .. }) {
            return Err(Error::invalid(
                "ExactCir scheme is only valid for the CIR model".to_string(),
            ));
        }
        Ok(())
    }
}

/// RNG for a given path index: one ChaCha stream per path, so ensembles are
/// reproducible independently of scheduling.
fn path_rng(seed: u64, path_index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Simulate a single yield path (path index 0 of the seed's ensemble).
pub fn simulate_yield(spec: &SimSpec) -> Result<SeriesSample> {
    spec.validate()?;
    simulate_path_indexed(spec, 0)
}

/// Simulate `n_paths` independent paths; path i draws from ChaCha stream i.
pub fn simulate_ensemble(spec: &SimSpec, n_paths: usize) -> Result<Vec<SeriesSample>> {
    spec.validate()?;
    if n_paths == 0 {
        return Err(Error::invalid("n_paths must be >= 1".to_string()));
    }
    #[cfg(feature = "parallel")]
    {
        (0..n_paths as u64)
            .into_par_iter()
            .map(|i| simulate_path_indexed(spec, i))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n_paths as u64)
            .map(|i| simulate_path_indexed(spec, i))
            .collect()
    }
}

/// Sequential ensemble generation; same output as [`simulate_ensemble`]
/// (paths are keyed by index, not by scheduling). Kept callable regardless
/// of the `parallel` feature for benchmarking the two side by side.
pub fn simulate_ensemble_seq(spec: &SimSpec, n_paths: usize) -> Result<Vec<SeriesSample>> {
    spec.validate()?;
    if n_paths == 0 {
        return Err(Error::invalid("n_paths must be >= 1".to_string()));
    }
    (0..n_paths as u64)
        .map(|i| simulate_path_indexed(spec, i))
        .collect()
}

fn simulate_path_indexed(spec: &SimSpec, path_index: u64) -> Result<SeriesSample> {
    let mut rng = path_rng(spec.seed, path_index);
    let mut values = Vec::with_capacity(spec.n_steps + 1);
    match spec.scheme {
        Scheme::EulerFullTruncation => {
            let truncate = spec.model.truncates_output();
            let mut state = spec.x0;
            values.push(state);
            let sqrt_dt = spec.dt.sqrt();
            for _ in 0..spec.n_steps {
                let eff = state.max(0.0);
                let z: f64 = StandardNormal.sample(&mut rng);
                let sigma = spec.model.diffusion_var(eff).sqrt();
                state += spec.model.drift(eff) * spec.dt + sigma * sqrt_dt * z;
                values.push(if truncate { state.max(0.0) } else { state });
            }
        }
        Scheme::ExactCir => {
            let (b, alpha, psi) = match spec.model {
                YieldModel::Cir { b, alpha, psi } => (b, alpha, psi),
                _ => unreachable!("validated above"),
            };
            let mut state = spec.x0;
            values.push(state);
            for _ in 0..spec.n_steps {
                state = exact_cir_step(state, b, alpha, psi, spec.dt, &mut rng)?;
                values.push(state);
            }
        }
    }
    SeriesSample::new(values, spec.dt, 0.0)
}

/// One exact CIR transition over dt: 2 c gamma' ~ noncentral chi-square with
/// d = 4 b / psi^2 degrees of freedom and noncentrality 2 c gamma e^(-a dt),
/// where c = 2 a / (psi^2 (1 - e^(-a dt))). Sampled as Poisson-mixed gamma.
fn exact_cir_step(
    gamma: f64,
    b: f64,
    alpha: f64,
    psi: f64,
    dt: f64,
    rng: &mut ChaCha12Rng,
) -> Result<f64> {
    if psi == 0.0 {
        // deterministic mean reversion
        let decay = (-alpha * dt).exp();
        let gstar = if alpha > 0.0 {
            b / alpha
        } else {
            return Ok(gamma + b * dt);
        };
        return Ok(gstar + (gamma - gstar) * decay);
    }
    // 1 - e^(-a dt) -> a dt as a -> 0; expm1 keeps that limit accurate
    let one_minus_exp = -(-alpha * dt).exp_m1();
    let c = if alpha > 0.0 {
        2.0 * alpha / (psi * psi * one_minus_exp)
    } else {
        2.0 / (psi * psi * dt)
    };
    let d = 4.0 * b / (psi * psi);
    let lambda = 2.0 * c * gamma * (-alpha * dt).exp();
    let n = if lambda > 0.0 {
        let pois = Poisson::new(lambda / 2.0)
            .map_err(|e| Error::invalid(format!("Poisson({}): {e}", lambda / 2.0)))?;
        pois.sample(rng)
    } else {
        0.0
    };
    let shape = d / 2.0 + n;
    if shape <= 0.0 {
        // b = 0 and no Poisson mass: the transition is a point mass at 0
        return Ok(0.0);
    }
    let gamma_dist =
        Gamma::new(shape, 2.0).map_err(|e| Error::invalid(format!("Gamma({shape}, 2): {e}")))?;
    let y: f64 = gamma_dist.sample(rng);
    Ok(y / (2.0 * c))
}

/// A price path induced by a yield path, with the indices where the yield
/// had to be clamped to [`GAMMA_FLOOR`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PricePath {
    pub series: SeriesSample,
    pub clamped: Vec<usize>,
}

/// Pointwise P = E / gamma. Yields at or below the floor are clamped to the
/// floor and flagged rather than treated as errors.
pub fn price_path(yield_path: &SeriesSample, earnings: f64) -> Result<PricePath> {
    if !(earnings > 0.0) {
        return Err(Error::invalid(format!(
            "earnings must be > 0, got {earnings}"
        )));
    }
    let mut clamped = Vec::new();
    let values = yield_path
        .values
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let g = if g < GAMMA_FLOOR {
                clamped.push(i);
                GAMMA_FLOOR
            } else {
                g
            };
            earnings / g
        })
        .collect();
    Ok(PricePath {
        series: SeriesSample::new(values, yield_path.dt, yield_path.t0)?,
        clamped,
    })
}
