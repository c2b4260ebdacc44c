//! Earning-yield bubble model.
//!
//! The price of an asset is modeled through its earning yield: P = E / gamma,
//! with gamma following a mean-reverting square-root (CIR) diffusion. The
//! crate provides:
//!
//! - [`specfun`]: the special functions behind every closed form (log-gamma,
//!   incomplete gamma, chi-square survival, modified Bessel I, Kummer 1F1),
//!   all carried in log space;
//! - [`model`]: regime classification, the stationary price density and its
//!   moments, the amplification factor and emergent risk premium;
//! - [`sde`]: seeded path simulation (full-truncation Euler and the exact
//!   CIR transition sampler) for CIR, BM, GBM and CKLS yield dynamics;
//! - [`analytics`]: the price transition density, conditional return
//!   moments, and the super-exponential growth condition and duration;
//! - [`calibrate`]: quasi-maximum-likelihood estimation of (b, alpha, psi)
//!   with a bounded quasi-Newton optimizer and Fisher standard errors;
//! - [`divergence`]: phi-divergence tests of the CIR null against BM, GBM
//!   and CKLS alternatives;
//! - [`quad`], [`optim`]: the supporting quadrature and optimization kernels.
//!
//! Monte-Carlo ensembles and the divergence test matrix run data-parallel
//! via rayon when the default `parallel` feature is on; disabling it yields
//! a dependency-free sequential build with identical results.

// `!(x > 0.0)` is the NaN-rejecting form of a domain check; keep it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod calibrate;
mod dd;
pub mod divergence;
pub mod error;
pub mod model;
pub mod optim;
pub mod quad;
pub mod sde;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{
    amplification_phi, classify_regime, emergent_premium, stationary_moments, stationary_pdf,
    Moment, PriceContext, Regime, StationaryMoments, YieldParams,
};
pub use sde::{
    price_path, simulate_ensemble, simulate_yield, PricePath, Scheme, SeriesSample, SimSpec,
    YieldModel,
};
