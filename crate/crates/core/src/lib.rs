//! Bayesian quantile regression for binary panel outcomes with Mundlak-type
//! correlated random effects.
//!
//! The crate provides two Gibbs samplers for the same posterior:
//!
//! * [`sampler::nonblocked`] updates every block conditional on all others.
//! * [`sampler::blocked`] draws `(beta, z)` jointly with the individual
//!   effects integrated out, which cuts the autocorrelation of the chain.
//!
//! Around the samplers sit the distribution primitives they need
//! ([`distributions`]), chain diagnostics ([`diagnostics`]), posterior
//! functionals such as average marginal effects ([`effects`]) and a
//! synthetic data generator ([`simgen`]).
//!
//! Column indices are zero-based throughout; column 0 of the design matrix
//! is always the intercept.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod distributions;
pub mod effects;
pub mod error;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod sampler;
pub mod simgen;

pub use error::{Error, Result};
pub use model::{Algorithm, ChainState, ModelSpec, PanelData, PosteriorDraws, Prior, SamplerConfig};
pub use rng::RngStream;
pub use sampler::run_chain;
