//! Numerical laboratory for sequential probability assignment under log-loss.
//!
//! The crate provides:
//!
//! - [`glm`]: geometry of the Gaussian location model — parameter boxes,
//!   enlarged-set projections, the orthogonal sample decomposition, and
//!   data generators (including a heavy-tailed three-point adversary).
//! - [`predictors`]: joint log-density evaluators for the oracle Gaussian,
//!   the Shtarkov (NML) distribution with variance/enlargement knobs, a
//!   Laplace-in-the-mean escape component, their robust mixture, and the
//!   uniform-prior Bayes mixture.
//! - [`regret`]: Monte-Carlo estimation of expected cumulative regret in the
//!   population-oracle (PAC) and realized senses, plus semi-analytic
//!   decompositions that sample the batch mean directly.
//! - [`discrete`]: finite-alphabet misspecified capacity via a
//!   cost-penalized Blahut-Arimoto solver, with saddle-point and
//!   sandwich-bound certificates.
//! - [`theory`]: closed-form and quadrature-based reference quantities.
//!
//! All information quantities are in nats. Estimates are deterministic
//! functions of `(seed, reps, n)` regardless of worker count.

pub mod discrete;
mod error;
pub mod glm;
pub mod numeric;
pub mod predictors;
pub mod quad;
pub mod regret;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
