//! Physics-informed neural networks for radiative transfer.
//!
//! The crate solves forward and inverse problems for the radiative transfer
//! equation
//!
//! ```text
//! (1/c) u_t + omega . grad_x u + k u + sigma (u - (1/s_d) \int\int Phi u) = f
//! ```
//!
//! by collocating the PDE residual of a tanh multilayer perceptron on
//! quasi-Monte-Carlo training points and minimizing the composite residual
//! loss with full-batch gradient optimizers (ADAM, LBFGS).
//!
//! Module map:
//!
//! - [`sampling`]: Sobol / uniform-random training point generation on the
//!   rescaled unit-cube computational domain and its boundaries.
//! - [`quadrature`]: Gauss-Legendre rules, sphere rules for the scattering
//!   integral and angular moments.
//! - [`network`]: the feed-forward tanh network together with exact input-
//!   and parameter-derivatives.
//! - [`problems`]: the benchmark scenarios (slab, cubes, shell, inverse
//!   fixture) and their closed-form oracles.
//! - [`residuals`]: PDE / boundary / data residuals and the composite loss
//!   with its exact parameter gradient.
//! - [`training`]: optimizers and the ensemble training harness.
//! - [`bounds`]: a-posteriori generalization-error bound evaluation.

pub mod bounds;
pub mod error;
pub mod network;
pub mod problems;
pub mod quadrature;
pub mod residuals;
pub mod sampling;
pub mod training;

pub use error::Error;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
