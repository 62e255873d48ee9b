//! Lévy insurance risk processes with loss-carried-forward tax.
//!
//! The crate is `no_std` (it needs `alloc`) and contains everything that is
//! pure computation:
//!
//! * [`model`]: supported claims-surplus models, their Laplace exponents, the
//!   Lundberg root, the Esscher tilt and the bivariate ladder exponents.
//! * [`tax`]: tax policies driven by the depth of the running minimum.
//! * [`engine`]: exact event-driven simulation of the taxed process, plus a
//!   fixed-grid surrogate for the Brownian model.
//! * [`estimators`]: crude and exponentially tilted Monte Carlo estimators.
//! * [`asymptotics`]: closed-form and quadrature limits as `u → ∞`.
//!
//! IO, configuration and parallel execution live in the `taxrisk` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod engine;
pub mod error;
pub mod estimators;
pub mod model;
pub mod quad;
pub mod roots;
pub mod sum;
pub mod tax;

pub use error::{Error, Result};
pub use model::{LadderExponents, ModelSpec, Upsilon};
pub use tax::TaxPolicy;
