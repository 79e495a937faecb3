//! Stochastic micromodel of the Couette flow.
//!
//! Particles with velocity `0` or `V` and holes live on a strip of `S + 2`
//! horizontal layers. Neighbouring layers exchange velocities, `V`
//! particles flow into holes on their right, the bottom plate stops `V`
//! particles, the top plate drags `0` particles to `V`, and every particle
//! is randomly perturbed `0 <-> V`.
//!
//! The crate offers four independent views of the same process:
//!
//! * [`kmc`]: exact event-driven simulation of the full strip (periodic in `x`);
//! * [`moments`]: the closed linear ODEs for one-site marginals per layer;
//! * [`oracle`]: the exact single-column Markov chain whose marginals obey
//!   the same ODEs;
//! * [`stationary`]: closed-form stationary profiles, the `K = S sqrt(2 eps / lambda)`
//!   transition parameter and the limiting `g_K` profile.
//!
//! [`harness`] wires them into reproducible experiments and the `couette` CLI.

pub mod error;
pub mod harness;
pub mod kmc;
pub mod lattice;
pub mod moments;
pub mod oracle;
pub mod rng;
pub mod stationary;
pub(crate) mod tridiag;

pub use error::{Error, Result};
pub use lattice::{Configuration, Params, Velocity};
pub use moments::MarginalProfile;
pub use stationary::{Regime, StationaryProfile};
