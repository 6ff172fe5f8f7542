//! Chromatic-number coefficients of block graphons.
//!
//! The crate computes the balanced coefficient `phi(W)`, the optimal
//! finite-type coefficient `phi_*(W)` and their building blocks (the functions
//! `w` and `w_*` of a nonnegative symmetric matrix `Q`), and checks them
//! against simulated exchangeable random graphs `G(n, W)` coloured with the
//! matching strategies. `chi(G) ≈ phi_*(W) · n / (2 ln n)` for block graphons.
//!
//! Modules:
//! - [`qcore`]: optimisation over `Q` (corner maximisers, `w_*`, pseudodefinite tests).
//! - [`graphon`]: block graphons, measure decompositions, closed forms, approximations.
//! - [`sampler`]: `G(n, W)` and stochastic block model samplers.
//! - [`colouring`]: DSATUR, balanced and multi-type colouring strategies.
//! - [`properties`]: randomized property suites over all of the above.

pub mod colouring;
pub mod error;
pub mod graphon;
pub mod properties;
pub mod qcore;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
