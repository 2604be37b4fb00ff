//! Phase-space simulator for the wave-heat coupled system on the Heisenberg
//! group `H_n`.
//!
//! Every `(k, λ)` Fourier mode reduces to a 3×3 first-order system
//! `dW/dt + A(z) W = 0` with `z = μ_k |λ|`. The crate assembles `A(z)`,
//! diagonalizes it asymptotically in the small and large zones, propagates it
//! exactly, and reassembles Plancherel-type energies whose decay exponents are
//! then fitted.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cascade;
pub mod cli;
pub mod error;
pub mod euclidean;
pub mod fit;
pub mod linalg;
pub mod plancherel;
pub mod profiles;
pub mod propagator;
pub mod reduce;
pub mod report;
pub mod spectral;
pub mod system;

pub use error::{Error, Result};
