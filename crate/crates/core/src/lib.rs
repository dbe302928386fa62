//! Quantum Fisher information and Cramér–Rao bounds for multimode Gaussian states.
//!
//! States are stored in the interleaved ladder ordering `(a1, a1†, a2, a2†, …)`.
//! The crate computes right and symmetric logarithmic derivatives in closed
//! form from the first and second moments, the corresponding Fisher matrices
//! and bounds, and the commutator condition for asymptotic attainability.

pub mod channels;
pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod logderiv;
pub mod scenarios;
pub mod sweep;

pub use error::{Error, Result};
