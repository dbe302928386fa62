//! Brute-force reference for the Gaussian engine: states are built as density matrices
//! in a truncated number basis, and logarithmic derivatives and Fisher matrices are
//! computed from their definitions.

pub mod compare;
pub mod dense;
pub mod error;
pub mod observables;
pub mod ops;
pub mod qfi;
pub mod state;

pub use error::{OracleError, Result};
pub use qfi::{
    commutator_trace_oracle, fidelity_qfi_oracle, oracle_fisher, rld_qfi_oracle, sld_oracle, sld_qfi_oracle,
    state_derivatives, OracleFisher, SldOracle,
};
pub use state::{build_state, build_trajectory, FockDensityMatrix, FockOptions};
