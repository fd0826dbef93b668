//! Three-electron double-dot ("hybrid") qubits: many-body Hamiltonian,
//! Schrieffer–Wolff reduction to a two-level qubit, Rabi dynamics, and
//! exchange-pulse search for CNOT-equivalent gates on encoded spin qubits.

pub mod constants;
pub mod dynamics;
pub mod encoded;
pub mod error;
pub mod hubbard;
pub mod linalg;
pub mod many_body;
pub mod optimizer;
pub mod schrieffer_wolff;

pub use error::{Error, Result};
