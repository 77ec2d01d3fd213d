//! Phase-space toolkit for finitely many bosonic modes: exact star products
//! on polynomial symbols, a truncated Fock-space operator oracle, displaced
//! parity quasiprobability evaluation, and the lattice mode decomposition of
//! a real scalar field.

pub mod coeff;
pub mod error;
pub mod parser;
pub mod symbol;

pub use error::{Error, Result};
pub use symbol::{PhasePoint, PolySymbol, SOrder, Var};
pub mod fock;
pub mod quasiprob;
