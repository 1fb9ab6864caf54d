//! Exact quon Fock-space algebra and neighbouring statistics models.
//!
//! The crate computes vacuum expectation values of quon operator words two
//! independent ways (rewriting and contraction enumeration), builds n-quon
//! Gram matrices and checks them against Zagier's determinant, realizes
//! Green parastatistics as finite matrices, runs Speicher's random-sign
//! ansatz as a Monte Carlo estimator, and does the arithmetic that relates
//! statistics-violation parameters of coupled fields.

pub mod bounds;
pub mod gram;
pub mod observables;
pub mod parastat;
pub mod poly;
pub mod qfock;
pub mod speicher;
pub mod verify;
pub mod wick;

pub use poly::QPolynomial;
pub use qfock::{FockVector, FockWord, ModeLabel, OpKind, OperatorSum, OperatorSymbol, OperatorWord};
