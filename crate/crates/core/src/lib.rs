//! Oblivious algorithms for Max-DiCut: exact evaluation on graphs, the
//! ratio linear program for antisymmetric step functions, hard-instance
//! search, and certified lower-bound instances for sigmoid selection
//! functions.

pub mod digraph;
pub mod error;
pub mod hard_instance;
pub mod lb_suite;
pub mod oblivious;
pub mod quadopt;
pub mod ratio_lp;
pub mod scalar;
pub mod search;
pub mod selection;
pub mod simplex;
pub mod surd;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};

#[cfg(test)]
mod proptests;
