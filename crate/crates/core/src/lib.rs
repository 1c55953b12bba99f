//! Exact and high-precision evaluation of weighted lp inequalities for
//! decreasing sequences, constant derivation with certificates, and
//! extremal searches for best constants.

pub mod constants;
pub mod error;
pub mod inequality;
pub mod real;
pub mod search;
pub mod sequence;

pub use constants::*;
pub use error::{Error, ErrorKind, Result};
pub use inequality::*;
pub use real::{Precision, Real, Scalar};
pub use search::*;
pub use sequence::*;
