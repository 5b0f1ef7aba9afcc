//! Security analysis of a weak-measurement based QKD protocol under
//! collective attacks, in a first-order and an all-orders treatment of the
//! pointer, with a brute-force Monte Carlo oracle.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod discrimination;
pub mod error;
pub mod montecarlo;
pub mod protocol;
pub mod qmath;
pub mod quad;
pub mod security;
pub mod table;
pub mod weakvalues;

pub use error::{Error, Result};
