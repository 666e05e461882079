//! Canonical-ensemble point processes on the periodic box.

// Negated comparisons reject NaN inputs along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alpha_linalg;
pub mod error;
pub mod fredholm;
pub mod kernels;
pub mod processes;
pub mod quadrature;
pub mod sampler;
pub mod symgroup;
pub mod thermo;

pub use error::{Error, Result};
