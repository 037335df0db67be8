//! Dataset valuation: metric catalog, screening trees, normalization,
//! ANP weighting and the value calculation built on them.

// `!(x > 0.0)` is how NaN gets rejected; index loops read better in matrix code
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod anp;
pub mod catalog;
pub mod error;
pub mod normalization;
pub mod scenario;
pub mod screening;
pub mod valuation;

pub use error::{Error, ErrorKind, Result};
