//! Command-line and HTTP/JSON front-ends for the `datavalor` engine.
//!
//! Both surfaces call the functions in [`ops`], so a valuation printed by
//! the CLI and one returned over HTTP are byte-identical.

pub mod cli;
pub mod error;
pub mod http;
pub mod ops;
pub mod sessions;

pub use http::{router, serve, AppState, Config};
