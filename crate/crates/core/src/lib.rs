// `!(x > 0.0)` is how validation rejects NaN along with non-positive values;
// index loops over parallel per-subgrid arrays read better than zips here.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod error;
pub mod gecm;
pub mod ilc;
pub mod lti;
pub mod report;
pub mod sim;
pub mod subgrid;

pub use error::{Error, Result};
