//! Scenario runner, figure datasets and the acceptance battery for
//! `ewspec-core`.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod figures;
pub mod output;
pub mod pipeline;
pub mod scenario;
pub mod validate;
