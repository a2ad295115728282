#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attract;
pub mod basin;
pub mod cli;
pub mod error;
pub mod integrate;
pub mod invariants;
pub mod model;
pub mod qpsolve;
pub mod region;
pub mod report;
pub mod svg;

pub use error::{Error, Result};
