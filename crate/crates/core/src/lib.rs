#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod body;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod integrate;
pub mod scenarios;
pub mod tensor;
pub mod validate;

pub use error::{Error, Result};
