//! Weighted composition operators on graphs of self-maps, their Cauchy duals,
//! analytic Laurent models and the duality between the two models.

pub mod catalog;
pub mod cli;
pub mod duality;
pub mod error;
pub mod formats;
pub mod graph;
pub mod linalg;
pub mod model;
pub mod operators;

pub use error::{Error, Result};
