pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod encoders;
pub mod error;
pub mod fusion;
pub mod hategraph;
pub mod model;
pub mod nn;
mod par;
pub mod pipeline;
pub mod training;

pub use error::{Error, Result};
