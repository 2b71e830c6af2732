//! Minimal dense autodiff: matrices, a recording tape, parameter storage and
//! the Adam optimizer.

mod adam;
mod matrix;
mod params;
mod tape;

pub use adam::{Adam, AdamConfig};
pub use matrix::Matrix;
pub use params::{glorot, seeded_rng, uniform, Grads, ParamId, ParamStore};
pub use tape::{sigmoid, softmax, Tape, Var, PROB_FLOOR};
