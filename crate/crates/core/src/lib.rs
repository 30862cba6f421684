//! A loss-function laboratory for deep classifiers.
//!
//! * [`losses`]: twelve classification losses with analytic gradients, plus
//!   residual checks of the identities relating them.
//! * [`nn`] and [`optim`]: a small rectifier MLP with inverted dropout and
//!   hand-written backpropagation, trained with Adam.
//! * [`data`]: checkerboard, spiral and random-label toys, MNIST IDX loading,
//!   input and label noise.
//! * [`harness`]: training loops, learning-speed metric, noise sweeps and
//!   result grids written as CSV.
//!
//! All values are `f64` and all randomness flows from explicit seeds through
//! [`numerics::Rng`].

pub mod data;
pub mod error;
pub mod harness;
pub mod losses;
pub mod nn;
pub mod numerics;
pub mod optim;

pub use error::{Error, Result};
