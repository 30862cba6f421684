//! Dense arrays, probability transforms, the crate RNG and the
//! finite-difference gradient oracle.

mod dense;
mod gradcheck;
mod prob;
mod rng;

pub use dense::{argmax, Dense2};
pub use gradcheck::{finite_diff_grad, max_relative_error, relative_error, DEFAULT_STEP};
pub use prob::{
    clamped_ln, sigmoid, sigmoid_rows, sigmoid_scalar, softmax, softmax_in_place, softmax_rows,
    PROB_FLOOR,
};
pub use rng::Rng;
