//! Dense row-major numeric kernel: matrices, nonlinearities, reductions,
//! the seeded generator, and the central-difference gradient oracle.

mod gradcheck;
mod matrix;
mod ops;
mod rng;

pub use gradcheck::{finite_difference_gradient, max_relative_error, relative_error};
pub use matrix::Matrix;
pub use ops::{
    axpy, dot, log_softmax, mat_vec_acc, outer_acc, relu, relu_in_place, sigmoid, softmax,
    tanh, vec_mat, vec_mat_acc,
};
pub use rng::{Rng, RngState, RNG_ALGORITHM};
