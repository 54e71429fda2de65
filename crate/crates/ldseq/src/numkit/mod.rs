//! Dense linear algebra, activations, initialization, and deterministic
//! randomness for the rest of the crate.
//!
//! Everything here is a pure function over immutable inputs and safe to call
//! from any thread. [`Rng`] is single-owner: concurrent use requires explicit
//! [`Rng::split`].

mod matrix;
mod ops;
mod rng;

pub use matrix::{add_assign, axpy, hadamard_assign, matmul, Matrix, Vector};
pub use ops::{
    dropout_mask, relu, sigmoid, sigmoid_scalar, softmax, tanh, xavier_init, Activation,
};
pub use rng::Rng;
