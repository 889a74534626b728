//! Numeric foundation: tensors, deterministic RNG, softmax/entropy, Adam,
//! and finite-difference gradient checking.

pub mod adam;
pub mod gradcheck;
pub mod ops;
pub mod rng;
pub mod tensor;

pub use adam::AdamState;
pub use gradcheck::check_gradient;
pub use ops::{argmax, entropy, softmax, softmax_excluded};
pub use rng::{fnv1a64, RngState};
pub use tensor::{dot, Tensor};
