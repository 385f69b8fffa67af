//! Dense `f32` arrays, a reverse-mode autodiff tape, the two optimizers
//! used by the training loops, and a deterministic RNG.

pub mod array;
pub mod autodiff;
pub mod kernels;
pub mod optim;
pub mod rng;

pub use array::{Array, ShapeError};
pub use autodiff::{Tape, Var};
pub use optim::{Optimizer, OptimizerError, OptimizerKind};
pub use rng::Rng;
