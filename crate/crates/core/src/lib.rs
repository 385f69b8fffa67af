//! Subnetwork discovery and transfer for small decoder-only transformers.
//!
//! Everything in this crate is pure computation over heap-allocated `f32`
//! buffers: a reverse-mode autodiff tape, the transformer itself, the
//! continuous-sparsification mask machinery, modular-arithmetic dataset
//! generation, and the transplantation/baseline logic. No IO, no threads,
//! no global state; a fixed seed gives bit-identical results run to run.
//! File formats, the experiment harness and the CLI live in the companion
//! `subnet-cli` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod model;
pub mod numerics;
pub mod sparsify;
pub mod tasks;
pub mod train;
pub mod transfer;

pub use numerics::array::Array;
pub use numerics::rng::Rng;
