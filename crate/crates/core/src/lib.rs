//! Graph signal processing with diffusion-map shift operators.
//!
//! The crate is `no_std` (with `alloc`). It covers graph construction,
//! diffusion-map embeddings, shift operators and spectral filters,
//! smoothness functionals, graph learning and the benchmark grid.
#![no_std]
// Matrix code indexes by position; NaN-rejecting guards are negated comparisons.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod diffusion;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod gso;
pub mod learning;
pub mod linalg;
pub mod metrics;
pub mod variation;

pub use error::{Error, Result};
pub use graph::{build_graph, Graph};
pub use linalg::{Matrix, Vector};
