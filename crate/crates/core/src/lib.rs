//! Analysis of damped Markov chains P_ε = (1 − ε)P₀ + εD, where D is the
//! rank-one matrix with identical rows d̄ (the PageRank construction).
//!
//! The crate covers structure classification of P₀, stationary laws of P_ε by
//! three independent methods, the power-series expansion of π_ε in ε,
//! coupling-based convergence bounds with a Monte-Carlo check, and the
//! triangular-array limit where ε → 0 and n → ∞ together.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod chain;
pub mod coupling;
pub mod error;
pub mod io;
pub mod kernel;
pub mod report;
pub mod spectral;
pub mod stationary;
pub mod structure;
pub mod triangular;

pub use chain::{
    build_damped_matrix, matrix_power, propagate, trajectory, tv_distance, DampedChain,
    DampingVector, Distribution, StochasticMatrix, DEFAULT_ROW_TOL,
};
pub use error::{ChainError, Result};
