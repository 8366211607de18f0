//! Discrete bilinear Fourier multipliers on a periodic grid.
//!
//! The crate evaluates `B_m(f,g)(x) = ∫∫ f̂(ξ)ĝ(η)m(ξ,η)e^{2πi(ξ+η)x}dξdη` and its
//! relatives (one-variable symbols, kernel operators, the bilinear Hilbert
//! transform and the bilinear fractional integral), checks the symmetry laws they
//! satisfy, and estimates operator norms from below.

pub mod engine;
pub mod error;
pub mod normlab;
pub mod operators;
pub mod signal;
pub mod symbol;
pub mod symmetry;

pub use error::{Error, Result};
pub use num_complex::Complex64;
