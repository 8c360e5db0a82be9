//! Projector/nilpotent decomposition of complex matrices, classification into
//! analogous families, family enumeration per dimension, and holomorphic
//! functions of one or several matrices through spectral mapping formulas.
//!
//! Everything runs in one of two scalar modes: exact Gaussian-rational
//! arithmetic (structure decisions are exact, no rounding) or complex doubles
//! with explicit tolerances. Heavy inner sums evaluate their independent
//! terms in parallel when the default `parallel` feature is on; every
//! operation also has a `_seq` twin with bit-identical output.

pub mod analogy;
pub mod asg;
pub mod calculus;
pub mod document;
pub mod enumeration;
mod exec;
pub mod hybrid;
pub mod jordan;
pub mod matrix;
pub mod sample;
pub mod scalar;

pub use matrix::{MatrixC, MatrixError};
pub use scalar::{Scalar, ScalarMode, Tolerance};
