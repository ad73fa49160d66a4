//! Spectral measures, time-averaged quantum return probabilities and
//! finite-scale fractal exponents.
//!
//! The crate is organised bottom-up:
//!
//! - [`measure`]: atomic measures, declarative specs and ball/Laplace queries
//! - [`operators`]: finite Jacobi matrices and their spectral measures
//! - [`dynamics`]: the time-averaged return probability `W(t)`
//! - [`dimensions`]: correlation dimensions, pointwise exponents, Hölder moduli
//! - [`constructors`]: smoothing, slow, spliced and oscillating measures
//! - [`experiment`]: configuration documents, reports and the named experiments

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constructors;
pub mod dimensions;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod measure;
pub mod numeric;
pub mod operators;
mod serde_float;

pub use error::{Error, Origin, Result, Violation};
pub use measure::{refine, AtomicMeasure, BallQuery, MeasureSpec};
