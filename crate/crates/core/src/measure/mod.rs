//! Finite positive Borel measures on the real line, reduced to atoms.
//!
//! Continuous measures are described declaratively by [`MeasureSpec`] and
//! discretized by [`refine`]; every query downstream runs on the resulting
//! [`AtomicMeasure`]. Balls are open: `B(x; ε) = (x − ε, x + ε)`.

mod atomic;
mod spec;

pub use atomic::{AtomicMeasure, BallQuery, MERGE_RELATIVE};
pub use spec::{refine, refine_with_cap, Density, MeasureSpec, MixturePart, SelfSimilar, Similitude, DEFAULT_ATOM_CAP};
