//! Configuration documents, reports and the named experiments.
//!
//! A run validates its whole document before computing anything, so an
//! invalid configuration never leaves partial outputs behind. Reports carry
//! no timing information and are byte-identical across reruns with the same
//! document and seed.

mod config;
mod report;
mod run;

pub use config::*;
pub use report::{Check, Outcome, Relation, Report, Resources, Table, TableRef};
pub use run::{arcsine_cdf, arcsine_distance, run, sandwich_samples, SandwichSample};
