//! Assembly sequence generation from assembled part models.
//!
//! The pipeline voxelises each part, extracts three part-by-part relation
//! matrices (interference-free directions, insertion, degree of constraint),
//! and searches assembly orders with a two-objective genetic algorithm that
//! trades the insertion condition against the constraint-state transition
//! difficulty of each placement.

pub mod deformables;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod io;
pub mod moga;
pub mod pipeline;
pub mod relations;
pub mod sequence;
pub mod verify;

pub use error::{Error, Result};

#[cfg(test)]
mod testutil;
