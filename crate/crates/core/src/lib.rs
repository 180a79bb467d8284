//! Successive-refinement computation: results are released in layers of
//! increasing resolution, each layer refining the previous one by adding the
//! next most significant bit-plane products.

pub mod error;
pub mod linear;
pub mod matrix;
pub mod nn;
pub mod numerics;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use numerics::{partition, schedule, LayeredMatrix, PartitioningVector, ResolutionSchedule};
