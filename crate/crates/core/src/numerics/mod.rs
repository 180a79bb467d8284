//! Bit-plane partitioning and the resolution schedule.

mod partition;
mod schedule;

pub use partition::{partition, partition_scalar, LayeredMatrix, PartitioningVector, ScalarParts};
pub use schedule::{schedule, ResolutionSchedule};
