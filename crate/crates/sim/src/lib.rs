//! Discrete-event simulation of a master node streaming matrix-vector jobs
//! to heterogeneous workers, either one shot or one resolution at a time.

mod analytic;
mod config;
mod engine;
mod error;
mod metrics;

pub use analytic::{kingman_delay, layered_lb, layered_lb_with};
pub use config::{Scheduling, ServiceModel, SimConfig, SimMode};
pub use engine::{proportional_split, simulate, JobRecord};
pub use error::{Result, SimError};
pub use metrics::{delay_stats, success_curve, success_rate, DelayStats, SuccessPoint};
