use std::fmt;
use std::str::FromStr;

use layercomp_core::linear::cost_ratio;
use layercomp_core::{schedule, PartitioningVector};

use crate::error::{Result, SimError};

/// How a mini-job's tasks are handed to workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheduling {
    /// Each worker receives a share of the tasks proportional to its rate
    /// when the mini-job is released.
    #[default]
    RateProportional,
    /// Idle workers take the next pending task from a shared pool.
    GreedyPull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ServiceModel {
    #[default]
    Exponential,
    /// Every task takes exactly its mean service time.
    Deterministic,
}

/// Whether each job is computed in layers or in a single mini-job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimMode {
    #[default]
    Layered,
    OneShot,
}

macro_rules! named_enum {
    ($ty:ident { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $name),+ })
            }
        }

        impl FromStr for $ty {
            type Err = SimError;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($name => Ok(Self::$variant),)+
                    other => Err(SimError::InvalidConfig(format!(
                        concat!("unknown ", stringify!($ty), " `{}`"), other
                    ))),
                }
            }
        }
    };
}

named_enum!(Scheduling { RateProportional => "proportional", GreedyPull => "pull" });
named_enum!(ServiceModel { Exponential => "exponential", Deterministic => "deterministic" });
named_enum!(SimMode { Layered => "layered", OneShot => "oneshot" });

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Operation rate of each worker.
    pub worker_rates: Vec<f64>,
    /// Poisson job arrival rate.
    pub arrival_rate: f64,
    pub tasks_per_job: usize,
    /// Operation units of one full-precision task.
    pub job_complexity: f64,
    pub pv_w: PartitioningVector,
    pub pv_x: PartitioningVector,
    /// Computation-time budget of a job, measured from its start.
    pub deadline: Option<f64>,
    pub num_jobs: usize,
    pub seed: u64,
    pub mode: SimMode,
    pub scheduling: Scheduling,
    pub service: ServiceModel,
    /// Extra tasks issued per mini-job; the first `tasks_per_job` results
    /// complete it.
    pub redundancy: usize,
}

impl SimConfig {
    pub fn new(
        worker_rates: Vec<f64>,
        arrival_rate: f64,
        tasks_per_job: usize,
        job_complexity: f64,
        pv_w: PartitioningVector,
        pv_x: PartitioningVector,
    ) -> Self {
        Self {
            worker_rates,
            arrival_rate,
            tasks_per_job,
            job_complexity,
            pv_w,
            pv_x,
            deadline: None,
            num_jobs: 1000,
            seed: 0,
            mode: SimMode::Layered,
            scheduling: Scheduling::default(),
            service: ServiceModel::default(),
            redundancy: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if self.worker_rates.is_empty() {
            return bad("at least one worker is required".into());
        }
        if let Some(mu) = self
            .worker_rates
            .iter()
            .find(|m| !(m.is_finite() && **m > 0.0))
        {
            return bad(format!("worker rate {mu} must be positive"));
        }
        if !(self.arrival_rate.is_finite() && self.arrival_rate > 0.0) {
            return bad(format!(
                "arrival rate {} must be positive",
                self.arrival_rate
            ));
        }
        if self.tasks_per_job == 0 {
            return bad("tasks_per_job must be at least 1".into());
        }
        if !(self.job_complexity.is_finite() && self.job_complexity > 0.0) {
            return bad(format!(
                "job complexity {} must be positive",
                self.job_complexity
            ));
        }
        if let Some(d) = self.deadline {
            if d.is_nan() || d < 0.0 {
                return bad(format!("deadline {d} must be non-negative"));
            }
        }
        schedule(&self.pv_w, &self.pv_x)?;
        Ok(())
    }

    /// Number of mini-jobs per job in layered mode.
    pub fn resolutions(&self) -> usize {
        self.pv_w.depth() * self.pv_x.depth()
    }

    /// Share of the full job's work spent on each mini-job for the current mode.
    pub fn minijob_ratios(&self) -> Result<Vec<f64>> {
        match self.mode {
            SimMode::OneShot => Ok(vec![1.0]),
            SimMode::Layered => (1..=self.resolutions())
                .map(|r| Ok(cost_ratio(&self.pv_w, &self.pv_x, r)?))
                .collect(),
        }
    }

    pub fn total_rate(&self) -> f64 {
        self.worker_rates.iter().sum()
    }

    /// Mean service time of a whole job on the pooled workers.
    pub fn mean_service_time(&self) -> f64 {
        self.tasks_per_job as f64 * self.job_complexity / self.total_rate()
    }
}
