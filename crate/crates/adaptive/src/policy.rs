use layercomp_core::nn::LayeredModel;

use crate::error::{AdaptiveError, Result};

/// Keep upgrading while the output lies in `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrayZonePolicy {
    pub low: f64,
    pub high: f64,
    pub threshold: f64,
    /// Resolutions computed before the zone is consulted.
    pub min_resolutions: usize,
}

impl GrayZonePolicy {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        let p = Self {
            low,
            high,
            threshold: 0.5,
            min_resolutions: 1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.low < self.threshold && self.threshold < self.high) {
            return Err(AdaptiveError::InvalidPolicy(format!(
                "need low < threshold < high, got {} / {} / {}",
                self.low, self.threshold, self.high
            )));
        }
        if self.min_resolutions == 0 {
            return Err(AdaptiveError::InvalidPolicy(
                "min_resolutions must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Boundary values count as inside.
    pub fn in_zone(&self, p: f64) -> bool {
        self.low <= p && p <= self.high
    }

    /// Number of resolutions consumed along an output path.
    pub fn stop_point(&self, path: &[f64]) -> usize {
        (self.min_resolutions..=path.len())
            .find(|&r| !self.in_zone(path[r - 1]))
            .unwrap_or(path.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub resolutions_used: usize,
    /// Output after each computed resolution.
    pub outputs: Vec<f64>,
    pub final_output: f64,
    pub prediction: u8,
}

impl TraceEntry {
    pub fn from_path(path: &[f64], policy: &GrayZonePolicy) -> Self {
        let used = policy.stop_point(path);
        let final_output = path[used - 1];
        Self {
            resolutions_used: used,
            outputs: path[..used].to_vec(),
            final_output,
            prediction: u8::from(final_output > policy.threshold),
        }
    }
}

/// Upgrades one sample until its output leaves the gray zone or every
/// resolution has been applied.
pub fn infer_adaptive(
    model: &LayeredModel,
    x: &[f64],
    policy: &GrayZonePolicy,
) -> Result<TraceEntry> {
    policy.validate()?;
    let mut state = model.start(x)?;
    let mut path = Vec::with_capacity(model.resolutions());
    while path.len() < model.resolutions() {
        let p = state.upgrade()?[0];
        path.push(p);
        if path.len() >= policy.min_resolutions && !policy.in_zone(p) {
            break;
        }
    }
    Ok(TraceEntry::from_path(&path, policy))
}
