use crate::config::{SimConfig, SimMode};
use crate::engine::{simulate, JobRecord};
use crate::error::{Result, SimError};

/// Fraction of jobs whose resolution `r` result was delivered.
pub fn success_rate(records: &[JobRecord], r: usize) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|j| j.delay(r).is_some()).count() as f64 / records.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessPoint {
    pub deadline: f64,
    /// Layered success rate for `r = 1..=R`.
    pub layered: Vec<f64>,
    pub one_shot: f64,
}

/// Simulates the layered and one-shot streams once per deadline.
pub fn success_curve(cfg: &SimConfig, deadlines: &[f64]) -> Result<Vec<SuccessPoint>> {
    deadlines
        .iter()
        .map(|&d| {
            let deadline = d.is_finite().then_some(d);
            let layered_cfg = SimConfig {
                deadline,
                mode: SimMode::Layered,
                ..cfg.clone()
            };
            let one_cfg = SimConfig {
                mode: SimMode::OneShot,
                ..layered_cfg.clone()
            };
            let layered = simulate(&layered_cfg)?;
            let one = simulate(&one_cfg)?;
            Ok(SuccessPoint {
                deadline: d,
                layered: (1..=cfg.resolutions())
                    .map(|r| success_rate(&layered, r))
                    .collect(),
                one_shot: success_rate(&one, 1),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std_dev: f64,
    pub bin_width: f64,
    /// Counts of bins `[k w, (k+1) w)` starting at `k = 0`.
    pub histogram: Vec<usize>,
}

pub fn delay_stats(records: &[JobRecord], r: usize, bin_width: f64) -> Result<DelayStats> {
    if !(bin_width > 0.0) {
        return Err(SimError::InvalidConfig(format!(
            "bin width {bin_width} must be positive"
        )));
    }
    let values: Vec<f64> = records.iter().filter_map(|j| j.delay(r)).collect();
    if values.is_empty() {
        return Err(SimError::NoCompletedJobs(r));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mut histogram = Vec::new();
    for v in &values {
        let k = (v / bin_width).floor().max(0.0) as usize;
        if k >= histogram.len() {
            histogram.resize(k + 1, 0);
        }
        histogram[k] += 1;
    }
    Ok(DelayStats {
        count: values.len(),
        mean,
        std_dev: var.sqrt(),
        bin_width,
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(delays: &[Option<f64>]) -> JobRecord {
        JobRecord {
            arrival: 0.0,
            start: Some(0.0),
            delays: delays.to_vec(),
            terminated: delays.iter().any(Option::is_none),
        }
    }

    #[test]
    fn constant_delays_have_zero_spread() {
        let recs = vec![rec(&[Some(2.5)]); 4];
        let s = delay_stats(&recs, 1, 1.0).unwrap();
        assert_eq!((s.count, s.mean, s.std_dev), (4, 2.5, 0.0));
        assert_eq!(s.histogram, vec![0, 0, 4]);
    }

    #[test]
    fn empty_records_are_an_error() {
        assert!(matches!(
            delay_stats(&[], 1, 1.0),
            Err(SimError::NoCompletedJobs(1))
        ));
        assert!(delay_stats(&[rec(&[None])], 1, 1.0).is_err());
    }

    #[test]
    fn rate_counts_delivered_results() {
        let recs = vec![rec(&[Some(1.0), Some(2.0)]), rec(&[Some(1.0), None])];
        assert_eq!(success_rate(&recs, 1), 1.0);
        assert_eq!(success_rate(&recs, 2), 0.5);
    }
}
