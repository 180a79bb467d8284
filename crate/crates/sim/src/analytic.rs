use crate::config::SimConfig;
use crate::error::{Result, SimError};

/// Mean sojourn time of a G/G/1 queue:
/// `E_Ts + E_Ts rho/(1-rho) (ca2+cs2)/2` with `rho = E_Ts/E_Ta`.
pub fn kingman_delay(e_ts: f64, e_ta: f64, ca2: f64, cs2: f64) -> Result<f64> {
    let rho = e_ts / e_ta;
    if !(rho < 1.0) {
        return Err(SimError::UnstableQueue { rho });
    }
    Ok(e_ts + e_ts * rho / (1.0 - rho) * (ca2 + cs2) / 2.0)
}

/// Lower bound on the mean delay of resolution `r` with deterministic
/// service in the queueing term.
pub fn layered_lb(cfg: &SimConfig, r: usize) -> Result<f64> {
    layered_lb_with(cfg, r, 0.0)
}

/// Service share of the first `r` mini-jobs on the pooled workers plus the
/// waiting time of the full job, with service variability `cs2`.
pub fn layered_lb_with(cfg: &SimConfig, r: usize, cs2: f64) -> Result<f64> {
    cfg.validate()?;
    let ratios = cfg.minijob_ratios()?;
    if r == 0 || r > ratios.len() {
        return Err(SimError::InvalidConfig(format!(
            "resolution {r} outside 1..={}",
            ratios.len()
        )));
    }
    let e_ts = cfg.mean_service_time();
    let wait = kingman_delay(e_ts, 1.0 / cfg.arrival_rate, 1.0, cs2)? - e_ts;
    let share: f64 = ratios[..r].iter().sum();
    Ok(share * e_ts + wait)
}
