use crate::error::{Error, Result};
use crate::numerics::PartitioningVector;

/// Inputs to the network precision bound and complexity gap.
#[derive(Debug, Clone, PartialEq)]
pub struct NnBoundInputs {
    /// Largest Jacobian magnitude of the output map.
    pub j_max: f64,
    /// `[n_0, .., n_{L+1}]`; the last entry is the output width `m`.
    pub widths: Vec<usize>,
    pub pv_x: PartitioningVector,
    /// One vector per weight layer `0..=L`.
    pub pv_w: Vec<PartitioningVector>,
    /// Highest bit position reached by any `|H(l)|`.
    pub h_max: i32,
    pub h_min: i32,
}

impl NnBoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.j_max > 0.0) {
            return Err(Error::InvalidActivation(format!(
                "j_max must be positive, got {}",
                self.j_max
            )));
        }
        if self.h_max < self.h_min {
            return Err(Error::InvalidPartitioning(vec![self.h_max, self.h_min]));
        }
        if self.widths.len() != self.pv_w.len() + 1 {
            return Err(Error::ShapeMismatch {
                expected: format!(
                    "{} widths for {} weight layers",
                    self.pv_w.len() + 1,
                    self.pv_w.len()
                ),
                actual: format!("{}", self.widths.len()),
            });
        }
        if let Some(p) = self.pv_w.iter().find(|p| p.depth() != self.pv_x.depth()) {
            return Err(Error::MismatchedDepth {
                left: self.pv_x.depth(),
                right: p.depth(),
            });
        }
        Ok(())
    }

    pub fn resolutions(&self) -> usize {
        self.pv_x.depth()
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().expect("validated widths")
    }

    fn check_r(&self, r: usize) -> Result<()> {
        self.validate()?;
        if r == 0 || r > self.resolutions() {
            return Err(Error::IndexOutOfRange {
                index: r,
                depth: self.resolutions(),
            });
        }
        Ok(())
    }
}

/// Precision bound at resolution `r` propagated through all weight layers.
pub fn nn_delta_bound(b: &NnBoundInputs, r: usize) -> Result<f64> {
    nn_delta_bound_through(b, r, b.pv_w.len())
}

/// Precision bound at resolution `r` propagated through the first `layers`
/// weight layers:
///
/// ```text
/// 2^{Q_r} J m prod_{i<layers} 2^{P0(i)} n_i
///   + sum_{i<layers} 2^{P_r(i)} J m 2^{h_max} n_i prod_{i<j<layers} 2^{P0(j)} n_j
/// ```
pub fn nn_delta_bound_through(b: &NnBoundInputs, r: usize, layers: usize) -> Result<f64> {
    b.check_r(r)?;
    if layers == 0 || layers > b.pv_w.len() {
        return Err(Error::IndexOutOfRange {
            index: layers,
            depth: b.pv_w.len(),
        });
    }
    let jm = b.j_max * b.output_width() as f64;
    let gain = |i: usize| 2f64.powi(b.pv_w[i].top()) * b.widths[i] as f64;
    let input_term = 2f64.powi(b.pv_x.exponent(r)) * jm * (0..layers).map(gain).product::<f64>();
    let weight_terms: f64 = (0..layers)
        .map(|i| {
            let downstream: f64 = (i + 1..layers).map(gain).product();
            2f64.powi(b.pv_w[i].exponent(r))
                * jm
                * 2f64.powi(b.h_max)
                * b.widths[i] as f64
                * downstream
        })
        .sum();
    Ok(input_term + weight_terms)
}

/// The per-layer bracket `0.5 P0 - 1.5 P_{r-1} + 2 P_r - P_R`.
pub fn cost_gap_bracket(pv: &PartitioningVector, r: usize) -> f64 {
    0.5 * pv.top() as f64 - 1.5 * pv.exponent(r - 1) as f64 + 2.0 * pv.exponent(r) as f64
        - pv.bottom() as f64
}

/// Complexity margin of resolution `r` relative to one-shot evaluation:
/// `sum_l n_{l+1} n_l (h_max - h_min) bracket_l(r)`.
pub fn nn_cost_gap(b: &NnBoundInputs, r: usize) -> Result<f64> {
    b.check_r(r)?;
    let bits = (b.h_max - b.h_min) as f64;
    Ok(b.pv_w
        .iter()
        .enumerate()
        .map(|(l, pv)| (b.widths[l + 1] * b.widths[l]) as f64 * bits * cost_gap_bracket(pv, r))
        .sum())
}
