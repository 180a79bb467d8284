//! Layered-resolution matrix-vector multiplication.
//!
//! `W` and `X` are partitioned into `d` components each, and the `R = d^2`
//! component products `W_i X_j 2^{P_i + Q_j}` are accumulated one per
//! resolution in schedule order. The running sum is kept as an exact
//! integer at the common scale `2^{Pd + Qd}`.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numerics::{partition, schedule, LayeredMatrix, PartitioningVector, ResolutionSchedule};

#[derive(Debug, Clone)]
pub struct LayeredLinearJob {
    weights: LayeredMatrix,
    input: LayeredMatrix,
    schedule: ResolutionSchedule,
    current: usize,
    omega: Vec<i128>,
    base_exponent: i32,
}

impl LayeredLinearJob {
    pub fn new(
        w: &Matrix,
        x: &[f64],
        pv_w: &PartitioningVector,
        pv_x: &PartitioningVector,
    ) -> Result<Self> {
        if w.cols() != x.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("input of length {}", w.cols()),
                actual: format!("length {}", x.len()),
            });
        }
        let schedule = schedule(pv_w, pv_x)?;
        let bits =
            pv_w.span() as u32 + pv_x.span() as u32 + usize::BITS - w.cols().leading_zeros() + 1;
        if bits > 127 {
            return Err(Error::AccumulatorOverflow { bits });
        }
        Ok(Self {
            weights: partition(w, pv_w)?,
            input: partition(&Matrix::column(x), pv_x)?,
            schedule,
            current: 0,
            omega: vec![0; w.rows()],
            base_exponent: pv_w.bottom() + pv_x.bottom(),
        })
    }

    pub fn resolutions(&self) -> usize {
        self.schedule.len()
    }

    pub fn current_resolution(&self) -> usize {
        self.current
    }

    pub fn is_complete(&self) -> bool {
        self.current == self.resolutions()
    }

    pub fn schedule(&self) -> &ResolutionSchedule {
        &self.schedule
    }

    pub fn weights(&self) -> &LayeredMatrix {
        &self.weights
    }

    pub fn input(&self) -> &LayeredMatrix {
        &self.input
    }

    /// Current approximation as integers at scale `2^exponent`.
    pub fn omega_scaled(&self) -> (&[i128], i32) {
        (&self.omega, self.base_exponent)
    }

    pub fn omega(&self) -> Vec<f64> {
        let scale = 2f64.powi(self.base_exponent);
        self.omega.iter().map(|&v| v as f64 * scale).collect()
    }

    /// Integer product `W_i X_j` for the next scheduled pair, before scaling.
    fn component_product(&self, i: usize, j: usize) -> Vec<i128> {
        let w = &self.weights.component(i).expect("scheduled index");
        let x = &self.input.component(j).expect("scheduled index");
        let cols = self.weights.cols();
        (0..self.weights.rows())
            .map(|r| {
                w[r * cols..(r + 1) * cols]
                    .iter()
                    .zip(x.iter())
                    .map(|(&a, &b)| a as i128 * b as i128)
                    .sum()
            })
            .collect()
    }

    /// Applies resolution `current + 1`.
    pub fn upgrade(&mut self) -> Result<()> {
        if self.is_complete() {
            return Err(Error::AlreadyComplete(self.resolutions()));
        }
        self.current += 1;
        let (i, j) = self.schedule.pair(self.current);
        let shift = self.schedule.exponent_sum(self.current) - self.base_exponent;
        let product = self.component_product(i, j);
        for (acc, p) in self.omega.iter_mut().zip(product) {
            *acc += p << shift;
        }
        Ok(())
    }

    /// Runs every remaining upgrade, returning `Omega_r` after each one.
    pub fn run(&mut self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.resolutions() - self.current);
        while self.upgrade().is_ok() {
            out.push(self.omega());
        }
        out
    }
}

fn check_resolution(
    pv_w: &PartitioningVector,
    pv_x: &PartitioningVector,
    r: usize,
) -> Result<ResolutionSchedule> {
    let s = schedule(pv_w, pv_x)?;
    if r == 0 || r > s.len() {
        return Err(Error::IndexOutOfRange {
            index: r,
            depth: s.len(),
        });
    }
    Ok(s)
}

/// `2^{P0+Qd} + 2^{Pd+Q0} + 2^{Pd+Qd}`: bound on the truncation residual of
/// a scalar product.
pub fn residual_bound(pv_w: &PartitioningVector, pv_x: &PartitioningVector) -> f64 {
    let (p0, pd) = (pv_w.top(), pv_w.bottom());
    let (q0, qd) = (pv_x.top(), pv_x.bottom());
    2f64.powi(p0 + qd) + 2f64.powi(pd + q0) + 2f64.powi(pd + qd)
}

/// Precision bound at resolution `r` for inner dimension `n`:
/// `n * (delta + (R - r) 2^{P_{gamma_r(1)} + Q_{gamma_r(2)}})`.
///
/// The tail term assumes every unapplied product is no larger than the
/// current one, which holds when all components are single bits. With wider
/// components use [`remainder_bound`].
pub fn delta_bound(
    pv_w: &PartitioningVector,
    pv_x: &PartitioningVector,
    r: usize,
    n: usize,
) -> Result<f64> {
    let s = check_resolution(pv_w, pv_x, r)?;
    let tail = (s.len() - r) as f64 * 2f64.powi(s.exponent_sum(r));
    Ok(n as f64 * (residual_bound(pv_w, pv_x) + tail))
}

/// Worst-case bound at resolution `r` that accounts for component widths:
/// `n * (delta + sum_{k>r} (2^{gap_i}-1)(2^{gap_j}-1) 2^{P_i+Q_j})`.
pub fn remainder_bound(
    pv_w: &PartitioningVector,
    pv_x: &PartitioningVector,
    r: usize,
    n: usize,
) -> Result<f64> {
    let s = check_resolution(pv_w, pv_x, r)?;
    let tail: f64 = (r + 1..=s.len())
        .map(|k| {
            let (i, j) = s.pair(k);
            let wmax = 2f64.powi(pv_w.gap(i)) - 1.0;
            let xmax = 2f64.powi(pv_x.gap(j)) - 1.0;
            wmax * xmax * 2f64.powi(s.exponent_sum(k))
        })
        .sum();
    Ok(n as f64 * (residual_bound(pv_w, pv_x) + tail))
}

/// Bit-operation cost of resolution `r` for a `u x v` matrix:
/// `u v (P_{i-1} - P_i)(Q_{j-1} - Q_j)` with `(i, j)` the scheduled pair.
pub fn layered_cost(
    pv_w: &PartitioningVector,
    pv_x: &PartitioningVector,
    r: usize,
    u: usize,
    v: usize,
) -> Result<u64> {
    let s = check_resolution(pv_w, pv_x, r)?;
    let (i, j) = s.pair(r);
    Ok((u * v) as u64 * pv_w.gap(i) as u64 * pv_x.gap(j) as u64)
}

/// `u v (P0 - Pd)(Q0 - Qd)`.
pub fn one_shot_cost(
    pv_w: &PartitioningVector,
    pv_x: &PartitioningVector,
    u: usize,
    v: usize,
) -> u64 {
    (u * v) as u64 * pv_w.span() as u64 * pv_x.span() as u64
}

/// Fraction of the one-shot cost spent on resolution `r`.
pub fn cost_ratio(pv_w: &PartitioningVector, pv_x: &PartitioningVector, r: usize) -> Result<f64> {
    Ok(layered_cost(pv_w, pv_x, r, 1, 1)? as f64 / one_shot_cost(pv_w, pv_x, 1, 1) as f64)
}

/// Folds an affine map into a linear one: `W' = [W B]`, `X' = [X; 1]`.
pub fn affine_extend(w: &Matrix, b: &[f64], x: &[f64]) -> Result<(Matrix, Vec<f64>)> {
    if b.len() != w.rows() || x.len() != w.cols() {
        return Err(Error::ShapeMismatch {
            expected: format!(
                "bias of length {} and input of length {}",
                w.rows(),
                w.cols()
            ),
            actual: format!("bias {} and input {}", b.len(), x.len()),
        });
    }
    let rows: Vec<Vec<f64>> = (0..w.rows())
        .map(|r| {
            let mut row = w.row(r).to_vec();
            row.push(b[r]);
            row
        })
        .collect();
    let mut x_ext = x.to_vec();
    x_ext.push(1.0);
    Ok((Matrix::from_rows(&rows)?, x_ext))
}
