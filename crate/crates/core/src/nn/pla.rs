//! Piecewise-linear activations and their exact delta form.

use crate::error::{Error, Result};

/// `sigma(x) = slope_k x + intercept_k` on region `k`.
///
/// Region `k` is `[breakpoints[k-1], breakpoints[k])`, with the first and
/// last regions unbounded. A breakpoint belongs to the region on its right.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    intercepts: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<f64>, intercepts: Vec<f64>) -> Result<Self> {
        if slopes.len() != breakpoints.len() + 1 || intercepts.len() != slopes.len() {
            return Err(Error::InvalidActivation(format!(
                "{} breakpoints need {} slope/intercept pairs, got {}/{}",
                breakpoints.len(),
                breakpoints.len() + 1,
                slopes.len(),
                intercepts.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite())
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidActivation(
                "breakpoints must be finite and strictly ascending".into(),
            ));
        }
        if let Some(s) = slopes.iter().find(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(Error::InvalidActivation(format!(
                "slope {s} outside [-1, 1]"
            )));
        }
        for (k, &b) in breakpoints.iter().enumerate() {
            let left = slopes[k] * b + intercepts[k];
            let right = slopes[k + 1] * b + intercepts[k + 1];
            let tol = 1e-12 * left.abs().max(right.abs()).max(1.0);
            if (left - right).abs() > tol {
                return Err(Error::InvalidActivation(format!(
                    "discontinuous at {b}: {left} vs {right}"
                )));
            }
        }
        Ok(Self {
            breakpoints,
            slopes,
            intercepts,
        })
    }

    pub fn identity() -> Self {
        Self {
            breakpoints: Vec::new(),
            slopes: vec![1.0],
            intercepts: vec![0.0],
        }
    }

    pub fn relu() -> Self {
        Self::leaky_relu(0.0)
    }

    /// `max(x, beta x)` for `0 <= beta <= 1`.
    pub fn leaky_relu(beta: f64) -> Self {
        Self {
            breakpoints: vec![0.0],
            slopes: vec![beta, 1.0],
            intercepts: vec![0.0, 0.0],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    pub fn num_regions(&self) -> usize {
        self.slopes.len()
    }

    pub fn region(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= t)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.region(t);
        self.slopes[k] * t + self.intercepts[k]
    }

    /// `sigma^t(dt)` such that `sigma(t + dt) = sigma(t) + sigma^t(dt)`.
    pub fn delta(&self, t: f64, dt: f64) -> f64 {
        let j = self.region(t);
        let i = self.region(t + dt);
        if i == j {
            self.slopes[i] * dt
        } else {
            (self.slopes[i] - self.slopes[j]) * t + self.slopes[i] * dt + self.intercepts[i]
                - self.intercepts[j]
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

const SATURATION: f64 = 6.0;

/// Knot density for the sigmoid approximation: `sqrt|sigma''| + 0.02`,
/// which spreads chord error evenly across segments.
fn knot_density(x: f64) -> f64 {
    let s = sigmoid(x);
    (s * (1.0 - s) * (1.0 - 2.0 * s)).abs().sqrt() + 0.02
}

/// Positions `x` in `[0, 6]` where the normalised cumulative density reaches
/// each of `targets` (ascending, in `[0, 1]`).
fn invert_density(targets: &[f64]) -> Vec<f64> {
    const STEPS: usize = 12_000;
    let h = SATURATION / STEPS as f64;
    let mut cdf = Vec::with_capacity(STEPS + 1);
    cdf.push(0.0);
    for k in 0..STEPS {
        let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
        cdf.push(cdf[k] + 0.5 * h * (knot_density(a) + knot_density(b)));
    }
    let total = cdf[STEPS];
    targets
        .iter()
        .map(|&q| {
            if q <= 0.0 {
                return 0.0;
            }
            if q >= 1.0 {
                return SATURATION;
            }
            let goal = q * total;
            let k = cdf.partition_point(|&c| c < goal).clamp(1, STEPS);
            let frac = (goal - cdf[k - 1]) / (cdf[k] - cdf[k - 1]);
            (k as f64 - 1.0 + frac) * h
        })
        .collect()
}

/// Continuous piecewise-linear sigmoid with `segments` pieces on `[-6, 6]`,
/// symmetric about `(0, 0.5)` and flat at 0 and 1 outside that interval.
pub fn make_sigmoid_pla(segments: usize) -> Result<PiecewiseLinear> {
    if segments < 3 {
        return Err(Error::InvalidActivation(format!(
            "sigmoid approximation needs at least 3 segments, got {segments}"
        )));
    }
    // Knots on the non-negative half; the rest are mirrored.
    let half: Vec<f64> = (0..=segments)
        .map(|k| 2.0 * k as f64 / segments as f64 - 1.0)
        .filter(|&q| q >= 0.0)
        .collect();
    let positive = invert_density(&half);
    let value = |x: f64| if x >= SATURATION { 1.0 } else { sigmoid(x) };

    let mut knots: Vec<(f64, f64)> = positive
        .iter()
        .rev()
        .filter(|&&x| x > 0.0)
        .map(|&x| (-x, 1.0 - value(x)))
        .collect();
    knots.extend(
        positive
            .iter()
            .map(|&x| (x, if x == 0.0 { 0.5 } else { value(x) })),
    );

    let mut breakpoints = Vec::with_capacity(knots.len());
    let mut slopes = vec![0.0];
    let mut intercepts = vec![0.0];
    for pair in knots.windows(2) {
        let ((x0, y0), (x1, y1)) = (pair[0], pair[1]);
        let slope = (y1 - y0) / (x1 - x0);
        breakpoints.push(x0);
        slopes.push(slope);
        // anchored at the knot nearer the origin so the value at 0 is exact
        let intercept = if x0.abs() == x1.abs() {
            0.5 * (y0 + y1)
        } else if x0.abs() < x1.abs() {
            y0 - slope * x0
        } else {
            y1 - slope * x1
        };
        intercepts.push(intercept);
    }
    breakpoints.push(SATURATION);
    slopes.push(0.0);
    intercepts.push(1.0);
    PiecewiseLinear::new(breakpoints, slopes, intercepts)
}

/// Largest `|pla(x) - sigmoid(x)|` over an even grid on `[lo, hi]`.
pub fn max_deviation_from_sigmoid(pla: &PiecewiseLinear, lo: f64, hi: f64, samples: usize) -> f64 {
    (0..=samples)
        .map(|k| lo + (hi - lo) * k as f64 / samples as f64)
        .map(|x| (pla.eval(x) - sigmoid(x)).abs())
        .fold(0.0, f64::max)
}
