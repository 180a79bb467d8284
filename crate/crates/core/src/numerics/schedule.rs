use crate::error::{Error, Result};
use crate::numerics::PartitioningVector;

/// Order in which component products `(i, j)` are accumulated, most
/// significant exponent sum `P_i + Q_j` first. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolutionSchedule {
    order: Vec<(usize, usize)>,
    exponent_sums: Vec<i32>,
}

impl ResolutionSchedule {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Pair applied at resolution `r` (1-based).
    pub fn pair(&self, r: usize) -> (usize, usize) {
        self.order[r - 1]
    }

    /// `P_{gamma_r(1)} + Q_{gamma_r(2)}` for resolution `r` (1-based).
    pub fn exponent_sum(&self, r: usize) -> i32 {
        self.exponent_sums[r - 1]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.order
    }

    pub fn exponent_sums(&self) -> &[i32] {
        &self.exponent_sums
    }
}

/// Sorts all `d^2` pairs by descending `P_i + Q_j`; ties go to the
/// lexicographically smaller `(i, j)`.
pub fn schedule(
    left: &PartitioningVector,
    right: &PartitioningVector,
) -> Result<ResolutionSchedule> {
    let d = left.depth();
    if right.depth() != d {
        return Err(Error::MismatchedDepth {
            left: d,
            right: right.depth(),
        });
    }
    let mut order: Vec<(usize, usize)> =
        (1..=d).flat_map(|i| (1..=d).map(move |j| (i, j))).collect();
    let sum = |&(i, j): &(usize, usize)| left.exponent(i) + right.exponent(j);
    order.sort_by(|a, b| sum(b).cmp(&sum(a)).then(a.cmp(b)));
    let exponent_sums = order.iter().map(sum).collect();
    Ok(ResolutionSchedule {
        order,
        exponent_sums,
    })
}
