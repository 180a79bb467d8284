//! Bit-plane partitioning of real values into signed integer components.
//!
//! A value `x` with `|x| < 2^P0` is split against a partitioning vector
//! `P = [P0, .., Pd]` into `d` integers, where component `i` holds the bits
//! of `|x|` at positions `[P_i, P_{i-1})` and carries the sign of `x`:
//!
//! ```text
//! x ~ sum_i A_i * 2^{P_i},   |x - sum_i A_i 2^{P_i}| < 2^{Pd}
//! ```
//!
//! Bits are sliced straight from the IEEE-754 mantissa, so the decomposition
//! is exact for every finite double.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Strictly descending bit positions `[P0, P1, .., Pd]`, `d >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartitioningVector {
    exponents: Vec<i32>,
}

impl PartitioningVector {
    pub fn new(exponents: Vec<i32>) -> Result<Self> {
        if exponents.len() < 2 || exponents.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidPartitioning(exponents));
        }
        if let Some(gap) = exponents
            .windows(2)
            .map(|w| w[0] - w[1])
            .find(|&gap| gap > 63)
        {
            return Err(Error::GapTooWide { gap });
        }
        Ok(Self { exponents })
    }

    /// `P_i = top - i` for `i = 0..=depth`: one extra bit per component.
    pub fn unit_spaced(top: i32, depth: usize) -> Result<Self> {
        Self::new((0..=depth as i32).map(|i| top - i).collect())
    }

    /// Number of components `d`.
    pub fn depth(&self) -> usize {
        self.exponents.len() - 1
    }

    /// `P_i` for `i` in `0..=d`.
    pub fn exponent(&self, i: usize) -> i32 {
        self.exponents[i]
    }

    pub fn exponents(&self) -> &[i32] {
        &self.exponents
    }

    pub fn top(&self) -> i32 {
        self.exponents[0]
    }

    pub fn bottom(&self) -> i32 {
        self.exponents[self.depth()]
    }

    /// Bit width `P_{i-1} - P_i` of component `i` (1-based).
    pub fn gap(&self, i: usize) -> i32 {
        self.exponents[i - 1] - self.exponents[i]
    }

    /// `P0 - Pd`.
    pub fn span(&self) -> i32 {
        self.top() - self.bottom()
    }
}

impl std::fmt::Display for PartitioningVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.exponents.iter().map(i32::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl std::str::FromStr for PartitioningVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let exps = s
            .trim()
            .trim_start_matches('[')
            .trim_end_matches(']')
            .split(',')
            .map(|t| t.trim().parse::<i32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidPartitioning(Vec::new()))?;
        Self::new(exps)
    }
}

/// Scalar decomposition: sign and unsigned digits `alpha_1..alpha_d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarParts {
    pub sign: i8,
    pub digits: Vec<u64>,
}

/// `|x| = mantissa * 2^exponent` exactly.
fn decompose(x: f64) -> (u64, i32) {
    let bits = x.abs().to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if biased == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), biased - 1075)
    }
}

/// Bits `[lo, hi)` of `mantissa`, shifted down to position 0. `hi - lo <= 63`.
fn bit_slice(mantissa: u64, lo: i32, hi: i32) -> u64 {
    if hi <= 0 || lo >= 64 {
        return 0;
    }
    let mask = (1u64 << (hi - lo)) - 1;
    if lo >= 0 {
        (mantissa >> lo) & mask
    } else if -lo >= 64 {
        0
    } else {
        (((mantissa as u128) << (-lo)) as u64) & mask
    }
}

fn check_range(x: f64, pv: &PartitioningVector) -> Result<()> {
    let too_large = Error::ElementTooLarge {
        value: x,
        top: pv.top(),
    };
    if !x.is_finite() {
        return Err(too_large);
    }
    let (m, e) = decompose(x);
    if m == 0 {
        return Ok(());
    }
    let msb = e + 63 - m.leading_zeros() as i32;
    if msb >= pv.top() {
        return Err(too_large);
    }
    Ok(())
}

/// Splits one scalar. Negative zero is treated as zero.
pub fn partition_scalar(x: f64, pv: &PartitioningVector) -> Result<ScalarParts> {
    check_range(x, pv)?;
    let (m, e) = decompose(x);
    let digits = (1..=pv.depth())
        .map(|i| bit_slice(m, pv.exponent(i) - e, pv.exponent(i - 1) - e))
        .collect();
    let sign = if x < 0.0 { -1 } else { 1 };
    Ok(ScalarParts { sign, digits })
}

/// A matrix split into `d` signed integer component matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredMatrix {
    rows: usize,
    cols: usize,
    pv: PartitioningVector,
    components: Vec<Vec<i64>>,
}

impl LayeredMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn partitioning(&self) -> &PartitioningVector {
        &self.pv
    }

    pub fn depth(&self) -> usize {
        self.pv.depth()
    }

    /// Component `A_i`, 1-based, row-major.
    pub fn component(&self, i: usize) -> Result<&[i64]> {
        if i == 0 || i > self.depth() {
            return Err(Error::IndexOutOfRange {
                index: i,
                depth: self.depth(),
            });
        }
        Ok(&self.components[i - 1])
    }

    /// Scale exponent `P_i` of component `i`.
    pub fn scale(&self, i: usize) -> i32 {
        self.pv.exponent(i)
    }

    /// `sum_{i<=k} A_i 2^{P_i}` evaluated in `f64`.
    ///
    /// Exact whenever the represented span `P0 - Pk` fits in a double mantissa.
    pub fn reconstruct(&self, k: usize) -> Result<Matrix> {
        if k == 0 || k > self.depth() {
            return Err(Error::IndexOutOfRange {
                index: k,
                depth: self.depth(),
            });
        }
        let mut data = vec![0.0; self.rows * self.cols];
        for i in 1..=k {
            let scale = 2f64.powi(self.scale(i));
            for (acc, &a) in data.iter_mut().zip(&self.components[i - 1]) {
                *acc += a as f64 * scale;
            }
        }
        Matrix::from_vec(self.rows, self.cols, data)
    }

    /// Exact integer form of the first `k` components at scale `2^{P_k}`:
    /// element `e` equals `values[e] * 2^{P_k}`.
    pub fn reconstruct_scaled(&self, k: usize) -> Result<(Vec<i128>, i32)> {
        if k == 0 || k > self.depth() {
            return Err(Error::IndexOutOfRange {
                index: k,
                depth: self.depth(),
            });
        }
        let span = self.pv.top() - self.pv.exponent(k);
        if span > 126 {
            return Err(Error::AccumulatorOverflow { bits: span as u32 });
        }
        let mut values = vec![0i128; self.rows * self.cols];
        for i in 1..=k {
            let shift = self.scale(i) - self.scale(k);
            for (acc, &a) in values.iter_mut().zip(&self.components[i - 1]) {
                *acc += (a as i128) << shift;
            }
        }
        Ok((values, self.scale(k)))
    }
}

/// Splits every element of `values` against `pv`.
pub fn partition(values: &Matrix, pv: &PartitioningVector) -> Result<LayeredMatrix> {
    let mut components = vec![Vec::with_capacity(values.as_slice().len()); pv.depth()];
    for &x in values.as_slice() {
        let parts = partition_scalar(x, pv)?;
        let sign = i64::from(parts.sign);
        for (comp, digit) in components.iter_mut().zip(parts.digits) {
            comp.push(sign * digit as i64);
        }
    }
    Ok(LayeredMatrix {
        rows: values.rows(),
        cols: values.cols(),
        pv: pv.clone(),
        components,
    })
}
