use layercomp_core::{Matrix, PartitioningVector};

use crate::error::{AdaptiveError, Result};

/// Smallest integer `h` with `value < 2^h`.
pub fn bit_ceiling(value: f64) -> i32 {
    let mut h = value.log2().floor() as i32 + 1;
    while 2f64.powi(h - 1) > value {
        h -= 1;
    }
    while 2f64.powi(h) <= value {
        h += 1;
    }
    h
}

/// One unit-spaced vector of depth `resolutions` per layer, topped at the
/// smallest power of two strictly above the layer's largest magnitude.
pub fn choose_partitioning(
    weights: &[Matrix],
    resolutions: usize,
) -> Result<Vec<PartitioningVector>> {
    weights
        .iter()
        .enumerate()
        .map(|(l, w)| {
            let max = w.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if max == 0.0 {
                return Err(AdaptiveError::AllZeroLayer(l));
            }
            Ok(PartitioningVector::unit_spaced(
                bit_ceiling(max),
                resolutions,
            )?)
        })
        .collect()
}
