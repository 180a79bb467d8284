//! Layered inference over a dataset and the resulting metrics.

use layercomp_core::nn::{LayeredModel, Network};
use layercomp_core::PartitioningVector;

use crate::error::Result;
use crate::idx::Dataset;
use crate::metrics::{accuracy, demand_histogram, roc_auc, Demand};
use crate::partitioning::{bit_ceiling, choose_partitioning};
use crate::policy::{GrayZonePolicy, TraceEntry};

/// Input vector `[0, -1, .., -R]` for samples in `[0, 1]`.
pub fn input_partitioning(resolutions: usize) -> Result<PartitioningVector> {
    Ok(PartitioningVector::unit_spaced(0, resolutions)?)
}

/// Clamps each value below `2^P0` to the largest value representable at
/// full depth, so that `1.0` fits a vector topped at `2^0`.
pub fn saturate(x: &[f64], pv: &PartitioningVector) -> Vec<f64> {
    let cap = 2f64.powi(pv.top()) - 2f64.powi(pv.bottom());
    x.iter().map(|&v| v.clamp(-cap, cap)).collect()
}

pub fn build_model(net: &Network, resolutions: usize, h_min: i32) -> Result<LayeredModel> {
    let pv_w = choose_partitioning(net.weights(), resolutions)?;
    Ok(LayeredModel::new(
        net.clone(),
        input_partitioning(resolutions)?,
        pv_w,
        h_min,
    )?)
}

/// Smallest `h` with every hidden and output pre-activation below `2^h` in
/// magnitude over `data`.
pub fn measure_h_max(net: &Network, data: &Dataset) -> Result<i32> {
    let mut max = 0.0f64;
    for i in 0..data.len() {
        for h in net.pre_activations(data.sample(i))? {
            max = h.iter().fold(max, |m, v| m.max(v.abs()));
        }
    }
    Ok(if max == 0.0 {
        i32::MIN
    } else {
        bit_ceiling(max)
    })
}

/// Per-sample outputs of every resolution and of the one-shot passes.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// `paths[i][r - 1]`: output of sample `i` after resolution `r`.
    pub paths: Vec<Vec<f64>>,
    pub one_shot: Vec<f64>,
    /// One-shot pass on quantised weights and inputs.
    pub quantized: Vec<f64>,
    pub traces: Vec<TraceEntry>,
    pub labels: Vec<u8>,
}

fn parallel_map<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let threads = std::thread::available_parallelism()
        .map_or(1, |t| t.get())
        .min(n.max(1));
    let chunk = n.div_ceil(threads.max(1)).max(1);
    let f = &f;
    let parts: Vec<Result<Vec<T>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..n)
            .step_by(chunk)
            .map(|lo| s.spawn(move || (lo..(lo + chunk).min(n)).map(f).collect()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread"))
            .collect()
    });
    let mut out = Vec::with_capacity(n);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Runs every resolution for every sample; the adaptive trace of a sample is
/// the prefix of its path that the policy consumes.
pub fn evaluate(
    model: &LayeredModel,
    data: &Dataset,
    policy: &GrayZonePolicy,
) -> Result<Evaluation> {
    policy.validate()?;
    let quantized_net = model.quantized_network()?;
    let pv_x = model.input_partitioning();
    let rows = parallel_map(data.len(), |i| {
        let x = saturate(data.sample(i), pv_x);
        let mut state = model.start(&x)?;
        let path: Vec<f64> = state.run()?.into_iter().map(|o| o[0]).collect();
        let one = model.network().forward(data.sample(i))?[0];
        let quant = quantized_net.forward(&model.quantize_input(&x)?)?[0];
        Ok((path, one, quant))
    })?;
    let mut eval = Evaluation {
        paths: Vec::with_capacity(rows.len()),
        one_shot: Vec::with_capacity(rows.len()),
        quantized: Vec::with_capacity(rows.len()),
        traces: Vec::with_capacity(rows.len()),
        labels: data.labels(),
    };
    for (path, one, quant) in rows {
        eval.traces.push(TraceEntry::from_path(&path, policy));
        eval.paths.push(path);
        eval.one_shot.push(one);
        eval.quantized.push(quant);
    }
    Ok(eval)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub accuracy: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub per_resolution: Vec<Score>,
    pub one_shot: Score,
    pub quantized: Score,
    pub adaptive: Score,
    pub demand: Demand,
    pub mean_resolutions: f64,
}

impl Evaluation {
    pub fn metrics(&self, policy: &GrayZonePolicy) -> Result<Metrics> {
        let score = |s: &[f64]| -> Result<Score> {
            Ok(Score {
                accuracy: accuracy(s, &self.labels, policy.threshold),
                auc: roc_auc(s, &self.labels)?,
            })
        };
        let r_max = self.paths.first().map_or(0, Vec::len);
        let per_resolution = (0..r_max)
            .map(|r| score(&self.paths.iter().map(|p| p[r]).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        let adaptive: Vec<f64> = self.traces.iter().map(|t| t.final_output).collect();
        Ok(Metrics {
            per_resolution,
            one_shot: score(&self.one_shot)?,
            quantized: score(&self.quantized)?,
            adaptive: score(&adaptive)?,
            demand: demand_histogram(&self.traces, r_max, |p| policy.in_zone(p)),
            mean_resolutions: self
                .traces
                .iter()
                .map(|t| t.resolutions_used as f64)
                .sum::<f64>()
                / self.traces.len().max(1) as f64,
        })
    }
}
