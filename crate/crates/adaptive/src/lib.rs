//! Parity classification of handwritten digits with a small network whose
//! inference is refined one resolution at a time until the output is
//! confidently away from the decision threshold.

mod error;
mod evaluate;
mod idx;
mod metrics;
mod partitioning;
mod policy;
mod train;

pub use error::{AdaptiveError, Result};
pub use evaluate::{
    build_model, evaluate, input_partitioning, measure_h_max, saturate, Evaluation, Metrics, Score,
};
pub use idx::{load_idx, parse_images, parse_labels, Dataset};
pub use metrics::{accuracy, demand_histogram, roc_auc, Demand};
pub use partitioning::{bit_ceiling, choose_partitioning};
pub use policy::{infer_adaptive, GrayZonePolicy, TraceEntry};
pub use train::{train_mlp, TrainConfig, Trained};
