//! Layered evaluation of feed-forward networks with piecewise-linear
//! hidden activations.

mod activation;
mod bounds;
mod network;
mod nnw;
mod pla;

pub use activation::{HiddenActivation, OutputMap};
pub use bounds::{
    cost_gap_bracket, nn_cost_gap, nn_delta_bound, nn_delta_bound_through, NnBoundInputs,
};
pub use network::{LayeredModel, LayeredNetwork, Network};
pub use nnw::{parse_nnw, write_nnw};
pub use pla::{make_sigmoid_pla, max_deviation_from_sigmoid, sigmoid, PiecewiseLinear};
