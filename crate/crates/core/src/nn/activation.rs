use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::nn::pla::{make_sigmoid_pla, sigmoid, PiecewiseLinear};

/// Named hidden-layer activation; always realised as a piecewise-linear map.
#[derive(Debug, Clone, PartialEq)]
pub enum HiddenActivation {
    Identity,
    Relu,
    LeakyRelu(f64),
    SigmoidPla(usize),
}

impl HiddenActivation {
    pub fn to_pla(&self) -> Result<PiecewiseLinear> {
        match *self {
            Self::Identity => Ok(PiecewiseLinear::identity()),
            Self::Relu => Ok(PiecewiseLinear::relu()),
            Self::LeakyRelu(beta) => {
                if !(0.0..=1.0).contains(&beta) {
                    return Err(Error::InvalidActivation(format!(
                        "leaky relu slope {beta} outside [0, 1]"
                    )));
                }
                Ok(PiecewiseLinear::leaky_relu(beta))
            }
            Self::SigmoidPla(n) => make_sigmoid_pla(n),
        }
    }
}

impl fmt::Display for HiddenActivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => f.write_str("identity"),
            Self::Relu => f.write_str("relu"),
            Self::LeakyRelu(beta) => write!(f, "leaky_relu:{beta}"),
            Self::SigmoidPla(n) => write!(f, "sigmoid_pla:{n}"),
        }
    }
}

impl FromStr for HiddenActivation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidActivation(format!("unknown hidden activation `{s}`"));
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match (name, arg) {
            ("identity", None) => Ok(Self::Identity),
            ("relu", None) => Ok(Self::Relu),
            ("leaky_relu", None) => Ok(Self::LeakyRelu(0.05)),
            ("leaky_relu", Some(a)) => a.parse().map(Self::LeakyRelu).map_err(|_| bad()),
            ("sigmoid_pla", None) => Ok(Self::SigmoidPla(8)),
            ("sigmoid_pla", Some(a)) => a.parse().map(Self::SigmoidPla).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

/// Final map applied exactly to the last pre-activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMap {
    Identity,
    Sigmoid,
    Softmax,
}

impl OutputMap {
    pub fn apply(&self, h: &[f64]) -> Vec<f64> {
        match self {
            Self::Identity => h.to_vec(),
            Self::Sigmoid => h.iter().map(|&v| sigmoid(v)).collect(),
            Self::Softmax => {
                let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = h.iter().map(|&v| (v - max).exp()).collect();
                let total: f64 = exps.iter().sum();
                exps.into_iter().map(|e| e / total).collect()
            }
        }
    }

    /// Largest Jacobian entry magnitude.
    pub fn jacobian_max(&self) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::Sigmoid | Self::Softmax => 0.25,
        }
    }
}

impl fmt::Display for OutputMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Identity => "identity",
            Self::Sigmoid => "sigmoid",
            Self::Softmax => "softmax",
        })
    }
}

impl FromStr for OutputMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "sigmoid" => Ok(Self::Sigmoid),
            "softmax" => Ok(Self::Softmax),
            _ => Err(Error::InvalidActivation(format!(
                "unknown output map `{s}`"
            ))),
        }
    }
}
