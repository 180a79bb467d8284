//! `NNW1` text weight format.
//!
//! ```text
//! NNW1 L=<L>
//! n0 n1 .. n(L+1)
//! layer 0 rows <r> cols <c>
//! <r rows of c weights, bias column last>
//! ..
//! act <hidden_1> .. <hidden_L> <output>
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::activation::{HiddenActivation, OutputMap};
use crate::nn::network::Network;

pub fn write_nnw(net: &Network) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NNW1 L={}", net.hidden_layers());
    let widths: Vec<String> = net.widths().iter().map(usize::to_string).collect();
    let _ = writeln!(out, "{}", widths.join(" "));
    for (l, w) in net.weights().iter().enumerate() {
        let _ = writeln!(out, "layer {l} rows {} cols {}", w.rows(), w.cols());
        for r in 0..w.rows() {
            let row: Vec<String> = w.row(r).iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    let acts: Vec<String> = net
        .hidden()
        .iter()
        .map(ToString::to_string)
        .chain(std::iter::once(net.output().to_string()))
        .collect();
    let _ = writeln!(out, "act {}", acts.join(" "));
    out
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        line,
        msg: msg.into(),
    }
}

pub fn parse_nnw(text: &str) -> Result<Network> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    let depth: usize = header
        .strip_prefix("NNW1 L=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| err(ln, format!("expected `NNW1 L=<L>`, got `{header}`")))?;

    let (ln, widths_line) = lines.next().ok_or_else(|| err(ln, "missing widths line"))?;
    let widths = widths_line
        .split_whitespace()
        .map(str::parse::<usize>)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| err(ln, format!("bad width: {e}")))?;
    if widths.len() != depth + 2 {
        return Err(err(
            ln,
            format!("expected {} widths, got {}", depth + 2, widths.len()),
        ));
    }

    let mut weights = Vec::with_capacity(depth + 1);
    for l in 0..=depth {
        let (ln, head) = lines
            .next()
            .ok_or_else(|| err(ln, format!("missing layer {l}")))?;
        let fields: Vec<&str> = head.split_whitespace().collect();
        let parsed = match fields.as_slice() {
            ["layer", idx, "rows", r, "cols", c] => idx
                .parse::<usize>()
                .ok()
                .zip(r.parse::<usize>().ok())
                .zip(c.parse::<usize>().ok())
                .map(|((i, r), c)| (i, r, c)),
            _ => None,
        };
        let (idx, rows, cols) =
            parsed.ok_or_else(|| err(ln, format!("bad layer header `{head}`")))?;
        if idx != l || rows != widths[l + 1] || cols != widths[l] + 1 {
            return Err(err(
                ln,
                format!(
                    "layer {l} must be {}x{}, header says layer {idx} {rows}x{cols}",
                    widths[l + 1],
                    widths[l] + 1
                ),
            ));
        }
        let mut data = Vec::with_capacity(rows * cols);
        let mut last = ln;
        while data.len() < rows * cols {
            let (ln, row) = lines
                .next()
                .ok_or_else(|| err(last, format!("layer {l} truncated")))?;
            last = ln;
            for tok in row.split_whitespace() {
                data.push(
                    tok.parse::<f64>()
                        .map_err(|_| err(ln, format!("bad weight `{tok}`")))?,
                );
            }
        }
        if data.len() != rows * cols {
            return Err(err(
                last,
                format!(
                    "layer {l} has {} values, expected {}",
                    data.len(),
                    rows * cols
                ),
            ));
        }
        weights.push(Matrix::from_vec(rows, cols, data)?);
    }

    let (ln, act_line) = lines
        .next()
        .ok_or_else(|| err(0, "missing activation line"))?;
    let names: Vec<&str> = act_line
        .strip_prefix("act")
        .ok_or_else(|| err(ln, "expected `act ...`"))?
        .split_whitespace()
        .collect();
    if names.len() != depth + 1 {
        return Err(err(
            ln,
            format!("expected {} activations, got {}", depth + 1, names.len()),
        ));
    }
    let hidden = names[..depth]
        .iter()
        .map(|n| n.parse::<HiddenActivation>())
        .collect::<Result<Vec<_>>>()?;
    let output: OutputMap = names[depth].parse()?;
    if let Some((ln, extra)) = lines.next() {
        return Err(err(ln, format!("unexpected trailing content `{extra}`")));
    }
    Network::new(weights, hidden, output)
}
