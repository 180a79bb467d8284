use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod output;
mod simconf;

#[derive(Parser, Debug)]
#[command(
    name = "layercomp",
    version,
    about = "Layered-resolution computation toolkit",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split a scalar into signed bit-plane components.
    Partition {
        #[arg(long, allow_hyphen_values = true)]
        value: f64,
        /// Descending exponents, e.g. `1,-1,-3`.
        #[arg(long, allow_hyphen_values = true)]
        pv: String,
    },
    /// Layered matrix-vector product, one resolution per row of output.
    MatmulLayered {
        /// Matrix, one row per line.
        #[arg(long)]
        w: PathBuf,
        /// Vector, all numbers in the file in order.
        #[arg(long)]
        x: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        pw: String,
        #[arg(long, allow_hyphen_values = true)]
        px: String,
        /// Write CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Layered evaluation of an NNW1 network on input rows.
    NnEval {
        #[arg(long)]
        model: PathBuf,
        /// One sample per line.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 4)]
        r: usize,
        /// Input vector; defaults to `[0, -1, .., -r]`.
        #[arg(long, allow_hyphen_values = true)]
        px: Option<String>,
        /// One vector per weight layer separated by `;`; chosen from the
        /// weight magnitudes when absent.
        #[arg(long, allow_hyphen_values = true)]
        pw: Option<String>,
        #[arg(long, default_value_t = -4, allow_hyphen_values = true)]
        hmin: i32,
        /// Clamp inputs into the range of the input vector.
        #[arg(long)]
        saturate: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Precision and cost tables for a pair of partitioning vectors, or
    /// for a network when `--model` is given.
    Bounds {
        #[arg(long, allow_hyphen_values = true)]
        pw: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        px: String,
        /// Inner dimension of the product.
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        hmax: Option<i32>,
        #[arg(long, default_value_t = -4, allow_hyphen_values = true)]
        hmin: i32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the master/worker stream.
    Simulate {
        /// `key=value` file; see README for keys.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override one key, e.g. `--set jobs=200`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Train the parity classifier and write an NNW1 file.
    Train {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, default_value_t = 100)]
        batch: usize,
        #[arg(long, default_value_t = 1e-4)]
        lr: f64,
        /// Hidden widths.
        #[arg(long, default_value = "20,20")]
        hidden: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "model.nnw")]
        out: PathBuf,
    },
    /// Adaptive-resolution inference over a labelled dataset.
    Adaptive {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value = "0.3,0.6")]
        zone: String,
        #[arg(long, default_value_t = 4)]
        r: usize,
        #[arg(long, default_value_t = -4, allow_hyphen_values = true)]
        hmin: i32,
        #[arg(long, default_value = "traces.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
