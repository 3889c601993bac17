use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stochord_core::orders::OrderKind;

/// Decide stochastic orders between distributions and check which
/// operations preserve them.
#[derive(Debug, Parser)]
#[command(name = "stochord", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub tolerance: ToleranceArgs,

    /// Output encoding; JSON by default, CSV for `plot-cdf`.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the result here instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ToleranceArgs {
    /// Slack for pointwise inequalities.
    #[arg(long, global = true)]
    pub eps: Option<f64>,

    /// Grid points per operand.
    #[arg(long, global = true)]
    pub grid: Option<usize>,

    /// Highest derivative order of the complete-monotonicity test.
    #[arg(long = "max-deriv", global = true)]
    pub max_deriv: Option<u32>,

    /// Highest moment compared by the moment order.
    #[arg(long, global = true)]
    pub moments: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether X is smaller than Y in the given order.
    Check {
        #[arg(value_parser = parse_order)]
        order: OrderKind,
        /// Distribution spec: inline JSON or a path to a JSON file.
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Law of X + Z or X * Z for independent X, Z.
    Combine {
        #[arg(value_enum)]
        op: CombineOp,
        #[arg(long)]
        x: String,
        #[arg(long)]
        z: String,
    },
    /// Check that X <= Y survives adding or multiplying by an independent Z.
    Property {
        #[arg(value_enum)]
        property: PropertyArg,
        #[arg(long, value_parser = parse_order)]
        order: OrderKind,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        z: String,
    },
    /// Reflexivity, antisymmetry and transitivity over a pool.
    Axioms {
        #[arg(long, value_parser = parse_order)]
        order: OrderKind,
        /// Specs: JSON arrays, single specs or files holding either.
        #[arg(long, num_args = 1.., required = true)]
        pool: Vec<String>,
    },
    /// Rerun one of the worked examples.
    Reproduce {
        #[arg(value_enum)]
        what: Reproduction,
        /// Suite spec file for `table1`.
        #[arg(long)]
        suite: Option<PathBuf>,
    },
    /// Tabulate CDFs on a uniform grid as CSV.
    PlotCdf {
        #[arg(long, num_args = 1.., required = true)]
        specs: Vec<String>,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        step: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CombineOp {
    Sum,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PropertyArg {
    Additivity,
    Multiplicativity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Reproduction {
    Remark2,
    Remark5,
    Table1,
}

fn parse_order(s: &str) -> Result<OrderKind, String> {
    s.parse::<OrderKind>().map_err(|e| e.to_string())
}
