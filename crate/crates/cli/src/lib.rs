//! Library surface of the `invp` command-line tool: argument types,
//! subcommand execution, report serialization, and CSV ingestion/emission.

pub mod csvio;
pub mod report;
pub mod run;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "invp", version, about = "Invariant P-values for model checking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct McArgs {
    /// Number of Monte-Carlo replicates.
    #[arg(long, default_value_t = 200_000)]
    pub n_sim: usize,
    /// Seed for the reproducible generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replicates per deterministic substream.
    #[arg(long, default_value_t = 4096)]
    pub chunk_size: usize,
    /// KDE bandwidth override (default: Silverman reference rule).
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Density-evaluation grid resolution.
    #[arg(long, default_value_t = 512)]
    pub grid_size: usize,
}

#[derive(Args, Debug, Clone)]
pub struct OutArg {
    /// Output directory for report.json and plot-data CSVs.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check normality of a sample via the residual-sphere reduction.
    CheckNormal {
        /// CSV file with one observation per line.
        data: PathBuf,
        /// Discrepancy statistic: jb, t3t4, or sw.
        #[arg(long, default_value = "jb")]
        stat: String,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Closed-form reference P-values (chi-square level sets, normal mean).
    Pvalue {
        /// Distribution family: chisq or mean.
        #[arg(long)]
        dist: String,
        /// Degrees of freedom (chisq).
        #[arg(long)]
        k: Option<u32>,
        /// Observed statistic value (chisq).
        #[arg(long)]
        t0: Option<f64>,
        /// Observed sample mean (mean).
        #[arg(long)]
        xbar: Option<f64>,
        /// Sample size behind the mean (mean).
        #[arg(long)]
        n: Option<u32>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Exact P-value for a finite probability function.
    Discrete {
        /// CSV of `label,probability` rows.
        #[arg(long)]
        pmf: PathBuf,
        /// Observed outcome label.
        #[arg(long)]
        t0: String,
        /// Optional CSV of `from,to` rows applied as a pushforward first.
        #[arg(long)]
        map: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Partition P-values under refinement and their continuous limit.
    DiscretizeDemo {
        /// Density: normal, laplace, uniform, or exponential.
        #[arg(long, default_value = "normal")]
        density: String,
        /// Observed point.
        #[arg(long)]
        x0: f64,
        /// Number of halvings: widths run 2^0 .. 2^-levels.
        #[arg(long, default_value_t = 12)]
        levels: u32,
        /// Cell boundary offset.
        #[arg(long, default_value_t = 0.0)]
        anchor: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Location-scale model check via the quartile ancillary.
    LocScaleCheck {
        /// CSV file with one observation per line.
        data: PathBuf,
        /// Base density: normal, laplace, logistic, or student-t.
        #[arg(long, default_value = "normal")]
        model: String,
        /// Degrees of freedom for student-t.
        #[arg(long)]
        df: Option<u32>,
        /// Monte-Carlo replicates (each one costs a double quadrature).
        #[arg(long, default_value_t = 2000)]
        n_sim: usize,
        /// Seed for the reproducible generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replicates per deterministic substream.
        #[arg(long, default_value_t = 500)]
        chunk_size: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Level-alpha acceptance contours of the joint (T3, T4) check.
    Contour {
        /// Sample size the contours are for.
        #[arg(long)]
        n: usize,
        /// Contour level.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutArg,
    },
}
