//! `mtd`: counting, fitting, evaluating and comparing mixture transition
//! distribution models from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mtd_core::MtdError;

#[derive(Parser, Debug)]
#[command(name = "mtd", version, about = "Mixture transition distribution models for high-order Markov chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// `dna`, a string of one-character letters (`123`), or a comma list.
    /// Commands reading a model check it against the model's alphabet.
    #[arg(long, global = true)]
    pub alphabet: Option<String>,
    /// Markov order m.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Letters read by each mixture component.
    #[arg(long, default_value_t = 1, global = true)]
    pub lag_order: usize,
    #[arg(long, default_value = "general", global = true)]
    pub variant: String,
    /// Stop once one iteration gains less log-likelihood than this.
    #[arg(long, default_value_t = 1e-3, global = true)]
    pub epsilon: f64,
    /// Starting points: one from contingency tables, the rest random.
    #[arg(long, default_value_t = 5, global = true)]
    pub restarts: usize,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    /// FASTA when the first non-blank line starts with `>`.
    #[default]
    Auto,
    Plain,
    Fasta,
}

#[derive(Args, Debug, Clone)]
pub struct Input {
    /// Sequence file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Em,
    Berchtold,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    ThetaU,
    Raw,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Mtd,
    ThetaU,
    FullMarkov,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate (m+1)-letter word counts.
    Count {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate a model and write it as a model file.
    Fit {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Method::Em)]
        method: Method,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        /// Lower bound on component probabilities in the E-step.
        #[arg(long)]
        floor: Option<f64>,
        /// Reference letter of the reported identifiable coordinates.
        #[arg(long)]
        reference: Option<String>,
        #[arg(long, value_enum, default_value_t = Dimension::ThetaU)]
        dimension: Dimension,
        /// Write the per-iteration log-likelihood trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write a one-row summary of the fit here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Log-likelihood, dimensions and BIC of a model on a corpus.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        input: Input,
        /// Use total sequence length instead of the number of likelihood
        /// terms as the BIC sample size.
        #[arg(long)]
        raw_length: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Draw sequences from a model.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// First m letters of every sequence; uniform when absent.
        #[arg(long)]
        prefix: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the full order-m transition table of a model.
    Expand {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Convert a model file between parametrizations.
    Convert {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        #[arg(long)]
        reference: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Distance between generator and full Markov estimates by fitted order.
    TvExperiment {
        #[arg(long, default_value_t = 5)]
        generator_order: usize,
        #[arg(long, default_value_t = 5000)]
        length: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
        fit_orders: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        replicates: usize,
        /// Length of the words whose laws are compared.
        #[arg(long, default_value_t = 6)]
        word_len: usize,
        #[command(flatten)]
        common: Common,
    },
    /// BIC of full Markov minus BIC of the mixture model, by order.
    BicCompare {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        orders: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        lags: Vec<usize>,
        #[arg(long)]
        raw_length: bool,
        #[arg(long, value_enum, default_value_t = Dimension::ThetaU)]
        dimension: Dimension,
        #[command(flatten)]
        common: Common,
    },
}

/// Errors in what the user asked for exit with 2; failures of the numerics
/// on valid input exit with 1.
fn exit_code(err: &MtdError) -> u8 {
    match err {
        MtdError::DegenerateLikelihood { .. }
        | MtdError::AllRestartsFailed { .. }
        | MtdError::NotAnMtdPoint { .. }
        | MtdError::NonConvergentStationary { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    match commands::run(cli.command, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mtd: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
