use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod markdown;

#[derive(Parser, Debug)]
#[command(name = "spincorr", version, about = "Correlation properties of measures on {0,1}^S and spin-system dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output format on stdout.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Markdown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ArithMode {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Association,
    DownwardFkg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Associated, lattice, downward FKG and DCA verdicts for one measure.
    CheckMeasure {
        /// Measure JSON, or `fixture:NAME`.
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value_t = ArithMode::Exact)]
        mode: ArithMode,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Sampled tilts for the DCA check.
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        /// Allow the six-site up-set enumeration.
        #[arg(long)]
        opt_in_n6: bool,
        /// Properties claimed to hold; a failure exits with 1.
        #[arg(long, value_delimiter = ',')]
        expect: Vec<String>,
    },
    /// Rate-function classifiers.
    CheckRates {
        /// Spin-system JSON, or `fixture:NAME`.
        #[arg(long)]
        input: String,
        #[arg(long, value_delimiter = ',')]
        expect: Vec<String>,
    },
    /// Evolves a measure under a spin system.
    Evolve {
        /// Spin-system JSON, or `fixture:NAME`.
        #[arg(long)]
        input: String,
        /// Initial measure JSON, or `fixture:NAME`.
        #[arg(long)]
        measure: String,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1,2")]
        t: Vec<f64>,
    },
    /// Three-site verdicts with inequality margins.
    Classify3 {
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 0.0)]
        tolerance: f64,
        #[arg(long, value_delimiter = ',')]
        expect: Vec<String>,
    },
    /// Runs a preservation experiment; exits with 1 on a violation.
    VerifyTheorem {
        /// Experiment JSON, or `fixture:NAME`.
        #[arg(long)]
        input: String,
        /// Overrides the experiment's time grid.
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
        /// Overrides the experiment's draw count.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Searches for an initial measure and time at which a property is lost.
    Search {
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value_t = Target::Association)]
        target: Target,
        #[arg(long, default_value_t = 200)]
        budget: usize,
    },
    /// Lists the bundled fixtures or prints one.
    Fixtures {
        name: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command, &cli.common) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
