mod commands;
mod input;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use report::Report;

#[derive(Debug, Parser)]
#[command(name = "groupoidal", version, about = "Verification workbench for principaloid bundles")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Residual tolerance for numeric checks (default: the scenario's).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Central-difference step (default: the scenario's).
    #[arg(long, global = true)]
    pub fd_step: Option<f64>,
    /// RK4 step (default: the scenario's; `--step` wins).
    #[arg(long, global = true)]
    pub ode_step: Option<f64>,
    /// Print the full report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true, env = "GROUPOIDAL_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a groupoid, bundle, automorphism or scenario document.
    Validate { path: String },
    /// Run the bisection identity suite and the equivariant-bijection oracle.
    CheckIdentities {
        path: String,
        /// Largest number of candidates any enumeration may visit.
        #[arg(long, default_value_t = 1 << 20)]
        cap: u128,
    },
    /// Build a bundle and run one verification battery.
    Bundle {
        path: String,
        #[arg(long, value_enum, default_value_t = BundleReport::Counts)]
        report: BundleReport,
        #[arg(long, default_value_t = 1 << 20)]
        cap: u128,
    },
    /// Horizontal lift of a base path.
    Transport {
        /// Shipped scenario name or scenario JSON file.
        scenario: String,
        /// Path JSON (file or inline); default depends on the scenario.
        #[arg(long)]
        path: Option<String>,
        /// RK4 step.
        #[arg(long)]
        step: Option<f64>,
        /// `zero`, `constructed`, `first-generator`, or connection JSON (file or inline).
        #[arg(long, default_value = "constructed")]
        connection: String,
        /// Start point JSON `{"a": [[..]], "m": [..]}` (file or inline); default (Id, e₁).
        #[arg(long)]
        start: Option<String>,
    },
    /// Print a shipped input document.
    Example {
        #[arg(value_enum)]
        name: commands::ExampleName,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BundleReport {
    Counts,
    Axioms,
    Atiyah,
    Trident,
    Gauge,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    if let Command::Example { name } = &cli.command {
        println!("{}", serde_json::to_string_pretty(&commands::example(*name)).expect("serializable"));
        return ExitCode::SUCCESS;
    }
    let report: Report = commands::run(&cli);
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        print!("{}", report.render_text());
    }
    ExitCode::from(report.status.code() as u8)
}
