//! `fol`: command-line front end for the singfol workbench.
//!
//! Every invocation prints one JSON report on standard output. Exit codes:
//! 0 success, 1 a checked property is false, 2 parse or usage error,
//! 3 numerical failure (blow-up, Gröbner budget exceeded).

mod commands;
mod inputs;
mod report;

use clap::{Args, Parser, Subcommand};

use report::{exit, Report};

#[derive(Debug, Parser)]
#[command(name = "fol", version, about = "Singular foliations of polynomial vector fields")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Emit JSON (the only output format).
    #[arg(long, global = true, default_value_t = true)]
    json: bool,
    /// RK4 step size.
    #[arg(long = "h", global = true, value_name = "STEP")]
    step: Option<f64>,
    /// Comparison tolerance: germ-eq jet distance (default 1e-6),
    /// pushforward residual (1e-8), chart-rank and flowbox rank threshold
    /// (1e-8).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for grid and sample scans.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check closure under Lie brackets.
    Check { file: String },
    /// Fiber, tangent and isotropy dimensions at a point or over a grid.
    Dims {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// `a:b:step`, applied to every coordinate.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Module membership with a certificate.
    Member {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        field: String,
    },
    /// Generators of the relation module.
    Syzygy { file: String },
    /// Generic rank and the ideal of maximal nonvanishing minors.
    Singular { file: String },
    /// Generators that form a basis of the fiber at a point.
    Localgens {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Random walk along the leaf through a point.
    Leaf {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Apply a flow word to a point.
    Flow {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Compare the chart's parameter-derivative rank with the tangent
    /// dimension at random rational points.
    ChartRank {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Jacobian of the flow-box map of one generator.
    Flowbox {
        file: String,
        /// 1-based generator index.
        #[arg(long)]
        gen: usize,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Normal of the transversal hyperplane through the point
        /// (default: the generator's value there).
        #[arg(long, allow_hyphen_values = true)]
        normal: Option<String>,
    },
    /// First jet of a word's carried map at a fixed point.
    Jet {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Matrix-exponential jet of a word over linear generators.
    JetExact {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
    },
    /// Germ equality of two words at the origin (linear actions only).
    GermEq {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        word1: String,
        #[arg(long, allow_hyphen_values = true)]
        word2: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Conjugation invariance of the span of linear generators.
    Pushforward {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        #[arg(long, allow_hyphen_values = true)]
        time: String,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let mut report = Report::new("usage", serde_json::Value::Null);
            report.fail(exit::USAGE, e.to_string());
            println!("{}", report.to_json());
            eprint!("{e}");
            std::process::exit(exit::USAGE);
        }
    };
    let report = commands::run(&cli.command, &cli.global);
    println!("{}", report.to_json());
    if report.exit_code != exit::OK {
        for d in &report.diagnostics {
            eprintln!("fol: {d}");
        }
    }
    std::process::exit(report.exit_code);
}
