use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use roal_core::matcore::ToleranceConfig;

mod commands;

#[derive(Parser)]
#[command(
    name = "roal",
    version,
    about = "Checks for finite-dimensional real operator and Jordan operator algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct TolArgs {
    /// Absolute slack for positive semidefiniteness tests.
    #[arg(long)]
    tol_psd: Option<f64>,
    /// Relative tolerance for norm comparisons.
    #[arg(long)]
    tol_norm: Option<f64>,
}

impl TolArgs {
    fn config(self) -> ToleranceConfig {
        let mut tol = ToleranceConfig::default();
        if let Some(t) = self.tol_psd {
            tol.psd_tol = t;
        }
        if let Some(t) = self.tol_norm {
            tol.norm_rel_tol = t;
        }
        tol
    }
}

#[derive(Subcommand)]
enum Command {
    /// Materialize an algebra file and report its structure.
    CheckAlgebra {
        path: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
        /// Write the report as JSON to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Classify a linear map and compute its leveled norms.
    CheckMap {
        domain: PathBuf,
        map: PathBuf,
        /// Amplification levels, e.g. `1,2`.
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        levels: Vec<usize>,
        #[arg(long, env = "ROAL_SEED", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Apply the F-transform (or its inverse) to an element of a unital algebra.
    Transform {
        algebra: PathBuf,
        /// Index of a generator of the algebra file.
        #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
        element: Option<usize>,
        /// Inline matrix as `{"dim": n, "entries": [...]}`.
        #[arg(long)]
        matrix: Option<String>,
        /// Compute `w(1 - w)⁻¹` instead of `x(1 + x)⁻¹`.
        #[arg(long)]
        inverse: bool,
        #[command(flatten)]
        tol: TolArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List or run the scenario catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// Scenario names with one-line descriptions.
    List,
    /// Run one scenario, or all of them with `--all`.
    Run {
        #[arg(required_unless_present = "all", conflicts_with = "all")]
        name: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, env = "ROAL_SEED", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tol: TolArgs,
        /// Write the verdicts as JSON to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::CheckAlgebra { path, tol, json } => commands::check_algebra(&path, &tol.config(), json.as_deref()),
        Command::CheckMap {
            domain,
            map,
            levels,
            seed,
            tol,
            json,
        } => commands::check_map(&domain, &map, &levels, seed, &tol.config(), json.as_deref()),
        Command::Transform {
            algebra,
            element,
            matrix,
            inverse,
            tol,
            out,
        } => commands::transform(
            &algebra,
            element,
            matrix.as_deref(),
            inverse,
            &tol.config(),
            out.as_deref(),
        ),
        Command::Catalog { action } => match action {
            CatalogAction::List => commands::catalog_list(),
            CatalogAction::Run {
                name,
                all,
                seed,
                tol,
                json,
            } => commands::catalog_run(name.as_deref(), all, seed, &tol.config(), json.as_deref()),
        },
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
