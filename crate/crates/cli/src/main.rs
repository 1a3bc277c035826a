//! `koszul`: command-line frontend for Koszul resultant matrices of 2-bilinear systems.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(
    name = "koszul",
    version,
    about = "Koszul resultant matrices and an eigenvalue solver for 2-bilinear systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// System type as `nx,ny,nz,r,s`.
    #[arg(long = "type", global = true, value_name = "nx,ny,nz,r,s")]
    pub ty: Option<String>,
    /// JSON system file.
    #[arg(long, global = true, value_name = "PATH")]
    pub system: Option<PathBuf>,
    /// Degree vector `mx,my,mz` of the Weyman complex.
    #[arg(long = "degree-vector", global = true, value_name = "mx,my,mz", allow_hyphen_values = true)]
    pub degree_vector: Option<String>,
    /// Exponent key of the monomial θ, e.g. `1,0|1,0|1,0`.
    #[arg(long, global = true, value_name = "KEY")]
    pub theta: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Coefficient field: `q` or `fp:<p>`.
    #[arg(long, global = true, value_name = "q|fp:<p>")]
    pub field: Option<String>,
    /// Residual tolerance of the solver.
    #[arg(long, global = true, value_name = "T")]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub output: Format,
    /// Search box `lo:hi` for degree vectors.
    #[arg(long = "box", global = true, value_name = "lo:hi", allow_hyphen_values = true)]
    pub search_box: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Bézout number, degree of the resultant and the four determinantal degree vectors.
    Dims,
    /// Exhaustive search for determinantal degree vectors in a box.
    SearchDv,
    /// The Koszul resultant matrix, symbolic or specialized at a system.
    Matrix,
    /// Exact determinant of the matrix specialized at a system with `f0`.
    Resultant,
    /// Solves a square system.
    Solve,
    /// Enumerates the solutions of a system over a prime field.
    Oracle {
        /// Maximum number of enumerated points.
        #[arg(long, default_value_t = koszul_core::oracle::DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Checks the bundled three-variable example end to end.
    SelftestPaper,
    /// Koszul matrix sizes against recorded Gröbner basis matrix sizes.
    Bench {
        /// Assemble the matrix for rows whose size is at most this.
        #[arg(long, default_value_t = 1000)]
        assemble_max: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dims => "dims",
            Command::SearchDv => "search-dv",
            Command::Matrix => "matrix",
            Command::Resultant => "resultant",
            Command::Solve => "solve",
            Command::Oracle { .. } => "oracle",
            Command::SelftestPaper => "selftest-paper",
            Command::Bench { .. } => "bench",
        }
    }
}

/// Exits with status 2 after printing a usage message.
pub fn usage_error(msg: &str) -> ! {
    Cli::command().error(clap::error::ErrorKind::MissingRequiredArgument, msg).exit()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(outcome) => {
            print!("{}", render::emit(&cli, &outcome));
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let record = json!({
                "version": koszul_core::VERSION,
                "command": cli.command.name(),
                "error": {"kind": e.kind(), "message": e.to_string()},
            });
            eprintln!("{record}");
            ExitCode::from(1)
        }
    }
}
