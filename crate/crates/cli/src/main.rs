//! `varadhan`: build and inspect crystal lattices, analyze interactions, decompose
//! shift-invariant closed uniform forms and run the acceptance suites.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use varadhan_core::Error;

#[derive(Parser, Debug)]
#[command(name = "varadhan", version, about = "Exact decomposition of closed uniform forms on crystal lattices")]
struct Cli {
    /// Print the machine-readable run report on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Write the command's artifact (lattice, decomposition, form, report) to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Bound on exhaustively enumerated configurations.
    #[arg(long, global = true, default_value_t = 1 << 22)]
    cap: u128,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lattice construction and classification.
    #[command(subcommand)]
    Lattice(LatticeCommand),
    /// Interaction analysis.
    #[command(subcommand)]
    Interaction(InteractionCommand),
    /// Construction of shift-invariant forms from orbit data.
    #[command(subcommand)]
    Form(FormCommand),
    /// Decompose ω = ∂g + Σⱼ ∂𝔄ʲ_ζⱼ.
    Decompose(DecomposeArgs),
    /// Run the acceptance suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct LatticeSource {
    /// Lattice JSON file, or a builtin name such as `euclidean(2)` or `hexagonal`.
    #[arg(long)]
    lattice: Option<String>,
    /// Builtin lattice name.
    #[arg(long, conflicts_with = "lattice")]
    builtin: Option<String>,
}

#[derive(Subcommand, Debug)]
enum LatticeCommand {
    /// Validate a lattice and emit its JSON presentation.
    Build(LatticeSource),
    /// Rank, cells, translations and block geometry.
    Inspect(LatticeSource),
    /// Essentially Euclidean classification.
    CheckEe(LatticeSource),
    /// Maximal abelian cover of a seed crystal given as graph JSON.
    AbelianCover {
        /// Seed graph JSON file.
        seed: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
pub struct InteractionSource {
    /// Interaction JSON file, or a builtin name: exclusion, two_species_exclusion, identity(n).
    #[arg(long)]
    interaction: String,
}

#[derive(Subcommand, Debug)]
enum InteractionCommand {
    /// Validation, conserved quantities, simplicity and irreducibility evidence.
    Analyze {
        /// Interaction JSON file or builtin name; same as `--interaction`.
        #[arg(required_unless_present = "interaction", conflicts_with = "interaction")]
        file: Option<String>,
        /// Interaction JSON file or builtin name.
        #[arg(long)]
        interaction: Option<String>,
        /// Largest path and cycle of the evidence family.
        #[arg(long, default_value_t = 4)]
        locales: usize,
    },
}

#[derive(Subcommand, Debug)]
enum FormCommand {
    /// Orbit data of ∂g + Σⱼ ∂𝔄ʲ_ζⱼ.
    Exact {
        #[command(flatten)]
        lattice: LatticeSource,
        #[command(flatten)]
        interaction: InteractionSource,
        /// Shift-invariant function g as orbit-term JSON; zero when absent.
        #[arg(long)]
        function: Option<PathBuf>,
        /// ζⱼ as comma-separated rationals indexed by state; repeat once per direction.
        #[arg(long)]
        zeta: Vec<String>,
    },
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[command(flatten)]
    lattice: LatticeSource,
    #[command(flatten)]
    interaction: InteractionSource,
    /// Form orbit data JSON.
    #[arg(long)]
    form: PathBuf,
    /// Cells per axis of the working window, centred at the origin, e.g. `31,7`.
    #[arg(long, value_delimiter = ',')]
    window: Option<Vec<i64>>,
    /// Radius of the expansion of g; escalated automatically when absent.
    #[arg(long)]
    radius: Option<usize>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// `all`, a suite name or a suite number.
    #[arg(long, default_value = "all")]
    suite: String,
    /// `small` or `large`.
    #[arg(long, default_value = "small")]
    scale: String,
}

pub struct Global {
    pub json: bool,
    pub out: Option<PathBuf>,
    pub cap: u128,
}

/// Failure classes of a run, mapped to the process exit code.
pub enum Failure {
    /// A verification suite failed.
    Suite,
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Error(e.into())
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) | Error::Validation(_) | Error::CapExceeded { .. } | Error::Json(_) | Error::Io(_) => 2,
        Error::Inconclusive(_) => 3,
        Error::Internal(_) => 1,
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("VARADHAN_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| Error::input(format!("VARADHAN_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build_global()
        .map_err(|e| Error::internal(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let global = Global {
        json: cli.json,
        out: cli.out,
        cap: cli.cap,
    };
    let started = std::time::Instant::now();
    let result = configure_threads().map_err(Failure::from).and_then(|()| match cli.command {
        Command::Lattice(c) => match c {
            LatticeCommand::Build(s) => commands::lattice_build(&global, &s),
            LatticeCommand::Inspect(s) => commands::lattice_inspect(&global, &s),
            LatticeCommand::CheckEe(s) => commands::lattice_check_ee(&global, &s),
            LatticeCommand::AbelianCover { seed } => commands::lattice_abelian_cover(&global, &seed),
        },
        Command::Interaction(InteractionCommand::Analyze {
            file,
            interaction,
            locales,
        }) => {
            let source = InteractionSource {
                interaction: file.or(interaction).unwrap_or_default(),
            };
            commands::interaction_analyze(&global, &source, locales)
        }
        Command::Form(FormCommand::Exact {
            lattice,
            interaction,
            function,
            zeta,
        }) => commands::form_exact(&global, &lattice, &interaction, function.as_deref(), &zeta),
        Command::Decompose(a) => commands::decompose(&global, &a),
        Command::Verify(a) => commands::verify(&global, &a),
    });
    eprintln!("elapsed: {:.3}s", started.elapsed().as_secs_f64());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Suite) => ExitCode::from(1),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
