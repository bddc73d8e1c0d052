//! Command-line front end for the softsheaf verification library.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "softsheaf", version, about = "Exhaustive checks of soft sheaf representations on finite models")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Write the report to this file (a directory for `generate-corpus`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the random magmas in the algebra menagerie.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Size caps, e.g. `lattice=6,points=5,bijection=4,ring=60`.
    #[arg(long, env = "SOFTSHEAF_CAPS", global = true)]
    caps: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a lattice file and run the lattice checks on it.
    CheckLattice { file: PathBuf },
    /// Validate an algebra file and check its congruences.
    CheckAlgebra { file: PathBuf },
    /// Print the congruence lattice of an algebra (file or catalog name).
    ConLattice { algebra: String },
    /// Run one family of checks, on the given instance or the whole corpus.
    Verify {
        #[arg(value_enum)]
        target: Target,
        /// Algebra file or name (`set3`, `Z4`, `Z2xZ2`, `semilattice2`, `zn:<n>`, group names).
        #[arg(long)]
        algebra: Option<String>,
        /// Lattice file or name (`chain<k>`, `bool<2^k>`, `N5`, `M3`).
        #[arg(long)]
        lattice: Option<String>,
        /// Poset file for `hofmann-mislove`.
        #[arg(long)]
        poset: Option<PathBuf>,
        /// Block labels of the first congruence for `commute-triple`, e.g. `0,0,1`.
        #[arg(long, requires = "theta2")]
        theta1: Option<String>,
        /// Block labels of the second congruence for `commute-triple`.
        #[arg(long, requires = "theta1")]
        theta2: Option<String>,
    },
    /// Finite compact ordered spaces.
    Compord {
        #[command(subcommand)]
        command: CompordCommand,
    },
    /// The Gelfand pipeline on a finite commutative ring.
    Gelfand {
        /// `zn:<n>`, `product:<spec>,<spec>` or a ring file.
        #[arg(long)]
        ring: String,
    },
    /// The Pierce decomposition of a finite commutative ring.
    Pierce {
        #[arg(long)]
        ring: String,
    },
    /// Write the lattice, space, algebra and ring corpus with a manifest.
    GenerateCorpus,
}

#[derive(Subcommand, Debug)]
enum CompordCommand {
    /// Interpolating decompositions against commuting frame homomorphisms.
    Bijection {
        #[arg(long, requires = "y")]
        x: Option<PathBuf>,
        #[arg(long, requires = "x")]
        y: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    ThmGamma,
    CorMain,
    TGen,
    Wilker,
    HofmannMislove,
    CommuteTriple,
}

impl Target {
    fn name(self) -> &'static str {
        match self {
            Target::ThmGamma => "thm-gamma",
            Target::CorMain => "cor-main",
            Target::TGen => "t-gen",
            Target::Wilker => "wilker",
            Target::HofmannMislove => "hofmann-mislove",
            Target::CommuteTriple => "commute-triple",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
