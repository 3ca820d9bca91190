//! `ample`: comparison certificates, paradoxical decompositions and
//! invariant-measure programs for ample groupoids over subshifts.

mod commands;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Usage errors, as in sysexits.
pub const EXIT_USAGE: u8 = 64;
/// Unreadable or malformed input.
pub const EXIT_DATA: u8 = 65;

#[derive(Parser, Debug)]
#[command(name = "ample", version, about = "Certificates for comparison and paradoxicality in ample groupoids")]
pub struct Cli {
    /// Worker threads for scans (defaults to the number of CPUs).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SystemArgs {
    /// Built-in name (`ample catalog list`) or path to a system file.
    #[arg(long)]
    pub system: String,
    /// Cap on the word length of composed pairs.
    #[arg(long)]
    pub max_pair_length: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Longest generator word enumerated.
    #[arg(long, default_value_t = 8)]
    pub bound: usize,
    /// Extra levels a subject may be split into.
    #[arg(long, default_value_t = 3)]
    pub max_refine: usize,
    /// Backtracking nodes per search.
    #[arg(long, default_value_t = 200_000)]
    pub node_budget: usize,
    /// Depth of the invariant-measure refutation program.
    #[arg(long)]
    pub measure_depth: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Built-in systems.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Search for `FROM ≺ TO`; `|` separates tuple entries.
    Compare {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
    },
    /// Search for a (2,1)-paradoxical decomposition of a clopen.
    Paradox {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, allow_hyphen_values = true)]
        set: String,
    },
    /// Paradoxical search on every cylinder up to a depth.
    ScanPi {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Deepest cylinder scanned.
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Bisections translating the given sets over the whole space.
    Filling {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Sets separated by `|`.
        #[arg(long, allow_hyphen_values = true)]
        sets: String,
    },
    /// A bisection compressing a clopen properly into itself.
    Contract {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, allow_hyphen_values = true)]
        set: String,
    },
    /// Invariant probability measures at a depth, or a proof that none exist.
    Measures {
        #[command(flatten)]
        system: SystemArgs,
        /// Solve at exactly this depth.
        #[arg(long)]
        depth: Option<usize>,
        /// Without `--depth`, look for an obstruction up to this depth.
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
    },
    /// Minimality: orbit saturations of all cylinders of a depth.
    Minimal {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 8)]
        bound: usize,
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
    /// Cylinders on which every generator acts trivially.
    FixedUnits {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
    /// The type semigroup and abstract state programs.
    Semigroup {
        #[command(subcommand)]
        action: SemigroupAction,
    },
    /// Re-check every certificate in a report.
    Verify {
        /// Report file, or `-` for standard input.
        report: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum CatalogAction {
    /// Names of the built-in systems.
    List,
    /// Print a built-in system in the file format.
    Dump { name: String },
}

#[derive(Subcommand, Debug)]
pub enum SemigroupAction {
    /// `FROM ≤ TO` in the type semigroup.
    Leq {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
    },
    /// `FROM ∼ TO`: exact tilings of both tuples.
    Equiv {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
    },
    /// `a + a ≤ a`.
    Proper {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, allow_hyphen_values = true)]
        tuple: String,
    },
    /// `(n+1)·a ≤ n·b` against `a ≤ b`.
    Probe {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// A normalized state on a monoid presentation file.
    State {
        /// Presentation file: a `generators` line, then relations like `3x <= 2y`.
        #[arg(long)]
        presentation: String,
        #[arg(long)]
        target: String,
    },
    /// Inequalities between tuples with verified certificates, and a state
    /// normalized at the first tuple.
    Facts {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// A tuple; repeat for more generators.
        #[arg(long = "tuple", allow_hyphen_values = true, required = true)]
        tuples: Vec<String>,
    },
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("ample: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match commands::run(cli.command, argv[1..].to_vec()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("ample: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
