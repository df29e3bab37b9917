use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use smlab::instance::Caps;
use smlab::laws::Suite;
use smlab::zlattice::DEFAULT_WITNESS_BOUND;
use smlab::{Error, Result};
use smlab_cli as cli;

/// Submodule-lattice properties over finite table modules and integer lattices.
///
/// Size caps can be overridden with SMLAB_CAPS="ring=64,module=200,lattice=512".
#[derive(Parser)]
#[command(name = "smlab", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate properties of a module and optional submodule.
    Analyze {
        file: PathBuf,
        /// Comma-separated property names, or `all`.
        #[arg(long, default_value = "all")]
        props: String,
        /// Add element labels next to index lists.
        #[arg(long)]
        pretty: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the submodule lattice with cover relations.
    Lattice {
        file: PathBuf,
        #[arg(long)]
        pretty: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the law suite over the generated corpus.
    Laws {
        /// core (finite modules), z (integer lattices) or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        max_ring: Option<usize>,
        #[arg(long)]
        max_module: Option<usize>,
        /// Worker threads; 1 runs sequentially.
        #[arg(long)]
        jobs: Option<usize>,
        /// Comma-separated law identifiers; defaults to the whole registry.
        #[arg(long)]
        laws: Option<String>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a markdown summary table to this file.
        #[arg(long)]
        markdown: Option<PathBuf>,
    },
    /// Decide strong irreducibility of N in a finitely generated Z-module.
    DecideZ {
        /// One file with "zmodule" and "zsub", or two files holding one each.
        #[arg(required = true, num_args = 1..=2)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_WITNESS_BOUND)]
        witness_bound: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a pair K, L with K ∩ L ⊆ N and neither inside N.
    Witness {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WITNESS_BOUND)]
        bound: u32,
        #[arg(long)]
        pretty: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(args: Args) -> Result<bool> {
    let mut caps = Caps::from_env()?;
    match args.command {
        Command::Analyze { file, props, pretty, out } => {
            let f = cli::read_instance(&file)?;
            let props: Vec<String> = props.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            emit(&cli::cmd_analyze(&f, &props, &caps, pretty)?, out.as_ref())?;
        }
        Command::Lattice { file, pretty, out } => {
            let f = cli::read_instance(&file)?;
            emit(&cli::cmd_lattice(&f, &caps, pretty)?, out.as_ref())?;
        }
        Command::Laws { suite, seed, max_ring, max_module, jobs, laws, out, markdown } => {
            let suite: Suite = suite.parse()?;
            if let Some(r) = max_ring {
                caps.ring = r;
            }
            if let Some(m) = max_module {
                caps.module = m;
            }
            let laws = laws.as_deref().map(cli::parse_law_list).transpose()?;
            let report = cli::cmd_laws(&cli::LawsArgs { suite, seed, caps, jobs, laws })?;
            if let Some(p) = markdown {
                std::fs::write(&p, report.markdown()).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            }
            emit(&report.to_json(), out.as_ref())?;
            eprintln!(
                "{} results: {} pass, {} fail, {} skipped",
                report.summary.results, report.summary.pass, report.summary.fail, report.summary.skipped
            );
            return Ok(report.passed());
        }
        Command::DecideZ { files, witness_bound, out } => {
            let parsed = files.iter().map(|p| cli::read_partial(p)).collect::<Result<Vec<_>>>()?;
            let f = cli::merge_files(&parsed)?;
            emit(&cli::cmd_decide_z(&f, witness_bound)?, out.as_ref())?;
        }
        Command::Witness { file, bound, pretty, out } => {
            let f = cli::read_instance(&file)?;
            emit(&cli::cmd_witness(&f, &caps, bound, pretty)?, out.as_ref())?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("smlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
