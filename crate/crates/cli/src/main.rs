//! `opstrict`: weak operad actions on finite categories at desk scale.
//!
//! Subcommands compile equational theories to operad tables, validate
//! weak actions, build and verify strict models, factor weak maps through
//! them, and enumerate trees by evaluation class. Reports go to standard
//! output (or `--out`) and are byte-identical across runs for the same
//! inputs and configuration; wall time goes to standard error. Exit code
//! 0 means every check passed, 1 a failed check, 2 unusable input, 3 a
//! cap cut the computation off.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "opstrict", version, about = "weak operad actions: validate, strictify, factorize")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Largest operad arity kept when compiling a theory.
    #[arg(long, global = true, default_value_t = 4)]
    arity_cap: usize,

    /// Largest tree swept by validation and enumeration.
    #[arg(long, global = true, default_value_t = 4)]
    tree_size_cap: usize,

    /// Largest term kept in the closure universe when compiling a theory.
    #[arg(long, global = true, default_value_t = 5)]
    term_size_cap: usize,

    /// Candidate evaluations allowed to the uniqueness search.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    uniqueness_bound: usize,

    /// Report rendering.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,

    /// Report destination; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Compile an equational presentation into an operad table.
    CompileTheory {
        theory: PathBuf,
        /// Write the compiled operad here.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Check the coherence of a weak action file.
    Validate { wpc: PathBuf },
    /// Build the strict model of a weak action and verify the equivalence.
    Strictify {
        wpc: PathBuf,
        /// Write the strict model here, as a re-ingestable action file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Factor a weak map with a strict target through the strict model.
    Factorize {
        wpc: PathBuf,
        strict_wpc: PathBuf,
        fun: PathBuf,
        /// Write the induced strict map here.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// List the trees of one arity and partition them by evaluation.
    Enumerate {
        operad: PathBuf,
        #[arg(long)]
        arity: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let cfg = output::Config {
        arity_cap: cli.arity_cap,
        tree_size_cap: cli.tree_size_cap,
        term_size_cap: cli.term_size_cap,
        uniqueness_bound: cli.uniqueness_bound,
    };

    let result = match &cli.command {
        Command::CompileTheory { theory, emit } => {
            commands::compile_theory(cfg, theory, emit.as_deref())
        }
        Command::Validate { wpc } => commands::validate(cfg, wpc),
        Command::Strictify { wpc, emit } => commands::strictify_cmd(cfg, wpc, emit.as_deref()),
        Command::Factorize { wpc, strict_wpc, fun, emit } => {
            commands::factorize_cmd(cfg, wpc, strict_wpc, fun, emit.as_deref())
        }
        Command::Enumerate { operad, arity } => commands::enumerate(cfg, operad, *arity),
    };

    let code = match result {
        Ok(doc) => {
            let rendered = doc.render(match cli.format {
                FormatArg::Text => output::Format::Text,
                FormatArg::Json => output::Format::Json,
            });
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &rendered)
                    .map_err(|e| eprintln!("error: cannot write {}: {e}", path.display()))
                    .is_ok(),
                None => {
                    print!("{rendered}");
                    true
                }
            };
            if !written {
                2
            } else if doc.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    };
    eprintln!("wall_ms {}", started.elapsed().as_millis());
    ExitCode::from(code)
}
