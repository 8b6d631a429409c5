use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use portsel_cli::{cmd_all, cmd_evaluate, cmd_generate, cmd_report, cmd_run, exit_code, Config};
use portsel_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "portsel",
    version,
    about = "Sequential algorithm portfolio selection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML or JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Store root directory.
    #[arg(long, global = true, default_value = "store")]
    store: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated dimensions.
    #[arg(long, global = true, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// 1000 functions per dimension, d in {2, 5, 10}, T = 2000 d.
    #[arg(long, global = true)]
    paper_scale: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write manifests, suites and ELA features.
    Generate,
    /// Run the optimizers and compute EAFs; completed keys are skipped.
    Run,
    /// Compute baselines and selections and write the results bundle.
    Evaluate,
    /// Print the results bundle as text tables.
    Report,
    /// generate, run and evaluate in sequence, then report.
    All,
}

fn config(cli: &Cli) -> Result<Config> {
    let mut c = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if cli.paper_scale {
        c.apply_paper_scale();
    }
    if let Some(s) = cli.seed {
        c.master_seed = s;
    }
    if let Some(d) = &cli.dims {
        c.dims = d.clone();
    }
    if let Some(w) = cli.workers {
        c.workers = w;
    }
    Ok(c)
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
        _ => Ok(()),
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let c = config(cli)?;
    let root = &cli.store;
    match cli.command {
        Command::Generate => cmd_generate(&c, root),
        Command::Run => {
            let s = cmd_run(&c, root)?;
            emit(&format!(
                "computed {} keys, skipped {} completed keys\n",
                s.computed, s.skipped
            ))
        }
        Command::Evaluate => {
            cmd_evaluate(&c, root)?;
            emit(&format!(
                "results written to {}\n",
                portsel_cli::evaluate::results_dir(root).display()
            ))
        }
        Command::Report => emit(&cmd_report(root)?),
        Command::All => {
            cmd_all(&c, root)?;
            emit(&cmd_report(root)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("portsel: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
