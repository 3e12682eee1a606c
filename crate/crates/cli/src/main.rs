//! `derham-ns {solve|radial|selfsim|norms|verify} --config <path> [--out <dir>]`

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use derham_ns::io::RunConfig;

#[derive(Parser)]
#[command(name = "derham-ns", version, about = "Navier-Stokes type equations from the de Rham complex")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Paths {
    /// JSON run configuration, or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Mild solution by Picard iteration.
    Solve(Paths),
    /// Radial equation: a single run, or an amplitude sweep.
    Radial(Paths),
    /// Self-similar profiles by shooting.
    Selfsim(Paths),
    /// Weighted Hölder norms of a field.
    Norms(Paths),
    /// Identity suite; exits 4 if any check fails.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_threads() {
    let Ok(v) = std::env::var("DERHAM_NS_THREADS") else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the thread pool: {e}");
            }
        }
        _ => log::warn!("ignoring DERHAM_NS_THREADS={v:?}"),
    }
}

fn run(cli: Cli) -> derham_ns::Result<i32> {
    let load = |p: &PathBuf| RunConfig::load(p);
    match cli.command {
        Command::Solve(p) => commands::solve(&load(&p.config)?, p.out.as_deref()),
        Command::Radial(p) => commands::radial(&load(&p.config)?, p.out.as_deref()),
        Command::Selfsim(p) => commands::selfsim(&load(&p.config)?, p.out.as_deref()),
        Command::Norms(p) => commands::norms(&load(&p.config)?, p.out.as_deref()),
        Command::Verify { config, out } => {
            let cfg = config.as_ref().map(load).transpose()?;
            commands::verify(cfg.as_ref(), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { commands::EXIT_USAGE as u8 } else { 0 });
        }
    };
    init_threads();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::EXIT_USAGE as u8)
        }
    }
}
