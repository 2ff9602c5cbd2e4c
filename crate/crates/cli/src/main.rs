use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use sgk_cli::{execute, parse_config, CliError, Command};
use sgk_core::Execution;

/// Spin gauge field toolkit: trajectories, curvature maps, monopole charges,
/// spin-transport ensembles and self-verification.
#[derive(Debug, Parser)]
#[command(name = "sgk", version)]
struct Args {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `seed` in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: &Args) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Schema(vec![format!("config: cannot read {}: {e}", args.config.display())]))?;
    let mut cfg = parse_config(&text, args.command).map_err(CliError::Schema)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let out = args.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let exec = if args.threads == Some(1) { Execution::Sequential } else { Execution::Parallel };
    let go = || execute(&cfg, &out, exec).map(|_| ());
    match args.threads {
        #[cfg(feature = "parallel")]
        Some(n) if n > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Schema(vec![format!("threads: {e}")]))?
            .install(go),
        Some(0) => Err(CliError::Schema(vec!["threads: must be at least 1".into()])),
        _ => go(),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.payload());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
