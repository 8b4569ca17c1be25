use std::path::PathBuf;
use std::process::ExitCode;

use casimir_cli::{config, execute, CliError, Mode, THREADS_ENV};
use clap::Parser;

/// World-line Monte Carlo Casimir energies for line and disk configurations.
#[derive(Debug, Parser)]
#[command(name = "casimir", version)]
struct Args {
    mode: Mode,
    /// Flat JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; falls back to CASIMIR_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Also report the closed-form value where one exists.
    #[arg(long)]
    analytic: bool,
}

fn threads(cli: Option<usize>, file: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = cli.or(file) {
        return if n == 0 {
            Err(CliError::Config("invalid `threads`: must be at least 1".into()))
        } else {
            Ok(n)
        };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn run(args: Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let mut cfg = config::parse_config(&text, Some(args.mode))?;
    if args.analytic {
        if !matches!(args.mode, Mode::Energy | Mode::SpectralCheck) {
            return Err(CliError::Config(format!(
                "--analytic is not available for mode {}",
                args.mode
            )));
        }
        cfg.analytic = Some(true);
    }
    let n = threads(args.threads, cfg.threads)?;
    cfg.threads = Some(n);
    eprintln!(
        "casimir {}: seed {}, {} loops, {} threads",
        args.mode,
        cfg.seed.unwrap(),
        cfg.loops.unwrap(),
        n
    );
    let table = execute(&cfg, n)?;
    let (csv, side) = casimir_cli::write_outputs(&cfg, &table)?;
    eprintln!("wrote {} and {}", csv.display(), side.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
