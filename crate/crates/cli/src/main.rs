use std::path::PathBuf;
use std::process::ExitCode;

use cfdim_cli::{execute, RunConfig, RunError};
use clap::Parser;

/// Run a cfdim job from a JSON config.
///
/// Exit codes: 0 ok, 1 bad config, 2 refused by a gate, 3 i/o or internal failure.
#[derive(Parser, Debug)]
#[command(name = "cfdim", version)]
struct Args {
    /// Path to the JSON config, or `-` for stdin.
    #[arg(long, short)]
    config: PathBuf,
    /// Override `output.path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn load(args: &Args) -> Result<RunConfig, RunError> {
    let text = if args.config.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(&args.config)
    }
    .map_err(|e| RunError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(p) = &args.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cfdim: thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    let code = load(&args).and_then(|cfg| execute(&cfg, &mut std::io::stdout().lock()));
    match code {
        Ok(c) => ExitCode::from(c as u8),
        Err(e) => {
            eprintln!("cfdim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
