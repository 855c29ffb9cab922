use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ddmet_cli::{execute, RunConfig, RunError, MANIFEST_NAME};

#[derive(Parser)]
#[command(name = "ddmet", version, about = "Frequency-estimation QFI under dynamical decoupling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run {
        config: PathBuf,
        /// Worker threads for curve evaluation (default: all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Check a config file and print it with all defaults filled in.
    Validate { config: PathBuf },
}

fn load(path: &Path) -> Result<RunConfig, RunError> {
    RunConfig::load(path).map(RunConfig::with_env_output_dir).map_err(RunError::Config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => load(&config).map(|cfg| {
            println!("# {}: ok", config.display());
            for line in cfg.resolved_lines() {
                println!("{line}");
            }
        }),
        Command::Run { config, threads } => load(&config).and_then(|cfg| {
            let manifest = execute(&cfg, threads)?;
            for o in &manifest.outputs {
                println!("{}  {}", o.sha256, cfg.output_dir.join(&o.path).display());
            }
            println!("wrote {} ({:.3}s)", cfg.output_dir.join(MANIFEST_NAME).display(), manifest.wall_time_s);
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
