use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use subexp::{AmbiguitySet, FamilySpec};
use subexp_cli::{run, write_artifacts, ExperimentConfig, Format};

/// Exact sub-linear expectation experiments.
#[derive(Parser)]
#[command(name = "subexp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suite described by a JSON config and write its artifacts.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Overrides `format` from the config.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Check a family file of the form {"support": [...], "laws": [[...]]}.
    Validate { family: PathBuf },
    /// Print the tool version.
    Version,
}

/// Exit status for invalid input or I/O failure; 1 is reserved for
/// assertion violations.
const EXIT_INVALID: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            output_dir,
            format,
        } => run_command(&config, output_dir, format),
        Command::Validate { family } => validate(&family),
        Command::Version => {
            println!("subexp {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
    }
}

fn run_command(path: &Path, output_dir: Option<PathBuf>, format: Option<Format>) -> ExitCode {
    let mut cfg = match ExperimentConfig::from_path(path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if let Some(dir) = output_dir {
        cfg.output_dir = Some(dir);
    }
    if let Some(f) = format {
        cfg.format = f;
    }
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("subexp-out"));

    let result = run(&cfg).and_then(|out| {
        let manifest = write_artifacts(&dir, &cfg, &out)?;
        Ok((out, manifest))
    });
    match result {
        Ok((out, manifest)) => {
            let s = &out.summary;
            println!(
                "{}: {} instances, {} skipped, {} violations; manifest {}",
                cfg.suite.name(),
                s.instances,
                s.skipped,
                s.violations,
                manifest.display()
            );
            for v in &out.violations {
                eprintln!("violation: {v}");
            }
            if out.violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

fn validate(path: &Path) -> ExitCode {
    let checked = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .and_then(|text| Ok(serde_json::from_str::<FamilySpec>(&text)?))
        .and_then(|spec| Ok(AmbiguitySet::try_from(spec)?));
    match checked {
        Ok(set) => {
            println!(
                "{}: ok ({} support points, {} laws)",
                path.display(),
                set.support().len(),
                set.laws().len()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}: {e:#}", path.display());
            ExitCode::from(EXIT_INVALID)
        }
    }
}
