use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use prefractal_cli::{CliError, Pipeline, RunConfig, Stage};

#[derive(Debug, Parser)]
#[command(name = "prefractal", version, about = "Meshes, solvers and convergence studies on prefractal domains")]
struct Cli {
    /// JSON config; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for sampled quantities, overriding `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, overriding `threads`.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the level-m prefractal curve.
    Geometry,
    /// Triangulate the domain built on the stored curve.
    Mesh,
    /// Smallest eigenvalues on the stored mesh.
    Eigs,
    /// Poisson solution for a constant source on the stored mesh.
    Poisson,
    /// Damped wave run started from the stored Poisson solution.
    Wave,
    /// Westervelt run started from the stored Poisson solution.
    Westervelt,
    /// Level-by-level study selected by `study.kind`.
    Study,
    /// Every stage listed in `pipeline`.
    Run,
    /// Print the resolved config.
    Config,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.output = out.to_string_lossy().into_owned();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = load(cli)?;
    let stages = match cli.command {
        Command::Config => {
            config.validate()?;
            print!("{}", config.to_json());
            return Ok(());
        }
        Command::Geometry => vec![Stage::Geometry],
        Command::Mesh => vec![Stage::Mesh],
        Command::Eigs => vec![Stage::Eigs],
        Command::Poisson => vec![Stage::Poisson],
        Command::Wave => vec![Stage::Wave],
        Command::Westervelt => vec![Stage::Westervelt],
        Command::Study => vec![Stage::Study],
        Command::Run => Vec::new(),
    };
    let name = format!("{:?}", cli.command).to_lowercase();
    let mut pipeline = Pipeline::new(&name, config)?;
    let stages = if stages.is_empty() { pipeline.configured_stages()? } else { stages };
    let manifest = pipeline.execute(&stages)?;
    for t in &manifest.timings {
        eprintln!("{:<10} {:>9.3} s", t.stage, t.seconds);
    }
    for a in &manifest.artifacts {
        eprintln!("wrote {} ({}, {} bytes)", a.path, a.kind, a.bytes);
    }
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
