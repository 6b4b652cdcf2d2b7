//! `photon-source run|validate <config>`.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::config::{parse_scenario, OUTPUT_ROOT_ENV};
use super::run::{run, RunOptions};
use super::HarnessError;

#[derive(Debug, Parser)]
#[command(name = "photon-source", version, about = "Single-photon source simulation harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write its datasets.
    Run {
        config: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Root for default output directories.
        #[arg(long, env = OUTPUT_ROOT_ENV, default_value = "output", hide = true)]
        output_root: PathBuf,
    },
    /// Check a scenario file and list every problem.
    Validate { config: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, HarnessError> {
    Ok(std::fs::read_to_string(path)?)
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Validate { config } => {
            let text = read(&config)?;
            let diags = super::config::validate(&text);
            if diags.is_empty() {
                println!("{}: ok", config.display());
                Ok(())
            } else {
                Err(HarnessError::Config(diags))
            }
        }
        Command::Run { config, seed, output_dir, threads, output_root } => {
            let text = read(&config)?;
            let mut scenario = parse_scenario(&text, &output_root).map_err(HarnessError::Config)?;
            if let Some(seed) = seed {
                scenario.seed = seed;
                scenario.parameters.insert("seed".into(), super::config::Value::Int(seed as i64));
            }
            if let Some(dir) = output_dir {
                scenario.output_dir = dir;
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| HarnessError::Runtime(e.to_string()))?;
            let manifest = pool.install(|| run(&scenario, &RunOptions::default()))?;
            for f in &manifest.files {
                println!("{}  {}", f.sha256, scenario.output_dir.join(&f.name).display());
            }
            Ok(())
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
