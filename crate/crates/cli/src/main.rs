//! `jamsim` command-line runner.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 runtime error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use jamsim::agents::{AgentConfig, AgentKind};
use jamsim::config::ExperimentFile;
use jamsim::env::{SenderProfile, SenderStrategy};
use jamsim::experiment::{run_trial, CellResult, ScenarioConfig};
use jamsim::report;

#[derive(Parser)]
#[command(
    name = "jamsim",
    version,
    about = "Simulate learning jammers against scripted senders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (sender, adversary) cell of an experiment file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `run.base_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `run.n_trials`.
        #[arg(long)]
        trials: Option<usize>,
        /// Trials run concurrently; 0 uses every core.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Paired t-test of per-trial success rates between two run directories.
    Compare {
        dir_a: PathBuf,
        dir_b: PathBuf,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Short constant-sender MAAS trial; prints `SRA=<value>`.
    Demo {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn exit(self) -> ExitCode {
        let (code, err) = match self {
            Failure::Config(e) => (2, e),
            Failure::Runtime(e) => (3, e),
        };
        eprintln!("error: {err:#}");
        ExitCode::from(code)
    }
}

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn runtime_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

const OUTPUT_FILES: [&str; 5] = [
    "steps.csv",
    "summary.csv",
    "curves.csv",
    "trial_sra.csv",
    "manifest.json",
];

fn load_config(
    path: &Path,
    seed: Option<u64>,
    trials: Option<usize>,
) -> Result<ExperimentFile, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(config_err)?;
    let mut file = ExperimentFile::from_json(&text).map_err(config_err)?;
    let overridden = seed.is_some() || trials.is_some();
    if let Some(s) = seed {
        file.run.base_seed = s;
    }
    if let Some(n) = trials {
        file.run.n_trials = n;
    }
    if overridden {
        file.seeds = None;
    }
    file.validate().map_err(config_err)?;
    Ok(file)
}

fn render(file: &ExperimentFile, parallel: usize) -> anyhow::Result<Vec<(&'static str, String)>> {
    let cells = file
        .cells()
        .into_iter()
        .map(|c| CellResult::run(c, parallel))
        .collect::<jamsim::Result<Vec<_>>>()?;
    Ok(vec![
        ("steps.csv", report::step_log_csv(&cells)),
        ("summary.csv", report::summary_csv(&cells)?),
        ("curves.csv", report::curve_csv(&cells)?),
        ("trial_sra.csv", report::trial_sra_csv(&cells)?),
        ("manifest.json", file.resolved().to_json() + "\n"),
    ])
}

fn write_outputs(out: &Path, files: &[(&str, String)]) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    for (name, body) in files {
        let path = out.join(name);
        fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn cmd_run(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    trials: Option<usize>,
    parallel: usize,
) -> Result<(), Failure> {
    let file = load_config(config, seed, trials)?;
    let existed = out.exists();
    let result = render(&file, parallel).and_then(|files| write_outputs(out, &files));
    if let Err(e) = result {
        for name in OUTPUT_FILES {
            let _ = fs::remove_file(out.join(name));
        }
        if !existed {
            let _ = fs::remove_dir(out);
        }
        return Err(runtime_err(e));
    }
    Ok(())
}

fn read_trial_sra(dir: &Path) -> Result<report::SraTable, Failure> {
    let path = dir.join("trial_sra.csv");
    let text = fs::read_to_string(&path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(config_err)?;
    report::parse_trial_sra(&text)
        .with_context(|| path.display().to_string())
        .map_err(config_err)
}

fn cmd_compare(a: &Path, b: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let table = report::compare_csv(&read_trial_sra(a)?, &read_trial_sra(b)?);
    match out {
        Some(path) => fs::write(path, table)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(runtime_err),
        None => {
            print!("{table}");
            Ok(())
        }
    }
}

fn cmd_demo(seed: u64) -> Result<(), Failure> {
    let mut config = ScenarioConfig::new(
        SenderProfile::single(SenderStrategy::Constant),
        AgentConfig::of_kind(AgentKind::Maas),
    );
    config.horizon = 200;
    let record = run_trial(&config, seed).map_err(runtime_err)?;
    let sra = record.sra(0.5, config.sra_window).map_err(runtime_err)?;
    println!("SRA={sra}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            config,
            out,
            seed,
            trials,
            parallel,
        } => cmd_run(config, out, *seed, *trials, *parallel),
        Command::Compare { dir_a, dir_b, out } => cmd_compare(dir_a, dir_b, out.as_deref()),
        Command::Demo { seed } => cmd_demo(*seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}
