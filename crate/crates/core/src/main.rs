use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use decoysim::report::{self, Vary};
use decoysim::sim::{parse_assignment, parse_scenario, Scenario};
use decoysim::Error;

#[derive(Parser)]
#[command(
    name = "decoysim",
    version,
    about = "Decoy transmission and physical millionaires simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a single run.
    Run(Common),
    /// Execute many runs with seeds base+i.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        /// Vary one key over comma-separated values, e.g. noise_sigma=0,0.05
        #[arg(long)]
        vary: Option<String>,
    },
    /// Estimate adversary knowledge or auditor leakage.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Verify that runs replay to the same transcript digest.
    ReplayCheck {
        #[command(flatten)]
        common: Common,
        /// Records file from a previous run or sweep.
        #[arg(long, conflicts_with = "config")]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// KEY=VALUE scenario override (repeatable; dotted keys for sections).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Records,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Config(anyhow::Error),
    Protocol,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

impl Common {
    fn config_text(&self) -> anyhow::Result<String> {
        let path = self.config.as_ref().context("--config is required")?;
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }

    fn overrides(&self) -> Result<Vec<(String, String)>, Error> {
        let mut ov: Vec<_> = self
            .set
            .iter()
            .map(|s| parse_assignment(s))
            .collect::<Result<_, _>>()?;
        if let Some(seed) = self.seed {
            ov.push(("seed".to_string(), seed.to_string()));
        }
        Ok(ov)
    }

    fn scenario(&self) -> Result<Scenario, Failure> {
        let text = self.config_text()?;
        Ok(parse_scenario(&text, &self.overrides()?)?)
    }

    fn sink(&self) -> anyhow::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => {
                Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)
            }
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn record<T: Serialize>(w: &mut dyn Write, value: &T) -> anyhow::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run(c) => {
            let r = report::cmd_run(&c.scenario()?)?;
            let mut w = c.sink()?;
            match c.format {
                Format::Text => write!(w, "{}", r.to_text()).map_err(anyhow::Error::from)?,
                Format::Records => record(&mut w, &r)?,
            }
            if r.exit_code() != 0 {
                return Err(Failure::Protocol);
            }
        }
        Command::Sweep { common, runs, vary } => {
            let vary = vary.as_deref().map(Vary::parse).transpose()?;
            let r = report::cmd_sweep(
                &common.config_text()?,
                &common.overrides()?,
                runs,
                vary.as_ref(),
            )?;
            let mut w = common.sink()?;
            match common.format {
                Format::Text => write!(w, "{}", r.to_text()).map_err(anyhow::Error::from)?,
                Format::Records => {
                    for run in &r.runs {
                        record(&mut w, run)?;
                    }
                    record(&mut w, &serde_json::json!({ "summary": &r }))?;
                }
            }
        }
        Command::Analyze { common, samples } => {
            let r = report::cmd_analyze(&common.scenario()?, samples)?;
            let mut w = common.sink()?;
            match common.format {
                Format::Text => write!(w, "{}", r.to_text()).map_err(anyhow::Error::from)?,
                Format::Records => record(&mut w, &r)?,
            }
        }
        Command::ReplayCheck { common, report } => {
            let checks = match &report {
                Some(p) => {
                    let text = fs::read_to_string(p)
                        .with_context(|| format!("reading {}", p.display()))?;
                    report::replay_records(&text)?
                }
                None => vec![report::replay_check(&common.scenario()?)?],
            };
            let mut w = common.sink()?;
            for c in &checks {
                match common.format {
                    Format::Text => writeln!(
                        w,
                        "run {}: expected {} actual {} {}",
                        c.run_id,
                        c.expected,
                        c.actual,
                        if c.matches { "OK" } else { "MISMATCH" }
                    )
                    .map_err(anyhow::Error::from)?,
                    Format::Records => record(&mut w, c)?,
                }
            }
            if checks.iter().any(|c| !c.matches) {
                return Err(Failure::Protocol);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("DECOYSIM_LOG")).init();
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Protocol) => ExitCode::from(2),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
