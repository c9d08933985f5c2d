use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use clusterfb::config::ExperimentConfig;
use clusterfb::report::{cmd_bitalloc, cmd_simulate, cmd_thresholds, MANIFEST_FILE, RESULTS_FILE};
use clusterfb::Error;

#[derive(Parser)]
#[command(name = "clusterfb", version, about = "Cluster-threshold limited feedback for random beamforming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print cluster membership, thresholds and the minimum cluster count.
    Thresholds(Common),
    /// Run the user-count sweep and write results.csv and manifest.toml.
    Simulate(Common),
    /// Print the optimal bit allocation and quantizer tables.
    Bitalloc(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo drops per (K, scheme) point.
    #[arg(long)]
    drops: Option<u64>,
    /// Comma-separated user counts, e.g. 10,20,30.
    #[arg(long, value_delimiter = ',')]
    k_list: Option<Vec<usize>>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(d) = self.drops {
            cfg.run.drops = d;
        }
        if let Some(k) = &self.k_list {
            cfg.run.k_list = k.clone();
        }
        if let Some(o) = &self.out {
            cfg.run.out_dir = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(text: &str, out: Option<&Path>, file: &str) -> Result<(), Error> {
    match out {
        None => print!("{text}"),
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
            let path = dir.join(file);
            std::fs::write(&path, text).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Thresholds(c) => {
            let cfg = c.resolve()?;
            emit(&cmd_thresholds(&cfg)?, c.out.as_deref(), "thresholds.csv")
        }
        Command::Bitalloc(c) => {
            let cfg = c.resolve()?;
            emit(&cmd_bitalloc(&cfg)?, c.out.as_deref(), "bitalloc.txt")
        }
        Command::Simulate(c) => {
            let cfg = c.resolve()?;
            let dir = cfg.run.out_dir.clone();
            let rows = cmd_simulate(&cfg, &dir)?;
            eprintln!(
                "wrote {} rows to {} and {}",
                rows.len(),
                dir.join(RESULTS_FILE).display(),
                dir.join(MANIFEST_FILE).display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
