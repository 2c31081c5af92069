use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{ExperimentConfig, ScenarioKind, OUT_DIR_ENV};
use super::episode::{run_episode_with, EpisodeOptions};
use super::output::{aggregate, aggregate_regret, read_csv, run_experiment, write_csv, RegretRow, RunRocRow};
use crate::bandit::LearnerKind;
use crate::error::{Error, Result};
use crate::signalchain::{header_path, write_map_dump};
use crate::spectrum::Catalog;

#[derive(Debug, Parser)]
#[command(name = "cradar", version, about = "Constrained online waveform selection for pulse-agile radar")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its artifacts.
    Run(RunArgs),
    /// Aggregate per-run ROC and regret files into summary tables.
    Roc(RocArgs),
    /// Write the range-Doppler map of one CPI.
    DumpMap(DumpArgs),
    /// Export the waveform catalog as CSV.
    Catalog(CatalogArgs),
}

#[derive(Debug, Args, Default)]
pub struct ConfigArgs {
    /// TOML experiment file; defaults apply when omitted.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scenario: Option<ScenarioKind>,
    #[arg(long = "algo")]
    pub algorithm: Option<LearnerKind>,
    #[arg(long, conflicts_with = "unconstrained")]
    pub constrained: bool,
    #[arg(long)]
    pub unconstrained: bool,
    /// Base seed; run k uses seed + k.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub cpis: Option<usize>,
    #[arg(long)]
    pub pulses: Option<usize>,
    /// Any configuration key, e.g. `--set cost.dhat=0.3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{kv}` is not KEY=VALUE")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(s) = self.scenario {
            cfg.scenario = s;
        }
        if let Some(a) = self.algorithm {
            cfg.algorithm = a;
        }
        if self.constrained {
            cfg.constrained = true;
        }
        if self.unconstrained {
            cfg.constrained = false;
        }
        if let Some(s) = self.seed {
            cfg.base_seed = s;
        }
        if let Some(r) = self.runs {
            cfg.runs = r;
        }
        if let Some(c) = self.cpis {
            cfg.cpis = c;
        }
        if let Some(p) = self.pulses {
            cfg.cpi.pulses = p;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output directory (overrides the environment and config file).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    /// Artifact directories or `*.runs.csv` / `*.regret.csv` files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = 0)]
    pub run: usize,
    #[arg(long, default_value_t = 0)]
    pub cpi: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn out_dir(flag: &Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.clone();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(&cfg.output.dir),
    }
}

fn collect_inputs(inputs: &[PathBuf], suffix: &str) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.to_string_lossy().ends_with(suffix))
                .collect();
            found.sort();
            files.extend(found);
        } else if p.to_string_lossy().ends_with(suffix) {
            files.push(p.clone());
        } else if !p.exists() {
            return Err(Error::io(p, std::io::Error::from(std::io::ErrorKind::NotFound)));
        }
    }
    Ok(files)
}

pub fn execute<W: Write>(cli: Cli, stdout: &mut W) -> Result<()> {
    match cli.command {
        Command::Run(a) => {
            let cfg = a.config.resolve()?;
            let dir = out_dir(&a.out, &cfg);
            let (art, _) = run_experiment(&cfg, &dir)?;
            let _ = writeln!(stdout, "wrote {}", art.roc.display());
            let _ = writeln!(stdout, "wrote {}", art.regret.display());
            Ok(())
        }
        Command::Roc(a) => {
            let mut runs: Vec<RunRocRow> = Vec::new();
            for f in collect_inputs(&a.inputs, ".runs.csv")? {
                runs.extend(read_csv::<RunRocRow>(&f)?);
            }
            let mut regret: Vec<RegretRow> = Vec::new();
            for f in collect_inputs(&a.inputs, ".regret.csv")? {
                regret.extend(read_csv::<RegretRow>(&f)?);
            }
            let summary = aggregate(&runs)?;
            let dir = a.out.clone().unwrap_or_else(|| out_dir(&None, &ExperimentConfig::default()));
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let roc = dir.join("roc_summary.csv");
            write_csv(&roc, &summary)?;
            let _ = writeln!(stdout, "wrote {}", roc.display());
            if !regret.is_empty() {
                let path = dir.join("regret_summary.csv");
                write_csv(&path, &aggregate_regret(&regret))?;
                let _ = writeln!(stdout, "wrote {}", path.display());
            }
            Ok(())
        }
        Command::DumpMap(a) => {
            let mut cfg = a.config.resolve()?;
            if a.cpi >= cfg.cpis {
                return Err(Error::param("cpi", format!("only {} CPIs per run", cfg.cpis)));
            }
            if a.run >= cfg.runs {
                return Err(Error::param("run", format!("only {} runs", cfg.runs)));
            }
            cfg.detection = true;
            let dir = out_dir(&a.out, &cfg);
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            // replay the requested run only as far as the requested CPI
            let opts = EpisodeOptions {
                keep_map: Some(a.cpi),
                stop_after: Some(a.cpi + 1),
            };
            let ep = run_episode_with(&cfg, a.run, opts)?;
            let map = ep
                .cpis
                .iter()
                .find_map(|c| c.map.as_ref().filter(|_| c.index == a.cpi))
                .ok_or_else(|| Error::Invariant("requested CPI map was not kept".into()))?;
            let path = dir.join(format!("{}.run{:03}.cpi{:03}.bin", cfg.variant_tag(), a.run, a.cpi));
            write_map_dump(map, cfg.scenario.as_str(), &path)?;
            let _ = writeln!(stdout, "wrote {}", path.display());
            let _ = writeln!(stdout, "wrote {}", header_path(&path).display());
            Ok(())
        }
        Command::Catalog(a) => {
            let cfg = a.config.resolve()?;
            let r = cfg.validate()?;
            write_catalog(&r.catalog, a.out.as_deref(), stdout)
        }
    }
}

fn write_catalog<W: Write>(catalog: &Catalog, out: Option<&Path>, stdout: &mut W) -> Result<()> {
    match out {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| Error::io(p, e))?;
            catalog.write_csv(f)
        }
        None => catalog.write_csv(stdout),
    }
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut out = std::io::stdout().lock();
    match execute(cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
