use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::episode::{run_episode_with, Episode, EpisodeOptions};
use crate::error::{Error, Result};
use crate::signalchain::{roc_curve, write_map_dump, DetectionScore};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub t: u64,
    pub s_hat_bits: String,
    pub s_true_bits: String,
    pub waveform_id: usize,
    pub cost: f64,
    pub distortion: f64,
    pub regret_cum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocRow {
    pub pfa_desired: f64,
    pub pd_mean: f64,
    pub pfa_empirical: f64,
    pub algo: String,
    pub scenario: String,
    pub constrained: bool,
}

/// One run's ROC, the unit `aggregate` folds over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRocRow {
    pub algo: String,
    pub scenario: String,
    pub constrained: bool,
    pub run: usize,
    pub pfa_desired: f64,
    pub pd_mean: f64,
    pub pfa_empirical: f64,
    pub cpis: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpiScoreRow {
    pub algo: String,
    pub scenario: String,
    pub constrained: bool,
    pub run: usize,
    pub cpi: usize,
    pub pfa_desired: f64,
    pub detected: usize,
    pub targets: usize,
    pub false_alarms: usize,
    pub cells: usize,
    pub pfa_empirical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretRow {
    pub algo: String,
    pub scenario: String,
    pub constrained: bool,
    pub run: usize,
    pub t: u64,
    pub regret_cum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocSummaryRow {
    pub algo: String,
    pub scenario: String,
    pub constrained: bool,
    pub pfa_desired: f64,
    pub pd_mean: f64,
    pub pd_stderr: f64,
    pub pfa_empirical: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretSummaryRow {
    pub algo: String,
    pub scenario: String,
    pub constrained: bool,
    pub t: u64,
    pub regret_mean: f64,
    pub regret_stderr: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub config_snapshot: PathBuf,
    pub episode_logs: Vec<PathBuf>,
    pub roc: PathBuf,
    pub runs: PathBuf,
    pub cpis: PathBuf,
    pub regret: PathBuf,
    pub dumps: Vec<PathBuf>,
}

pub fn episode_rows(ep: &Episode) -> Vec<EpisodeRow> {
    ep.pris
        .iter()
        .map(|p| EpisodeRow {
            t: p.t,
            s_hat_bits: p.s_hat.to_string(),
            s_true_bits: p.s_true.to_string(),
            waveform_id: p.waveform,
            cost: p.cost,
            distortion: p.distortion,
            regret_cum: p.regret_cum,
        })
        .collect()
}

pub fn write_csv<T: Serialize, P: AsRef<Path>>(path: P, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(file, rows)
}

pub fn write_csv_to<T: Serialize, W: Write>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Reads a CSV, rejecting files whose header does not match `T`.
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Schema(format!("{}: {e}", path.display()))))
        .collect()
}

fn variant(cfg: &ExperimentConfig) -> (String, String, bool) {
    (cfg.algorithm.as_str().into(), cfg.scenario.as_str().into(), cfg.constrained)
}

/// Per-run ROC over the run's scored CPIs.
pub fn run_roc(cfg: &ExperimentConfig, ep: &Episode) -> Vec<RunRocRow> {
    let (algo, scenario, constrained) = variant(cfg);
    let scores: Vec<DetectionScore> = ep
        .scored_cpis(cfg.burn_in_cpis)
        .flat_map(|c| c.scores.iter().cloned())
        .collect();
    roc_curve(&scores)
        .into_iter()
        .map(|p| RunRocRow {
            algo: algo.clone(),
            scenario: scenario.clone(),
            constrained,
            run: ep.run,
            pfa_desired: p.pfa_desired,
            pd_mean: p.pd_mean,
            pfa_empirical: p.pfa_empirical,
            cpis: p.samples,
        })
        .collect()
}

pub fn cpi_rows(cfg: &ExperimentConfig, ep: &Episode) -> Vec<CpiScoreRow> {
    let (algo, scenario, constrained) = variant(cfg);
    ep.cpis
        .iter()
        .flat_map(|c| {
            c.scores.iter().map(|s| CpiScoreRow {
                algo: algo.clone(),
                scenario: scenario.clone(),
                constrained,
                run: ep.run,
                cpi: c.index,
                pfa_desired: s.pfa_desired,
                detected: s.detected,
                targets: s.targets,
                false_alarms: s.false_alarms,
                cells: s.cells,
                pfa_empirical: s.pfa_empirical,
            })
        })
        .collect()
}

pub fn regret_rows(cfg: &ExperimentConfig, ep: &Episode) -> Vec<RegretRow> {
    let (algo, scenario, constrained) = variant(cfg);
    let stride = cfg.output.regret_stride as u64;
    ep.pris
        .iter()
        .filter(|p| p.t % stride == 0 || p.t == ep.pris.len() as u64)
        .map(|p| RegretRow {
            algo: algo.clone(),
            scenario: scenario.clone(),
            constrained,
            run: ep.run,
            t: p.t,
            regret_cum: p.regret_cum,
        })
        .collect()
}

/// Mean P_d and empirical P_fa over every scored CPI of every run.
pub fn experiment_roc(cfg: &ExperimentConfig, episodes: &[Episode]) -> Vec<RocRow> {
    let (algo, scenario, constrained) = variant(cfg);
    let scores: Vec<DetectionScore> = episodes
        .iter()
        .flat_map(|ep| ep.scored_cpis(cfg.burn_in_cpis))
        .flat_map(|c| c.scores.iter().cloned())
        .collect();
    roc_curve(&scores)
        .into_iter()
        .map(|p| RocRow {
            pfa_desired: p.pfa_desired,
            pd_mean: p.pd_mean,
            pfa_empirical: p.pfa_empirical,
            algo: algo.clone(),
            scenario: scenario.clone(),
            constrained,
        })
        .collect()
}

/// Runs every episode, spreading runs over the available cores.
pub fn run_all(cfg: &ExperimentConfig, opts: EpisodeOptions) -> Result<Vec<Episode>> {
    cfg.validate()?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(cfg.runs);
    if workers <= 1 {
        return (0..cfg.runs).map(|run| run_episode_with(cfg, run, opts)).collect();
    }
    let mut slots: Vec<Option<Result<Episode>>> = (0..cfg.runs).map(|_| None).collect();
    std::thread::scope(|s| {
        for (w, chunk) in slots.chunks_mut(cfg.runs.div_ceil(workers)).enumerate() {
            let base = w * cfg.runs.div_ceil(workers);
            s.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(run_episode_with(cfg, base + i, opts));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every run scheduled")).collect()
}

/// Runs the experiment and writes its artifacts under `dir`.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<(RunArtifacts, Vec<Episode>)> {
    run_experiment_with(cfg, dir, EpisodeOptions::default())
}

pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    dir: &Path,
    opts: EpisodeOptions,
) -> Result<(RunArtifacts, Vec<Episode>)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let episodes = run_all(cfg, opts)?;
    let tag = cfg.variant_tag();

    let config_snapshot = dir.join(format!("{tag}.config.toml"));
    fs::write(&config_snapshot, cfg.to_toml_string()?).map_err(|e| Error::io(&config_snapshot, e))?;

    let mut episode_logs = Vec::new();
    let mut dumps = Vec::new();
    let (mut runs, mut cpis, mut regret) = (Vec::new(), Vec::new(), Vec::new());
    for ep in &episodes {
        if cfg.output.episode_logs {
            let path = dir.join(format!("{tag}.run{:03}.episode.csv", ep.run));
            write_csv(&path, &episode_rows(ep))?;
            episode_logs.push(path);
        }
        runs.extend(run_roc(cfg, ep));
        cpis.extend(cpi_rows(cfg, ep));
        regret.extend(regret_rows(cfg, ep));
        for c in &ep.cpis {
            if let Some(map) = &c.map {
                let path = dir.join(format!("{tag}.run{:03}.cpi{:03}.bin", ep.run, c.index));
                write_map_dump(map, cfg.scenario.as_str(), &path)?;
                dumps.push(path);
            }
        }
    }
    let roc = dir.join(format!("{tag}.roc.csv"));
    write_csv(&roc, &experiment_roc(cfg, &episodes))?;
    let runs_path = dir.join(format!("{tag}.runs.csv"));
    write_csv(&runs_path, &runs)?;
    let cpis_path = dir.join(format!("{tag}.cpis.csv"));
    write_csv(&cpis_path, &cpis)?;
    let regret_path = dir.join(format!("{tag}.regret.csv"));
    write_csv(&regret_path, &regret)?;

    Ok((
        RunArtifacts {
            dir: dir.to_path_buf(),
            config_snapshot,
            episode_logs,
            roc,
            runs: runs_path,
            cpis: cpis_path,
            regret: regret_path,
            dumps,
        },
        episodes,
    ))
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

type VariantKey = (String, String, bool);

/// Mean and standard error of per-run P_d for each variant and desired P_fa.
/// Every run of a variant must report the same P_fa sweep.
pub fn aggregate(rows: &[RunRocRow]) -> Result<Vec<RocSummaryRow>> {
    if rows.is_empty() {
        return Err(Error::Schema("no ROC rows to aggregate".into()));
    }
    let mut by_variant: BTreeMap<VariantKey, BTreeMap<usize, Vec<&RunRocRow>>> = BTreeMap::new();
    for r in rows {
        by_variant
            .entry((r.algo.clone(), r.scenario.clone(), r.constrained))
            .or_default()
            .entry(r.run)
            .or_default()
            .push(r);
    }
    let mut out = Vec::new();
    for ((algo, scenario, constrained), runs) in by_variant {
        let sweep = |v: &[&RunRocRow]| {
            let mut p: Vec<u64> = v.iter().map(|r| r.pfa_desired.to_bits()).collect();
            p.sort_unstable();
            p
        };
        let first = runs.values().next().expect("nonempty");
        let reference = sweep(first);
        for (run, v) in &runs {
            let s = sweep(v);
            if s != reference {
                return Err(Error::Schema(format!(
                    "{algo}/{scenario}: run {run} has a different P_fa sweep"
                )));
            }
        }
        for bits in reference {
            let pfa = f64::from_bits(bits);
            let pick: Vec<&RunRocRow> = runs
                .values()
                .map(|v| *v.iter().find(|r| r.pfa_desired.to_bits() == bits).expect("same sweep"))
                .collect();
            let pds: Vec<f64> = pick.iter().map(|r| r.pd_mean).collect();
            let (pd_mean, pd_stderr) = mean_stderr(&pds);
            let fas: Vec<f64> = pick.iter().map(|r| r.pfa_empirical).collect();
            out.push(RocSummaryRow {
                algo: algo.clone(),
                scenario: scenario.clone(),
                constrained,
                pfa_desired: pfa,
                pd_mean,
                pd_stderr,
                pfa_empirical: mean_stderr(&fas).0,
                runs: pick.len(),
            });
        }
    }
    Ok(out)
}

/// Mean cumulative regret per variant and logged PRI.
pub fn aggregate_regret(rows: &[RegretRow]) -> Vec<RegretSummaryRow> {
    let mut groups: BTreeMap<(VariantKey, u64), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups
            .entry(((r.algo.clone(), r.scenario.clone(), r.constrained), r.t))
            .or_default()
            .push(r.regret_cum);
    }
    groups
        .into_iter()
        .map(|(((algo, scenario, constrained), t), v)| {
            let (regret_mean, regret_stderr) = mean_stderr(&v);
            RegretSummaryRow {
                algo,
                scenario,
                constrained,
                t,
                regret_mean,
                regret_stderr,
                runs: v.len(),
            }
        })
        .collect()
}
