//! Experiment orchestration: configuration, the per-PRI episode loop,
//! artifact files and the command-line front end.

pub mod cli;
mod config;
mod episode;
mod output;

pub use config::{
    default_pfas, default_targets, ChannelSection, CostSection, Exp3Section, ExperimentConfig, JammerSection,
    OutputSection, Resolved, ScenarioKind, StaticSection, TsSection, OUT_DIR_ENV,
};
pub use episode::{
    run_episode, run_episode_with, run_seed, stream_rng, CpiRecord, Episode, EpisodeOptions, Phase, PriRecord,
    Stream,
};
pub use output::{
    aggregate, aggregate_regret, cpi_rows, episode_rows, experiment_roc, read_csv, regret_rows, run_all,
    run_experiment, run_experiment_with, run_roc, write_csv, write_csv_to, CpiScoreRow, EpisodeRow, RegretRow,
    RegretSummaryRow, RocRow, RocSummaryRow, RunArtifacts, RunRocRow,
};
