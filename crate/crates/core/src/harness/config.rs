use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bandit::LearnerKind;
use crate::environment::{CoexistenceParams, DEFAULT_JNR_DB};
use crate::error::{Error, Result};
use crate::signalchain::{CfarWindow, CpiConfig, Target, Tolerance};
use crate::spectrum::{
    Catalog, CatalogSpec, ChannelGrid, CostWeights, InterferenceVector, DEFAULT_CHANNEL_BW_HZ,
    DEFAULT_HARMFUL_THRESHOLD_DBM, DEFAULT_SUBCHANNELS,
};

/// Environment output dir override, below `--out` and above the config file.
pub const OUT_DIR_ENV: &str = "CRADAR_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Coexistence,
    Jammer,
    Static,
}

impl ScenarioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::Coexistence => "coexistence",
            ScenarioKind::Jammer => "jammer",
            ScenarioKind::Static => "static",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "coexistence" => Ok(ScenarioKind::Coexistence),
            "jammer" => Ok(ScenarioKind::Jammer),
            "static" => Ok(ScenarioKind::Static),
            other => Err(format!("unknown scenario `{other}` (expected coexistence, jammer, static)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub bandwidth_hz: f64,
    pub subchannels: usize,
    pub harmful_threshold_dbm: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            bandwidth_hz: DEFAULT_CHANNEL_BW_HZ,
            subchannels: DEFAULT_SUBCHANNELS,
            harmful_threshold_dbm: DEFAULT_HARMFUL_THRESHOLD_DBM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSection {
    pub beta: [f64; 3],
    pub dhat: f64,
    /// Explicit `(gamma1, gamma2)`; empty normalizes over the catalog.
    pub gamma: Option<[f64; 2]>,
}

impl Default for CostSection {
    fn default() -> Self {
        Self {
            beta: [1.0 / 3.0; 3],
            dhat: 0.2,
            gamma: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TsSection {
    pub scale: f64,
}

impl Default for TsSection {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exp3Section {
    pub epsilon: f64,
    pub gamma: f64,
}

impl Default for Exp3Section {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            gamma: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JammerSection {
    pub jnr_db: f64,
}

impl Default for JammerSection {
    fn default() -> Self {
        Self { jnr_db: DEFAULT_JNR_DB }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StaticSection {
    /// Occupancy string, lowest sub-channel first.
    pub occupied: String,
    pub inr_db: f64,
}

impl Default for StaticSection {
    fn default() -> Self {
        Self {
            occupied: "0011000000".into(),
            inr_db: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    /// Keep every `regret_stride`-th point of the cumulative regret.
    pub regret_stride: usize,
    pub episode_logs: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            regret_stride: 100,
            episode_logs: true,
        }
    }
}

/// Four targets inside the default range gate, on distinct range and
/// Doppler cells.
pub fn default_targets() -> Vec<Target> {
    vec![
        Target::new(3070.0, -45.0, 15.0),
        Target::new(3125.0, 20.0, 15.0),
        Target::new(3180.0, 60.0, 15.0),
        Target::new(3240.0, -10.0, 15.0),
    ]
}

pub fn default_pfas() -> Vec<f64> {
    vec![1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    pub algorithm: LearnerKind,
    pub constrained: bool,
    pub runs: usize,
    pub cpis: usize,
    pub burn_in_cpis: usize,
    pub base_seed: u64,
    /// Run the receive chain on every CPI. Off gives bandit-only episodes.
    pub detection: bool,
    /// Log phase tags of the per-PRI loop.
    pub trace: bool,
    pub pfa: Vec<f64>,
    pub channel: ChannelSection,
    pub catalog: CatalogSpec,
    pub cost: CostSection,
    pub ts: TsSection,
    pub exp3: Exp3Section,
    pub coexistence: CoexistenceParams,
    pub jammer: JammerSection,
    #[serde(rename = "static")]
    pub static_env: StaticSection,
    pub cpi: CpiConfig,
    pub cfar: CfarWindow,
    pub tolerance: Tolerance,
    pub targets: Vec<Target>,
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::Coexistence,
            algorithm: LearnerKind::Ts,
            constrained: true,
            runs: 30,
            cpis: 25,
            burn_in_cpis: 0,
            base_seed: 0,
            detection: true,
            trace: false,
            pfa: default_pfas(),
            channel: ChannelSection::default(),
            catalog: CatalogSpec::default(),
            cost: CostSection::default(),
            ts: TsSection::default(),
            exp3: Exp3Section::default(),
            coexistence: CoexistenceParams::default(),
            jammer: JammerSection::default(),
            static_env: StaticSection::default(),
            cpi: CpiConfig::default(),
            cfar: CfarWindow::default(),
            tolerance: Tolerance::default(),
            targets: default_targets(),
            output: OutputSection::default(),
        }
    }
}

/// Objects derived from a validated configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub grid: ChannelGrid,
    pub catalog: Catalog,
    pub weights: CostWeights,
    pub static_occupancy: InterferenceVector,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Sets one dotted key, e.g. `cpi.pulses=200` or `cost.beta=[0.5,0.5,0]`.
    /// The value is read as a TOML literal, falling back to a bare string.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut root = toml::Value::try_from(&*self).map_err(|e| Error::Config(e.to_string()))?;
        let parsed = parse_literal(value);
        let parts: Vec<&str> = key.split('.').collect();
        let (leaf, path) = parts.split_last().expect("split yields one part");
        let unknown = || Error::Config(format!("unknown configuration key `{key}`"));
        let mut node = &mut root;
        for part in path {
            node = node.get_mut(*part).ok_or_else(unknown)?;
        }
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{key}`: not a section")))?;
        // optional fields are absent from the serialized tree
        if !table.contains_key(*leaf) && key != "cost.gamma" {
            return Err(unknown());
        }
        let parsed = match (table.get(*leaf), parsed) {
            (Some(toml::Value::String(_)), p) if !p.is_str() => toml::Value::String(value.into()),
            (_, p) => p,
        };
        table.insert(leaf.to_string(), parsed);
        *self = root
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("`{key}`: {e}")))?;
        Ok(())
    }

    pub fn validate(&self) -> Result<Resolved> {
        if self.runs == 0 {
            return Err(Error::param("runs", "need at least one run"));
        }
        if self.cpis == 0 {
            return Err(Error::param("cpis", "need at least one CPI"));
        }
        if self.burn_in_cpis >= self.cpis {
            return Err(Error::param("burn_in_cpis", "must leave at least one scored CPI"));
        }
        if self.pfa.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::param("pfa", "every P_fa must lie in (0, 1)"));
        }
        if self.output.regret_stride == 0 {
            return Err(Error::param("output.regret_stride", "must be positive"));
        }
        let ch = &self.channel;
        let grid = ChannelGrid::new(ch.bandwidth_hz, ch.subchannels, ch.harmful_threshold_dbm)?;
        let catalog = Catalog::from_spec(&grid, &self.catalog)?;
        let weights = match self.cost.gamma {
            Some(g) => CostWeights::new(self.cost.beta, g, self.cost.dhat)?,
            None => CostWeights::normalized(&catalog, self.cost.beta, self.cost.dhat)?,
        };
        if !(self.ts.scale > 0.0) {
            return Err(Error::param("ts.scale", "must be positive"));
        }
        if !(self.exp3.epsilon > 0.0) || !(0.0..=1.0).contains(&self.exp3.gamma) {
            return Err(Error::param("exp3", "epsilon > 0 and gamma in [0, 1] required"));
        }
        self.coexistence.validate(&grid)?;
        let static_occupancy: InterferenceVector = self
            .static_env
            .occupied
            .parse()
            .map_err(|e| Error::param("static.occupied", format!("{e}")))?;
        if static_occupancy.len() != grid.subchannels() {
            return Err(Error::param("static.occupied", "one digit per sub-channel required"));
        }
        if self.detection {
            self.cpi.validate(&grid)?;
            self.cfar.validate()?;
            for t in &self.targets {
                t.validate(&self.cpi)?;
            }
            for w in catalog.iter() {
                if w.bw_hz > self.cpi.fs_hz {
                    return Err(Error::Aliasing {
                        bw_hz: w.bw_hz,
                        fs_hz: self.cpi.fs_hz,
                    });
                }
            }
        }
        Ok(Resolved {
            grid,
            catalog,
            weights,
            static_occupancy,
        })
    }

    /// `"<algo>-<scenario>-<c|u>"`, used in file names.
    pub fn variant_tag(&self) -> String {
        format!(
            "{}-{}-{}",
            self.algorithm.as_str(),
            self.scenario.as_str(),
            if self.constrained { "c" } else { "u" }
        )
    }
}

fn parse_literal(value: &str) -> toml::Value {
    let wrapped = format!("v = {value}");
    match toml::from_str::<toml::Table>(&wrapped) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(value.into())),
        Err(_) => toml::Value::String(value.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = ExperimentConfig::default();
        let r = cfg.validate().unwrap();
        assert_eq!(r.catalog.len(), 55);
        for t in &cfg.targets {
            assert!(t.expected_cell(&cfg.cpi).is_some());
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.cost.gamma = Some([1e-15, 2e-15]);
        cfg.scenario = ScenarioKind::Jammer;
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn dotted_overrides() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("cpi.pulses", "64").unwrap();
        cfg.set("algorithm", "exp3").unwrap();
        cfg.set("constrained", "false").unwrap();
        cfg.set("cost.beta", "[0.5, 0.5, 0.0]").unwrap();
        cfg.set("cost.gamma", "[1e-15, 1e-15]").unwrap();
        cfg.set("static.occupied", "1100000000").unwrap();
        assert_eq!(cfg.cpi.pulses, 64);
        assert_eq!(cfg.algorithm, LearnerKind::Exp3);
        assert!(!cfg.constrained);
        assert_eq!(cfg.cost.beta, [0.5, 0.5, 0.0]);
        assert_eq!(cfg.cost.gamma, Some([1e-15, 1e-15]));
        assert_eq!(cfg.static_env.occupied, "1100000000");
    }

    #[test]
    fn bad_overrides_rejected() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.set("cpi.nonsense", "1").is_err());
        assert!(cfg.set("algorithm", "bogus").is_err());
        assert!(cfg.set("runs.x", "1").is_err());
        assert!(cfg.set("runs", "\"many\"").is_err());
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn invalid_values_caught() {
        let mut cfg = ExperimentConfig::default();
        cfg.runs = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.cost.dhat = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.cfar.training = (0, 4);
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.static_env.occupied = "01".into();
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.targets[0].range_m = 1e6;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_file_keys_rejected() {
        assert!(ExperimentConfig::from_toml_str("runs = 3\nbogus = 1\n").is_err());
        let cfg = ExperimentConfig::from_toml_str("runs = 3\n[cpi]\npulses = 8\n").unwrap();
        assert_eq!((cfg.runs, cfg.cpi.pulses), (3, 8));
    }
}
