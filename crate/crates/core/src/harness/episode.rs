use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, Resolved, ScenarioKind};
use crate::bandit::{
    constrain_actions, ContextVector, Exp3State, Learner, LearnerKind, ObservationHistory,
    RegretLedger, TsState,
};
use crate::environment::{CoexistenceState, Environment, JammerState};
use crate::error::{Error, Result};
use crate::signalchain::{process_cpi, DetectionScore, RangeDopplerMap};
use crate::spectrum::{CostModel, InterferenceVector};

/// Random streams of one run. Runs sharing a seed share the environment
/// and receiver-noise realizations regardless of the policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Environment = 0,
    Policy = 1,
    Signal = 2,
}

pub fn run_seed(cfg: &ExperimentConfig, run: usize) -> u64 {
    cfg.base_seed.wrapping_add(run as u64)
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Phase tags of the per-PRI loop, recorded in trace mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Sense,
    Constrain,
    Context,
    Select,
    Transmit,
    Observe,
    Update,
    Regret,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriRecord {
    pub t: u64,
    pub s_hat: InterferenceVector,
    pub s_true: InterferenceVector,
    pub waveform: usize,
    pub cost: f64,
    pub distortion: f64,
    pub regret_cum: f64,
    /// Whether the previous waveform was in the admissible set.
    pub prev_admissible: bool,
    pub admissible: usize,
}

#[derive(Debug, Clone)]
pub struct CpiRecord {
    pub index: usize,
    pub scores: Vec<DetectionScore>,
    pub map: Option<RangeDopplerMap>,
}

#[derive(Debug, Clone)]
pub struct Episode {
    pub run: usize,
    pub seed: u64,
    pub pris: Vec<PriRecord>,
    pub cpis: Vec<CpiRecord>,
    pub regret: RegretLedger,
    pub trace: Vec<(u64, Phase)>,
}

impl Episode {
    pub fn waveforms(&self) -> impl Iterator<Item = usize> + '_ {
        self.pris.iter().map(|p| p.waveform)
    }

    pub fn total_distortion(&self) -> f64 {
        self.pris.iter().map(|p| p.distortion).sum()
    }

    /// Scores of CPIs past the burn-in.
    pub fn scored_cpis(&self, burn_in: usize) -> impl Iterator<Item = &CpiRecord> {
        self.cpis.iter().filter(move |c| c.index >= burn_in)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EpisodeOptions {
    /// Keep the range-Doppler map of this CPI.
    pub keep_map: Option<usize>,
    /// Stop after this many CPIs.
    pub stop_after: Option<usize>,
}

fn build_learner(cfg: &ExperimentConfig, r: &Resolved) -> Result<Learner> {
    Ok(match cfg.algorithm {
        LearnerKind::Ts => Learner::Ts(TsState::with_scale(cfg.ts.scale)),
        LearnerKind::Exp3 => Learner::Exp3 {
            state: Exp3State::new(r.catalog.len(), cfg.exp3.epsilon, cfg.exp3.gamma)?,
            last_probs: Vec::new(),
        },
        LearnerKind::FixedFullband => Learner::Fixed(r.catalog.widest()),
    })
}

fn build_environment<R: Rng + ?Sized>(cfg: &ExperimentConfig, r: &Resolved, rng: &mut R) -> Result<Environment> {
    Ok(match cfg.scenario {
        ScenarioKind::Coexistence => {
            Environment::Coexistence(CoexistenceState::new(cfg.coexistence, r.grid, rng)?)
        }
        ScenarioKind::Jammer => Environment::Jammer(JammerState::new(&r.grid, cfg.jammer.jnr_db)),
        ScenarioKind::Static => Environment::Static {
            s: r.static_occupancy,
            inr_db: cfg.static_env.inr_db,
        },
    })
}

/// Runs one seeded episode of `cfg.cpis × cfg.cpi.pulses` PRIs.
pub fn run_episode(cfg: &ExperimentConfig, run: usize) -> Result<Episode> {
    run_episode_with(cfg, run, EpisodeOptions::default())
}

pub fn run_episode_with(cfg: &ExperimentConfig, run: usize, opts: EpisodeOptions) -> Result<Episode> {
    let r = cfg.validate()?;
    let seed = run_seed(cfg, run);
    let mut env_rng = stream_rng(seed, Stream::Environment);
    let mut policy_rng = stream_rng(seed, Stream::Policy);
    let mut signal_rng = stream_rng(seed, Stream::Signal);

    let model = CostModel::new(r.catalog.clone(), r.weights)?;
    let catalog = &r.catalog;
    let mut env = build_environment(cfg, &r, &mut env_rng)?;
    let mut learner = build_learner(cfg, &r)?;
    let mut history = ObservationHistory::new();
    let mut regret = RegretLedger::new();

    let pulses = cfg.cpi.pulses;
    let cpis = opts.stop_after.map_or(cfg.cpis, |n| n.min(cfg.cpis));
    let horizon = (cpis * pulses) as u64;

    let mut pris = Vec::with_capacity(horizon as usize);
    let mut cpi_records = Vec::with_capacity(cpis);
    let mut trace = Vec::new();
    let mut sequence = Vec::with_capacity(pulses);
    let mut inr_rows: Vec<Vec<f64>> = Vec::with_capacity(pulses);
    let mut prev: Option<usize> = None;
    let all_ids: Vec<usize> = (0..catalog.len()).collect();
    let tag = |trace: &mut Vec<(u64, Phase)>, t: u64, p: Phase| {
        if cfg.trace {
            trace.push((t, p));
        }
    };

    for t in 1..=horizon {
        tag(&mut trace, t, Phase::Sense);
        let s_hat = env.sense();

        let (w, admissible, contexts) = match prev {
            None => {
                // no predecessor yet: seed the history with a random pulse
                let w = match cfg.algorithm {
                    LearnerKind::FixedFullband => catalog.widest(),
                    _ => policy_rng.random_range(0..catalog.len()),
                };
                tag(&mut trace, t, Phase::Select);
                (w, all_ids.clone(), None)
            }
            Some(p) => {
                tag(&mut trace, t, Phase::Constrain);
                let admissible = if cfg.constrained {
                    constrain_actions(catalog, Some(catalog.get(p)), &r.weights)
                } else {
                    all_ids.clone()
                };
                tag(&mut trace, t, Phase::Context);
                let contexts: Vec<(usize, ContextVector)> = admissible
                    .iter()
                    .map(|&id| (id, history.context(id, &s_hat)))
                    .collect();
                tag(&mut trace, t, Phase::Select);
                let pos = learner.select(&contexts, &mut policy_rng)?;
                (contexts[pos].0, admissible, Some((contexts, pos)))
            }
        };

        tag(&mut trace, t, Phase::Transmit);
        let s_true = env.begin_pri(&mut env_rng);
        if cfg.detection {
            inr_rows.push(env.subchannel_inr(&r.grid, cfg.cpi.noise_power_dbm));
        }
        sequence.push(*catalog.get(w));

        tag(&mut trace, t, Phase::Observe);
        let cost = model.cost(w, &s_true, prev);
        let distortion = model.distortion(w, prev);

        tag(&mut trace, t, Phase::Update);
        if let Some((contexts, pos)) = &contexts {
            learner.update(contexts, *pos, cost);
        }
        history.record(t, s_hat, s_true, w, cost);

        tag(&mut trace, t, Phase::Regret);
        let all_costs = model.all_costs(&s_true, prev);
        regret.step(cost, &all_costs, cfg.constrained.then_some(admissible.as_slice()));

        let prev_admissible = prev.is_none_or(|p| admissible.contains(&p));
        if cfg.constrained && prev.is_some() && !(distortion < r.weights.dhat && prev_admissible) {
            return Err(Error::Invariant(format!(
                "PRI {t}: waveform {w} breaks the distortion constraint ({distortion})"
            )));
        }
        pris.push(PriRecord {
            t,
            s_hat,
            s_true,
            waveform: w,
            cost,
            distortion,
            regret_cum: regret.cumulative(),
            prev_admissible,
            admissible: admissible.len(),
        });

        env.end_pri(catalog, w, prev);
        prev = Some(w);

        if sequence.len() == pulses {
            let index = cpi_records.len();
            if cfg.detection {
                let keep = opts.keep_map == Some(index);
                let outcome = process_cpi(
                    &sequence,
                    &cfg.targets,
                    &inr_rows,
                    &cfg.cpi,
                    &r.grid,
                    &cfg.cfar,
                    &cfg.pfa,
                    cfg.tolerance,
                    keep,
                    &mut signal_rng,
                )?;
                cpi_records.push(CpiRecord {
                    index,
                    scores: outcome.scores,
                    map: outcome.map,
                });
            }
            sequence.clear();
            inr_rows.clear();
        }
    }

    Ok(Episode {
        run,
        seed,
        pris,
        cpis: cpi_records,
        regret,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(algorithm: LearnerKind, constrained: bool) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.algorithm = algorithm;
        cfg.constrained = constrained;
        cfg.cpis = 3;
        cfg.cpi.pulses = 50;
        cfg.detection = false;
        cfg
    }

    #[test]
    fn fixed_fullband_is_constant() {
        let cfg = small(LearnerKind::FixedFullband, false);
        let ep = run_episode(&cfg, 0).unwrap();
        let widest = cfg.validate().unwrap().catalog.widest();
        assert!(ep.waveforms().all(|w| w == widest));
        assert!(ep.pris.iter().all(|p| p.distortion == 0.0));
    }

    #[test]
    fn constrained_pairs_respect_tolerance() {
        for algo in [LearnerKind::Ts, LearnerKind::Exp3] {
            let mut cfg = small(algo, true);
            cfg.cpis = 20;
            let ep = run_episode(&cfg, 1).unwrap();
            for p in &ep.pris[1..] {
                assert!(p.distortion < 0.2);
                assert!(p.prev_admissible);
            }
        }
    }

    #[test]
    fn same_seed_same_episode() {
        let cfg = small(LearnerKind::Exp3, false);
        let a = run_episode(&cfg, 4).unwrap();
        let b = run_episode(&cfg, 4).unwrap();
        assert_eq!(a.pris, b.pris);
        let c = run_episode(&cfg, 5).unwrap();
        assert_ne!(a.pris, c.pris);
    }

    #[test]
    fn trace_follows_loop_order() {
        let mut cfg = small(LearnerKind::Ts, true);
        cfg.trace = true;
        cfg.cpis = 1;
        cfg.cpi.pulses = 4;
        let ep = run_episode(&cfg, 0).unwrap();
        use Phase::*;
        let first: Vec<_> = ep.trace.iter().filter(|(t, _)| *t == 1).map(|(_, p)| *p).collect();
        assert_eq!(first, [Sense, Select, Transmit, Observe, Update, Regret]);
        let second: Vec<_> = ep.trace.iter().filter(|(t, _)| *t == 2).map(|(_, p)| *p).collect();
        assert_eq!(
            second,
            [Sense, Constrain, Context, Select, Transmit, Observe, Update, Regret]
        );
    }

    #[test]
    fn environment_shared_across_policies() {
        let a = run_episode(&small(LearnerKind::Ts, true), 2).unwrap();
        let b = run_episode(&small(LearnerKind::Exp3, false), 2).unwrap();
        let sa: Vec<_> = a.pris.iter().map(|p| p.s_true).collect();
        let sb: Vec<_> = b.pris.iter().map(|p| p.s_true).collect();
        assert_eq!(sa, sb);
    }

    #[test]
    fn detection_runs_per_cpi() {
        let mut cfg = small(LearnerKind::Ts, true);
        cfg.detection = true;
        cfg.cpis = 2;
        cfg.cpi.pulses = 32;
        cfg.pfa = vec![1e-4, 1e-2];
        let ep = run_episode_with(
            &cfg,
            0,
            EpisodeOptions {
                keep_map: Some(1),
                stop_after: None,
            },
        )
        .unwrap();
        assert_eq!(ep.cpis.len(), 2);
        assert!(ep.cpis[0].map.is_none());
        let map = ep.cpis[1].map.as_ref().unwrap();
        assert_eq!((map.rows(), map.cols()), (32, cfg.cpi.range_bins));
        assert_eq!(ep.cpis[0].scores.len(), 2);
    }
}
