use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cradar_core::bandit::{ContextVector, LearnerKind, TsState};
use cradar_core::harness::{experiment_roc, run_all, run_episode, EpisodeOptions, ExperimentConfig, ScenarioKind};
use cradar_core::signalchain::Target;
use cradar_core::spectrum::{CostModel, InterferenceVector};

fn model() -> CostModel {
    let r = ExperimentConfig::default().validate().unwrap();
    CostModel::new(r.catalog, r.weights).unwrap()
}

// Fit L1, L2 on half of the interference vectors, then check every pair
// against all 1024 of them.
#[test]
fn empirical_lipschitz_bound_holds() {
    let m = model();
    let cat = m.catalog();
    let n = cat.len();
    let prev = Some(cat.widest());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let train: Vec<InterferenceVector> = (0..512)
        .map(|_| InterferenceVector::from_bits(rng.random_range(0..1024), 10).unwrap())
        .collect();
    let all: Vec<InterferenceVector> = InterferenceVector::enumerate(10).collect();

    let gaps = |s: &InterferenceVector| {
        let c = m.all_costs(s, prev);
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (cat.get(i), cat.get(j));
                let dfc = (a.fc_hz - b.fc_hz).abs() / 1e6;
                let dbw = (a.bw_hz - b.bw_hz).abs() / 1e6;
                out.push(((c[i] - c[j]).abs(), dfc, dbw));
            }
        }
        out
    };

    let train_gaps: Vec<_> = train.iter().flat_map(gaps).collect();
    let l1 = train_gaps
        .iter()
        .filter(|g| g.2 == 0.0)
        .map(|g| g.0 / g.1)
        .fold(0.0, f64::max);
    let l2 = train_gaps
        .iter()
        .filter(|g| g.2 > 0.0)
        .map(|g| (g.0 - l1 * g.1) / g.2)
        .fold(0.0, f64::max);
    assert!(l1.is_finite() && l2.is_finite());

    let mut worst = f64::NEG_INFINITY;
    for s in &all {
        for (dc, dfc, dbw) in gaps(s) {
            worst = worst.max(dc - (l1 * dfc + l2 * dbw));
        }
    }
    assert!(worst <= 1e-12, "L1={l1} L2={l2} per MHz, worst excess {worst}");
}

proptest! {
    #[test]
    fn precision_minus_identity_is_psd(xs in prop::collection::vec((0.0f64..1.0, 0.0f64..0.3, 0.0f64..1.0, 0.0f64..1.0), 1..80)) {
        let mut st = TsState::new();
        for (a, b, c, cost) in xs {
            st.update(&ContextVector::new(a, b, c), cost);
        }
        let d = st.precision() - nalgebra::Matrix3::identity();
        let eig = d.symmetric_eigen().eigenvalues;
        prop_assert!(eig.iter().all(|&e| e >= -1e-9), "eigenvalues {eig:?}");
    }
}

#[test]
fn constraint_lowers_total_distortion() {
    for algo in [LearnerKind::Ts, LearnerKind::Exp3] {
        let mut cfg = ExperimentConfig::default();
        cfg.algorithm = algo;
        cfg.detection = false;
        let mut wins = 0;
        for run in 0..30 {
            cfg.constrained = true;
            let c = run_episode(&cfg, run).unwrap().total_distortion();
            cfg.constrained = false;
            let u = run_episode(&cfg, run).unwrap().total_distortion();
            if c <= u {
                wins += 1;
            }
        }
        assert!(wins >= 29, "{algo:?}: constrained <= unconstrained in {wins}/30 seed pairs");
    }
}

fn small_cfg() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.scenario = ScenarioKind::Static;
    cfg.algorithm = LearnerKind::FixedFullband;
    cfg.cpis = 1;
    cfg.cpi.pulses = 32;
    cfg.runs = 30;
    cfg
}

#[test]
fn roc_without_targets_has_zero_pd() {
    let mut cfg = small_cfg();
    cfg.targets.clear();
    cfg.runs = 3;
    let eps = run_all(&cfg, EpisodeOptions::default()).unwrap();
    for p in experiment_roc(&cfg, &eps) {
        assert_eq!(p.pd_mean, 0.0);
    }
}

#[test]
fn roc_pd_nondecreasing_in_pfa() {
    let mut cfg = small_cfg();
    cfg.targets = vec![
        Target::new(3070.0, -45.0, -2.0),
        Target::new(3125.0, 20.0, -2.0),
        Target::new(3180.0, 60.0, -2.0),
        Target::new(3240.0, -10.0, -2.0),
    ];
    let eps = run_all(&cfg, EpisodeOptions::default()).unwrap();
    let roc = experiment_roc(&cfg, &eps);
    assert_eq!(roc.len(), cfg.pfa.len());
    for w in roc.windows(2) {
        assert!(w[0].pfa_desired < w[1].pfa_desired);
        assert!(w[1].pd_mean >= w[0].pd_mean, "{roc:?}");
    }
    // the sweep must actually span something between miss and hit
    assert!(roc[0].pd_mean < roc[roc.len() - 1].pd_mean, "{roc:?}");
}
