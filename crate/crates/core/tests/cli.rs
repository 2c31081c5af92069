use std::path::Path;
use std::process::{Command, Output};

use cradar_core::harness::{read_csv, EpisodeRow, ExperimentConfig, RocRow, RocSummaryRow, OUT_DIR_ENV};
use cradar_core::signalchain::read_map_dump;

fn cradar(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cradar"));
    cmd.args(args).env_remove(OUT_DIR_ENV);
    if let Some(d) = env_out {
        cmd.env(OUT_DIR_ENV, d);
    }
    cmd.output().expect("spawn cradar")
}

fn quick() -> Vec<&'static str> {
    vec!["--runs", "2", "--cpis", "2", "--pulses", "16"]
}

#[test]
fn catalog_lists_55_waveforms() {
    let out = cradar(&["catalog"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().contains("fc_hz"));
    assert_eq!(lines.count(), 55);
}

#[test]
fn bad_arguments_exit_nonzero() {
    assert_eq!(cradar(&["run", "--algo", "bogus"], None).status.code(), Some(2));
    assert_eq!(cradar(&["frobnicate"], None).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = cradar(&["run", "--set", "no.such.key=1", "--out", d], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no.such.key"));
    let out = cradar(&["run", "--set", "cost.dhat=3", "--out", d], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_writes_artifacts_to_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run", "--algo", "exp3", "--constrained"];
    args.extend(quick());
    let out = cradar(&args, Some(dir.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let tag = "exp3-coexistence-c";
    let snap = ExperimentConfig::load(&dir.path().join(format!("{tag}.config.toml"))).unwrap();
    assert_eq!(snap.runs, 2);
    assert_eq!(snap.cpi.pulses, 16);

    let rows: Vec<EpisodeRow> = read_csv(&dir.path().join(format!("{tag}.run001.episode.csv"))).unwrap();
    assert_eq!(rows.len(), 32);
    assert!(rows.iter().all(|r| r.s_hat_bits.len() == 10 && r.waveform_id < 55));

    let roc: Vec<RocRow> = read_csv(&dir.path().join(format!("{tag}.roc.csv"))).unwrap();
    assert_eq!(roc.len(), snap.pfa.len());
    assert!(roc.iter().all(|r| r.algo == "exp3" && r.constrained));
}

#[test]
fn out_flag_beats_env_and_config_feeds_overrides() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let cfg_path = flag_dir.path().join("exp.toml");
    std::fs::write(&cfg_path, "scenario = \"jammer\"\nruns = 1\ncpis = 1\n[cpi]\npulses = 8\n").unwrap();

    let out = cradar(
        &[
            "run",
            "--config",
            cfg_path.to_str().unwrap(),
            "--set",
            "cost.dhat=0.3",
            "--algo",
            "ts",
            "--out",
            flag_dir.path().to_str().unwrap(),
        ],
        Some(env_dir.path()),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_dir(env_dir.path()).unwrap().count(), 0);
    let snap = ExperimentConfig::load(&flag_dir.path().join("ts-jammer-c.config.toml")).unwrap();
    assert_eq!(snap.cost.dhat, 0.3);
    assert_eq!(snap.cpi.pulses, 8);
}

#[test]
fn roc_aggregates_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for variant in [["--constrained"], ["--unconstrained"]] {
        let mut args = vec!["run", "--algo", "ts", variant[0], "--out", d];
        args.extend(quick());
        assert!(cradar(&args, None).status.success());
    }
    let sum_dir = dir.path().join("summary");
    let out = cradar(&["roc", d, "--out", sum_dir.to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<RocSummaryRow> = read_csv(&sum_dir.join("roc_summary.csv")).unwrap();
    assert_eq!(rows.len(), 2 * ExperimentConfig::default().pfa.len());
    assert!(sum_dir.join("regret_summary.csv").exists());

    let out = cradar(&["roc", dir.path().join("missing").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dump_map_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = cradar(&["dump-map", "--runs", "2", "--cpis", "3", "--pulses", "32", "--run", "1", "--cpi", "2", "--out", d], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bin = dir.path().join("ts-coexistence-c.run001.cpi002.bin");
    let (hdr, data) = read_map_dump(&bin).unwrap();
    assert_eq!((hdr.doppler_bins, hdr.range_bins), (32, 256));
    assert_eq!(hdr.zero_doppler_row, 16);
    assert_eq!(data.len(), 32 * 256);
    assert!(data.iter().all(|v| v.is_finite() && *v >= 0.0));

    let out = cradar(&["dump-map", "--cpis", "3", "--cpi", "3", "--out", d], None);
    assert_eq!(out.status.code(), Some(1));
}
