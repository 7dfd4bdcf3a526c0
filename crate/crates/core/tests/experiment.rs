use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use duffing_ring::experiment::{preset, run, ExperimentKind};
use duffing_ring::{ExperimentConfig, RunManifest};

fn small_noise_config(workers: usize) -> ExperimentConfig {
    let mut cfg = preset("F6").unwrap();
    cfg.workers = Some(workers);
    cfg.shape.n_phi = 4;
    cfg.shape.n_seeds = 2;
    cfg.shape.snr_db = vec![30.0, 0.0];
    cfg
}

fn read_artifacts(dir: &Path, manifest: &RunManifest) -> Vec<(String, Vec<u8>)> {
    manifest
        .files
        .iter()
        .map(|f| (f.path.clone(), fs::read(dir.join(&f.path)).unwrap()))
        .collect()
}

#[test]
fn manifest_checksums_match_written_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("F1").unwrap();
    let manifest = run(&cfg, dir.path()).unwrap();
    assert_eq!(manifest.experiment, "dispersion");
    assert!(manifest.files.iter().any(|f| f.path == "dispersion.csv"));
    assert!(manifest.files.iter().any(|f| f.path == "summary.json"));
    for f in &manifest.files {
        let bytes = fs::read(dir.path().join(&f.path)).unwrap();
        assert_eq!(bytes.len() as u64, f.bytes);
        assert_eq!(hex(&Sha256::digest(&bytes)), f.sha256, "{}", f.path);
    }
    let on_disk: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(on_disk["master_seed"], 2024);
    assert_eq!(on_disk["config_sha256"], manifest.config_sha256);

    let csv = fs::read_to_string(dir.path().join("dispersion.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + cfg.substrate.n_nodes / 2 + 1);
}

#[test]
fn reruns_and_worker_counts_give_identical_bytes() {
    let runs: Vec<Vec<(String, Vec<u8>)>> = [1, 1, 2]
        .iter()
        .map(|&w| {
            let dir = tempfile::tempdir().unwrap();
            let manifest = run(&small_noise_config(w), dir.path()).unwrap();
            assert!(manifest.failures.is_empty(), "{:?}", manifest.failures);
            assert_eq!(manifest.workers, w);
            read_artifacts(dir.path(), &manifest)
        })
        .collect();
    assert!(runs[0].iter().any(|(p, _)| p == "noise_cells.csv"));
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn invalid_config_writes_nothing() {
    let parent = tempfile::tempdir().unwrap();
    let out = parent.path().join("out");
    let mut cfg = preset("F1").unwrap();
    cfg.substrate.n_nodes = 33;
    let err = run(&cfg, &out).unwrap_err().to_string();
    assert!(err.contains("33"), "{err}");
    assert!(!out.exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let text = preset_text_with("F1", "\nbogus_key = 1\n");
    assert!(ExperimentConfig::from_toml_str(&text).is_err());
}

#[test]
fn every_experiment_kind_has_a_preset() {
    let kinds: Vec<ExperimentKind> = ["F1", "F2", "F3", "F4", "F5", "F6"]
        .iter()
        .map(|p| preset(p).unwrap().experiment)
        .collect();
    for kind in ExperimentKind::ALL {
        if kind != ExperimentKind::AlphaTrajectory {
            assert!(kinds.contains(&kind), "{kind}");
        }
    }
}

fn preset_text_with(name: &str, extra: &str) -> String {
    let base = duffing_ring::experiment::preset_text(name).unwrap();
    format!("{extra}{base}")
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
