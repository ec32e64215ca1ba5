//! Run directories and manifests.
//!
//! Manifests carry no wall-clock data, so identical configurations give
//! byte-identical files; only the directory name holds the timestamp.

use super::config::{hash_text, RunConfig};
use super::run::{CellRun, PhaseCell};
use super::sweep::{emit_plotdata, sweep_csv};
use crate::error::{Error, Result};
use crate::field::{write_snapshot, SnapshotMeta};
use chrono::{DateTime, Utc};
use serde::Serialize;
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

/// `<UTC timestamp>-<config hash>`.
pub fn run_dir_name(now: DateTime<Utc>, hash: &str) -> String {
    format!("{}-{hash}", now.format("%Y%m%dT%H%M%SZ"))
}

/// Creates a fresh run directory under `root`.
pub fn create_run_dir(root: &Path, hash: &str) -> Result<PathBuf> {
    let base = root.join(run_dir_name(Utc::now(), hash));
    let mut dir = base.clone();
    let mut k = 1;
    while dir.exists() {
        dir = PathBuf::from(format!("{}-{k}", base.display()));
        k += 1;
    }
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn config_object(cfg: &RunConfig) -> Value {
    let mut m = Map::new();
    for line in cfg.canonical_text().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            m.insert(k.to_string(), Value::String(v.to_string()));
        }
    }
    Value::Object(m)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Numerical(format!("manifest encoding: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct RunManifest<'a> {
    config_hash: String,
    config: Value,
    cell: &'a PhaseCell,
    norm_history: Vec<[f64; 2]>,
}

/// Manifest of a single run: config echo, verdict, norm history, budget and certification.
pub fn run_manifest(cfg: &RunConfig, run: &CellRun) -> Result<String> {
    to_json(&RunManifest {
        config_hash: cfg.config_hash(),
        config: config_object(cfg),
        cell: &run.cell,
        norm_history: run.history.iter().map(|&(t, n)| [t, n]).collect(),
    })
}

/// Writes `config.txt`, `manifest.json` and `final_state.txt` into a new run directory.
pub fn write_run(root: &Path, cfg: &RunConfig, run: &CellRun) -> Result<PathBuf> {
    let dir = create_run_dir(root, &cfg.config_hash())?;
    std::fs::write(dir.join("config.txt"), cfg.canonical_text())?;
    std::fs::write(dir.join("manifest.json"), run_manifest(cfg, run)?)?;
    write_snapshot(
        &dir.join("final_state.txt"),
        &run.final_field,
        SnapshotMeta { t: run.cell.t_final, gamma: cfg.gamma, p: cfg.p },
    )?;
    Ok(dir)
}

/// Canonical text of a sweep: the base config plus the `p` and `γ` lists.
pub fn sweep_text(base: &RunConfig, ps: &[f64], gammas: &[f64]) -> String {
    let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    format!("{}sweep_p = {}\nsweep_gamma = {}\n", base.canonical_text(), list(ps), list(gammas))
}

#[derive(Serialize)]
struct SweepManifest<'a> {
    sweep_hash: String,
    config: Value,
    p_values: &'a [f64],
    gamma_values: &'a [f64],
    cells: &'a [PhaseCell],
}

pub fn sweep_manifest(base: &RunConfig, ps: &[f64], gammas: &[f64], cells: &[PhaseCell]) -> Result<String> {
    to_json(&SweepManifest {
        sweep_hash: hash_text(&sweep_text(base, ps, gammas)),
        config: config_object(base),
        p_values: ps,
        gamma_values: gammas,
        cells,
    })
}

/// Writes `config.txt`, `sweep.csv`, `phase.dat` and `manifest.json` into a new run directory.
pub fn write_sweep(root: &Path, base: &RunConfig, ps: &[f64], gammas: &[f64], cells: &[PhaseCell]) -> Result<PathBuf> {
    let text = sweep_text(base, ps, gammas);
    let dir = create_run_dir(root, &hash_text(&text))?;
    std::fs::write(dir.join("config.txt"), text)?;
    std::fs::write(dir.join("sweep.csv"), sweep_csv(cells, base.q_dim()))?;
    std::fs::write(dir.join("phase.dat"), emit_plotdata(cells)?)?;
    std::fs::write(dir.join("manifest.json"), sweep_manifest(base, ps, gammas, cells)?)?;
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn run_dir_name_has_timestamp_and_hash() {
        let t = Utc.with_ymd_and_hms(2026, 3, 4, 5, 6, 7).unwrap();
        assert_eq!(run_dir_name(t, "abc123def456"), "20260304T050607Z-abc123def456");
    }

    #[test]
    fn sweep_text_changes_with_the_grid() {
        let base = RunConfig::default();
        assert_ne!(hash_text(&sweep_text(&base, &[1.3], &[0.0])), hash_text(&sweep_text(&base, &[1.3, 2.0], &[0.0])));
        assert!(sweep_text(&base, &[1.3, 2.0], &[0.0, -0.5]).ends_with("sweep_p = 1.3,2\nsweep_gamma = 0,-0.5\n"));
    }
}
