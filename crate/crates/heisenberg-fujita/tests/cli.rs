//! The `hfujita` binary: exit codes and run-directory layout.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hfujita-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn hfujita(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfujita")).arg("--out").arg(out).args(args).output().unwrap()
}

fn run_dirs(out: &Path) -> Vec<PathBuf> {
    std::fs::read_dir(out).map(|d| d.map(|e| e.unwrap().path()).collect()).unwrap_or_default()
}

const SMALL: [&str; 10] = ["--n-xy", "13", "--n-tau", "13", "--t-horizon", "1", "--set", "L=4", "--set", "L_tau=16"];

#[test]
fn configuration_errors_exit_with_two_and_write_nothing() {
    let out = scratch("config");
    for args in [
        &["run", "--gamma", "-3"][..],
        &["run", "--set", "bogus=1"],
        &["run", "--p", "one"],
        &["run", "--initial-data", "custom_file", "--custom-file", "/nonexistent/u0.txt"],
        &["sweep", "--p-values", "1.3", "--gamma-values", "0", "--set", "n_xy=0"],
    ] {
        let o = hfujita(&out, args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: configuration error"));
    }
    assert!(run_dirs(&out).is_empty());
}

#[test]
fn a_run_writes_config_manifest_and_snapshot_under_a_timestamped_hash_dir() {
    let out = scratch("run");
    let mut args = vec!["run", "--gamma", "0", "--p", "1.3"];
    args.extend(SMALL);
    let o = hfujita(&out, &args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("verdict="));
    let dirs = run_dirs(&out);
    assert_eq!(dirs.len(), 1);
    let name = dirs[0].file_name().unwrap().to_string_lossy().into_owned();
    let (stamp, hash) = name.split_once('-').unwrap();
    assert_eq!(stamp.len(), 16);
    assert!(stamp.ends_with('Z') && stamp.as_bytes()[8] == b'T');
    assert_eq!(hash.len(), 12);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    for file in ["config.txt", "manifest.json", "final_state.txt"] {
        assert!(dirs[0].join(file).is_file(), "{file} missing");
    }
    let manifest = std::fs::read_to_string(dirs[0].join("manifest.json")).unwrap();
    assert!(manifest.contains(&format!("\"config_hash\": \"{hash}\"")));
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn a_sweep_writes_csv_and_plot_data() {
    let out = scratch("sweep");
    let mut args = vec!["sweep", "--p-values", "1.3,2", "--gamma-values", "-0.5,0", "--set", "certify=false"];
    args.extend(SMALL);
    let o = hfujita(&out, &args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = &run_dirs(&out)[0];
    let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("p,gamma,p_c,hardy_threshold,verdict,t_final,max_norm"));
    assert_eq!(csv.lines().count(), 5);
    let plot = std::fs::read_to_string(dir.join("phase.dat")).unwrap();
    assert_eq!(plot.lines().filter(|l| !l.starts_with('#')).count(), 4);
    std::fs::remove_dir_all(&out).unwrap();
}
