use std::fs;
use std::path::Path;
use std::process::Command;

use ymh_cli::config::{CycleSpec, ExperimentConfig, Refine};
use ymh_cli::experiments::{gamma, minimize, monotonicity, vortex, width};

fn ymh(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ymh")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid.size = 3\n");
    let out = ymh(&["vortex", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = ymh(&["info", "--config", dir.path().join("absent.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // ε above ℓ/10 is rejected by the planar synthesis.
    let cfg = write_config(dir.path(), "vortex.k = 1\neps = 0.5\ngrid.dims = 16, 16\n");
    let out = ymh(&["vortex", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn strict_failure_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "vortex.k = 1\neps = 0.05\ngrid.dims = 64, 64\ntol.xi_ratio = 100\n");
    let o = dir.path().join("o");
    let relaxed = ymh(&["vortex", "--config", &cfg, "--out", o.to_str().unwrap()]);
    assert_eq!(relaxed.status.code(), Some(0));
    let strict = ymh(&["vortex", "--config", &cfg, "--out", o.to_str().unwrap(), "--strict"]);
    assert_eq!(strict.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&strict.stdout).contains("FAIL discrepancy refinement"));
}

#[test]
fn info_prints_resolved_config() {
    let out = ymh(&["info", "--seed", "17"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("ymh-core"));
    assert!(text.contains("seed = 17"));
}

#[test]
fn outputs_are_bit_identical_for_one_config_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.dims = 16, 16\ngrid.flux = 0\ngrid.refine = fixed\neps = 0.2\nflow.t_end = 0.5\n",
    );
    let run = |name: &str| {
        let o = dir.path().join(name);
        let out = ymh(&["minimize", "--config", &cfg, "--out", o.to_str().unwrap(), "--seed", "9", "--threads", "2"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read_to_string(o.join("manifest.sha256")).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    for name in ["config.resolved", "version.txt", "summary.csv", "trajectory_eps0.csv", "snapshot_eps0.ymh", "checks.csv"] {
        assert!(a.contains(name), "{name} missing from manifest");
    }
}

#[test]
fn manifest_hashes_match_files() {
    use sha2::{Digest, Sha256};
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    let cfg = write_config(dir.path(), "vortex.k = 0, 2\n");
    assert_eq!(ymh(&["vortex", "--config", &cfg, "--out", o.to_str().unwrap()]).status.code(), Some(0));
    let manifest = fs::read_to_string(o.join("manifest.sha256")).unwrap();
    for row in manifest.lines() {
        let (hex, name) = row.split_once("  ").unwrap();
        let digest = Sha256::digest(fs::read(o.join(name)).unwrap());
        let got: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(got, hex, "{name}");
    }
}

#[test]
fn degree_zero_vortex_has_zero_energy() {
    let mut cfg = ExperimentConfig::default();
    cfg.vortex.k = vec![0];
    let (_, row) = vortex::profile_row(&cfg, 0).unwrap();
    assert_eq!(row.energy, 0.0);
}

#[test]
fn trivial_sector_minimizes_to_zero() {
    let mut cfg = ExperimentConfig::default();
    cfg.grid.dims = vec![24, 24];
    cfg.grid.flux = vec![0];
    cfg.grid.refine = Refine::Fixed;
    let r = minimize::minimize_one(&cfg, 0.2, None).unwrap();
    assert!(r.energy < 1e-6, "E = {}", r.energy);
    assert!(r.mass == 0.0 && r.class == [0]);
}

#[test]
fn t3_minimizer_has_class_001() {
    let mut cfg = ExperimentConfig::default();
    cfg.grid.n = 3;
    cfg.grid.dims = vec![32, 32, 32];
    cfg.grid.lengths = vec![1.0; 3];
    cfg.grid.flux = vec![1, 0, 0];
    cfg.grid.refine = Refine::Fixed;
    let r = minimize::minimize_one(&cfg, 0.1, None).unwrap();
    assert_eq!(r.class, [0, 0, 1]);
    assert!((0.85..=1.2).contains(&r.ratio()), "E/2π = {}", r.ratio());
}

#[test]
fn empty_cycle_recovers_zero() {
    let mut cfg = ExperimentConfig::default();
    cfg.grid.n = 3;
    cfg.grid.dims = vec![16, 16, 16];
    cfg.grid.lengths = vec![1.0; 3];
    cfg.grid.flux = vec![0, 0, 0];
    cfg.cycle = CycleSpec::Loops(Vec::new());
    let r = gamma::recovery_one(&cfg, 0.2).unwrap();
    assert_eq!(r.limit, 0.0);
    assert!(r.energy.abs() < 1e-12, "E = {}", r.energy);
    assert!(r.exact);
}

#[test]
fn vacuum_monotonicity_is_zero() {
    let mut cfg = ExperimentConfig::default();
    cfg.grid.dims = vec![16, 16];
    cfg.grid.flux = vec![0];
    cfg.grid.refine = Refine::Fixed;
    cfg.mono.big_t = 2.0;
    let prof = monotonicity::psi_profile(&cfg, 0.2).unwrap();
    assert!(!prof.points.is_empty());
    assert!(prof.points.iter().all(|p| p.phi == 0.0 && p.psi == 0.0));
    assert_eq!(prof.ratio, 0.0);
}

#[test]
fn trivial_width_class_gives_zero_on_both_sides() {
    let mut cfg = ExperimentConfig::default();
    cfg.width.class = vec![0, 0];
    cfg.width.sweep_dims = 32;
    let o = width::sweep(&cfg).unwrap();
    assert_eq!(o.bracket.lower, 0.0);
    assert_eq!(o.max_energy, 0.0);
    assert_eq!(o.family_class, [0, 0]);
}

#[test]
fn doubled_class_sweep_is_bracketed() {
    let mut cfg = ExperimentConfig::default();
    cfg.width.class = vec![2, 0];
    cfg.width.sweep_dims = 48;
    cfg.width.eps = 0.08;
    cfg.width.level = 2;
    let o = width::sweep(&cfg).unwrap();
    assert_eq!(o.family_class, [2, 0]);
    let upper = o.bracket.upper.expect("a family is found below the cap");
    assert!(o.bracket.lower <= upper);
    assert!(o.max_energy >= 2.0 * std::f64::consts::PI * o.bracket.lower * (1.0 - cfg.tol.width));
}
