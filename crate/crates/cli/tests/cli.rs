use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn rotor(args: &[&str]) -> Output {
    rotor_env(args, &[])
}

fn rotor_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rotor"));
    cmd.args(args).env_remove("ROTOR_TOL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("rotor runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows of a CSV written by rotor (comment lines and header skipped).
fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn header(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .split(',')
        .map(String::from)
        .collect()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Numeric table rows printed by `design`.
fn design_rows(out: &str) -> Vec<Vec<f64>> {
    out.lines()
        .filter(|l| l.trim_start().chars().next().is_some_and(|c| c.is_ascii_digit()))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn design_reproduces_the_reference_row() {
    let o = rotor(&["design", "--omega1-khz", "1", "--theta-f", "pi/2", "--n1", "1", "--n2", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = &design_rows(&stdout(&o))[0];
    // omega2, theta_dot in kHz and T in ms, to two decimals.
    assert_eq!(format!("{:.2}", r[4]), "1.79");
    assert_eq!(format!("{:.2}", r[5]), "0.23");
    assert_eq!(format!("{:.2}", r[6]), "1.08");
}

#[test]
fn design_table_scales_inversely_with_frequency() {
    let o = rotor(&["design", "--table1"]);
    assert!(o.status.success());
    let rows = design_rows(&stdout(&o));
    assert_eq!(rows.len(), 4);
    let printed = [(1.79, 0.23, 1.08), (3.59, 0.46, 0.54), (8.96, 1.16, 0.22), (17.93, 2.32, 0.11)];
    for (r, p) in rows.iter().zip(printed) {
        assert_eq!(format!("{:.2}", r[4]), format!("{:.2}", p.0));
        assert_eq!(format!("{:.2}", r[5]), format!("{:.2}", p.1));
        assert_eq!(format!("{:.2}", r[6]), format!("{:.2}", p.2));
        assert!((r[6] * r[3] - rows[0][6]).abs() < 1e-5);
    }
}

#[test]
fn unreachable_angle_exits_with_physics_code() {
    let o = rotor(&["design", "--omega1-khz", "1", "--theta-f", "2pi", "--n1", "1", "--n2", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("infeasible"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(rotor(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(rotor(&["design", "--theta-f", "half"]).status.code(), Some(1));
    assert_eq!(rotor(&["simulate", "--state", "squeezed"]).status.code(), Some(1));
    assert_eq!(rotor(&["--help"]).status.code(), Some(0));
}

#[test]
fn static_modes_are_the_trap_frequencies() {
    let o = rotor(&["modes", "--omega1-khz", "1", "--omega2-khz", "1.5"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("Omega1 = 1.000000000000 kHz"), "{out}");
    assert!(out.contains("Omega2 = 1.500000000000 kHz"), "{out}");
}

#[test]
fn rotation_at_the_bound_is_flagged() {
    let o = rotor(&["modes", "--omega1-khz", "1", "--omega2-khz", "1.5", "--theta-dot-khz", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("maximum allowed"));
    let o = rotor(&["modes", "--omega1-khz", "1", "--omega2-khz", "1.5", "--theta-dot-khz", "1.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mode_sweep_follows_the_expected_trends() {
    let dir = TempDir::new().unwrap();
    let o = rotor(&["modes", "--sweep", "--points", "50", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&dir.path().join("modes_sweep.csv"));
    assert_eq!(r.len(), 50);
    assert!(r.windows(2).all(|w| w[1][1] < w[0][1] && w[1][2] > w[0][2]));
    assert_eq!((r[0][1], r[0][2]), (1.0, 1.5));
    let last = r.last().unwrap();
    assert_eq!((last[0], last[1], last[3]), (1.0, 0.0, 1.0));
    assert!(r[..49].iter().all(|row| row[3] == 0.0));
}

#[test]
fn benchmark_states_revive() {
    for state in ["ground", "entangled", "coherent:1/sqrt2,1/sqrt2"] {
        let dir = TempDir::new().unwrap();
        let o = rotor(&["simulate", "--state", state, "--samples", "41", "--out", dir.path().to_str().unwrap()]);
        assert!(o.status.success(), "{state}: {}", stderr(&o));
        let kind = state.split(':').next().unwrap();
        let path = dir.path().join(format!("simulate_{kind}.csv"));
        assert_eq!(header(&path), ["t_ms", "mean_excitation", "survival"]);
        let r = rows(&path);
        assert_eq!(r.len(), 41);
        let (first, last) = (&r[0], r.last().unwrap());
        assert!((last[1] - first[1]).abs() < 1e-6, "{state}");
        assert!(1.0 - last[2] < 1e-6, "{state}");
        assert!(stdout(&o).contains("expected -1"));
    }
}

#[test]
fn zero_length_run_is_the_identity() {
    let dir = TempDir::new().unwrap();
    let o = rotor(&["simulate", "--t-end", "0", "--observables", "P", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let path = dir.path().join("simulate_ground.csv");
    assert_eq!(header(&path), ["t_ms", "survival"]);
    assert_eq!(rows(&path), vec![vec![0.0, 1.0]]);
}

#[test]
fn quadrature_means_follow_the_classical_centroid() {
    let dir = TempDir::new().unwrap();
    let o = rotor(&[
        "simulate",
        "--state",
        "coherent:1.2+0.3i,-0.5",
        "--check-classical",
        "--samples",
        "21",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for r in rows(&dir.path().join("simulate_coherent.csv")) {
        for k in 0..4 {
            assert!((r[3 + k] - r[7 + k]).abs() < 1e-6);
        }
    }
}

#[test]
fn convergence_failures_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let o = rotor_env(
        &["simulate", "--state", "coherent:3,0", "--out", dir.path().to_str().unwrap()],
        &[("ROTOR_TOL", "max_nmax=24")],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = rotor(&["simulate", "--state", "coherent:3,0", "--nmax", "12", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn malformed_tolerance_override_is_a_usage_error() {
    let o = rotor_env(&["design"], &[("ROTOR_TOL", "fast")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ROTOR_TOL"));
}

#[test]
fn tolerance_override_is_recorded() {
    let dir = TempDir::new().unwrap();
    let o = rotor_env(
        &["simulate", "--samples", "3", "--out", dir.path().to_str().unwrap()],
        &[("ROTOR_TOL", "survival=1e-9,top_shell=1e-10")],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("simulate.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["tolerances"]["survival_change"], 1e-9);
    assert_eq!(m["tolerances"]["top_shell"], 1e-10);
    assert!(!m["nmax_trace"].as_array().unwrap().is_empty());
}

#[test]
fn files_carry_the_manifest_hash_and_are_listed() {
    let dir = TempDir::new().unwrap();
    let o = rotor(&["classical", "--alpha1", "8/sqrt2", "--alpha2", "2/sqrt2", "--samples", "101", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("closed-orbit residual"));
    let manifest_text = fs::read(dir.path().join("classical.manifest.json")).unwrap();
    let hash = hex(&Sha256::digest(&manifest_text));
    let m: serde_json::Value = serde_json::from_slice(&manifest_text).unwrap();
    assert_eq!(m["command"], "classical");
    let outputs: Vec<String> = m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(outputs, ["trajectory_rotating.csv"]);
    for name in &outputs {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        let comment = text.lines().nth(1).unwrap();
        assert_eq!(comment, format!("# manifest classical.manifest.json sha256:{hash}"));
    }
    let r = rows(&dir.path().join("trajectory_rotating.csv"));
    let (first, last) = (&r[0], r.last().unwrap());
    for k in 1..5 {
        assert!((first[k] - last[k]).abs() < 1e-8 * 10.0);
    }
}

#[test]
fn identical_runs_are_byte_identical_and_replayable() {
    let (a, b, c) = (TempDir::new().unwrap(), TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = |d: &TempDir| {
        vec![
            "stability".to_string(),
            "--n2-list".into(),
            "2,5,10".into(),
            "--points".into(),
            "7".into(),
            "--out".into(),
            d.path().to_str().unwrap().into(),
        ]
    };
    for d in [&a, &b] {
        let argv = args(d);
        let o = rotor(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("curves narrow with each listed n2: true"));
    }
    let o = rotor(&[
        "replay",
        a.path().join("stability.manifest.json").to_str().unwrap(),
        "--out",
        c.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["stability.manifest.json", "stability_n2_2.csv", "stability_n2_5.csv", "stability_n2_10.csv"] {
        let first = fs::read(a.path().join(name)).unwrap();
        assert_eq!(first, fs::read(b.path().join(name)).unwrap(), "{name}");
        assert_eq!(first, fs::read(c.path().join(name)).unwrap(), "{name}");
    }
    // The zero offset sits in the middle of the window and revives fully.
    let r = rows(&a.path().join("stability_n2_2.csv"));
    assert_eq!(r[3][0], 0.0);
    assert!((r[3][1] - 1.0).abs() < 1e-10);
}

#[test]
fn small_track_writes_grid_and_orbit() {
    let dir = TempDir::new().unwrap();
    let o = rotor(&[
        "track",
        "--alpha1",
        "1",
        "--alpha2",
        "0.5",
        "--nmax",
        "20",
        "--spacing",
        "0.25",
        "--time-steps",
        "400",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let grid = rows(&dir.path().join("track.csv"));
    assert!(grid.iter().all(|r| r[2] >= 0.0));
    let cell = 0.25 * 0.25;
    let integral: f64 = grid.iter().map(|r| r[2]).sum::<f64>() * cell;
    let orbit = rows(&dir.path().join("trajectory_rotating.csv"));
    let duration = orbit.last().unwrap()[0];
    assert!(((integral - duration) / duration).abs() < 0.02);
}
