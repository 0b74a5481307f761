//! End-to-end checks of the `bjj` binary: exit codes, file schemas,
//! byte-level determinism and the overlay-toggling contract.

use std::fs;
use std::path::Path;
use std::process::Command;

use bjj_cli::scenario::{preset, run_scenario};

fn bjj() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bjj"))
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

#[test]
fn run_requires_a_config_or_preset() {
    let status = bjj().arg("run").status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_preset_is_a_config_error() {
    let out = tempfile::tempdir().unwrap();
    let status = bjj()
        .args(["run", "--preset", "fig99", "--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn malformed_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    fs::write(&config, "shape.n_a ohno").unwrap();
    let status = bjj().args(["run", "--config"]).arg(&config).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let status = bjj()
        .args(["run", "--config", "/nonexistent/nowhere.cfg"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn separated_preset_emits_the_binomial_distribution() {
    let out = tempfile::tempdir().unwrap();
    let status = bjj()
        .args(["run", "--preset", "fig3c", "--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let csv = read(out.path(), "distribution.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("two_m,p"));
    let mut coeff: f64 = 1.0;
    let mut rows = 0;
    for (s, line) in lines.enumerate() {
        let (two_m, p) = line.split_once(',').unwrap();
        assert_eq!(two_m.parse::<i64>().unwrap(), 2 * s as i64 - 12);
        let p: f64 = p.parse().unwrap();
        assert!((p - coeff / 4096.0).abs() <= 1e-10, "row {s}: {p}");
        coeff = coeff * (12.0 - s as f64) / (s as f64 + 1.0);
        rows += 1;
    }
    assert_eq!(rows, 13);

    // grid and trajectory files carry their declared schemas
    let grid = read(out.path(), "grid.csv");
    assert!(grid.starts_with("k,l,p\n"));
    assert_eq!(grid.lines().count(), 1 + 49);
    let traj = read(out.path(), "trajectory.csv");
    assert!(traj.starts_with("t_cm,two_m,p\n"));
    assert_eq!(traj.lines().count(), 1 + 201 * 13);

    // fig presets enable the overlay branch
    assert!(out.path().join("distribution_overlay.csv").exists());

    let summary = read(out.path(), "summary.json");
    let parsed: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(parsed["config"]["scenario.initial"], "separated_corner");
    let var = parsed["base"]["variance"].as_f64().unwrap();
    assert!((var - 3.0).abs() < 1e-8, "variance = {var}");
}

#[test]
fn identical_configs_give_byte_identical_outputs() {
    let out1 = tempfile::tempdir().unwrap();
    let out2 = tempfile::tempdir().unwrap();
    for out in [&out1, &out2] {
        let status = bjj()
            .args(["run", "--preset", "fig3b", "--out"])
            .arg(out.path())
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let mut names: Vec<String> = fs::read_dir(out1.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        let a = fs::read(out1.path().join(&name)).unwrap();
        let b = fs::read(out2.path().join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn overlay_toggle_leaves_the_base_branch_bit_identical() {
    let with = tempfile::tempdir().unwrap();
    let without = tempfile::tempdir().unwrap();
    for (out, switch) in [(&with, "on"), (&without, "off")] {
        let status = bjj()
            .args(["run", "--preset", "fig4b", "--overlay", switch, "--out"])
            .arg(out.path())
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    for name in ["distribution.csv", "grid.csv", "trajectory.csv"] {
        let a = fs::read(with.path().join(name)).unwrap();
        let b = fs::read(without.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} depends on the overlay toggle");
    }
    assert!(with.path().join("distribution_overlay.csv").exists());
    assert!(!without.path().join("distribution_overlay.csv").exists());
}

#[test]
fn json_format_bundles_results() {
    let out = tempfile::tempdir().unwrap();
    let status = bjj()
        .args(["run", "--preset", "fig3a", "--format", "json", "--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(!out.path().join("distribution.csv").exists());
    let results: serde_json::Value =
        serde_json::from_str(&read(out.path(), "results.json")).unwrap();
    assert_eq!(results["t_cm"].as_array().unwrap().len(), 201);
    assert_eq!(results["two_m"].as_array().unwrap().len(), 13);
    assert_eq!(
        results["base"]["trajectory"].as_array().unwrap().len(),
        201
    );
}

#[test]
fn config_file_overrides_preset_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("override.cfg");
    fs::write(&config, "scenario.t_samples = 5\n").unwrap();
    let out = tempfile::tempdir().unwrap();
    let status = bjj()
        .args(["run", "--preset", "fig3a", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let traj = read(out.path(), "trajectory.csv");
    assert_eq!(traj.lines().count(), 1 + 5 * 13);
}

#[test]
fn sweep_emits_variance_columns_with_sign_symmetry() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.cfg");
    let omega = std::f64::consts::PI / 30.0;
    fs::write(
        &config,
        format!(
            "shape.n_a = 6\nshape.n_b = 6\nscenario.initial = mixed_center\n\
             scenario.t_samples = 2\nscenario.overlay = off\n\
             sweep.u_iso = {},{},{}\n",
            -0.125 * omega,
            0.0,
            0.125 * omega
        ),
    )
    .unwrap();
    let out = tempfile::tempdir().unwrap();
    let status = bjj()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let sweep = read(out.path(), "sweep.csv");
    let mut lines = sweep.lines();
    assert_eq!(lines.next(), Some("u_per_cm,var_no_overlay"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    // attractive and repulsive interactions give the same variance
    assert!((rows[0][1] - rows[2][1]).abs() <= 1e-9);
    assert!((rows[1][1] - 12.0).abs() <= 1e-8);
}

#[test]
fn amplitude_file_input_matches_the_equivalent_fock_state() {
    let dir = tempfile::tempdir().unwrap();
    let amps = dir.path().join("corner.csv");
    fs::write(&amps, "k,l,re,im\n6,0,2.0,0.0\n").unwrap(); // normalized on load
    let base = "shape.n_a = 6\nshape.n_b = 6\nscenario.t_samples = 5\n";
    let fock_cfg = dir.path().join("fock.cfg");
    fs::write(&fock_cfg, format!("{base}scenario.initial = fock:6,0\n")).unwrap();
    let amp_cfg = dir.path().join("amp.cfg");
    fs::write(
        &amp_cfg,
        format!("{base}scenario.initial = amplitudes:{}\n", amps.display()),
    )
    .unwrap();

    let out_fock = tempfile::tempdir().unwrap();
    let out_amp = tempfile::tempdir().unwrap();
    for (cfg, out) in [(&fock_cfg, &out_fock), (&amp_cfg, &out_amp)] {
        let status = bjj()
            .args(["run", "--config"])
            .arg(cfg)
            .args(["--out"])
            .arg(out.path())
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    for name in ["distribution.csv", "grid.csv", "trajectory.csv"] {
        let a = fs::read(out_fock.path().join(name)).unwrap();
        let b = fs::read(out_amp.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between fock and amplitude-file input");
    }
}

#[test]
fn layout_subcommand_emits_positions_and_overlay() {
    let out = tempfile::tempdir().unwrap();
    let status = bjj()
        .args(["layout", "--preset", "fig2", "--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let layout = read(out.path(), "layout.csv");
    assert!(layout.starts_with("k,l,x_um,y_um\n"));
    assert_eq!(layout.lines().count(), 1 + 49);
    let overlay = read(out.path(), "overlay.csv");
    assert!(overlay.starts_with("k1,l1,k2,l2,kappa_per_cm\n"));
    assert_eq!(overlay.lines().count(), 1 + 72);
}

#[test]
fn single_species_and_symmetric_coupled_presets_agree() {
    // same imbalance trajectory from the 1 x 13 array and the coupled
    // |j=6, m=0> injection on the 7 x 7 array
    let mut line = preset("fig3a").unwrap();
    let mut square = preset("fig3d").unwrap();
    line.t_samples = 51;
    square.t_samples = 51;
    line.overlay_enabled = false;
    square.overlay_enabled = false;
    let a = run_scenario(&line).unwrap();
    let b = run_scenario(&square).unwrap();
    for (da, db) in a.base.trajectory.iter().zip(b.base.trajectory.iter()) {
        for (x, y) in da.probs().iter().zip(db.probs().iter()) {
            assert!((x - y).abs() <= 1e-9);
        }
    }
}

#[test]
fn check_subcommand_passes() {
    let output = bjj().arg("check").output().unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert_eq!(output.status.code(), Some(0), "stdout:\n{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.contains("PASS")).count(), 12);
}
