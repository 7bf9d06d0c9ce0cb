//! End-to-end tests of the qdsim binary: exit codes, written files, and
//! determinism across worker counts. All runs use a deliberately tiny grid
//! so the whole file finishes in seconds.

use std::path::Path;
use std::process::{Command, Output};

fn qdsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdsim"))
        .args(args)
        .output()
        .expect("qdsim runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("qdsim exits normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A configuration small enough for sub-second runs: short window, coarse
/// delays, a 41-bin strip straddling the pump line, and a two-point sweep.
const TINY: &str = "\
[grids]
window_end = 150 ps
time_step = 1 ps
delay_step = 0.5 ps
bin_start = 1340.67 meV
bin_end = 1341.67 meV
bin_step = 25 ueV

[sweep]
v_start = -0.17 V
v_end = -0.07 V
points = 2
";

fn write_tiny(dir: &Path) -> String {
    let path = dir.join("tiny.conf");
    std::fs::write(&path, TINY).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validate_passes_on_defaults() {
    let out = qdsim(&["validate"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(text.contains("PASS"), "no PASS lines in:\n{text}");
    assert!(!text.contains("FAIL"), "unexpected FAIL in:\n{text}");
}

#[test]
fn broken_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "[pulses]\nwidth = -5 ps\n").unwrap();
    let out = qdsim(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(
        stderr(&out).contains("width must be positive"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn unknown_scenario_is_rejected() {
    let out = qdsim(&["simulate", "--scenario", "fig4"]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
}

#[test]
fn zero_workers_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let out = qdsim(&["validate", "--config", &cfg, "--workers", "0"]);
    assert_ne!(code(&out), 0);
}

#[test]
fn simulate_writes_spectrum_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let out_dir = dir.path().join("out");
    let out = qdsim(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let tsv = std::fs::read_to_string(out_dir.join("spectrum.tsv")).unwrap();
    assert!(tsv.starts_with("# qdsim"), "header: {}", &tsv[..60.min(tsv.len())]);
    assert!(tsv.contains("# config sha256 "));
    assert!(tsv.contains("energy_meV\tintensity"));
    // 41 bins -> 41 data rows after the single column header line.
    let data_rows = tsv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("energy_meV") && !l.is_empty())
        .count();
    assert_eq!(data_rows, 41);

    let meta = std::fs::read_to_string(out_dir.join("spectrum.meta.txt")).unwrap();
    assert!(meta.contains("config sha256"));
    assert!(meta.contains("[model]"));
}

#[test]
fn mask_notches_zeroes_the_laser_bin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());

    let read_bin = |out_dir: &Path| -> (f64, f64) {
        let tsv = std::fs::read_to_string(out_dir.join("spectrum.tsv")).unwrap();
        // The pump sits exactly on the 1341.17 meV bin.
        let mut pump = f64::NAN;
        let mut edge = f64::NAN;
        for line in tsv.lines().filter(|l| !l.starts_with('#')) {
            let mut cols = line.split('\t');
            let (Some(e), Some(i)) = (cols.next(), cols.next()) else {
                continue;
            };
            if let (Ok(e), Ok(i)) = (e.parse::<f64>(), i.parse::<f64>()) {
                if (e - 1341.17).abs() < 1e-9 {
                    pump = i;
                }
                if (e - 1340.67).abs() < 1e-9 {
                    edge = i;
                }
            }
        }
        (pump, edge)
    };

    let plain_dir = dir.path().join("plain");
    let out = qdsim(&["simulate", "--config", &cfg, "--out", plain_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let (pump_plain, _) = read_bin(&plain_dir);
    assert!(pump_plain > 0.0, "laser bin empty without masking: {pump_plain}");

    let masked_dir = dir.path().join("masked");
    let out = qdsim(&[
        "simulate",
        "--config",
        &cfg,
        "--mask-notches",
        "--out",
        masked_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let (pump_masked, edge_masked) = read_bin(&masked_dir);
    assert_eq!(pump_masked, 0.0, "laser bin not masked");
    // Bins at and beyond the notch half-width survive.
    assert!(edge_masked.is_finite());
}

#[test]
fn sweep_outputs_are_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let mut maps = Vec::new();
    for workers in ["1", "2"] {
        let out_dir = dir.path().join(format!("w{workers}"));
        let out = qdsim(&[
            "sweep",
            "--config",
            &cfg,
            "--workers",
            workers,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
        for name in ["map.tsv", "map.meta.txt", "tracks.tsv", "map.pgm"] {
            assert!(out_dir.join(name).exists(), "missing {name}");
        }
        maps.push(std::fs::read(out_dir.join("map.tsv")).unwrap());
    }
    assert_eq!(maps[0], maps[1], "map.tsv differs between 1 and 2 workers");

    let tsv = String::from_utf8(maps.pop().unwrap()).unwrap();
    assert!(tsv.contains("# voltages 2 from -1.70000000e-1 to -7.00000000e-2 V"));
    assert!(tsv.contains("# line_refs v -1.70000000e-1"));
}

#[test]
fn oracle_subcommand_reports() {
    let out = qdsim(&["oracle", "--dt", "0.5", "--t-end", "10"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(text.contains("max Frobenius deviation"), "{text}");
    assert!(text.contains("step-halving ratio"), "{text}");
}
