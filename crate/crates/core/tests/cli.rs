//! Black-box checks of the `discosim` binary: exit codes, output files, and
//! seed resolution.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_discosim"))
}

const SMALL_CONFIG: &str = "\
[dgp]
scenario = rdd
support = -1 1
jump = 1

[adversary]
k = 2 100

[mc]
n = 200
reps = 120
seed = 7
";

#[test]
fn run_writes_all_outputs_and_resolves_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, SMALL_CONFIG).unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    for name in ["resolved.cfg", "table.csv", "curve.svg"] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    // config seed wins when no flag is given
    let resolved = std::fs::read_to_string(out.join("resolved.cfg")).unwrap();
    assert!(resolved.contains("seed = 7"), "{resolved}");
    let csv = std::fs::read_to_string(out.join("table.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,reject_rate,cover_rate,mean_ci_len,mcse_reject,mcse_cover,n_eff,failures"
    );
    assert_eq!(csv.lines().count(), 4); // header, k = 2, k = 100, Q
    assert!(csv.lines().last().unwrap().starts_with("Q,"));

    // an explicit flag overrides the config seed
    let out2 = dir.path().join("out2");
    let status = bin()
        .args(["run", cfg.to_str().unwrap(), "--out", out2.to_str().unwrap(), "--seed", "99"])
        .status()
        .unwrap();
    assert!(status.success());
    let resolved = std::fs::read_to_string(out2.join("resolved.cfg")).unwrap();
    assert!(resolved.contains("seed = 99"), "{resolved}");
}

#[test]
fn config_errors_exit_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, SMALL_CONFIG.replace("jump = 1", "jump = one")).unwrap();
    let output = bin()
        .args(["run", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 4"), "{stderr}");
}

#[test]
fn missing_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["run", "no-such-file.cfg", "--out", dir.path().join("o").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_demo_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["demo", "nope", "--out", dir.path().join("o").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown scenario"));
}

#[test]
fn metrics_demo_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let status = bin()
        .args(["demo", "metrics", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("metrics").join("table.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "n,tv,kolmogorov");
    assert_eq!(csv.lines().count(), 5);
    for line in csv.lines().skip(1) {
        let tv: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(tv, 1.0);
    }
    assert!(out.join("metrics").join("curve.svg").exists());
}

fn skip_if_missing(path: &Path) -> bool {
    !path.exists()
}

#[test]
fn rdd_demo_writes_blend_figure() {
    // the full rdd demo also appears in the acceptance suite; here only the
    // extra figure is checked, against a short config instead when time
    // matters. The demo takes under a second in this profile.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let status = bin()
        .args(["demo", "rdd", "--out", out.to_str().unwrap(), "--jobs", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    let blend = out.join("rdd").join("blend.svg");
    assert!(!skip_if_missing(&blend), "blend.svg not written");
    let svg = std::fs::read_to_string(blend).unwrap();
    assert!(svg.contains("g_k, k = 10"));
}
