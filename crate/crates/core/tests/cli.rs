use std::path::Path;
use std::process::Command;

use remstab::cli::{reports_from_json, run_config, AnalysisConfig, SweepVariable, EXIT_INVALID, EXIT_OK};
use remstab::Verdict;

const TOP_SWEEP: &str = "\
# sleeping top
model.id = lagrange_top
model.i = 1
model.i3 = 1.5
ip.params = 1
sweep.variable = zeta
sweep.range = 0.5, 3
sweep.steps = 26
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_remstab"))
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn config_parsing() {
    let cfg = AnalysisConfig::parse(TOP_SWEEP).unwrap();
    assert_eq!(cfg.model, "lagrange_top");
    assert_eq!(cfg.model_params["i3"], 1.5);
    let sweep = cfg.sweep.as_ref().unwrap();
    assert_eq!(sweep.variable, SweepVariable::Model("zeta".into()));
    assert_eq!(sweep.steps, 26);
    assert_eq!(sweep.value(25), 3.0);
    assert!(AnalysisConfig::parse("model.id = lagrange_top\nmodel.id = rigid_body\n").is_err());
    assert!(AnalysisConfig::parse("model.id lagrange_top\n").is_err());
    assert!(AnalysisConfig::parse("model.id = nope\n").and_then(|c| c.validate()).is_err());
}

#[test]
fn sweep_finds_the_top_threshold() {
    let cfg = AnalysisConfig::parse(TOP_SWEEP).unwrap();
    let out = run_config(&cfg).unwrap();
    assert_eq!(out.points.len(), 26);
    assert_eq!(out.thresholds.len(), 1);
    let t = &out.thresholds[0];
    assert!(t.stable_above);
    // zeta^2 = (1 + k)^2 mgl / (k i3 + i3 - i) = 2 at k = 1
    assert!((t.value * t.value - 2.0).abs() < 1e-6 * 2.0, "{}", t.value);
    for p in &out.points {
        let zeta = p.value.unwrap();
        let expect = if zeta * zeta > 2.0 { Verdict::GmuStable } else { Verdict::Inconclusive };
        assert_eq!(p.rem.verdict, expect, "zeta = {zeta}");
    }
    assert_eq!(out.exit_code(), EXIT_OK);
}

#[test]
fn binary_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "top.cfg", TOP_SWEEP);
    let json = dir.path().join("out.json");
    let text = dir.path().join("out.txt");
    let status = bin()
        .args(["analyze", cfg.to_str().unwrap(), "--oracle", "--blocks", "--json"])
        .arg(&json)
        .arg("--text")
        .arg(&text)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
    let reports = reports_from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    // rem, block and oracle report per sweep point
    assert_eq!(reports.len(), 3 * 26);
    let summary = std::fs::read_to_string(&text).unwrap();
    assert!(summary.contains("threshold"));
}

#[test]
fn summary_goes_to_stdout_without_a_text_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "rb.cfg", "model.id = rigid_body\nmodel.axis = 2\n");
    let out = bin().args(["analyze", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("INCONCLUSIVE"), "{stdout}");
}

#[test]
fn malformed_config_exits_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("out.json");
    let text = dir.path().join("out.txt");
    for body in [
        "model.id = lagrange_top\nsweep.variable = zeta\nsweep.range = 1\n",
        "model.id = lagrange_top\nmodel.zeta = fast\n",
        "model.id = spherical_pendulum\nmodel.theta0 = 2.0\n",
        "model.id = lagrange_top\nip.params = -1\n",
        "model.id = lagrange_top\noptimize_ip = true\n",
    ] {
        let cfg = write(dir.path(), "bad.cfg", body);
        let out = bin()
            .args(["analyze", cfg.to_str().unwrap(), "--json"])
            .arg(&json)
            .arg("--text")
            .arg(&text)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(EXIT_INVALID), "{body}");
        assert!(!json.exists() && !text.exists(), "{body}");
        assert!(!out.stderr.is_empty());
    }
    let out = bin().args(["analyze", "/nonexistent/config"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "top.cfg", TOP_SWEEP);
    let run = |tag: &str| {
        let json = dir.path().join(format!("{tag}.json"));
        let text = dir.path().join(format!("{tag}.txt"));
        let status = bin()
            .args(["analyze", cfg.to_str().unwrap(), "--oracle", "--json"])
            .arg(&json)
            .arg("--text")
            .arg(&text)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(EXIT_OK));
        (std::fs::read(json).unwrap(), std::fs::read(text).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}
