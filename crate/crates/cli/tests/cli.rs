use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "t,x,y,z,vx,vy,vz,phi,theta,psi,p,q,r,xr,yr,zr,psir,U1,U2,U3,U4,U2v,U3v,U4v,F1,F2,F3,F4,sat";

fn quadsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadsim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn assert_one_line_error(o: &Output, code: i32) {
    assert_eq!(o.status.code(), Some(code), "stderr: {}", stderr(o));
    let err = stderr(o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "), "{err}");
}

fn write_scenario(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn gains_prints_synthesized_values() {
    let o = quadsim(&["gains"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("x.Kp=3.0100\n"), "{out}");
    assert!(out.contains("x.Kd=5.0000\n"));
    assert!(out.contains("x.tau_d=1.6611\n"));
    assert!(out.contains("x.predicted.overshoot_pct=8.04\n"));
}

#[test]
fn simulate_writes_three_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = quadsim(&["simulate", "--trajectory", "circle", "--duration", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("log.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(HEADER));
    assert_eq!(lines.clone().count(), 2001);
    for line in lines {
        assert_eq!(line.split(',').count(), 29);
    }
    let metrics = std::fs::read_to_string(out.join("metrics.txt")).unwrap();
    assert!(metrics.contains("manifest.checksum="));
    assert!(metrics.contains("config.trajectory=circle\n"));
    assert!(metrics.contains("tracking.radial_rms="));
    assert!(!metrics.contains("step."));
    let plot = std::fs::read_to_string(out.join("plot.py")).unwrap();
    assert!(plot.contains("log.csv") && plot.contains("matplotlib"));
}

#[test]
fn identical_runs_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("a");
    let args = ["simulate", "--trajectory", "square", "--duration", "3", "--out", dir.to_str().unwrap()];
    assert!(quadsim(&args).status.success());
    let first = (std::fs::read(dir.join("log.csv")).unwrap(), std::fs::read(dir.join("metrics.txt")).unwrap());
    assert!(quadsim(&args).status.success());
    let second = (std::fs::read(dir.join("log.csv")).unwrap(), std::fs::read(dir.join("metrics.txt")).unwrap());
    assert!(first == second);
}

#[test]
fn scenario_file_with_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_scenario(tmp.path(), "s.cfg", "# short step\ntrajectory = step\nstep.x = 0.2\nduration = 1\n");
    let out = tmp.path().join("o");
    let o = quadsim(&["simulate", "--scenario", &path, "--step-x", "0.5", "--dt", "0.002", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let metrics = std::fs::read_to_string(out.join("metrics.txt")).unwrap();
    assert!(metrics.contains("config.step.x=0.5\n"), "{metrics}");
    assert!(metrics.contains("config.dt=0.002\n"));
    assert!(metrics.contains("step.setpoint=0.5\n"));
    assert!(metrics.contains("reported.rise_time=1\n"));
    assert!(metrics.contains("window.pass="));
}

#[test]
fn parse_error_exits_2_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_scenario(tmp.path(), "bad.cfg", "trajectory = circle\ncircle.radius\n");
    let o = quadsim(&["simulate", "--scenario", &path, "--out", tmp.path().to_str().unwrap()]);
    assert_one_line_error(&o, 2);
    assert!(stderr(&o).contains("bad.cfg:2:"), "{}", stderr(&o));
}

#[test]
fn validation_error_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = quadsim(&["simulate", "--dt", "-0.1", "--out", tmp.path().to_str().unwrap()]);
    assert_one_line_error(&o, 2);
    let path = write_scenario(tmp.path(), "v.cfg", "params.mass = 0\n");
    let o = quadsim(&["simulate", "--scenario", &path, "--out", tmp.path().to_str().unwrap()]);
    assert_one_line_error(&o, 2);
}

#[test]
fn bad_arguments_exit_2() {
    assert_one_line_error(&quadsim(&["simulate", "--trajectory", "spiral"]), 2);
    assert_one_line_error(&quadsim(&["simulate", "--bogus"]), 2);
    assert_one_line_error(&quadsim(&[]), 2);
}

#[test]
fn missing_scenario_exits_4() {
    let o = quadsim(&["simulate", "--scenario", "/nonexistent/quadsim.cfg"]);
    assert_one_line_error(&o, 4);
}

#[test]
fn unwritable_output_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = quadsim(&["simulate", "--duration", "0.1", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_one_line_error(&o, 4);
}

#[test]
fn divergence_exits_3_and_keeps_partial_log() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_scenario(tmp.path(), "d.cfg", "trajectory = hover\nparams.bandwidth = 10000\ndt = 0.01\nduration = 5\n");
    let out = tmp.path().join("d");
    let o = quadsim(&["simulate", "--scenario", &path, "--out", out.to_str().unwrap()]);
    assert_one_line_error(&o, 3);
    let csv = std::fs::read_to_string(out.join("log.csv")).unwrap();
    let rows = csv.lines().count() - 1;
    assert!(rows > 0 && rows < 501, "{rows}");
    let metrics = std::fs::read_to_string(out.join("metrics.txt")).unwrap();
    assert!(metrics.contains("run.diverged=true\n"));
}

#[test]
fn compare_reports_decoupling_contrast() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_scenario(
        tmp.path(),
        "ab.cfg",
        "trajectory = hover\nduration = 1.5\nattitude_step.phi = 0.3\ninitial.r = 1\n",
    );
    let out = tmp.path().join("cmp");
    let o = quadsim(&["compare", "--scenario", &path, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("cross-axis ratio off/on = "), "{text}");
    for name in ["nlpd-on", "nlpd-off", "linpd-on"] {
        assert!(text.lines().any(|l| l.starts_with(name)));
        assert!(out.join(name).join("log.csv").is_file());
    }
    let ratio: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("cross-axis ratio off/on = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio > 1.0, "{ratio}");
}

#[test]
fn step_test_reports_against_claims() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("st");
    let o = quadsim(&["step-test", "--duration", "8", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("step x=1 m\n"), "{text}");
    assert!(text.contains("rise time [s]"));
    assert!(text.contains("acceptance window"));
    assert!(out.join("metrics.txt").is_file());
}

#[test]
fn shipped_scenarios_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let text = std::fs::read_to_string(&path).unwrap();
            let cfg = quadsim::ScenarioConfig::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.validate().unwrap();
            n += 1;
        }
    }
    assert!(n >= 4);
}
