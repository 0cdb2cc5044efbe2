use std::fmt;
use std::path::{Path, PathBuf};

use quadsim::config::RawConfig;
use quadsim::report::{gains_report, metrics_report, summarize, write_artifacts, RunSummary, REPORTED_OVERSHOOT_PCT, REPORTED_RISE_TIME, REPORTED_SETTLING_TIME};
use quadsim::{run_scenario, Controller, Error, ScenarioConfig, SimLog};

use crate::args::{ControllerKind, ScenarioArgs};

const DEFAULT_OUT: &str = "out";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Diverged(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Diverged(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Diverged(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

fn config_error(source: Option<&Path>, e: Error) -> CliError {
    let msg = match (&e, source) {
        (Error::Parse { line: 0, message }, _) => format!("command-line option: {message}"),
        (Error::Parse { line, message }, Some(path)) => format!("{}:{line}: {message}", path.display()),
        (_, Some(path)) => format!("{}: {e}", path.display()),
        (_, None) => e.to_string(),
    };
    CliError::Config(msg)
}

fn raw_config(args: &ScenarioArgs) -> Result<RawConfig, CliError> {
    let mut raw = match &args.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            RawConfig::parse(&text).map_err(|e| config_error(Some(path), e))?
        }
        None => RawConfig::default(),
    };
    if let Some(kind) = args.trajectory {
        raw.set_trajectory(kind.as_str());
    }
    if let Some(x) = args.step_x {
        raw.set_trajectory("step");
        raw.set("step.x", x);
    }
    if let Some(dt) = args.dt {
        raw.set("dt", dt);
    }
    if let Some(d) = args.duration {
        raw.set("duration", d);
    }
    if let Some(c) = args.controller {
        raw.set("controller", match c {
            ControllerKind::Nlpd => "nlpd",
            ControllerKind::Linpd => "linpd",
        });
    }
    if args.no_decoupling {
        raw.set("decoupling", "off");
    }
    if args.ideal_attitude {
        raw.set("ideal_attitude", "on");
    }
    if let Some(seed) = args.seed {
        raw.set("seed", seed);
    }
    let out = match (&args.out, raw.get("output")) {
        (Some(dir), _) => dir.display().to_string(),
        (None, Some(dir)) => dir.to_string(),
        (None, None) => DEFAULT_OUT.to_string(),
    };
    raw.set("output", out);
    Ok(raw)
}

fn build(raw: &RawConfig, args: &ScenarioArgs) -> Result<(ScenarioConfig, PathBuf), CliError> {
    let cfg = raw.build().map_err(|e| config_error(args.scenario.as_deref(), e))?;
    cfg.validate().map_err(|e| config_error(args.scenario.as_deref(), e))?;
    let dir = PathBuf::from(cfg.output.clone().unwrap_or_else(|| DEFAULT_OUT.into()));
    Ok((cfg, dir))
}

pub fn load(args: &ScenarioArgs) -> Result<(ScenarioConfig, PathBuf), CliError> {
    build(&raw_config(args)?, args)
}

struct Run {
    summary: RunSummary,
    dir: PathBuf,
}

/// Runs a scenario and writes its artifacts, also after a divergence.
fn run_and_write(cfg: &ScenarioConfig, dir: &Path) -> Result<Run, CliError> {
    let (log, diverged_at) = match run_scenario(cfg) {
        Ok(log) => (log, None),
        Err(failure) => match failure.error {
            Error::Diverged { t } => (failure.log, Some(t)),
            e => return Err(config_error(None, e)),
        },
    };
    let summary = summarize(cfg, &log, diverged_at);
    write(cfg, &log, &summary, dir)?;
    Ok(Run { summary, dir: dir.to_path_buf() })
}

fn write(cfg: &ScenarioConfig, log: &SimLog, summary: &RunSummary, dir: &Path) -> Result<(), CliError> {
    write_artifacts(cfg, log, summary, dir)
        .map(|_| ())
        .map_err(|e| CliError::Io(format!("cannot write artifacts to {}: {e}", dir.display())))
}

fn check_diverged(run: &Run) -> Result<(), CliError> {
    match run.summary.diverged_at {
        Some(t) => Err(CliError::Diverged(format!(
            "simulation diverged at t = {t} s; partial log written to {}",
            run.dir.display()
        ))),
        None => Ok(()),
    }
}

pub fn simulate(args: &ScenarioArgs) -> Result<(), CliError> {
    let (cfg, dir) = load(args)?;
    let run = run_and_write(&cfg, &dir)?;
    print!("{}", metrics_report(&run.summary, None));
    println!("artifacts={}", dir.display());
    check_diverged(&run)
}

fn cell(v: Option<f64>, precision: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.precision$}"))
}

pub fn compare(args: &ScenarioArgs) -> Result<(), CliError> {
    let (base, dir) = load(args)?;
    let variants = [
        ("nlpd-on", Controller::Nlpd, true),
        ("nlpd-off", Controller::Nlpd, false),
        ("linpd-on", Controller::Linpd, true),
    ];
    let results: Vec<Result<Run, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = variants
            .iter()
            .map(|&(name, controller, decoupling)| {
                let cfg = ScenarioConfig { controller, decoupling, ..base.clone() };
                let sub = dir.join(name);
                s.spawn(move || run_and_write(&cfg, &sub))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    println!("{:<10} {:>8} {:>8} {:>10} {:>10} {:>11}", "variant", "t_r[s]", "t_s5[s]", "OS[%]", "rms[m]", "cross[rad]");
    for ((name, ..), run) in variants.iter().zip(&runs) {
        let s = &run.summary;
        let step = s.step.map(|st| st.metrics);
        println!(
            "{:<10} {:>8} {:>8} {:>10} {:>10} {:>11}",
            name,
            cell(step.and_then(|m| m.rise_time), 3),
            cell(step.and_then(|m| m.settling_time), 3),
            cell(step.map(|m| m.overshoot_pct), 2),
            cell(s.tracking.map(|t| t.rms), 4),
            cell(s.cross_axis_peak, 6),
        );
    }
    if let (Some(on), Some(off)) = (runs[0].summary.cross_axis_peak, runs[1].summary.cross_axis_peak) {
        println!("cross-axis ratio off/on = {:.2}", off / on);
    }
    println!("artifacts={}", dir.display());
    runs.iter().try_for_each(check_diverged)
}

pub fn gains(args: &ScenarioArgs) -> Result<(), CliError> {
    let (cfg, _) = load(args)?;
    for (axis, poles) in [("x", cfg.gains.x), ("y", cfg.gains.y), ("z", cfg.gains.z)] {
        let text = gains_report(poles).map_err(|e| config_error(args.scenario.as_deref(), e))?;
        for line in text.lines() {
            println!("{axis}.{line}");
        }
    }
    Ok(())
}

pub fn step_test(args: &ScenarioArgs) -> Result<(), CliError> {
    let mut raw = raw_config(args)?;
    if raw.get("trajectory") != Some("step") {
        raw.set_trajectory("step");
    }
    let (cfg, dir) = build(&raw, args)?;
    let run = run_and_write(&cfg, &dir)?;
    check_diverged(&run)?;
    let Some(step) = run.summary.step else {
        return Err(CliError::Config("step-test needs a nonzero step".into()));
    };
    let m = step.metrics;
    println!("step {}={} m", step.signal, step.setpoint);
    println!("{:<20} {:>10} {:>10}", "metric", "measured", "reported");
    println!("{:<20} {:>10} {:>10}", "rise time [s]", cell(m.rise_time, 3), REPORTED_RISE_TIME);
    println!("{:<20} {:>10} {:>10}", "settling 5% [s]", cell(m.settling_time, 3), REPORTED_SETTLING_TIME);
    println!("{:<20} {:>10} {:>10}", "overshoot [%]", format!("{:.2}", m.overshoot_pct), REPORTED_OVERSHOOT_PCT);
    println!("{:<20} {:>10} {:>10}", "steady-state [m]", format!("{:.4}", m.steady_state_error), 0);
    let verdict = if quadsim::report::within_step_window(&m) { "inside" } else { "outside" };
    println!("acceptance window (rise <= 2 s, settling <= 4 s, overshoot <= 12%, error <= 1 cm): {verdict}");
    println!("artifacts={}", dir.display());
    Ok(())
}
