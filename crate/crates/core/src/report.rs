//! Run artifacts: the CSV log, the `key=value` metrics report and a plot
//! script.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::config::ScenarioConfig;
use crate::metrics::{closest_approach, peak_abs, radial_rms, step_metrics, tracking_metrics, StepMetrics, TrackingMetrics};
use crate::position::{predict_step_metrics, PolePair};
use crate::sim::{SimLog, SimRow};
use crate::trajectory::Trajectory;

pub const CSV_HEADER: &str =
    "t,x,y,z,vx,vy,vz,phi,theta,psi,p,q,r,xr,yr,zr,psir,U1,U2,U3,U4,U2v,U3v,U4v,F1,F2,F3,F4,sat";

pub const LOG_FILE: &str = "log.csv";
pub const METRICS_FILE: &str = "metrics.txt";
pub const PLOT_FILE: &str = "plot.py";

/// Step-response figures reported for the inverse-model controller, used as
/// the comparison column of the metrics report.
pub const REPORTED_RISE_TIME: f64 = 1.0;
pub const REPORTED_SETTLING_TIME: f64 = 2.0;
pub const REPORTED_OVERSHOOT_PCT: f64 = 4.0;

/// Acceptance window for a 1 m step through the full cascade.
pub const STEP_WINDOW_RISE_TIME: f64 = 2.0;
pub const STEP_WINDOW_SETTLING_TIME: f64 = 4.0;
pub const STEP_WINDOW_OVERSHOOT_PCT: f64 = 12.0;
pub const STEP_WINDOW_STEADY_STATE_ERROR: f64 = 0.01;

/// Writes the log with shortest round-trip decimal formatting; `sat` is 0/1.
pub fn write_csv<W: Write>(log: &SimLog, out: W) -> io::Result<()> {
    let mut w = io::BufWriter::new(out);
    writeln!(w, "{CSV_HEADER}")?;
    let mut line = String::with_capacity(512);
    for row in &log.rows {
        line.clear();
        let _ = write!(line, "{}", row.t);
        for v in row.state.to_array() {
            let _ = write!(line, ",{v}");
        }
        let r = &row.reference;
        for v in [r.x, r.y, r.z, r.psi] {
            let _ = write!(line, ",{v}");
        }
        for v in row.control.to_array() {
            let _ = write!(line, ",{v}");
        }
        let vt = &row.virtual_torques;
        for v in [vt.roll, vt.pitch, vt.yaw] {
            let _ = write!(line, ",{v}");
        }
        for v in row.forces.0 {
            let _ = write!(line, ",{v}");
        }
        let _ = write!(line, ",{}", u8::from(row.saturated));
        writeln!(w, "{line}")?;
    }
    w.flush()
}

pub fn csv_string(log: &SimLog) -> String {
    let mut buf = Vec::new();
    write_csv(log, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv is ascii")
}

/// Which signal a step run is judged on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSummary {
    pub signal: &'static str,
    pub setpoint: f64,
    pub metrics: StepMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub rows: usize,
    pub duration: f64,
    pub diverged_at: Option<f64>,
    pub step: Option<StepSummary>,
    /// Over the second half of the run.
    pub tracking: Option<TrackingMetrics>,
    pub radial_rms: Option<f64>,
    pub corner_distances: Option<Vec<f64>>,
    /// Peak deviation of the attitude axes that were not stepped.
    pub cross_axis_peak: Option<f64>,
    pub saturated_rows: usize,
}

pub fn summarize(cfg: &ScenarioConfig, log: &SimLog, diverged_at: Option<f64>) -> RunSummary {
    let mut summary = RunSummary {
        rows: log.rows.len(),
        duration: log.duration(),
        diverged_at,
        step: None,
        tracking: None,
        radial_rms: None,
        corner_distances: None,
        cross_axis_peak: None,
        saturated_rows: log.rows.iter().filter(|r| r.saturated).count(),
    };
    if log.rows.is_empty() {
        return summary;
    }
    let end = log.duration();
    let window = (0.5 * end, end);
    summary.tracking = tracking_metrics(log, window).ok();

    if let Some(cmd) = cfg.attitude_step {
        type Pick = fn(&SimRow) -> f64;
        let axes: [(&'static str, f64, Pick); 3] = [
            ("phi", cmd.phi, |r| r.state.phi),
            ("theta", cmd.theta, |r| r.state.theta),
            ("psi", cmd.psi, |r| r.state.psi),
        ];
        if let Some(&(signal, setpoint, pick)) = axes.iter().find(|a| a.1 != 0.0) {
            summary.step = step_metrics(&log.series(pick), setpoint)
                .ok()
                .map(|metrics| StepSummary { signal, setpoint, metrics });
        }
        let roll_pitch_cross: Vec<&(&str, f64, Pick)> = axes[..2].iter().filter(|a| a.1 == 0.0).collect();
        if roll_pitch_cross.len() == 1 {
            let pick = roll_pitch_cross[0].2;
            summary.cross_axis_peak = Some(peak_abs(log, pick));
        }
        return summary;
    }

    match cfg.trajectory {
        Trajectory::Step { x, y, z } => {
            type Pick = fn(&SimRow) -> f64;
            let axes: [(&'static str, f64, Pick); 3] =
                [("x", x, |r| r.state.x), ("y", y, |r| r.state.y), ("z", z, |r| r.state.z)];
            if let Some(&(signal, setpoint, pick)) = axes.iter().find(|a| a.1 != 0.0) {
                summary.step = step_metrics(&log.series(pick), setpoint)
                    .ok()
                    .map(|metrics| StepSummary { signal, setpoint, metrics });
            }
        }
        Trajectory::Circle { radius, .. } => summary.radial_rms = radial_rms(log, window, radius).ok(),
        Trajectory::Square { side, .. } => {
            summary.corner_distances = Some(closest_approach(log, &Trajectory::square_corners(side)));
        }
        Trajectory::Hover { .. } => {}
    }
    summary
}

/// Resolved configuration, artifact paths, tool version and config
/// checksum of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: ScenarioConfig,
    pub log_path: PathBuf,
    pub metrics_path: PathBuf,
    pub plot_path: PathBuf,
    pub version: &'static str,
    pub checksum: String,
}

impl RunManifest {
    pub fn new(cfg: &ScenarioConfig, dir: &Path) -> Self {
        Self {
            config: cfg.resolved(),
            log_path: dir.join(LOG_FILE),
            metrics_path: dir.join(METRICS_FILE),
            plot_path: dir.join(PLOT_FILE),
            version: env!("CARGO_PKG_VERSION"),
            checksum: cfg.checksum(),
        }
    }
}

fn push(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key}={value}");
}

fn push_opt(out: &mut String, key: &str, value: Option<f64>) {
    if let Some(v) = value {
        push(out, key, v);
    }
}

fn push_step(out: &mut String, prefix: &str, m: &StepMetrics) {
    push_opt(out, &format!("{prefix}.rise_time"), m.rise_time);
    push_opt(out, &format!("{prefix}.settling_time_5pct"), m.settling_time);
    push_opt(out, &format!("{prefix}.settling_time_2pct"), m.settling_time_2pct);
    push(out, &format!("{prefix}.overshoot_pct"), m.overshoot_pct);
    push_opt(out, &format!("{prefix}.peak_time"), m.peak_time);
    push(out, &format!("{prefix}.steady_state_error"), m.steady_state_error);
}

/// Whether a position step meets the loose acceptance window.
pub fn within_step_window(m: &StepMetrics) -> bool {
    m.rise_time.is_some_and(|t| t <= STEP_WINDOW_RISE_TIME)
        && m.settling_time.is_some_and(|t| t <= STEP_WINDOW_SETTLING_TIME)
        && m.overshoot_pct <= STEP_WINDOW_OVERSHOOT_PCT
        && m.steady_state_error <= STEP_WINDOW_STEADY_STATE_ERROR
}

/// Metrics block as `key=value` lines. Metrics that are undefined for the
/// run are omitted.
pub fn metrics_report(summary: &RunSummary, manifest: Option<&RunManifest>) -> String {
    let mut out = String::new();
    if let Some(m) = manifest {
        push(&mut out, "manifest.version", m.version);
        push(&mut out, "manifest.checksum", &m.checksum);
        push(&mut out, "manifest.log", m.log_path.display());
        push(&mut out, "manifest.metrics", m.metrics_path.display());
        push(&mut out, "manifest.plot", m.plot_path.display());
        for line in m.config.render().lines() {
            if let Some((k, v)) = line.split_once(" = ") {
                push(&mut out, &format!("config.{k}"), v);
            }
        }
    }
    push(&mut out, "run.rows", summary.rows);
    push(&mut out, "run.duration", summary.duration);
    push(&mut out, "run.saturated_rows", summary.saturated_rows);
    push(&mut out, "run.diverged", summary.diverged_at.is_some());
    push_opt(&mut out, "run.diverged_at", summary.diverged_at);

    if let Some(step) = &summary.step {
        push(&mut out, "step.signal", step.signal);
        push(&mut out, "step.setpoint", step.setpoint);
        push_step(&mut out, "step", &step.metrics);
        if matches!(step.signal, "x" | "y" | "z") {
            push(&mut out, "reported.rise_time", REPORTED_RISE_TIME);
            push(&mut out, "reported.settling_time", REPORTED_SETTLING_TIME);
            push(&mut out, "reported.overshoot_pct", REPORTED_OVERSHOOT_PCT);
            let m = &step.metrics;
            push_opt(&mut out, "discrepancy.rise_time", m.rise_time.map(|t| t - REPORTED_RISE_TIME));
            push_opt(&mut out, "discrepancy.settling_time", m.settling_time.map(|t| t - REPORTED_SETTLING_TIME));
            push(&mut out, "discrepancy.overshoot_pct", m.overshoot_pct - REPORTED_OVERSHOOT_PCT);
            push(&mut out, "window.rise_time_max", STEP_WINDOW_RISE_TIME);
            push(&mut out, "window.settling_time_max", STEP_WINDOW_SETTLING_TIME);
            push(&mut out, "window.overshoot_pct_max", STEP_WINDOW_OVERSHOOT_PCT);
            push(&mut out, "window.steady_state_error_max", STEP_WINDOW_STEADY_STATE_ERROR);
            push(&mut out, "window.pass", within_step_window(m));
        }
    }
    if let Some(t) = &summary.tracking {
        push(&mut out, "tracking.window_start", t.window.0);
        push(&mut out, "tracking.window_end", t.window.1);
        push(&mut out, "tracking.rms", t.rms);
        push(&mut out, "tracking.max", t.max);
        push(&mut out, "tracking.rms_x", t.rms_x);
        push(&mut out, "tracking.rms_y", t.rms_y);
        push(&mut out, "tracking.rms_z", t.rms_z);
    }
    push_opt(&mut out, "tracking.radial_rms", summary.radial_rms);
    if let Some(d) = &summary.corner_distances {
        for (i, v) in d.iter().enumerate() {
            push(&mut out, &format!("square.corner{}_distance", i + 1), v);
        }
    }
    push_opt(&mut out, "attitude.cross_axis_peak", summary.cross_axis_peak);
    out
}

/// Gain report for a pole pair, with the linear loop's predicted response.
pub fn gains_report(poles: PolePair) -> crate::Result<String> {
    let g = crate::position::synthesize_pd_gains(poles)?;
    let m = predict_step_metrics(poles)?;
    let mut out = String::new();
    push(&mut out, "pole1", poles.p1);
    push(&mut out, "pole2", poles.p2);
    push(&mut out, "Kp", format!("{:.4}", g.kp));
    push(&mut out, "Kd", format!("{:.4}", g.kd()));
    push(&mut out, "tau_d", format!("{:.4}", g.tau_d));
    push(&mut out, "predicted.overshoot_pct", format!("{:.2}", m.overshoot_pct));
    if let Some(t) = m.peak_time {
        push(&mut out, "predicted.peak_time", format!("{t:.3}"));
    }
    if let Some(t) = m.rise_time {
        push(&mut out, "predicted.rise_time", format!("{t:.3}"));
    }
    if let Some(t) = m.settling_time {
        push(&mut out, "predicted.settling_time_5pct", format!("{t:.3}"));
    }
    if let Some(t) = m.settling_time_2pct {
        push(&mut out, "predicted.settling_time_2pct", format!("{t:.3}"));
    }
    Ok(out)
}

/// A matplotlib script that redraws the run from the CSV next to it.
pub fn plot_script(cfg: &ScenarioConfig) -> String {
    format!(
        r#"#!/usr/bin/env python3
# Plots {log} produced by quadsim ({kind} trajectory, {controller}, decoupling {decoupling}).
import csv
import os
import sys

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "{log}")
with open(path) as f:
    rows = list(csv.DictReader(f))
col = lambda k: [float(r[k]) for r in rows]
t = col("t")

fig, ax = plt.subplots(2, 2, figsize=(11, 8))
ax[0][0].plot(col("xr"), col("yr"), "k--", label="reference")
ax[0][0].plot(col("x"), col("y"), label="flown")
ax[0][0].set_xlabel("x [m]")
ax[0][0].set_ylabel("y [m]")
ax[0][0].axis("equal")
ax[0][0].legend()
for k in ("x", "y", "z"):
    ax[0][1].plot(t, col(k), label=k)
    ax[0][1].plot(t, col(k + "r"), "--", label=k + "r")
ax[0][1].set_xlabel("t [s]")
ax[0][1].set_ylabel("position [m]")
ax[0][1].legend()
for k in ("phi", "theta", "psi"):
    ax[1][0].plot(t, col(k), label=k)
ax[1][0].set_xlabel("t [s]")
ax[1][0].set_ylabel("angle [rad]")
ax[1][0].legend()
for k in ("F1", "F2", "F3", "F4"):
    ax[1][1].plot(t, col(k), label=k)
ax[1][1].set_xlabel("t [s]")
ax[1][1].set_ylabel("rotor thrust [N]")
ax[1][1].legend()
fig.tight_layout()
out = os.path.splitext(path)[0] + ".png"
fig.savefig(out, dpi=120)
print(out)
"#,
        log = LOG_FILE,
        kind = cfg.trajectory.kind(),
        controller = cfg.controller.as_str(),
        decoupling = if cfg.decoupling { "on" } else { "off" },
    )
}

/// Writes the three artifacts of a run into `dir` and returns the manifest.
pub fn write_artifacts(
    cfg: &ScenarioConfig,
    log: &SimLog,
    summary: &RunSummary,
    dir: &Path,
) -> io::Result<RunManifest> {
    std::fs::create_dir_all(dir)?;
    let manifest = RunManifest::new(cfg, dir);
    write_csv(log, std::fs::File::create(&manifest.log_path)?)?;
    std::fs::write(&manifest.metrics_path, metrics_report(summary, Some(&manifest)))?;
    std::fs::write(&manifest.plot_path, plot_script(cfg))?;
    Ok(manifest)
}
