//! Scenario configuration and its flat `key = value` text format.
//!
//! ```text
//! # circle cruise
//! trajectory = circle
//! circle.radius = 1
//! duration = 120
//! gains.x.pole1 = 0.7
//! ```
//!
//! Lines are `key = value`; `#` starts a comment. Keys are dotted. A key may
//! appear at most once. Keys of a trajectory kind other than the selected
//! one are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::attitude::{AttitudeCommand, AttitudeGains, PidGains};
use crate::dynamics::{QuadParams, QuadState};
use crate::error::{Error, Result};
use crate::position::{CommandLimits, PolePair};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Controller {
    /// Inverse-model nonlinear PD.
    #[default]
    Nlpd,
    /// Linear PD with small-angle attitude commands.
    Linpd,
}

impl Controller {
    pub fn as_str(&self) -> &'static str {
        match self {
            Controller::Nlpd => "nlpd",
            Controller::Linpd => "linpd",
        }
    }
}

impl FromStr for Controller {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "nlpd" => Ok(Controller::Nlpd),
            "linpd" => Ok(Controller::Linpd),
            _ => Err(format!("unknown controller `{s}` (expected nlpd or linpd)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GainSet {
    pub x: PolePair,
    pub y: PolePair,
    pub z: PolePair,
    pub attitude: AttitudeGains,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub trajectory: Trajectory,
    pub duration: f64,
    pub dt: f64,
    /// Controller runs every `decimation` integrator steps.
    pub decimation: u32,
    pub controller: Controller,
    pub decoupling: bool,
    /// Angles follow their commands instantly; the inner loop is bypassed.
    pub ideal_attitude: bool,
    /// Inner-loop-only run: the position loop is replaced by this constant
    /// attitude command.
    pub attitude_step: Option<AttitudeCommand>,
    /// `None` starts at rest at the trajectory's start position.
    pub initial: Option<QuadState>,
    pub params: QuadParams,
    pub gains: GainSet,
    pub limits: CommandLimits,
    pub output: Option<String>,
    /// Reserved; nothing stochastic consumes it.
    pub seed: Option<u64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            trajectory: Trajectory::step(),
            duration: 20.0,
            dt: 1e-3,
            decimation: 1,
            controller: Controller::Nlpd,
            decoupling: true,
            ideal_attitude: false,
            attitude_step: None,
            initial: None,
            params: QuadParams::default(),
            gains: GainSet::default(),
            limits: CommandLimits::default(),
            output: None,
            seed: None,
        }
    }
}

impl ScenarioConfig {
    pub fn with_trajectory(trajectory: Trajectory) -> Self {
        Self { trajectory, ..Default::default() }
    }

    pub fn initial_state(&self) -> QuadState {
        self.initial.unwrap_or_else(|| {
            let [x, y, z] = self.trajectory.start_position();
            QuadState::at_position(x, y, z)
        })
    }

    /// Copy with every default made explicit.
    pub fn resolved(&self) -> Self {
        Self { initial: Some(self.initial_state()), ..self.clone() }
    }

    /// Number of integrator steps; the log holds one more row than this.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Validation(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration.is_finite() && self.duration >= self.dt) {
            return Err(Error::Validation(format!(
                "duration must be at least dt ({}), got {}",
                self.dt, self.duration
            )));
        }
        if self.decimation == 0 {
            return Err(Error::Validation("decimation must be at least 1".into()));
        }
        self.trajectory.validate()?;
        self.params.validate()?;
        self.limits.validate()?;
        for (axis, poles) in [("x", self.gains.x), ("y", self.gains.y), ("z", self.gains.z)] {
            if !(poles.p1.is_finite() && poles.p2.is_finite() && poles.p1 > 0.0 && poles.p2 > 0.0) {
                return Err(Error::Validation(format!("gains.{axis} poles must be positive, got {poles:?}")));
            }
        }
        let att = &self.gains.attitude;
        att.roll.validate("roll")?;
        att.pitch.validate("pitch")?;
        att.yaw.validate("yaw")?;
        if let Some(cmd) = &self.attitude_step {
            let finite = cmd.phi.is_finite() && cmd.theta.is_finite() && cmd.psi.is_finite();
            if !finite || cmd.phi.abs() > self.limits.tilt || cmd.theta.abs() > self.limits.tilt {
                return Err(Error::Validation(format!(
                    "attitude_step must be finite with |phi|, |theta| <= {} rad",
                    self.limits.tilt
                )));
            }
        }
        if let Some(s) = &self.initial {
            if !s.is_finite() {
                return Err(Error::Validation("initial state must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        RawConfig::parse(text)?.build()
    }

    /// Canonical text of the resolved configuration.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_body(&mut out);
        if let Some(path) = &self.output {
            let _ = writeln!(out, "output = {path}");
        }
        out
    }

    /// SHA-256 of the canonical text, excluding the output path.
    pub fn checksum(&self) -> String {
        let mut body = String::new();
        self.render_body(&mut body);
        let digest = Sha256::digest(body.as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn render_body(&self, out: &mut String) {
        let c = self.resolved();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("trajectory", c.trajectory.kind().to_string());
        match c.trajectory {
            Trajectory::Circle { radius, omega, altitude } => {
                kv("circle.radius", radius.to_string());
                kv("circle.omega", omega.to_string());
                kv("circle.altitude", altitude.to_string());
            }
            Trajectory::Square { side, speed, dwell, altitude } => {
                kv("square.side", side.to_string());
                kv("square.speed", speed.to_string());
                kv("square.dwell", dwell.to_string());
                kv("square.altitude", altitude.to_string());
            }
            Trajectory::Step { x, y, z } => {
                kv("step.x", x.to_string());
                kv("step.y", y.to_string());
                kv("step.z", z.to_string());
            }
            Trajectory::Hover { altitude } => kv("hover.altitude", altitude.to_string()),
        }
        kv("duration", c.duration.to_string());
        kv("dt", c.dt.to_string());
        kv("decimation", c.decimation.to_string());
        kv("controller", c.controller.as_str().to_string());
        kv("decoupling", if c.decoupling { "on" } else { "off" }.to_string());
        kv("ideal_attitude", c.ideal_attitude.to_string());
        if let Some(cmd) = c.attitude_step {
            kv("attitude_step.phi", cmd.phi.to_string());
            kv("attitude_step.theta", cmd.theta.to_string());
            kv("attitude_step.psi", cmd.psi.to_string());
        }
        let init = c.initial_state().to_array();
        for (name, v) in STATE_KEYS.iter().zip(init) {
            kv(&format!("initial.{name}"), v.to_string());
        }
        let p = c.params;
        for (name, v) in [
            ("mass", p.mass),
            ("jxx", p.jxx),
            ("jyy", p.jyy),
            ("jzz", p.jzz),
            ("arm", p.arm),
            ("yaw_coeff", p.yaw_coeff),
            ("thrust_gain", p.thrust_gain),
            ("bandwidth", p.bandwidth),
            ("gravity", p.gravity),
        ] {
            kv(&format!("params.{name}"), v.to_string());
        }
        for (axis, poles) in [("x", c.gains.x), ("y", c.gains.y), ("z", c.gains.z)] {
            kv(&format!("gains.{axis}.pole1"), poles.p1.to_string());
            kv(&format!("gains.{axis}.pole2"), poles.p2.to_string());
        }
        let att = c.gains.attitude;
        for (axis, g) in [("roll", att.roll), ("pitch", att.pitch), ("yaw", att.yaw)] {
            for (name, v) in [("kp", g.kp), ("ki", g.ki), ("kd", g.kd), ("i_max", g.i_max), ("a_max", g.a_max)] {
                kv(&format!("gains.{axis}.{name}"), v.to_string());
            }
        }
        let l = c.limits;
        kv("limits.tilt", l.tilt.to_string());
        kv("limits.accel", l.accel.to_string());
        kv("limits.min_thrust", l.min_thrust.to_string());
        kv("limits.eps", l.eps.to_string());
        if let Some(seed) = c.seed {
            kv("seed", seed.to_string());
        }
    }
}

const STATE_KEYS: [&str; 12] = ["x", "y", "z", "vx", "vy", "vz", "phi", "theta", "psi", "p", "q", "r"];
const TRAJECTORY_KINDS: [&str; 4] = ["circle", "square", "step", "hover"];

/// Parsed but uninterpreted `key = value` pairs, remembering source lines.
/// Line 0 marks a command-line override.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(Error::Parse { line: lineno, message: "empty key or value".into() });
            }
            if let Some((prev, _)) = raw.entries.get(key) {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("duplicate key `{key}` (first set on line {prev})"),
                });
            }
            raw.entries.insert(key.to_string(), (lineno, value.to_string()));
        }
        Ok(raw)
    }

    /// Overrides (or adds) a key.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), (0, value.to_string()));
    }

    /// Selects a trajectory kind and drops parameters of the other kinds.
    pub fn set_trajectory(&mut self, kind: &str) {
        self.entries.retain(|k, _| match k.split_once('.') {
            Some((prefix, _)) => prefix == kind || !TRAJECTORY_KINDS.contains(&prefix),
            None => true,
        });
        self.set("trajectory", kind);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn build(&self) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::default();
        let kind = self.get("trajectory").unwrap_or("step");
        cfg.trajectory = match kind {
            "circle" => Trajectory::circle(),
            "square" => Trajectory::square(),
            "step" => Trajectory::step(),
            "hover" => Trajectory::hover(),
            other => {
                return Err(Error::Parse {
                    line: self.line("trajectory"),
                    message: format!("unknown trajectory `{other}` (expected circle, square, step or hover)"),
                })
            }
        };
        let mut initial: [Option<f64>; 12] = [None; 12];
        let mut attitude_step = AttitudeCommand::default();
        let mut any_attitude_step = false;

        for (key, (line, value)) in &self.entries {
            let line = *line;
            let num = || parse_value::<f64>(value, key, line);
            let (head, tail) = key.split_once('.').unwrap_or((key.as_str(), ""));
            match (head, tail) {
                ("trajectory", "") => {}
                (kind_key, param) if TRAJECTORY_KINDS.contains(&kind_key) => {
                    if kind_key != kind {
                        return Err(Error::Parse {
                            line,
                            message: format!("`{key}` does not apply to trajectory `{kind}`"),
                        });
                    }
                    set_trajectory_param(&mut cfg.trajectory, param, num()?).map_err(|m| Error::Parse { line, message: m })?;
                }
                ("duration", "") => cfg.duration = num()?,
                ("dt", "") => cfg.dt = num()?,
                ("decimation", "") => cfg.decimation = parse_value(value, key, line)?,
                ("controller", "") => cfg.controller = value.parse().map_err(|m| Error::Parse { line, message: m })?,
                ("decoupling", "") => cfg.decoupling = parse_flag(value, key, line)?,
                ("ideal_attitude", "") => cfg.ideal_attitude = parse_flag(value, key, line)?,
                ("output", "") => cfg.output = Some(value.clone()),
                ("seed", "") => cfg.seed = Some(parse_value(value, key, line)?),
                ("attitude_step", axis) => {
                    any_attitude_step = true;
                    match axis {
                        "phi" => attitude_step.phi = num()?,
                        "theta" => attitude_step.theta = num()?,
                        "psi" => attitude_step.psi = num()?,
                        _ => return Err(unknown(key, line)),
                    }
                }
                ("initial", name) => {
                    let idx = STATE_KEYS.iter().position(|k| *k == name).ok_or_else(|| unknown(key, line))?;
                    initial[idx] = Some(num()?);
                }
                ("params", name) => {
                    let p = &mut cfg.params;
                    let slot = match name {
                        "mass" => &mut p.mass,
                        "jxx" => &mut p.jxx,
                        "jyy" => &mut p.jyy,
                        "jzz" => &mut p.jzz,
                        "arm" => &mut p.arm,
                        "yaw_coeff" => &mut p.yaw_coeff,
                        "thrust_gain" => &mut p.thrust_gain,
                        "bandwidth" => &mut p.bandwidth,
                        "gravity" => &mut p.gravity,
                        _ => return Err(unknown(key, line)),
                    };
                    *slot = num()?;
                }
                ("gains", rest) => {
                    let (axis, field) = rest.split_once('.').ok_or_else(|| unknown(key, line))?;
                    match axis {
                        "x" | "y" | "z" => {
                            let poles = match axis {
                                "x" => &mut cfg.gains.x,
                                "y" => &mut cfg.gains.y,
                                _ => &mut cfg.gains.z,
                            };
                            match field {
                                "pole1" => poles.p1 = num()?,
                                "pole2" => poles.p2 = num()?,
                                _ => return Err(unknown(key, line)),
                            }
                        }
                        "roll" | "pitch" | "yaw" => {
                            let g: &mut PidGains = match axis {
                                "roll" => &mut cfg.gains.attitude.roll,
                                "pitch" => &mut cfg.gains.attitude.pitch,
                                _ => &mut cfg.gains.attitude.yaw,
                            };
                            let slot = match field {
                                "kp" => &mut g.kp,
                                "ki" => &mut g.ki,
                                "kd" => &mut g.kd,
                                "i_max" => &mut g.i_max,
                                "a_max" => &mut g.a_max,
                                _ => return Err(unknown(key, line)),
                            };
                            *slot = num()?;
                        }
                        _ => return Err(unknown(key, line)),
                    }
                }
                ("limits", name) => {
                    let l = &mut cfg.limits;
                    let slot = match name {
                        "tilt" => &mut l.tilt,
                        "accel" => &mut l.accel,
                        "min_thrust" => &mut l.min_thrust,
                        "eps" => &mut l.eps,
                        _ => return Err(unknown(key, line)),
                    };
                    *slot = num()?;
                }
                _ => return Err(unknown(key, line)),
            }
        }
        if initial.iter().any(Option::is_some) {
            // unspecified fields default to the trajectory start, at rest
            let mut base = cfg.initial_state().to_array();
            for (slot, v) in base.iter_mut().zip(initial) {
                if let Some(v) = v {
                    *slot = v;
                }
            }
            cfg.initial = Some(QuadState::from_array(&base));
        }
        if any_attitude_step {
            cfg.attitude_step = Some(attitude_step);
        }
        Ok(cfg)
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map(|(l, _)| *l).unwrap_or(0)
    }
}

fn set_trajectory_param(t: &mut Trajectory, param: &str, v: f64) -> std::result::Result<(), String> {
    let slot = match (t, param) {
        (Trajectory::Circle { radius, .. }, "radius") => radius,
        (Trajectory::Circle { omega, .. }, "omega") => omega,
        (Trajectory::Circle { altitude, .. }, "altitude") => altitude,
        (Trajectory::Square { side, .. }, "side") => side,
        (Trajectory::Square { speed, .. }, "speed") => speed,
        (Trajectory::Square { dwell, .. }, "dwell") => dwell,
        (Trajectory::Square { altitude, .. }, "altitude") => altitude,
        (Trajectory::Step { x, .. }, "x") => x,
        (Trajectory::Step { y, .. }, "y") => y,
        (Trajectory::Step { z, .. }, "z") => z,
        (Trajectory::Hover { altitude }, "altitude") => altitude,
        (t, p) => return Err(format!("unknown {} parameter `{p}`", t.kind())),
    };
    *slot = v;
    Ok(())
}

fn unknown(key: &str, line: usize) -> Error {
    Error::Parse { line, message: format!("unknown key `{key}`") }
}

fn parse_value<T: FromStr>(value: &str, key: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("cannot parse `{value}` for `{key}`") })
}

fn parse_flag(value: &str, key: &str, line: usize) -> Result<bool> {
    match value {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse { line, message: format!("`{key}` expects on/off, got `{value}`") }),
    }
}
