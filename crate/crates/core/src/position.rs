//! Outer-loop position control.
//!
//! A linear PD law produces a commanded translational acceleration per axis.
//! The nonlinear part inverts the thrust projection of the translational
//! dynamics: for a desired `ẍ` it solves for the pitch that realises it at
//! the current roll, yaw and thrust, and likewise roll from `ÿ`. Altitude is
//! feedback-linearised through the collective thrust.

use crate::dynamics::{QuadParams, QuadState};
use crate::error::{Error, Result};
use crate::metrics::{step_metrics, StepMetrics};
use crate::trajectory::TrajectorySample;

/// Positive magnitudes of two real closed-loop poles (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolePair {
    pub p1: f64,
    pub p2: f64,
}

impl PolePair {
    pub fn new(p1: f64, p2: f64) -> Self {
        Self { p1, p2 }
    }
}

impl Default for PolePair {
    fn default() -> Self {
        Self { p1: 0.7, p2: 4.3 }
    }
}

/// `Kp(τd·s + 1)` on the position error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdGains {
    pub kp: f64,
    pub tau_d: f64,
}

impl PdGains {
    pub fn kd(&self) -> f64 {
        self.kp * self.tau_d
    }
}

/// Places the closed-loop poles of `Kp(τd s+1)/(s² + Kp τd s + Kp)`:
/// `Kp = p1·p2`, `Kd = p1 + p2`, `τd = Kd/Kp`.
pub fn synthesize_pd_gains(poles: PolePair) -> Result<PdGains> {
    let PolePair { p1, p2 } = poles;
    if !(p1.is_finite() && p2.is_finite() && p1 > 0.0 && p2 > 0.0) {
        return Err(Error::invalid(format!("poles must be positive and finite, got ({p1}, {p2})")));
    }
    let kp = p1 * p2;
    Ok(PdGains { kp, tau_d: (p1 + p2) / kp })
}

/// Command limits shared by the outer loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommandLimits {
    /// Bound on commanded roll and pitch (rad).
    pub tilt: f64,
    /// Bound on commanded horizontal acceleration (m/s²).
    pub accel: f64,
    /// Thrust below which attitude inversion is refused (N).
    pub min_thrust: f64,
    /// Guard on near-singular projections.
    pub eps: f64,
}

impl Default for CommandLimits {
    fn default() -> Self {
        Self { tilt: 0.5, accel: 5.0, min_thrust: 1.0, eps: 1e-3 }
    }
}

impl CommandLimits {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tilt > 0.0
            && self.tilt < std::f64::consts::FRAC_PI_2
            && self.accel > 0.0
            && self.min_thrust >= 0.0
            && self.eps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("limits out of range: {self:?}")))
        }
    }
}

/// A command value and whether a limit shaped it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limited {
    pub value: f64,
    pub saturated: bool,
}

impl Limited {
    fn clamp(raw: f64, lo: f64, hi: f64) -> Self {
        let value = raw.clamp(lo, hi);
        Self { value, saturated: value != raw }
    }

    fn or(self, other: bool) -> Self {
        Self { saturated: self.saturated || other, ..self }
    }
}

/// `u = Kp(x_r − x) + Kp·τd(ẋ_r − ẋ)`, clamped to `±u_max`.
pub fn pd_virtual_accel(pos: f64, vel: f64, ref_pos: f64, ref_vel: f64, gains: &PdGains, u_max: f64) -> Limited {
    let raw = gains.kp * (ref_pos - pos) + gains.kd() * (ref_vel - vel);
    Limited::clamp(raw, -u_max, u_max)
}

fn check_thrust(u1: f64, limits: &CommandLimits) -> Result<()> {
    if u1 <= limits.min_thrust {
        return Err(Error::ThrustTooLow { thrust: u1, min: limits.min_thrust });
    }
    Ok(())
}

/// Pitch command realising `ẍ = u_x`:
/// `sin θ = (u_x·m/U1 − sin φ sin ψ)/(cos φ cos ψ)`.
pub fn invert_pitch(u_x: f64, state: &QuadState, u1: f64, params: &QuadParams, limits: &CommandLimits) -> Result<Limited> {
    check_thrust(u1, limits)?;
    let denom = state.phi.cos() * state.psi.cos();
    if denom.abs() <= limits.eps {
        return Err(Error::NearSingularAttitude { value: denom.abs() });
    }
    let arg = (u_x * params.mass / u1 - state.phi.sin() * state.psi.sin()) / denom;
    let s = Limited::clamp(arg, -1.0, 1.0);
    Ok(Limited::clamp(s.value.asin(), -limits.tilt, limits.tilt).or(s.saturated))
}

/// Roll command realising `ÿ = u_y`.
///
/// `ÿ = −A sin φ + B cos φ` with `A = cos ψ·U1/m`, `B = sin θ sin ψ·U1/m`,
/// i.e. `R sin(γ − φ) = u_y` with `R = √(A²+B²)`, `γ = atan2(B, A)`. Of the
/// two solutions the one closest to level is returned.
pub fn invert_roll(u_y: f64, state: &QuadState, u1: f64, params: &QuadParams, limits: &CommandLimits) -> Result<Limited> {
    check_thrust(u1, limits)?;
    let scale = u1 / params.mass;
    let a = state.psi.cos() * scale;
    let b = state.theta.sin() * state.psi.sin() * scale;
    let amplitude = a.hypot(b);
    if amplitude <= limits.eps {
        return Err(Error::DegenerateProjection { amplitude });
    }
    let s = Limited::clamp(u_y / amplitude, -1.0, 1.0);
    let gamma = b.atan2(a);
    let near = crate::attitude::wrap_angle(gamma - s.value.asin());
    let far = crate::attitude::wrap_angle(gamma - (std::f64::consts::PI - s.value.asin()));
    let phi = if near.abs() <= far.abs() { near } else { far };
    Ok(Limited::clamp(phi, -limits.tilt, limits.tilt).or(s.saturated))
}

/// Collective thrust `U1 = m(g + u_z)/(cos φ cos θ)` with
/// `u_z = Kp(z_r − z) + Kd(ż_r − ż)`, clamped to `[0, 4K]`.
pub fn altitude_thrust(
    state: &QuadState,
    reference: &TrajectorySample,
    gains: &PdGains,
    params: &QuadParams,
    limits: &CommandLimits,
) -> Result<Limited> {
    let tilt = state.phi.cos() * state.theta.cos();
    if tilt.abs() <= limits.eps {
        return Err(Error::NearSingularAttitude { value: tilt.abs() });
    }
    let u_z = gains.kp * (reference.z - state.z) + gains.kd() * (reference.vz - state.vz);
    let raw = params.mass * (params.gravity + u_z) / tilt;
    Ok(Limited::clamp(raw, 0.0, 4.0 * params.thrust_gain))
}

/// Small-angle attitude commands for a plain linear PD baseline:
/// `θ ≈ (u_x cos ψ + u_y sin ψ)/g`, `φ ≈ (u_x sin ψ − u_y cos ψ)/g`.
pub fn small_angle_commands(u_x: f64, u_y: f64, psi: f64, params: &QuadParams, limits: &CommandLimits) -> (Limited, Limited) {
    let (s, c) = psi.sin_cos();
    let g = params.gravity;
    let theta = (u_x * c + u_y * s) / g;
    let phi = (u_x * s - u_y * c) / g;
    (
        Limited::clamp(phi, -limits.tilt, limits.tilt),
        Limited::clamp(theta, -limits.tilt, limits.tilt),
    )
}

/// Unit-step response of the linear loop `(Kd s + Kp)/((s+p1)(s+p2))`.
pub fn linear_step_response(poles: PolePair, t: f64) -> f64 {
    let PolePair { p1, p2 } = poles;
    let (kp, kd) = (p1 * p2, p1 + p2);
    if (p1 - p2).abs() <= 1e-9 * p1.max(p2) {
        let p = 0.5 * (p1 + p2);
        return 1.0 - (-p * t).exp() + p * t * (-p * t).exp();
    }
    let a = (kp - kd * p1) / (-p1 * (p2 - p1));
    let b = (kp - kd * p2) / (-p2 * (p1 - p2));
    1.0 + a * (-p1 * t).exp() + b * (-p2 * t).exp()
}

/// Step metrics predicted for the linear loop, sampled finely enough for
/// the report to be accurate to a millisecond.
pub fn predict_step_metrics(poles: PolePair) -> Result<StepMetrics> {
    synthesize_pd_gains(poles)?;
    let slow = poles.p1.min(poles.p2);
    let horizon = 30.0 / slow;
    let dt = (horizon / 200_000.0).min(1e-4);
    let n = (horizon / dt).ceil() as usize;
    let trace: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let t = i as f64 * dt;
            (t, linear_step_response(poles, t))
        })
        .collect();
    step_metrics(&trace, 1.0)
}
