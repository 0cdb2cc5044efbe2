//! Inner-loop PID regulation of roll, pitch and yaw.
//!
//! Each axis sees the decoupled double integrator, so the output of a PID is
//! directly the virtual angular acceleration for that axis. The derivative
//! acts on the measured body rate (command rates are taken as zero).

use crate::decoupling::VirtualTorques;
use crate::dynamics::QuadState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Bound on the integral state (rad·s).
    pub i_max: f64,
    /// Bound on the output (rad/s²).
    pub a_max: f64,
}

impl Default for PidGains {
    /// Double pole at −8.6 rad/s on the unit double integrator.
    fn default() -> Self {
        Self { kp: 73.96, ki: 0.0, kd: 17.2, i_max: 1.0, a_max: 100.0 }
    }
}

impl PidGains {
    pub fn validate(&self, axis: &str) -> Result<()> {
        let ok = self.kp > 0.0
            && self.kd >= 0.0
            && self.ki >= 0.0
            && self.i_max > 0.0
            && self.a_max > 0.0
            && [self.kp, self.ki, self.kd, self.i_max, self.a_max].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("gains.{axis}: need kp > 0, ki >= 0, kd >= 0, i_max > 0, a_max > 0 ({self:?})")))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AttitudeGains {
    pub roll: PidGains,
    pub pitch: PidGains,
    pub yaw: PidGains,
}

/// Commanded Euler angles (rad).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AttitudeCommand {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

/// Integral memory of one PID instance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PidState {
    pub integral: f64,
    prev_error: Option<f64>,
}

impl PidState {
    pub fn with_integral(integral: f64) -> Self {
        Self { integral, prev_error: None }
    }
}

/// Output of one PID evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidOutput {
    pub value: f64,
    pub saturated: bool,
}

/// One PID update: `u = Kp·e + Ki·∫e + Kd·ė`, clamped to `±a_max`.
///
/// The integral advances by the trapezoidal rule and is held while the
/// output is saturated; it is always kept within `±i_max`.
pub fn pid_step(error: f64, error_rate: f64, state: PidState, gains: &PidGains, dt: f64) -> (PidOutput, PidState) {
    debug_assert!(dt > 0.0);
    let integral = state.integral.clamp(-gains.i_max, gains.i_max);
    let raw = gains.kp * error + gains.ki * integral + gains.kd * error_rate;
    let value = raw.clamp(-gains.a_max, gains.a_max);
    let saturated = value != raw;

    let next_integral = if saturated {
        integral
    } else {
        let prev = state.prev_error.unwrap_or(error);
        (integral + 0.5 * dt * (prev + error)).clamp(-gains.i_max, gains.i_max)
    };
    (PidOutput { value, saturated }, PidState { integral: next_integral, prev_error: Some(error) })
}

/// Integral memories for the three attitude axes.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AttitudeLoopState {
    pub roll: PidState,
    pub pitch: PidState,
    pub yaw: PidState,
}

/// Runs the three axis PIDs and returns the virtual torques, whether any
/// axis saturated, and the updated integral memory.
pub fn attitude_loop(
    state: &QuadState,
    cmd: &AttitudeCommand,
    gains: &AttitudeGains,
    memory: AttitudeLoopState,
    dt: f64,
) -> (VirtualTorques, bool, AttitudeLoopState) {
    let (roll, roll_mem) = pid_step(cmd.phi - state.phi, -state.p, memory.roll, &gains.roll, dt);
    let (pitch, pitch_mem) = pid_step(cmd.theta - state.theta, -state.q, memory.pitch, &gains.pitch, dt);
    let yaw_err = wrap_angle(cmd.psi - state.psi);
    let (yaw, yaw_mem) = pid_step(yaw_err, -state.r, memory.yaw, &gains.yaw, dt);
    (
        VirtualTorques::new(roll.value, pitch.value, yaw.value),
        roll.saturated || pitch.saturated || yaw.saturated,
        AttitudeLoopState { roll: roll_mem, pitch: pitch_mem, yaw: yaw_mem },
    )
}

/// Wraps to `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}
