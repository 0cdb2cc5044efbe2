//! Closed-loop engine.
//!
//! Every control instant runs the cascade
//! trajectory → altitude thrust → position PD → attitude inversion →
//! attitude PID → decoupling → inverse mixer → rotor saturation, then holds
//! the rotor commands while RK4 advances the 16-dimensional plant (rigid body
//! plus rotor lag states) by one step.

use crate::attitude::{attitude_loop, AttitudeCommand, AttitudeLoopState};
use crate::config::{Controller, ScenarioConfig};
use crate::decoupling::{coupling_constants, decouple, pass_through, VirtualTorques};
use crate::dynamics::{actuator_step, inverse_mixer, state_derivative, ControlVector, MotorForces, QuadState};
use crate::error::Error;
use crate::integrator::rk4_step;
use crate::position::{
    altitude_thrust, invert_pitch, invert_roll, pd_virtual_accel, small_angle_commands, synthesize_pd_gains, Limited,
    PdGains,
};
use crate::trajectory::TrajectorySample;

/// One logged instant. `control` and `virtual_torques` are the commands
/// computed at `t`; `forces` are the rotor thrusts acting at `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRow {
    pub t: f64,
    pub state: QuadState,
    pub reference: TrajectorySample,
    pub control: ControlVector,
    pub virtual_torques: VirtualTorques,
    pub forces: MotorForces,
    /// Some limit shaped the commands at this instant.
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub dt: f64,
    pub rows: Vec<SimRow>,
}

impl SimLog {
    pub fn last(&self) -> Option<&SimRow> {
        self.rows.last()
    }

    pub fn duration(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.t)
    }

    /// `(t, f(row))` pairs, for the step metrics.
    pub fn series(&self, f: impl Fn(&SimRow) -> f64) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.t, f(r))).collect()
    }
}

/// A run that stopped early. `log` holds every row recorded before the
/// failure.
#[derive(Debug, Clone, PartialEq)]
pub struct SimFailure {
    pub error: Error,
    pub log: SimLog,
}

impl std::fmt::Display for SimFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({} rows recorded)", self.error, self.log.rows.len())
    }
}

impl std::error::Error for SimFailure {}

#[derive(Debug, Clone, Copy)]
struct Command {
    reference: TrajectorySample,
    control: ControlVector,
    virtual_torques: VirtualTorques,
    attitude: AttitudeCommand,
    forces: MotorForces,
    saturated: bool,
}

struct Engine {
    cfg: ScenarioConfig,
    pd_x: PdGains,
    pd_y: PdGains,
    pd_z: PdGains,
    attitude_memory: AttitudeLoopState,
}

impl Engine {
    fn new(cfg: &ScenarioConfig) -> Result<Self, Error> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.resolved(),
            pd_x: synthesize_pd_gains(cfg.gains.x)?,
            pd_y: synthesize_pd_gains(cfg.gains.y)?,
            pd_z: synthesize_pd_gains(cfg.gains.z)?,
            attitude_memory: AttitudeLoopState::default(),
        })
    }

    fn attitude_command(&self, state: &QuadState, reference: &TrajectorySample, u1: f64) -> (AttitudeCommand, bool) {
        let cfg = &self.cfg;
        if let Some(cmd) = cfg.attitude_step {
            return (cmd, false);
        }
        let u_max = cfg.limits.accel;
        let ux = pd_virtual_accel(state.x, state.vx, reference.x, reference.vx, &self.pd_x, u_max);
        let uy = pd_virtual_accel(state.y, state.vy, reference.y, reference.vy, &self.pd_y, u_max);
        let (phi, theta) = match cfg.controller {
            Controller::Nlpd => {
                let level = Limited { value: 0.0, saturated: true };
                let theta = invert_pitch(ux.value, state, u1, &cfg.params, &cfg.limits).unwrap_or(level);
                let phi = invert_roll(uy.value, state, u1, &cfg.params, &cfg.limits).unwrap_or(level);
                (phi, theta)
            }
            Controller::Linpd => small_angle_commands(ux.value, uy.value, state.psi, &cfg.params, &cfg.limits),
        };
        let saturated = ux.saturated || uy.saturated || phi.saturated || theta.saturated;
        (AttitudeCommand { phi: phi.value, theta: theta.value, psi: reference.psi }, saturated)
    }

    fn command(&mut self, t: f64, state: &QuadState, control_dt: f64) -> Result<Command, Error> {
        let cfg = &self.cfg;
        let params = &cfg.params;
        let reference = cfg.trajectory.sample(t);
        let thrust = altitude_thrust(state, &reference, &self.pd_z, params, &cfg.limits)
            .unwrap_or(Limited { value: params.hover_thrust(), saturated: true });
        let (attitude, mut saturated) = self.attitude_command(state, &reference, thrust.value);
        saturated |= thrust.saturated;

        let (virtual_torques, torques) = if cfg.ideal_attitude {
            (VirtualTorques::default(), [0.0; 3])
        } else {
            let (virt, sat, memory) =
                attitude_loop(state, &attitude, &cfg.gains.attitude, self.attitude_memory, control_dt);
            self.attitude_memory = memory;
            saturated |= sat;
            let k = coupling_constants(params);
            let torques = if cfg.decoupling {
                decouple(&virt, [state.p, state.q, state.r], &k)
            } else {
                pass_through(&virt, &k)
            };
            (virt, torques)
        };
        let control = ControlVector::new(thrust.value, torques[0], torques[1], torques[2]);
        let (forces, motor_sat) = inverse_mixer(&control, params)?.saturate(params);
        Ok(Command { reference, control, virtual_torques, attitude, forces, saturated: saturated || motor_sat })
    }
}

const PLANT_DIM: usize = 16;

fn pack(state: &QuadState, forces: &MotorForces) -> [f64; PLANT_DIM] {
    let mut y = [0.0; PLANT_DIM];
    y[..12].copy_from_slice(&state.to_array());
    y[12..].copy_from_slice(&forces.0);
    y
}

fn unpack(y: &[f64; PLANT_DIM]) -> (QuadState, MotorForces) {
    let mut s = [0.0; 12];
    s.copy_from_slice(&y[..12]);
    let mut f = [0.0; 4];
    f.copy_from_slice(&y[12..]);
    (QuadState::from_array(&s), MotorForces(f))
}

/// Runs a scenario to completion.
///
/// Invalid configurations fail with an empty log. A non-finite plant state
/// stops the run with [`Error::Diverged`] and the rows recorded so far.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimLog, SimFailure> {
    let mut engine = Engine::new(cfg).map_err(|error| SimFailure { error, log: SimLog { dt: cfg.dt, rows: Vec::new() } })?;
    let cfg = engine.cfg.clone();
    let params = cfg.params;
    let dt = cfg.dt;
    let steps = cfg.steps();
    let decimation = cfg.decimation as usize;
    let control_dt = dt * decimation as f64;

    let mut log = SimLog { dt, rows: Vec::with_capacity(steps + 1) };
    let mut state = cfg.initial_state();
    // rotors start at the hover thrust
    let mut forces = MotorForces::uniform(params.hover_thrust() / 4.0);

    if cfg.ideal_attitude && cfg.attitude_step.is_none() {
        // A reference jump puts a Dirac impulse `Kd·Δ` into the PD law. With
        // attitude achieved instantly the translational plant is a pure
        // double integrator, so the impulse integrates to a velocity jump.
        let [jx, jy, jz] = cfg.trajectory.initial_jump();
        state.vx += engine.pd_x.kd() * jx;
        state.vy += engine.pd_y.kd() * jy;
        state.vz += engine.pd_z.kd() * jz;
    }

    let mut cmd: Option<Command> = None;
    for i in 0..=steps {
        let t = i as f64 * dt;
        if i % decimation == 0 || cmd.is_none() {
            match engine.command(t, &state, control_dt) {
                Ok(c) => cmd = Some(c),
                Err(error) => return Err(SimFailure { error, log }),
            }
        }
        let c = cmd.expect("command computed above");
        if cfg.ideal_attitude {
            state.phi = c.attitude.phi;
            state.theta = c.attitude.theta;
            state.psi = c.attitude.psi;
            state.p = 0.0;
            state.q = 0.0;
            state.r = 0.0;
        }
        log.rows.push(SimRow {
            t,
            state,
            reference: c.reference,
            control: c.control,
            virtual_torques: c.virtual_torques,
            forces,
            saturated: c.saturated,
        });
        if i == steps {
            break;
        }

        let frozen_attitude = cfg.ideal_attitude;
        let y = pack(&state, &forces);
        let next = rk4_step(&y, t, dt, |_, y| {
            let (s, f) = unpack(y);
            let mut d = state_derivative(&s, &f, &params)?.to_array();
            if frozen_attitude {
                d[6..].fill(0.0);
            }
            let mut out = [0.0; PLANT_DIM];
            out[..12].copy_from_slice(&d);
            out[12..].copy_from_slice(&actuator_step(&f, &c.forces, &params));
            Ok(out)
        });
        match next {
            Ok(y) => (state, forces) = unpack(&y),
            Err(error) => return Err(SimFailure { error, log }),
        }
    }
    Ok(log)
}
