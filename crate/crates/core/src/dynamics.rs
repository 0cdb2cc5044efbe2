//! Rigid-body model of the quadrotor: parameters, state, motor mixing,
//! first-order actuator lag and the translational/rotational equations of
//! motion.
//!
//! Frames follow the usual convention: the earth frame has `z` pointing up,
//! so hover requires `U1 = m·g`. Euler angle rates are identified with the
//! body rates (`φ̇ = p`, `θ̇ = q`, `ψ̇ = r`).

use crate::decoupling::coupling_constants;
use crate::error::{Error, Result};

/// Physical constants of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadParams {
    /// Mass (kg).
    pub mass: f64,
    /// Inertia about the body x axis (kg·m²).
    pub jxx: f64,
    /// Inertia about the body y axis (kg·m²).
    pub jyy: f64,
    /// Inertia about the body z axis (kg·m²).
    pub jzz: f64,
    /// Lever arm between a rotor and the centre of mass (m).
    pub arm: f64,
    /// Thrust-to-yaw-moment coefficient `d` of the mixer (m).
    pub yaw_coeff: f64,
    /// Full-scale thrust of a single rotor (N).
    pub thrust_gain: f64,
    /// Bandwidth of the first-order rotor lag (rad/s).
    pub bandwidth: f64,
    /// Gravitational acceleration (m/s²).
    pub gravity: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        Self {
            mass: 3.499,
            jxx: 0.03,
            jyy: 0.03,
            jzz: 0.04,
            arm: 0.2,
            yaw_coeff: 0.05,
            thrust_gain: 120.0,
            bandwidth: 15.0,
            gravity: 9.81,
        }
    }
}

impl QuadParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("jxx", self.jxx),
            ("jyy", self.jyy),
            ("jzz", self.jzz),
            ("arm", self.arm),
            ("thrust_gain", self.thrust_gain),
            ("bandwidth", self.bandwidth),
            ("gravity", self.gravity),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Validation(format!("params.{name} must be positive, got {value}")));
            }
        }
        if !self.yaw_coeff.is_finite() || self.yaw_coeff == 0.0 {
            return Err(Error::Validation(format!(
                "params.yaw_coeff must be finite and nonzero, got {}",
                self.yaw_coeff
            )));
        }
        Ok(())
    }

    /// Collective thrust that balances gravity.
    pub fn hover_thrust(&self) -> f64 {
        self.mass * self.gravity
    }
}

/// Twelve-dimensional rigid-body state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QuadState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    /// Roll (rad).
    pub phi: f64,
    /// Pitch (rad).
    pub theta: f64,
    /// Yaw (rad).
    pub psi: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl QuadState {
    pub const DIM: usize = 12;

    pub fn at_position(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z, ..Self::default() }
    }

    pub fn to_array(&self) -> [f64; 12] {
        [
            self.x, self.y, self.z, self.vx, self.vy, self.vz, self.phi, self.theta, self.psi, self.p,
            self.q, self.r,
        ]
    }

    pub fn from_array(a: &[f64; 12]) -> Self {
        Self {
            x: a[0],
            y: a[1],
            z: a[2],
            vx: a[3],
            vy: a[4],
            vz: a[5],
            phi: a[6],
            theta: a[7],
            psi: a[8],
            p: a[9],
            q: a[10],
            r: a[11],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// True while roll and pitch stay inside the region where the thrust
    /// projection is invertible. Reported, never enforced.
    pub fn tilt_ok(&self) -> bool {
        self.phi.abs() < std::f64::consts::FRAC_PI_2 && self.theta.abs() < std::f64::consts::FRAC_PI_2
    }
}

/// Individual rotor thrusts (N).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MotorForces(pub [f64; 4]);

impl MotorForces {
    pub fn uniform(f: f64) -> Self {
        Self([f; 4])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Clamps every rotor to `[0, K]`. Returns the clamped forces and whether
    /// any rotor was limited.
    pub fn saturate(&self, params: &QuadParams) -> (MotorForces, bool) {
        let mut out = self.0;
        let mut hit = false;
        for f in out.iter_mut() {
            let c = f.clamp(0.0, params.thrust_gain);
            hit |= c != *f;
            *f = c;
        }
        (MotorForces(out), hit)
    }
}

/// Collective thrust `U1` (N), differential forces `U2`, `U3` (N) and yaw
/// torque `U4` (N·m).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ControlVector {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub u4: f64,
}

impl ControlVector {
    pub fn new(u1: f64, u2: f64, u3: f64, u4: f64) -> Self {
        Self { u1, u2, u3, u4 }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.u1, self.u2, self.u3, self.u4]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Maps rotor thrusts to the control vector:
/// `U1 = F1+F2+F3+F4`, `U2 = F2−F4`, `U3 = F1−F3`, `U4 = d(F1+F3−F2−F4)`.
pub fn mixer(forces: &MotorForces, params: &QuadParams) -> Result<ControlVector> {
    if !forces.is_finite() {
        return Err(Error::invalid(format!("non-finite motor forces {:?}", forces.0)));
    }
    let [f1, f2, f3, f4] = forces.0;
    Ok(ControlVector {
        u1: f1 + f2 + f3 + f4,
        u2: f2 - f4,
        u3: f1 - f3,
        u4: params.yaw_coeff * (f1 + f3 - f2 - f4),
    })
}

/// Exact inverse of [`mixer`]. Forces are not clamped here.
pub fn inverse_mixer(u: &ControlVector, params: &QuadParams) -> Result<MotorForces> {
    if params.yaw_coeff == 0.0 {
        return Err(Error::SingularMixer);
    }
    if !u.is_finite() {
        return Err(Error::invalid(format!("non-finite control vector {u:?}")));
    }
    // F1+F3 and F2+F4 follow from U1 and U4; the differences from U3 and U2.
    let yaw_split = u.u4 / params.yaw_coeff;
    let odd = 0.5 * (u.u1 + yaw_split);
    let even = 0.5 * (u.u1 - yaw_split);
    Ok(MotorForces([
        0.5 * (odd + u.u3),
        0.5 * (even + u.u2),
        0.5 * (odd - u.u3),
        0.5 * (even - u.u2),
    ]))
}

/// Rotor force derivative `ω(F_cmd − F)` with the command saturated to
/// `[0, K]` first.
pub fn actuator_step(actual: &MotorForces, command: &MotorForces, params: &QuadParams) -> [f64; 4] {
    let (cmd, _) = command.saturate(params);
    std::array::from_fn(|i| params.bandwidth * (cmd.0[i] - actual.0[i]))
}

/// Linear acceleration `(ẍ, ÿ, z̈)` produced by collective thrust `u1` at
/// the state's attitude.
pub fn translational_accel(state: &QuadState, u1: f64, params: &QuadParams) -> [f64; 3] {
    let (sphi, cphi) = state.phi.sin_cos();
    let (sth, cth) = state.theta.sin_cos();
    let (spsi, cpsi) = state.psi.sin_cos();
    let a = u1 / params.mass;
    [
        (sphi * spsi + cphi * sth * cpsi) * a,
        (-sphi * cpsi + cphi * sth * spsi) * a,
        a * cphi * cth - params.gravity,
    ]
}

/// Angular acceleration `(φ̈, θ̈, ψ̈)` in coupling-constant form:
/// `φ̈ = k1·q·r + k2·U2`, `θ̈ = k3·p·r + k4·U3`, `ψ̈ = k5·p·q + k6·U4`.
pub fn rotational_accel(state: &QuadState, u: &ControlVector, params: &QuadParams) -> [f64; 3] {
    let k = coupling_constants(params);
    let (p, q, r) = (state.p, state.q, state.r);
    [
        k.k1 * q * r + k.k2 * u.u2,
        k.k3 * p * r + k.k4 * u.u3,
        k.k5 * p * q + k.k6 * u.u4,
    ]
}

/// Time derivative of the rigid-body state under the given rotor thrusts.
pub fn state_derivative(state: &QuadState, forces: &MotorForces, params: &QuadParams) -> Result<QuadState> {
    if !state.is_finite() {
        return Err(Error::invalid(format!("non-finite state {state:?}")));
    }
    let u = mixer(forces, params)?;
    let [ax, ay, az] = translational_accel(state, u.u1, params);
    let [pd, qd, rd] = rotational_accel(state, &u, params);
    Ok(QuadState {
        x: state.vx,
        y: state.vy,
        z: state.vz,
        vx: ax,
        vy: ay,
        vz: az,
        phi: state.p,
        theta: state.q,
        psi: state.r,
        p: pd,
        q: qd,
        r: rd,
    })
}
