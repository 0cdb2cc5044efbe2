//! Cancellation of the gyroscopic cross-terms of the rotational dynamics.
//!
//! With `U2 = (U2* − k1·q·r)/k2` (and likewise for pitch and yaw) each axis
//! becomes the double integrator `φ̈ = U2*`, `θ̈ = U3*`, `ψ̈ = U4*`.

use crate::dynamics::QuadParams;

/// Inertia ratios `k1, k3, k5` and input gains `k2, k4, k6`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    pub k6: f64,
}

/// Desired angular accelerations per axis (rad/s²).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VirtualTorques {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl VirtualTorques {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { roll, pitch, yaw }
    }
}

/// `U4` already carries the mixer's moment arm `d`, so the yaw input gain is
/// `1/Jzz` rather than `l/Jzz`.
pub fn coupling_constants(params: &QuadParams) -> CouplingConstants {
    let QuadParams { jxx, jyy, jzz, arm, .. } = *params;
    CouplingConstants {
        k1: (jyy - jzz) / jxx,
        k2: arm / jxx,
        k3: (jzz - jxx) / jyy,
        k4: arm / jyy,
        k5: (jxx - jyy) / jzz,
        k6: 1.0 / jzz,
    }
}

/// Torque inputs `(U2, U3, U4)` that realise the virtual accelerations at
/// body rates `(p, q, r)`.
pub fn decouple(virt: &VirtualTorques, rates: [f64; 3], k: &CouplingConstants) -> [f64; 3] {
    let [p, q, r] = rates;
    [
        (virt.roll - k.k1 * q * r) / k.k2,
        (virt.pitch - k.k3 * p * r) / k.k4,
        (virt.yaw - k.k5 * p * q) / k.k6,
    ]
}

/// Input scaling only, without cross-term cancellation. Used when
/// decoupling is switched off.
pub fn pass_through(virt: &VirtualTorques, k: &CouplingConstants) -> [f64; 3] {
    [virt.roll / k.k2, virt.pitch / k.k4, virt.yaw / k.k6]
}
