//! Reference trajectories: circle, square, step and hover.

use crate::error::{Error, Result};

/// Reference position, velocity and yaw at time `t`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trajectory {
    /// `(R cos Ωt, R sin Ωt, altitude)`.
    Circle { radius: f64, omega: f64, altitude: f64 },
    /// Square of the given side centred on the origin, flown at constant
    /// speed with a dwell at every corner.
    Square { side: f64, speed: f64, dwell: f64, altitude: f64 },
    /// Setpoint held from `t = 0`; the vehicle starts at the origin.
    Step { x: f64, y: f64, z: f64 },
    /// Hold `(0, 0, altitude)`.
    Hover { altitude: f64 },
}

impl Trajectory {
    pub fn circle() -> Self {
        Trajectory::Circle { radius: 1.0, omega: 0.2, altitude: 1.0 }
    }

    pub fn square() -> Self {
        Trajectory::Square { side: 2.0, speed: 0.5, dwell: 1.0, altitude: 1.0 }
    }

    pub fn step() -> Self {
        Trajectory::Step { x: 1.0, y: 0.0, z: 0.0 }
    }

    pub fn hover() -> Self {
        Trajectory::Hover { altitude: 0.0 }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Trajectory::Circle { .. } => "circle",
            Trajectory::Square { .. } => "square",
            Trajectory::Step { .. } => "step",
            Trajectory::Hover { .. } => "hover",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive: &[(&str, f64)] = match self {
            Trajectory::Circle { radius, omega, .. } => &[("circle.radius", *radius), ("circle.omega", *omega)],
            Trajectory::Square { side, speed, .. } => &[("square.side", *side), ("square.speed", *speed)],
            _ => &[],
        };
        for (name, v) in positive {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        let finite: Vec<(&str, f64)> = match *self {
            Trajectory::Circle { altitude, .. } => vec![("circle.altitude", altitude)],
            Trajectory::Square { dwell, altitude, .. } => {
                if !(dwell >= 0.0) {
                    return Err(Error::Validation(format!("square.dwell must be non-negative, got {dwell}")));
                }
                vec![("square.altitude", altitude), ("square.dwell", dwell)]
            }
            Trajectory::Step { x, y, z } => vec![("step.x", x), ("step.y", y), ("step.z", z)],
            Trajectory::Hover { altitude } => vec![("hover.altitude", altitude)],
        };
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Square corners in visiting order.
    pub fn square_corners(side: f64) -> [[f64; 2]; 4] {
        let h = 0.5 * side;
        [[h, -h], [h, h], [-h, h], [-h, -h]]
    }

    /// Where the vehicle starts by default: the reference just before
    /// `t = 0`. Equal to `sample(0)` except for a step.
    pub fn start_position(&self) -> [f64; 3] {
        match *self {
            Trajectory::Step { .. } => [0.0, 0.0, 0.0],
            _ => {
                let s = self.sample(0.0);
                [s.x, s.y, s.z]
            }
        }
    }

    /// Position discontinuity of the reference at `t = 0`.
    pub fn initial_jump(&self) -> [f64; 3] {
        match *self {
            Trajectory::Step { x, y, z } => [x, y, z],
            _ => [0.0; 3],
        }
    }

    pub fn sample(&self, t: f64) -> TrajectorySample {
        let mut s = TrajectorySample { t, ..Default::default() };
        match *self {
            Trajectory::Circle { radius, omega, altitude } => {
                let (sin, cos) = (omega * t).sin_cos();
                s.x = radius * cos;
                s.y = radius * sin;
                s.z = altitude;
                s.vx = -radius * omega * sin;
                s.vy = radius * omega * cos;
            }
            Trajectory::Square { side, speed, dwell, altitude } => {
                let corners = Self::square_corners(side);
                let travel = side / speed;
                let leg_time = travel + dwell;
                let tau = t.max(0.0) % (4.0 * leg_time);
                let leg = ((tau / leg_time) as usize).min(3);
                let into = tau - leg as f64 * leg_time;
                let from = corners[leg];
                let to = corners[(leg + 1) % 4];
                if into < travel {
                    let f = into / travel;
                    let dir = [(to[0] - from[0]) / side, (to[1] - from[1]) / side];
                    s.x = from[0] + (to[0] - from[0]) * f;
                    s.y = from[1] + (to[1] - from[1]) * f;
                    s.vx = dir[0] * speed;
                    s.vy = dir[1] * speed;
                } else {
                    s.x = to[0];
                    s.y = to[1];
                }
                s.z = altitude;
            }
            Trajectory::Step { x, y, z } => {
                s.x = x;
                s.y = y;
                s.z = z;
            }
            Trajectory::Hover { altitude } => {
                s.z = altitude;
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_start_and_quarter() {
        let c = Trajectory::Circle { radius: 1.0, omega: 0.2, altitude: 2.0 };
        let s = c.sample(0.0);
        assert_eq!((s.x, s.y, s.z), (1.0, 0.0, 2.0));
        assert_eq!((s.vx, s.vy, s.vz), (-0.0, 0.2, 0.0));
        let s = c.sample(std::f64::consts::FRAC_PI_2 / 0.2);
        assert!(s.x.abs() < 1e-12 && (s.y - 1.0).abs() < 1e-12);
        assert!((7.854 - s.t).abs() < 1e-3);
    }

    #[test]
    fn circle_velocity_is_derivative() {
        let c = Trajectory::circle();
        let h = 1e-6;
        for t in [0.3, 2.0, 17.0] {
            let (a, b, s) = (c.sample(t - h), c.sample(t + h), c.sample(t));
            assert!(((b.x - a.x) / (2.0 * h) - s.vx).abs() < 1e-8);
            assert!(((b.y - a.y) / (2.0 * h) - s.vy).abs() < 1e-8);
        }
    }

    #[test]
    fn square_corner_schedule() {
        let sq = Trajectory::Square { side: 2.0, speed: 0.5, dwell: 1.0, altitude: 1.0 };
        let s = sq.sample(0.0);
        assert_eq!((s.x, s.y), (1.0, -1.0));
        assert_eq!((s.vx, s.vy), (0.0, 0.5));
        let s = sq.sample(4.0);
        assert_eq!((s.x, s.y, s.z), (1.0, 1.0, 1.0));
        assert_eq!((s.vx, s.vy), (0.0, 0.0));
        let s = sq.sample(5.0);
        assert_eq!((s.x, s.y), (1.0, 1.0));
        assert_eq!((s.vx, s.vy), (-0.5, 0.0));
        let s = sq.sample(7.0);
        assert_eq!((s.x, s.y), (0.0, 1.0));
        let s = sq.sample(10.0);
        assert_eq!((s.x, s.y), (-1.0, 1.0));
        let s = sq.sample(15.0);
        assert_eq!((s.x, s.y), (-1.0, -1.0));
        // one full lap is 20 s
        let s = sq.sample(20.0);
        assert_eq!((s.x, s.y), (1.0, -1.0));
    }

    #[test]
    fn square_without_dwell() {
        let sq = Trajectory::Square { side: 2.0, speed: 0.5, dwell: 0.0, altitude: 0.0 };
        let s = sq.sample(4.0);
        assert_eq!((s.x, s.y), (1.0, 1.0));
        assert_eq!((s.vx, s.vy), (-0.5, 0.0));
    }

    #[test]
    fn step_and_hover() {
        let st = Trajectory::Step { x: 0.1, y: 0.0, z: 0.0 };
        assert_eq!(st.start_position(), [0.0; 3]);
        assert_eq!(st.initial_jump(), [0.1, 0.0, 0.0]);
        let s = st.sample(3.0);
        assert_eq!((s.x, s.vx), (0.1, 0.0));

        let h = Trajectory::hover();
        assert_eq!(h.sample(9.0), TrajectorySample { t: 9.0, ..Default::default() });
        assert_eq!(h.initial_jump(), [0.0; 3]);
        assert_eq!(Trajectory::circle().start_position(), [1.0, 0.0, 1.0]);
    }

    #[test]
    fn validation() {
        assert!(Trajectory::Circle { radius: 0.0, omega: 0.2, altitude: 0.0 }.validate().is_err());
        assert!(Trajectory::Square { side: 2.0, speed: -1.0, dwell: 0.0, altitude: 0.0 }.validate().is_err());
        assert!(Trajectory::Square { side: 2.0, speed: 1.0, dwell: -1.0, altitude: 0.0 }.validate().is_err());
        assert!(Trajectory::Step { x: f64::NAN, y: 0.0, z: 0.0 }.validate().is_err());
        for t in [Trajectory::circle(), Trajectory::square(), Trajectory::step(), Trajectory::hover()] {
            assert!(t.validate().is_ok());
        }
    }
}
