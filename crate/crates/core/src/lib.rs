//! Quadrotor flight simulator: rigid-body dynamics with first-order rotor
//! lag, a decoupled attitude loop, an inverse-model position loop and the
//! reporting around it.

pub mod attitude;
pub mod config;
pub mod decoupling;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod metrics;
pub mod position;
pub mod report;
pub mod sim;
pub mod trajectory;

pub use config::{Controller, ScenarioConfig};
pub use dynamics::{ControlVector, MotorForces, QuadParams, QuadState};
pub use error::{Error, Result};
pub use sim::{run_scenario, SimFailure, SimLog, SimRow};
pub use trajectory::Trajectory;
