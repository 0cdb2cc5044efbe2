use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "quadsim", version, about = "Quadrotor flight simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write log.csv, metrics.txt and plot.py.
    Simulate(ScenarioArgs),
    /// Run nlpd with decoupling on and off, and the linpd baseline, side by side.
    Compare(ScenarioArgs),
    /// Print the position-loop gains and their predicted step response.
    Gains(ScenarioArgs),
    /// Full-cascade x step, judged against the reported step-response figures.
    StepTest(ScenarioArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrajectoryKind {
    Circle,
    Square,
    Step,
    Hover,
}

impl TrajectoryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryKind::Circle => "circle",
            TrajectoryKind::Square => "square",
            TrajectoryKind::Step => "step",
            TrajectoryKind::Hover => "hover",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControllerKind {
    Nlpd,
    Linpd,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// Scenario file (`key = value` lines).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Output directory; defaults to the scenario's `output` key, then `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub duration: Option<f64>,
    #[arg(long, value_enum)]
    pub trajectory: Option<TrajectoryKind>,
    #[arg(long, value_enum)]
    pub controller: Option<ControllerKind>,
    #[arg(long)]
    pub no_decoupling: bool,
    #[arg(long)]
    pub ideal_attitude: bool,
    /// Step size in x (selects the step trajectory).
    #[arg(long, allow_negative_numbers = true)]
    pub step_x: Option<f64>,
    /// Reserved; the simulator has no stochastic parts.
    #[arg(long)]
    pub seed: Option<u64>,
}
