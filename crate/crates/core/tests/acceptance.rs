//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use quadsim::attitude::AttitudeCommand;
use quadsim::decoupling::{coupling_constants, decouple, VirtualTorques};
use quadsim::dynamics::{inverse_mixer, mixer, rotational_accel};
use quadsim::integrator::rk4_step;
use quadsim::metrics::{closest_approach, peak_abs, radial_rms, step_metrics};
use quadsim::position::{invert_pitch, invert_roll, synthesize_pd_gains, CommandLimits, PolePair};
use quadsim::report::{csv_string, write_artifacts, summarize, LOG_FILE, METRICS_FILE};
use quadsim::{run_scenario, ControlVector, MotorForces, QuadParams, QuadState, ScenarioConfig, Trajectory};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gain_reproduction() -> Outcome {
    let g = synthesize_pd_gains(PolePair::new(0.7, 4.3)).unwrap();
    let pass = g.kp == 3.01 && (g.tau_d - 1.6611).abs() <= 0.0006;
    outcome(pass, format!("Kp={} tau_d={:.5}", g.kp, g.tau_d))
}

fn analytic_linear_loop() -> Outcome {
    let cfg = ScenarioConfig {
        duration: 10.0,
        ideal_attitude: true,
        ..ScenarioConfig::with_trajectory(Trajectory::Step { x: 0.1, y: 0.0, z: 0.0 })
    };
    let log = run_scenario(&cfg).unwrap();
    let oracle = |t: f64| 0.1 * (1.0 + 0.19444 * (-0.7 * t).exp() - 1.19444 * (-4.3 * t).exp());
    let worst = log.rows.iter().map(|r| (r.state.x - oracle(r.t)).abs()).fold(0.0, f64::max);
    let rel = worst / 0.1;
    let m = step_metrics(&log.series(|r| r.state.x), 0.1).unwrap();
    let ts = m.settling_time.unwrap_or(f64::INFINITY);
    let pass = rel <= 0.01 && (m.overshoot_pct - 8.03).abs() <= 0.2 && (ts - 1.94).abs() <= 0.02;
    outcome(pass, format!("inf-norm {:.4}% overshoot {:.3}% settling {:.4}s", 100.0 * rel, m.overshoot_pct, ts))
}

fn step_claims() -> Outcome {
    let cfg = ScenarioConfig { duration: 10.0, ..ScenarioConfig::with_trajectory(Trajectory::Step { x: 1.0, y: 0.0, z: 0.0 }) };
    let log = run_scenario(&cfg).unwrap();
    let m = step_metrics(&log.series(|r| r.state.x), 1.0).unwrap();
    let tr = m.rise_time.unwrap_or(f64::INFINITY);
    let ts = m.settling_time.unwrap_or(f64::INFINITY);
    let pass = tr <= 2.0 && ts <= 4.0 && m.overshoot_pct <= 12.0 && m.steady_state_error <= 0.01;
    outcome(
        pass,
        format!(
            "rise {tr:.3}s settling {ts:.3}s overshoot {:.2}% sse {:.2e}m (reported 1s / 2s / 4%)",
            m.overshoot_pct, m.steady_state_error
        ),
    )
}

fn decoupling_exactness() -> Outcome {
    let params = QuadParams::default();
    let k = coupling_constants(&params);
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let rates = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let virt = VirtualTorques::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let s = QuadState { p: rates[0], q: rates[1], r: rates[2], ..Default::default() };
        let [u2, u3, u4] = decouple(&virt, rates, &k);
        let acc = rotational_accel(&s, &ControlVector::new(0.0, u2, u3, u4), &params);
        for (a, v) in acc.iter().zip([virt.roll, virt.pitch, virt.yaw]) {
            worst = worst.max((a - v).abs());
        }
    }

    let dt = 1e-3;
    let mut drift = 0.0_f64;
    for _ in 0..5 {
        let u2 = rng.random_range(-2.0..2.0);
        let (p0, q0, r0) = (rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0), rng.random_range(-2.0..-0.5));
        let mut y = [p0, q0, r0];
        for i in 0..2000 {
            y = rk4_step(&y, i as f64 * dt, dt, |_, y| {
                let s = QuadState { p: y[0], q: y[1], r: y[2], ..Default::default() };
                let [a, b, c] = decouple(&VirtualTorques::new(u2, 0.0, 0.0), *y, &k);
                Ok(rotational_accel(&s, &ControlVector::new(0.0, a, b, c), &params))
            })
            .unwrap();
        }
        drift = drift.max((y[0] - (p0 + u2 * 2.0)).abs()).max((y[1] - q0).abs()).max((y[2] - r0).abs());
    }
    outcome(worst <= 1e-12 && drift <= 1e-9, format!("cancellation {worst:.1e} integrator drift {drift:.1e}"))
}

fn roll_step(decoupling: bool) -> f64 {
    let cfg = ScenarioConfig {
        duration: 2.0,
        decoupling,
        attitude_step: Some(AttitudeCommand { phi: 0.3, theta: 0.0, psi: 0.0 }),
        initial: Some(QuadState { r: 1.0, ..Default::default() }),
        ..ScenarioConfig::with_trajectory(Trajectory::hover())
    };
    peak_abs(&run_scenario(&cfg).unwrap(), |r| r.state.theta)
}

fn decoupling_contrast() -> Outcome {
    let on = roll_step(true);
    let off = roll_step(false);
    outcome(off >= 10.0 * on, format!("peak |theta| on {on:.3e} off {off:.3e} ratio {:.1}", off / on))
}

fn inversion_round_trips() -> Outcome {
    let params = QuadParams::default();
    let limits = CommandLimits::default();
    let mut rng = StdRng::seed_from_u64(6);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let (phi, theta, psi) = (rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4));
        let u1: f64 = rng.random_range(10.0..60.0);
        let (sf, cf) = f64::sin_cos(phi);
        let (st, _) = f64::sin_cos(theta);
        let (sp, cp) = f64::sin_cos(psi);
        let a = u1 / params.mass;
        let u_x = (cf * st * cp + sf * sp) * a;
        let u_y = (cf * st * sp - sf * cp) * a;
        let s = QuadState { phi, theta, psi, ..Default::default() };
        let th = invert_pitch(u_x, &s, u1, &params, &limits).unwrap().value;
        let ph = invert_roll(u_y, &s, u1, &params, &limits).unwrap().value;
        worst = worst.max((th - theta).abs()).max((ph - phi).abs());
    }
    outcome(worst <= 1e-10, format!("max angle error {worst:.1e} rad"))
}

fn mixer_and_hover() -> Outcome {
    let params = QuadParams::default();
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let u = ControlVector::new(
            rng.random_range(0.0..100.0),
            rng.random_range(-20.0..20.0),
            rng.random_range(-20.0..20.0),
            rng.random_range(-2.0..2.0),
        );
        let back = mixer(&inverse_mixer(&u, &params).unwrap(), &params).unwrap();
        for (a, b) in back.to_array().iter().zip(u.to_array()) {
            worst = worst.max((a - b).abs());
        }
    }
    let cfg = ScenarioConfig { duration: 5.0, ..ScenarioConfig::with_trajectory(Trajectory::Hover { altitude: 1.0 }) };
    let log = run_scenario(&cfg).unwrap();
    let start = log.rows[0].state.to_array();
    let hover = MotorForces::uniform(params.hover_thrust() / 4.0).0;
    let mut drift = 0.0_f64;
    for row in &log.rows {
        for (a, b) in row.state.to_array().iter().zip(start) {
            drift = drift.max((a - b).abs());
        }
        for (a, b) in row.forces.0.iter().zip(hover) {
            drift = drift.max((a - b).abs());
        }
    }
    outcome(worst <= 1e-12 && drift <= 1e-9, format!("mixer {worst:.1e} hover drift {drift:.1e}"))
}

fn rk4_order() -> Outcome {
    let solve = |n: usize| {
        let dt = 1.0 / n as f64;
        let mut y = [1.0];
        for i in 0..n {
            y = rk4_step(&y, i as f64 * dt, dt, |_, y| Ok([-2.0 * y[0]])).unwrap();
        }
        (y[0] - (-2.0_f64).exp()).abs()
    };
    let ratio = solve(20) / solve(40);
    outcome((14.0..=18.0).contains(&ratio), format!("error ratio {ratio:.3}"))
}

fn tracking() -> Outcome {
    let circle = ScenarioConfig { duration: 120.0, ..ScenarioConfig::with_trajectory(Trajectory::circle()) };
    let log = run_scenario(&circle).unwrap();
    let rms = radial_rms(&log, (60.0, 120.0), 1.0).unwrap();

    let square = ScenarioConfig { duration: 40.0, ..ScenarioConfig::with_trajectory(Trajectory::square()) };
    let log = run_scenario(&square).unwrap();
    let corners = closest_approach(&log, &Trajectory::square_corners(2.0));
    let worst = corners.iter().copied().fold(0.0, f64::max);
    outcome(rms <= 0.05 && worst <= 0.15, format!("circle radial rms {rms:.4}m square worst corner {worst:.4}m"))
}

fn determinism() -> Outcome {
    let cfg = ScenarioConfig { duration: 20.0, ..ScenarioConfig::with_trajectory(Trajectory::circle()) };
    let dir = tempfile::tempdir().unwrap();
    let mut artifacts = Vec::new();
    for _ in 0..2 {
        let log = run_scenario(&cfg).unwrap();
        write_artifacts(&cfg, &log, &summarize(&cfg, &log, None), dir.path()).unwrap();
        let csv = std::fs::read(dir.path().join(LOG_FILE)).unwrap();
        let metrics = std::fs::read(dir.path().join(METRICS_FILE)).unwrap();
        assert_eq!(csv, csv_string(&log).into_bytes());
        artifacts.push((csv, metrics));
    }
    let pass = artifacts[0] == artifacts[1];
    outcome(pass, format!("{} csv bytes", artifacts[0].0.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("gain reproduction", gain_reproduction),
        ("analytic linear-loop oracle", analytic_linear_loop),
        ("step-response window", step_claims),
        ("decoupling exactness", decoupling_exactness),
        ("decoupling A/B contrast", decoupling_contrast),
        ("inversion round trips", inversion_round_trips),
        ("mixer round trip and hover", mixer_and_hover),
        ("RK4 order", rk4_order),
        ("circle and square tracking", tracking),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {verdict}  {name}: {} ({:.2}s)",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
