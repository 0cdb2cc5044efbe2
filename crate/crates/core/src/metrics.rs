//! Step-response and tracking metrics over time series and simulation logs.

use crate::error::{Error, Result};
use crate::sim::{SimLog, SimRow};

/// Headline settling band (fraction of the step magnitude).
pub const SETTLING_BAND: f64 = 0.05;
/// Secondary, tighter settling band.
pub const SETTLING_BAND_TIGHT: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMetrics {
    /// 10 % → 90 % of the step magnitude (s).
    pub rise_time: Option<f64>,
    /// Entry into the ±5 % band for good (s).
    pub settling_time: Option<f64>,
    /// Same with a ±2 % band (s).
    pub settling_time_2pct: Option<f64>,
    /// Peak excursion past the setpoint, percent of the step magnitude.
    pub overshoot_pct: f64,
    pub peak_time: Option<f64>,
    /// `|last − setpoint|`.
    pub steady_state_error: f64,
}

/// Metrics for the trace `(t, value)` stepping from its first value to
/// `setpoint`. Thresholds that are never crossed are reported as `None`.
///
/// When the trace already starts at the setpoint the band half-width is
/// taken relative to `|setpoint|` (or absolute when the setpoint is zero).
pub fn step_metrics(trace: &[(f64, f64)], setpoint: f64) -> Result<StepMetrics> {
    let (&(_, first), &(_, last)) = match (trace.first(), trace.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::invalid("step metrics need a non-empty trace")),
    };
    if trace.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) || !setpoint.is_finite() {
        return Err(Error::invalid("step metrics need finite samples"));
    }
    let magnitude = setpoint - first;
    let steady_state_error = (last - setpoint).abs();
    let band_scale = if magnitude != 0.0 {
        magnitude.abs()
    } else if setpoint != 0.0 {
        setpoint.abs()
    } else {
        1.0
    };
    let settling_time_2pct = settling_time(trace, setpoint, SETTLING_BAND_TIGHT * band_scale);
    let settling_time = settling_time(trace, setpoint, SETTLING_BAND * band_scale);

    if magnitude == 0.0 {
        return Ok(StepMetrics {
            rise_time: None,
            settling_time,
            settling_time_2pct,
            overshoot_pct: 0.0,
            peak_time: None,
            steady_state_error,
        });
    }

    let normalized = |v: f64| (v - first) / magnitude;
    let t10 = first_crossing(trace, 0.1, &normalized);
    let t90 = first_crossing(trace, 0.9, &normalized);
    let rise_time = match (t10, t90) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    };

    let (peak_t, peak) = trace
        .iter()
        .map(|&(t, v)| (t, normalized(v)))
        .fold((trace[0].0, f64::NEG_INFINITY), |acc, (t, n)| if n > acc.1 { (t, n) } else { acc });

    Ok(StepMetrics {
        rise_time,
        settling_time,
        settling_time_2pct,
        overshoot_pct: ((peak - 1.0) * 100.0).max(0.0),
        peak_time: Some(peak_t),
        steady_state_error,
    })
}

fn first_crossing(trace: &[(f64, f64)], level: f64, normalized: &impl Fn(f64) -> f64) -> Option<f64> {
    let idx = trace.iter().position(|&(_, v)| normalized(v) >= level)?;
    if idx == 0 {
        return Some(trace[0].0);
    }
    let (t0, v0) = trace[idx - 1];
    let (t1, v1) = trace[idx];
    let (n0, n1) = (normalized(v0), normalized(v1));
    Some(t0 + (level - n0) / (n1 - n0) * (t1 - t0))
}

/// Time after which `|value − setpoint| ≤ half_width` for the rest of the
/// trace, interpolated between the bracketing samples. `None` if the last
/// sample is still outside the band.
pub fn settling_time(trace: &[(f64, f64)], setpoint: f64, half_width: f64) -> Option<f64> {
    let last_out = trace.iter().rposition(|&(_, v)| (v - setpoint).abs() > half_width);
    match last_out {
        None => trace.first().map(|s| s.0),
        Some(j) if j + 1 == trace.len() => None,
        Some(j) => {
            let (t0, v0) = trace[j];
            let (t1, v1) = trace[j + 1];
            let (e0, e1) = (v0 - setpoint, v1 - setpoint);
            let target = half_width.copysign(e0);
            Some(t0 + (e0 - target) / (e0 - e1) * (t1 - t0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingMetrics {
    /// RMS of the 3-D position error norm (m).
    pub rms: f64,
    /// Largest position error norm (m).
    pub max: f64,
    pub rms_x: f64,
    pub rms_y: f64,
    pub rms_z: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

fn window_rows(log: &SimLog, window: (f64, f64)) -> Result<&[SimRow]> {
    let (t0, t1) = window;
    let (first, last) = match (log.rows.first(), log.rows.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::invalid("log is empty")),
    };
    let slack = 1e-9 * (1.0 + last.abs());
    if !(t0 <= t1) || t0 < first - slack || t1 > last + slack {
        return Err(Error::invalid(format!(
            "window ({t0}, {t1}) is not inside the log span ({first}, {last})"
        )));
    }
    let start = log.rows.partition_point(|r| r.t < t0 - slack);
    let end = log.rows.partition_point(|r| r.t <= t1 + slack);
    if start >= end {
        return Err(Error::invalid(format!("window ({t0}, {t1}) contains no samples")));
    }
    Ok(&log.rows[start..end])
}

pub fn tracking_metrics(log: &SimLog, window: (f64, f64)) -> Result<TrackingMetrics> {
    let rows = window_rows(log, window)?;
    let n = rows.len() as f64;
    let (mut sx, mut sy, mut sz, mut max) = (0.0, 0.0, 0.0, 0.0f64);
    for r in rows {
        let ex = r.state.x - r.reference.x;
        let ey = r.state.y - r.reference.y;
        let ez = r.state.z - r.reference.z;
        sx += ex * ex;
        sy += ey * ey;
        sz += ez * ez;
        max = max.max((ex * ex + ey * ey + ez * ez).sqrt());
    }
    Ok(TrackingMetrics {
        rms: ((sx + sy + sz) / n).sqrt(),
        max,
        rms_x: (sx / n).sqrt(),
        rms_y: (sy / n).sqrt(),
        rms_z: (sz / n).sqrt(),
        window,
        samples: rows.len(),
    })
}

/// RMS of `| ‖(x, y)‖ − radius |` over the window, for circles centred on
/// the origin.
pub fn radial_rms(log: &SimLog, window: (f64, f64), radius: f64) -> Result<f64> {
    let rows = window_rows(log, window)?;
    let sum: f64 = rows
        .iter()
        .map(|r| {
            let e = r.state.x.hypot(r.state.y) - radius;
            e * e
        })
        .sum();
    Ok((sum / rows.len() as f64).sqrt())
}

/// Closest horizontal approach of the flown path to each point.
pub fn closest_approach(log: &SimLog, points: &[[f64; 2]]) -> Vec<f64> {
    points
        .iter()
        .map(|p| {
            log.rows
                .iter()
                .map(|r| (r.state.x - p[0]).hypot(r.state.y - p[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Largest `|f(row)|` over the log.
pub fn peak_abs(log: &SimLog, f: impl Fn(&SimRow) -> f64) -> f64 {
    log.rows.iter().map(|r| f(r).abs()).fold(0.0, f64::max)
}
