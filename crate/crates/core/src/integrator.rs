//! Classical fixed-step fourth-order Runge–Kutta.

use crate::error::{Error, Result};

/// Advances `y` from `t` to `t + dt`.
///
/// `f(t, y)` returns the derivative. Any non-finite stage derivative aborts
/// the step with [`Error::Diverged`] carrying `t`.
pub fn rk4_step<const N: usize, F>(y: &[f64; N], t: f64, dt: f64, mut f: F) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("step size must be positive, got {dt}")));
    }
    let half = 0.5 * dt;
    let k1 = checked(f(t, y), t)?;
    let k2 = checked(f(t + half, &offset(y, &k1, half)), t)?;
    let k3 = checked(f(t + half, &offset(y, &k2, half)), t)?;
    let k4 = checked(f(t + dt, &offset(y, &k3, dt)), t)?;

    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged { t });
    }
    Ok(out)
}

fn offset<const N: usize>(y: &[f64; N], k: &[f64; N], h: f64) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += h * k[i];
    }
    out
}

fn checked<const N: usize>(d: Result<[f64; N]>, t: f64) -> Result<[f64; N]> {
    match d {
        Ok(d) if d.iter().all(|v| v.is_finite()) => Ok(d),
        Ok(_) | Err(Error::InvalidInput(_)) => Err(Error::Diverged { t }),
        Err(e) => Err(e),
    }
}
