//! Fixed-step classical Runge–Kutta for small autonomous systems.

use crate::error::{Error, Result};

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

pub(crate) fn rk4_step<const N: usize, F>(f: &F, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k1 = f(y);
    let k2 = f(&axpy(y, 0.5 * h, &k1));
    let k3 = f(&axpy(y, 0.5 * h, &k2));
    let k4 = f(&axpy(y, h, &k3));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Advances `y` from `t0` to `t1` in equal steps no longer than `h_max`.
pub(crate) fn advance<const N: usize, F>(
    f: &F,
    y: [f64; N],
    t0: f64,
    t1: f64,
    h_max: f64,
) -> Result<[f64; N]>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(y);
    }
    let steps = (span / h_max).ceil().max(1.0) as u64;
    let h = span / steps as f64;
    let mut y = y;
    for k in 0..steps {
        y = rk4_step(f, &y, h);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationFailure {
                time: t0 + (k + 1) as f64 * h,
            });
        }
    }
    Ok(y)
}

/// Samples the solution on `grid` (nondecreasing, starting at or after 0)
/// with the initial value given at t = 0.
pub(crate) fn sample_on_grid<const N: usize, F>(
    f: &F,
    y0: [f64; N],
    grid: &[f64],
    h_max: f64,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(grid.len());
    let mut t = 0.0;
    let mut y = y0;
    for &target in grid {
        y = advance(f, y, t, target, h_max)?;
        t = target;
        out.push(y);
    }
    Ok(out)
}
