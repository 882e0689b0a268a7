//! Embedded Dormand–Prince 5(4) integrator for small autonomous-size systems.

use crate::error::{LabError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct OdeTolerances<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeTolerances<T> {
    fn default() -> Self {
        Self {
            rtol: T::tol_floor(1e-13),
            atol: T::tol_floor(1e-14),
            max_steps: 100_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order weights equal the last row of A (FSAL); these are the differences
// to the embedded 4th-order solution.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = rhs(x, y)` from `x0` to `x1` and returns `y(x1)`.
///
/// `h0` is the initial trial step; adaptive control takes over from there.
pub fn integrate<T, const N: usize, F>(
    mut rhs: F,
    x0: T,
    y0: [T; N],
    x1: T,
    h0: T,
    tol: &OdeTolerances<T>,
) -> Result<[T; N]>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    let span = x1 - x0;
    if span == T::zero() {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut h = h0.abs().min(span.abs()) * dir;
    if h == T::zero() {
        h = span;
    }
    let mut x = x0;
    let mut y = y0;
    let mut k0 = rhs(x, &y)?;
    let mut steps = 0usize;
    while (x1 - x) * dir > T::zero() {
        if steps >= tol.max_steps {
            return Err(LabError::NumericalFailure(format!(
                "ODE step budget exhausted at x = {x}"
            )));
        }
        steps += 1;
        let remaining = x1 - x;
        let last = (h.abs() >= remaining.abs()) || ((remaining - h).abs() < T::epsilon() * x1.abs().max(T::one()) * T::lit(16.0));
        if last {
            h = remaining;
        }
        let mut k = [[T::zero(); N]; 7];
        k[0] = k0;
        for s in 1..7 {
            let mut ys = y;
            for (i, v) in ys.iter_mut().enumerate() {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc = acc + T::lit(A[s][j]) * kj[i];
                }
                *v = *v + h * acc;
            }
            k[s] = rhs(x + T::lit(C[s]) * h, &ys)?;
        }
        let mut y_new = y;
        let mut err = T::zero();
        for i in 0..N {
            let mut inc = T::zero();
            let mut e = T::zero();
            for s in 0..7 {
                if s < 6 {
                    inc = inc + T::lit(A[6][s]) * k[s][i];
                }
                e = e + T::lit(E[s]) * k[s][i];
            }
            y_new[i] = y[i] + h * inc;
            let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((h * e).abs() / scale);
        }
        if !err.is_finite() {
            h = h * T::lit(0.25);
            if h.abs() < T::epsilon() * x.abs().max(T::one()) {
                return Err(LabError::NumericalFailure(format!(
                    "ODE step underflow at x = {x}"
                )));
            }
            continue;
        }
        if err <= T::one() {
            x = if last { x1 } else { x + h };
            y = y_new;
            k0 = k[6];
        }
        let factor = if err == T::zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::lit(5.0))
        };
        h = h * factor;
        if h.abs() < T::epsilon() * x.abs().max(T::one()) {
            return Err(LabError::NumericalFailure(format!(
                "ODE step underflow at x = {x}"
            )));
        }
    }
    Ok(y)
}
