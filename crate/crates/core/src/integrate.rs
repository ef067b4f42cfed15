//! Adaptive Dormand–Prince 5(4) integration of the linear second-order equation
//! `v'' + q(r) v = 0`, written as the first-order system `(v, v')`.
//!
//! Callers integrate between breakpoints of `q` so that every step sees a smooth
//! coefficient; the step controller never crosses the requested endpoint.

use crate::{Error, Result};

/// Absolute/relative tolerances of the step controller.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

// 5th-order weights (also row 7 of the tableau, FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference between 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State = [f64; 2];

#[inline]
fn rhs<Q: Fn(f64) -> f64>(q: &Q, r: f64, y: State) -> State {
    [y[1], -q(r) * y[0]]
}

#[inline]
fn axpy(y: State, h: f64, terms: &[(f64, State)]) -> State {
    let mut out = y;
    for &(a, k) in terms {
        out[0] += h * a * k[0];
        out[1] += h * a * k[1];
    }
    out
}

/// Integrates `v'' + q v = 0` from `r0` to `r1` starting at `(v, v')(r0) = y0`.
///
/// `q` must be smooth on `[r0, r1]`. Integration backwards (`r1 < r0`) is allowed.
pub fn integrate<Q: Fn(f64) -> f64>(
    q: &Q,
    r0: f64,
    r1: f64,
    y0: [f64; 2],
    ctl: StepControl,
) -> Result<[f64; 2]> {
    let span = r1 - r0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut r = r0;
    let mut y = y0;
    // Initial guess from the curvature scale: steps of ~0.05/sqrt|q| resolve the oscillation.
    let qscale = q(r0).abs().max(q(r1).abs()).max(1e-12);
    let mut h = (0.05 / qscale.sqrt())
        .min(span.abs())
        .max(span.abs() * 1e-6)
        * dir;
    let mut k1 = rhs(q, r, y);
    let mut steps = 0usize;

    while (r1 - r) * dir > 0.0 {
        if steps >= ctl.max_steps {
            return Err(Error::Solver(format!(
                "step limit reached integrating from {r0} to {r1}"
            )));
        }
        steps += 1;
        let remaining = r1 - r;
        let last = (h * dir) >= remaining * dir;
        if last {
            h = remaining;
        }

        let k2 = rhs(q, r + C2 * h, axpy(y, h, &[(A21, k1)]));
        let k3 = rhs(q, r + C3 * h, axpy(y, h, &[(A31, k1), (A32, k2)]));
        let k4 = rhs(
            q,
            r + C4 * h,
            axpy(y, h, &[(A41, k1), (A42, k2), (A43, k3)]),
        );
        let k5 = rhs(
            q,
            r + C5 * h,
            axpy(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]),
        );
        let k6 = rhs(
            q,
            r + h,
            axpy(
                y,
                h,
                &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
            ),
        );
        let y_new = axpy(y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        let k7 = rhs(q, r + h, y_new);

        let mut err = 0.0f64;
        for i in 0..2 {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = ctl.atol + ctl.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }

        if err <= 1.0 || h.abs() <= 1e-14 * (1.0 + r.abs()) {
            r = if last { r1 } else { r + h };
            y = y_new;
            k1 = k7;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if !h.is_finite() || h == 0.0 {
            return Err(Error::Solver("step size collapsed".into()));
        }
    }
    if !(y[0].is_finite() && y[1].is_finite()) {
        return Err(Error::Solver("non-finite solution".into()));
    }
    Ok(y)
}
