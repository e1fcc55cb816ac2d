//! Dormand–Prince 5(4) embedded Runge–Kutta integrator with adaptive steps.

use crate::error::{CqdError, Result};

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; zero selects `|t1 - t0| / 100`.
    pub h0: f64,
    /// Upper bound on the step size; zero means unbounded.
    pub h_max: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn with_tol(tol: f64) -> Self {
        StepControl {
            rtol: tol,
            atol: tol,
            h0: 0.0,
            h_max: 0.0,
            max_steps: 10_000_000,
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t1`.
///
/// After every accepted step `project` may map the state back onto its
/// manifold (angle wrapping, pole reflection). `observe` sees each accepted
/// `(t, y)`, including the initial point. Returns the final state.
pub fn integrate<const N: usize, F, P, O>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    control: &StepControl,
    mut project: P,
    mut observe: O,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    P: FnMut(&mut [f64; N]),
    O: FnMut(f64, &[f64; N]),
{
    if !(control.rtol > 0.0 && control.atol > 0.0) {
        return Err(CqdError::domain("integration tolerances must be positive"));
    }
    let span = t1 - t0;
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    observe(t, &y);
    if span == 0.0 {
        return Ok(y);
    }
    let h_max = if control.h_max > 0.0 { control.h_max } else { span.abs() };
    let mut h = if control.h0 > 0.0 { control.h0 } else { span.abs() / 100.0 }.min(h_max);
    let mut k1 = rhs(t, &y);
    let mut steps = 0usize;
    loop {
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        let min_step = 1e-14 * t.abs().max(span.abs());
        if h < min_step {
            return Err(CqdError::numeric(format!(
                "step size underflow at t = {t:e}: h = {h:e} below {min_step:e}"
            )));
        }
        steps += 1;
        if steps > control.max_steps {
            return Err(CqdError::numeric(format!(
                "step budget of {} exhausted at t = {t:e} (target {t1:e})",
                control.max_steps
            )));
        }
        let last = h >= remaining;
        let hs = if last { remaining } else { h } * dir;

        let k2 = rhs(t + C2 * hs, &combine(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * hs, &combine(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * hs, &combine(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(
            t + C5 * hs,
            &combine(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + hs,
            &combine(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = combine(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = rhs(t + hs, &y_new);

        let mut err = 0.0;
        for i in 0..N {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = control.atol + control.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            h *= 0.1;
            continue;
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + hs };
            y = y_new;
            project(&mut y);
            observe(t, &y);
            k1 = rhs(t, &y);
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !last {
                h = (h * factor).min(h_max);
            }
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok(y)
}
