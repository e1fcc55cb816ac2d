//! Quadrature and one-dimensional search helpers.

use crate::error::{CqdError, Result};

/// 8-point Gauss–Legendre nodes on [-1, 1] (positive half; symmetric).
const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Gauss–Legendre rule on `[a, b]`; exact for polynomials of degree <= 15.
pub(crate) fn gauss_legendre8<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
        sum += w * (f(mid - half * x) + f(mid + half * x));
    }
    sum * half
}

/// Composite trapezoid rule over tabulated samples.
pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Adaptive Simpson quadrature with relative tolerance `rel_tol`.
///
/// Fails when the recursion depth limit is reached before the local error
/// estimates fall below tolerance; the error carries the residual estimate.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64> {
    const MAX_DEPTH: u32 = 48;
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // Seed an absolute tolerance from a coarse composite estimate so that
    // integrands with cancellation do not demand impossible precision.
    let scale = {
        let n = 64;
        let h = (b - a) / n as f64;
        (0..=n)
            .map(|i| f(a + i as f64 * h).abs())
            .sum::<f64>()
            * h
    };
    let abs_tol = rel_tol * scale.max(f64::MIN_POSITIVE);
    let mut residual = 0.0;
    let value = simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, MAX_DEPTH, &mut residual);
    if residual > abs_tol {
        return Err(CqdError::numeric(format!(
            "adaptive quadrature on [{a}, {b}] did not converge: residual {residual:e} > {abs_tol:e}"
        )));
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    residual: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 {
        *residual += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    if delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, residual)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, residual)
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// Returns `(x, f(x))` once the bracket is narrower than `tol`, or an error
/// with the final bracket if `max_iter` is exhausted.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    const MAX_ITER: usize = 500;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..MAX_ITER {
        if (b - a).abs() <= tol {
            let x = 0.5 * (a + b);
            return Ok((x, f(x)));
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    Err(CqdError::numeric(format!(
        "golden-section search did not converge: bracket [{a:e}, {b:e}] wider than {tol:e}"
    )))
}
