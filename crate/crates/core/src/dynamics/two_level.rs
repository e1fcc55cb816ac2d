//! Two-level amplitude equations for a spin crossing the null point.
//!
//! In the chirped frame `(c1, c2) = (exp(-i tau^2) f, exp(i tau^2) g)` the
//! amplitudes obey
//!
//! ```text
//! f' = [-i sqrt(k1) exp(-i phi_n) - sqrt(k0)] exp(+2i tau^2) g
//! g' = [-i sqrt(k1) exp(+i phi_n) + sqrt(k0)] exp(-2i tau^2) f
//! ```
//!
//! with `phi_n(tau) = phi_n0 + w_n tau`. The couplings oscillate ever faster
//! away from the crossing, so truncating at `|tau| = T` leaves an `O(1/T)`
//! tail. Each coupling term `a exp(i Phi)` integrates to `a exp(i Phi) /
//! (i Phi')` to leading order beyond the window; that correction is applied
//! at both ends.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rk::{integrate, StepControl};
use crate::error::{CqdError, Result};

/// Chirped-frame amplitudes at dimensionless time `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudePair {
    pub f: Complex64,
    pub g: Complex64,
    pub tau: f64,
}

impl AmplitudePair {
    pub fn norm_sqr(&self) -> f64 {
        self.f.norm_sqr() + self.g.norm_sqr()
    }
}

/// Result of a two-level run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelOutcome {
    /// Amplitudes extrapolated to `tau -> +infinity`, renormalized.
    pub asymptotic: AmplitudePair,
    /// Amplitudes at the end of the window, from a plain start
    /// `(f, g) = (1, 0)` at `-T`.
    pub boundary: AmplitudePair,
    /// Largest `| |f|^2 + |g|^2 - 1 |` seen along the plain run.
    pub norm_drift: f64,
}

struct Couplings {
    k0s: f64,
    k1s: f64,
    phi_n0: f64,
    w_n: f64,
}

impl Couplings {
    /// Terms `(amplitude, phase, phase derivative)` multiplying `g` in `f'`.
    fn f_terms(&self, tau: f64) -> [(Complex64, f64, f64); 2] {
        let phi = self.phi_n0 + self.w_n * tau;
        [
            (Complex64::new(-self.k0s, 0.0), 2.0 * tau * tau, 4.0 * tau),
            (Complex64::new(0.0, -self.k1s), 2.0 * tau * tau - phi, 4.0 * tau - self.w_n),
        ]
    }

    /// Terms multiplying `f` in `g'`.
    fn g_terms(&self, tau: f64) -> [(Complex64, f64, f64); 2] {
        let phi = self.phi_n0 + self.w_n * tau;
        [
            (Complex64::new(self.k0s, 0.0), -2.0 * tau * tau, -4.0 * tau),
            (Complex64::new(0.0, -self.k1s), -2.0 * tau * tau + phi, -4.0 * tau + self.w_n),
        ]
    }

    fn rates(&self, tau: f64, f: Complex64, g: Complex64) -> (Complex64, Complex64) {
        let cf: Complex64 = self
            .f_terms(tau)
            .iter()
            .map(|(a, ph, _)| a * Complex64::from_polar(1.0, *ph))
            .sum();
        let cg: Complex64 = self
            .g_terms(tau)
            .iter()
            .map(|(a, ph, _)| a * Complex64::from_polar(1.0, *ph))
            .sum();
        (cf * g, cg * f)
    }

    /// Leading-order tail `sum a exp(i Phi) / (i Phi')` of a coupling sum.
    fn tail(terms: &[(Complex64, f64, f64); 2]) -> Complex64 {
        let i = Complex64::i();
        terms
            .iter()
            .map(|(a, ph, dph)| a * Complex64::from_polar(1.0, *ph) / (i * dph))
            .sum()
    }
}

fn pack(f: Complex64, g: Complex64) -> [f64; 4] {
    [f.re, f.im, g.re, g.im]
}

fn unpack(y: &[f64; 4]) -> (Complex64, Complex64) {
    (Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
}

/// Integrates the two-level system over `[-T, T]` starting from `f = 1`.
pub fn integrate_two_level(k0: f64, k1: f64, phi_n0: f64, w_n: f64, tau_max: f64, tol: f64) -> Result<TwoLevelOutcome> {
    if !(k0 >= 0.0 && k1 >= 0.0) {
        return Err(CqdError::domain(format!("adiabaticity parameters must be non-negative, got k0 = {k0}, k1 = {k1}")));
    }
    if !(tol > 0.0) {
        return Err(CqdError::domain(format!("tolerance must be positive, got {tol}")));
    }
    let required = 10.0 * 1f64.max(k0.sqrt()).max(k1.sqrt());
    if !(tau_max >= required) {
        return Err(CqdError::domain(format!("tau_max = {tau_max} below the required {required}")));
    }
    if k1 > 0.0 && !(tau_max > w_n.abs() / 4.0 + 2.0) {
        return Err(CqdError::domain(format!(
            "resonance at tau = {} lies too close to the window edge {tau_max}",
            w_n / 4.0
        )));
    }
    let c = Couplings {
        k0s: k0.sqrt(),
        k1s: k1.sqrt(),
        phi_n0,
        w_n,
    };
    let control = StepControl {
        h_max: 0.05,
        ..StepControl::with_tol(tol * 1e-2)
    };
    let rhs = |tau: f64, y: &[f64; 4]| {
        let (f, g) = unpack(y);
        let (df, dg) = c.rates(tau, f, g);
        pack(df, dg)
    };

    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut drift: f64 = 0.0;
    let plain = integrate(rhs, -tau_max, pack(one, zero), tau_max, &control, |_| {}, |_, y| {
        let (f, g) = unpack(y);
        drift = drift.max((f.norm_sqr() + g.norm_sqr() - 1.0).abs());
    })?;
    if drift > 10.0 * tol {
        return Err(CqdError::numeric(format!("norm drift {drift:e} exceeds 10 x tolerance {tol:e}")));
    }
    let (fb, gb) = unpack(&plain);

    // Start on the incoming asymptote: g(-T) picks up the tail from -infinity.
    let g0 = Couplings::tail(&c.g_terms(-tau_max)) * one;
    let corrected = integrate(rhs, -tau_max, pack(one, g0), tau_max, &control, |_| {}, |_, _| {})?;
    let (ft, gt) = unpack(&corrected);
    let f_inf = ft - Couplings::tail(&c.f_terms(tau_max)) * gt;
    let g_inf = gt - Couplings::tail(&c.g_terms(tau_max)) * ft;
    let norm = (f_inf.norm_sqr() + g_inf.norm_sqr()).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(CqdError::numeric("asymptotic amplitudes degenerate"));
    }

    Ok(TwoLevelOutcome {
        asymptotic: AmplitudePair {
            f: f_inf / norm,
            g: g_inf / norm,
            tau: tau_max,
        },
        boundary: AmplitudePair {
            f: fb,
            g: gb,
            tau: tau_max,
        },
        norm_drift: drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_coupling_keeps_state() {
        let r = integrate_two_level(0.0, 0.0, 0.0, 0.0, 10.0, 1e-8).unwrap();
        assert!((r.asymptotic.f.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_window_rejected() {
        assert!(integrate_two_level(4.0, 0.0, 0.0, 0.0, 15.0, 1e-8).is_err());
    }
}
