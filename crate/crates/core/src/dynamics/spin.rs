//! Coupled electron/nuclear moment dynamics in spherical coordinates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::rk::{integrate, StepControl};
use crate::atom::AtomParams;
use crate::error::{CqdError, Result};

/// Polar angles closer than this to a pole are treated as on the pole.
pub const POLE_GUARD: f64 = 1e-9;

/// Electron and nuclear moment directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    pub theta_e: f64,
    pub phi_e: f64,
    pub theta_n: f64,
    pub phi_n: f64,
    /// Total azimuth traversed by the electron moment, never wrapped.
    pub phase_e: f64,
}

impl SpinState {
    pub fn new(theta_e: f64, phi_e: f64, theta_n: f64, phi_n: f64) -> Self {
        SpinState {
            theta_e,
            phi_e,
            theta_n,
            phi_n,
            phase_e: 0.0,
        }
    }

    fn to_array(self) -> [f64; 5] {
        [self.theta_e, self.phi_e, self.theta_n, self.phi_n, self.phase_e]
    }

    fn from_array(y: &[f64; 5]) -> Self {
        SpinState {
            theta_e: y[0],
            phi_e: y[1],
            theta_n: y[2],
            phi_n: y[3],
            phase_e: y[4],
        }
    }

    /// Electron moment as a Cartesian unit vector.
    pub fn mu_e(&self) -> [f64; 3] {
        unit(self.theta_e, self.phi_e)
    }

    pub fn mu_n(&self) -> [f64; 3] {
        unit(self.theta_n, self.phi_n)
    }
}

fn unit(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Which damping law accompanies the precession.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Physics {
    /// Pure precession; the induction factor is ignored.
    Bloch,
    /// Gilbert damping with its usual (unsigned) sign.
    Llg,
    /// Induction whose sign separates the electron from the nuclear polar angle.
    Cqd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    /// Induction factor, dimensionless, non-negative.
    pub k_i: f64,
    pub physics: Physics,
    /// Include the nuclear field acting on the electron.
    pub include_b_n: bool,
    /// Include the electron field acting on the nucleus.
    pub include_b_e: bool,
    /// Hold the nuclear angles fixed at their initial values.
    pub freeze_nucleus: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            k_i: 0.0,
            physics: Physics::Cqd,
            include_b_n: true,
            include_b_e: true,
            freeze_nucleus: false,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_i >= 0.0 && self.k_i.is_finite()) {
            return Err(CqdError::domain(format!("k_i must be non-negative, got {}", self.k_i)));
        }
        Ok(())
    }

    fn effective_k(&self) -> f64 {
        match self.physics {
            Physics::Bloch => 0.0,
            _ => self.k_i,
        }
    }
}

/// Precession rates of one moment before induction: `(theta_dot, phi_dot)`.
///
/// `partner` is `(field magnitude, theta, phi)` of the other moment's field,
/// whose direction follows that moment.
fn precession(gamma: f64, theta: f64, phi: f64, b: [f64; 3], partner: (f64, f64, f64)) -> (f64, f64) {
    let (bp, tp, pp) = partner;
    let (sp, cp) = phi.sin_cos();
    let a = -gamma * (-b[0] * sp + b[1] * cp + bp * tp.sin() * (pp - phi).sin());
    let bphi = -gamma
        * (b[2] + bp * tp.cos()
            - (theta.cos() / theta.sin()) * (b[0] * cp + b[1] * sp + bp * tp.sin() * (pp - phi).cos()));
    (a, bphi)
}

/// True at a pole or exactly on the clamp values that stand in for one.
///
/// The open bands `(0, POLE_GUARD)` and `(PI - POLE_GUARD, PI)` keep the
/// interior equations, so a trial stage crossing into them sees a smooth
/// right-hand side; projection then pins the accepted state to the clamp.
fn on_pole(theta: f64) -> bool {
    theta <= 0.0 || theta >= PI || theta == POLE_GUARD || theta == PI - POLE_GUARD
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Adds induction to the precession rates of one moment.
///
/// `separation` is `sgn(theta_partner - theta)` for the signed law.
fn with_induction(physics: Physics, k: f64, theta: f64, a: f64, bphi: f64, separation: f64) -> (f64, f64) {
    if k == 0.0 {
        return (a, bphi);
    }
    let s = theta.sin();
    match physics {
        Physics::Bloch => (a, bphi),
        Physics::Llg => {
            let d = 1.0 + k * k;
            ((a + k * s * bphi) / d, (bphi - k * a / s) / d)
        }
        Physics::Cqd => {
            if separation == 0.0 {
                return (a, bphi);
            }
            // theta' = a - sep k |phi'| sin(theta), phi' = bphi - sgn(phi') k |theta'| / sin(theta).
            // Solve the piecewise-linear system for each sign pattern and keep
            // the self-consistent one; the bare signs are tried first.
            let first = (sgn(a), sgn(bphi));
            let mut patterns = vec![first];
            for st in [1.0, -1.0] {
                for sp in [1.0, -1.0] {
                    if (st, sp) != first {
                        patterns.push((st, sp));
                    }
                }
            }
            for (st, sp) in patterns {
                if st == 0.0 || sp == 0.0 {
                    continue;
                }
                let denom = 1.0 - separation * st * k * k;
                if denom == 0.0 {
                    continue;
                }
                let td = (a - separation * k * sp * s * bphi) / denom;
                let pd = bphi - sp * st * k * td / s;
                let ok_t = td == 0.0 || sgn(td) == st;
                let ok_p = pd == 0.0 || sgn(pd) == sp;
                if ok_t && ok_p {
                    return (td, pd);
                }
            }
            (a, bphi)
        }
    }
}

/// Time derivative of `(theta_e, phi_e, theta_n, phi_n, phase_e)`.
pub fn cqd_rhs(state: &SpinState, field: [f64; 3], atom: &AtomParams, config: &DynamicsConfig) -> [f64; 5] {
    let k = config.effective_k();
    let b_n = if config.include_b_n { atom.b_n } else { 0.0 };
    let b_e = if config.include_b_e { atom.b_e } else { 0.0 };
    let SpinState {
        theta_e,
        phi_e,
        theta_n,
        phi_n,
        ..
    } = *state;

    let (te_dot, pe_dot) = {
        let (a, bphi) = precession(atom.gamma_e, theta_e, phi_e, field, (b_n, theta_n, phi_n));
        if on_pole(theta_e) {
            (a, 0.0)
        } else {
            with_induction(config.physics, k, theta_e, a, bphi, sgn(theta_n - theta_e))
        }
    };
    let (tn_dot, pn_dot) = if config.freeze_nucleus {
        (0.0, 0.0)
    } else {
        let (a, bphi) = precession(atom.gamma_n, theta_n, phi_n, field, (b_e, theta_e, phi_e));
        if on_pole(theta_n) {
            (a, 0.0)
        } else {
            with_induction(config.physics, k, theta_n, a, bphi, sgn(theta_e - theta_n))
        }
    };
    [te_dot, pe_dot, tn_dot, pn_dot, pe_dot.abs()]
}

/// Maps a polar angle that stepped past a pole back into `[0, pi]`,
/// shifting the azimuth by half a turn, then clamps off the exact pole.
fn fold_polar(theta: &mut f64, phi: &mut f64) {
    if *theta < 0.0 {
        *theta = -*theta;
        *phi += PI;
    } else if *theta > PI {
        *theta = 2.0 * PI - *theta;
        *phi += PI;
    }
    *theta = theta.clamp(POLE_GUARD, PI - POLE_GUARD);
    *phi = phi.rem_euclid(2.0 * PI);
}

/// Integrates the equations of motion over `t_span`, returning every
/// accepted step as `(t, state)`.
pub fn integrate_spin<F>(
    state0: SpinState,
    field_fn: F,
    t_span: (f64, f64),
    atom: &AtomParams,
    config: &DynamicsConfig,
    tol: f64,
) -> Result<Vec<(f64, SpinState)>>
where
    F: Fn(f64) -> [f64; 3],
{
    let mut trajectory = Vec::new();
    integrate_spin_with(state0, field_fn, t_span, atom, config, tol, |t, s| trajectory.push((t, s)))?;
    Ok(trajectory)
}

/// Like [`integrate_spin`] but streams states to `observe` and returns only
/// the final state.
pub fn integrate_spin_with<F, O>(
    state0: SpinState,
    field_fn: F,
    t_span: (f64, f64),
    atom: &AtomParams,
    config: &DynamicsConfig,
    tol: f64,
    mut observe: O,
) -> Result<SpinState>
where
    F: Fn(f64) -> [f64; 3],
    O: FnMut(f64, SpinState),
{
    config.validate()?;
    if !(tol > 0.0) {
        return Err(CqdError::domain(format!("tolerance must be positive, got {tol}")));
    }
    let check = |name: &str, v: f64| {
        if (0.0..=PI).contains(&v) {
            Ok(())
        } else {
            Err(CqdError::domain(format!("{name} = {v} outside [0, pi]")))
        }
    };
    check("theta_e", state0.theta_e)?;
    check("theta_n", state0.theta_n)?;
    let y0 = state0.to_array();
    let control = StepControl::with_tol(tol);
    let rhs = |t: f64, y: &[f64; 5]| cqd_rhs(&SpinState::from_array(y), field_fn(t), atom, config);
    let project = |y: &mut [f64; 5]| {
        for i in [0, 2] {
            let (mut theta, mut phi) = (y[i], y[i + 1]);
            fold_polar(&mut theta, &mut phi);
            y[i] = theta;
            y[i + 1] = phi;
        }
    };
    let y = integrate(rhs, t_span.0, y0, t_span.1, &control, project, |t, y| {
        observe(t, SpinState::from_array(y))
    })?;
    Ok(SpinState::from_array(&y))
}

/// Collapse branch: +1 toward +z, -1 toward -z, 0 at an exact tie.
pub fn branch(theta_n: f64, theta_e: f64) -> i8 {
    sgn(theta_n - theta_e) as i8
}

/// Polar angle after the electron traverses `delta_phi` of azimuth under
/// induction with the given branch sign.
pub fn collapse_envelope(theta0: f64, k_i: f64, delta_phi: f64, sign: f64) -> f64 {
    2.0 * ((theta0 / 2.0).tan() * (-sign * k_i * delta_phi.abs()).exp()).atan()
}

/// Number of precession cycles and time for one e-fold of `tan(theta/2)`.
///
/// `k_i = 0` (or `omega = 0`) yields infinite values rather than an error.
pub fn collapse_times(k_i: f64, omega: f64) -> Result<(f64, f64)> {
    if !(k_i >= 0.0) {
        return Err(CqdError::domain(format!("k_i must be non-negative, got {k_i}")));
    }
    if k_i == 0.0 {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    Ok((1.0 / (2.0 * PI * k_i), 1.0 / (k_i * omega.abs())))
}
