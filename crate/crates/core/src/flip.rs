//! Analytic spin-flip chain for the inner rotation chamber.
//!
//! Curves, from crudest to fullest model:
//!
//! * `W_m = exp(-pi k_m / 2)` and its fourth-root revision `W_m^(1/4) / 4`;
//! * `W1 = exp(-pi k_m)`, the heart-shaped co-quanta squaring `W_m`;
//! * `W2 = exp(-pi k0)` with the remnant field shifted by the nuclear field;
//! * `W3 = exp(-pi sqrt(k0^2 + k0 k1))` adding the transverse nuclear field;
//! * `W4 = W3 exp(-(pi k1)^2 f_r1 / 2)` adding nuclear-resonant rotation;
//! * `W_cqd = W4 exp(-c_ri I)` adding induction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::atom::{ApparatusParams, AtomParams, MU0};
use crate::error::{CqdError, Result};
use crate::field::{chamber_field, corrected_remnant};
use crate::parallel::Execution;
use crate::quad::golden_min;

/// Mean polar angle of heart-distributed co-quanta.
pub const HEART_MEAN_THETA: f64 = 5.0 * PI / 8.0;

/// Dimensionless parameters at one wire current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityParams {
    /// From the uncorrected remnant field.
    pub k_m: f64,
    /// From the corrected remnant field.
    pub k0: f64,
    /// From the transverse nuclear field.
    pub k1: f64,
    /// Nuclear azimuthal rate in units of the chirp time.
    pub w_n: f64,
    /// Fraction of a nuclear Larmor period spent on the resonant path.
    pub f_r1: f64,
    pub current: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlipCoefficients {
    /// Null-point rotation, A.
    pub c_r0: f64,
    /// Rotation saturation.
    pub c_rs: f64,
    /// Nuclear-resonant rotation, 1/A^3.
    pub c_r1: f64,
    /// Induction, multiplies the current in the exponent.
    pub c_ri: f64,
}

/// One current of the flip-fraction family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlipRow {
    pub current: f64,
    pub k_m: f64,
    pub k0: f64,
    pub k1: f64,
    pub f_r1: f64,
    pub w_m: f64,
    pub w_rabi: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w_cqd: f64,
}

impl FlipRow {
    pub const HEADER: [&'static str; 12] =
        ["I", "k_m", "k0", "k1", "f_r1", "W_m", "W_rabi", "W1", "W2", "W3", "W4", "W_cqd"];

    pub fn values(&self) -> [f64; 12] {
        [
            self.current,
            self.k_m,
            self.k0,
            self.k1,
            self.f_r1,
            self.w_m,
            self.w_rabi,
            self.w1,
            self.w2,
            self.w3,
            self.w4,
            self.w_cqd,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipCurve {
    pub rows: Vec<FlipRow>,
}

/// Exponents of the full flip fraction at one current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    /// Null-point rotation.
    pub e_r0: f64,
    /// Nuclear-resonant rotation.
    pub e_r1: f64,
    /// Induction.
    pub e_i: f64,
    /// Effective null-point path length `pi y_r0`, m.
    pub pi_y_r0: f64,
    /// Effective resonant path length `pi y_r1`, m.
    pub pi_y_r1: f64,
    pub f_r1: f64,
}

/// Model parameters shared by a current sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipModel {
    pub atom: AtomParams,
    pub apparatus: ApparatusParams,
    pub theta_n_mean: f64,
    pub k_i: f64,
}

impl FlipModel {
    pub fn new(atom: AtomParams, apparatus: ApparatusParams) -> Self {
        FlipModel {
            atom,
            apparatus,
            theta_n_mean: HEART_MEAN_THETA,
            k_i: 0.0,
        }
    }

    pub fn with_k_i(mut self, k_i: f64) -> Self {
        self.k_i = k_i;
        self
    }

    pub fn row(&self, current: f64) -> Result<FlipRow> {
        w_chain(current, &self.atom, &self.apparatus, self.theta_n_mean, self.k_i)
    }

    pub fn coefficients(&self) -> FlipCoefficients {
        coefficients(&self.atom, &self.apparatus, self.theta_n_mean, self.k_i)
    }
}

fn transverse_nuclear(atom: &AtomParams, theta_n_mean: f64) -> f64 {
    atom.b_n * theta_n_mean.sin()
}

fn check_current(current: f64) -> Result<()> {
    if !(current > 0.0 && current.is_finite()) {
        return Err(CqdError::domain(format!("wire current must be positive, got {current}")));
    }
    Ok(())
}

/// Nuclear Larmor period in the electron's field.
pub fn nuclear_period(atom: &AtomParams) -> f64 {
    2.0 * PI / (atom.gamma_n * atom.b_e)
}

pub fn adiabaticity(current: f64, atom: &AtomParams, apparatus: &ApparatusParams, theta_n_mean: f64) -> Result<AdiabaticityParams> {
    check_current(current)?;
    let app = apparatus.with_current(current);
    let ge = atom.gamma_e.abs();
    let scale = app.z_a / app.v * ge;
    let bare = chamber_field(&app, app.b_r)?;
    let shifted = chamber_field(&app, corrected_remnant(app.b_r, atom.b_n, theta_n_mean))?;
    let bt = transverse_nuclear(atom, theta_n_mean);
    let k1 = scale * bt * bt / shifted.b_y;
    let y_r1 = app.z_a * bt / shifted.b_y;
    let omega_n = atom.gamma_n * atom.b_e;
    Ok(AdiabaticityParams {
        k_m: scale * bare.b_y,
        k0: scale * shifted.b_y,
        k1,
        w_n: 2.0 * omega_n / (ge * shifted.gradient * app.v).sqrt(),
        f_r1: PI * y_r1 / (app.v * nuclear_period(atom)),
        current,
    })
}

/// Majorana's nonadiabatic flip probability.
pub fn majorana(k_m: f64) -> f64 {
    (-PI * k_m.abs() / 2.0).exp()
}

/// Rabi's revision for nuclear spin 3/2.
pub fn rabi_revised(w_m: f64) -> f64 {
    w_m.powf(0.25) / 4.0
}

/// Induction coefficient per unit induction factor.
pub fn induction_scale(atom: &AtomParams, apparatus: &ApparatusParams) -> f64 {
    let a = apparatus;
    2.0 * MU0 * atom.gamma_e.abs() / (PI * a.v) * (a.flight_time() * a.v / (2.0 * a.z_a)).ln()
}

pub fn coefficients(atom: &AtomParams, apparatus: &ApparatusParams, theta_n_mean: f64, k_i: f64) -> FlipCoefficients {
    let a = apparatus;
    let ge = atom.gamma_e.abs();
    let br = corrected_remnant(a.b_r, atom.b_n, theta_n_mean);
    let bt = transverse_nuclear(atom, theta_n_mean);
    FlipCoefficients {
        c_r0: 2.0 * PI * PI * ge * br * br * a.z_a * a.z_a / (MU0 * a.v),
        c_rs: PI * ge * bt * a.z_a / a.v,
        c_r1: MU0.powi(3) * ge * ge * atom.gamma_n * atom.b_e * bt.powi(5) / (32.0 * PI * a.v.powi(3) * br.powi(6)),
        c_ri: k_i * induction_scale(atom, apparatus),
    }
}

/// Full flip fraction written with the current coefficients.
pub fn w_cqd_from_coefficients(c: &FlipCoefficients, current: f64) -> f64 {
    let i = current;
    (-((c.c_r0 / i).powi(2) + c.c_rs * c.c_rs).sqrt() - c.c_r1 * i.powi(3) - c.c_ri * i).exp()
}

pub fn w_chain(current: f64, atom: &AtomParams, apparatus: &ApparatusParams, theta_n_mean: f64, k_i: f64) -> Result<FlipRow> {
    let p = adiabaticity(current, atom, apparatus, theta_n_mean)?;
    let w_m = majorana(p.k_m);
    let w3 = (-PI * (p.k0 * p.k0 + p.k0 * p.k1).sqrt()).exp();
    let w4 = w3 * (-0.5 * (PI * p.k1).powi(2) * p.f_r1).exp();
    let c_ri = k_i * induction_scale(atom, apparatus);
    Ok(FlipRow {
        current,
        k_m: p.k_m,
        k0: p.k0,
        k1: p.k1,
        f_r1: p.f_r1,
        w_m,
        w_rabi: rabi_revised(w_m),
        w1: (-PI * p.k_m).exp(),
        w2: (-PI * p.k0).exp(),
        w3,
        w4,
        w_cqd: w4 * (-c_ri * current).exp(),
    })
}

pub fn exponents(
    current: f64,
    atom: &AtomParams,
    apparatus: &ApparatusParams,
    theta_n_mean: f64,
    k_i: f64,
) -> Result<Exponents> {
    check_current(current)?;
    let app = apparatus.with_current(current);
    let ge = atom.gamma_e.abs();
    let shifted = chamber_field(&app, corrected_remnant(app.b_r, atom.b_n, theta_n_mean))?;
    let bt = transverse_nuclear(atom, theta_n_mean);
    let pi_y_r0 = PI * shifted.b_y / shifted.gradient;
    let pi_y_r1 = PI * bt / shifted.gradient;
    let f_r1 = pi_y_r1 / (app.v * nuclear_period(atom));
    let e_r0 = PI * app.z_a / app.v * ge * (shifted.b_y.powi(2) + bt * bt).sqrt();
    let e_r1 = 0.5 * (pi_y_r1 / app.v * ge * bt).powi(2) * f_r1;
    Ok(Exponents {
        e_r0,
        e_r1,
        e_i: k_i * induction_scale(atom, apparatus) * current,
        pi_y_r0,
        pi_y_r1,
        f_r1,
    })
}

/// `points` currents spaced uniformly in `log I` on `[i_min, i_max]`.
pub fn log_grid(i_min: f64, i_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(i_min > 0.0 && i_max > i_min) {
        return Err(CqdError::domain(format!("current range must satisfy 0 < i_min < i_max, got [{i_min}, {i_max}]")));
    }
    if points < 2 {
        return Err(CqdError::domain("a scan needs at least 2 points"));
    }
    let (a, b) = (i_min.ln(), i_max.ln());
    Ok((0..points)
        .map(|k| {
            if k == 0 {
                i_min
            } else if k + 1 == points {
                i_max
            } else {
                (a + (b - a) * k as f64 / (points - 1) as f64).exp()
            }
        })
        .collect())
}

/// Evaluates the chain on a log-spaced current grid.
pub fn scan(model: &FlipModel, i_min: f64, i_max: f64, points: usize, exec: Execution) -> Result<FlipCurve> {
    let grid = log_grid(i_min, i_max, points)?;
    let rows = exec.map_slice(&grid, |&i| model.row(i));
    Ok(FlipCurve {
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

/// Location and height of the maximum of `W4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub current: f64,
    pub value: f64,
    /// Whether the grid values rise to a single interior maximum and fall.
    pub unimodal: bool,
}

impl FlipCurve {
    /// Grid maximum of `W4` refined by golden-section search in `log I`.
    pub fn w4_peak(&self, model: &FlipModel) -> Result<Peak> {
        let w: Vec<f64> = self.rows.iter().map(|r| r.w4).collect();
        let n = w.len();
        if n < 3 {
            return Err(CqdError::domain("peak search needs at least 3 grid points"));
        }
        let k = (0..n).fold(0, |best, i| if w[i] > w[best] { i } else { best });
        let unimodal = k > 0
            && k + 1 < n
            && w[..=k].windows(2).all(|p| p[1] >= p[0])
            && w[k..].windows(2).all(|p| p[1] <= p[0]);
        let lo = self.rows[k.saturating_sub(1)].current.ln();
        let hi = self.rows[(k + 1).min(n - 1)].current.ln();
        let (x, neg) = golden_min(
            |x| -model.row(x.exp()).map(|r| r.w4).unwrap_or(f64::NEG_INFINITY),
            lo,
            hi,
            1e-10,
        )?;
        Ok(Peak {
            current: x.exp(),
            value: -neg,
            unimodal,
        })
    }
}

/// Current at which `k0 = k1`, where the shifted transverse field equals the
/// transverse nuclear field. Returns `(current, B'_y there)`.
pub fn crossover(atom: &AtomParams, apparatus: &ApparatusParams, theta_n_mean: f64) -> Result<(f64, f64)> {
    let bt = transverse_nuclear(atom, theta_n_mean);
    if !(bt > 0.0) {
        return Err(CqdError::domain("no crossover without a transverse nuclear field"));
    }
    let br = corrected_remnant(apparatus.b_r, atom.b_n, theta_n_mean);
    let current = 2.0 * PI * br * br * apparatus.z_a / (MU0 * bt);
    Ok((current, bt))
}
