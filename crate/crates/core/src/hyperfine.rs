//! Internal-field coefficients from radial electron densities.
//!
//! A coefficient `kappa` expresses the field of one moment at the other as
//! `B = kappa * mu0 / (pi R^3) * mu`, where `R` is the mean radius of the
//! density. Densities are stored in reduced units (radius in `R`, density
//! in `1/R^3`), so `kappa` is independent of the physical scale.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::atom::potassium39;
use crate::error::{CqdError, Result};
use crate::quad::{adaptive_simpson, gauss_legendre8, trapezoid};

/// Normalized radial function `P(r)` of the potassium 4s orbital from
/// Hartree's self-consistent field, as `(r / a0, P)` pairs.
pub const HARTREE_4S_TABLE: [(f64, f64); 82] = [
    (0.000, 0.0000), (0.005, 0.0142), (0.010, 0.0257), (0.015, 0.0349),
    (0.020, 0.0421), (0.030, 0.0509), (0.040, 0.0540), (0.050, 0.0527),
    (0.060, 0.0480), (0.070, 0.0409), (0.080, 0.0321), (0.090, 0.0220),
    (0.100, 0.0113), (0.120, -0.0108), (0.140, -0.0321), (0.160, -0.0511),
    (0.180, -0.0673), (0.200, -0.0801), (0.220, -0.0896), (0.240, -0.0958),
    (0.260, -0.0989), (0.280, -0.0993), (0.300, -0.0972), (0.350, -0.0830),
    (0.400, -0.0598), (0.450, -0.0312), (0.500, -0.0003), (0.550, 0.0307),
    (0.600, 0.0601), (0.700, 0.1105), (0.800, 0.1465), (0.900, 0.1679),
    (1.000, 0.1761), (1.100, 0.1734), (1.200, 0.1623), (1.400, 0.1226),
    (1.600, 0.0699), (1.800, 0.0119), (2.000, -0.0470), (2.200, -0.1040),
    (2.400, -0.1578), (2.600, -0.2074), (2.800, -0.2524), (3.000, -0.2926),
    (3.200, -0.3279), (3.400, -0.3583), (3.600, -0.3840), (3.800, -0.4052),
    (4.000, -0.4221), (4.500, -0.4476), (5.000, -0.4530), (5.500, -0.4430),
    (6.000, -0.4220), (6.500, -0.3937), (7.000, -0.3609), (7.500, -0.3264),
    (8.000, -0.2916), (8.500, -0.2578), (9.000, -0.2261), (9.500, -0.1967),
    (10.000, -0.1700), (11.000, -0.1246), (12.000, -0.0896), (13.000, -0.0634),
    (14.000, -0.0443), (15.000, -0.0305), (16.000, -0.0209), (17.000, -0.0138),
    (18.000, -0.0095), (19.000, -0.0063), (20.000, -0.0042), (21.000, -0.0028),
    (22.000, -0.0018), (23.000, -0.0012), (24.000, -0.0008), (25.000, -0.0005),
    (26.000, -0.0003), (27.000, -0.0002), (28.000, -0.0001), (29.000, -0.0001),
    (30.000, 0.0000), (31.000, 0.0000),
];

/// `|psi_s(0)|^2 * a0^3` for the tabulated orbital.
pub const HARTREE_4S_CENTER: f64 = 9.76 / (4.0 * PI);

/// Relative tolerance of the adaptive radial quadrature.
const RADIAL_TOL: f64 = 1e-8;

/// Allowed deviation of the probability normalization from one.
const NORM_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    Gaussian,
    Tabulated,
    TopHat,
}

impl DensityKind {
    pub fn name(self) -> &'static str {
        match self {
            DensityKind::Gaussian => "gaussian",
            DensityKind::Tabulated => "tabulated",
            DensityKind::TopHat => "tophat",
        }
    }
}

/// Spherically symmetric electron density with mean radius `scale_radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDensity {
    pub kind: DensityKind,
    /// Mean radius `R`, m.
    pub scale_radius: f64,
    /// Ascending radii in units of `R` (tabulated densities only).
    radii: Vec<f64>,
    /// Density at `radii` in units of `1/R^3`.
    values: Vec<f64>,
    /// Density at the origin in units of `1/R^3`.
    center: f64,
}

/// Gaussian width in units of the mean radius, from `<r> = 2a/sqrt(pi) = R`.
fn gaussian_width() -> f64 {
    PI.sqrt() / 2.0
}

impl RadialDensity {
    /// Gaussian density whose mean radius equals `scale_radius`.
    pub fn gaussian(scale_radius: f64) -> Self {
        let a = gaussian_width();
        RadialDensity {
            kind: DensityKind::Gaussian,
            scale_radius,
            radii: Vec::new(),
            values: Vec::new(),
            center: (PI * a * a).powf(-1.5),
        }
    }

    /// Uniform density filling a sphere.
    ///
    /// The sphere radius is taken equal to `scale_radius` itself, following
    /// the usual top-hat convention for the atomic radius.
    pub fn tophat(scale_radius: f64) -> Self {
        RadialDensity {
            kind: DensityKind::TopHat,
            scale_radius,
            radii: Vec::new(),
            values: Vec::new(),
            center: 3.0 / (4.0 * PI),
        }
    }

    /// Density from a radial-function table `(r / a0, P)` with `P` normalized
    /// so that `integral P^2 dr = 1` and central density `center` (in
    /// `1/a0^3`). The grid is rescaled so that the mean radius equals
    /// `scale_radius`.
    pub fn from_radial_table(points: &[(f64, f64)], center: f64, scale_radius: f64) -> Result<Self> {
        if points.len() < 3 {
            return Err(CqdError::domain("radial table needs at least 3 points"));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) || points[0].0 < 0.0 {
            return Err(CqdError::domain("radial table radii must be non-negative and strictly ascending"));
        }
        if !(center >= 0.0 && center.is_finite()) {
            return Err(CqdError::domain(format!("central density must be non-negative, got {center}")));
        }
        if !(scale_radius > 0.0) {
            return Err(CqdError::domain(format!("scale radius must be positive, got {scale_radius}")));
        }
        let x: Vec<f64> = points.iter().map(|p| p.0).collect();
        let p2: Vec<f64> = points.iter().map(|p| p.1 * p.1).collect();
        let norm = trapezoid(&x, &p2);
        let first: Vec<f64> = x.iter().zip(&p2).map(|(x, p)| x * p).collect();
        let mean = trapezoid(&x, &first) / norm;
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(CqdError::domain("radial table has no weight away from the origin"));
        }
        let scale3 = mean.powi(3);
        let radii = x.iter().map(|x| x / mean).collect();
        let values = x
            .iter()
            .zip(&p2)
            .map(|(&x, &p)| if x == 0.0 { center * scale3 } else { p / (4.0 * PI * x * x) * scale3 })
            .collect();
        Ok(RadialDensity {
            kind: DensityKind::Tabulated,
            scale_radius,
            radii,
            values,
            center: center * scale3,
        })
    }

    /// Ascending `(r, rho)` samples in SI units (m, 1/m^3). Empty for the
    /// analytic densities.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        let r3 = self.scale_radius.powi(3);
        self.radii
            .iter()
            .zip(&self.values)
            .map(|(r, rho)| (r * self.scale_radius, rho / r3))
            .collect()
    }

    /// Density at reduced radius `r` (units of `R`), in `1/R^3`.
    pub fn reduced(&self, r: f64) -> f64 {
        match self.kind {
            DensityKind::Gaussian => {
                let a = gaussian_width();
                self.center * (-(r * r) / (a * a)).exp()
            }
            DensityKind::TopHat => {
                if r <= 1.0 {
                    self.center
                } else {
                    0.0
                }
            }
            DensityKind::Tabulated => {
                let i = self.radii.partition_point(|&x| x <= r);
                if i == 0 {
                    self.values[0]
                } else if i == self.radii.len() {
                    0.0
                } else {
                    let (x0, x1) = (self.radii[i - 1], self.radii[i]);
                    let t = (r - x0) / (x1 - x0);
                    self.values[i - 1] * (1.0 - t) + self.values[i] * t
                }
            }
        }
    }

    /// Density at the origin in reduced units, i.e. `rho(0) * R^3`.
    pub fn central_reduced(&self) -> f64 {
        self.center
    }

    /// `integral rho * r^power * 4 pi r^2 dr` in reduced units.
    pub fn shell_moment(&self, power: i32) -> Result<f64> {
        self.radial_integral(|r| 4.0 * PI * r.powi(power + 2))
    }

    /// `integral rho(r) * weight(r) dr`: trapezoid on the table grid,
    /// adaptive Simpson for the analytic shapes.
    fn radial_integral<F: Fn(f64) -> f64>(&self, weight: F) -> Result<f64> {
        match self.kind {
            DensityKind::Tabulated => {
                let y: Vec<f64> = self
                    .radii
                    .iter()
                    .zip(&self.values)
                    .map(|(&r, &rho)| rho * weight(r))
                    .collect();
                Ok(trapezoid(&self.radii, &y))
            }
            DensityKind::TopHat => adaptive_simpson(&|r| self.reduced(r) * weight(r), 0.0, 1.0, RADIAL_TOL),
            DensityKind::Gaussian => {
                let upper = 12.0 * gaussian_width();
                adaptive_simpson(&|r| self.reduced(r) * weight(r), 0.0, upper, RADIAL_TOL)
            }
        }
    }

    /// Checks the probability normalization and non-negativity.
    pub fn validate(&self) -> Result<()> {
        if self.values.iter().any(|&v| v < 0.0) || self.center < 0.0 {
            return Err(CqdError::domain("density must be non-negative"));
        }
        let norm = self.shell_moment(0)?;
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(CqdError::domain(format!(
                "density normalization {norm} deviates from 1 by more than {NORM_TOL}"
            )));
        }
        Ok(())
    }
}

/// The tabulated potassium 4s density, scaled to the potassium-39 radius.
pub fn load_hartree_table() -> RadialDensity {
    RadialDensity::from_radial_table(&HARTREE_4S_TABLE, HARTREE_4S_CENTER, potassium39().radius)
        .expect("embedded table is well formed")
}

/// Angular integrals at radius `r` for unit density, unit angular velocity
/// about z and a unit nuclear moment along x (with `mu0 = 1`).
///
/// Returns `(torque_y, moment_z)`: the y component of the torque exerted on
/// the circulating-current moment by the point-dipole field (contact term
/// excluded), and the z component of that moment, each integrated over the
/// solid angle.
fn shell_torque(r: f64) -> (f64, f64) {
    const AZIMUTH_POINTS: usize = 16;
    if r == 0.0 {
        return (0.0, 0.0);
    }
    let r3 = r * r * r;
    let azimuth = |cos_t: f64, component: usize| -> f64 {
        let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
        let dphi = 2.0 * PI / AZIMUTH_POINTS as f64;
        let mut sum = 0.0;
        for k in 0..AZIMUTH_POINTS {
            let phi = k as f64 * dphi;
            let u = [sin_t * phi.cos(), sin_t * phi.sin(), cos_t];
            let p = [r * u[0], r * u[1], r * u[2]];
            // Current density of a negative charge cloud rotating about z.
            let j = [p[1], -p[0], 0.0];
            let dm = scale(cross(p, j), 0.5);
            let b = [
                (3.0 * u[0] * u[0] - 1.0) / (4.0 * PI * r3),
                3.0 * u[0] * u[1] / (4.0 * PI * r3),
                3.0 * u[0] * u[2] / (4.0 * PI * r3),
            ];
            sum += if component == 0 { cross(dm, b)[1] } else { dm[2] };
        }
        sum * dphi
    };
    let torque = gauss_legendre8(|c| azimuth(c, 0), -1.0, 0.0) + gauss_legendre8(|c| azimuth(c, 0), 0.0, 1.0);
    let moment = gauss_legendre8(|c| azimuth(c, 1), -1.0, 0.0) + gauss_legendre8(|c| azimuth(c, 1), 0.0, 1.0);
    (torque, moment)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Torque-averaged coefficient: the uniform field that exerts the same torque
/// on the electron cloud's orbital moment as the nuclear dipole field does
/// volumetrically.
pub fn torque_avg_coefficient(density: &RadialDensity) -> Result<f64> {
    density.validate()?;
    let torque = density.radial_integral(|r| r * r * shell_torque(r).0)?;
    let moment = density.radial_integral(|r| r * r * shell_torque(r).1)?;
    if moment == 0.0 || !torque.is_finite() {
        return Err(CqdError::numeric("torque integral degenerate: zero orbital moment"));
    }
    // tau = m x B_eff with m along z and B_eff along x gives tau_y = m_z B_eff.
    Ok(PI * torque / moment)
}

/// Self-averaged (contact) coefficient `(2/3) rho(0) pi R^3`.
pub fn self_avg_coefficient(density: &RadialDensity) -> Result<f64> {
    density.validate()?;
    Ok(2.0 / 3.0 * density.central_reduced() * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_shapes_normalized_with_unit_mean_radius() {
        for d in [RadialDensity::gaussian(1.0), RadialDensity::tophat(1.0)] {
            assert!((d.shell_moment(0).unwrap() - 1.0).abs() < 1e-8);
        }
        let g = RadialDensity::gaussian(1.0);
        assert!((g.shell_moment(1).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn hartree_mean_radius_is_unit() {
        let d = load_hartree_table();
        let norm = d.shell_moment(0).unwrap();
        assert!((d.shell_moment(1).unwrap() / norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_is_si() {
        let d = load_hartree_table();
        let g = d.grid();
        assert_eq!(g.len(), 82);
        assert_eq!(g[0].0, 0.0);
        assert!(g.last().unwrap().0 > 4.0 * d.scale_radius);
    }

    #[test]
    fn unnormalized_rejected() {
        let pts = [(0.0, 0.0), (1.0, 2.0), (2.0, 0.0)];
        let d = RadialDensity::from_radial_table(&pts, 0.0, 1.0).unwrap();
        assert!(matches!(torque_avg_coefficient(&d), Err(CqdError::Domain(_))));
    }

    #[test]
    fn descending_grid_rejected() {
        let pts = [(0.0, 0.0), (2.0, 1.0), (1.0, 0.0)];
        assert!(RadialDensity::from_radial_table(&pts, 0.0, 1.0).is_err());
    }
}
