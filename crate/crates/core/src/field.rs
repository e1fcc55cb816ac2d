//! Quadrupole model of the field near the null point of the inner rotation
//! chamber, and the wire field along the beam.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::atom::{ApparatusParams, MU0};
use crate::error::{CqdError, Result};

/// Field near the null point at a given wire current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChamberField {
    /// Field gradient, T/m.
    pub gradient: f64,
    /// Transverse field at the beam, T.
    pub b_y: f64,
    /// Remnant field used to place the null point, T.
    pub b_r_eff: f64,
    /// Wire current, A.
    pub current: f64,
}

/// Remnant field shifted by the projection of the nuclear field.
pub fn corrected_remnant(b_r: f64, b_n: f64, theta_n: f64) -> f64 {
    b_r + b_n * theta_n.cos()
}

/// Quadrupole gradient and transverse field for the apparatus current.
pub fn chamber_field(apparatus: &ApparatusParams, b_r_eff: f64) -> Result<ChamberField> {
    let current = apparatus.current;
    if !(current > 0.0) {
        return Err(CqdError::domain(format!("wire current must be positive, got {current}")));
    }
    let gradient = 2.0 * PI * b_r_eff * b_r_eff / (MU0 * current);
    Ok(ChamberField {
        gradient,
        b_y: gradient * apparatus.z_a,
        b_r_eff,
        current,
    })
}

/// `(B_x, B_y, B_z)` seen by an atom moving at speed `v`, `t = 0` at the
/// null point.
pub fn quadrupole_at(field: &ChamberField, t: f64, v: f64) -> [f64; 3] {
    [0.0, field.b_y, field.gradient * v * t]
}

/// Peak wire field at the beam, directly above the wire.
pub fn wire_field_peak(current: f64, z_a: f64) -> f64 {
    MU0 * current / (2.0 * PI * z_a)
}

/// Longitudinal wire field along the flight at time `t` (zero overhead).
pub fn wire_bz(current: f64, z_a: f64, v: f64, t: f64) -> f64 {
    let s = v * t / z_a;
    wire_field_peak(current, z_a) * s / (1.0 + s * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{frisch_segre, potassium39};

    #[test]
    fn remnant_correction_for_heart_mean() {
        let k = potassium39();
        let b = corrected_remnant(0.42e-4, k.b_n, 5.0 * PI / 8.0);
        assert!((b - 0.42e-4 - (-0.045e-4)).abs() < 0.001e-4);
        assert_eq!(corrected_remnant(0.42e-4, 0.0, 1.3), 0.42e-4);
    }

    #[test]
    fn gradient_identity_and_scaling() {
        let a = frisch_segre();
        let f1 = chamber_field(&a.with_current(0.1), 0.375e-4).unwrap();
        let f2 = chamber_field(&a.with_current(0.2), 0.375e-4).unwrap();
        assert!((f1.gradient * MU0 * f1.current / (2.0 * PI * f1.b_r_eff.powi(2)) - 1.0).abs() < 1e-14);
        assert!((f1.b_y / f2.b_y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_current_rejected() {
        let a = frisch_segre().with_current(0.0);
        assert!(chamber_field(&a, 1e-5).is_err());
    }

    #[test]
    fn quadrupole_odd_in_time() {
        let a = frisch_segre();
        let f = chamber_field(&a, 0.42e-4).unwrap();
        let t = a.z_a / a.v;
        assert!((quadrupole_at(&f, t, a.v)[2] - f.b_y).abs() < 1e-18);
        assert_eq!(quadrupole_at(&f, -t, a.v)[2], -quadrupole_at(&f, t, a.v)[2]);
        assert_eq!(quadrupole_at(&f, 0.0, a.v), [0.0, f.b_y, 0.0]);
    }

    #[test]
    fn wire_profile_peaks_at_one_z_a() {
        let (i, z, v) = (0.5, 1.05e-4, 800.0);
        let peak = wire_bz(i, z, v, z / v);
        assert!((peak - wire_field_peak(i, z) / 2.0).abs() < 1e-15);
        assert_eq!(wire_bz(i, z, v, 0.0), 0.0);
    }
}
