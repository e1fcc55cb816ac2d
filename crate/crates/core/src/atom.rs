//! Physical constants of the modeled atom and of the Frisch–Segrè apparatus.
//!
//! All quantities are SI: tesla, joule per tesla, metre, second, ampere.
//! Gauss appears only at I/O boundaries via [`GAUSS`].

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CqdError, Result};

/// Vacuum permeability, H/m.
pub const MU0: f64 = 4.0e-7 * PI;

/// One gauss in tesla.
pub const GAUSS: f64 = 1.0e-4;

/// Top-hat torque-averaged coefficient, in units of mu0 / (pi R^3).
pub const KAPPA_TOPHAT_TORQUE: f64 = 5.0 / 16.0;

/// Constants of the modeled atom.
///
/// `gamma_e` is stored signed (negative for the electron); formulas that need
/// its magnitude call `.abs()` explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomParams {
    /// Electron gyromagnetic ratio, rad/(s T).
    pub gamma_e: f64,
    /// Nuclear gyromagnetic ratio, rad/(s T).
    pub gamma_n: f64,
    /// Electron magnetic moment magnitude, J/T.
    pub mu_e: f64,
    /// Nuclear magnetic moment magnitude, J/T.
    pub mu_n: f64,
    /// Van der Waals radius, m.
    pub radius: f64,
    /// Internal field from the nucleus acting on the electron, T.
    pub b_n: f64,
    /// Internal field from the electron acting on the nucleus, T.
    pub b_e: f64,
}

/// Geometry and fields of the inner rotation chamber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApparatusParams {
    /// Beam-to-wire vertical distance, m.
    pub z_a: f64,
    /// Most likely atom speed, m/s.
    pub v: f64,
    /// Remnant fringe field along +z, T.
    pub b_r: f64,
    /// Path length through the inner rotation chamber, m.
    pub flight_path: f64,
    /// Wire current, A.
    pub current: f64,
}

impl ApparatusParams {
    /// Total flight time through the chamber.
    pub fn flight_time(&self) -> f64 {
        self.flight_path / self.v
    }

    pub fn with_current(mut self, current: f64) -> Self {
        self.current = current;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("z_a", self.z_a),
            ("v", self.v),
            ("b_r", self.b_r),
            ("flight_path", self.flight_path),
            ("current", self.current),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(CqdError::domain(format!(
                    "apparatus {name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for ApparatusParams {
    fn default() -> Self {
        frisch_segre()
    }
}

impl Default for AtomParams {
    fn default() -> Self {
        potassium39()
    }
}

/// Internal fields `(b_n, b_e)` from the moments of `atom` with coefficient
/// `kappa` in units of `mu0 / (pi R^3)`.
pub fn internal_fields(atom: &AtomParams, kappa: f64) -> Result<(f64, f64)> {
    if !(atom.radius > 0.0) {
        return Err(CqdError::domain(format!(
            "radius must be positive, got {}",
            atom.radius
        )));
    }
    if !(kappa > 0.0) {
        return Err(CqdError::domain(format!("kappa must be positive, got {kappa}")));
    }
    let r = atom.radius;
    let prefactor = kappa * MU0 / (PI * r * r * r);
    Ok((prefactor * atom.mu_n, prefactor * atom.mu_e))
}

/// Potassium-39 with top-hat torque-averaged internal fields.
pub fn potassium39() -> AtomParams {
    let mut atom = AtomParams {
        gamma_e: -1.761e11,
        gamma_n: 1.250e7,
        mu_e: 9.285e-24,
        mu_n: 1.977e-27,
        radius: 2.75e-10,
        b_n: 0.0,
        b_e: 0.0,
    };
    let (b_n, b_e) = internal_fields(&atom, KAPPA_TOPHAT_TORQUE).expect("positive radius");
    atom.b_n = b_n;
    atom.b_e = b_e;
    atom
}

/// Frisch–Segrè inner rotation chamber at a wire current of 0.1 A.
pub fn frisch_segre() -> ApparatusParams {
    ApparatusParams {
        z_a: 1.05e-4,
        v: 800.0,
        b_r: 0.42e-4,
        flight_path: 16.3e-3,
        current: 0.1,
    }
}

/// Optional per-field overrides of [`AtomParams`].
///
/// Internal fields are recomputed from the (possibly overridden) moments and
/// radius with the selected kappa unless `b_n` / `b_e` are given explicitly.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomOverrides {
    pub gamma_e: Option<f64>,
    pub gamma_n: Option<f64>,
    pub mu_e: Option<f64>,
    pub mu_n: Option<f64>,
    pub radius: Option<f64>,
    pub b_n: Option<f64>,
    pub b_e: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApparatusOverrides {
    pub z_a: Option<f64>,
    pub v: Option<f64>,
    pub b_r: Option<f64>,
    pub flight_path: Option<f64>,
    pub current: Option<f64>,
}

/// Parameter file contents: `[atom]`, `[apparatus]` tables and `kappa`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    #[serde(default)]
    pub atom: AtomOverrides,
    #[serde(default)]
    pub apparatus: ApparatusOverrides,
    pub kappa: Option<f64>,
}

impl ParamsFile {
    /// Parses JSON when the text starts with `{`, TOML otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| CqdError::Config(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| CqdError::Config(e.to_string()))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CqdError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or(KAPPA_TOPHAT_TORQUE)
    }

    pub fn resolve_atom(&self) -> Result<AtomParams> {
        let base = potassium39();
        let o = &self.atom;
        let mut atom = AtomParams {
            gamma_e: o.gamma_e.unwrap_or(base.gamma_e),
            gamma_n: o.gamma_n.unwrap_or(base.gamma_n),
            mu_e: o.mu_e.unwrap_or(base.mu_e),
            mu_n: o.mu_n.unwrap_or(base.mu_n),
            radius: o.radius.unwrap_or(base.radius),
            b_n: 0.0,
            b_e: 0.0,
        };
        let (b_n, b_e) = internal_fields(&atom, self.kappa())?;
        atom.b_n = o.b_n.unwrap_or(b_n);
        atom.b_e = o.b_e.unwrap_or(b_e);
        Ok(atom)
    }

    pub fn resolve_apparatus(&self) -> Result<ApparatusParams> {
        let base = frisch_segre();
        let o = &self.apparatus;
        let apparatus = ApparatusParams {
            z_a: o.z_a.unwrap_or(base.z_a),
            v: o.v.unwrap_or(base.v),
            b_r: o.b_r.unwrap_or(base.b_r),
            flight_path: o.flight_path.unwrap_or(base.flight_path),
            current: o.current.unwrap_or(base.current),
        };
        apparatus.validate()?;
        Ok(apparatus)
    }
}
