//! Cross-checks against quantum-mechanical results: sequential-measurement
//! uncertainty, entangled-pair anticorrelation, and two-stage measurements
//! at a varying relative angle.
//!
//! Spin quantities are reported in units of hbar/2.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ensemble::{bernoulli_mc, AngularDistribution, Branch, McEstimate};
use crate::error::{CqdError, Result};
use crate::parallel::Execution;
use crate::rng::unit_vector;

/// Outcome of a z measurement followed by an x measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub theta_ez: f64,
    pub phi_ez: f64,
    /// Expected y spin.
    pub s_y_exp: f64,
    pub delta_sz: f64,
    pub delta_sx: f64,
    /// `| delta_sz delta_sx |sin phi_ez| - |<s_y>| |`.
    pub residual: f64,
    /// `delta_sz delta_sx >= |<s_y>|`.
    pub inequality_holds: bool,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn direction(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Standard deviation of a two-outcome spin measurement with outcome
/// probabilities `p` and `1 - p`.
fn two_outcome_spread(p_plus: f64) -> f64 {
    2.0 * (p_plus * (1.0 - p_plus)).max(0.0).sqrt()
}

pub fn uncertainty_suite(theta_ez: f64, phi_ez: f64) -> Result<MeasurementRecord> {
    if !(0.0..=PI).contains(&theta_ez) {
        return Err(CqdError::domain(format!("theta_ez = {theta_ez} outside [0, pi]")));
    }
    let mu = direction(theta_ez, phi_ez);
    let theta_ey = dot(mu, [0.0, 1.0, 0.0]).clamp(-1.0, 1.0).acos();
    let s_y_exp = -theta_ey.cos();
    // The z measurement sees isotropic co-quanta.
    let p_plus_z = 1.0 - AngularDistribution::isotropic().cdf_theta(theta_ez);
    let delta_sz = two_outcome_spread(p_plus_z);
    let (p_plus_x, _) = x_split_after_z(Branch::PlusZ);
    let delta_sx = two_outcome_spread(p_plus_x);
    let lhs = delta_sz * delta_sx;
    Ok(MeasurementRecord {
        theta_ez,
        phi_ez,
        s_y_exp,
        delta_sz,
        delta_sx,
        residual: (lhs * phi_ez.sin().abs() - s_y_exp.abs()).abs(),
        // Equality holds exactly at phi = pi/2; allow rounding there.
        inequality_holds: lhs >= s_y_exp.abs() - 1e-12,
    })
}

/// Summary of [`uncertainty_suite`] over an `n x n` grid of
/// `theta in [0, pi]`, `phi in [0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyGrid {
    pub points: usize,
    pub max_residual: f64,
    pub violations: usize,
}

pub fn uncertainty_grid(n: usize) -> Result<UncertaintyGrid> {
    if n < 2 {
        return Err(CqdError::domain("uncertainty grid needs n >= 2"));
    }
    let mut max_residual: f64 = 0.0;
    let mut violations = 0;
    for i in 0..n {
        let theta = (i as f64 / (n - 1) as f64) * PI;
        for j in 0..n {
            let phi = 2.0 * PI * j as f64 / n as f64;
            let r = uncertainty_suite(theta, phi)?;
            max_residual = max_residual.max(r.residual);
            if !r.inequality_holds {
                violations += 1;
            }
        }
    }
    Ok(UncertaintyGrid {
        points: n * n,
        max_residual,
        violations,
    })
}

fn branch_distribution(branch: Branch) -> AngularDistribution {
    match branch {
        Branch::PlusZ => AngularDistribution::heart(),
        Branch::MinusZ => AngularDistribution::heart_inverted(),
    }
}

/// `(P(+x), P(-x))` after a z collapse into `branch`.
///
/// The electron then lies on the equator of the x axis, so the x outcome
/// is decided by which x hemisphere holds the co-quantum. The `cos theta_z`
/// part of the (inverted) heart density is odd under `z -> -z`, which maps
/// each x hemisphere onto itself, so both hemispheres carry half.
pub fn x_split_after_z(branch: Branch) -> (f64, f64) {
    let _ = branch;
    (0.5, 0.5)
}

/// Monte Carlo version of [`x_split_after_z`]: estimates `P(+x)`. Two
/// uniforms per sample (polar, azimuth of the co-quantum).
pub fn x_split_mc(branch: Branch, n: usize, seed: u64, exec: Execution) -> Result<McEstimate> {
    if n < 1000 {
        return Err(CqdError::domain(format!("at least 1000 samples required, got {n}")));
    }
    let dist = branch_distribution(branch);
    Ok(bernoulli_mc(n, seed, exec, |r| {
        let (t, p) = dist.sample(r);
        let co = direction(t, p);
        let theta_nx = co[0].clamp(-1.0, 1.0).acos();
        theta_nx > PI / 2.0
    }))
}

/// Atom 1's moments; atom 2 carries the antipodal moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntangledPair {
    pub mu_e1: [f64; 3],
    pub mu_n1: [f64; 3],
    /// Unit quantization axis.
    pub quant_axis: [f64; 3],
}

impl EntangledPair {
    pub fn from_angles(theta_e1: f64, phi_e1: f64, theta_n1: f64, phi_n1: f64, quant_axis: [f64; 3]) -> Self {
        EntangledPair {
            mu_e1: direction(theta_e1, phi_e1),
            mu_n1: direction(theta_n1, phi_n1),
            quant_axis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairOutcome {
    Collapsed { branch1: i8, branch2: i8 },
    /// The electron and co-quantum make equal angles with the axis.
    Undetermined,
}

fn polar_branch(mu_e: [f64; 3], mu_n: [f64; 3], axis: [f64; 3]) -> i8 {
    let te = dot(mu_e, axis).clamp(-1.0, 1.0).acos();
    let tn = dot(mu_n, axis).clamp(-1.0, 1.0).acos();
    crate::dynamics::branch(tn, te)
}

/// Collapse branches of both atoms, each evaluated from its own moments.
pub fn entangled_outcomes(pair: &EntangledPair) -> PairOutcome {
    let neg = |v: [f64; 3]| [-v[0], -v[1], -v[2]];
    let b1 = polar_branch(pair.mu_e1, pair.mu_n1, pair.quant_axis);
    let b2 = polar_branch(neg(pair.mu_e1), neg(pair.mu_n1), pair.quant_axis);
    if b1 == 0 || b2 == 0 {
        PairOutcome::Undetermined
    } else {
        PairOutcome::Collapsed { branch1: b1, branch2: b2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntangleReport {
    pub n: usize,
    /// Fraction of determined pairs whose atom 1 collapsed to +axis.
    pub plus_fraction: McEstimate,
    /// Determined pairs with `branch1 * branch2 = -1`.
    pub anticorrelated: usize,
    pub undetermined: usize,
}

/// Random isotropic moments and random axes; six uniforms per pair.
pub fn entangle_mc(n: usize, seed: u64, exec: Execution) -> Result<EntangleReport> {
    if n == 0 {
        return Err(CqdError::domain("entanglement run needs at least one pair"));
    }
    use crate::parallel::chunks;
    use crate::rng::{stream, CHUNK};
    let parts = chunks(n, CHUNK);
    let tallies = exec.map_slice(&parts, |&(idx, len)| {
        let mut r = stream(seed, idx as u64);
        let (mut plus, mut anti, mut undetermined) = (0usize, 0usize, 0usize);
        for _ in 0..len {
            let pair = EntangledPair {
                mu_e1: unit_vector(&mut r),
                mu_n1: unit_vector(&mut r),
                quant_axis: unit_vector(&mut r),
            };
            match entangled_outcomes(&pair) {
                PairOutcome::Collapsed { branch1, branch2 } => {
                    if branch1 == 1 {
                        plus += 1;
                    }
                    if branch1 * branch2 == -1 {
                        anti += 1;
                    }
                }
                PairOutcome::Undetermined => undetermined += 1,
            }
        }
        (plus, anti, undetermined)
    });
    let (plus, anti, undetermined) = tallies
        .iter()
        .fold((0, 0, 0), |acc, t| (acc.0 + t.0, acc.1 + t.1, acc.2 + t.2));
    let determined = n - undetermined;
    let p = if determined == 0 { 0.0 } else { plus as f64 / determined as f64 };
    Ok(EntangleReport {
        n,
        plus_fraction: McEstimate {
            estimate: p,
            stderr: if determined == 0 { 0.0 } else { (p * (1.0 - p) / determined as f64).sqrt() },
            n: determined,
        },
        anticorrelated: anti,
        undetermined,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStage {
    pub alpha: f64,
    pub p_cqd: f64,
    pub p_qm: f64,
    pub ratio: f64,
    /// Ratio from its own simplified closed form, as a cross-check.
    pub ratio_closed_form: f64,
}

/// Probability that an electron collapsed to +z (heart co-quanta) collapses
/// again to +z' when the second axis is tilted by `alpha`.
pub fn two_stage_probability(alpha: f64) -> Result<TwoStage> {
    if !(0.0..PI).contains(&alpha) {
        return Err(CqdError::domain(format!("alpha = {alpha} outside [0, pi)")));
    }
    let c = alpha.cos();
    let p_cqd = (1.0 + c).powi(2) * (2.0 - c) / 4.0;
    let p_qm = (alpha / 2.0).cos().powi(2);
    Ok(TwoStage {
        alpha,
        p_cqd,
        p_qm,
        ratio: p_cqd / p_qm,
        ratio_closed_form: (9.0 - (2.0 * c - 1.0).powi(2)) / 8.0,
    })
}

/// Monte Carlo estimate of the two-stage probability: heart co-quanta are
/// sampled in the first frame and re-expressed in the tilted frame by an
/// explicit rotation about y. Two uniforms per sample.
pub fn two_stage_mc(alpha: f64, n: usize, seed: u64, exec: Execution) -> Result<McEstimate> {
    if !(0.0..PI).contains(&alpha) {
        return Err(CqdError::domain(format!("alpha = {alpha} outside [0, pi)")));
    }
    if n < 10_000 {
        return Err(CqdError::domain(format!("at least 10000 samples required, got {n}")));
    }
    let heart = AngularDistribution::heart();
    let (s, c) = alpha.sin_cos();
    Ok(bernoulli_mc(n, seed, exec, |r| {
        let (t, p) = heart.sample(r);
        let v = direction(t, p);
        // Rotation by -alpha about y brings the tilted axis onto z.
        let z_tilted = s * v[0] + c * v[2];
        let theta_n = z_tilted.clamp(-1.0, 1.0).acos();
        theta_n > alpha
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturation_case() {
        let r = uncertainty_suite(PI / 2.0, PI / 2.0).unwrap();
        assert!((r.delta_sz - 1.0).abs() < 1e-15);
        assert_eq!(r.delta_sx, 1.0);
        assert!((r.s_y_exp.abs() - 1.0).abs() < 1e-15);
        assert!(r.residual < 1e-15);
    }

    #[test]
    fn pole_case() {
        let r = uncertainty_suite(0.0, 1.234).unwrap();
        assert!(r.delta_sz.abs() < 1e-7);
        assert!(r.s_y_exp.abs() < 1e-15);
    }

    #[test]
    fn tie_is_undetermined() {
        let p = EntangledPair::from_angles(1.0, 0.0, 1.0, 2.0, [0.0, 0.0, 1.0]);
        assert_eq!(entangled_outcomes(&p), PairOutcome::Undetermined);
    }

    #[test]
    fn two_stage_limits() {
        let t = two_stage_probability(0.0).unwrap();
        assert_eq!((t.p_cqd, t.p_qm), (1.0, 1.0));
        let t = two_stage_probability(PI / 2.0).unwrap();
        assert!((t.p_cqd - 0.5).abs() < 1e-15 && (t.p_qm - 0.5).abs() < 1e-15);
        assert!(two_stage_probability(PI).is_err());
    }
}
