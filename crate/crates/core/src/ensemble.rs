//! Co-quantum angular distributions, collapse probabilities, density
//! operators, and their Monte Carlo estimators.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CqdError, Result};
use crate::parallel::{chunks, Execution};
use crate::quad::adaptive_simpson;
use crate::rng::{self, uniform, CHUNK};

/// Smallest sample count accepted by the Monte Carlo estimators.
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Isotropic,
    /// `(1 - cos theta) / (4 pi)`, selected by the +z slit.
    Heart,
    /// `(1 + cos theta) / (4 pi)`, selected by the -z slit.
    HeartInverted,
    Custom,
}

/// Azimuthally symmetric distribution of directions on the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularDistribution {
    pub kind: DistributionKind,
    table: Option<CdfTable>,
}

/// Polar cumulative distribution tabulated on `[0, pi]` and interpolated
/// with a monotone cubic (Fritsch–Carlson).
#[derive(Debug, Clone, PartialEq)]
struct CdfTable {
    theta: Vec<f64>,
    cdf: Vec<f64>,
    slope: Vec<f64>,
}

impl CdfTable {
    fn new(theta: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        let n = theta.len();
        if n < 2 || cdf.len() != n {
            return Err(CqdError::domain("cdf table needs at least two (theta, cdf) pairs"));
        }
        if theta[0] != 0.0 || (theta[n - 1] - PI).abs() > 1e-12 {
            return Err(CqdError::domain("cdf table must span [0, pi]"));
        }
        if theta.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(CqdError::domain("cdf table angles must be strictly ascending"));
        }
        if cdf[0].abs() > 1e-12 || (cdf[n - 1] - 1.0).abs() > 1e-9 {
            return Err(CqdError::domain("cdf table must rise from 0 to 1"));
        }
        if cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(CqdError::domain("cdf table must be non-decreasing"));
        }
        let secant: Vec<f64> = (0..n - 1)
            .map(|i| (cdf[i + 1] - cdf[i]) / (theta[i + 1] - theta[i]))
            .collect();
        let mut slope = vec![0.0; n];
        slope[0] = secant[0];
        slope[n - 1] = secant[n - 2];
        for i in 1..n - 1 {
            slope[i] = if secant[i - 1] * secant[i] <= 0.0 {
                0.0
            } else {
                (secant[i - 1] + secant[i]) / 2.0
            };
        }
        for i in 0..n - 1 {
            if secant[i] == 0.0 {
                slope[i] = 0.0;
                slope[i + 1] = 0.0;
                continue;
            }
            let a = slope[i] / secant[i];
            let b = slope[i + 1] / secant[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                slope[i] = t * a * secant[i];
                slope[i + 1] = t * b * secant[i];
            }
        }
        Ok(CdfTable { theta, cdf, slope })
    }

    fn segment(&self, x: f64) -> usize {
        let i = self.theta.partition_point(|&t| t <= x);
        i.clamp(1, self.theta.len() - 1) - 1
    }

    fn hermite(&self, i: usize, x: f64) -> (f64, f64) {
        let h = self.theta[i + 1] - self.theta[i];
        let t = (x - self.theta[i]) / h;
        let (y0, y1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        let deriv = ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * m1) / h;
        (value, deriv)
    }

    fn value(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, PI);
        self.hermite(self.segment(x), x).0.clamp(0.0, 1.0)
    }

    fn density(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, PI);
        self.hermite(self.segment(x), x).1.max(0.0)
    }

    fn inverse(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1) - 1;
        let (mut lo, mut hi) = (self.theta[i], self.theta[i + 1]);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.hermite(i, mid).0 < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

impl AngularDistribution {
    pub fn isotropic() -> Self {
        AngularDistribution {
            kind: DistributionKind::Isotropic,
            table: None,
        }
    }

    pub fn heart() -> Self {
        AngularDistribution {
            kind: DistributionKind::Heart,
            table: None,
        }
    }

    pub fn heart_inverted() -> Self {
        AngularDistribution {
            kind: DistributionKind::HeartInverted,
            table: None,
        }
    }

    /// Distribution given by its polar CDF tabulated on `[0, pi]`.
    pub fn custom(theta: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        Ok(AngularDistribution {
            kind: DistributionKind::Custom,
            table: Some(CdfTable::new(theta, cdf)?),
        })
    }

    /// Probability per steradian; independent of the azimuth.
    pub fn pdf(&self, theta: f64, _phi: f64) -> f64 {
        match self.kind {
            DistributionKind::Isotropic => 1.0 / (4.0 * PI),
            DistributionKind::Heart => heart_pdf(theta),
            DistributionKind::HeartInverted => (1.0 + theta.cos()) / (4.0 * PI),
            DistributionKind::Custom => {
                let t = self.table.as_ref().expect("custom table");
                t.density(theta) / (TAU * theta.sin().max(1e-12))
            }
        }
    }

    /// Probability that the polar angle is below `theta`.
    pub fn cdf_theta(&self, theta: f64) -> f64 {
        let theta = theta.clamp(0.0, PI);
        match self.kind {
            DistributionKind::Isotropic => (theta / 2.0).sin().powi(2),
            DistributionKind::Heart => (theta / 2.0).sin().powi(4),
            DistributionKind::HeartInverted => 1.0 - (theta / 2.0).cos().powi(4),
            DistributionKind::Custom => self.table.as_ref().expect("custom table").value(theta),
        }
    }

    /// Draws a polar angle from one uniform variate.
    pub fn sample_theta<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = uniform(rng);
        match self.kind {
            DistributionKind::Isotropic => (1.0 - 2.0 * u).clamp(-1.0, 1.0).acos(),
            DistributionKind::Heart => (1.0 - 2.0 * u.sqrt()).clamp(-1.0, 1.0).acos(),
            DistributionKind::HeartInverted => PI - (1.0 - 2.0 * u.sqrt()).clamp(-1.0, 1.0).acos(),
            DistributionKind::Custom => self.table.as_ref().expect("custom table").inverse(u),
        }
    }

    /// Draws `(theta, phi)`; consumes two uniforms, polar first.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let theta = self.sample_theta(rng);
        (theta, TAU * uniform(rng))
    }

    /// Mean polar angle, `pi - integral_0^pi cdf(theta) d theta`.
    pub fn mean_theta(&self) -> Result<f64> {
        Ok(PI - adaptive_simpson(&|t| self.cdf_theta(t), 0.0, PI, 1e-10)?)
    }
}

/// Heart-shaped co-quantum density `(1 - cos theta) / (4 pi)`.
pub fn heart_pdf(theta: f64) -> f64 {
    (1.0 - theta.cos()) / (4.0 * PI)
}

/// Free-function form of [`AngularDistribution::sample`].
pub fn sample<R: Rng + ?Sized>(dist: &AngularDistribution, rng: &mut R) -> (f64, f64) {
    dist.sample(rng)
}

/// Probability of collapse toward -z: the co-quantum polar angle falls below
/// the electron's.
pub fn flip_probability(theta_e: f64, dist: &AngularDistribution) -> f64 {
    dist.cdf_theta(theta_e)
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors (with a floor for
    /// degenerate zero-variance estimates).
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.estimate - value).abs() <= k * self.stderr + 1e-12
    }
}

fn check_samples(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(CqdError::domain(format!("at least {min} samples required, got {n}")));
    }
    Ok(())
}

/// Fraction of samples for which `hit` returns true, with binomial error.
/// Sample `k` uses stream `k / CHUNK` of `seed`.
pub fn bernoulli_mc<F>(n: usize, seed: u64, exec: Execution, hit: F) -> McEstimate
where
    F: Fn(&mut rng::StreamRng) -> bool + Sync + Send,
{
    let parts = chunks(n, CHUNK);
    let counts = exec.map_slice(&parts, |&(idx, len)| {
        let mut r = rng::stream(seed, idx as u64);
        (0..len).filter(|_| hit(&mut r)).count()
    });
    let hits: usize = counts.iter().sum();
    let p = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
    McEstimate {
        estimate: p,
        stderr: if n == 0 { 0.0 } else { (p * (1.0 - p) / n as f64).sqrt() },
        n,
    }
}

/// Sample mean of `value` with its standard error.
pub fn mean_mc<F>(n: usize, seed: u64, exec: Execution, value: F) -> McEstimate
where
    F: Fn(&mut rng::StreamRng) -> f64 + Sync + Send,
{
    let sums = vector_mean_mc::<1, _>(n, seed, exec, |r| [value(r)]);
    sums[0]
}

/// Componentwise sample means of a fixed-size vector statistic.
pub fn vector_mean_mc<const M: usize, F>(n: usize, seed: u64, exec: Execution, value: F) -> [McEstimate; M]
where
    F: Fn(&mut rng::StreamRng) -> [f64; M] + Sync + Send,
{
    let parts = chunks(n, CHUNK);
    let partial = exec.map_slice(&parts, |&(idx, len)| {
        let mut r = rng::stream(seed, idx as u64);
        let mut s = [0.0; M];
        let mut s2 = [0.0; M];
        for _ in 0..len {
            let v = value(&mut r);
            for k in 0..M {
                s[k] += v[k];
                s2[k] += v[k] * v[k];
            }
        }
        (s, s2)
    });
    let mut s = [0.0; M];
    let mut s2 = [0.0; M];
    for (a, b) in &partial {
        for k in 0..M {
            s[k] += a[k];
            s2[k] += b[k];
        }
    }
    let nf = n.max(1) as f64;
    std::array::from_fn(|k| {
        let mean = s[k] / nf;
        let var = if n > 1 { ((s2[k] - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
        McEstimate {
            estimate: mean,
            stderr: (var / nf).sqrt(),
            n,
        }
    })
}

/// Monte Carlo flip fraction: share of sampled co-quanta with polar angle
/// below `theta_e`. One uniform per sample.
pub fn flip_probability_mc(
    theta_e: f64,
    dist: &AngularDistribution,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<McEstimate> {
    check_samples(n_samples, MIN_SAMPLES)?;
    if !(0.0..=PI).contains(&theta_e) {
        return Err(CqdError::domain(format!("theta_e = {theta_e} outside [0, pi]")));
    }
    Ok(bernoulli_mc(n_samples, seed, exec, |r| dist.sample_theta(r) < theta_e))
}

/// Selected slit branch after the first Stern–Gerlach stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    PlusZ,
    MinusZ,
}

/// Co-quantum distribution behind a slit that passes one collapse branch.
///
/// The +z branch keeps co-quanta whose polar angle exceeds the electron's,
/// weighting `p_n(theta)` by `2 P_e(theta_e < theta)`. For a non-isotropic
/// electron distribution the result is a custom distribution renormalized
/// to unit probability.
pub fn slit_reshape(dist_n: &AngularDistribution, dist_e: &AngularDistribution, branch: Branch) -> Result<AngularDistribution> {
    if dist_n.kind != DistributionKind::Isotropic {
        return Err(CqdError::domain("slit reshaping is defined for an isotropic co-quantum distribution"));
    }
    if dist_e.kind == DistributionKind::Isotropic {
        return Ok(match branch {
            Branch::PlusZ => AngularDistribution::heart(),
            Branch::MinusZ => AngularDistribution::heart_inverted(),
        });
    }
    const POINTS: usize = 513;
    let weight = |t: f64| match branch {
        Branch::PlusZ => dist_e.cdf_theta(t),
        Branch::MinusZ => 1.0 - dist_e.cdf_theta(t),
    };
    let theta: Vec<f64> = (0..POINTS).map(|i| PI * i as f64 / (POINTS - 1) as f64).collect();
    let mut cdf = vec![0.0; POINTS];
    for i in 1..POINTS {
        let piece = adaptive_simpson(&|t: f64| weight(t) * t.sin(), theta[i - 1], theta[i], 1e-10)?;
        cdf[i] = cdf[i - 1] + piece;
    }
    let total = cdf[POINTS - 1];
    if !(total > 0.0) {
        return Err(CqdError::numeric("slit passes no probability"));
    }
    for c in &mut cdf {
        *c /= total;
    }
    cdf[POINTS - 1] = 1.0;
    AngularDistribution::custom(theta, cdf)
}

/// 2x2 density operator in the `{+z, -z}` basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix2 {
    pub entries: [[Complex64; 2]; 2],
}

impl DensityMatrix2 {
    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.entries[0][0] * self.entries[1][1] - self.entries[0][1] * self.entries[1][0]
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let e = &self.entries;
        e[0][0].im.abs() <= tol && e[1][1].im.abs() <= tol && (e[0][1] - e[1][0].conj()).norm() <= tol
    }

    /// `|psi><psi|`.
    pub fn outer(psi: [Complex64; 2]) -> Self {
        DensityMatrix2 {
            entries: [
                [psi[0] * psi[0].conj(), psi[0] * psi[1].conj()],
                [psi[1] * psi[0].conj(), psi[1] * psi[1].conj()],
            ],
        }
    }
}

/// `(<C+>, <C->)`: root probabilities of collapse to +z and -z.
fn collapse_amplitudes(theta_e: f64, dist_n: &AngularDistribution) -> (f64, f64) {
    let minus = dist_n.cdf_theta(theta_e);
    ((1.0 - minus).max(0.0).sqrt(), minus.max(0.0).sqrt())
}

/// Pure-state wave function `(<C+>, <C-> exp(i phi_e))`.
pub fn wavefunction(theta_e: f64, phi_e: f64, dist_n: &AngularDistribution) -> [Complex64; 2] {
    let (p, m) = collapse_amplitudes(theta_e, dist_n);
    [Complex64::new(p, 0.0), Complex64::from_polar(m, phi_e)]
}

/// Pre-averaging density operator for a fixed electron direction.
pub fn density_operator(theta_e: f64, phi_e: f64, dist_n: &AngularDistribution) -> DensityMatrix2 {
    let (p, m) = collapse_amplitudes(theta_e, dist_n);
    let off = Complex64::from_polar(p * m, -phi_e);
    DensityMatrix2 {
        entries: [[Complex64::new(p * p, 0.0), off], [off.conj(), Complex64::new(m * m, 0.0)]],
    }
}

/// Density operator averaged over an isotropic electron distribution.
pub fn mixed_density(dist_e: &AngularDistribution) -> Result<DensityMatrix2> {
    if dist_e.kind != DistributionKind::Isotropic {
        return Err(CqdError::domain("mixed density is defined for an isotropic electron distribution"));
    }
    let half = Complex64::new(0.5, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    Ok(DensityMatrix2 {
        entries: [[half, zero], [zero, half]],
    })
}

/// Monte Carlo average of [`density_operator`] over electron directions drawn
/// from `dist_e`, with isotropic co-quanta. Returns estimates of
/// `[rho_{++}, rho_{--}, Re rho_{+-}, Im rho_{+-}]`.
pub fn mixed_density_mc(dist_e: &AngularDistribution, n: usize, seed: u64, exec: Execution) -> Result<[McEstimate; 4]> {
    check_samples(n, MIN_SAMPLES)?;
    let iso = AngularDistribution::isotropic();
    Ok(vector_mean_mc(n, seed, exec, |r| {
        let (t, p) = dist_e.sample(r);
        let d = density_operator(t, p, &iso);
        [d.entries[0][0].re, d.entries[1][1].re, d.entries[0][1].re, d.entries[0][1].im]
    }))
}

/// Monte Carlo estimate of the cross term `<C+ C->` before averaging.
///
/// With `independent = false` both indicators come from the same co-quantum
/// draw, which can never satisfy both branches, so the estimate is exactly
/// zero. With `independent = true` they come from separate draws and the
/// estimate converges to `<C+><C->` in probability terms, i.e.
/// `(1 - cdf) * cdf`.
pub fn cross_term_mc(
    theta_e: f64,
    dist_n: &AngularDistribution,
    n: usize,
    seed: u64,
    independent: bool,
    exec: Execution,
) -> Result<McEstimate> {
    check_samples(n, MIN_SAMPLES)?;
    Ok(bernoulli_mc(n, seed, exec, |r| {
        let a = dist_n.sample_theta(r);
        let b = if independent { dist_n.sample_theta(r) } else { a };
        a > theta_e && b < theta_e
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_at_equator() {
        assert!((flip_probability(PI / 2.0, &AngularDistribution::isotropic()) - 0.5).abs() < 1e-15);
        assert!((flip_probability(PI / 2.0, &AngularDistribution::heart()) - 0.25).abs() < 1e-15);
        assert_eq!(flip_probability(0.0, &AngularDistribution::heart()), 0.0);
        assert_eq!(heart_pdf(0.0), 0.0);
        assert!((heart_pdf(PI) - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn heart_mean_angle() {
        let m = AngularDistribution::heart().mean_theta().unwrap();
        assert!((m - 5.0 * PI / 8.0).abs() < 1e-9);
    }

    #[test]
    fn custom_reproduces_heart() {
        let theta: Vec<f64> = (0..=200).map(|i| PI * i as f64 / 200.0).collect();
        let cdf: Vec<f64> = theta.iter().map(|t| (t / 2.0).sin().powi(4)).collect();
        let d = AngularDistribution::custom(theta, cdf).unwrap();
        for t in [0.3, 1.0, 2.0, 3.0] {
            assert!((d.cdf_theta(t) - (t / 2.0).sin().powi(4)).abs() < 1e-6);
            assert!((d.pdf(t, 0.0) - heart_pdf(t)).abs() < 1e-3);
        }
        let mut r = rng::stream(3, 0);
        for _ in 0..100 {
            let t = d.sample_theta(&mut r);
            assert!((0.0..=PI).contains(&t));
        }
    }

    #[test]
    fn custom_rejects_decreasing() {
        assert!(AngularDistribution::custom(vec![0.0, 1.0, PI], vec![0.0, 0.6, 0.5]).is_err());
    }

    #[test]
    fn slit_reshape_non_isotropic_electron_normalized() {
        let d = slit_reshape(&AngularDistribution::isotropic(), &AngularDistribution::heart(), Branch::PlusZ).unwrap();
        assert_eq!(d.kind, DistributionKind::Custom);
        assert!((d.cdf_theta(PI) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_cross_term_is_zero() {
        let e = cross_term_mc(1.2, &AngularDistribution::isotropic(), 5000, 1, false, Execution::Sequential).unwrap();
        assert_eq!(e.estimate, 0.0);
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(flip_probability_mc(1.0, &AngularDistribution::heart(), 10, 0, Execution::Sequential).is_err());
    }
}
