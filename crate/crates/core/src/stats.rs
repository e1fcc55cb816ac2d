//! Flip-fraction data, goodness-of-fit statistics, and the one-parameter
//! induction fit.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CqdError, Result};
use crate::flip::{induction_scale, FlipModel, FlipRow};
use crate::quad::golden_min;

/// Required CSV header.
pub const CSV_HEADER: &str = "current_A,flip_fraction";

/// Measured flip fractions ordered by current.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    /// `(current A, flip fraction)` pairs.
    pub rows: Vec<(f64, f64)>,
    pub provenance: String,
}

impl Dataset {
    pub fn currents(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.0).collect()
    }

    pub fn fractions(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.1).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Parses CSV text. Lines starting with `#` before the header are
    /// collected as provenance; blank lines are skipped.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut provenance = Vec::new();
        let mut rows: Vec<(f64, f64)> = Vec::new();
        let mut header_seen = false;
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.trim();
            let err = |message: String| CqdError::Parse { line: line_no, message };
            if line.is_empty() {
                continue;
            }
            if !header_seen {
                if let Some(c) = line.strip_prefix('#') {
                    provenance.push(c.trim().to_string());
                    continue;
                }
                if line.trim_start_matches('\u{feff}') != CSV_HEADER {
                    return Err(err(format!("expected header `{CSV_HEADER}`, found `{line}`")));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 2 {
                return Err(err(format!("expected 2 fields, found {}", fields.len())));
            }
            let parse = |s: &str, name: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| err(format!("{name} `{}`: {e}", s.trim())))
            };
            let current = parse(fields[0], "current")?;
            let fraction = parse(fields[1], "fraction")?;
            if !(current > 0.0 && current.is_finite()) {
                return Err(err(format!("current must be positive, got {current}")));
            }
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(err(format!("fraction must lie in (0, 1), got {fraction}")));
            }
            if let Some(&(prev, _)) = rows.last() {
                if !(current > prev) {
                    return Err(err(format!("currents must increase strictly: {current} after {prev}")));
                }
            }
            rows.push((current, fraction));
        }
        if !header_seen {
            return Err(CqdError::Parse {
                line: 1,
                message: format!("missing header `{CSV_HEADER}`"),
            });
        }
        if rows.is_empty() {
            return Err(CqdError::Parse {
                line: text.lines().count().max(1),
                message: "no data rows after header".into(),
            });
        }
        Ok(Dataset {
            rows,
            provenance: provenance.join(" "),
        })
    }
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| CqdError::Io(format!("{}: {e}", path.display())))?;
    let mut d = Dataset::parse_csv(&text)?;
    if d.provenance.is_empty() {
        d.provenance = path.display().to_string();
    }
    Ok(d)
}

fn paired(pred: &[f64], obs: &[f64], log_space: bool, min_len: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if pred.len() != obs.len() {
        return Err(CqdError::domain(format!("series lengths differ: {} vs {}", pred.len(), obs.len())));
    }
    if pred.len() < min_len {
        return Err(CqdError::domain(format!("at least {min_len} pairs required, got {}", pred.len())));
    }
    if !log_space {
        return Ok((pred.to_vec(), obs.to_vec()));
    }
    if pred.iter().chain(obs).any(|&v| !(v > 0.0)) {
        return Err(CqdError::domain("log-space statistics need strictly positive values"));
    }
    Ok((pred.iter().map(|v| v.ln()).collect(), obs.iter().map(|v| v.ln()).collect()))
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Coefficient of determination `1 - SS_res / SS_tot` of `pred` for `obs`.
pub fn r_squared(pred: &[f64], obs: &[f64], log_space: bool) -> Result<f64> {
    let (p, o) = paired(pred, obs, log_space, 3)?;
    let m = mean(&o);
    let ss_tot: f64 = o.iter().map(|v| (v - m).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(CqdError::numeric("observations have zero variance; R^2 undefined"));
    }
    let ss_res: f64 = p.iter().zip(&o).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let (x, y) = paired(x, y, false, 2)?;
    let (mx, my) = (mean(&x), mean(&y));
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(CqdError::numeric("zero variance; correlation undefined"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value of the Pearson correlation between the (log) series
/// under the null hypothesis of no correlation.
pub fn p_value(pred: &[f64], obs: &[f64], log_space: bool) -> Result<f64> {
    let (p, o) = paired(pred, obs, log_space, 3)?;
    let r = pearson(&p, &o)?;
    correlation_p_value(r, p.len())
}

/// Two-sided p-value for correlation `r` over `n` pairs.
pub fn correlation_p_value(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(CqdError::domain(format!("p-value needs n >= 3, got {n}")));
    }
    if r.abs() >= 1.0 {
        return Ok(0.0);
    }
    let nu = (n - 2) as f64;
    let t = r * (nu / (1.0 - r * r)).sqrt();
    student_t_two_sided(t, nu)
}

/// `P(|T| >= |t|)` for Student's t with `nu` degrees of freedom.
pub fn student_t_two_sided(t: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(CqdError::domain(format!("degrees of freedom must be positive, got {nu}")));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    regularized_incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t))
}

/// Natural log of the gamma function (Lanczos, g = 7, n = 9), `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection keeps the series in its accurate range.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized incomplete beta `I_x(a, b)` via its continued fraction.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(CqdError::domain(format!("beta parameters must be positive, got ({a}, {b})")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(CqdError::domain(format!("x = {x} outside [0, 1]")));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_fraction(a, b, x)? / a)
    } else {
        Ok(1.0 - front * beta_fraction(b, a, 1.0 - x)? / b)
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    const MAX_ITER: usize = 10_000;
    let mut c = 1.0;
    let mut d = 1.0 - (a + b) * x / (a + 1.0);
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let even = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 + even * d;
        d = if d.abs() < TINY { 1.0 / TINY } else { 1.0 / d };
        c = 1.0 + even / c;
        if c.abs() < TINY {
            c = TINY;
        }
        h *= d * c;
        let odd = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 + odd * d;
        d = if d.abs() < TINY { 1.0 / TINY } else { 1.0 / d };
        c = 1.0 + odd / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(CqdError::numeric(format!("incomplete beta continued fraction did not converge for a = {a}, b = {b}, x = {x}")))
}

/// Kolmogorov–Smirnov distance between `samples` and the uniform law on
/// `[0, 1]`.
pub fn ks_uniform_statistic(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| {
            let lo = v - i as f64 / n;
            let hi = (i + 1) as f64 / n - v;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Which curve of the flip-fraction family to compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curve {
    Wm,
    Rabi,
    W1,
    W2,
    W3,
    W4,
    Wcqd,
}

impl Curve {
    pub const ALL: [Curve; 7] = [Curve::Wm, Curve::Rabi, Curve::W1, Curve::W2, Curve::W3, Curve::W4, Curve::Wcqd];

    pub fn name(self) -> &'static str {
        match self {
            Curve::Wm => "wm",
            Curve::Rabi => "rabi",
            Curve::W1 => "w1",
            Curve::W2 => "w2",
            Curve::W3 => "w3",
            Curve::W4 => "w4",
            Curve::Wcqd => "wcqd",
        }
    }

    pub fn parse(s: &str) -> Option<Curve> {
        Curve::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn of(self, row: &FlipRow) -> f64 {
        match self {
            Curve::Wm => row.w_m,
            Curve::Rabi => row.w_rabi,
            Curve::W1 => row.w1,
            Curve::W2 => row.w2,
            Curve::W3 => row.w3,
            Curve::W4 => row.w4,
            Curve::Wcqd => row.w_cqd,
        }
    }
}

/// Goodness of fit of one prediction series against the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Log-space coefficient of determination.
    pub r_squared: f64,
    pub r_squared_linear: f64,
    pub p_value: f64,
    pub n: usize,
    pub c_ri_hat: f64,
    pub k_i_hat: f64,
    /// Precession cycles per e-fold; `None` without induction.
    pub n_c_hat: Option<f64>,
}

/// Model predictions for `curve` at the dataset currents.
pub fn predictions(model: &FlipModel, dataset: &Dataset, curve: Curve) -> Result<Vec<f64>> {
    dataset.rows.iter().map(|&(i, _)| Ok(curve.of(&model.row(i)?))).collect()
}

fn report(pred: &[f64], obs: &[f64], c_ri: f64, model: &FlipModel) -> Result<FitReport> {
    let k_i = c_ri / induction_scale(&model.atom, &model.apparatus);
    Ok(FitReport {
        r_squared: r_squared(pred, obs, true)?,
        r_squared_linear: r_squared(pred, obs, false)?,
        p_value: p_value(pred, obs, true)?,
        n: obs.len(),
        c_ri_hat: c_ri,
        k_i_hat: k_i,
        n_c_hat: if k_i > 0.0 { Some(1.0 / (2.0 * PI * k_i)) } else { None },
    })
}

/// Statistics of one curve against the data, with no fitted induction.
pub fn curve_report(dataset: &Dataset, model: &FlipModel, curve: Curve) -> Result<FitReport> {
    let pred = predictions(model, dataset, curve)?;
    let c_ri = if curve == Curve::Wcqd { model.coefficients().c_ri } else { 0.0 };
    report(&pred, &dataset.fractions(), c_ri, model)
}

/// Statistics of `W4 exp(-c_ri I)` against the data for a given `c_ri`.
pub fn report_for(dataset: &Dataset, model: &FlipModel, c_ri: f64) -> Result<FitReport> {
    let base = predictions(model, dataset, Curve::W4)?;
    let pred: Vec<f64> = base
        .iter()
        .zip(&dataset.rows)
        .map(|(w, &(i, _))| w * (-c_ri * i).exp())
        .collect();
    report(&pred, &dataset.fractions(), c_ri, model)
}

/// Least-squares fit of the induction coefficient on log flip fractions,
/// holding the other coefficients at their predicted values.
pub fn fit_ki(dataset: &Dataset, model: &FlipModel) -> Result<FitReport> {
    if dataset.len() < 4 {
        return Err(CqdError::domain(format!("fit needs at least 4 points, got {}", dataset.len())));
    }
    let log_w4: Vec<f64> = predictions(model, dataset, Curve::W4)?.iter().map(|w| w.ln()).collect();
    let sse = |c: f64| -> f64 {
        dataset
            .rows
            .iter()
            .zip(&log_w4)
            .map(|(&(i, obs), lw)| (lw - c * i - obs.ln()).powi(2))
            .sum()
    };
    let mut hi = 1.0;
    let mut doublings = 0;
    while sse(2.0 * hi) < sse(hi) {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(CqdError::numeric(format!(
                "could not bracket the induction minimum: SSE still falling at c_ri = {hi:e}"
            )));
        }
    }
    let (mut c, f) = golden_min(sse, 0.0, 2.0 * hi, 1e-6).map_err(|e| {
        CqdError::numeric(format!("induction fit on bracket [0, {}]: {e}", 2.0 * hi))
    })?;
    if sse(0.0) <= f {
        c = 0.0;
    }
    report_for(dataset, model, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let d = Dataset::parse_csv("# made up\ncurrent_A,flip_fraction\n0.1,0.3\n0.2,0.1\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.provenance, "made up");
    }

    #[test]
    fn csv_errors_name_line() {
        let e = Dataset::parse_csv("current_A,flip_fraction\n0.1,0.3\n0.2,1.2\n").unwrap_err();
        assert_eq!(e, CqdError::Parse { line: 3, message: "fraction must lie in (0, 1), got 1.2".into() });
        assert!(matches!(Dataset::parse_csv("I,W\n"), Err(CqdError::Parse { line: 1, .. })));
        assert!(matches!(
            Dataset::parse_csv("current_A,flip_fraction\n0.2,0.3\n0.1,0.2\n"),
            Err(CqdError::Parse { line: 3, .. })
        ));
        assert!(matches!(
            Dataset::parse_csv("current_A,flip_fraction\n0.2;0.3\n"),
            Err(CqdError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn r_squared_basics() {
        let obs = [1.0, 2.0, 4.0];
        assert_eq!(r_squared(&obs, &obs, true).unwrap(), 1.0);
        assert!(r_squared(&[10.0; 3], &obs, false).unwrap() < 0.0);
        assert!(r_squared(&obs, &[2.0; 3], false).is_err());
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(10.0) - 362880f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn beta_symmetry() {
        let a = regularized_incomplete_beta(2.5, 0.5, 0.3).unwrap();
        let b = regularized_incomplete_beta(0.5, 2.5, 0.7).unwrap();
        assert!((a + b - 1.0).abs() < 1e-14);
    }

    #[test]
    fn perfect_correlation_gives_zero_p() {
        assert_eq!(correlation_p_value(1.0, 5).unwrap(), 0.0);
    }
}
