//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use cqd_core::atom::{frisch_segre, potassium39, KAPPA_TOPHAT_TORQUE};
use cqd_core::dynamics::{
    branch, collapse_envelope, integrate_spin_with, integrate_two_level, DynamicsConfig, Physics, SpinState,
};
use cqd_core::ensemble::{flip_probability_mc, mean_mc, AngularDistribution};
use cqd_core::flip::{adiabaticity, crossover, scan, w_cqd_from_coefficients, FlipModel, HEART_MEAN_THETA};
use cqd_core::hyperfine::{load_hartree_table, self_avg_coefficient, torque_avg_coefficient, RadialDensity};
use cqd_core::parallel::Execution;
use cqd_core::rng::{stream, uniform};
use cqd_core::stats::{correlation_p_value, curve_report, fit_ki, ks_uniform_statistic, load_dataset, p_value, Curve};
use cqd_core::verify::{entangle_mc, two_stage_mc, two_stage_probability, uncertainty_grid};
use rand_distr::{Distribution, StandardNormal};

/// Outcome of one criterion: sub-check lines plus overall verdict.
struct Report {
    checks: Vec<(bool, String)>,
}

impl Report {
    fn new() -> Self {
        Report { checks: Vec::new() }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.checks.push((ok, detail));
    }

    fn within(&mut self, name: &str, got: f64, want: f64, rel: f64) {
        let ok = ((got - want) / want).abs() <= rel;
        self.check(ok, format!("{name} = {got:.6} (target {want} +/- {:.1}%)", rel * 100.0));
    }

    fn runtime(&mut self, elapsed: Duration, limit: Duration) {
        self.check(elapsed <= limit, format!("runtime {elapsed:.2?} (limit {limit:?})"));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.0)
    }
}

fn tag(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn coefficient_reproduction() -> Report {
    let mut r = Report::new();
    let start = Instant::now();
    let c = FlipModel::new(potassium39(), frisch_segre()).coefficients();
    r.runtime(start.elapsed(), Duration::from_millis(50));
    r.within("c_r0 [A]", c.c_r0, 0.054, 0.02);
    r.within("c_rs", c.c_rs, 0.80, 0.02);
    r.within("c_r1 [1/A^3]", c.c_r1, 48.0, 0.05);
    r
}

fn adiabaticity_endpoints() -> Report {
    let mut r = Report::new();
    let (atom, app) = (potassium39(), frisch_segre());
    let lo = adiabaticity(0.01, &atom, &app, HEART_MEAN_THETA).unwrap();
    let hi = adiabaticity(0.5, &atom, &app, HEART_MEAN_THETA).unwrap();
    r.within("k0(0.01 A)", lo.k0, 1.701, 0.02);
    r.within("k0(0.5 A)", hi.k0, 0.034, 0.02);
    r.within("k1(0.01 A)", lo.k1, 0.038, 0.02);
    r.within("k1(0.5 A)", hi.k1, 1.891, 0.02);
    let (current, b_y) = crossover(&atom, &app, HEART_MEAN_THETA).unwrap();
    r.check(
        (current - 0.067).abs() <= 0.003,
        format!("crossover current = {current:.5} A (target 0.067 +/- 0.003)"),
    );
    r.within("crossover B'_y [T]", b_y, 0.11e-4, 0.02);
    let at = adiabaticity(current, &atom, &app, HEART_MEAN_THETA).unwrap();
    r.check(
        ((at.k0 - at.k1) / at.k1).abs() < 1e-9,
        format!("k0 = k1 at crossover ({:.6} vs {:.6})", at.k0, at.k1),
    );
    r
}

fn flip_curve_shape() -> Report {
    let mut r = Report::new();
    let start = Instant::now();
    let model = FlipModel::new(potassium39(), frisch_segre());
    let curve = scan(&model, 0.01, 0.5, 400, Execution::default()).unwrap();
    let peak = curve.w4_peak(&model).unwrap();
    r.runtime(start.elapsed(), Duration::from_secs(1));
    r.check(peak.unimodal, format!("W4 unimodal on 400-point grid: {}", peak.unimodal));
    r.check(
        (0.08..=0.13).contains(&peak.current),
        format!("W4 peak at {:.5} A (target [0.08, 0.13])", peak.current),
    );
    r.check(
        (peak.value - 0.31).abs() <= 0.04,
        format!("W4 peak value = {:.5} (target 0.31 +/- 0.04)", peak.value),
    );
    let tail = curve.rows.last().unwrap().w4;
    r.check(tail < 0.02, format!("W4(0.5 A) = {tail:.3e} (target < 0.02)"));
    r
}

fn dual_parameterization() -> Report {
    let mut r = Report::new();
    let model = FlipModel::new(potassium39(), frisch_segre());
    let coeffs = model.coefficients();
    let curve = scan(&model, 0.01, 0.5, 400, Execution::default()).unwrap();
    let worst = curve
        .rows
        .iter()
        .map(|row| (w_cqd_from_coefficients(&coeffs, row.current) / row.w4 - 1.0).abs())
        .fold(0.0, f64::max);
    r.check(worst < 1e-6, format!("max relative difference = {worst:.3e} (limit 1e-6)"));
    r
}

fn hyperfine_coefficients() -> Report {
    let mut r = Report::new();
    let radius = potassium39().radius;
    let gaussian = RadialDensity::gaussian(radius);
    let tophat = RadialDensity::tophat(radius);
    let start = Instant::now();
    let table = load_hartree_table();
    let kappa_table = torque_avg_coefficient(&table).unwrap();
    r.runtime(start.elapsed(), Duration::from_secs(10));

    let kappa_gauss = torque_avg_coefficient(&gaussian).unwrap();
    r.within("gaussian torque-averaged", kappa_gauss, 4.0 / (3.0 * PI * PI), 0.01);
    r.check(
        (kappa_table - 0.138).abs() <= 0.003,
        format!("tabulated torque-averaged = {kappa_table:.6} (target 0.138 +/- 0.003)"),
    );
    let kappa_top = torque_avg_coefficient(&tophat).unwrap();
    r.check(
        (kappa_top - KAPPA_TOPHAT_TORQUE).abs() < 1e-12,
        format!("top-hat torque-averaged = {kappa_top:.12} (target 0.3125 exact)"),
    );

    r.within("gaussian self-averaged", self_avg_coefficient(&gaussian).unwrap(), 16.0 / (3.0 * PI * PI), 0.01);
    r.within("tabulated self-averaged", self_avg_coefficient(&table).unwrap(), 28.4 / 3.0, 0.01);
    r.within("top-hat self-averaged", self_avg_coefficient(&tophat).unwrap(), 0.5, 0.01);
    r
}

fn majorana_oracle() -> Report {
    let mut r = Report::new();
    let start = Instant::now();
    for k in [0.1, 0.5, 1.0, 2.0] {
        let out = integrate_two_level(k, 0.0, 0.0, 0.0, 20.0, 1e-8).unwrap();
        r.within(&format!("|f|^2 at k_m = {k}"), out.asymptotic.f.norm_sqr(), (-PI * k / 2.0).exp(), 0.02);
    }
    r.runtime(start.elapsed(), Duration::from_secs(30));
    r
}

fn collapse_dynamics() -> Report {
    let mut r = Report::new();
    let start = Instant::now();
    let atom = potassium39();
    let k_i = 1e-3;
    let config = DynamicsConfig {
        k_i,
        physics: Physics::Cqd,
        include_b_n: false,
        include_b_e: false,
        freeze_nucleus: true,
    };
    let b_z: f64 = -1e-3;
    let omega = atom.gamma_e.abs() * b_z.abs();

    // Envelope over three e-folds.
    let mut worst: f64 = 0.0;
    for (theta_e, theta_n) in [(PI / 2.0, 2.5), (PI / 2.0, 1.0), (1.0, 2.0), (2.2, 0.4)] {
        let sign = f64::from(branch(theta_n, theta_e));
        let s0 = SpinState::new(theta_e, 0.3, theta_n, 0.0);
        integrate_spin_with(s0, |_| [0.0, 0.0, b_z], (0.0, 3.0 / (k_i * omega)), &atom, &config, 1e-9, |_, s| {
            let env = collapse_envelope(theta_e, k_i, s.phase_e, sign);
            worst = worst.max(((s.theta_e - env) / env).abs());
        })
        .unwrap();
    }
    r.check(worst < 0.01, format!("envelope tracking error = {worst:.3e} (limit 1%)"));

    // Branch agreement from random initial conditions.
    let t_end = 25.0 / (k_i * omega);
    let outcomes = Execution::default().map(1000, |k| {
        let mut rng = stream(7, k as u64);
        let theta_e = (1.0 - 2.0 * uniform(&mut rng)).acos();
        let phi_e = 2.0 * PI * uniform(&mut rng);
        let theta_n = (1.0 - 2.0 * uniform(&mut rng)).acos();
        if (theta_n - theta_e).abs() < 1e-6 {
            return None;
        }
        let s0 = SpinState::new(theta_e, phi_e, theta_n, 0.0);
        let fin = integrate_spin_with(s0, |_| [0.0, 0.0, b_z], (0.0, t_end), &atom, &config, 1e-9, |_, _| {}).ok()?;
        let landed: i8 = if fin.theta_e < PI / 2.0 { 1 } else { -1 };
        Some(landed == branch(theta_n, theta_e))
    });
    let decided: Vec<bool> = outcomes.iter().flatten().copied().collect();
    let agree = decided.iter().filter(|&&x| x).count();
    r.check(
        agree == decided.len() && decided.len() >= 990,
        format!("branch agreement {agree}/{} outside tie band", decided.len()),
    );
    r.runtime(start.elapsed(), Duration::from_secs(60));
    r
}

fn ensemble_statistics() -> Report {
    let mut r = Report::new();
    let n = 100_000;
    let exec = Execution::default();
    for (label, dist, exact) in [
        ("isotropic", AngularDistribution::isotropic(), 2),
        ("heart", AngularDistribution::heart(), 4),
    ] {
        let mut misses = Vec::new();
        for j in 0..20 {
            let theta_e = PI * (j as f64 + 0.5) / 20.0;
            let want = (theta_e / 2.0).sin().powi(exact);
            let est = flip_probability_mc(theta_e, &dist, n, 100 + j, exec).unwrap();
            if !est.agrees_with(want, 3.0) {
                misses.push(format!("{theta_e:.3}"));
            }
        }
        r.check(misses.is_empty(), format!("{label}: 20 angles within 3 sigma at 1e5 samples (misses: {misses:?})"));
    }
    let heart = AngularDistribution::heart();
    let mean = mean_mc(n, 5, exec, |rng| heart.sample_theta(rng));
    r.check(
        mean.agrees_with(HEART_MEAN_THETA, 3.0),
        format!("heart mean theta = {:.5} +/- {:.5} (target 5 pi/8 = {:.5})", mean.estimate, mean.stderr, HEART_MEAN_THETA),
    );
    r
}

fn quantum_cross_checks() -> Report {
    let mut r = Report::new();
    let grid = uncertainty_grid(100).unwrap();
    r.check(
        grid.max_residual < 1e-12 && grid.violations == 0,
        format!(
            "uncertainty: max residual {:.2e}, {} violations over {} points",
            grid.max_residual, grid.violations, grid.points
        ),
    );
    let ent = entangle_mc(1_000_000, 11, Execution::default()).unwrap();
    let determined = ent.n - ent.undetermined;
    r.check(
        ent.anticorrelated == determined && ent.undetermined == 0,
        format!("entanglement: {}/{} anticorrelated, {} undetermined", ent.anticorrelated, determined, ent.undetermined),
    );
    let third = two_stage_probability(PI / 3.0).unwrap();
    r.check(
        (third.ratio - 9.0 / 8.0).abs() < 1e-12,
        format!("two-stage ratio at pi/3 = {:.12} (target 9/8)", third.ratio),
    );
    let steep = two_stage_probability(11.0 * PI / 12.0).unwrap();
    r.check(
        (steep.ratio - 0.05).abs() <= 0.005,
        format!("two-stage ratio at 11 pi/12 = {:.6} (target 0.05 +/- 0.005)", steep.ratio),
    );
    for (alpha, seed) in [(PI / 3.0, 21), (11.0 * PI / 12.0, 22)] {
        let exact = two_stage_probability(alpha).unwrap();
        let mc = two_stage_mc(alpha, 1_000_000, seed, Execution::default()).unwrap();
        r.check(
            mc.agrees_with(exact.p_cqd, 3.0),
            format!(
                "two-stage MC at alpha = {alpha:.4}: {:.5} +/- {:.5} vs {:.5}",
                mc.estimate, mc.stderr, exact.p_cqd
            ),
        );
    }
    r
}

fn dataset_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/frisch_segre_1933_digitized.csv")
}

fn data_level_statistics() -> Report {
    let mut r = Report::new();
    let data = load_dataset(&dataset_path()).unwrap();
    let model = FlipModel::new(potassium39(), frisch_segre());
    let w4 = curve_report(&data, &model, Curve::W4).unwrap();
    r.check(
        (w4.r_squared - 0.9787).abs() <= 0.02,
        format!("log-space R^2(W4) = {:.4} (target 0.9787 +/- 0.02)", w4.r_squared),
    );
    r.check(
        (w4.r_squared_linear - 0.9621).abs() <= 0.02,
        format!("linear R^2(W4) = {:.4} (target 0.9621 +/- 0.02)", w4.r_squared_linear),
    );
    r.check(w4.p_value < 1e-5, format!("p(W4) = {:.3e} (target < 1e-5)", w4.p_value));
    let fit = fit_ki(&data, &model).unwrap();
    r.within("fitted c_ri", fit.c_ri_hat, 0.57, 0.30);
    r.check(
        (3.5e-4..=1.4e-3).contains(&fit.k_i_hat),
        format!("fitted k_i = {:.3e} (target order 7e-4)", fit.k_i_hat),
    );
    r
}

/// Two-sided tail of Student's t by composite Simpson on the density.
fn t_tail_quadrature(t: f64, nu: f64) -> f64 {
    let ln_norm = cqd_core::stats::ln_gamma((nu + 1.0) / 2.0)
        - cqd_core::stats::ln_gamma(nu / 2.0)
        - 0.5 * (nu * PI).ln();
    let density = |x: f64| (ln_norm - (nu + 1.0) / 2.0 * (1.0 + x * x / nu).ln()).exp();
    // Integrate the body |x| < t and subtract from one.
    let n = 200_000;
    let h = t.abs() / n as f64;
    let mut s = density(0.0) + density(t.abs());
    for k in 1..n {
        s += density(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * s * h / 3.0
}

fn statistical_machinery() -> Report {
    let mut r = Report::new();
    let mut worst: f64 = 0.0;
    for (rho, n) in [(0.3, 8), (0.7, 10), (0.9, 8), (0.95, 20), (0.5, 30), (0.1, 5)] {
        let t = rho * ((n as f64 - 2.0) / (1.0 - rho * rho)).sqrt();
        let got = correlation_p_value(rho, n).unwrap();
        worst = worst.max((got - t_tail_quadrature(t, n as f64 - 2.0)).abs());
    }
    r.check(worst < 1e-6, format!("p-value vs t-density quadrature: max error {worst:.2e} (limit 1e-6)"));

    let trials = 4000;
    let mut rng = stream(99, 0);
    let ps: Vec<f64> = (0..trials)
        .map(|_| {
            let x: Vec<f64> = (0..12).map(|_| StandardNormal.sample(&mut rng)).collect();
            let y: Vec<f64> = (0..12).map(|_| StandardNormal.sample(&mut rng)).collect();
            p_value(&x, &y, false).unwrap()
        })
        .collect();
    let d = ks_uniform_statistic(&ps);
    let critical = 1.628 / (trials as f64).sqrt();
    r.check(d < critical, format!("null p-values KS D = {d:.4} (1% critical {critical:.4})"));
    r
}

type Criterion = (&'static str, fn() -> Report);

fn main() {
    let criteria: [Criterion; 11] = [
        ("coefficient reproduction", coefficient_reproduction),
        ("adiabaticity endpoints and crossover", adiabaticity_endpoints),
        ("flip-curve shape", flip_curve_shape),
        ("dual parameterization", dual_parameterization),
        ("hyperfine coefficients", hyperfine_coefficients),
        ("nonadiabatic two-level oracle", majorana_oracle),
        ("collapse dynamics", collapse_dynamics),
        ("ensemble statistics", ensemble_statistics),
        ("quantum cross-checks", quantum_cross_checks),
        ("data-level statistics", data_level_statistics),
        ("statistical machinery", statistical_machinery),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let report = run();
        let ok = report.passed();
        if !ok {
            failed += 1;
        }
        println!("{} criterion {}: {name}", tag(ok), k + 1);
        for (sub, detail) in &report.checks {
            println!("    [{}] {detail}", if *sub { "ok" } else { "FAIL" });
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
