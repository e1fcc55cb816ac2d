use std::f64::consts::PI;

use cqd_core::ensemble::{
    cross_term_mc, density_operator, flip_probability, flip_probability_mc, mean_mc, mixed_density,
    mixed_density_mc, slit_reshape, wavefunction, AngularDistribution, Branch, DensityMatrix2, DistributionKind,
};
use cqd_core::parallel::Execution;
use cqd_core::rng::stream;
use proptest::prelude::*;

#[test]
fn isotropic_and_heart_flip_fractions() {
    let iso = AngularDistribution::isotropic();
    let heart = AngularDistribution::heart();
    for k in 0..=12 {
        let t = PI * k as f64 / 12.0;
        assert!((flip_probability(t, &iso) - (t / 2.0).sin().powi(2)).abs() < 1e-14);
        assert!((flip_probability(t, &heart) - (t / 2.0).sin().powi(4)).abs() < 1e-14);
    }
}

#[test]
fn inverted_heart_mirrors_heart() {
    let heart = AngularDistribution::heart();
    let inv = AngularDistribution::heart_inverted();
    for k in 0..=10 {
        let t = PI * k as f64 / 10.0;
        assert!((inv.cdf_theta(t) - (1.0 - heart.cdf_theta(PI - t))).abs() < 1e-14);
    }
    assert!((inv.mean_theta().unwrap() - 3.0 * PI / 8.0).abs() < 1e-9);
}

#[test]
fn mc_matches_closed_form_for_heart() {
    let heart = AngularDistribution::heart();
    for (k, t) in [0.4, 1.3, 2.0, 2.9].into_iter().enumerate() {
        let est = flip_probability_mc(t, &heart, 200_000, 40 + k as u64, Execution::default()).unwrap();
        assert!(est.agrees_with((t / 2.0).sin().powi(4), 4.0), "{t}: {est:?}");
    }
    assert!(flip_probability_mc(1.0, &heart, 10, 1, Execution::default()).is_err());
    assert!(flip_probability_mc(4.0, &heart, 10_000, 1, Execution::default()).is_err());
}

#[test]
fn azimuth_is_uniform() {
    let heart = AngularDistribution::heart();
    let est = mean_mc(100_000, 3, Execution::default(), |r| heart.sample(r).1);
    assert!(est.agrees_with(PI, 4.0), "{est:?}");
}

#[test]
fn custom_table_reproduces_isotropic() {
    let theta: Vec<f64> = (0..=64).map(|i| PI * i as f64 / 64.0).collect();
    let cdf: Vec<f64> = theta.iter().map(|t| (t / 2.0).sin().powi(2)).collect();
    let d = AngularDistribution::custom(theta, cdf).unwrap();
    assert_eq!(d.kind, DistributionKind::Custom);
    for t in [0.1, 0.77, 1.5, 2.6] {
        assert!((d.cdf_theta(t) - (t / 2.0).sin().powi(2)).abs() < 1e-4);
    }
    let mut r = stream(5, 0);
    for _ in 0..1000 {
        let t = d.sample_theta(&mut r);
        assert!((0.0..=PI).contains(&t));
    }
}

#[test]
fn custom_table_validation() {
    assert!(AngularDistribution::custom(vec![0.0, PI], vec![0.0, 0.5]).is_err());
    assert!(AngularDistribution::custom(vec![0.0, 1.0, PI], vec![0.0, 0.8, 0.6]).is_err());
    assert!(AngularDistribution::custom(vec![0.0, 2.0, 1.0], vec![0.0, 0.5, 1.0]).is_err());
}

#[test]
fn slit_of_isotropic_electrons_gives_heart() {
    let iso = AngularDistribution::isotropic();
    assert_eq!(slit_reshape(&iso, &iso, Branch::PlusZ).unwrap().kind, DistributionKind::Heart);
    assert_eq!(slit_reshape(&iso, &iso, Branch::MinusZ).unwrap().kind, DistributionKind::HeartInverted);
    assert!(slit_reshape(&AngularDistribution::heart(), &iso, Branch::PlusZ).is_err());
}

#[test]
fn slit_of_heart_electrons_matches_rejection_sampling() {
    let iso = AngularDistribution::isotropic();
    let heart = AngularDistribution::heart();
    let reshaped = slit_reshape(&iso, &heart, Branch::PlusZ).unwrap();
    assert!((reshaped.cdf_theta(PI) - 1.0).abs() < 1e-12);
    // Rejection: keep isotropic co-quanta whose polar angle exceeds a heart electron's.
    let mut r = stream(17, 0);
    let (mut kept, mut below) = (0usize, 0usize);
    let cut = 2.0;
    while kept < 100_000 {
        let tn = iso.sample_theta(&mut r);
        let te = heart.sample_theta(&mut r);
        if tn > te {
            kept += 1;
            if tn < cut {
                below += 1;
            }
        }
    }
    let p = below as f64 / kept as f64;
    let se = (p * (1.0 - p) / kept as f64).sqrt();
    assert!((p - reshaped.cdf_theta(cut)).abs() < 4.0 * se, "{p} vs {}", reshaped.cdf_theta(cut));
}

#[test]
fn pure_state_density_operator() {
    let iso = AngularDistribution::isotropic();
    for (t, p) in [(0.3, 0.0), (1.2, 2.0), (2.8, 5.5)] {
        let psi = wavefunction(t, p, &iso);
        let rho = density_operator(t, p, &iso);
        let outer = DensityMatrix2::outer(psi);
        for i in 0..2 {
            for j in 0..2 {
                assert!((rho.entries[i][j] - outer.entries[i][j]).norm() < 1e-15);
            }
        }
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert!(rho.det().norm() < 1e-15);
        assert!(rho.is_hermitian(1e-15));
        // Down-state population equals the flip fraction.
        assert!((rho.entries[1][1].re - (t / 2.0).sin().powi(2)).abs() < 1e-15);
    }
}

#[test]
fn averaged_density_is_maximally_mixed() {
    let iso = AngularDistribution::isotropic();
    let rho = mixed_density(&iso).unwrap();
    assert!((rho.det().re - 0.25).abs() < 1e-15);
    assert!(mixed_density(&AngularDistribution::heart()).is_err());
    let est = mixed_density_mc(&iso, 200_000, 8, Execution::default()).unwrap();
    for (e, want) in est.iter().zip([0.5, 0.5, 0.0, 0.0]) {
        assert!(e.agrees_with(want, 4.0), "{e:?} vs {want}");
    }
}

#[test]
fn cross_term_vanishes_for_a_single_draw() {
    let iso = AngularDistribution::isotropic();
    let same = cross_term_mc(1.0, &iso, 50_000, 2, false, Execution::default()).unwrap();
    assert_eq!(same.estimate, 0.0);
    let indep = cross_term_mc(1.0, &iso, 200_000, 2, true, Execution::default()).unwrap();
    let c = flip_probability(1.0, &iso);
    assert!(indep.agrees_with((1.0 - c) * c, 4.0), "{indep:?}");
}

#[test]
fn results_do_not_depend_on_execution_policy() {
    let heart = AngularDistribution::heart();
    let n = 300_000;
    let a = flip_probability_mc(1.7, &heart, n, 9, Execution::Sequential).unwrap();
    let b = flip_probability_mc(1.7, &heart, n, 9, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    let c = mixed_density_mc(&AngularDistribution::isotropic(), n, 9, Execution::Sequential).unwrap();
    let d = mixed_density_mc(&AngularDistribution::isotropic(), n, 9, Execution::Parallel).unwrap();
    assert_eq!(c, d);
}

proptest! {
    #[test]
    fn cdf_is_monotone_and_bounded(a in 0.0f64..PI, b in 0.0f64..PI) {
        prop_assume!(a <= b);
        for d in [AngularDistribution::isotropic(), AngularDistribution::heart(), AngularDistribution::heart_inverted()] {
            let (ca, cb) = (d.cdf_theta(a), d.cdf_theta(b));
            prop_assert!((0.0..=1.0).contains(&ca) && (0.0..=1.0).contains(&cb));
            prop_assert!(ca <= cb + 1e-15);
        }
    }

    #[test]
    fn trace_is_one(t in 0.0f64..PI, p in 0.0f64..6.3) {
        let rho = density_operator(t, p, &AngularDistribution::heart());
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-14);
        prop_assert!(rho.is_hermitian(1e-15));
    }
}
