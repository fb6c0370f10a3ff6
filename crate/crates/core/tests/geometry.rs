use curriculum_core::geometry::{
    annulus_count_log, ellipsoid_volume_log, packing_count_log, packing_ratio, percolation_curve, solve_log_epsilon,
    EllipsoidSummary,
};
use curriculum_core::FeatureSet;
use ndarray::{array, Array2};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Natural log of a positive big integer from its top 64 bits.
fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top: BigInt = x >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn ln_rational(x: &BigRational) -> f64 {
    assert!(x.is_positive());
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// `ln(((chi1/eps)^d - (chi2/eps)^d))` in exact rational arithmetic.
fn exact_annulus_log(chi1: f64, chi2: f64, eps: f64, d: usize) -> f64 {
    let r = |v: f64| BigRational::from_float(v).unwrap();
    let pow = |v: BigRational| (0..d).fold(BigRational::one(), |acc, _| acc * &v);
    let diff = pow(r(chi1) / r(eps)) - pow(r(chi2) / r(eps));
    ln_rational(&diff)
}

fn rel_log_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn packing_count_is_volume_quotient(
        chi in 1e-3f64..1e3, eps in 1e-3f64..1e2, d in 1usize..=50, lsd in -50.0f64..50.0,
    ) {
        let n = packing_count_log(chi, eps, d, lsd).unwrap();
        let oracle = ellipsoid_volume_log(chi, d, lsd).unwrap() - ellipsoid_volume_log(eps, d, 0.0).unwrap();
        prop_assert!(rel_log_err(n, oracle) < 1e-10, "{n} vs {oracle}");
    }

    #[test]
    fn annulus_count_matches_exact_difference(
        chi1 in 0.1f64..20.0, frac in 0.0f64..0.999_999, eps in 0.05f64..5.0, d in 1usize..=50, lsd in -20.0f64..20.0,
    ) {
        let chi2 = chi1 * frac;
        prop_assume!(chi2 > 0.0 && chi2 < chi1);
        let got = annulus_count_log(chi1, chi2, eps, d, lsd).unwrap();
        let oracle = exact_annulus_log(chi1, chi2, eps, d) + lsd;
        // Relative error of the count itself.
        prop_assert!((got - oracle).exp_m1().abs() < 1e-8, "{got} vs {oracle}");
    }

    #[test]
    fn ratio_equals_count_quotient(
        chi1 in 0.1f64..20.0, frac in 0.0f64..1.0, eps in 0.05f64..5.0, d in 1usize..=50, lsd in -20.0f64..20.0,
    ) {
        let chi2 = chi1 * frac;
        let ratio = packing_ratio(chi1, chi2, d).unwrap();
        let quotient = (annulus_count_log(chi1, chi2, eps, d, lsd).unwrap()
            - packing_count_log(chi1, eps, d, lsd).unwrap()).exp();
        if ratio == 0.0 {
            prop_assert_eq!(quotient, 0.0);
        } else {
            prop_assert!(((quotient - ratio) / ratio).abs() < 1e-12, "{quotient} vs {ratio}");
        }
    }

    #[test]
    fn oracle_epsilon_round_trip(
        chi1 in 1e-2f64..1e2, d in 1usize..=50, lsd in -30.0f64..30.0, n in 1usize..10_000_000,
    ) {
        let eps = solve_log_epsilon(chi1, d, lsd, n).unwrap().exp();
        let back = packing_count_log(chi1, eps, d, lsd).unwrap();
        let ln_n = (n as f64).ln();
        prop_assert!((back - ln_n).abs() < 1e-12 * ln_n.max(1.0), "{back} vs {ln_n}");
    }
}

fn monte_carlo_volume(cov: &Array2<f64>, chi: f64, samples: usize, seed: u64) -> f64 {
    let d = cov.nrows();
    let summary = EllipsoidSummary::from_moments(ndarray::Array1::zeros(d), cov.clone(), chi).unwrap();
    // Axis-aligned bounding box half-widths: chi * sqrt(Σ_ii).
    let half: Vec<f64> = (0..d).map(|i| chi * cov[[i, i]].sqrt()).collect();
    let box_volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inside = 0usize;
    let mut x = ndarray::Array1::zeros(d);
    for _ in 0..samples {
        for i in 0..d {
            x[i] = rng.random_range(-half[i]..half[i]);
        }
        if summary.mahalanobis_norm(x.view()).unwrap() <= chi {
            inside += 1;
        }
    }
    box_volume * inside as f64 / samples as f64
}

#[test]
fn volume_formula_matches_monte_carlo() {
    let cases = [
        (array![[2.0, 0.6], [0.6, 0.5]], 1.7_f64),
        (array![[1.0, 0.2, 0.1], [0.2, 3.0, -0.4], [0.1, -0.4, 0.7]], 2.2),
    ];
    for (seed, (cov, chi)) in cases.into_iter().enumerate() {
        let summary = EllipsoidSummary::from_moments(ndarray::Array1::zeros(cov.nrows()), cov.clone(), chi).unwrap();
        let exact = ellipsoid_volume_log(chi, cov.nrows(), summary.log_sqrt_det()).unwrap().exp();
        let mc = monte_carlo_volume(&cov, chi, 1_000_000, seed as u64);
        assert!((mc / exact - 1.0).abs() < 0.02, "d={} mc={mc} exact={exact}", cov.nrows());
    }
}

fn standard_normal(m: usize, d: usize, seed: u64) -> FeatureSet<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FeatureSet::with_sequential_ids(Array2::from_shape_simple_fn((m, d), || rng.sample(StandardNormal))).unwrap()
}

#[test]
fn isotropic_fit_recovers_identity() {
    let fs = standard_normal(20_000, 40, 1);
    let s = EllipsoidSummary::fit(&fs, None).unwrap();
    for &v in s.eigenvalues() {
        assert!((v - 1.0).abs() < 0.1, "{v}");
    }
}

#[test]
fn annulus_counts_follow_chi_distribution() {
    let (m, d) = (20_000, 100);
    let curve = percolation_curve(&standard_normal(m, d, 2), 200, None).unwrap();
    let chi2 = ChiSquared::new(d as f64).unwrap();
    // Finite-sample Mahalanobis norms use the fitted covariance, so allow a
    // few standard errors beyond binomial noise.
    for (&r, &n) in curve.chi_grid.iter().zip(&curve.n_annulus) {
        let expected = chi2.sf(r * r);
        let got = n as f64 / m as f64;
        assert!((got - expected).abs() < 0.03, "r={r} got={got} expected={expected}");
    }
    let root_d = (d as f64).sqrt();
    assert!((curve.critical_chi() / root_d - 1.0).abs() < 0.05);
}

#[test]
fn percolation_sequences_are_non_increasing() {
    for d in [2, 10, 60] {
        let curve = percolation_curve(&standard_normal(5_000, d, d as u64), 120, None).unwrap();
        assert_eq!(curve.n_annulus[0], 5_000);
        assert_eq!(*curve.n_annulus.last().unwrap(), 0);
        assert!(curve.n_annulus.windows(2).all(|w| w[1] <= w[0]));
        assert!(curve.log_n_packing.windows(2).all(|w| w[1] <= w[0]));
        assert!(((curve.log_n_packing[0]).exp() / 5_000.0 - 1.0).abs() < 1e-9);
    }
}

#[test]
fn transition_sharpens_with_dimension() {
    let widths: Vec<f64> = [2, 20, 100]
        .iter()
        .map(|&d| percolation_curve(&standard_normal(20_000, d, 7), 200, None).unwrap().transition_width(0.9, 0.1))
        .collect();
    assert!(widths[0] > widths[1] && widths[1] > widths[2], "{widths:?}");
}

#[test]
fn collinear_data_names_null_dimension() {
    let fs = FeatureSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
    match percolation_curve(&fs, 10, None) {
        Err(curriculum_core::Error::RankDeficient { null_dims, dimension }) => {
            assert_eq!(null_dims.len(), 1);
            assert_eq!(dimension, 2);
        }
        other => panic!("{other:?}"),
    }
    assert!(percolation_curve(&fs, 10, Some(1e-3)).is_ok());
}
