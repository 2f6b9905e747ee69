mod common;

use common::{binomial_coefficient, hyper_cdf, hyper_pmf, ln_big, rel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siglik::special::{
    chi2_cdf, chi2_quantile, gaussian_cdf, gaussian_quantile, ln_gaussian_cdf, log_binomial,
};
use siglik::{poisson_binomial_pmf, tilt_poisson_binomial, DistSpec};

#[test]
fn log_binomial_small_cases() {
    assert_eq!(log_binomial(5, 0).unwrap(), 0.0);
    assert!((log_binomial(4, 2).unwrap() - 6f64.ln()).abs() < 1e-15);
    let exact = ln_big(&binomial_coefficient(40, 15));
    assert!(rel(log_binomial(40, 15).unwrap(), exact) < 1e-12);
    assert!(log_binomial(3, 4).is_err());
}

#[test]
fn log_binomial_against_big_integers() {
    for n in [10u64, 57, 200, 1000, 2270] {
        for k in [1, 2, n / 7, n / 3, n / 2, n - 1] {
            let exact = ln_big(&binomial_coefficient(n, k));
            let got = log_binomial(n, k).unwrap();
            assert!(rel(got, exact) < 1e-13, "C({n},{k}): {got} vs {exact}");
        }
    }
    // Near the top of the supported range the absolute error stays below
    // 1e-12 while the value is small enough to carry that many digits.
    for k in [1u64, 2, 10, 50] {
        let exact = ln_big(&binomial_coefficient(1_000_000, k));
        let got = log_binomial(1_000_000, k).unwrap();
        assert!((got - exact).abs() < 1e-12 * exact.max(1.0), "k={k}: {got} vs {exact}");
    }
}

#[test]
fn hypergeometric_pmf_and_cdf_match_exact_rationals() {
    let d = DistSpec::hypergeometric(40, 15, 15).unwrap();
    for x in 0..=15u64 {
        let xf = x as f64;
        assert!(rel(d.pmf(xf).unwrap(), hyper_pmf(40, 15, 15, x)) < 1e-12, "pmf {x}");
        assert!(rel(d.cdf(xf).unwrap(), hyper_cdf(40, 15, 15, x)) < 1e-12, "cdf {x}");
    }
    assert_eq!(d.cdf(15.0).unwrap(), 1.0);
    assert!((DistSpec::hypergeometric(2, 1, 1).unwrap().pmf(1.0).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn hypergeometric_moments() {
    for &(total, n, r) in &[(40u64, 15u64, 15u64), (100, 30, 71), (2270, 227, 33), (7, 7, 3)] {
        let d = DistSpec::hypergeometric(total, n, r).unwrap();
        let (lo, hi) = d.support().unwrap();
        let hi = hi.unwrap();
        let (mut m1, mut m2) = (0.0, 0.0);
        for x in lo..=hi {
            let p = d.pmf(x as f64).unwrap();
            m1 += x as f64 * p;
            m2 += (x * x) as f64 * p;
        }
        let (nf, nn, rf) = (total as f64, n as f64, r as f64);
        let mean = nn * rf / nf;
        let var = if total > 1 {
            nn * rf * (nf - rf) * (nf - nn) / (nf * nf * (nf - 1.0))
        } else {
            0.0
        };
        assert!(rel(m1, mean) < 1e-8, "{total},{n},{r}");
        assert!((m2 - m1 * m1 - var).abs() <= 1e-8 * var.max(1e-300), "{total},{n},{r}");
        assert!(rel(d.mean(), mean) < 1e-15);
        assert!((d.variance() - var).abs() <= 1e-12 * var.max(1e-300));
    }
}

#[test]
fn binomial_matches_dyadic_oracle() {
    for &(n, p) in &[(10u64, 0.3), (50, 0.01), (120, 0.77), (200, 0.5)] {
        let d = DistSpec::binomial(n, p).unwrap();
        for x in [0, 1, n / 4, n / 2, n - 1, n] {
            let xf = x as f64;
            assert!(rel(d.pmf(xf).unwrap(), common::binomial_pmf(n, p, x)) < 1e-12, "pmf n={n} x={x}");
            let exact = common::binomial_cdf(n, p, x);
            assert!(rel(d.cdf(xf).unwrap(), exact) < 1e-12, "cdf n={n} x={x}");
        }
    }
}

#[test]
fn poisson_pruning_constant() {
    let c = DistSpec::poisson(22.7).unwrap().cdf(9.0).unwrap();
    assert!(c > 0.0009 && c <= 0.000974, "{c}");
    // Direct term-by-term sum, all terms positive.
    let mut term = (-22.7f64).exp();
    let mut sum = term;
    for k in 1..=9 {
        term *= 22.7 / k as f64;
        sum += term;
    }
    assert!(rel(c, sum) < 1e-13);
}

#[test]
fn negative_binomial_pmf_for_integer_shape() {
    // C(k+ℓ−1, k) p^ℓ (1−p)^k
    for &(p, ell) in &[(0.5, 1u64), (0.3, 4), (0.9, 20)] {
        let d = DistSpec::neg_binomial(p, ell as f64).unwrap();
        for k in [0u64, 1, 3, 10, 40] {
            let c = ln_big(&binomial_coefficient(k + ell - 1, k));
            let expected = (c + ell as f64 * p.ln() + k as f64 * (1.0 - p).ln()).exp();
            assert!(rel(d.pmf(k as f64).unwrap(), expected) < 1e-12, "p={p} ell={ell} k={k}");
        }
    }
}

#[test]
fn gamma_cdf_closed_forms() {
    let d = DistSpec::gamma(1.0, 1.0).unwrap();
    assert!(rel(d.cdf(1.0).unwrap(), 1.0 - (-1f64).exp()) < 1e-14);
    // Integer shape: Erlang.
    let (alpha, mean) = (3.0, 2.0);
    let d = DistSpec::gamma(alpha, mean).unwrap();
    let theta = mean / alpha;
    for x in [0.1, 0.7, 2.0, 5.5, 12.0] {
        let h: f64 = x / theta;
        let expected = 1.0 - (-h).exp() * (1.0 + h + h * h / 2.0);
        assert!(rel(d.cdf(x).unwrap(), expected) < 1e-12, "x={x}");
    }
    // Half-integer shape: an error function.
    let d = DistSpec::gamma(0.5, 1.0).unwrap();
    for x in [0.01f64, 0.4, 1.0, 3.0] {
        let expected = 2.0 * common::phi(x.sqrt()) - 1.0;
        assert!(rel(d.cdf(x).unwrap(), expected) < 1e-12, "x={x}");
    }
}

#[test]
fn inverse_gaussian_density_and_cdf() {
    let d = DistSpec::inverse_gaussian(1.0, 1.0).unwrap();
    assert!(rel(d.pmf(1.0).unwrap(), 1.0 / (2.0 * std::f64::consts::PI).sqrt()) < 1e-15);
    for &(mu, lambda) in &[(1.0, 1.0), (0.3, 5.0), (4.0, 0.5), (2.0, 40.0)] {
        let d = DistSpec::inverse_gaussian(mu, lambda).unwrap();
        let dens = |x: f64| common::ig_density(mu, lambda, x);
        for x in [0.25 * mu, mu, 2.5 * mu] {
            let quad = common::integrate(&dens, 1e-12, x, 1e-15);
            let got = d.cdf(x).unwrap();
            assert!((got - quad).abs() < 1e-9, "mu={mu} lambda={lambda} x={x}: {got} vs {quad}");
            assert!(rel(d.pmf(x).unwrap(), dens(x)) < 1e-13);
        }
    }
}

#[test]
fn out_of_support_and_bad_points() {
    let d = DistSpec::binomial(5, 0.5).unwrap();
    assert_eq!(d.pmf(6.0).unwrap(), 0.0);
    assert!(d.pmf(-1.0).is_err());
    assert!(d.pmf(1.5).is_err());
    assert!(DistSpec::gamma(1.0, 1.0).unwrap().cdf(-0.5).is_err());
}

#[test]
fn gaussian_cdf_against_continued_fraction() {
    assert_eq!(gaussian_cdf(0.0), 0.5);
    let t = -3.358_670_605_5;
    assert!(rel(gaussian_cdf(t), common::phi(t)) < 1e-10);
    for t in [-37.5, -20.0, -8.5, -5.0, -1.7, -0.3, 0.2, 0.9, 1.0] {
        assert!(rel(gaussian_cdf(t), common::phi(t)) < 1e-14, "t={t}");
    }
    for a in [0.1, 1.0, 3.0, 8.0] {
        assert!((gaussian_cdf(a) + gaussian_cdf(-a) - 1.0).abs() <= 1e-15);
    }
    // The log form stays finite past f64 underflow: ln Φ(−40) from mpmath.
    assert!(rel(ln_gaussian_cdf(-40.0), -804.608_442_013_753_8) < 1e-14);
}

#[test]
fn gaussian_quantile_round_trips() {
    assert_eq!(gaussian_quantile(0.5).unwrap(), 0.0);
    assert!((gaussian_quantile(gaussian_cdf(1.7)).unwrap() - 1.7).abs() < 1e-12);
    let oracle = common::bisect(|t| common::phi(t) - 0.025, -5.0, 0.0);
    assert!((gaussian_quantile(0.025).unwrap() - oracle).abs() < 1e-12);
    assert!((oracle + 1.959_964).abs() < 1e-6);
    for u in [1e-300, 1e-20, 1e-5, 0.2, 0.7, 0.999_999] {
        let t = gaussian_quantile(u).unwrap();
        assert!((gaussian_cdf(t) - u).abs() <= 1e-12 * u.max(1e-3), "u={u}");
    }
    assert!(gaussian_quantile(0.0).is_err());
    assert!(gaussian_quantile(1.0).is_err());
}

#[test]
fn chi2_quantiles() {
    let u = 2.0 * common::phi(2.0) - 1.0;
    assert!((chi2_quantile(1, u).unwrap() - 4.0).abs() < 1e-10);
    assert!((chi2_quantile(2, 0.5).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);
    let oracle = common::bisect(|x| common::chi2_cdf(1, x) - 0.95, 0.0, 20.0);
    assert!(rel(chi2_quantile(1, 0.95).unwrap(), oracle) < 1e-10);
    assert!((oracle - 3.84146).abs() < 1e-5);
    for df in [2u32, 4, 10] {
        for u in [0.01, 0.3, 0.5, 0.9, 0.999] {
            let oracle = common::bisect(|x| common::chi2_cdf(df, x) - u, 0.0, 200.0);
            assert!(rel(chi2_quantile(df, u).unwrap(), oracle) < 1e-10, "df={df} u={u}");
            assert!((chi2_cdf(df, oracle) - u).abs() < 1e-12);
        }
    }
    for u in [0.001, 0.2, 0.6, 0.99] {
        let z = gaussian_quantile((1.0 + u) / 2.0).unwrap();
        assert!(rel(chi2_quantile(1, u).unwrap(), z * z) < 1e-10);
    }
    assert!(chi2_quantile(0, 0.5).is_err());
    assert!(chi2_quantile(3, 1.0).is_err());
}

#[test]
fn poisson_binomial_equals_binomial_for_equal_probabilities() {
    for n in [1usize, 7, 25, 50] {
        for p in [0.05, 0.5, 0.83] {
            let pb = poisson_binomial_pmf(&vec![p; n]);
            let b = DistSpec::binomial(n as u64, p).unwrap();
            for (k, &v) in pb.iter().enumerate() {
                assert!((v - b.pmf(k as f64).unwrap()).abs() < 1e-12, "n={n} p={p} k={k}");
            }
        }
    }
    assert_eq!(poisson_binomial_pmf(&[0.5, 0.5])[1], 0.5);
    let d = DistSpec::poisson_binomial(vec![0.5, 0.5]).unwrap();
    assert_eq!(d.pmf(1.0).unwrap(), 0.5);
}

/// Tilts `probs` until their sum is `target`.
fn tilt_to_mean(probs: &[f64], target: f64) -> Vec<f64> {
    let mean = |b: f64| tilt_poisson_binomial(probs, b).unwrap().iter().sum::<f64>() - target;
    let beta = common::bisect(mean, -60.0, 60.0);
    tilt_poisson_binomial(probs, beta).unwrap()
}

#[test]
fn poisson_binomial_median_is_the_integer_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let n = rng.random_range(2..=25usize);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.02..0.98)).collect();
        let m = rng.random_range(1..n);
        let probs = tilt_to_mean(&raw, m as f64);
        let pmf = poisson_binomial_pmf(&probs);
        let below: f64 = pmf[..m].iter().sum();
        let upto = below + pmf[m];
        assert!(below < 0.5 && 0.5 < upto, "n={n} m={m}: {below} {upto}");
    }
}

#[test]
fn tilt_commutes_with_pmf_tilting() {
    assert_eq!(tilt_poisson_binomial(&[0.2, 0.7], 0.0).unwrap(), vec![0.2, 0.7]);
    assert!((tilt_poisson_binomial(&[0.5], 3f64.ln()).unwrap()[0] - 0.75).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.random_range(1..=30usize);
        let probs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let beta = rng.random_range(-3.0..3.0);
        let tilted = poisson_binomial_pmf(&tilt_poisson_binomial(&probs, beta).unwrap());
        let base = poisson_binomial_pmf(&probs);
        let weights: Vec<f64> = base.iter().enumerate().map(|(j, p)| (beta * j as f64).exp() * p).collect();
        let z: f64 = weights.iter().sum();
        for (a, w) in tilted.iter().zip(&weights) {
            assert!((a - w / z).abs() < 1e-10);
        }
        let back = tilt_poisson_binomial(&tilt_poisson_binomial(&probs, beta).unwrap(), -beta).unwrap();
        for (a, b) in back.iter().zip(&probs) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}

fn finite_discrete() -> impl Strategy<Value = DistSpec> {
    prop_oneof![
        (1u64..300, 0u64..300, 0u64..300).prop_map(|(t, a, b)| DistSpec::hypergeometric(t, a % (t + 1), b % (t + 1)).unwrap()),
        (1u64..400, 0.0f64..=1.0).prop_map(|(n, p)| DistSpec::binomial(n, p).unwrap()),
        proptest::collection::vec(0.0f64..=1.0, 0..40).prop_map(|v| DistSpec::poisson_binomial(v).unwrap()),
    ]
}

proptest! {
    #[test]
    fn pmf_sums_to_one_and_cdf_is_monotone(d in finite_discrete()) {
        let (lo, hi) = d.support().unwrap();
        let hi = hi.unwrap();
        let mut total = 0.0;
        let mut prev = 0.0;
        for x in lo..=hi {
            let xf = x as f64;
            total += d.pmf(xf).unwrap();
            let c = d.cdf(xf).unwrap();
            prop_assert!(c >= prev - 1e-15);
            prop_assert!((c + d.sf(xf).unwrap() - 1.0).abs() < 1e-12);
            prev = c;
        }
        prop_assert!((total - 1.0).abs() < 1e-10);
        prop_assert_eq!(d.cdf(hi as f64).unwrap(), 1.0);
    }

    #[test]
    fn tilt_inverts(probs in proptest::collection::vec(0.0f64..=1.0, 1..20), beta in -5.0f64..5.0) {
        let back = tilt_poisson_binomial(&tilt_poisson_binomial(&probs, beta).unwrap(), -beta).unwrap();
        for (a, b) in back.iter().zip(&probs) {
            prop_assert!((a - b).abs() < 1e-13);
        }
    }
}
