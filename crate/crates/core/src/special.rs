//! Special functions: Stirling corrections, saddle-point binomial and
//! Poisson kernels, the standard Gaussian and the χ² quantile.
//!
//! Point probabilities use Loader's saddle-point decomposition
//!
//! ```text
//! ln b(x; n, p) = stirlerr(n) − stirlerr(x) − stirlerr(n−x)
//!                 − bd0(x, np) − bd0(n−x, nq) − ½ ln(2π x (n−x)/n)
//! ```
//!
//! which keeps full relative accuracy far out in the tails, where summing
//! log-factorials would cancel away most of the significant digits.

use statrs::function::{erf, gamma};

use crate::error::{domain, Result};

/// Circle constant τ = 2π.
pub const TAU: f64 = std::f64::consts::TAU;
/// ln √(2π)
pub const LN_SQRT_TAU: f64 = 0.918_938_533_204_672_8;
/// 1/√(2π)
pub const INV_SQRT_TAU: f64 = 0.398_942_280_401_432_7;

// stirlerr(k/2) for k = 0..=30
const STIRLERR_HALVES: [f64; 31] = [
    0.0,
    0.153_426_409_720_027_35,
    0.081_061_466_795_327_26,
    0.054_814_121_051_917_654,
    0.041_340_695_955_409_294,
    0.033_162_873_519_936_287,
    0.027_677_925_684_998_339,
    0.023_746_163_656_297_496,
    0.020_790_672_103_765_093,
    0.018_488_450_532_673_185,
    0.016_644_691_189_821_192,
    0.015_134_973_221_917_379,
    0.013_876_128_823_070_748,
    0.012_810_465_242_920_227,
    0.011_896_709_945_891_770,
    0.011_104_559_758_206_917,
    0.010_411_265_261_972_096,
    0.009_799_416_126_158_803,
    0.009_255_462_182_712_733,
    0.008_768_700_134_139_385,
    0.008_330_563_433_362_871,
    0.007_934_114_564_314_021,
    0.007_573_675_487_951_841,
    0.007_244_554_301_320_383,
    0.006_942_840_107_209_530,
    0.006_665_247_032_707_682,
    0.006_408_994_188_004_207,
    0.006_171_712_263_039_458,
    0.005_951_370_112_758_848,
    0.005_746_216_513_010_116,
    0.005_554_733_551_962_801,
];

/// Error of Stirling's formula: `ln Γ(x+1) − (x+½) ln x + x − ln √(2π)`.
pub fn stirlerr(x: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;

    if x <= 15.0 {
        let twice = x + x;
        if twice == twice.floor() {
            return STIRLERR_HALVES[twice as usize];
        }
        return libm::lgamma(x + 1.0) - (x + 0.5) * x.ln() + x - LN_SQRT_TAU;
    }
    let xx = x * x;
    if x > 500.0 {
        (S0 - S1 / xx) / x
    } else if x > 80.0 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if x > 35.0 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance term `x ln(x/m) + m − x`, evaluated without cancellation
/// when `x ≈ m`. Nonnegative; `bd0(0, m) = m`.
pub fn bd0(x: f64, m: f64) -> f64 {
    if x == 0.0 {
        return m;
    }
    if (x - m).abs() < 0.1 * (x + m) {
        let mut v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        if s.abs() < f64::MIN_POSITIVE {
            return s;
        }
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
    }
    x * (x / m).ln() + m - x
}

/// `ln` of the binomial point probability with real-valued `x` and `n`.
/// `p + q` must equal one; passing both avoids cancellation in `1 − p`.
pub(crate) fn ln_dbinom_raw(x: f64, n: f64, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if x == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if x == n { 0.0 } else { f64::NEG_INFINITY };
    }
    if x == 0.0 {
        if n == 0.0 {
            return 0.0;
        }
        return if p < 0.1 { -bd0(n, n * q) - n * p } else { n * q.ln() };
    }
    if x == n {
        return if q < 0.1 { -bd0(n, n * p) - n * q } else { n * p.ln() };
    }
    if x < 0.0 || x > n {
        return f64::NEG_INFINITY;
    }
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(x, n * p) - bd0(n - x, n * q);
    let lf = TAU.ln() + x.ln() + (-x / n).ln_1p();
    lc - 0.5 * lf
}

/// `ln` of the Poisson point probability at (real) `x`.
pub(crate) fn ln_dpois_raw(x: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if x == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if x == 0.0 {
        return -lambda;
    }
    -stirlerr(x) - bd0(x, lambda) - 0.5 * (TAU * x).ln()
}

/// `ln` of the hypergeometric point probability: `x` successes when
/// drawing `draws` items from `white + black`.
pub(crate) fn ln_dhyper(x: u64, white: u64, black: u64, draws: u64) -> f64 {
    if draws < x || white < x || draws - x > black {
        return f64::NEG_INFINITY;
    }
    if draws == 0 {
        return 0.0;
    }
    let total = (white + black) as f64;
    let p = draws as f64 / total;
    let q = (white + black - draws) as f64 / total;
    let p1 = ln_dbinom_raw(x as f64, white as f64, p, q);
    let p2 = ln_dbinom_raw((draws - x) as f64, black as f64, p, q);
    let p3 = ln_dbinom_raw(draws as f64, total, p, q);
    p1 + p2 - p3
}

/// Natural log of `n!`.
pub fn ln_factorial(n: u64) -> f64 {
    if n <= 20 {
        let f: u64 = (1..=n).product();
        return (f as f64).ln();
    }
    let x = n as f64;
    stirlerr(x) + (x + 0.5) * x.ln() - x + LN_SQRT_TAU
}

/// Natural log of the binomial coefficient `C(n, k)`.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(domain(format!("log_binomial: k = {k} exceeds n = {n}")));
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    // Stirling with the error terms split off; the entropy part is written
    // with ln1p so that k ≪ n keeps its digits.
    let (nf, kf) = (n as f64, k as f64);
    let mf = (n - k) as f64;
    Ok(stirlerr(nf) - stirlerr(kf) - stirlerr(mf) + kf * (nf / kf).ln() - mf * (-kf / nf).ln_1p()
        + 0.5 * (nf / (TAU * kf * mf)).ln())
}

/// Natural log of Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `exp(−t²/2)` with the square split exactly so large `|t|` keeps
/// full relative precision.
fn exp_neg_half_square(t: f64) -> f64 {
    let hi = t * t;
    let lo = t.mul_add(t, -hi);
    (-0.5 * hi).exp() * (-0.5 * lo).exp()
}

/// Standard Gaussian density φ(t).
pub fn gaussian_pdf(t: f64) -> f64 {
    INV_SQRT_TAU * exp_neg_half_square(t)
}

/// Mills ratio `Φ(−t)/φ(t)` for `t ≥ 8` by Lentz's continued fraction.
fn mills_ratio(t: f64) -> f64 {
    // R(t) = 1/(t + 1/(t + 2/(t + 3/(t + …))))
    let tiny = 1e-300;
    let mut f = t;
    let mut c = t;
    let mut d = 0.0;
    for k in 1..5000 {
        let a = f64::from(k);
        d = t + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = t + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

const TAIL_SWITCH: f64 = 8.0;

/// Standard Gaussian distribution function Φ(t).
pub fn gaussian_cdf(t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    if t < -TAIL_SWITCH {
        return gaussian_pdf(t) * mills_ratio(-t);
    }
    if t > TAIL_SWITCH {
        return 1.0 - gaussian_pdf(t) * mills_ratio(t);
    }
    0.5 * libm::erfc(-t * std::f64::consts::FRAC_1_SQRT_2)
}

/// Natural log of Φ(t), finite far beyond the point where Φ underflows.
pub fn ln_gaussian_cdf(t: f64) -> f64 {
    if t == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if t < -TAIL_SWITCH {
        let hi = t * t;
        let lo = t.mul_add(t, -hi);
        return -0.5 * hi - 0.5 * lo - LN_SQRT_TAU + mills_ratio(-t).ln();
    }
    if t > 0.0 {
        return (-gaussian_cdf(-t)).ln_1p();
    }
    gaussian_cdf(t).ln()
}

/// Inverse of Φ: returns `t` with `Φ(t) = u`.
pub fn gaussian_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(domain(format!("gaussian_quantile: u = {u} is not in (0, 1)")));
    }
    if u == 0.5 {
        return Ok(0.0);
    }
    let mut t = -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * u);
    // Halley polish on Φ(t) − u, working on the smaller tail.
    for _ in 0..2 {
        let (resid, dens) = if t < 0.0 {
            (gaussian_cdf(t) - u, gaussian_pdf(t))
        } else {
            ((1.0 - u) - gaussian_cdf(-t), gaussian_pdf(t))
        };
        if dens == 0.0 || resid == 0.0 {
            break;
        }
        let step = resid / dens;
        t -= step / (1.0 + 0.5 * t * step);
    }
    Ok(t)
}

/// Inverse of Φ from `ln u`, for lower-tail probabilities too small to
/// represent directly. `ln u = −∞` maps to `−∞`.
pub fn gaussian_quantile_ln(ln_u: f64) -> Result<f64> {
    if ln_u == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if !(ln_u < 0.0) {
        return Err(domain(format!("gaussian_quantile_ln: ln u = {ln_u} is not negative")));
    }
    if ln_u > -700.0 {
        return gaussian_quantile(ln_u.exp());
    }
    // Newton on ln Φ(t) − ln u; ln Φ is concave, so this converges from
    // the right.
    let mut t = -(-2.0 * ln_u).sqrt();
    for _ in 0..100 {
        let ln_cdf = ln_gaussian_cdf(t);
        let slope = (-0.5 * t * t - LN_SQRT_TAU - ln_cdf).exp();
        let step = (ln_cdf - ln_u) / slope;
        t -= step;
        if step.abs() <= 1e-15 * t.abs() {
            break;
        }
    }
    Ok(t)
}

/// Distribution function of χ² with `df` degrees of freedom.
pub fn chi2_cdf(df: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma::gamma_lr(f64::from(df) / 2.0, x / 2.0)
}

/// Quantile of χ² with `df` degrees of freedom.
pub fn chi2_quantile(df: u32, u: f64) -> Result<f64> {
    if df == 0 {
        return Err(domain("chi2_quantile: df must be at least 1"));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(domain(format!("chi2_quantile: u = {u} is not in (0, 1)")));
    }
    match df {
        1 => {
            // χ²(1) is the square of a standard Gaussian.
            let z = if u < 0.5 {
                -gaussian_quantile(0.5 * (1.0 - u))?
            } else {
                gaussian_quantile(0.5 * (1.0 + u))?
            };
            Ok(z * z)
        }
        2 => Ok(-2.0 * (-u).ln_1p()),
        _ => Ok(chi2_quantile_newton(df, u)),
    }
}

fn chi2_quantile_newton(df: u32, u: f64) -> f64 {
    let k = f64::from(df);
    let shape = k / 2.0;
    // Wilson–Hilferty start
    let z = gaussian_quantile(u).unwrap_or(0.0);
    let c = 2.0 / (9.0 * k);
    let mut x = (k * (1.0 - c + z * c.sqrt()).powi(3)).max(1e-8);

    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..200 {
        let f = gamma::gamma_lr(shape, x / 2.0) - u;
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let ln_dens = (shape - 1.0) * (x / 2.0).ln() - x / 2.0 - libm::lgamma(shape) - std::f64::consts::LN_2;
        let mut next = x - f / ln_dens.exp();
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(1.0) };
        }
        if (next - x).abs() <= 1e-15 * x.abs() {
            return next;
        }
        x = next;
    }
    x
}

/// Lower regularized incomplete gamma P(a, x).
pub(crate) fn gamma_lower_regularized(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma::gamma_lr(a, x)
}

/// Upper regularized incomplete gamma Q(a, x).
pub(crate) fn gamma_upper_regularized(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma::gamma_ur(a, x)
}

/// `ln(e^a + e^b)`
pub(crate) fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stirlerr_table_matches_series_at_boundary() {
        // The series branch just above 15 should continue the table smoothly.
        let a = stirlerr(15.0);
        let b = stirlerr(15.000001);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn quantile_from_log_matches_direct_and_deep_tail() {
        for u in [1e-3, 0.2, 0.7] {
            let a = gaussian_quantile(u).unwrap();
            let b = gaussian_quantile_ln(f64::ln(u)).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
        // Φ(−40) = e^{−804.608442013753788...}
        let t = gaussian_quantile_ln(-804.608_442_013_753_8).unwrap();
        assert!((t + 40.0).abs() < 1e-12, "{t}");
        assert_eq!(gaussian_quantile_ln(f64::NEG_INFINITY).unwrap(), f64::NEG_INFINITY);
        assert!(gaussian_quantile_ln(0.0).is_err());
    }

    #[test]
    fn stirlerr_between_table_points() {
        // 30-digit reference for stirlerr(2.3).
        assert!((stirlerr(2.3) - 0.036_014_500_471_770_627).abs() < 1e-15);
    }

    #[test]
    fn bd0_is_zero_on_diagonal_and_m_at_origin() {
        assert_eq!(bd0(7.0, 7.0), 0.0);
        assert_eq!(bd0(0.0, 3.5), 3.5);
        assert!(bd0(3.0, 7.0) > 0.0);
        let direct = 3.0 * (3.0f64 / 7.0).ln() + 7.0 - 3.0;
        assert!((bd0(3.0, 7.0) - direct).abs() < 1e-14);
    }

    #[test]
    fn log_binomial_small_cases() {
        assert_eq!(log_binomial(5, 0).unwrap(), 0.0);
        assert!((log_binomial(4, 2).unwrap() - 6f64.ln()).abs() < 1e-14);
        assert!(log_binomial(3, 4).is_err());
    }

    #[test]
    fn ln_factorial_small_is_exact_log() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(5), 120f64.ln());
        let stirling = ln_factorial(21);
        let direct = ln_factorial(20) + 21f64.ln();
        assert!((stirling - direct).abs() < 1e-13);
    }

    #[test]
    fn gaussian_cdf_symmetry() {
        for &a in &[0.1, 0.7, 1.3, 2.9, 5.5, 9.0] {
            assert!((gaussian_cdf(a) + gaussian_cdf(-a) - 1.0).abs() <= 1e-15);
        }
        assert_eq!(gaussian_cdf(0.0), 0.5);
    }

    #[test]
    fn ln_gaussian_cdf_far_tail_is_finite() {
        let v = ln_gaussian_cdf(-40.0);
        // ln Φ(−40) from a 40-digit evaluation
        assert!((v - (-804.608_442_013_753_8)).abs() < 1e-10, "{v}");
        assert!((ln_gaussian_cdf(-3.0) - gaussian_cdf(-3.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn quantile_rejects_outside_open_interval() {
        assert!(gaussian_quantile(0.0).is_err());
        assert!(gaussian_quantile(1.0).is_err());
        assert!(gaussian_quantile(f64::NAN).is_err());
        assert!(chi2_quantile(0, 0.5).is_err());
        assert!(chi2_quantile(3, 1.0).is_err());
    }

    #[test]
    fn chi2_quantile_inverts_cdf_for_several_df() {
        for df in [3u32, 4, 7, 20] {
            for &u in &[1e-6, 0.01, 0.3, 0.5, 0.9, 0.999] {
                let x = chi2_quantile(df, u).unwrap();
                assert!((chi2_cdf(df, x) - u).abs() < 1e-12 * u.max(1e-3), "df={df} u={u}");
            }
        }
    }

    #[test]
    fn ln_add_exp_handles_infinities() {
        assert_eq!(ln_add_exp(f64::NEG_INFINITY, 1.0), 1.0);
        assert!((ln_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
    }
}
