//! Independent reference computations for the integration tests. Nothing
//! here calls into the library.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

pub fn binomial_coefficient(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `num/den` rounded to a double (about 1e-16 relative).
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let q = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let lead = q.bits().saturating_sub(64);
    let top = (q >> lead).to_f64().unwrap();
    top * 2f64.powi(lead as i32 - shift as i32)
}

/// Natural log of a big integer.
pub fn ln_big(m: &BigUint) -> f64 {
    let lead = m.bits().saturating_sub(64);
    (m >> lead).to_f64().unwrap().ln() + lead as f64 * std::f64::consts::LN_2
}

/// Exact hypergeometric point probability for margins (N, n, r).
pub fn hyper_pmf(total: u64, n: u64, r: u64, x: u64) -> f64 {
    if x > n || x > r || n - x > total - r {
        return 0.0;
    }
    let num = binomial_coefficient(r, x) * binomial_coefficient(total - r, n - x);
    ratio_to_f64(&num, &binomial_coefficient(total, n))
}

/// Exact hypergeometric `Pr(X ≤ x)`.
pub fn hyper_cdf(total: u64, n: u64, r: u64, x: u64) -> f64 {
    let mut num = BigUint::zero();
    for i in 0..=x.min(n).min(r) {
        if n - i <= total - r {
            num += binomial_coefficient(r, i) * binomial_coefficient(total - r, n - i);
        }
    }
    ratio_to_f64(&num, &binomial_coefficient(total, n))
}

/// `p = a / 2^s` exactly.
pub fn dyadic(p: f64) -> (BigUint, u64) {
    let bits = p.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = (bits & ((1 << 52) - 1)) | (1 << 52);
    let e = exp - 1075;
    assert!(e < 0 && exp > 0, "oracle handles normal p < 1 only");
    let mut a = BigUint::from(mant);
    let mut s = (-e) as u64;
    while s > 0 && (&a % 2u32).is_zero() {
        a >>= 1;
        s -= 1;
    }
    (a, s)
}

/// Exact binomial `Pr(X ≤ x)` for a double `p`, taken as its dyadic value.
pub fn binomial_cdf(n: u64, p: f64, x: u64) -> f64 {
    let (a, s) = dyadic(p);
    let b = BigUint::one() << s;
    let q = &b - &a;
    let mut num = BigUint::zero();
    for i in 0..=x.min(n) {
        num += binomial_coefficient(n, i) * a.pow(i as u32) * q.pow((n - i) as u32);
    }
    ratio_to_f64(&num, &b.pow(n as u32))
}

pub fn binomial_pmf(n: u64, p: f64, x: u64) -> f64 {
    let (a, s) = dyadic(p);
    let b = BigUint::one() << s;
    let q = &b - &a;
    let num = binomial_coefficient(n, x) * a.pow(x as u32) * q.pow((n - x) as u32);
    ratio_to_f64(&num, &b.pow(n as u32))
}

/// Standard Gaussian cdf: power series for |t| < 1, the Laplace continued
/// fraction `Φ(−t) = φ(t) / (t + 1/(t + 2/(t + 3/(t + …))))` evaluated
/// bottom-up otherwise.
pub fn phi(t: f64) -> f64 {
    let pdf = (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if t.abs() < 1.0 {
        let mut term = t;
        let mut sum = t;
        let mut n = 1.0;
        while term.abs() > 1e-20 {
            term *= t * t / (2.0 * n + 1.0);
            sum += term;
            n += 1.0;
        }
        return 0.5 + pdf * sum;
    }
    let a = t.abs();
    let mut frac = a;
    for k in (1..6000).rev() {
        frac = a + k as f64 / frac;
    }
    let tail = pdf / frac;
    if t < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// χ² cdf: closed forms for df = 1 and even df.
pub fn chi2_cdf(df: u32, x: f64) -> f64 {
    if df == 1 {
        return 2.0 * phi(x.sqrt()) - 1.0;
    }
    assert!(df % 2 == 0, "oracle handles df = 1 and even df");
    let h = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..df / 2 {
        term *= h / f64::from(k);
        sum += term;
    }
    1.0 - (-h).exp() * sum
}

/// Bisection root of an increasing function on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Inverse Gaussian density.
pub fn ig_density(mu: f64, lambda: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (lambda / (2.0 * std::f64::consts::PI * x.powi(3))).sqrt()
        * (-lambda * (x - mu).powi(2) / (2.0 * mu * mu * x)).exp()
}

/// Case count of the exhaustive loop program, tallied with floating
/// comparisons as the original does.
pub fn exhaustive_case_count(n_max: u64) -> u64 {
    let mut count = 0;
    for tot in 4..=n_max {
        for n in 2..=tot - 2 {
            let k = tot - n;
            for r in 2..=(n + k - 2) {
                let mut x = (r as i64 - k as i64 + 1).max(1) as f64;
                while x < (n * r) as f64 / (n + k) as f64 {
                    count += 1;
                    x += 1.0;
                }
            }
        }
    }
    count
}

/// Case count of the pruned loop program up to `tot_max`.
pub fn pruned_case_count(tot_max: u64) -> u64 {
    let mut count = 0;
    for tot in 4..=tot_max {
        let n_top = (tot - 2).min(227);
        for n in 2..=n_top {
            let k = tot - n;
            let bound = ((n + k - 2) as f64).min(227.0).min(22.7 * (1.0 + k as f64 / n as f64));
            let mut r = 2u64;
            while r as f64 <= bound {
                let mut x = (r as i64 - k as i64 + 1).max(1) as f64;
                while x < 10.0 && x < (n * r) as f64 / (n + k) as f64 {
                    count += 1;
                    x += 1.0;
                }
                r += 1;
            }
        }
    }
    count
}

/// Relative difference, with both-zero treated as equal.
pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b.abs().max(a.abs())).abs()
    }
}

/// Abscissae of the quantile plot for Hypergeometric(40, 15, 15), x = 0..=15.
pub const PLOT_G_40_15_15: [f64; 16] = [
    -4.390_270_572_8,
    -3.358_670_605_5,
    -2.554_892_694_7,
    -1.815_389_212_3,
    -1.109_555_720_8,
    -0.423_143_773_8,
    0.252_585_238_4,
    0.924_060_006_0,
    1.596_776_096_0,
    2.276_117_887_5,
    2.968_082_348_4,
    3.680_232_321_5,
    4.423_430_431_6,
    5.215_971_285_1,
    6.097_536_458_4,
    7.274_961_103_2,
];

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `∏Rᵢ! ∏Sⱼ! / (N! ∏xᵢⱼ!)` from exact factorials.
pub fn table_probability(rows: &[Vec<u64>]) -> f64 {
    let cols = rows[0].len();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    let mut total = 0;
    for row in rows {
        num *= factorial(row.iter().sum());
        for &x in row {
            den *= factorial(x);
            total += x;
        }
    }
    for j in 0..cols {
        num *= factorial(rows.iter().map(|r| r[j]).sum());
    }
    den *= factorial(total);
    ratio_to_f64(&num, &den)
}

/// Calls `f` on every `rows × cols` table with all cells ≥ 1 and total at
/// most `n_max`.
pub fn for_each_positive_table(rows: usize, cols: usize, n_max: u64, mut f: impl FnMut(&[Vec<u64>])) {
    fn fill(cells: &mut Vec<u64>, slots: usize, budget: u64, cols: usize, f: &mut dyn FnMut(&[Vec<u64>])) {
        if cells.len() == slots {
            let table: Vec<Vec<u64>> = cells.chunks(cols).map(|c| c.to_vec()).collect();
            f(&table);
            return;
        }
        let remaining = (slots - cells.len() - 1) as u64;
        let mut v = 1;
        while v + remaining <= budget {
            cells.push(v);
            fill(cells, slots, budget - v, cols, f);
            cells.pop();
            v += 1;
        }
    }
    fill(&mut Vec::new(), rows * cols, n_max, cols, &mut f);
}

/// `Σ x ln x − Σ R ln R − Σ S ln S + N ln N` with `0 ln 0 = 0`.
pub fn xlnx_ni(rows: &[Vec<u64>]) -> f64 {
    let xlnx = |v: u64| if v == 0 { 0.0 } else { v as f64 * (v as f64).ln() };
    let cols = rows[0].len();
    let total: u64 = rows.iter().flatten().sum();
    let cells: f64 = rows.iter().flatten().map(|&v| xlnx(v)).sum();
    let r: f64 = rows.iter().map(|row| xlnx(row.iter().sum())).sum();
    let s: f64 = (0..cols).map(|j| xlnx(rows.iter().map(|row| row[j]).sum())).sum();
    cells - r - s + xlnx(total)
}
