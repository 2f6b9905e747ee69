//! Arbitrary-precision recheck of one sandwich inequality.
//!
//! All quantities are fixed-point integers `v·2^P`. Tail probabilities of
//! hypergeometric and binomial laws are exact rationals rounded once to
//! fixed point; Poisson tails multiply an exact rational sum by a
//! fixed-point `e^{−λ}`. `Φ(g)` comes from the all-positive series
//!
//! ```text
//! Φ(t) = 1/2 + φ(t) · Σₙ t^{2n+1} / (1·3·5···(2n+1))
//! ```
//!
//! whose only cancellation is the final subtraction for `t < 0`; the
//! working precision is sized for it.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dist::DistSpec;

/// Guard bits kept below the precision used for decisions.
const GUARD: u64 = 96;
const MAX_PRECISION: u64 = 1 << 17;

/// Outcome of one strict inequality after the precise recheck.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Verdict {
    Holds,
    Fails,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Sandwich {
    /// `Pr(X < x) < Φ(g(x))`
    pub lower: Verdict,
    /// `Φ(g(x)) < Pr(X ≤ x)`
    pub upper: Verdict,
}

/// Rechecks `Pr(X<x) < Φ(g(x)) < Pr(X≤x)` for hypergeometric, binomial and
/// Poisson laws. Returns `None` for families without an exact path.
/// `magnitude_bits` estimates how far below 1 the smallest quantity
/// involved is, in bits; `t` is the double-precision `|g(x)|`.
pub(crate) fn recheck(dist: &DistSpec, x: u64, t: f64, magnitude_bits: f64) -> Option<Sandwich> {
    let exact_family = matches!(
        dist,
        DistSpec::Hypergeometric { .. } | DistSpec::Binomial { .. } | DistSpec::Poisson { .. }
    );
    if !exact_family {
        return None;
    }
    let mut p = 256 + (3.0 * t * t).ceil() as u64 + magnitude_bits.max(0.0).ceil() as u64;
    let mut last = None;
    while p <= MAX_PRECISION {
        let s = sandwich_at(dist, x, p)?;
        let decided = s.lower != Verdict::Undecided && s.upper != Verdict::Undecided;
        last = Some(s);
        if decided {
            break;
        }
        p *= 2;
    }
    last
}

fn sandwich_at(dist: &DistSpec, x: u64, p: u64) -> Option<Sandwich> {
    let fx = Fixed::new(p + GUARD);
    let (lower, upper) = tails(dist, x, &fx)?;
    let d = divergence(dist, x, &fx)?;
    let mut phi = fx.phi_from_divergence(&d);
    if (x as f64) >= dist.mean() {
        phi = fx.one() - phi;
    }
    let margin = BigInt::one() << (GUARD / 2 + 16);
    let compare = |a: &BigInt, b: &BigInt| {
        let diff = b - a;
        if diff.abs() <= margin {
            Verdict::Undecided
        } else if diff.is_positive() {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    };
    Some(Sandwich {
        lower: compare(&lower, &phi),
        upper: compare(&phi, &upper),
    })
}

/// Fixed-point `(Pr(X < x), Pr(X ≤ x))`.
fn tails(dist: &DistSpec, x: u64, fx: &Fixed) -> Option<(BigInt, BigInt)> {
    match *dist {
        DistSpec::Hypergeometric {
            population,
            draws,
            successes,
        } => {
            let lo = (draws + successes).saturating_sub(population);
            let denom = binomial(population, draws);
            let mut below = BigUint::zero();
            let mut i = lo;
            while i < x {
                below += binomial(successes, i) * binomial(population - successes, draws - i);
                i += 1;
            }
            let at = binomial(successes, x) * binomial(population - successes, draws - x);
            let upto = &below + at;
            Some((fx.ratio(&below, &denom), fx.ratio(&upto, &denom)))
        }
        DistSpec::Binomial { n, p } => {
            let (a, shift) = dyadic(p)?;
            let b = BigUint::one() << shift;
            let q = &b - &a;
            let mut below = BigUint::zero();
            for i in 0..x {
                below += binomial(n, i) * a.pow(i as u32) * q.pow((n - i) as u32);
            }
            let upto = &below + binomial(n, x) * a.pow(x as u32) * q.pow((n - x) as u32);
            let denom = b.pow(n as u32);
            Some((fx.ratio(&below, &denom), fx.ratio(&upto, &denom)))
        }
        DistSpec::Poisson { lambda } => {
            let (a, shift) = dyadic(lambda)?;
            // Σ_{i≤k} λ^i/i! over the common denominator k!·2^{shift·k}.
            let partial = |k: u64| -> (BigUint, BigUint) {
                let mut num = BigUint::zero();
                let mut term_den = BigUint::one();
                let b = BigUint::one() << shift;
                let den = factorial(k) * b.pow(k as u32);
                for i in 0..=k {
                    if i > 0 {
                        term_den *= BigUint::from(i) * &b;
                    }
                    num += a.pow(i as u32) * (&den / &term_den);
                }
                (num, den)
            };
            let e = fx.exp(&-fx.ratio(&a, &(BigUint::one() << shift)));
            let scaled = |(num, den): (BigUint, BigUint)| fx.mul(&e, &fx.ratio(&num, &den));
            let below = if x == 0 { BigInt::zero() } else { scaled(partial(x - 1)) };
            let upto = scaled(partial(x));
            Some((below, upto))
        }
        _ => None,
    }
}

/// Fixed-point divergence, summed from `c·ln(c/e)` cell terms with `e`
/// rational.
fn divergence(dist: &DistSpec, x: u64, fx: &Fixed) -> Option<BigInt> {
    // Each entry is (count c, expected numerator, expected denominator);
    // the divergence is Σ c·ln(c·den/num) + (Σ e − Σ c), the last bracket
    // being zero for all three families below except Poisson.
    let mut total = BigInt::zero();
    let mut add = |c: u64, num: BigUint, den: BigUint| {
        if c > 0 {
            let ratio_num = BigUint::from(c) * den;
            total += fx.ln_ratio(&ratio_num, &num) * BigInt::from(c);
        }
    };
    match *dist {
        DistSpec::Hypergeometric {
            population,
            draws,
            successes,
        } => {
            let (nn, n, r) = (population, draws, successes);
            let den = BigUint::from(nn);
            add(x, BigUint::from(n) * r, den.clone());
            add(r - x, BigUint::from(nn - n) * r, den.clone());
            add(n - x, BigUint::from(n) * (nn - r), den.clone());
            add(nn + x - n - r, BigUint::from(nn - n) * (nn - r), den);
            Some(total)
        }
        DistSpec::Binomial { n, p } => {
            let (a, shift) = dyadic(p)?;
            let b = BigUint::one() << shift;
            let q = &b - &a;
            add(x, BigUint::from(n) * a, b.clone());
            add(n - x, BigUint::from(n) * q, b);
            Some(total)
        }
        DistSpec::Poisson { lambda } => {
            let (a, shift) = dyadic(lambda)?;
            let b = BigUint::one() << shift;
            add(x, a.clone(), b.clone());
            let lam = fx.ratio(&a, &b);
            Some(total + lam - fx.int(x))
        }
        _ => None,
    }
}

/// Exact dyadic form `v = a / 2^shift` of a nonnegative finite double.
fn dyadic(v: f64) -> Option<(BigUint, u64)> {
    if !(v.is_finite() && v >= 0.0) {
        return None;
    }
    if v == 0.0 {
        return Some((BigUint::zero(), 0));
    }
    let bits = v.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    if e >= 0 {
        Some((BigUint::from(mant) << e as u64, 0))
    } else {
        Some((BigUint::from(mant), (-e) as u64))
    }
}

fn binomial(n: u64, k: u64) -> BigUint {
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

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Fixed-point arithmetic with `bits` fractional bits.
pub(crate) struct Fixed {
    bits: u64,
}

impl Fixed {
    pub(crate) fn new(bits: u64) -> Self {
        Fixed { bits }
    }

    pub(crate) fn one(&self) -> BigInt {
        BigInt::one() << self.bits
    }

    fn int(&self, v: u64) -> BigInt {
        BigInt::from(v) << self.bits
    }

    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a * b) >> self.bits
    }

    fn div(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a << self.bits) / b
    }

    pub(crate) fn ratio(&self, num: &BigUint, den: &BigUint) -> BigInt {
        BigInt::from_biguint(Sign::Plus, (num << self.bits) / den)
    }

    #[cfg(test)]
    pub(crate) fn to_f64(&self, v: &BigInt) -> f64 {
        let shift = v.bits().saturating_sub(60);
        let head = (v >> shift).to_f64().unwrap_or(f64::NAN);
        head * 2f64.powi(shift as i32 - self.bits as i32)
    }

    /// `atanh(z)` for `|z| ≤ 1/3`.
    fn atanh(&self, z: &BigInt) -> BigInt {
        let z2 = self.mul(z, z);
        let mut term = z.clone();
        let mut sum = z.clone();
        let mut k = 1u64;
        loop {
            term = self.mul(&term, &z2);
            if term.is_zero() {
                return sum;
            }
            sum += &term / BigInt::from(2 * k + 1);
            k += 1;
        }
    }

    fn ln2(&self) -> BigInt {
        let third = self.one() / 3;
        self.atanh(&third) * 2
    }

    /// `ln m` for a positive integer.
    fn ln_int(&self, m: &BigUint) -> BigInt {
        let e = m.bits() - 1;
        // m = 2^e · f with f ∈ [1, 2).
        let f = BigInt::from_biguint(Sign::Plus, (m << self.bits) >> e);
        let one = self.one();
        let z = self.div(&(&f - &one), &(&f + &one));
        self.ln2() * BigInt::from(e) + self.atanh(&z) * 2
    }

    /// `ln(a/b)` for positive integers.
    pub(crate) fn ln_ratio(&self, a: &BigUint, b: &BigUint) -> BigInt {
        self.ln_int(a) - self.ln_int(b)
    }

    /// `e^y`.
    pub(crate) fn exp(&self, y: &BigInt) -> BigInt {
        let ln2 = self.ln2();
        // y = k·ln2 + rem with rem ∈ [0, ln2).
        let mut k = y / &ln2;
        let mut rem = y - &k * &ln2;
        if rem.is_negative() {
            rem += &ln2;
            k -= 1;
        }
        let mut term = self.one();
        let mut sum = self.one();
        let mut i = 1u64;
        loop {
            term = self.mul(&term, &rem) / BigInt::from(i);
            if term.is_zero() {
                break;
            }
            sum += &term;
            i += 1;
        }
        let k = k.to_i64().expect("exponent fits");
        if k >= 0 {
            sum << k as u64
        } else {
            sum >> (-k) as u64
        }
    }

    fn sqrt(&self, v: &BigInt) -> BigInt {
        (v << self.bits).sqrt()
    }

    fn atan_inv(&self, m: u64) -> BigInt {
        // atan(1/m) = Σ (−1)^k / ((2k+1) m^{2k+1})
        let m2 = BigInt::from(m * m);
        let mut power = self.one() / BigInt::from(m);
        let mut sum = power.clone();
        let mut k = 1u64;
        while !power.is_zero() {
            power /= &m2;
            let term = &power / BigInt::from(2 * k + 1);
            if k % 2 == 1 {
                sum -= term;
            } else {
                sum += term;
            }
            k += 1;
        }
        sum
    }

    fn pi(&self) -> BigInt {
        self.atan_inv(5) * 16 - self.atan_inv(239) * 4
    }

    /// `Φ(−t)` for `t = (2d)^{1/2} ≥ 0`.
    pub(crate) fn phi_from_divergence(&self, d: &BigInt) -> BigInt {
        let d = if d.is_negative() { BigInt::zero() } else { d.clone() };
        let t = self.sqrt(&(&d * 2));
        self.phi_neg(&t, &d)
    }

    /// `Φ(−t)` where `half_t2 = t²/2`.
    fn phi_neg(&self, t: &BigInt, half_t2: &BigInt) -> BigInt {
        let t2 = self.mul(t, t);
        let mut term = t.clone();
        let mut sum = t.clone();
        let mut n = 1u64;
        loop {
            term = self.mul(&term, &t2) / BigInt::from(2 * n + 1);
            if term.is_zero() {
                break;
            }
            sum += &term;
            n += 1;
        }
        let sqrt_tau = self.sqrt(&(self.pi() * 2));
        let pdf = self.div(&self.exp(&-half_t2), &sqrt_tau);
        (self.one() >> 1u32) - self.mul(&pdf, &sum)
    }
}
