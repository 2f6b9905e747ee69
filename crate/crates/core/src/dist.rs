//! Distribution kernels.
//!
//! Every family is described by a [`DistSpec`]. Discrete tails are summed
//! from the nearer end of the support, in log space, so probabilities far
//! below `f64::MIN_POSITIVE` still compare correctly through the `ln_*`
//! accessors.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::special::{
    gamma_lower_regularized, gamma_upper_regularized, ln_add_exp, ln_dbinom_raw, ln_dhyper,
    ln_dpois_raw, ln_gaussian_cdf, TAU,
};

/// One member of a supported distribution family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistSpec {
    /// Successes `X` in `draws` draws without replacement from a population
    /// of `population` items of which `successes` are marked. For a 2×2
    /// table with total N, first column sum n and first row sum r this is
    /// the law of the top-left cell.
    Hypergeometric {
        population: u64,
        draws: u64,
        successes: u64,
    },
    Binomial {
        n: u64,
        p: f64,
    },
    Poisson {
        lambda: f64,
    },
    /// Failures before the `ell`-th success; `ell` may be any positive real.
    NegBinomial {
        p: f64,
        ell: f64,
    },
    /// Gamma law with shape `alpha`, parameterized by its mean.
    Gamma {
        alpha: f64,
        mean: f64,
    },
    InverseGaussian {
        mu: f64,
        lambda: f64,
    },
    /// Sum of independent Bernoulli variables with the given success
    /// probabilities.
    PoissonBinomial {
        probs: Vec<f64>,
    },
}

fn finite_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and positive, got {v}")))
    }
}

fn probability(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(domain(format!("{name} must lie in [0, 1], got {v}")))
    }
}

impl DistSpec {
    pub fn hypergeometric(population: u64, draws: u64, successes: u64) -> Result<Self> {
        let d = DistSpec::Hypergeometric {
            population,
            draws,
            successes,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn binomial(n: u64, p: f64) -> Result<Self> {
        let d = DistSpec::Binomial { n, p };
        d.validate()?;
        Ok(d)
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        let d = DistSpec::Poisson { lambda };
        d.validate()?;
        Ok(d)
    }

    pub fn neg_binomial(p: f64, ell: f64) -> Result<Self> {
        let d = DistSpec::NegBinomial { p, ell };
        d.validate()?;
        Ok(d)
    }

    pub fn gamma(alpha: f64, mean: f64) -> Result<Self> {
        let d = DistSpec::Gamma { alpha, mean };
        d.validate()?;
        Ok(d)
    }

    pub fn inverse_gaussian(mu: f64, lambda: f64) -> Result<Self> {
        let d = DistSpec::InverseGaussian { mu, lambda };
        d.validate()?;
        Ok(d)
    }

    pub fn poisson_binomial(probs: Vec<f64>) -> Result<Self> {
        let d = DistSpec::PoissonBinomial { probs };
        d.validate()?;
        Ok(d)
    }

    /// Checks the parameter invariants of the family.
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistSpec::Hypergeometric {
                population,
                draws,
                successes,
            } => {
                if draws > population || successes > population {
                    return Err(domain(format!(
                        "hypergeometric needs n ≤ N and r ≤ N, got N={population}, n={draws}, r={successes}"
                    )));
                }
                Ok(())
            }
            DistSpec::Binomial { n, p } => {
                if n == 0 {
                    return Err(domain("binomial needs at least one trial"));
                }
                probability("binomial p", p)
            }
            DistSpec::Poisson { lambda } => {
                if lambda.is_finite() && lambda >= 0.0 {
                    Ok(())
                } else {
                    Err(domain(format!("poisson lambda must be finite and ≥ 0, got {lambda}")))
                }
            }
            DistSpec::NegBinomial { p, ell } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(domain(format!("negative binomial p must lie in (0, 1], got {p}")));
                }
                finite_positive("negative binomial ell", ell)
            }
            DistSpec::Gamma { alpha, mean } => {
                finite_positive("gamma alpha", alpha)?;
                finite_positive("gamma mean", mean)
            }
            DistSpec::InverseGaussian { mu, lambda } => {
                finite_positive("inverse gaussian mu", mu)?;
                finite_positive("inverse gaussian lambda", lambda)
            }
            DistSpec::PoissonBinomial { ref probs } => {
                for (i, &p) in probs.iter().enumerate() {
                    probability(&format!("poisson binomial probs[{i}]"), p)?;
                }
                Ok(())
            }
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            DistSpec::Hypergeometric { .. } => "hypergeometric",
            DistSpec::Binomial { .. } => "binomial",
            DistSpec::Poisson { .. } => "poisson",
            DistSpec::NegBinomial { .. } => "neg_binomial",
            DistSpec::Gamma { .. } => "gamma",
            DistSpec::InverseGaussian { .. } => "inverse_gaussian",
            DistSpec::PoissonBinomial { .. } => "poisson_binomial",
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, DistSpec::Gamma { .. } | DistSpec::InverseGaussian { .. })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistSpec::Hypergeometric {
                population,
                draws,
                successes,
            } => {
                if population == 0 {
                    0.0
                } else {
                    draws as f64 * successes as f64 / population as f64
                }
            }
            DistSpec::Binomial { n, p } => n as f64 * p,
            DistSpec::Poisson { lambda } => lambda,
            DistSpec::NegBinomial { p, ell } => ell * (1.0 - p) / p,
            DistSpec::Gamma { mean, .. } => mean,
            DistSpec::InverseGaussian { mu, .. } => mu,
            DistSpec::PoissonBinomial { ref probs } => probs.iter().sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            DistSpec::Hypergeometric {
                population,
                draws,
                successes,
            } => {
                if population <= 1 {
                    return 0.0;
                }
                let (nn, n, r) = (population as f64, draws as f64, successes as f64);
                n * r * (nn - r) * (nn - n) / (nn * nn * (nn - 1.0))
            }
            DistSpec::Binomial { n, p } => n as f64 * p * (1.0 - p),
            DistSpec::Poisson { lambda } => lambda,
            DistSpec::NegBinomial { p, ell } => ell * (1.0 - p) / (p * p),
            DistSpec::Gamma { alpha, mean } => mean * mean / alpha,
            DistSpec::InverseGaussian { mu, lambda } => mu * mu * mu / lambda,
            DistSpec::PoissonBinomial { ref probs } => probs.iter().map(|p| p * (1.0 - p)).sum(),
        }
    }

    /// Smallest and (if finite) largest support point of a discrete family.
    pub fn support(&self) -> Option<(u64, Option<u64>)> {
        match *self {
            DistSpec::Hypergeometric {
                population,
                draws,
                successes,
            } => Some((
                (draws + successes).saturating_sub(population),
                Some(draws.min(successes)),
            )),
            DistSpec::Binomial { n, p } => {
                if p == 0.0 {
                    Some((0, Some(0)))
                } else if p == 1.0 {
                    Some((n, Some(n)))
                } else {
                    Some((0, Some(n)))
                }
            }
            DistSpec::Poisson { lambda } => Some((0, if lambda == 0.0 { Some(0) } else { None })),
            DistSpec::NegBinomial { p, .. } => Some((0, if p == 1.0 { Some(0) } else { None })),
            DistSpec::PoissonBinomial { ref probs } => {
                let lo = probs.iter().filter(|&&p| p == 1.0).count() as u64;
                let hi = probs.iter().filter(|&&p| p > 0.0).count() as u64;
                Some((lo, Some(hi)))
            }
            DistSpec::Gamma { .. } | DistSpec::InverseGaussian { .. } => None,
        }
    }

    /// Validates a discrete support point: finite, integral, nonnegative.
    pub(crate) fn discrete_point(&self, x: f64) -> Result<u64> {
        if !x.is_finite() || x < 0.0 || x.fract() != 0.0 {
            return Err(domain(format!(
                "{} needs a nonnegative integer support point, got {x}",
                self.family_name()
            )));
        }
        Ok(x as u64)
    }

    fn continuous_point(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || x < 0.0 {
            return Err(domain(format!(
                "{} needs a finite nonnegative point, got {x}",
                self.family_name()
            )));
        }
        Ok(x)
    }

    /// `ln` of the point probability at an integer `k` of a discrete family.
    /// Returns `-inf` outside the support.
    pub(crate) fn ln_pmf_at(&self, k: u64) -> f64 {
        match *self {
            DistSpec::Hypergeometric {
                population,
                draws,
                successes,
            } => ln_dhyper(k, successes, population - successes, draws),
            DistSpec::Binomial { n, p } => {
                if k > n {
                    f64::NEG_INFINITY
                } else {
                    ln_dbinom_raw(k as f64, n as f64, p, 1.0 - p)
                }
            }
            DistSpec::Poisson { lambda } => ln_dpois_raw(k as f64, lambda),
            DistSpec::NegBinomial { p, ell } => ln_dnbinom(k, p, ell),
            DistSpec::PoissonBinomial { ref probs } => {
                let pmf = poisson_binomial_pmf(probs);
                pmf.get(k as usize).map_or(f64::NEG_INFINITY, |v| v.ln())
            }
            DistSpec::Gamma { .. } | DistSpec::InverseGaussian { .. } => f64::NEG_INFINITY,
        }
    }

    fn ln_density(&self, x: f64) -> f64 {
        match *self {
            DistSpec::Gamma { alpha, mean } => {
                if x == 0.0 {
                    return if alpha < 1.0 {
                        f64::INFINITY
                    } else if alpha == 1.0 {
                        -mean.ln()
                    } else {
                        f64::NEG_INFINITY
                    };
                }
                let scale = mean / alpha;
                if alpha < 1.0 {
                    ln_dpois_raw(alpha, x / scale) + alpha.ln() - x.ln()
                } else {
                    ln_dpois_raw(alpha - 1.0, x / scale) - scale.ln()
                }
            }
            DistSpec::InverseGaussian { mu, lambda } => {
                if x == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let dev = x - mu;
                0.5 * (lambda / (TAU * x * x * x)).ln() - lambda * dev * dev / (2.0 * mu * mu * x)
            }
            _ => f64::NAN,
        }
    }

    /// Point probability (discrete) or density (Gamma, inverse Gaussian).
    pub fn pmf(&self, x: f64) -> Result<f64> {
        Ok(self.ln_pmf(x)?.exp())
    }

    /// `ln` of [`pmf`](Self::pmf).
    pub fn ln_pmf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if self.is_discrete() {
            let k = self.discrete_point(x)?;
            Ok(self.ln_pmf_at(k))
        } else {
            let x = self.continuous_point(x)?;
            Ok(self.ln_density(x))
        }
    }

    /// `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let (ln_lo, ln_hi) = self.ln_cdf_pair(x)?;
        // Use whichever side is the small tail.
        if ln_lo <= ln_hi {
            Ok(ln_lo.exp())
        } else {
            Ok(1.0 - ln_hi.exp())
        }
    }

    /// `P(X > x)`.
    pub fn sf(&self, x: f64) -> Result<f64> {
        let (ln_lo, ln_hi) = self.ln_cdf_pair(x)?;
        if ln_hi <= ln_lo {
            Ok(ln_hi.exp())
        } else {
            Ok(1.0 - ln_lo.exp())
        }
    }

    /// `ln P(X ≤ x)`.
    pub fn ln_cdf(&self, x: f64) -> Result<f64> {
        let (ln_lo, ln_hi) = self.ln_cdf_pair(x)?;
        Ok(if ln_lo <= ln_hi { ln_lo } else { (-ln_hi.exp()).ln_1p() })
    }

    /// `ln P(X > x)`.
    pub fn ln_sf(&self, x: f64) -> Result<f64> {
        let (ln_lo, ln_hi) = self.ln_cdf_pair(x)?;
        Ok(if ln_hi <= ln_lo { ln_hi } else { (-ln_lo.exp()).ln_1p() })
    }

    /// `(ln P(X ≤ x), ln P(X > x))`; the smaller of the two is computed
    /// directly and the other one by complement.
    fn ln_cdf_pair(&self, x: f64) -> Result<(f64, f64)> {
        self.validate()?;
        if self.is_discrete() {
            let k = self.discrete_point(x)?;
            Ok(self.ln_tails_at(k))
        } else {
            let x = self.continuous_point(x)?;
            Ok(self.ln_continuous_tails(x))
        }
    }

    /// `(ln Pr(X≤x), ln Pr(X>x))` for every `x` in `lo..=top`, accumulated
    /// in log space from both ends; the upper end is seeded with the exact
    /// tail beyond `top`.
    pub(crate) fn ln_tail_table(&self, lo: u64, top: u64) -> Vec<(f64, f64)> {
        let ln_p: Vec<f64> = (lo..=top).map(|k| self.ln_pmf_at(k)).collect();
        let mut out = vec![(f64::NEG_INFINITY, f64::NEG_INFINITY); ln_p.len()];
        let mut acc = if lo == 0 { f64::NEG_INFINITY } else { self.ln_tails_at(lo - 1).0 };
        for (i, &lp) in ln_p.iter().enumerate() {
            acc = ln_add_exp(acc, lp);
            out[i].0 = acc;
        }
        let mut acc = self.ln_tails_at(top).1;
        for i in (0..ln_p.len()).rev() {
            out[i].1 = acc;
            acc = ln_add_exp(acc, ln_p[i]);
        }
        out
    }

    pub(crate) fn ln_tails_at(&self, k: u64) -> (f64, f64) {
        let (lo, hi) = self.support().expect("discrete family");
        if k < lo {
            return (f64::NEG_INFINITY, 0.0);
        }
        if hi.is_some_and(|h| k >= h) {
            return (0.0, f64::NEG_INFINITY);
        }
        if let DistSpec::PoissonBinomial { probs } = self {
            let pmf = poisson_binomial_pmf(probs);
            return tails_from_vector(&pmf, k as usize, self.mean());
        }
        let mean = self.mean();
        if (k as f64) < mean {
            let below = self.ln_sum_downward(k, lo);
            (below, (-below.exp()).ln_1p())
        } else {
            let above = self.ln_sum_upward(k + 1, hi, mean);
            ((-above.exp()).ln_1p(), above)
        }
    }

    /// `ln Σ_{i=lo..=k} pmf(i)`, summed from `k` downward.
    fn ln_sum_downward(&self, k: u64, lo: u64) -> f64 {
        let mean = self.mean();
        let reference = self.ln_pmf_at(k);
        if reference == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let mut sum = 1.0;
        let mut i = k;
        while i > lo {
            i -= 1;
            let term = (self.ln_pmf_at(i) - reference).exp();
            sum += term;
            if term < sum * 1e-18 && (i as f64) < mean - 1.0 {
                break;
            }
        }
        reference + sum.ln()
    }

    /// `ln Σ_{i≥start} pmf(i)`, summed upward until negligible.
    fn ln_sum_upward(&self, start: u64, hi: Option<u64>, mean: f64) -> f64 {
        let reference = self.ln_pmf_at(start);
        if reference == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let mut sum = 1.0;
        let mut i = start;
        loop {
            if hi.is_some_and(|h| i >= h) {
                break;
            }
            i += 1;
            let term = (self.ln_pmf_at(i) - reference).exp();
            sum += term;
            if term < sum * 1e-18 && (i as f64) > mean + 1.0 {
                break;
            }
        }
        reference + sum.ln()
    }

    fn ln_continuous_tails(&self, x: f64) -> (f64, f64) {
        match *self {
            DistSpec::Gamma { alpha, mean } => {
                let z = x * alpha / mean;
                let lower = gamma_lower_regularized(alpha, z);
                let upper = gamma_upper_regularized(alpha, z);
                (lower.ln(), upper.ln())
            }
            DistSpec::InverseGaussian { mu, lambda } => {
                if x == 0.0 {
                    return (f64::NEG_INFINITY, 0.0);
                }
                let s = (lambda / x).sqrt();
                let a = s * (x / mu - 1.0);
                let b = s * (x / mu + 1.0);
                let ln_second = 2.0 * lambda / mu + ln_gaussian_cdf(-b);
                let ln_lower = ln_add_exp(ln_gaussian_cdf(a), ln_second);
                let ln_first_upper = ln_gaussian_cdf(-a);
                let ln_upper = ln_first_upper + (-(ln_second - ln_first_upper).exp_m1()).ln();
                (ln_lower, ln_upper)
            }
            _ => unreachable!("continuous families only"),
        }
    }
}

fn ln_dnbinom(k: u64, p: f64, ell: f64) -> f64 {
    if p == 1.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if k == 0 {
        return ell * p.ln();
    }
    let kf = k as f64;
    // Γ(ℓ+k)/(Γ(ℓ) k!) pˡ (1−p)ᵏ = ℓ/(ℓ+k) · b(ℓ; ℓ+k, p)
    (ell / (ell + kf)).ln() + ln_dbinom_raw(ell, ell + kf, p, 1.0 - p)
}

/// Log tails from a full pmf vector, summing the nearer tail.
fn tails_from_vector(pmf: &[f64], k: usize, mean: f64) -> (f64, f64) {
    if (k as f64) < mean {
        let below: f64 = pmf[..=k].iter().rev().sum();
        (below.ln(), (-below).ln_1p())
    } else {
        let above: f64 = pmf[k + 1..].iter().sum();
        ((-above).ln_1p(), above.ln())
    }
}

/// Point probabilities of a Bernoulli sum, by the O(n²) convolution that
/// realizes the elementary-symmetric-polynomial formula.
pub fn poisson_binomial_pmf(probs: &[f64]) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(probs.len() + 1);
    pmf.push(1.0);
    for &p in probs {
        let q = 1.0 - p;
        pmf.push(0.0);
        for j in (1..pmf.len()).rev() {
            pmf[j] = pmf[j] * q + pmf[j - 1] * p;
        }
        pmf[0] *= q;
    }
    pmf
}

/// Success probabilities of the member of the exponential family generated
/// by a Poisson binomial law with natural parameter shift `beta`.
///
/// Each root `−pᵢ/(1−pᵢ)` of the probability generating function is scaled
/// by `e^β`, giving `p̃ᵢ = e^β pᵢ / (1 + (e^β − 1) pᵢ)`.
pub fn tilt_poisson_binomial(probs: &[f64], beta: f64) -> Result<Vec<f64>> {
    if !beta.is_finite() {
        return Err(domain(format!("tilt needs a finite beta, got {beta}")));
    }
    for (i, &p) in probs.iter().enumerate() {
        probability(&format!("probs[{i}]"), p)?;
    }
    Ok(probs
        .iter()
        .map(|&p| {
            if beta >= 0.0 {
                p / (p + (1.0 - p) * (-beta).exp())
            } else {
                let e = beta.exp();
                e * p / (e * p + (1.0 - p))
            }
        })
        .collect())
}
