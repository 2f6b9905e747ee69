//! Divergences and signed log-likelihoods (G-transforms).
//!
//! For a point `x` of a family with mean `μ₀`, the divergence `D` is the
//! Kullback–Leibler divergence (nats) from the null member to the member of
//! the same family whose mean parameter is `x`, and
//! `g(x) = ±(2D)^{1/2}`, negative exactly when `x < μ₀`.
//!
//! Every closed form is written as a sum of [`bd0`] deviance terms, which
//! keeps `D` accurate near the mean and handles `0 ln 0 = 0`.

use serde::{Deserialize, Serialize};

use crate::dist::DistSpec;
use crate::error::{domain, Error, Result};
use crate::special::{bd0, gaussian_cdf, gaussian_pdf};
use crate::table::two_by_two_ni;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    BelowMean,
    AtOrAboveMean,
}

/// Signed log-likelihood of one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLL {
    pub g: f64,
    /// Divergence in nats; `g² = 2·divergence`.
    pub divergence: f64,
    pub side: Side,
}

fn check_support(dist: &DistSpec, x: f64) -> Result<()> {
    dist.validate()?;
    match dist.support() {
        Some((lo, hi)) => {
            let k = dist.discrete_point(x)?;
            if k < lo || hi.is_some_and(|h| k > h) {
                let hi = hi.map_or("∞".to_string(), |h| h.to_string());
                return Err(domain(format!(
                    "{x} lies outside the support [{lo}, {hi}] of {}",
                    dist.family_name()
                )));
            }
            Ok(())
        }
        None => {
            if x.is_finite() && x >= 0.0 {
                Ok(())
            } else {
                Err(domain(format!(
                    "{} needs a finite nonnegative point, got {x}",
                    dist.family_name()
                )))
            }
        }
    }
}

/// Divergence `D` (nats) between the member of the family fitted to `x`
/// and `dist` itself. For the hypergeometric law this is `N·I` of the 2×2
/// table with free cell `x`.
pub fn divergence(dist: &DistSpec, x: f64) -> Result<f64> {
    check_support(dist, x)?;
    let d = match *dist {
        DistSpec::Hypergeometric {
            population,
            draws,
            successes,
        } => two_by_two_ni(population, draws, successes, x as u64),
        DistSpec::Binomial { n, p } => {
            let nf = n as f64;
            bd0(x, nf * p) + bd0(nf - x, nf * (1.0 - p))
        }
        DistSpec::Poisson { lambda } => bd0(x, lambda),
        DistSpec::NegBinomial { p, ell } => {
            // (k+ℓ)·D((p̂, 1−p̂) ‖ (p, 1−p)) with p̂ = ℓ/(k+ℓ).
            let trials = x + ell;
            bd0(ell, trials * p) + bd0(x, trials * (1.0 - p))
        }
        DistSpec::Gamma { alpha, mean } => bd0(alpha, alpha * x / mean),
        DistSpec::InverseGaussian { mu, lambda } => {
            let dev = x - mu;
            lambda * dev * dev / (2.0 * x * mu * mu)
        }
        DistSpec::PoissonBinomial { .. } => {
            return Err(Error::Unsupported(
                "the Poisson binomial law has no closed-form divergence".into(),
            ))
        }
    };
    Ok(d.max(0.0))
}

/// `g(x) = −(2D)^{1/2}` below the mean, `+(2D)^{1/2}` at or above it.
pub fn signed_ll(dist: &DistSpec, x: f64) -> Result<SignedLL> {
    let divergence = divergence(dist, x)?;
    let magnitude = (2.0 * divergence).sqrt();
    let side = if x < dist.mean() {
        Side::BelowMean
    } else {
        Side::AtOrAboveMean
    };
    let g = match side {
        Side::BelowMean => -magnitude,
        Side::AtOrAboveMean => magnitude,
    };
    Ok(SignedLL {
        g,
        divergence,
        side,
    })
}

/// Gaussian estimate `Φ(g(x))` of the cdf at `x`.
pub fn phi_g(dist: &DistSpec, x: f64) -> Result<f64> {
    Ok(gaussian_cdf(signed_ll(dist, x)?.g))
}

/// Variance function `V(μ)` of the natural exponential family containing
/// `dist`, evaluated at `mu`.
pub fn variance_function(dist: &DistSpec, mu: f64) -> Result<f64> {
    match *dist {
        DistSpec::Binomial { n, .. } => Ok(mu * (1.0 - mu / n as f64)),
        DistSpec::Poisson { .. } => Ok(mu),
        DistSpec::NegBinomial { ell, .. } => Ok(mu * (1.0 + mu / ell)),
        DistSpec::Gamma { alpha, .. } => Ok(mu * mu / alpha),
        DistSpec::InverseGaussian { lambda, .. } => Ok(mu * mu * mu / lambda),
        DistSpec::Hypergeometric { .. } | DistSpec::PoissonBinomial { .. } => Err(domain(format!(
            "{} is not a natural exponential family",
            dist.family_name()
        ))),
    }
}

/// `∂Φ(G)/∂μ₀ = φ(G)/V(μ₀) · (μ₀ − x)/G`, where `μ₀` is the mean of
/// `dist`. At `G = 0` the limit `−φ(0)/V(μ₀)^{1/2}` is returned.
pub fn phi_g_mu0_derivative(dist: &DistSpec, x: f64) -> Result<f64> {
    let mu0 = dist.mean();
    let v = variance_function(dist, mu0)?;
    let sll = signed_ll(dist, x)?;
    if !(v > 0.0) {
        return Err(domain(format!(
            "{} with zero variance has no derivative in its mean",
            dist.family_name()
        )));
    }
    if sll.g == 0.0 {
        return Ok(-gaussian_pdf(0.0) / v.sqrt());
    }
    Ok(gaussian_pdf(sll.g) / v * (mu0 - x) / sll.g)
}

/// `∂/∂μ Pr(W = k)` for `W ~ nb(p, ℓ)` with mean `μ = ℓ(1−p)/p`, computed as
/// `Pr(W' = k−1) − Pr(W' = k)` with `W' ~ nb(p, ℓ+1)`.
pub fn negbin_pmf_mu_derivative(p: f64, ell: f64, k: u64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("p must lie strictly inside (0, 1), got {p}")));
    }
    let shifted = DistSpec::neg_binomial(p, ell + 1.0)?;
    let at_k = shifted.pmf(k as f64)?;
    let before = if k == 0 { 0.0 } else { shifted.pmf((k - 1) as f64)? };
    Ok(before - at_k)
}
