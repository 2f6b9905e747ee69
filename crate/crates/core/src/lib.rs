//! Signed log-likelihoods and exact small-sample tests for contingency
//! tables.
//!
//! The Gaussian estimate `Φ(g(x))`, with `g` the signed log-likelihood,
//! tends to fall inside the step `(Pr(X < x), Pr(X ≤ x))` of a discrete
//! distribution function. This crate computes both sides exactly, checks
//! the sandwich over large parameter ranges, and produces QQ data.
//!
//! ```
//! use siglik::{phi_g, DistSpec};
//!
//! let d = DistSpec::hypergeometric(40, 15, 15)?;
//! let e = phi_g(&d, 1.0)?;
//! assert!(d.cdf(0.0)? < e && e < d.cdf(1.0)?);
//! # Ok::<(), siglik::Error>(())
//! ```

pub mod dist;
pub mod error;
pub mod fmt;
pub mod qq;
pub mod signed;
pub mod special;
pub mod table;
pub mod verify;

pub use dist::{poisson_binomial_pmf, tilt_poisson_binomial, DistSpec};
pub use error::{Error, Result};
pub use signed::{divergence, phi_g, signed_ll, SignedLL};
pub use table::{ContingencyTable, TwoByTwoMargins};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/distributions.md")]
    mod distributions {}
    #[doc = include_str!("../../../book/src/signed-loglik.md")]
    mod signed_loglik {}
    #[doc = include_str!("../../../book/src/tables.md")]
    mod tables {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/qq.md")]
    mod qq {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
