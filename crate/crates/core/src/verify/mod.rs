//! Sweeps that check `Pr(X<x) < Φ(g(x)) < Pr(X≤x)` numerically.
//!
//! The hypergeometric sweeps port two loop programs: an exhaustive one over
//! every 2×2 table with `N ≤ n_max`, and a pruned one restricted to small
//! cells (`x ≤ 9`) and Poisson means `nr/N ≤ 22.7`, which reaches
//! `N ≤ 2270`. The family sweeps check the binomial, Poisson, negative
//! binomial, Gamma and inverse Gaussian inequalities on parameter grids.
//!
//! Gaps are measured relatively (as differences of logarithms), so a case
//! is a near-tie when an inequality holds by less than `tie_epsilon` in
//! relative terms. Near-ties and apparent violations of hypergeometric,
//! binomial and Poisson cases are re-decided with big-integer arithmetic
//! before they are reported.

mod precise;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::DistSpec;
use crate::error::{domain, Error, Result};
use crate::signed::signed_ll;
use crate::special::{gaussian_cdf, ln_dhyper, ln_gaussian_cdf};
use crate::table::{two_by_two_ni, TwoByTwoMargins};

use precise::Verdict;

/// Pruned sweep: cells checked are `x < PRUNED_X_LIMIT`.
pub const PRUNED_X_LIMIT: u64 = 10;
/// Pruned sweep: largest margin `n` or `r`.
pub const PRUNED_MARGIN_MAX: u64 = 227;
/// Pruned sweep: largest Poisson mean `nr/N` that needs checking.
pub const PRUNED_LAMBDA_MAX: f64 = 22.7;
/// Pruned sweep: largest table total.
pub const PRUNED_TOT_MAX: u64 = 2270;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exhaustive,
    Pruned,
    FamilyGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationConfig {
    pub mode: Mode,
    /// Largest table total in the exhaustive sweep.
    pub n_max: u64,
    /// Largest table total in the pruned sweep; [`PRUNED_TOT_MAX`] for the
    /// full run.
    pub tot_max: u64,
    /// Relative gap below which a passing case is reported as a near-tie.
    pub tie_epsilon: f64,
    pub worker_count: usize,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        VerificationConfig {
            mode: Mode::Exhaustive,
            n_max: 200,
            tot_max: PRUNED_TOT_MAX,
            tie_epsilon: 1e-12,
            worker_count: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl VerificationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tie_epsilon.is_finite() && self.tie_epsilon > 0.0) {
            return Err(domain(format!(
                "tie_epsilon must be positive, got {}",
                self.tie_epsilon
            )));
        }
        if self.worker_count == 0 {
            return Err(domain("worker_count must be at least 1"));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.worker_count)
            .build()
            .map_err(|e| Error::Unsupported(format!("cannot start worker pool: {e}")))
    }
}

/// What the high-precision recheck concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recheck {
    /// The double-precision result was clear enough.
    NotRun,
    Holds,
    Fails,
    Undecided,
    /// No exact path exists for this family.
    Unavailable,
}

/// One checked point that was either a violation or a near-tie.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub dist: DistSpec,
    pub x: f64,
    pub g: f64,
    /// `Pr(X < x)`; absent for one-sided checks of continuous laws.
    pub lower: Option<f64>,
    /// `Φ(g(x))`
    pub estimate: f64,
    /// `Pr(X ≤ x)`
    pub upper: f64,
    /// Smallest relative gap (difference of logarithms); negative when an
    /// inequality fails in double precision.
    pub min_gap: f64,
    pub recheck: Recheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub cases_checked: u64,
    pub violations: Vec<CaseRecord>,
    pub near_ties: Vec<CaseRecord>,
    pub elapsed_secs: f64,
}

impl VerificationReport {
    fn empty() -> Self {
        VerificationReport {
            cases_checked: 0,
            violations: Vec::new(),
            near_ties: Vec::new(),
            elapsed_secs: 0.0,
        }
    }

    fn absorb(&mut self, other: VerificationReport) {
        self.cases_checked += other.cases_checked;
        self.violations.extend(other.violations);
        self.near_ties.extend(other.near_ties);
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Equal in everything except the wall-clock time.
    pub fn same_outcome(&self, other: &VerificationReport) -> bool {
        self.cases_checked == other.cases_checked
            && self.violations == other.violations
            && self.near_ties == other.near_ties
    }
}

/// Classification of a single check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    NearTie,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub outcome: Outcome,
    pub record: CaseRecord,
}

/// Which inequality a family sweep asserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckSide {
    /// `Pr(X<x) < Φ(g(x)) < Pr(X≤x)`
    Sandwich,
    /// `Φ(g(x)) ≤ Pr(X≤x)`
    OneSidedUpper,
}

/// Turns double-precision gaps into an outcome, running the exact recheck
/// when the gaps are too small to trust.
#[allow(clippy::too_many_arguments)]
fn decide(
    dist: &DistSpec,
    x: f64,
    g: f64,
    lower: Option<f64>,
    estimate: f64,
    upper: f64,
    gaps: (f64, f64),
    magnitude_bits: f64,
    side: CheckSide,
    eps: f64,
) -> PointCheck {
    let (gap_lo, gap_hi) = gaps;
    let min_gap = gap_lo.min(gap_hi);
    let failed = match side {
        CheckSide::Sandwich => !(gap_lo > 0.0 && gap_hi > 0.0),
        CheckSide::OneSidedUpper => !(gap_hi >= 0.0),
    };
    let mut outcome = if failed {
        Outcome::Violation
    } else if min_gap < eps {
        Outcome::NearTie
    } else {
        Outcome::Pass
    };
    let mut recheck = Recheck::NotRun;
    if outcome != Outcome::Pass {
        recheck = match side {
            CheckSide::Sandwich => {
                match precise::recheck(dist, x as u64, g.abs(), magnitude_bits) {
                    None => Recheck::Unavailable,
                    Some(s) if s.lower == Verdict::Fails || s.upper == Verdict::Fails => {
                        Recheck::Fails
                    }
                    Some(s) if s.lower == Verdict::Holds && s.upper == Verdict::Holds => {
                        Recheck::Holds
                    }
                    Some(_) => Recheck::Undecided,
                }
            }
            CheckSide::OneSidedUpper => Recheck::Unavailable,
        };
        outcome = match recheck {
            Recheck::Holds => Outcome::NearTie,
            Recheck::Fails => Outcome::Violation,
            _ => outcome,
        };
    }
    PointCheck {
        outcome,
        record: CaseRecord {
            dist: dist.clone(),
            x,
            g,
            lower,
            estimate,
            upper,
            min_gap,
            recheck,
        },
    }
}

/// Hypergeometric check from already accumulated tails.
fn check_hyper_tails(m: &TwoByTwoMargins, x: u64, lower: f64, upper: f64, eps: f64) -> PointCheck {
    let ni = two_by_two_ni(m.total, m.n, m.r, x);
    let g = -(2.0 * ni).sqrt();
    let estimate = gaussian_cdf(g);
    let gap_lo = if lower == 0.0 { f64::INFINITY } else { (estimate / lower).ln() };
    let gap_hi = (upper / estimate).ln();
    let decisive = |v: f64| (v > 0.0).then(|| -v.log2()).unwrap_or(0.0);
    let magnitude = decisive(lower).max(decisive(estimate));
    decide(
        &m.distribution(),
        x as f64,
        g,
        Some(lower),
        estimate,
        upper,
        (gap_lo, gap_hi),
        magnitude,
        CheckSide::Sandwich,
        eps,
    )
}

/// Checks `Pr(X<x) < Φ(g(x)) < Pr(X≤x)` for one 2×2 table below its mean.
/// Cells at or above the mean follow by symmetry and are rejected.
pub fn check_intersection_point(m: &TwoByTwoMargins, x: u64, eps: f64) -> Result<PointCheck> {
    m.check_cell(x)?;
    if x as f64 >= m.mean() {
        return Err(domain(format!(
            "x = {x} is not below the mean {}; check the mirrored table instead",
            m.mean()
        )));
    }
    let dist = m.distribution();
    let lower = if x == 0 { 0.0 } else { dist.cdf((x - 1) as f64)? };
    let upper = dist.cdf(x as f64)?;
    Ok(check_hyper_tails(m, x, lower, upper, eps))
}

/// Loop bounds of one hypergeometric sweep.
#[derive(Clone, Copy)]
struct SweepBounds {
    pruned: bool,
}

impl SweepBounds {
    fn n_max(&self, tot: u64) -> u64 {
        if self.pruned {
            (tot - 2).min(PRUNED_MARGIN_MAX)
        } else {
            tot - 2
        }
    }

    fn r_max(&self, n: u64, k: u64) -> u64 {
        if self.pruned {
            // Real-valued bound; the integer loop runs up to its floor.
            let lambda_bound = PRUNED_LAMBDA_MAX * (1.0 + k as f64 / n as f64);
            ((n + k - 2) as f64).min(PRUNED_MARGIN_MAX as f64).min(lambda_bound).floor() as u64
        } else {
            n + k - 2
        }
    }

    fn x_allowed(&self, x: u64) -> bool {
        !self.pruned || x < PRUNED_X_LIMIT
    }
}

/// All checks for one table total, in loop order.
fn sweep_total(tot: u64, bounds: SweepBounds, eps: f64) -> VerificationReport {
    let mut report = VerificationReport::empty();
    for n in 2..=bounds.n_max(tot) {
        let k = tot - n;
        for r in 2..=bounds.r_max(n, k) {
            let start = if r + 1 > k { (r + 1 - k).max(1) } else { 1 };
            // x < nr/N, decided in integers.
            if start * tot >= n * r || !bounds.x_allowed(start) {
                continue;
            }
            let m = TwoByTwoMargins { total: tot, n, r };
            let lo = (n + r).saturating_sub(tot);
            let step = |i: u64| {
                (n - i) as f64 * (r - i) as f64 / ((i + 1) as f64 * (tot + i + 1 - n - r) as f64)
            };
            let mut pmf = ln_dhyper(lo, r, tot - r, n).exp();
            let mut cum = 0.0;
            let mut i = lo;
            while i < start {
                cum += pmf;
                pmf *= step(i);
                i += 1;
            }
            let mut x = start;
            while x * tot < n * r && bounds.x_allowed(x) {
                let upper = cum + pmf;
                let check = check_hyper_tails(&m, x, cum, upper, eps);
                report.cases_checked += 1;
                match check.outcome {
                    Outcome::Pass => {}
                    Outcome::NearTie => report.near_ties.push(check.record),
                    Outcome::Violation => report.violations.push(check.record),
                }
                cum = upper;
                pmf *= step(x);
                x += 1;
            }
        }
    }
    report
}

fn run_sweep(tot_max: u64, bounds: SweepBounds, cfg: &VerificationConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let start = Instant::now();
    let eps = cfg.tie_epsilon;
    let parts: Vec<VerificationReport> = cfg.pool()?.install(|| {
        (4..=tot_max.max(3))
            .into_par_iter()
            .map(|tot| sweep_total(tot, bounds, eps))
            .collect()
    });
    let mut report = VerificationReport::empty();
    for part in parts {
        report.absorb(part);
    }
    report.elapsed_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Every 2×2 table with total `4 ≤ N ≤ n_max`, margins `2 ≤ n, r ≤ N−2`
/// and every cell value `1 ≤ x < nr/N` in the support.
pub fn verify_hypergeometric_exhaustive(n_max: u64, cfg: &VerificationConfig) -> Result<VerificationReport> {
    if n_max < 4 {
        return Err(domain(format!("n_max must be at least 4, got {n_max}")));
    }
    run_sweep(n_max, SweepBounds { pruned: false }, cfg)
}

/// The pruned sweep up to `cfg.tot_max`: `n ≤ 227`,
/// `r ≤ min(n+k−2, 227, 22.7·(1+k/n))`, `x ≤ 9`.
pub fn verify_hypergeometric_pruned(cfg: &VerificationConfig) -> Result<VerificationReport> {
    if cfg.tot_max > PRUNED_TOT_MAX {
        return Err(domain(format!(
            "the pruned sweep stops at N = {PRUNED_TOT_MAX}, got tot_max = {}",
            cfg.tot_max
        )));
    }
    run_sweep(cfg.tot_max, SweepBounds { pruned: true }, cfg)
}

/// A list of family members and the inequality to check on each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyGrid {
    pub members: Vec<DistSpec>,
    pub side: CheckSide,
    /// Number of geometrically spaced points per continuous member,
    /// spanning `[mean/100, mean + 12·sd]`.
    pub continuous_points: usize,
}

fn check_grid_member(dist: &DistSpec, side: CheckSide) -> Result<()> {
    dist.validate()?;
    match *dist {
        DistSpec::NegBinomial { ell, .. } if ell < 1.0 => Err(domain(format!(
            "the negative binomial inequality is only established for ell ≥ 1, got {ell}"
        ))),
        DistSpec::PoissonBinomial { .. } => Err(Error::Unsupported(
            "Poisson binomial members have no closed-form signed log-likelihood".into(),
        )),
        DistSpec::NegBinomial { .. } | DistSpec::Gamma { .. } | DistSpec::InverseGaussian { .. }
            if side == CheckSide::Sandwich =>
        {
            Err(domain(format!(
                "only the one-sided inequality is established for the {} family",
                dist.family_name()
            )))
        }
        _ => Ok(()),
    }
}

fn bits_below_one(ln_values: &[f64]) -> f64 {
    ln_values
        .iter()
        .filter(|v| v.is_finite())
        .map(|v| -v / std::f64::consts::LN_2)
        .fold(0.0, f64::max)
}

fn sweep_member(dist: &DistSpec, grid: &FamilyGrid, eps: f64) -> Result<VerificationReport> {
    let mut report = VerificationReport::empty();
    let push = |check: PointCheck, report: &mut VerificationReport| {
        report.cases_checked += 1;
        match check.outcome {
            Outcome::Pass => {}
            Outcome::NearTie => report.near_ties.push(check.record),
            Outcome::Violation => report.violations.push(check.record),
        }
    };
    let mean = dist.mean();
    let reach = mean + 12.0 * dist.variance().sqrt();
    if let Some((lo, hi)) = dist.support() {
        let cap = reach.floor() as u64;
        let top = hi.map_or(cap, |h| h.min(cap)).max(lo);
        let tails = dist.ln_tail_table(lo, top);
        for (idx, x) in (lo..=top).enumerate() {
            let g = signed_ll(dist, x as f64)?.g;
            let (ln_cdf, ln_sf) = tails[idx];
            let (ln_cdf_prev, ln_sf_prev) = if idx == 0 {
                (f64::NEG_INFINITY, 0.0)
            } else {
                tails[idx - 1]
            };
            // Compare on whichever side keeps the estimate away from 1.
            let gaps = if g < 0.0 {
                let ln_est = ln_gaussian_cdf(g);
                (ln_est - ln_cdf_prev, ln_cdf - ln_est)
            } else {
                let ln_cest = ln_gaussian_cdf(-g);
                (ln_sf_prev - ln_cest, ln_cest - ln_sf)
            };
            let gaps = match grid.side {
                CheckSide::Sandwich => gaps,
                CheckSide::OneSidedUpper => (f64::INFINITY, gaps.1),
            };
            let magnitude = bits_below_one(&[
                ln_cdf_prev,
                ln_cdf,
                ln_sf,
                ln_gaussian_cdf(g),
                ln_gaussian_cdf(-g),
            ]);
            let lower = (grid.side == CheckSide::Sandwich).then(|| ln_cdf_prev.exp());
            push(
                decide(dist, x as f64, g, lower, gaussian_cdf(g), ln_cdf.exp(), gaps, magnitude, grid.side, eps),
                &mut report,
            );
        }
    } else {
        let n = grid.continuous_points.max(2);
        let (a, b) = ((mean / 100.0).ln(), reach.ln());
        for j in 0..n {
            let x = (a + (b - a) * j as f64 / (n - 1) as f64).exp();
            let g = signed_ll(dist, x)?.g;
            let gap = if g < 0.0 {
                dist.ln_cdf(x)? - ln_gaussian_cdf(g)
            } else {
                ln_gaussian_cdf(-g) - dist.ln_sf(x)?
            };
            push(
                decide(dist, x, g, None, gaussian_cdf(g), dist.cdf(x)?, (f64::INFINITY, gap), 0.0, grid.side, eps),
                &mut report,
            );
        }
    }
    Ok(report)
}

/// Checks the requested inequality at every member of the grid and every
/// support point up to `mean + 12·sd`.
pub fn verify_family_grid(grid: &FamilyGrid, cfg: &VerificationConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    for dist in &grid.members {
        check_grid_member(dist, grid.side)?;
    }
    let start = Instant::now();
    let eps = cfg.tie_epsilon;
    let parts: Vec<Result<VerificationReport>> = cfg.pool()?.install(|| {
        grid.members
            .par_iter()
            .map(|dist| sweep_member(dist, grid, eps))
            .collect()
    });
    let mut report = VerificationReport::empty();
    for part in parts {
        report.absorb(part?);
    }
    report.elapsed_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Families with a built-in parameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridFamily {
    Binomial,
    Poisson,
    NegBinomial,
    Gamma,
    InverseGaussian,
}

impl GridFamily {
    pub const ALL: [GridFamily; 5] = [
        GridFamily::Binomial,
        GridFamily::Poisson,
        GridFamily::NegBinomial,
        GridFamily::Gamma,
        GridFamily::InverseGaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GridFamily::Binomial => "binomial",
            GridFamily::Poisson => "poisson",
            GridFamily::NegBinomial => "neg-binomial",
            GridFamily::Gamma => "gamma",
            GridFamily::InverseGaussian => "inverse-gaussian",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        GridFamily::ALL.into_iter().find(|f| f.name() == name).ok_or_else(|| {
            let known: Vec<&str> = GridFamily::ALL.iter().map(|f| f.name()).collect();
            domain(format!("unknown family {name:?}; expected one of {}", known.join(", ")))
        })
    }
}

/// `count` points spaced geometrically from `a` to `b`.
fn log_grid(a: f64, b: f64, count: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..count)
        .map(|i| (la + (lb - la) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// The built-in grid for a family:
///
/// - binomial: `n = 1..=200`, `p = 0.01..=0.99` in steps of 0.01 (sandwich);
/// - Poisson: 60 geometrically spaced `λ` in `[0.1, 50]` (sandwich);
/// - negative binomial: `ℓ ∈ {1, 1.5, 2, 5, 20}`, `p = 0.05..=0.95` in
///   steps of 0.05 (one-sided);
/// - Gamma: `α ∈ {0.5, 1, 2, 10}`, mean `∈ {0.1, 1, 10}` (one-sided);
/// - inverse Gaussian: 5 log-spaced `μ` in `[0.1, 10]` × 7 log-spaced `λ`
///   in `[0.1, 100]` (one-sided).
pub fn standard_grid(family: GridFamily) -> FamilyGrid {
    let hundredths = |i: u32| f64::from(i) / 100.0;
    let (members, side) = match family {
        GridFamily::Binomial => (
            (1..=200u64)
                .flat_map(|n| (1..=99).map(move |i| DistSpec::Binomial { n, p: hundredths(i) }))
                .collect(),
            CheckSide::Sandwich,
        ),
        GridFamily::Poisson => (
            log_grid(0.1, 50.0, 60)
                .into_iter()
                .map(|lambda| DistSpec::Poisson { lambda })
                .collect(),
            CheckSide::Sandwich,
        ),
        GridFamily::NegBinomial => (
            [1.0, 1.5, 2.0, 5.0, 20.0]
                .into_iter()
                .flat_map(|ell| (1..=19).map(move |i| DistSpec::NegBinomial { p: hundredths(5 * i), ell }))
                .collect(),
            CheckSide::OneSidedUpper,
        ),
        GridFamily::Gamma => (
            [0.5, 1.0, 2.0, 10.0]
                .into_iter()
                .flat_map(|alpha| [0.1, 1.0, 10.0].into_iter().map(move |mean| DistSpec::Gamma { alpha, mean }))
                .collect(),
            CheckSide::OneSidedUpper,
        ),
        GridFamily::InverseGaussian => (
            log_grid(0.1, 10.0, 5)
                .into_iter()
                .flat_map(|mu| log_grid(0.1, 100.0, 7).into_iter().map(move |lambda| DistSpec::InverseGaussian { mu, lambda }))
                .collect(),
            CheckSide::OneSidedUpper,
        ),
    };
    FamilyGrid {
        members,
        side,
        continuous_points: 200,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(workers: usize) -> VerificationConfig {
        VerificationConfig {
            worker_count: workers,
            ..VerificationConfig::default()
        }
    }

    #[test]
    fn point_checks() {
        let m = TwoByTwoMargins::new(40, 15, 15).unwrap();
        let c = check_intersection_point(&m, 1, 1e-12).unwrap();
        assert_eq!(c.outcome, Outcome::Pass);
        assert!(check_intersection_point(&m, 6, 1e-12).is_err());

        let tiny = TwoByTwoMargins::new(2, 1, 1).unwrap();
        let c = check_intersection_point(&tiny, 0, 1e-12).unwrap();
        assert_eq!(c.outcome, Outcome::Pass);
        assert!((c.record.estimate - 0.047_945_483_571_232_7).abs() < 1e-15, "{}", c.record.estimate);
    }

    #[test]
    fn forced_near_tie_is_rechecked() {
        // With a huge epsilon every case counts as a near-tie and goes
        // through the exact path.
        let m = TwoByTwoMargins::new(40, 15, 15).unwrap();
        let c = check_intersection_point(&m, 2, 10.0).unwrap();
        assert_eq!(c.outcome, Outcome::NearTie);
        assert_eq!(c.record.recheck, Recheck::Holds);
    }

    #[test]
    fn small_exhaustive_is_clean_and_deterministic() {
        let a = verify_hypergeometric_exhaustive(30, &cfg(1)).unwrap();
        let b = verify_hypergeometric_exhaustive(30, &cfg(3)).unwrap();
        assert!(a.passed());
        assert!(a.near_ties.is_empty());
        assert!(a.same_outcome(&b));
        assert!(verify_hypergeometric_exhaustive(3, &cfg(1)).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(1);
        c.tie_epsilon = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg(0);
        c.tie_epsilon = 1e-12;
        assert!(c.validate().is_err());
        let c = VerificationConfig {
            tot_max: 3000,
            ..cfg(1)
        };
        assert!(verify_hypergeometric_pruned(&c).is_err());
    }

    #[test]
    fn grid_scope_is_enforced() {
        let nb = FamilyGrid {
            members: vec![DistSpec::neg_binomial(0.4, 0.5).unwrap()],
            side: CheckSide::OneSidedUpper,
            continuous_points: 10,
        };
        assert!(verify_family_grid(&nb, &cfg(1)).is_err());
        let gamma = FamilyGrid {
            members: vec![DistSpec::gamma(2.0, 1.0).unwrap()],
            side: CheckSide::Sandwich,
            continuous_points: 10,
        };
        assert!(verify_family_grid(&gamma, &cfg(1)).is_err());
    }

    #[test]
    fn small_grids_pass() {
        let grid = FamilyGrid {
            members: vec![
                DistSpec::binomial(17, 0.23).unwrap(),
                DistSpec::poisson(3.5).unwrap(),
            ],
            side: CheckSide::Sandwich,
            continuous_points: 0,
        };
        let rep = verify_family_grid(&grid, &cfg(1)).unwrap();
        assert!(rep.passed(), "{:?}", rep.violations);
        let grid = FamilyGrid {
            members: vec![
                DistSpec::neg_binomial(0.3, 2.0).unwrap(),
                DistSpec::gamma(0.5, 2.0).unwrap(),
                DistSpec::inverse_gaussian(1.0, 3.0).unwrap(),
            ],
            side: CheckSide::OneSidedUpper,
            continuous_points: 50,
        };
        let rep = verify_family_grid(&grid, &cfg(1)).unwrap();
        assert!(rep.passed(), "{:?}", rep.violations);
    }
}
