//! QQ data: exact step series of `g(X)` against a standard Gaussian, and
//! Monte-Carlo samples of G² or χ² against χ² reference quantiles.
//!
//! Sampling is split into fixed-size chunks. Chunk `c` draws from a
//! ChaCha8 stream seeded with `seed` and stream number `c`, and chunks are
//! concatenated in index order, so the output depends only on
//! `(seed, count, table)` and not on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::dist::DistSpec;
use crate::error::{domain, Result};
use crate::fmt::significant;
use crate::signed::signed_ll;
use crate::special::{chi2_cdf, chi2_quantile, gaussian_quantile_ln};
use crate::table::{chi2_statistic_nonempty, mutual_information, ContingencyTable, TwoByTwoMargins};

/// Samples drawn per RNG stream.
pub const CHUNK_SIZE: usize = 4096;

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

/// One step of the quantile transform at support point `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepPoint {
    pub x: u64,
    pub g: f64,
    /// `Φ⁻¹(Pr(X < x))`, `−∞` at the support minimum.
    #[serde(serialize_with = "finite_or_null")]
    pub lower: f64,
    /// `Φ⁻¹(Pr(X ≤ x))`, `+∞` at the support maximum.
    #[serde(serialize_with = "finite_or_null")]
    pub upper: f64,
}

impl StepPoint {
    /// Whether `g` lies strictly inside its step.
    pub fn inside(&self) -> bool {
        self.lower < self.g && self.g < self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepSeries {
    pub dist: DistSpec,
    /// True when an unbounded support was cut at `mean + 12·sd`.
    pub truncated: bool,
    pub points: Vec<StepPoint>,
}

impl StepSeries {
    pub fn intersection_holds(&self) -> bool {
        self.points.iter().all(StepPoint::inside)
    }

    /// Columns `x, g, lower, upper`, with `inf`/`-inf` at open ends.
    pub fn to_tsv(&self, digits: usize) -> String {
        let mut out = String::from("x\tg\tlower\tupper\n");
        for p in &self.points {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                p.x,
                significant(p.g, digits),
                significant(p.lower, digits),
                significant(p.upper, digits)
            ));
        }
        out
    }
}

/// `Φ⁻¹` of a probability given as `(ln p, ln(1−p))`, taking whichever
/// side is smaller.
fn probit(ln_p: f64, ln_q: f64) -> Result<f64> {
    if ln_p <= ln_q {
        gaussian_quantile_ln(ln_p)
    } else {
        Ok(-gaussian_quantile_ln(ln_q)?)
    }
}

/// Step series for a discrete law. Unbounded supports (Poisson, negative
/// binomial) are cut at `mean + 12·sd`.
pub fn qq_exact_steps(dist: &DistSpec) -> Result<StepSeries> {
    dist.validate()?;
    let Some((lo, hi)) = dist.support() else {
        return Err(domain(format!(
            "step series need a discrete law, got {}",
            dist.family_name()
        )));
    };
    let cap = (dist.mean() + 12.0 * dist.variance().sqrt()).floor() as u64;
    let top = hi.map_or(cap, |h| h.min(cap)).max(lo);
    let truncated = hi.is_none_or(|h| h > top);
    let tails = dist.ln_tail_table(lo, top);
    let mut points = Vec::with_capacity(tails.len());
    for (idx, x) in (lo..=top).enumerate() {
        let g = signed_ll(dist, x as f64)?.g;
        let lower = if idx == 0 {
            f64::NEG_INFINITY
        } else {
            probit(tails[idx - 1].0, tails[idx - 1].1)?
        };
        let upper = if Some(x) == hi {
            f64::INFINITY
        } else {
            probit(tails[idx].0, tails[idx].1)?
        };
        points.push(StepPoint { x, g, lower, upper });
    }
    Ok(StepSeries {
        dist: dist.clone(),
        truncated,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    G2,
    Chi2,
}

impl Statistic {
    fn evaluate(self, table: &ContingencyTable) -> f64 {
        match self {
            Statistic::G2 => 2.0 * mutual_information(table).ni,
            // A drawn table can leave a margin empty; such rows and columns
            // carry no information and are skipped.
            Statistic::Chi2 => chi2_statistic_nonempty(table),
        }
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Splits `total` into counts with probabilities `probs` by sequential
/// conditional binomial draws.
fn multinomial(rng: &mut ChaCha8Rng, total: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(probs.len());
    let mut left = total;
    let mut mass = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if i + 1 == probs.len() {
            out.push(left);
            break;
        }
        let cond = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = if left == 0 || cond == 0.0 {
            0
        } else {
            Binomial::new(left, cond).expect("valid binomial").sample(rng)
        };
        out.push(draw);
        left -= draw;
        mass -= p;
    }
    out
}

fn run_chunks<F>(count: usize, seed: u64, draw: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = count.div_ceil(CHUNK_SIZE);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK_SIZE.min(count - c * CHUNK_SIZE);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    parts.concat()
}

/// Draws `count` tables with total `N` from the multinomial with cell
/// probabilities `RᵢSⱼ/N²` and returns the statistic of each.
pub fn sample_statistics(
    expected: &ContingencyTable,
    statistic: Statistic,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(domain("sample count must be at least 1"));
    }
    if expected.row_sums().contains(&0) || expected.col_sums().contains(&0) {
        return Err(domain("the expected table needs positive row and column sums"));
    }
    let n = expected.total();
    let nf = n as f64;
    let row_p: Vec<f64> = expected.row_sums().iter().map(|&r| r as f64 / nf).collect();
    let col_p: Vec<f64> = expected.col_sums().iter().map(|&s| s as f64 / nf).collect();
    Ok(run_chunks(count, seed, |rng| {
        // Cell probabilities factor, so draw row totals first and then
        // split each row over the columns.
        let rows: Vec<Vec<u64>> = multinomial(rng, n, &row_p)
            .into_iter()
            .map(|r| multinomial(rng, r, &col_p))
            .collect();
        let table = ContingencyTable::new(rows).expect("drawn table keeps the shape and total");
        statistic.evaluate(&table)
    }))
}

/// Draws the free cell of a 2×2 table with fixed margins and returns
/// `G² = 2·N·I` of each induced table.
pub fn sample_fixed_margins_g2(m: &TwoByTwoMargins, count: usize, seed: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(domain("sample count must be at least 1"));
    }
    if m.is_degenerate() {
        return Err(domain("fixed-margin sampling needs margins strictly between 0 and N"));
    }
    let law = Hypergeometric::new(m.total, m.r, m.n)
        .map_err(|e| domain(format!("hypergeometric sampler: {e}")))?;
    let m = *m;
    Ok(run_chunks(count, seed, |rng| {
        let x = law.sample(rng);
        let table = m.table(x).expect("sampled cell lies in the support");
        2.0 * mutual_information(&table).ni
    }))
}

/// Sorted samples paired with χ² quantiles at plotting positions
/// `(i − 0.5)/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QQSeries {
    pub df: u32,
    pub sample_count: usize,
    pub seed: Option<u64>,
    pub sample: Vec<f64>,
    pub reference: Vec<f64>,
}

impl QQSeries {
    /// Plotting position of the `i`-th (0-based) order statistic.
    pub fn position(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.sample_count as f64
    }

    /// Largest `|F(sample_(i)) − (i − 0.5)/n|`, with `F` the χ²(df) cdf,
    /// over positions inside `[(1 − central)/2, (1 + central)/2]`.
    pub fn max_probability_deviation(&self, central: f64) -> f64 {
        let (a, b) = ((1.0 - central) / 2.0, (1.0 + central) / 2.0);
        self.sample
            .iter()
            .enumerate()
            .filter(|&(i, _)| (a..=b).contains(&self.position(i)))
            .map(|(i, &s)| (chi2_cdf(self.df, s) - self.position(i)).abs())
            .fold(0.0, f64::max)
    }

    /// Columns `sample_quantile, reference_quantile`.
    pub fn to_tsv(&self, digits: usize) -> String {
        let mut out = String::from("sample_quantile\treference_quantile\n");
        for (s, r) in self.sample.iter().zip(&self.reference) {
            out.push_str(&format!("{}\t{}\n", significant(*s, digits), significant(*r, digits)));
        }
        out
    }
}

pub fn qq_against_chi2(samples: &[f64], df: u32) -> Result<QQSeries> {
    if samples.is_empty() {
        return Err(domain("QQ series need at least one sample"));
    }
    if df == 0 {
        return Err(domain("χ² reference needs df ≥ 1"));
    }
    if let Some(bad) = samples.iter().find(|v| v.is_nan()) {
        return Err(domain(format!("sample value {bad} is not a number")));
    }
    let mut sample = samples.to_vec();
    sample.sort_by(f64::total_cmp);
    let n = sample.len();
    let reference = (0..n)
        .map(|i| chi2_quantile(df, (i as f64 + 0.5) / n as f64))
        .collect::<Result<Vec<f64>>>()?;
    Ok(QQSeries {
        df,
        sample_count: n,
        seed: None,
        sample,
        reference,
    })
}

/// `c` with `Pr(K ≤ c) = level` for the Kolmogorov distribution
/// `Pr(K ≤ c) = 1 − 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²c²}`. A two-sided band of
/// half-width `c/√n` around the plotting positions has asymptotic
/// coverage `level`.
pub fn kolmogorov_quantile(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(domain(format!("level must lie in (0, 1), got {level}")));
    }
    let cdf = |c: f64| {
        let mut s = 0.0;
        for k in 1..200 {
            let kf = f64::from(k);
            let term = (-2.0 * kf * kf * c * c).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        1.0 - 2.0 * s
    };
    let (mut lo, mut hi) = (0.2, 5.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fully specified expected tables used for the QQ experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `[[4, 16], [16, 64]]`, one degree of freedom.
    Asym2x2,
    /// `[[18, 18, 18], [18, 18, 18]]`, two degrees of freedom.
    Sym2x3,
    /// Nine cells of 4, four degrees of freedom.
    Sym3x3,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Asym2x2, Preset::Sym2x3, Preset::Sym3x3];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Asym2x2 => "asym-2x2",
            Preset::Sym2x3 => "sym-2x3",
            Preset::Sym3x3 => "sym-3x3",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| {
                let known: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                domain(format!("unknown preset {name:?}; expected one of {}", known.join(", ")))
            })
    }

    pub fn table(self) -> ContingencyTable {
        let rows = match self {
            Preset::Asym2x2 => vec![vec![4, 16], vec![16, 64]],
            Preset::Sym2x3 => vec![vec![18; 3]; 2],
            Preset::Sym3x3 => vec![vec![4; 3]; 3],
        };
        ContingencyTable::new(rows).expect("preset tables are valid")
    }

    pub fn df(self) -> u32 {
        self.table().degrees_of_freedom()
    }
}

/// Samples a statistic for `expected` and pairs it with χ²(df) quantiles.
pub fn simulate_qq(
    expected: &ContingencyTable,
    statistic: Statistic,
    count: usize,
    seed: u64,
    df: u32,
) -> Result<QQSeries> {
    let samples = sample_statistics(expected, statistic, count, seed)?;
    let mut series = qq_against_chi2(&samples, df)?;
    series.seed = Some(seed);
    Ok(series)
}
