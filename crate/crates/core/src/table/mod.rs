//! Contingency tables, the I / G² / χ² statistics, exact fixed-margin
//! probabilities and the bounds built on them.

mod io;

use serde::{Deserialize, Serialize};

use crate::dist::DistSpec;
use crate::error::{domain, Error, Result};
use crate::special::{bd0, gaussian_cdf, ln_dhyper, ln_factorial, TAU};

pub use io::{parse_csv, parse_json, parse_table};

/// Largest number of rows or columns accepted.
pub const MAX_DIM: usize = 64;

/// A k×ℓ table of nonnegative counts with its margins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    counts: Vec<Vec<u64>>,
}

impl TryFrom<TableRepr> for ContingencyTable {
    type Error = Error;
    fn try_from(r: TableRepr) -> Result<Self> {
        ContingencyTable::new(r.counts)
    }
}

impl From<ContingencyTable> for TableRepr {
    fn from(t: ContingencyTable) -> Self {
        TableRepr { counts: t.to_rows() }
    }
}

impl ContingencyTable {
    /// Builds a table from its rows. Needs at least a 2×2 shape, rectangular
    /// rows and a positive total.
    pub fn new(rows: Vec<Vec<u64>>) -> Result<Self> {
        let k = rows.len();
        if !(2..=MAX_DIM).contains(&k) {
            return Err(Error::InvalidTable(format!(
                "need between 2 and {MAX_DIM} rows, got {k}"
            )));
        }
        let l = rows[0].len();
        if !(2..=MAX_DIM).contains(&l) {
            return Err(Error::InvalidTable(format!(
                "need between 2 and {MAX_DIM} columns, got {l}"
            )));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != l) {
            return Err(Error::InvalidTable(format!(
                "row {} has {} cells, expected {l}",
                i + 1,
                row.len()
            )));
        }
        let counts: Vec<u64> = rows.into_iter().flatten().collect();
        let row_sums: Vec<u64> = counts.chunks(l).map(|r| r.iter().sum()).collect();
        let col_sums: Vec<u64> = (0..l).map(|j| (0..k).map(|i| counts[i * l + j]).sum()).collect();
        let total: u64 = row_sums.iter().sum();
        if total == 0 {
            return Err(Error::InvalidTable("table total must be at least 1".into()));
        }
        Ok(ContingencyTable {
            rows: k,
            cols: l,
            counts,
            row_sums,
            col_sums,
            total,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Degrees of freedom `(k−1)(ℓ−1)`.
    pub fn degrees_of_freedom(&self) -> u32 {
        ((self.rows - 1) * (self.cols - 1)) as u32
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.cols).map(<[u64]>::to_vec).collect()
    }

    /// Expected count `RᵢSⱼ/N` under independence.
    pub fn expected(&self, i: usize, j: usize) -> f64 {
        self.row_sums[i] as f64 * self.col_sums[j] as f64 / self.total as f64
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        let l = self.cols;
        self.counts.iter().enumerate().map(move |(idx, &c)| (idx / l, idx % l, c))
    }

    /// First empty cell, if any.
    pub fn first_empty_cell(&self) -> Option<(usize, usize)> {
        self.cells().find(|&(_, _, c)| c == 0).map(|(i, j, _)| (i, j))
    }
}

/// Empirical mutual information `I` (nats) and `N·I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutualInformation {
    pub i: f64,
    pub ni: f64,
}

/// `N·I = Σ xᵢⱼ ln(N xᵢⱼ / (RᵢSⱼ))` with `0 ln 0 = 0`.
///
/// Evaluated as `Σ bd0(xᵢⱼ, RᵢSⱼ/N)`: the correction terms `eᵢⱼ − xᵢⱼ` sum
/// to zero and every summand is nonnegative, so there is no cancellation.
pub fn mutual_information(table: &ContingencyTable) -> MutualInformation {
    let ni: f64 = table
        .cells()
        .map(|(i, j, x)| {
            let e = table.expected(i, j);
            if e == 0.0 {
                0.0
            } else {
                bd0(x as f64, e)
            }
        })
        .sum();
    let ni = ni.max(0.0);
    MutualInformation {
        i: ni / table.total as f64,
        ni,
    }
}

/// Likelihood-ratio statistic `G² = 2·N·I`.
pub fn g2_statistic(table: &ContingencyTable) -> f64 {
    2.0 * mutual_information(table).ni
}

/// Pearson's `χ² = Σ (X − RS/N)² / (RS/N)`.
pub fn chi2_statistic(table: &ContingencyTable) -> Result<f64> {
    if let Some(i) = table.row_sums.iter().position(|&r| r == 0) {
        return Err(domain(format!("chi2 needs positive margins, row {} sums to 0", i + 1)));
    }
    if let Some(j) = table.col_sums.iter().position(|&s| s == 0) {
        return Err(domain(format!("chi2 needs positive margins, column {} sums to 0", j + 1)));
    }
    Ok(table
        .cells()
        .map(|(i, j, x)| {
            let e = table.expected(i, j);
            let d = x as f64 - e;
            d * d / e
        })
        .sum())
}

/// Pearson's statistic restricted to rows and columns with positive
/// margins. Used by the simulator, where a drawn table may leave a margin
/// empty.
pub(crate) fn chi2_statistic_nonempty(table: &ContingencyTable) -> f64 {
    table
        .cells()
        .filter(|&(i, j, _)| table.row_sums[i] > 0 && table.col_sums[j] > 0)
        .map(|(i, j, x)| {
            let e = table.expected(i, j);
            let d = x as f64 - e;
            d * d / e
        })
        .sum()
}

/// Exact probability of the table given its margins under independence,
/// `∏Rᵢ! ∏Sⱼ! / (N! ∏xᵢⱼ!)`.
pub fn point_probability(table: &ContingencyTable) -> f64 {
    if table.rows == 2 && table.cols == 2 {
        let m = TwoByTwoMargins::of_table(table);
        return ln_dhyper(table.get(0, 0), m.r, m.total - m.r, m.n).exp();
    }
    let ln_p = table.row_sums.iter().map(|&r| ln_factorial(r)).sum::<f64>()
        + table.col_sums.iter().map(|&s| ln_factorial(s)).sum::<f64>()
        - ln_factorial(table.total)
        - table.counts.iter().map(|&x| ln_factorial(x)).sum::<f64>();
    ln_p.exp()
}

/// Upper bound on [`point_probability`] for tables without empty cells:
///
/// ```text
/// e^{−N·I} · ( ∏Rᵢ ∏Sⱼ / (τ^{(k−1)(ℓ−1)} N ∏xᵢⱼ) )^{1/2}
/// ```
pub fn point_probability_bound(table: &ContingencyTable) -> Result<f64> {
    if let Some((i, j)) = table.first_empty_cell() {
        return Err(domain(format!(
            "the point-probability bound needs every cell ≥ 1, cell ({}, {}) is empty",
            i + 1,
            j + 1
        )));
    }
    let ln_margins: f64 = table.row_sums.iter().map(|&r| (r as f64).ln()).sum::<f64>()
        + table.col_sums.iter().map(|&s| (s as f64).ln()).sum::<f64>();
    let ln_cells: f64 = table.counts.iter().map(|&x| (x as f64).ln()).sum();
    let df = f64::from(table.degrees_of_freedom());
    let ni = mutual_information(table).ni;
    Ok((-ni + 0.5 * (ln_margins - df * TAU.ln() - (table.total as f64).ln() - ln_cells)).exp())
}

/// Margins `(N, n, r)` of a 2×2 table whose free cell is `X`:
///
/// ```text
///   X      r−X      | r
///   n−X    N−r−n+X  | N−r
///   n      N−n      | N
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoByTwoMargins {
    pub total: u64,
    pub n: u64,
    pub r: u64,
}

impl TwoByTwoMargins {
    pub fn new(total: u64, n: u64, r: u64) -> Result<Self> {
        if n > total || r > total {
            return Err(domain(format!(
                "margins need n ≤ N and r ≤ N, got N={total}, n={n}, r={r}"
            )));
        }
        Ok(TwoByTwoMargins { total, n, r })
    }

    /// Margins of an existing 2×2 table (first column sum, first row sum).
    pub fn of_table(table: &ContingencyTable) -> Self {
        TwoByTwoMargins {
            total: table.total,
            n: table.col_sums[0],
            r: table.row_sums[0],
        }
    }

    /// `(min, max)` of the free cell.
    pub fn support(&self) -> (u64, u64) {
        ((self.n + self.r).saturating_sub(self.total), self.n.min(self.r))
    }

    pub fn contains(&self, x: u64) -> bool {
        let (lo, hi) = self.support();
        (lo..=hi).contains(&x)
    }

    pub fn mean(&self) -> f64 {
        self.n as f64 * self.r as f64 / self.total as f64
    }

    /// A margin equal to 0 or N fixes the whole table.
    pub fn is_degenerate(&self) -> bool {
        self.n == 0 || self.r == 0 || self.n == self.total || self.r == self.total
    }

    pub fn distribution(&self) -> DistSpec {
        DistSpec::Hypergeometric {
            population: self.total,
            draws: self.n,
            successes: self.r,
        }
    }

    /// The table with free cell `x`.
    pub fn table(&self, x: u64) -> Result<ContingencyTable> {
        self.check_cell(x)?;
        let (nn, n, r) = (self.total, self.n, self.r);
        ContingencyTable::new(vec![vec![x, r - x], vec![n - x, nn + x - r - n]])
    }

    pub(crate) fn check_cell(&self, x: u64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            let (lo, hi) = self.support();
            Err(domain(format!(
                "cell value {x} outside the support [{lo}, {hi}] of margins (N={}, n={}, r={})",
                self.total, self.n, self.r
            )))
        }
    }
}

/// `N·I` of the 2×2 table with margins `(N, n, r)` and free cell `x`.
/// The caller guarantees `x` is in the support.
pub(crate) fn two_by_two_ni(total: u64, n: u64, r: u64, x: u64) -> f64 {
    let nn = total as f64;
    let (nf, rf, xf) = (n as f64, r as f64, x as f64);
    let cells = [
        (xf, nf * rf / nn),
        ((r - x) as f64, (nn - nf) * rf / nn),
        ((n - x) as f64, nf * (nn - rf) / nn),
        ((total + x - r - n) as f64, (nn - nf) * (nn - rf) / nn),
    ];
    cells
        .iter()
        .map(|&(c, e)| if e == 0.0 { 0.0 } else { bd0(c, e) })
        .sum::<f64>()
        .max(0.0)
}

/// Signed square root of χ² for a 2×2 table:
/// `(x − nr/N) / (nr(N−r)(N−n)/N³)^{1/2}`.
pub fn two_by_two_chi(m: &TwoByTwoMargins, x: u64) -> Result<f64> {
    if m.is_degenerate() {
        return Err(domain(format!(
            "chi needs nondegenerate margins, got N={}, n={}, r={}",
            m.total, m.n, m.r
        )));
    }
    m.check_cell(x)?;
    let (nn, n, r) = (m.total as f64, m.n as f64, m.r as f64);
    let scale = n * r * (nn - r) * (nn - n) / (nn * nn * nn);
    Ok((x as f64 - n * r / nn) / scale.sqrt())
}

/// Gaussian-Φ tail bound for the hypergeometric lower tail, reported next
/// to the exact tail it bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChvatalBound {
    /// `Φ(−(2n·D((x/n, 1−x/n) ‖ (r/N, 1−r/N)))^{1/2})`
    pub bound: f64,
    /// Exact `Pr(X < x)`.
    pub exact_lower_tail: f64,
}

/// Sharpened Chvátal bound on `Pr(X < x)` for `x ≤ nr/N`.
pub fn chvatal_improved_bound(m: &TwoByTwoMargins, x: u64) -> Result<ChvatalBound> {
    if m.n == 0 {
        return Err(domain("the Chvátal bound needs n ≥ 1"));
    }
    if x as f64 > m.mean() {
        return Err(domain(format!(
            "the Chvátal bound needs x ≤ nr/N = {}, got x = {x}",
            m.mean()
        )));
    }
    let (nn, n, r) = (m.total as f64, m.n as f64, m.r as f64);
    // n·D(x/n ‖ r/N) as a sum of deviance terms.
    let xf = x as f64;
    let n_div = bd0(xf, n * r / nn) + bd0(n - xf, n * (nn - r) / nn);
    let bound = gaussian_cdf(-(2.0 * n_div).sqrt());
    let dist = m.distribution();
    let exact_lower_tail = if x == 0 { 0.0 } else { dist.cdf((x - 1) as f64)? };
    Ok(ChvatalBound {
        bound,
        exact_lower_tail,
    })
}

/// Exact and Gaussian-estimate tail figures for one 2×2 table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactTestReport {
    pub margins: TwoByTwoMargins,
    pub x: u64,
    /// `Pr(X ≤ x)`
    pub left_tail: f64,
    /// `Pr(X ≥ x)`
    pub right_tail: f64,
    /// `Pr(X < x)`, the lower end of the step at `x`.
    pub lower: f64,
    /// `Pr(X ≤ x)`, the upper end of the step at `x`.
    pub upper: f64,
    /// Signed log-likelihood `g(x)`.
    pub g: f64,
    /// `Φ(g(x))`
    pub estimate: f64,
    /// Whether `lower < estimate < upper` holds in double precision.
    pub inside: bool,
}

pub fn exact_test(m: &TwoByTwoMargins, x: u64) -> Result<ExactTestReport> {
    m.check_cell(x)?;
    let dist = m.distribution();
    let (lo, _) = m.support();
    let left_tail = dist.cdf(x as f64)?;
    let (lower, right_tail) = if x == lo {
        (0.0, 1.0)
    } else {
        let below = (x - 1) as f64;
        (dist.cdf(below)?, dist.sf(below)?)
    };
    let ni = two_by_two_ni(m.total, m.n, m.r, x);
    let magnitude = (2.0 * ni).sqrt();
    let g = if (x as f64) < m.mean() { -magnitude } else { magnitude };
    let estimate = gaussian_cdf(g);
    Ok(ExactTestReport {
        margins: *m,
        x,
        left_tail,
        right_tail,
        lower,
        upper: left_tail,
        g,
        estimate,
        inside: lower < estimate && estimate < left_tail,
    })
}

/// Everything the `table` command prints for one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSummary {
    pub counts: Vec<Vec<u64>>,
    pub total: u64,
    pub degrees_of_freedom: u32,
    pub mutual_information: f64,
    pub ni: f64,
    pub g2: f64,
    /// Absent when a margin is zero.
    pub chi2: Option<f64>,
    pub point_probability: f64,
    /// Absent when a cell is empty.
    pub point_probability_bound: Option<f64>,
}

pub fn summarize(table: &ContingencyTable) -> TableSummary {
    let mi = mutual_information(table);
    TableSummary {
        counts: table.to_rows(),
        total: table.total,
        degrees_of_freedom: table.degrees_of_freedom(),
        mutual_information: mi.i,
        ni: mi.ni,
        g2: 2.0 * mi.ni,
        chi2: chi2_statistic(table).ok(),
        point_probability: point_probability(table),
        point_probability_bound: point_probability_bound(table).ok(),
    }
}
