//! The `siglik` command line.
//!
//! [`run`] parses an argument list and returns the exit code together with
//! everything that would be written to stdout and stderr, so the whole
//! surface can be exercised in-process.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 when a
//! verification sweep finds violations.

use std::io::Read;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use siglik::fmt::significant;
use siglik::qq::{self, Preset, Statistic};
use siglik::signed::{divergence, phi_g, signed_ll, Side};
use siglik::table::{self, chvatal_improved_bound, exact_test, parse_table, summarize};
use siglik::verify::{self, GridFamily, VerificationConfig, VerificationReport};
use siglik::{DistSpec, Error, TwoByTwoMargins};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "SIGLIK_WORKERS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandResult {
    fn ok(stdout: String) -> Self {
        CommandResult {
            exit_code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(code: i32, stderr: String) -> Self {
        CommandResult {
            exit_code: code,
            stdout: String::new(),
            stderr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Parser)]
#[command(name = "siglik", version, about = "Signed log-likelihoods, exact tests and intersection sweeps")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Significant digits for printed numbers.
    #[arg(long, global = true, default_value_t = 9, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point probability (or density) and tails of a distribution.
    Dist(PointArgs),
    /// Signed log-likelihood g(x), its divergence and Φ(g(x)).
    G(PointArgs),
    /// Statistics and exact probabilities of a contingency table.
    Table(TableArgs),
    /// Exact tails of a 2×2 table with fixed margins.
    ExactTest(ExactTestArgs),
    /// Intersection sweeps.
    Verify(VerifyArgs),
    /// QQ data.
    Qq(QqArgs),
}

#[derive(Args)]
struct DistArgs {
    /// Distribution as JSON, e.g. '{"family":"poisson","lambda":4}'.
    #[arg(long)]
    spec: Option<String>,
    /// Hypergeometric law of the free cell of a 2×2 table with margins N n r.
    #[arg(long, num_args = 3, value_names = ["N", "n", "r"])]
    hyper: Option<Vec<u64>>,
    /// hypergeometric, binomial, poisson, neg-binomial, gamma,
    /// inverse-gaussian or poisson-binomial.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    population: Option<u64>,
    #[arg(long)]
    draws: Option<u64>,
    #[arg(long)]
    successes: Option<u64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    mean: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Comma-separated success probabilities.
    #[arg(long, value_delimiter = ',')]
    probs: Option<Vec<f64>>,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    dist: DistArgs,
    /// Evaluation points (repeat or separate with commas).
    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    x: Vec<f64>,
}

#[derive(Args)]
struct TableArgs {
    /// CSV or JSON file holding the table.
    file: Option<String>,
    /// Read the table from standard input.
    #[arg(long)]
    stdin: bool,
}

#[derive(Args)]
struct ExactTestArgs {
    /// Margins N n r: total, first column sum, first row sum.
    #[arg(long, num_args = 3, required = true, value_names = ["N", "n", "r"])]
    margins: Vec<u64>,
    /// Value of the top-left cell.
    #[arg(long)]
    x: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyMode {
    Exhaustive,
    Pruned,
    Family,
}

#[derive(Args)]
struct VerifyArgs {
    mode: VerifyMode,
    /// Largest table total (exhaustive default 200, pruned default 2270).
    #[arg(long)]
    n_max: Option<u64>,
    /// Worker threads.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Relative gap below which a case is reported as a near-tie.
    #[arg(long, default_value_t = 1e-12)]
    eps: f64,
    /// Family for `family` mode; all families when omitted.
    #[arg(long)]
    family: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QqMode {
    ExactSteps,
    Simulate,
}

#[derive(Args)]
struct QqArgs {
    mode: QqMode,
    #[command(flatten)]
    dist: DistArgs,
    /// asym-2x2, sym-2x3 or sym-3x3.
    #[arg(long)]
    preset: Option<String>,
    /// Expected table as a CSV or JSON file.
    #[arg(long)]
    table: Option<String>,
    #[arg(long, value_enum, default_value = "g2")]
    statistic: StatisticArg,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Reference degrees of freedom; the table's (k−1)(ℓ−1) by default.
    #[arg(long)]
    df: Option<u32>,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Print summary figures instead of the quantile pairs.
    #[arg(long)]
    summary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatisticArg {
    G2,
    Chi2,
}

/// Failure of a command: exit code and message.
struct Failure(i32, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(1, e.to_string())
    }
}

type Outcome = std::result::Result<Output, Failure>;

/// What a command produced: a JSON value, its TSV rendering, and the
/// exit code.
struct Output {
    json: Value,
    tsv: String,
    exit_code: i32,
}

struct Printer {
    digits: usize,
}

impl Printer {
    fn num(&self, v: f64) -> String {
        significant(v, self.digits)
    }

    fn opt(&self, v: Option<f64>) -> String {
        v.map_or_else(|| "NA".to_string(), |v| self.num(v))
    }

    /// Rounds every float in `v` to the configured significant digits.
    fn round(&self, v: Value) -> Value {
        match v {
            Value::Number(n) if n.is_f64() => {
                let f = n.as_f64().expect("f64 number");
                self.num(f)
                    .parse::<f64>()
                    .ok()
                    .and_then(serde_json::Number::from_f64)
                    .map_or(Value::Null, Value::Number)
            }
            Value::Array(items) => Value::Array(items.into_iter().map(|i| self.round(i)).collect()),
            Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, self.round(v))).collect()),
            other => other,
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable output")
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure(1, msg.into())
}

/// Runs the command line, reading standard input only if a command asks
/// for it.
pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_stdin(argv, None)
}

/// Like [`run`], with `stdin` standing in for standard input.
pub fn run_with_stdin<I, T>(argv: I, stdin: Option<&str>) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    CommandResult::ok(text)
                }
                _ => CommandResult::error(1, text),
            };
        }
    };
    let printer = Printer {
        digits: usize::from(cli.precision),
    };
    let result = match &cli.command {
        Command::Dist(a) => cmd_dist(a, &printer),
        Command::G(a) => cmd_g(a, &printer),
        Command::Table(a) => cmd_table(a, stdin, &printer),
        Command::ExactTest(a) => cmd_exact_test(a, &printer),
        Command::Verify(a) => cmd_verify(a, &printer),
        Command::Qq(a) => cmd_qq(a, &printer),
    };
    match result {
        Ok(out) => {
            let stdout = match cli.format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&printer.round(out.json)).expect("json");
                    s.push('\n');
                    s
                }
                Format::Tsv => out.tsv,
            };
            let stderr = if out.exit_code == 2 {
                "verification found violations\n".to_string()
            } else {
                String::new()
            };
            CommandResult {
                exit_code: out.exit_code,
                stdout,
                stderr,
            }
        }
        Err(Failure(code, msg)) => CommandResult::error(code, format!("error: {msg}\n")),
    }
}

fn require<T>(v: Option<T>, flag: &str, family: &str) -> std::result::Result<T, Failure> {
    v.ok_or_else(|| usage(format!("--family {family} needs --{flag}")))
}

fn build_dist(a: &DistArgs) -> std::result::Result<DistSpec, Failure> {
    let chosen = [a.spec.is_some(), a.hyper.is_some(), a.family.is_some()];
    match chosen.iter().filter(|&&c| c).count() {
        0 => return Err(usage("name a distribution with --family, --hyper or --spec")),
        1 => {}
        _ => return Err(usage("use only one of --family, --hyper and --spec")),
    }
    if let Some(spec) = &a.spec {
        let dist: DistSpec =
            serde_json::from_str(spec).map_err(|e| usage(format!("invalid --spec: {e}")))?;
        dist.validate()?;
        return Ok(dist);
    }
    if let Some(h) = &a.hyper {
        return Ok(DistSpec::hypergeometric(h[0], h[1], h[2])?);
    }
    let family = a.family.as_deref().expect("checked above");
    let dist = match family {
        "hypergeometric" => DistSpec::hypergeometric(
            require(a.population, "population", family)?,
            require(a.draws, "draws", family)?,
            require(a.successes, "successes", family)?,
        )?,
        "binomial" => DistSpec::binomial(require(a.n, "n", family)?, require(a.p, "p", family)?)?,
        "poisson" => DistSpec::poisson(require(a.lambda, "lambda", family)?)?,
        "neg-binomial" => {
            DistSpec::neg_binomial(require(a.p, "p", family)?, require(a.ell, "ell", family)?)?
        }
        "gamma" => DistSpec::gamma(require(a.alpha, "alpha", family)?, require(a.mean, "mean", family)?)?,
        "inverse-gaussian" => {
            DistSpec::inverse_gaussian(require(a.mu, "mu", family)?, require(a.lambda, "lambda", family)?)?
        }
        "poisson-binomial" => DistSpec::poisson_binomial(require(a.probs.clone(), "probs", family)?)?,
        other => return Err(usage(format!("unknown family {other:?}"))),
    };
    Ok(dist)
}

fn tsv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join("\t");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

fn key_values(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}\t{v}\n")).collect()
}

fn cmd_dist(a: &PointArgs, pr: &Printer) -> Outcome {
    let dist = build_dist(&a.dist)?;
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for &x in &a.x {
        let (pmf, cdf, sf) = (dist.pmf(x)?, dist.cdf(x)?, dist.sf(x)?);
        points.push(json!({ "x": x, "pmf": pmf, "cdf": cdf, "sf": sf }));
        rows.push(vec![pr.num(x), pr.num(pmf), pr.num(cdf), pr.num(sf)]);
    }
    let label = if dist.is_discrete() { "pmf" } else { "density" };
    let mut tsv_header = vec!["x", label, "cdf", "sf"];
    if !dist.is_discrete() {
        for p in &mut points {
            let v = p["pmf"].take();
            p.as_object_mut().expect("object").remove("pmf");
            p["density"] = v;
        }
    }
    tsv_header[1] = label;
    Ok(Output {
        json: json!({ "dist": to_json(&dist), "points": points }),
        tsv: tsv_rows(&tsv_header, rows),
        exit_code: 0,
    })
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::BelowMean => "below-mean",
        Side::AtOrAboveMean => "at-or-above-mean",
    }
}

fn cmd_g(a: &PointArgs, pr: &Printer) -> Outcome {
    let dist = build_dist(&a.dist)?;
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for &x in &a.x {
        let s = signed_ll(&dist, x)?;
        let d = divergence(&dist, x)?;
        let est = phi_g(&dist, x)?;
        points.push(json!({
            "x": x, "g": s.g, "divergence": d, "side": side_name(s.side), "phi_g": est
        }));
        rows.push(vec![pr.num(x), pr.num(s.g), pr.num(d), side_name(s.side).into(), pr.num(est)]);
    }
    Ok(Output {
        json: json!({ "dist": to_json(&dist), "points": points }),
        tsv: tsv_rows(&["x", "g", "divergence", "side", "phi_g"], rows),
        exit_code: 0,
    })
}

fn read_file(path: &str) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))
}

fn read_stdin(stdin: Option<&str>) -> std::result::Result<String, Failure> {
    match stdin {
        Some(s) => Ok(s.to_string()),
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| usage(format!("cannot read standard input: {e}")))?;
            Ok(s)
        }
    }
}

fn cmd_table(a: &TableArgs, stdin: Option<&str>, pr: &Printer) -> Outcome {
    let text = match (&a.file, a.stdin) {
        (Some(_), true) => return Err(usage("give either a file or --stdin, not both")),
        (Some(path), false) => read_file(path)?,
        (None, true) => read_stdin(stdin)?,
        (None, false) => return Err(usage("table needs a file argument or --stdin")),
    };
    let table = parse_table(&text)?;
    let s = summarize(&table);
    let counts = s
        .counts
        .iter()
        .map(|r| r.iter().map(u64::to_string).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";");
    let tsv = key_values(&[
        ("counts", counts),
        ("total", s.total.to_string()),
        ("df", s.degrees_of_freedom.to_string()),
        ("mutual_information", pr.num(s.mutual_information)),
        ("g2", pr.num(s.g2)),
        ("chi2", pr.opt(s.chi2)),
        ("point_probability", pr.num(s.point_probability)),
        ("point_probability_bound", pr.opt(s.point_probability_bound)),
    ]);
    Ok(Output {
        json: to_json(&s),
        tsv,
        exit_code: 0,
    })
}

fn cmd_exact_test(a: &ExactTestArgs, pr: &Printer) -> Outcome {
    let m = TwoByTwoMargins::new(a.margins[0], a.margins[1], a.margins[2])?;
    let rep = exact_test(&m, a.x)?;
    // The tail bound applies on the lower side only.
    let bound = if m.n > 0 && (a.x as f64) <= m.mean() {
        Some(chvatal_improved_bound(&m, a.x)?)
    } else {
        None
    };
    let chi = table::two_by_two_chi(&m, a.x).ok();
    let mut json = to_json(&rep);
    json["chi"] = to_json(&chi);
    json["chvatal_bound"] = to_json(&bound.map(|b| b.bound));
    let tsv = key_values(&[
        ("N", m.total.to_string()),
        ("n", m.n.to_string()),
        ("r", m.r.to_string()),
        ("x", a.x.to_string()),
        ("left_tail", pr.num(rep.left_tail)),
        ("right_tail", pr.num(rep.right_tail)),
        ("lower", pr.num(rep.lower)),
        ("upper", pr.num(rep.upper)),
        ("g", pr.num(rep.g)),
        ("estimate", pr.num(rep.estimate)),
        ("inside", rep.inside.to_string()),
        ("chi", pr.opt(chi)),
        ("chvatal_bound", pr.opt(bound.map(|b| b.bound))),
    ]);
    Ok(Output {
        json,
        tsv,
        exit_code: 0,
    })
}

fn default_workers(flag: Option<usize>) -> usize {
    flag.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn report_output(report: &VerificationReport, pr: &Printer) -> Output {
    let mut tsv = key_values(&[
        ("cases_checked", report.cases_checked.to_string()),
        ("violations", report.violations.len().to_string()),
        ("near_ties", report.near_ties.len().to_string()),
        ("elapsed_secs", format!("{:.3}", report.elapsed_secs)),
    ]);
    let records = report
        .violations
        .iter()
        .map(|r| ("violation", r))
        .chain(report.near_ties.iter().map(|r| ("near-tie", r)));
    let rows: Vec<Vec<String>> = records
        .map(|(kind, r)| {
            vec![
                kind.to_string(),
                serde_json::to_string(&r.dist).expect("json"),
                pr.num(r.x),
                pr.opt(r.lower),
                pr.num(r.estimate),
                pr.num(r.upper),
                pr.num(r.min_gap),
                serde_json::to_value(r.recheck).expect("json").as_str().unwrap_or("").to_string(),
            ]
        })
        .collect();
    if !rows.is_empty() {
        tsv.push_str(&tsv_rows(
            &["kind", "dist", "x", "lower", "estimate", "upper", "min_gap", "recheck"],
            rows,
        ));
    }
    Output {
        json: to_json(report),
        tsv,
        exit_code: if report.passed() { 0 } else { 2 },
    }
}

fn cmd_verify(a: &VerifyArgs, pr: &Printer) -> Outcome {
    let workers = default_workers(a.workers);
    let mut cfg = VerificationConfig {
        tie_epsilon: a.eps,
        worker_count: workers,
        ..VerificationConfig::default()
    };
    let report = match a.mode {
        VerifyMode::Exhaustive => {
            cfg.mode = verify::Mode::Exhaustive;
            cfg.n_max = a.n_max.unwrap_or(200);
            verify::verify_hypergeometric_exhaustive(cfg.n_max, &cfg)?
        }
        VerifyMode::Pruned => {
            cfg.mode = verify::Mode::Pruned;
            cfg.tot_max = a.n_max.unwrap_or(verify::PRUNED_TOT_MAX);
            verify::verify_hypergeometric_pruned(&cfg)?
        }
        VerifyMode::Family => {
            cfg.mode = verify::Mode::FamilyGrid;
            if a.n_max.is_some() {
                return Err(usage("--n-max does not apply to family sweeps"));
            }
            let families = match &a.family {
                Some(name) => vec![GridFamily::from_name(name)?],
                None => GridFamily::ALL.to_vec(),
            };
            let mut total: Option<VerificationReport> = None;
            for f in families {
                let rep = verify::verify_family_grid(&verify::standard_grid(f), &cfg)?;
                total = Some(match total {
                    None => rep,
                    Some(mut acc) => {
                        acc.cases_checked += rep.cases_checked;
                        acc.violations.extend(rep.violations);
                        acc.near_ties.extend(rep.near_ties);
                        acc.elapsed_secs += rep.elapsed_secs;
                        acc
                    }
                });
            }
            total.expect("at least one family")
        }
    };
    Ok(report_output(&report, pr))
}

fn cmd_qq(a: &QqArgs, pr: &Printer) -> Outcome {
    match a.mode {
        QqMode::ExactSteps => {
            if a.preset.is_some() || a.table.is_some() {
                return Err(usage("exact-steps takes a distribution, not --preset or --table"));
            }
            let dist = build_dist(&a.dist)?;
            let series = qq::qq_exact_steps(&dist)?;
            Ok(Output {
                json: to_json(&series),
                tsv: series.to_tsv(pr.digits),
                exit_code: 0,
            })
        }
        QqMode::Simulate => {
            let expected = match (&a.preset, &a.table) {
                (Some(p), None) => Preset::from_name(p)?.table(),
                (None, Some(path)) => parse_table(&read_file(path)?)?,
                (None, None) => return Err(usage("simulate needs --preset or --table")),
                (Some(_), Some(_)) => return Err(usage("use either --preset or --table")),
            };
            let statistic = match a.statistic {
                StatisticArg::G2 => Statistic::G2,
                StatisticArg::Chi2 => Statistic::Chi2,
            };
            let df = a.df.unwrap_or_else(|| expected.degrees_of_freedom());
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(default_workers(a.workers))
                .build()
                .map_err(|e| usage(format!("cannot start worker pool: {e}")))?;
            let series = pool.install(|| qq::simulate_qq(&expected, statistic, a.samples, a.seed, df))?;
            if a.summary {
                let n = series.sample_count as f64;
                let mean = series.sample.iter().sum::<f64>() / n;
                let var = series.sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
                let deviation = series.max_probability_deviation(0.98);
                let band = qq::kolmogorov_quantile(0.99)? / n.sqrt();
                let json = json!({
                    "df": df, "sample_count": series.sample_count, "seed": a.seed,
                    "mean": mean, "standard_error": (var / n).sqrt(),
                    "max_deviation_central_98": deviation, "kolmogorov_band_99": band,
                });
                let tsv = key_values(&[
                    ("df", df.to_string()),
                    ("sample_count", series.sample_count.to_string()),
                    ("seed", a.seed.to_string()),
                    ("mean", pr.num(mean)),
                    ("standard_error", pr.num((var / n).sqrt())),
                    ("max_deviation_central_98", pr.num(deviation)),
                    ("kolmogorov_band_99", pr.num(band)),
                ]);
                return Ok(Output {
                    json,
                    tsv,
                    exit_code: 0,
                });
            }
            Ok(Output {
                json: to_json(&series),
                tsv: series.to_tsv(pr.digits),
                exit_code: 0,
            })
        }
    }
}
