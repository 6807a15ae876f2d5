//! `outsideview` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use outsideview_core::diligence::{
    run_due_diligence, BenchmarkInput, DiligenceOptions, OutcomeMode, Section,
};
use outsideview_core::display::{fraction_pct, level, ratio};
use outsideview_core::empirics::summarize;
use outsideview_core::{
    BenchmarkDistribution, Direction, Funding, OutlierPolicy, RecordFilter, ReferenceClass,
};

use crate::csvio::{parse_rampup_csv, parse_reference_csv};
use crate::json::{
    read_class, read_forecast, read_risk_register, read_summary, to_pretty, SummaryFile,
};
use crate::{markdown, Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "outsideview",
    version,
    about = "Outside-view benchmarking and due diligence of forecasts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate CSV files and write a class bundle (JSON).
    Ingest(IngestArgs),
    /// Summarize a reference class into a benchmark summary (JSON).
    Benchmark(BenchmarkArgs),
    /// Read quantiles and shortfall probabilities from a benchmark.
    Quantile(QuantileArgs),
    /// Run the eight-step due diligence of a forecast.
    Diligence(DiligenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    None,
    Manual,
    Auto,
}

impl From<PolicyArg> for OutlierPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::None => OutlierPolicy::None,
            PolicyArg::Manual => OutlierPolicy::Manual,
            PolicyArg::Auto => OutlierPolicy::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    BenefitLike,
    CostLike,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::BenefitLike => Direction::BenefitLike,
            DirectionArg::CostLike => Direction::CostLike,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Md,
}

/// Where the reference class comes from.
#[derive(Debug, Args)]
pub struct ClassArgs {
    /// Reference-class CSV.
    #[arg(long, conflicts_with = "class")]
    pub records: Option<PathBuf>,
    /// Ramp-up CSV, attached to --records.
    #[arg(long, requires = "records")]
    pub rampup: Option<PathBuf>,
    /// Class bundle written by `ingest`.
    #[arg(long)]
    pub class: Option<PathBuf>,
    /// Class label for --records (default: file stem).
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, value_enum, default_value = "benefit-like")]
    pub direction: DirectionArg,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub source: ClassArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Record filter `key=value`; keys: category, funding, forecaster_id,
    /// open_year, open_year_min, open_year_max. Repeat to combine.
    #[arg(long = "filter", value_name = "KEY=VALUE")]
    pub filters: Vec<String>,
    #[arg(long = "exclude-outliers", value_enum, default_value = "manual")]
    pub exclude_outliers: PolicyArg,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub source: ClassArgs,
    #[command(flatten)]
    pub select: SelectArgs,
    /// Summary JSON destination; without it the JSON goes to stdout and the
    /// table to stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QuantileArgs {
    #[command(flatten)]
    pub source: ClassArgs,
    /// Benchmark summary JSON instead of records.
    #[arg(long, conflicts_with_all = ["records", "class"])]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub select: SelectArgs,
    /// Probabilities to read, comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95])]
    pub p: Vec<f64>,
    /// Shortfall sizes whose probability to report, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub shortfall: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct DiligenceArgs {
    /// Forecast under review (JSON).
    #[arg(long)]
    pub forecast: PathBuf,
    #[command(flatten)]
    pub source: ClassArgs,
    /// Benchmark summary JSON. With a class as well, the summary is the
    /// benchmark and the class feeds the record-level steps.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long = "exclude-outliers", value_enum, default_value = "manual")]
    pub exclude_outliers: PolicyArg,
    /// Risk register (JSON array of entries).
    #[arg(long = "risk-register")]
    pub risk_register: Option<PathBuf>,
    /// Text file with the forecaster's comments.
    #[arg(long)]
    pub comments: Option<PathBuf>,
    /// Reviewer finds the forecaster's claims contradicted by the data.
    #[arg(long = "claims-contradicted")]
    pub claims_contradicted: bool,
    /// Reviewer has case evidence that the benchmark bias does not apply.
    #[arg(long = "counter-evidence")]
    pub counter_evidence: bool,
    /// Confidence levels for the outcome intervals, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.8, 0.9])]
    pub levels: Vec<f64>,
    /// Shortfall fraction used in the variance comparison.
    #[arg(long, default_value_t = 0.15)]
    pub shortfall: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Bootstrap resamples (at least 1000).
    #[arg(long, default_value_t = 2000)]
    pub resamples: usize,
    /// Expected outcome from the mean of the adverse outcomes only.
    #[arg(long)]
    pub pessimistic: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Report path; outcome_table.csv is written beside it. Default: stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn check_readable(path: &Path) -> Result<()> {
    fs::metadata(path).map(|_| ()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl ClassArgs {
    fn any(&self) -> bool {
        self.records.is_some() || self.class.is_some()
    }

    fn check(&self) -> Result<()> {
        for p in [&self.records, &self.rampup, &self.class]
            .into_iter()
            .flatten()
        {
            check_readable(p)?;
        }
        Ok(())
    }

    fn load(&self) -> Result<ReferenceClass> {
        if let Some(path) = &self.class {
            return read_class(path);
        }
        let path = self
            .records
            .as_ref()
            .ok_or_else(|| Error::Usage(String::from("one of --records or --class is required")))?;
        let label = self.label.clone().unwrap_or_else(|| {
            path.file_stem().map_or_else(
                || String::from("reference class"),
                |s| s.to_string_lossy().into_owned(),
            )
        });
        let class = parse_reference_csv(open(path)?, &label, self.direction.into())?;
        match &self.rampup {
            Some(r) => parse_rampup_csv(open(r)?, class),
            None => Ok(class),
        }
    }
}

/// Parses repeated `key=value` filters into one conjunction. `None` means
/// the filters contradict each other and select nothing.
pub fn parse_filters(items: &[String]) -> Result<Option<RecordFilter>> {
    let mut acc = RecordFilter::default();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("filter `{item}` is not key=value")))?;
        let (k, v) = (k.trim(), v.trim());
        let year = || {
            v.parse::<i32>()
                .map_err(|_| Error::Usage(format!("filter `{item}`: `{v}` is not a year")))
        };
        let mut f = RecordFilter::default();
        match k {
            "category" => f.category = Some(v.to_string()),
            "funding" => {
                f.funding = Some(
                    Funding::parse(v)
                        .ok_or_else(|| Error::Usage(format!("filter `{item}`: unknown funding")))?,
                )
            }
            "forecaster_id" | "forecaster" => f.forecaster_id = Some(v.to_string()),
            "open_year" => {
                let y = year()?;
                f.open_year_min = Some(y);
                f.open_year_max = Some(y);
            }
            "open_year_min" => f.open_year_min = Some(year()?),
            "open_year_max" => f.open_year_max = Some(year()?),
            _ => return Err(Error::Usage(format!("unknown filter key `{k}`"))),
        }
        match acc.and(&f) {
            Some(merged) => acc = merged,
            None => return Ok(None),
        }
    }
    Ok(Some(acc))
}

fn select(
    class: ReferenceClass,
    args: &SelectArgs,
) -> Result<(ReferenceClass, BenchmarkDistribution)> {
    let filter = parse_filters(&args.filters)?;
    let policy: OutlierPolicy = args.exclude_outliers.into();
    let filtered = match filter {
        Some(f) => class.filter(&f),
        None => ReferenceClass::new(class.label(), class.direction(), Vec::new())?,
    };
    let flagged = filtered.flag_outliers(policy)?;
    let dist = summarize(&flagged, policy != OutlierPolicy::None)?;
    Ok((flagged, dist))
}

fn benchmark_table(d: &BenchmarkDistribution, outliers: usize) -> String {
    let mut s = format!("{} (n = {}", d.label, d.n);
    if outliers > 0 {
        s.push_str(&format!(", {outliers} outlier(s) excluded"));
    }
    s.push_str(")\n");
    let q = |p: f64| {
        d.quantile(p)
            .map(ratio)
            .unwrap_or_else(|_| String::from("n/a"))
    };
    s.push_str(&format!("  mean      {}\n", ratio(d.mean)));
    s.push_str(&format!("  median    {}\n", ratio(d.median)));
    s.push_str(&format!("  sd        {}\n", ratio(d.sd)));
    s.push_str(&format!(
        "  quartiles {} / {} / {}\n",
        q(0.25),
        q(0.5),
        q(0.75)
    ));
    for sf in [0.15, 0.25, 0.50] {
        if let Ok(p) = d.adverse_probability(sf) {
            let word = match d.direction {
                Direction::BenefitLike => "shortfall",
                Direction::CostLike => "overrun",
            };
            s.push_str(&format!(
                "  P({word} >= {}) {}\n",
                fraction_pct(sf),
                fraction_pct(p.value)
            ));
        }
    }
    for w in &d.warnings {
        s.push_str(&format!("  warning: {w}\n"));
    }
    s
}

fn ingest(a: &IngestArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    a.source.check()?;
    let class = a.source.load()?;
    let json = to_pretty(&class);
    let msg = format!(
        "{} records, {} ramp-up rows ({} projects), {} flagged as outliers",
        class.len(),
        class.rampups().len(),
        class.rampup_project_count(),
        class.outlier_count()
    );
    match &a.out {
        Some(p) => {
            write_file(p, &json)?;
            let _ = writeln!(out, "{msg}");
        }
        None => {
            let _ = write!(out, "{json}");
            let _ = writeln!(err, "{msg}");
        }
    }
    Ok(())
}

fn benchmark(a: &BenchmarkArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    a.source.check()?;
    let (class, dist) = select(a.source.load()?, &a.select)?;
    let outliers = if a.select.exclude_outliers == PolicyArg::None {
        0
    } else {
        class.outlier_count()
    };
    let table = benchmark_table(&dist, outliers);
    let json = to_pretty(&SummaryFile::from_distribution(&dist));
    match &a.out {
        Some(p) => {
            write_file(p, &json)?;
            let _ = write!(out, "{table}");
        }
        None => {
            let _ = write!(out, "{json}");
            let _ = write!(err, "{table}");
        }
    }
    Ok(())
}

fn quantile(a: &QuantileArgs, out: &mut dyn Write) -> Result<()> {
    a.source.check()?;
    let dist = match &a.summary {
        Some(p) => {
            check_readable(p)?;
            read_summary(p)?
        }
        None => select(a.source.load()?, &a.select)?.1,
    };
    let _ = writeln!(out, "p\taccuracy");
    for &p in &a.p {
        let _ = writeln!(out, "{}\t{}", level(p), ratio(dist.quantile(p)?));
    }
    if !a.shortfall.is_empty() {
        let _ = writeln!(out, "s\tprobability");
        for &s in &a.shortfall {
            let t = dist.adverse_probability(s)?;
            let _ = writeln!(
                out,
                "{}\t{}{}",
                fraction_pct(s),
                fraction_pct(t.value),
                if t.span_clamped {
                    " (clamped to table span)"
                } else {
                    ""
                }
            );
        }
    }
    Ok(())
}

/// CSV of the outcome intervals, for plotting.
pub fn outcome_csv(report: &outsideview_core::DueDiligenceReport) -> Option<String> {
    let Section::Assessed(t) = &report.step6_outcome else {
        return None;
    };
    let mut s = String::from("level,acc_lo,acc_hi,val_lo,val_hi\n");
    for r in &t.rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.level, r.accuracy.lower, r.accuracy.upper, r.value.lower, r.value.upper
        ));
    }
    Some(s)
}

fn diligence(a: &DiligenceArgs, out: &mut dyn Write) -> Result<()> {
    check_readable(&a.forecast)?;
    a.source.check()?;
    for p in [&a.summary, &a.risk_register, &a.comments]
        .into_iter()
        .flatten()
    {
        check_readable(p)?;
    }
    if !a.source.any() && a.summary.is_none() {
        return Err(outsideview_core::Error::MissingCoreFindings.into());
    }
    if let Some(l) = a.levels.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
        return Err(Error::Usage(format!("level {l} is outside (0, 1)")));
    }

    let fc = read_forecast(&a.forecast)?;
    let input = BenchmarkInput {
        class: if a.source.any() {
            Some(a.source.load()?)
        } else {
            None
        },
        summary: a.summary.as_deref().map(read_summary).transpose()?,
    };
    let comments = a
        .comments
        .as_deref()
        .map(|p| {
            fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.to_path_buf(),
                source,
            })
        })
        .transpose()?;
    let options = DiligenceOptions {
        levels: a.levels.clone(),
        shortfall: a.shortfall,
        seed: a.seed,
        resamples: a.resamples,
        outlier_policy: a.exclude_outliers.into(),
        outcome_mode: if a.pessimistic {
            OutcomeMode::Pessimistic
        } else {
            OutcomeMode::BenefitOfDoubt
        },
        risk_register: a
            .risk_register
            .as_deref()
            .map(read_risk_register)
            .transpose()?,
        forecaster_comments: comments,
        claims_contradicted: a.claims_contradicted,
        counter_evidence: a.counter_evidence,
    };
    let report = run_due_diligence(&fc, &input, &options)?;
    let text = match a.format {
        Format::Json => to_pretty(&report),
        Format::Md => markdown::render(&report),
    };
    let csv_dir = match &a.out {
        Some(p) => {
            write_file(p, &text)?;
            p.parent().map(Path::to_path_buf).unwrap_or_default()
        }
        None => {
            let _ = write!(out, "{text}");
            PathBuf::new()
        }
    };
    if let Some(csv) = outcome_csv(&report) {
        write_file(&csv_dir.join("outcome_table.csv"), &csv)?;
    }
    let _ = writeln!(out, "VERDICT: {}", report.step8_conclusion.verdict.as_str());
    Ok(())
}

/// Runs a parsed command, writing to the given streams.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Ingest(a) => ingest(a, out, err),
        Command::Benchmark(a) => benchmark(a, out, err),
        Command::Quantile(a) => quantile(a, out),
        Command::Diligence(a) => diligence(a, out),
    }
}
