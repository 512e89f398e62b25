//! Command-line surface: `anonymize`, `theory`, `simulate`, `privacy`.
//!
//! Every subcommand echoes its full effective configuration (including
//! a defaulted seed) to stderr so any run can be replayed from its log.
//! Exit codes: 0 success, 2 parse/config, 3 too few rows, 4 repeated
//! covariance eigenvalues, 5 every simulation cell failed, 6 dimension
//! mismatch, 1 anything else.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::anonymize::{anonymize, fit_spectral, Method, OrthogonalMode};
use crate::asymptotics::{
    assumption_gap, cov_limit_cov, mean_limit_cov, Estimator, GaussianSpec, Statistic,
};
use crate::error::{Error, Result};
use crate::io::{format_float, matrix_csv_string, read_csv, write_atomic, write_csv};
use crate::privacy::{privacy_report, DEFAULT_MATCH_DELTA};
use crate::sampling::RngStream;
use crate::simulate::{grid_cells, run_plan, RecordStatus, SimulationRecord, SimulationSpec};

#[derive(Parser)]
#[command(
    name = "spectral-anon",
    version,
    about = "Spectral anonymization of numeric CSV tables, with limit calculators, a Monte Carlo harness, and record-linkage evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Anonymize a numeric CSV file.
    Anonymize(AnonymizeArgs),
    /// Print the closed-form limiting covariance for a given population
    /// covariance.
    Theory(TheoryArgs),
    /// Run a Monte Carlo convergence grid from a TOML config.
    Simulate(SimulateArgs),
    /// Record-linkage evaluation of an anonymized file against its
    /// source.
    Privacy(PrivacyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    P,
    J,
    O,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum OModeArg {
    #[default]
    Fast,
    Literal,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Original,
    P,
    J,
    O,
}

impl From<EstimatorArg> for Estimator {
    fn from(arg: EstimatorArg) -> Self {
        match arg {
            EstimatorArg::Original => Estimator::Original,
            EstimatorArg::P => Estimator::Permutation,
            EstimatorArg::J => Estimator::SignFlip,
            EstimatorArg::O => Estimator::Orthogonal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StatisticArg {
    Mean,
    Covariance,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum FormatArg {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Args)]
struct AnonymizeArgs {
    /// Input CSV (header row plus an all-numeric body).
    input: PathBuf,
    /// Anonymization variant.
    #[arg(long, value_enum)]
    method: MethodArg,
    /// How the orthogonal variant draws its transformations.
    #[arg(long, value_enum, default_value_t)]
    o_mode: OModeArg,
    /// RNG seed; drawn from entropy (and echoed) when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SigmaSource {
    /// CSV file holding a symmetric positive-definite matrix.
    #[arg(long)]
    sigma: Option<PathBuf>,
    /// Inline diagonal covariance, e.g. --diag 2,1.
    #[arg(long, value_delimiter = ',')]
    diag: Option<Vec<f64>>,
}

#[derive(Args)]
struct TheoryArgs {
    #[command(flatten)]
    source: SigmaSource,
    /// Whose limit: the original-data estimator or an anonymized one.
    #[arg(long, value_enum)]
    estimator: EstimatorArg,
    /// Which statistic the limit describes.
    #[arg(long, value_enum)]
    statistic: StatisticArg,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: FormatArg,
}

#[derive(Args)]
struct SimulateArgs {
    /// Grid definition (TOML).
    config: PathBuf,
    /// JSON-lines record file; also the resume marker store.
    #[arg(long, default_value = "simulation.jsonl")]
    output: PathBuf,
    /// Summary CSV path (defaults to the record file with a
    /// .summary.csv extension).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Worker threads for the replication loop.
    #[arg(long)]
    parallelism: Option<usize>,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PrivacyArgs {
    /// Original CSV.
    original: PathBuf,
    /// Anonymized CSV (same shape).
    anonymized: PathBuf,
    /// Match tolerance (strict comparison).
    #[arg(long, default_value_t = DEFAULT_MATCH_DELTA)]
    delta: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Include the per-row minimum distances in the report.
    #[arg(long)]
    per_row: bool,
}

pub fn main() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Anonymize(args) => cmd_anonymize(args),
        Command::Theory(args) => cmd_theory(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Privacy(args) => cmd_privacy(args),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn cmd_anonymize(args: AnonymizeArgs) -> Result<()> {
    let seed = args.seed.unwrap_or_else(rand::random);
    let method = match (args.method, args.o_mode) {
        (MethodArg::P, _) => Method::Permutation,
        (MethodArg::J, _) => Method::SignFlip,
        (MethodArg::O, OModeArg::Fast) => Method::Orthogonal(OrthogonalMode::Fast),
        (MethodArg::O, OModeArg::Literal) => Method::Orthogonal(OrthogonalMode::Literal),
    };
    let o_mode = match args.o_mode {
        OModeArg::Fast => "fast",
        OModeArg::Literal => "literal",
    };
    eprintln!(
        "anonymize: input={} method={} o-mode={o_mode} seed={seed} output={}",
        args.input.display(),
        method.label(),
        args.output.display()
    );

    let data = read_csv(&args.input)?;
    let model = fit_spectral(&data)?;
    let formatted: Vec<String> = model
        .singular_values()
        .iter()
        .map(|&d| format_float(d))
        .collect();
    eprintln!("singular values: {}", formatted.join(" "));

    let mut rng = RngStream::from_seed(seed);
    let out = anonymize(&model, method, &mut rng);
    write_csv(&args.output, &out)?;
    Ok(())
}

#[derive(Serialize)]
struct TheoryReport<'a> {
    statistic: &'a str,
    estimator: &'a str,
    dim: usize,
    assumption_gap: f64,
    /// Row-major matrix.
    matrix: Vec<Vec<f64>>,
}

fn load_sigma(source: &SigmaSource) -> Result<DMatrix<f64>> {
    if let Some(path) = &source.sigma {
        let table = read_csv(path)?;
        if table.nrows() != table.ncols() {
            return Err(Error::DimensionMismatch {
                left: format!("{} rows", table.nrows()),
                right: format!("{} columns", table.ncols()),
            });
        }
        Ok(table.into_values())
    } else {
        let diag = source.diag.as_ref().expect("clap enforces the group");
        if diag.is_empty() {
            return Err(Error::InvalidConfig("--diag needs at least one value".into()));
        }
        Ok(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }
}

fn cmd_theory(args: TheoryArgs) -> Result<()> {
    let sigma = load_sigma(&args.source)?;
    let estimator = Estimator::from(args.estimator);
    let statistic = match args.statistic {
        StatisticArg::Mean => Statistic::Mean,
        StatisticArg::Covariance => Statistic::Covariance,
    };
    eprintln!(
        "theory: dim={} estimator={} statistic={}",
        sigma.nrows(),
        estimator.label(),
        statistic.label()
    );

    let gap = assumption_gap(&sigma)?;
    eprintln!("assumption gap: {}", format_float(gap));

    let spec = GaussianSpec::new(DVector::zeros(sigma.nrows()), sigma)?;
    let limit = match statistic {
        Statistic::Mean => mean_limit_cov(&spec, estimator),
        Statistic::Covariance => cov_limit_cov(&spec, estimator)?,
    };

    let text = match args.format {
        FormatArg::Csv => matrix_csv_string(&limit.matrix),
        FormatArg::Jsonl => {
            let rows: Vec<Vec<f64>> = (0..limit.matrix.nrows())
                .map(|i| limit.matrix.row(i).iter().copied().collect())
                .collect();
            let report = TheoryReport {
                statistic: statistic.label(),
                estimator: estimator.label(),
                dim: limit.matrix.nrows(),
                assumption_gap: gap,
                matrix: rows,
            };
            let mut line = serde_json::to_string(&report).expect("report serializes");
            line.push('\n');
            line
        }
    };
    match &args.output {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

type CellKey = (String, usize, usize, String);

fn read_existing_records(path: &Path) -> Result<Vec<SimulationRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: SimulationRecord = serde_json::from_str(line).map_err(|e| {
            Error::InvalidConfig(format!(
                "{}: line {} is not a simulation record: {e}",
                path.display(),
                idx + 1
            ))
        })?;
        records.push(record);
    }
    Ok(records)
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", args.config.display())))?;
    let mut spec = SimulationSpec::from_toml_str(&text)?;
    if let Some(seed) = args.seed {
        spec.base_seed = seed;
    }
    let summary_path = args
        .summary
        .clone()
        .unwrap_or_else(|| args.output.with_extension("summary.csv"));
    eprintln!(
        "simulate: config={} seed={} replications={} cells={} output={} summary={} parallelism={}",
        args.config.display(),
        spec.base_seed,
        spec.replications,
        grid_cells(&spec).len(),
        args.output.display(),
        summary_path.display(),
        args.parallelism
            .map_or("auto".to_string(), |n| n.to_string()),
    );

    let run = || -> Result<()> {
        // Completed cells (both statistics present, not errored) are
        // reused; everything else is recomputed and appended, which
        // makes an interrupted grid resumable.
        let existing = read_existing_records(&args.output)?;
        let mut done: HashMap<CellKey, Vec<SimulationRecord>> = HashMap::new();
        for record in existing {
            if record.status != RecordStatus::Error {
                done.entry(record.cell_key()).or_default().push(record);
            }
        }
        done.retain(|_, records| {
            records.iter().any(|r| r.statistic == "mean")
                && records.iter().any(|r| r.statistic == "covariance")
        });

        let mut appender: Option<std::fs::File> = None;
        let mut final_records = Vec::new();
        let mut any_ok = false;
        let mut any_error = false;
        for plan in grid_cells(&spec) {
            let key: CellKey = (
                plan.distribution.kind.label().to_string(),
                plan.n,
                plan.distribution.p,
                plan.method_label().to_string(),
            );
            let records = match done.remove(&key) {
                Some(cached) => cached,
                None => {
                    let records = run_plan(&plan, &spec);
                    let file = match appender.as_mut() {
                        Some(f) => f,
                        None => {
                            let f = OpenOptions::new()
                                .create(true)
                                .append(true)
                                .open(&args.output)?;
                            appender.insert(f)
                        }
                    };
                    for record in &records {
                        let line = serde_json::to_string(record).expect("record serializes");
                        writeln!(file, "{line}")?;
                    }
                    file.flush()?;
                    records
                }
            };
            for record in &records {
                match record.status {
                    RecordStatus::Error => any_error = true,
                    _ => any_ok = true,
                }
                if record.status == RecordStatus::Error {
                    eprintln!(
                        "cell failed: {} n={} p={} method={}: {}",
                        record.distribution,
                        record.n,
                        record.p,
                        record.method,
                        record.error.as_deref().unwrap_or("unknown")
                    );
                }
            }
            final_records.extend(records);
        }

        write_summary(&summary_path, &final_records)?;
        if any_error && !any_ok {
            return Err(Error::AllCellsFailed);
        }
        Ok(())
    };

    match args.parallelism {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            pool.install(run)
        }
        None => run(),
    }
}

fn write_summary(path: &Path, records: &[SimulationRecord]) -> Result<()> {
    let mut out = String::from("distribution,n,p,method,statistic,re,replications\n");
    for record in records {
        let re = record.relative_error.map(format_float).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{re},{}\n",
            record.distribution,
            record.n,
            record.p,
            record.method,
            record.statistic,
            record.replications
        ));
    }
    write_atomic(path, out.as_bytes())
}

#[derive(Serialize)]
struct PrivacyJsonReport {
    delta: f64,
    records: usize,
    mean_distance: f64,
    match_proportion: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_row_minima: Option<Vec<f64>>,
}

fn cmd_privacy(args: PrivacyArgs) -> Result<()> {
    eprintln!(
        "privacy: original={} anonymized={} delta={} per-row={}",
        args.original.display(),
        args.anonymized.display(),
        format_float(args.delta),
        args.per_row
    );
    let original = read_csv(&args.original)?;
    let anonymized = read_csv(&args.anonymized)?;
    let report = privacy_report(&anonymized, &original, args.delta)?;
    let json = PrivacyJsonReport {
        delta: report.delta,
        records: report.min_distances.len(),
        mean_distance: report.mean_distance,
        match_proportion: report.match_proportion,
        per_row_minima: args.per_row.then_some(report.min_distances),
    };
    let mut text = serde_json::to_string_pretty(&json).expect("report serializes");
    text.push('\n');
    match &args.output {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}
