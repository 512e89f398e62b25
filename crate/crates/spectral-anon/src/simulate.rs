//! Data generators for the four benchmark distributions and the Monte
//! Carlo harness that measures how fast empirical covariances of the
//! scaled sample mean and sample covariance approach their closed-form
//! limits.
//!
//! Seeding: every replication owns two derived ChaCha streams under the
//! configured base seed — one for the data draw (shared by the original
//! and all anonymized cells of the same (distribution, n, p), so method
//! comparisons see identical datasets) and one for the anonymization
//! randomness. Replications run in parallel; the reduction is sequential
//! in replication order, so results are bit-reproducible at any thread
//! count.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anonymize::{anonymize, fit_spectral, Method, OrthogonalMode};
use crate::asymptotics::{cov_limit_cov_unchecked, mean_limit_cov, Estimator, GaussianSpec};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{eig_sqrt, vectorize};
use crate::sampling::RngStream;

/// Default sample-size cap above which the orthogonal variant is
/// skipped inside grids (its literal construction is O(n³); even the
/// fast path is capped to mirror result tables that omit large-n cells).
pub const DEFAULT_O_SA_N_CAP: usize = 400;

/// The four benchmark sampling distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    /// N_p(μ, diag(p, …, 1)) with μ = (3, …, 3): distinct eigenvalues.
    NormalDistinct,
    /// N_p(μ, I_p): repeated eigenvalues (violates the gap condition).
    NormalIdentity,
    /// Independent Poisson(p), …, Poisson(1) marginals.
    PoissonDistinct,
    /// Independent Poisson(1) marginals in every coordinate.
    PoissonFlat,
}

impl DistributionKind {
    pub fn label(&self) -> &'static str {
        match self {
            DistributionKind::NormalDistinct => "normal_distinct",
            DistributionKind::NormalIdentity => "normal_identity",
            DistributionKind::PoissonDistinct => "poisson_distinct",
            DistributionKind::PoissonFlat => "poisson_flat",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            DistributionKind::NormalDistinct => 0,
            DistributionKind::NormalIdentity => 1,
            DistributionKind::PoissonDistinct => 2,
            DistributionKind::PoissonFlat => 3,
        }
    }
}

/// A concrete sampling distribution: kind plus dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataDistribution {
    pub kind: DistributionKind,
    pub p: usize,
}

impl DataDistribution {
    pub fn new(kind: DistributionKind, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidConfig("dimension p must be ≥ 1".into()));
        }
        Ok(Self { kind, p })
    }

    pub fn true_mean(&self) -> DVector<f64> {
        match self.kind {
            DistributionKind::NormalDistinct | DistributionKind::NormalIdentity => {
                DVector::from_element(self.p, 3.0)
            }
            // Poisson mean equals its rate.
            DistributionKind::PoissonDistinct => self.rates(),
            DistributionKind::PoissonFlat => DVector::from_element(self.p, 1.0),
        }
    }

    pub fn true_covariance(&self) -> DMatrix<f64> {
        let variances = match self.kind {
            DistributionKind::NormalDistinct | DistributionKind::PoissonDistinct => self.rates(),
            DistributionKind::NormalIdentity | DistributionKind::PoissonFlat => {
                DVector::from_element(self.p, 1.0)
            }
        };
        DMatrix::from_diagonal(&variances)
    }

    /// (p, p−1, …, 1): the decreasing rate/variance profile.
    fn rates(&self) -> DVector<f64> {
        DVector::from_fn(self.p, |k, _| (self.p - k) as f64)
    }

    /// The Gaussian population with this distribution's true moments;
    /// limit formulas are always evaluated against it, which is exactly
    /// what makes the non-Gaussian cells informative.
    pub fn gaussian_analog(&self) -> GaussianSpec {
        GaussianSpec::new(self.true_mean(), self.true_covariance())
            .expect("benchmark covariances are diagonal positive-definite")
    }
}

/// Draw n i.i.d. rows. Gaussian rows are standard-normal vectors
/// transformed by the eigen square root of the target covariance plus
/// the mean; Poisson marginals are sampled independently per column.
pub fn generate(dist: &DataDistribution, n: usize, rng: &mut RngStream) -> DataMatrix {
    let p = dist.p;
    let values = match dist.kind {
        DistributionKind::NormalDistinct | DistributionKind::NormalIdentity => {
            let root = eig_sqrt(&dist.true_covariance())
                .expect("benchmark covariance is symmetric PSD");
            let mean = dist.true_mean();
            let mut values = DMatrix::zeros(n, p);
            let mut z = DVector::zeros(p);
            for i in 0..n {
                for k in 0..p {
                    z[k] = rng.sample(StandardNormal);
                }
                let row = &root * &z + &mean;
                for j in 0..p {
                    values[(i, j)] = row[j];
                }
            }
            values
        }
        DistributionKind::PoissonDistinct | DistributionKind::PoissonFlat => {
            let rates = match dist.kind {
                DistributionKind::PoissonDistinct => dist.rates(),
                _ => DVector::from_element(p, 1.0),
            };
            let samplers: Vec<Poisson<f64>> = rates
                .iter()
                .map(|&rate| Poisson::new(rate).expect("positive rate"))
                .collect();
            let mut values = DMatrix::zeros(n, p);
            for i in 0..n {
                for j in 0..p {
                    values[(i, j)] = rng.sample(samplers[j]);
                }
            }
            values
        }
    };
    DataMatrix::new(values).expect("generated rows are finite")
}

/// Column averages.
pub fn sample_mean(x: &DataMatrix) -> DVector<f64> {
    let n = x.nrows() as f64;
    DVector::from_fn(x.ncols(), |j, _| x.values().column(j).sum() / n)
}

/// Sample covariance with divisor n (the 1/n·X'HX normalization).
/// Output is exactly symmetric.
pub fn sample_cov(x: &DataMatrix) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::TooFewRows {
            rows: n,
            cols: x.ncols(),
            needed: 2,
        });
    }
    let (centered, _) = crate::linalg::center(x.values());
    let mut cov = centered.transpose() * &centered / n as f64;
    // Enforce exact symmetry against rounding in the product.
    for i in 0..cov.nrows() {
        for j in 0..i {
            let s = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = s;
            cov[(j, i)] = s;
        }
    }
    Ok(cov)
}

/// ‖empirical − target‖_F / ‖target‖_F.
pub fn relative_error(empirical: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<f64> {
    if empirical.shape() != target.shape() {
        return Err(Error::DimensionMismatch {
            left: format!("{}×{}", empirical.nrows(), empirical.ncols()),
            right: format!("{}×{}", target.nrows(), target.ncols()),
        });
    }
    let denom = target.norm();
    if denom == 0.0 {
        return Err(Error::ZeroTarget);
    }
    Ok((empirical - target).norm() / denom)
}

/// Empirical covariance of a set of replication vectors: sample-mean
/// centered, divisor M−1, accumulated in slice order so the result does
/// not depend on how the vectors were produced.
pub fn replication_covariance(samples: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    if samples.len() < 2 {
        return Err(Error::EmptyInput("need at least two replications"));
    }
    let m = samples.len();
    let dim = samples[0].len();
    let mut mean = DVector::zeros(dim);
    for s in samples {
        mean += s;
    }
    mean /= m as f64;
    let mut cov = DMatrix::zeros(dim, dim);
    for s in samples {
        let centered = s - &mean;
        cov += &centered * centered.transpose();
    }
    cov /= (m - 1) as f64;
    Ok(cov)
}

// Stream-id packing: [n:20][p:8][dist:4][role:4][replication:28].
// Role 0 is the data draw (shared by the original statistics and every
// anonymized cell over the same data), roles 1–3 are the per-method
// anonymization streams. SimulationSpec::validate enforces the field
// bounds.
const REP_BITS: u32 = 28;
const ROLE_SHIFT: u32 = REP_BITS;
const DIST_SHIFT: u32 = ROLE_SHIFT + 4;
const P_SHIFT: u32 = DIST_SHIFT + 4;
const N_SHIFT: u32 = P_SHIFT + 8;

pub(crate) fn stream_id(n: usize, p: usize, dist: DistributionKind, role: u64, rep: usize) -> u64 {
    ((n as u64) << N_SHIFT)
        | ((p as u64) << P_SHIFT)
        | (dist.tag() << DIST_SHIFT)
        | (role << ROLE_SHIFT)
        | rep as u64
}

fn method_role(method: Method) -> u64 {
    match method {
        Method::Permutation => 1,
        Method::SignFlip => 2,
        Method::Orthogonal(_) => 3,
    }
}

/// How one grid cell ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    Skipped,
    Error,
}

/// One (distribution, n, p, method, statistic) result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub distribution: String,
    pub n: usize,
    pub p: usize,
    /// "original", "p", "j" or "o".
    pub method: String,
    /// "mean" or "covariance".
    pub statistic: String,
    /// Absent when the cell was skipped or failed.
    pub relative_error: Option<f64>,
    pub replications: usize,
    pub elapsed_seconds: f64,
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SimulationRecord {
    /// Cell identity: everything except the statistic and the outcome.
    pub fn cell_key(&self) -> (String, usize, usize, String) {
        (
            self.distribution.clone(),
            self.n,
            self.p,
            self.method.clone(),
        )
    }
}

/// Grid definition consumed from a TOML config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub base_seed: u64,
    /// M: replications per cell.
    pub replications: usize,
    pub distributions: Vec<DistributionKind>,
    pub n_grid: Vec<usize>,
    pub p_grid: Vec<usize>,
    /// Anonymization methods to run next to the original-data baseline;
    /// may be empty. Entries are "p", "j" or "o".
    #[serde(default)]
    pub methods: Vec<MethodName>,
    #[serde(default = "default_o_cap")]
    pub o_sa_n_cap: usize,
}

fn default_o_cap() -> usize {
    DEFAULT_O_SA_N_CAP
}

/// Method name as written in configs; the harness always runs the
/// orthogonal variant through its fast path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MethodName {
    #[serde(rename = "p")]
    P,
    #[serde(rename = "j")]
    J,
    #[serde(rename = "o")]
    O,
}

impl MethodName {
    pub fn to_method(self) -> Method {
        match self {
            MethodName::P => Method::Permutation,
            MethodName::J => Method::SignFlip,
            MethodName::O => Method::Orthogonal(OrthogonalMode::Fast),
        }
    }
}

impl SimulationSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: SimulationSpec =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::InvalidConfig("replications must be ≥ 2".into()));
        }
        if self.replications >= 1 << REP_BITS {
            return Err(Error::InvalidConfig(format!(
                "replications must be < {}",
                1u64 << REP_BITS
            )));
        }
        if self.distributions.is_empty() {
            return Err(Error::InvalidConfig("distributions must be non-empty".into()));
        }
        if self.n_grid.is_empty() || self.p_grid.is_empty() {
            return Err(Error::InvalidConfig("n_grid and p_grid must be non-empty".into()));
        }
        if self.p_grid.iter().any(|&p| p == 0 || p >= 256) {
            return Err(Error::InvalidConfig("every p must satisfy 1 ≤ p < 256".into()));
        }
        if self.n_grid.iter().any(|&n| n >= 1 << 20) {
            return Err(Error::InvalidConfig("every n must be < 2^20".into()));
        }
        let max_p = *self.p_grid.iter().max().expect("non-empty");
        if self.n_grid.iter().any(|&n| n < max_p + 1) {
            return Err(Error::InvalidConfig(format!(
                "every n must be ≥ max(p) + 1 = {}",
                max_p + 1
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for m in &self.methods {
            if !seen.insert(*m) {
                return Err(Error::InvalidConfig("duplicate method in methods".into()));
            }
        }
        Ok(())
    }
}

/// One planned grid cell, in deterministic lexicographic order.
#[derive(Debug, Clone)]
pub struct CellPlan {
    pub distribution: DataDistribution,
    pub n: usize,
    /// `None` runs the original-data baseline.
    pub method: Option<Method>,
    /// True when the orthogonal cap excludes this cell; it still emits
    /// skip records so downstream tables show the gap.
    pub skipped: bool,
}

impl CellPlan {
    pub fn method_label(&self) -> &'static str {
        match self.method {
            None => "original",
            Some(m) => m.label(),
        }
    }
}

/// The full grid in output order: distributions × n × p × (original then
/// each configured method).
pub fn grid_cells(spec: &SimulationSpec) -> Vec<CellPlan> {
    let mut cells = Vec::new();
    for &kind in &spec.distributions {
        for &n in &spec.n_grid {
            for &p in &spec.p_grid {
                let distribution = DataDistribution { kind, p };
                cells.push(CellPlan {
                    distribution,
                    n,
                    method: None,
                    skipped: false,
                });
                for name in &spec.methods {
                    let method = name.to_method();
                    let skipped =
                        matches!(method, Method::Orthogonal(_)) && n > spec.o_sa_n_cap;
                    cells.push(CellPlan {
                        distribution,
                        n,
                        method: Some(method),
                        skipped,
                    });
                }
            }
        }
    }
    cells
}

/// Run one cell: M replications of draw → (optionally) anonymize →
/// scaled deviations of the sample mean and sample covariance from the
/// distribution's true parameters → empirical covariance across
/// replications → relative error against the matching closed form.
///
/// Returns the (mean, covariance) record pair.
pub fn run_cell(
    dist: &DataDistribution,
    n: usize,
    method: Option<Method>,
    replications: usize,
    base_seed: u64,
) -> Result<(SimulationRecord, SimulationRecord)> {
    let p = dist.p;
    if n < p + 1 {
        return Err(Error::TooFewRows {
            rows: n,
            cols: p,
            needed: p + 1,
        });
    }
    if replications < 2 {
        return Err(Error::InvalidConfig("replications must be ≥ 2".into()));
    }

    let started = Instant::now();
    let mu = dist.true_mean();
    let sigma = dist.true_covariance();
    let estimator = method.map_or(Estimator::Original, Estimator::from);
    let analog = dist.gaussian_analog();
    let mean_target = mean_limit_cov(&analog, estimator).matrix;
    // The formula is evaluated regardless of the eigenvalue gap: cells
    // with repeated eigenvalues are exactly the ones meant to show the
    // error staying bounded away from zero.
    let cov_target = cov_limit_cov_unchecked(&analog, estimator).matrix;

    let sqrt_n = (n as f64).sqrt();
    let stats: Vec<(DVector<f64>, DVector<f64>)> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut data_rng =
                RngStream::with_stream(base_seed, stream_id(n, p, dist.kind, 0, rep));
            let x = generate(dist, n, &mut data_rng);
            let data = match method {
                None => x,
                Some(m) => {
                    let mut anon_rng = RngStream::with_stream(
                        base_seed,
                        stream_id(n, p, dist.kind, method_role(m), rep),
                    );
                    let model = fit_spectral(&x).expect("n ≥ p + 1 checked above");
                    anonymize(&model, m, &mut anon_rng)
                }
            };
            let mean_stat = (sample_mean(&data) - &mu) * sqrt_n;
            let s = sample_cov(&data).expect("n ≥ 2");
            let cov_stat = vectorize(&(s - &sigma)) * sqrt_n;
            (mean_stat, cov_stat)
        })
        .collect();

    let mean_stats: Vec<DVector<f64>> = stats.iter().map(|(m, _)| m.clone()).collect();
    let cov_stats: Vec<DVector<f64>> = stats.iter().map(|(_, c)| c.clone()).collect();
    let mean_re = relative_error(&replication_covariance(&mean_stats)?, &mean_target)?;
    let cov_re = relative_error(&replication_covariance(&cov_stats)?, &cov_target)?;
    let elapsed = started.elapsed().as_secs_f64();

    let record = |statistic: &str, re: f64| SimulationRecord {
        distribution: dist.kind.label().to_string(),
        n,
        p,
        method: method.map_or("original", |m| m.label()).to_string(),
        statistic: statistic.to_string(),
        relative_error: Some(re),
        replications,
        elapsed_seconds: elapsed,
        status: RecordStatus::Ok,
        error: None,
    };
    Ok((record("mean", mean_re), record("covariance", cov_re)))
}

fn placeholder_record(
    plan: &CellPlan,
    statistic: &str,
    replications: usize,
    status: RecordStatus,
    error: Option<String>,
) -> SimulationRecord {
    SimulationRecord {
        distribution: plan.distribution.kind.label().to_string(),
        n: plan.n,
        p: plan.distribution.p,
        method: plan.method_label().to_string(),
        statistic: statistic.to_string(),
        relative_error: None,
        replications,
        elapsed_seconds: 0.0,
        status,
        error,
    }
}

/// Records for one planned cell: the computed pair, or skip/error
/// markers. Never panics on a failing cell.
pub fn run_plan(plan: &CellPlan, spec: &SimulationSpec) -> Vec<SimulationRecord> {
    if plan.skipped {
        return vec![
            placeholder_record(plan, "mean", spec.replications, RecordStatus::Skipped, None),
            placeholder_record(
                plan,
                "covariance",
                spec.replications,
                RecordStatus::Skipped,
                None,
            ),
        ];
    }
    match run_cell(
        &plan.distribution,
        plan.n,
        plan.method,
        spec.replications,
        spec.base_seed,
    ) {
        Ok((mean_record, cov_record)) => vec![mean_record, cov_record],
        Err(err) => {
            let message = err.to_string();
            vec![
                placeholder_record(
                    plan,
                    "mean",
                    spec.replications,
                    RecordStatus::Error,
                    Some(message.clone()),
                ),
                placeholder_record(
                    plan,
                    "covariance",
                    spec.replications,
                    RecordStatus::Error,
                    Some(message),
                ),
            ]
        }
    }
}

/// Run the whole grid; one record per (distribution, n, p, method,
/// statistic) in deterministic lexicographic order. Failing cells are
/// recorded with an error marker instead of aborting the grid.
pub fn run_grid(spec: &SimulationSpec) -> Result<Vec<SimulationRecord>> {
    spec.validate()?;
    let mut records = Vec::new();
    for plan in grid_cells(spec) {
        records.extend(run_plan(&plan, spec));
    }
    Ok(records)
}
