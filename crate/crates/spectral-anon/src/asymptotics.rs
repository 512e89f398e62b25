//! Closed-form limiting covariance matrices of the scaled sample mean
//! and sample covariance, for original data and for the three
//! anonymization variants, under Gaussian sampling.
//!
//! Index convention for p²-dimensional objects: vec is column-major, so
//! the (r, c) entry of a p×p matrix sits at position r + p·c (0-based).

use nalgebra::{DMatrix, DVector};

use crate::anonymize::Method;
use crate::error::{Error, Result};
use crate::linalg::{commutation_matrix, kron, sym_eigen_sorted, vp_matrix};

/// Relative eigenvalue-gap threshold below which the covariance limit
/// for anonymized estimators is refused: past this point the closed
/// form no longer describes the empirical limit.
pub const ASSUMPTION_GAP_TOL: f64 = 1e-8;

/// Which estimator a limit refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Original,
    Permutation,
    SignFlip,
    Orthogonal,
}

impl Estimator {
    pub fn label(&self) -> &'static str {
        match self {
            Estimator::Original => "original",
            Estimator::Permutation => "p",
            Estimator::SignFlip => "j",
            Estimator::Orthogonal => "o",
        }
    }

    pub fn is_anonymized(&self) -> bool {
        !matches!(self, Estimator::Original)
    }
}

impl From<Method> for Estimator {
    fn from(method: Method) -> Self {
        match method {
            Method::Permutation => Estimator::Permutation,
            Method::SignFlip => Estimator::SignFlip,
            Method::Orthogonal(_) => Estimator::Orthogonal,
        }
    }
}

/// Which statistic the limit describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Mean,
    Covariance,
}

impl Statistic {
    pub fn label(&self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Covariance => "covariance",
        }
    }
}

/// A Gaussian population: mean vector and positive-definite covariance.
#[derive(Debug, Clone)]
pub struct GaussianSpec {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianSpec {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        if mean.len() != covariance.nrows() {
            return Err(Error::DimensionMismatch {
                left: format!("mean of length {}", mean.len()),
                right: format!("{}×{} covariance", covariance.nrows(), covariance.ncols()),
            });
        }
        let (eigenvalues, _) = sym_eigen_sorted(&covariance)?;
        let smallest = eigenvalues[eigenvalues.len() - 1];
        if smallest <= 0.0 {
            return Err(Error::NegativeEigenvalue { value: smallest });
        }
        Ok(Self { mean, covariance })
    }

    /// Independent coordinates: covariance diag(variances).
    pub fn diagonal(mean: DVector<f64>, variances: DVector<f64>) -> Result<Self> {
        let covariance = DMatrix::from_diagonal(&variances);
        Self::new(mean, covariance)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }
}

/// A limiting covariance matrix: p×p for the mean statistic, p²×p² for
/// the vectorized covariance statistic.
#[derive(Debug, Clone)]
pub struct LimitCov {
    pub statistic: Statistic,
    pub estimator: Estimator,
    pub matrix: DMatrix<f64>,
}

/// Limiting covariance of √n(x̄ − μ): Σ for the original data and the
/// permutation variant (whose sample mean is identical to the
/// original's), 2Σ for the sign-flip and orthogonal variants.
pub fn mean_limit_cov(spec: &GaussianSpec, estimator: Estimator) -> LimitCov {
    let matrix = match estimator {
        Estimator::Original | Estimator::Permutation => spec.covariance.clone(),
        Estimator::SignFlip | Estimator::Orthogonal => &spec.covariance * 2.0,
    };
    LimitCov {
        statistic: Statistic::Mean,
        estimator,
        matrix,
    }
}

/// Relative spacing of the covariance spectrum: the minimum over
/// adjacent descending eigenvalue pairs of (λ_k − λ_{k+1})/λ_1.
/// Zero signals repeated eigenvalues; a 1×1 input returns +∞ (nothing
/// to collide). Input must be symmetric PSD.
pub fn assumption_gap(sigma: &DMatrix<f64>) -> Result<f64> {
    let (eigenvalues, _) = sym_eigen_sorted(sigma)?;
    let p = eigenvalues.len();
    if p < 2 {
        return Ok(f64::INFINITY);
    }
    let top = eigenvalues[0];
    if top <= 0.0 {
        return Ok(0.0);
    }
    let mut gap = f64::INFINITY;
    for k in 0..p - 1 {
        gap = gap.min((eigenvalues[k] - eigenvalues[k + 1]) / top);
    }
    Ok(gap)
}

/// Limiting covariance of √n·vec(S − Σ).
///
/// For anonymized estimators the closed form is only valid when the
/// eigenvalues of Σ are distinct; below [`ASSUMPTION_GAP_TOL`] this
/// refuses with `AssumptionViolated` instead of returning a matrix that
/// does not describe the empirical limit. All three anonymization
/// variants share one limit.
pub fn cov_limit_cov(spec: &GaussianSpec, estimator: Estimator) -> Result<LimitCov> {
    if estimator.is_anonymized() {
        let gap = assumption_gap(&spec.covariance)?;
        if gap <= ASSUMPTION_GAP_TOL {
            return Err(Error::AssumptionViolated {
                gap,
                tolerance: ASSUMPTION_GAP_TOL,
            });
        }
    }
    Ok(cov_limit_cov_unchecked(spec, estimator))
}

/// The covariance-limit formula evaluated regardless of the eigenvalue
/// gap. Used to study how the empirical limit departs from the formula
/// exactly when the distinct-eigenvalue condition fails; prefer
/// [`cov_limit_cov`] everywhere else.
pub fn cov_limit_cov_unchecked(spec: &GaussianSpec, estimator: Estimator) -> LimitCov {
    let matrix = cov_limit_matrix(&spec.covariance, estimator);
    LimitCov {
        statistic: Statistic::Covariance,
        estimator,
        matrix,
    }
}

/// Sandwich (Σ^{1/2}⊗Σ^{1/2})·inner·(Σ^{1/2}⊗Σ^{1/2})' evaluated in the
/// algebraically reduced form
///
///   original:   Σ⊗Σ + K·(Σ⊗Σ)
///   anonymized: 2(Σ⊗Σ) + 2K·(Σ⊗Σ) − 2·Σ_k λ_k²·(o_k⊗o_k)(o_k⊗o_k)'
///
/// which uses K(A⊗A) = (A⊗A)K and (A⊗A)(A⊗A)' = Σ⊗Σ for the root
/// A = OΛ^{1/2}. The diagonal-selector term depends on the eigenpairs
/// (o_k, λ_k) but not on their signs.
fn cov_limit_matrix(sigma: &DMatrix<f64>, estimator: Estimator) -> DMatrix<f64> {
    let p = sigma.nrows();
    let ss = kron(sigma, sigma);
    let k_ss = commutation_matrix(p, p) * &ss;
    match estimator {
        Estimator::Original => ss + k_ss,
        _ => {
            let (lambda, vectors) = sym_eigen_sorted(sigma)
                .expect("validated symmetric covariance");
            let mut m = (ss + k_ss) * 2.0;
            for k in 0..p {
                let o_k = vectors.column(k);
                // w = o_k ⊗ o_k = vec(o_k·o_k').
                let w = DVector::from_fn(p * p, |idx, _| o_k[idx / p] * o_k[idx % p]);
                m -= (&w * w.transpose()) * (2.0 * lambda[k] * lambda[k]);
            }
            m
        }
    }
}

/// Literal sandwich evaluation from an explicit root A with A·A' = Σ:
/// (A⊗A)·inner·(A⊗A)'. Retained as the second algebraic route for
/// cross-checking `cov_limit_matrix`.
#[allow(dead_code)]
pub(crate) fn cov_limit_from_root(root: &DMatrix<f64>, estimator: Estimator) -> DMatrix<f64> {
    let p = root.nrows();
    let rr = kron(root, root);
    let inner = match estimator {
        Estimator::Original => {
            DMatrix::identity(p * p, p * p) + commutation_matrix(p, p)
        }
        _ => {
            (DMatrix::identity(p * p, p * p) + commutation_matrix(p, p) - vp_matrix(p)) * 2.0
        }
    };
    &rr * inner * rr.transpose()
}

/// Entrywise ratio of the anonymized covariance limit to the original
/// one. On positions corresponding to eigenbasis variances the ratio is
/// 1 and on eigenbasis cross-covariance positions it is 2; positions
/// where the original limit vanishes are reported as zero.
pub fn efficiency_ratio(spec: &GaussianSpec) -> Result<DMatrix<f64>> {
    let anonymized = cov_limit_cov(spec, Estimator::Permutation)?.matrix;
    let original = cov_limit_cov(spec, Estimator::Original)?.matrix;
    let threshold = 1e-12 * original.abs().max().max(1e-300);
    let dim = original.nrows();
    let mut ratio = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        for r in 0..dim {
            if original[(r, c)].abs() > threshold {
                ratio[(r, c)] = anonymized[(r, c)] / original[(r, c)];
            }
        }
    }
    Ok(ratio)
}
