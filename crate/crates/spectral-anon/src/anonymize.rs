//! The anonymization core: fit a spectral model (column means plus thin
//! SVD of the centered data) and rebuild the table after perturbing the
//! left singular vectors column by column.
//!
//! Permuting rows of a column, flipping its signs, or rotating it are
//! all isometries, so each perturbed column keeps unit norm and the
//! moment structure of the output stays close to the original.

use nalgebra::{DMatrix, DVector};

use crate::data::DataMatrix;
use crate::error::Result;
use crate::linalg;
use crate::sampling::{
    haar_orthogonal, random_permutation, random_signs, uniform_sphere, Permutation, RngStream,
    SignVector,
};

/// How the orthogonal variant draws its per-column transformation.
///
/// `Fast` draws the perturbed column directly as a uniform direction on
/// the sphere; `Literal` materializes an n×n Haar orthogonal matrix and
/// applies it. The two are distributionally identical (a Haar rotation
/// of any fixed unit vector is uniform on the sphere) but the literal
/// path costs O(n³) per column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrthogonalMode {
    #[default]
    Fast,
    Literal,
}

/// Anonymization variant selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Permute each left singular vector independently.
    Permutation,
    /// Flip signs of each left singular vector entrywise.
    SignFlip,
    /// Rotate each left singular vector by an independent Haar draw.
    Orthogonal(OrthogonalMode),
}

impl Method {
    /// Short label used in CLI flags, records, and file output.
    pub fn label(&self) -> &'static str {
        match self {
            Method::Permutation => "p",
            Method::SignFlip => "j",
            Method::Orthogonal(_) => "o",
        }
    }
}

/// Column means plus thin SVD factors of the centered data.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    mean: DVector<f64>,
    left_vectors: DMatrix<f64>,
    singular_values: DVector<f64>,
    right_vectors: DMatrix<f64>,
    column_names: Option<Vec<String>>,
}

impl SpectralModel {
    pub fn nrows(&self) -> usize {
        self.left_vectors.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.left_vectors.ncols()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// U: n×p orthonormal columns, each summing to zero.
    pub fn left_vectors(&self) -> &DMatrix<f64> {
        &self.left_vectors
    }

    /// Descending, non-negative.
    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular_values
    }

    /// V: p×p orthonormal columns.
    pub fn right_vectors(&self) -> &DMatrix<f64> {
        &self.right_vectors
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    /// U·D·V' + 1·mean', the exact reconstruction of the source data.
    pub fn reconstruct(&self) -> DataMatrix {
        self.rebuild_from(&self.left_vectors)
    }

    fn rebuild_from(&self, left: &DMatrix<f64>) -> DataMatrix {
        let mut values =
            left * DMatrix::from_diagonal(&self.singular_values) * self.right_vectors.transpose();
        for j in 0..values.ncols() {
            values.column_mut(j).add_scalar_mut(self.mean[j]);
        }
        DataMatrix::with_names(values, self.column_names.clone())
            .expect("reconstruction of finite factors is finite")
    }
}

/// Fit the spectral model of a dataset: column means and the thin SVD
/// of the centered values. Requires n ≥ p + 1.
pub fn fit_spectral(x: &DataMatrix) -> Result<SpectralModel> {
    let (centered, mean) = linalg::center(x.values());
    let svd = linalg::thin_svd(&centered)?;
    Ok(SpectralModel {
        mean,
        left_vectors: svd.u,
        singular_values: svd.singular_values,
        right_vectors: svd.v,
        column_names: x.column_names().map(|n| n.to_vec()),
    })
}

/// One column's perturbation; fresh independent draws are used per
/// column, and tests inject fixed transformations through this type.
#[derive(Debug, Clone)]
pub(crate) enum ColumnPerturbation {
    Permute(Permutation),
    Flip(SignVector),
    Rotate(DMatrix<f64>),
    /// Replace the column by a given unit direction (the fast orthogonal
    /// path).
    Direction(DVector<f64>),
}

impl ColumnPerturbation {
    fn apply(&self, column: &DVector<f64>) -> DVector<f64> {
        match self {
            ColumnPerturbation::Permute(perm) => perm.apply(column),
            ColumnPerturbation::Flip(signs) => signs.apply(column),
            ColumnPerturbation::Rotate(q) => q * column,
            ColumnPerturbation::Direction(dir) => dir.clone(),
        }
    }
}

/// Perturbed left singular vectors U₀, one independent transformation
/// per column. Columns whose singular value is zero are perturbed too;
/// their contribution to the product is zero either way.
pub(crate) fn perturb_left_vectors(
    model: &SpectralModel,
    perturbations: &[ColumnPerturbation],
) -> DMatrix<f64> {
    assert_eq!(
        perturbations.len(),
        model.ncols(),
        "one perturbation per column"
    );
    let mut left = DMatrix::zeros(model.nrows(), model.ncols());
    for (k, perturbation) in perturbations.iter().enumerate() {
        let column = model.left_vectors.column(k).into_owned();
        left.column_mut(k).copy_from(&perturbation.apply(&column));
    }
    left
}

pub(crate) fn draw_perturbations(
    model: &SpectralModel,
    method: Method,
    rng: &mut RngStream,
) -> Vec<ColumnPerturbation> {
    let n = model.nrows();
    (0..model.ncols())
        .map(|_| match method {
            Method::Permutation => ColumnPerturbation::Permute(random_permutation(n, rng)),
            Method::SignFlip => ColumnPerturbation::Flip(random_signs(n, rng)),
            Method::Orthogonal(OrthogonalMode::Literal) => {
                ColumnPerturbation::Rotate(haar_orthogonal(n, rng))
            }
            Method::Orthogonal(OrthogonalMode::Fast) => {
                ColumnPerturbation::Direction(uniform_sphere(n, rng))
            }
        })
        .collect()
}

/// Anonymize a fitted model: U₀·D·V' + 1·mean' with a fresh independent
/// transformation for each column of U. Output has the same shape and
/// column names as the source data.
pub fn anonymize(model: &SpectralModel, method: Method, rng: &mut RngStream) -> DataMatrix {
    let perturbations = draw_perturbations(model, method, rng);
    model.rebuild_from(&perturb_left_vectors(model, &perturbations))
}

/// Convenience composition: fit the spectral model, then anonymize.
pub fn anonymize_data(x: &DataMatrix, method: Method, rng: &mut RngStream) -> Result<DataMatrix> {
    let model = fit_spectral(x)?;
    Ok(anonymize(&model, method, rng))
}
