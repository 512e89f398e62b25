//! Dense numeric tables: one row per record, one column per variable.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A dense real n×p data table with optional column labels.
///
/// Invariants: n ≥ 1, p ≥ 1, every entry finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    column_names: Option<Vec<String>>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        Self::with_names(values, None)
    }

    pub fn with_names(values: DMatrix<f64>, column_names: Option<Vec<String>>) -> Result<Self> {
        if values.nrows() == 0 {
            return Err(Error::EmptyInput("data matrix has no rows"));
        }
        if values.ncols() == 0 {
            return Err(Error::EmptyInput("data matrix has no columns"));
        }
        check_finite(&values)?;
        if let Some(names) = &column_names {
            if names.len() != values.ncols() {
                return Err(Error::DimensionMismatch {
                    left: format!("{} column names", names.len()),
                    right: format!("{} columns", values.ncols()),
                });
            }
        }
        Ok(Self {
            values,
            column_names,
        })
    }

    /// Build from row-major slices; convenient in tests and examples.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("data matrix has no rows"));
        }
        let ncols = rows[0].len();
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch {
                left: format!("{ncols} columns in first row"),
                right: "ragged row".to_string(),
            });
        }
        let values = DMatrix::from_row_iterator(rows.len(), ncols, rows.iter().flat_map(|r| r.iter().copied()));
        Self::new(values)
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    /// Column labels, substituting `x1..xp` where none were recorded.
    pub fn column_names_or_default(&self) -> Vec<String> {
        match &self.column_names {
            Some(names) => names.clone(),
            None => (1..=self.ncols()).map(|k| format!("x{k}")).collect(),
        }
    }
}

pub(crate) fn check_finite(values: &DMatrix<f64>) -> Result<()> {
    for col in 0..values.ncols() {
        for row in 0..values.nrows() {
            if !values[(row, col)].is_finite() {
                return Err(Error::NonFiniteInput { row, col });
            }
        }
    }
    Ok(())
}
