//! Distance-based record linkage between an anonymized table and its
//! source: per-record minimum Euclidean distances, the exact-match
//! proportion under a small tolerance, and aggregation across many
//! simulated datasets.
//!
//! Distances are always computed on the raw, unstandardized scale —
//! published tables live on that scale and so would an adversary's
//! auxiliary data.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Match tolerance δ: a record counts as re-identified when its nearest
/// original record lies strictly closer than this.
pub const DEFAULT_MATCH_DELTA: f64 = 1e-6;

/// Linkage outcome for one (anonymized, original) dataset pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrivacyReport {
    /// Distance from each anonymized record to its nearest original
    /// record.
    pub min_distances: Vec<f64>,
    /// Average of `min_distances`.
    pub mean_distance: f64,
    /// Fraction of records with nearest distance strictly below delta.
    pub match_proportion: f64,
    pub delta: f64,
}

/// Entry i is the minimum Euclidean distance from anonymized row i to
/// any original row. Brute-force O(n²p) scan; the metric is the
/// contract, so any accelerator must reproduce these minima exactly.
pub fn linkage_distances(anon: &DataMatrix, orig: &DataMatrix) -> Result<Vec<f64>> {
    if anon.ncols() != orig.ncols() || anon.nrows() != orig.nrows() {
        return Err(Error::DimensionMismatch {
            left: format!("anonymized {}×{}", anon.nrows(), anon.ncols()),
            right: format!("original {}×{}", orig.nrows(), orig.ncols()),
        });
    }
    let a = anon.values();
    let o = orig.values();
    let p = a.ncols();
    let distances: Vec<f64> = (0..a.nrows())
        .into_par_iter()
        .map(|i| {
            let mut best = f64::INFINITY;
            for j in 0..o.nrows() {
                let mut dist_sq = 0.0;
                for k in 0..p {
                    let d = a[(i, k)] - o[(j, k)];
                    dist_sq += d * d;
                }
                if dist_sq < best {
                    best = dist_sq;
                }
            }
            best.sqrt()
        })
        .collect();
    Ok(distances)
}

/// Full linkage evaluation at tolerance `delta` (strict `< delta`
/// comparison).
pub fn privacy_report(anon: &DataMatrix, orig: &DataMatrix, delta: f64) -> Result<PrivacyReport> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let min_distances = linkage_distances(anon, orig)?;
    let n = min_distances.len() as f64;
    let mean_distance = min_distances.iter().sum::<f64>() / n;
    let matches = min_distances.iter().filter(|&&d| d < delta).count();
    Ok(PrivacyReport {
        match_proportion: matches as f64 / n,
        mean_distance,
        min_distances,
        delta,
    })
}

/// Histogram of per-dataset match proportions over [0, 1].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchHistogram {
    pub bin_width: f64,
    /// counts[b] covers [b·width, (b+1)·width); a proportion of exactly
    /// 1 lands in the last bin.
    pub counts: Vec<u64>,
}

impl MatchHistogram {
    pub fn bin_of(&self, proportion: f64) -> usize {
        let bin = (proportion / self.bin_width).floor() as usize;
        bin.min(self.counts.len() - 1)
    }
}

/// Mean minimum distance across datasets plus the match-proportion
/// histogram. Bin width defaults to 1/n of the first report.
pub fn aggregate_privacy(
    reports: &[PrivacyReport],
    bin_width: Option<f64>,
) -> Result<(f64, MatchHistogram)> {
    if reports.is_empty() {
        return Err(Error::EmptyInput("no privacy reports to aggregate"));
    }
    let width = match bin_width {
        Some(w) if w > 0.0 && w <= 1.0 => w,
        Some(w) => {
            return Err(Error::InvalidConfig(format!(
                "bin width must lie in (0, 1], got {w}"
            )))
        }
        None => 1.0 / reports[0].min_distances.len() as f64,
    };
    let bins = (1.0 / width).ceil() as usize;
    let mut histogram = MatchHistogram {
        bin_width: width,
        counts: vec![0; bins.max(1)],
    };
    let mut total = 0.0;
    for report in reports {
        total += report.mean_distance;
        let bin = histogram.bin_of(report.match_proportion);
        histogram.counts[bin] += 1;
    }
    Ok((total / reports.len() as f64, histogram))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[&[f64]]) -> DataMatrix {
        DataMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn identical_tables_match_completely() {
        let x = table(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let distances = linkage_distances(&x, &x).unwrap();
        assert!(distances.iter().all(|&d| d == 0.0));
        let report = privacy_report(&x, &x, DEFAULT_MATCH_DELTA).unwrap();
        assert_eq!(report.match_proportion, 1.0);
        assert_eq!(report.mean_distance, 0.0);
    }

    #[test]
    fn shifted_row_reports_its_shift() {
        let orig = table(&[&[0.0, 0.0], &[100.0, 100.0]]);
        let anon = table(&[&[0.3, 0.4], &[100.0, 100.0]]);
        let distances = linkage_distances(&anon, &orig).unwrap();
        assert!((distances[0] - 0.5).abs() < 1e-15);
        assert_eq!(distances[1], 0.0);
    }

    #[test]
    fn matches_brute_force_oracle() {
        let make = |offset: f64| {
            DataMatrix::new(nalgebra::DMatrix::from_fn(20, 3, |i, j| {
                (((i * 11 + j * 5 + 7) % 23) as f64) * 0.43 + offset * ((i + j) % 3) as f64
            }))
            .unwrap()
        };
        let orig = make(0.0);
        let anon = make(0.17);
        let distances = linkage_distances(&anon, &orig).unwrap();

        // Second, independent implementation: plain index loops over
        // explicit coordinate differences.
        for i in 0..20 {
            let mut best = f64::INFINITY;
            for j in 0..20 {
                let mut acc = 0.0;
                for k in 0..3 {
                    let d = anon.values()[(i, k)] - orig.values()[(j, k)];
                    acc += d * d;
                }
                best = best.min(acc.sqrt());
            }
            assert!((distances[i] - best).abs() < 1e-12, "row {i}");
        }
    }

    #[test]
    fn translation_leaves_distances_unchanged() {
        let orig = table(&[&[1.0, 2.0], &[3.0, -1.0], &[0.5, 0.0]]);
        let anon = table(&[&[1.1, 2.2], &[2.7, -0.9], &[0.0, 0.4]]);
        let base = linkage_distances(&anon, &orig).unwrap();

        let shift = [250.0, -97.5];
        let shifted = |m: &DataMatrix| {
            let mut v = m.values().clone();
            for j in 0..2 {
                v.column_mut(j).add_scalar_mut(shift[j]);
            }
            DataMatrix::new(v).unwrap()
        };
        let moved = linkage_distances(&shifted(&anon), &shifted(&orig)).unwrap();
        for (a, b) in base.iter().zip(&moved) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = table(&[&[1.0, 2.0]]);
        let b = table(&[&[1.0, 2.0, 3.0]]);
        assert!(matches!(
            linkage_distances(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
        let c = table(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!(matches!(
            linkage_distances(&a, &c),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn delta_must_be_positive() {
        let x = table(&[&[1.0]]);
        assert!(privacy_report(&x, &x, 0.0).is_err());
        assert!(privacy_report(&x, &x, -1.0).is_err());
    }

    #[test]
    fn matching_is_strict() {
        let orig = table(&[&[0.0]]);
        let anon = table(&[&[1e-6]]);
        // Distance equals delta exactly: strict comparison, no match.
        let report = privacy_report(&anon, &orig, 1e-6).unwrap();
        assert_eq!(report.match_proportion, 0.0);
    }

    #[test]
    fn aggregation_examples() {
        let r = |mean: f64, prop: f64, n: usize| PrivacyReport {
            min_distances: vec![mean; n],
            mean_distance: mean,
            match_proportion: prop,
            delta: DEFAULT_MATCH_DELTA,
        };
        let (single, _) = aggregate_privacy(&[r(2.5, 0.0, 4)], None).unwrap();
        assert_eq!(single, 2.5);

        let (two, _) = aggregate_privacy(&[r(1.0, 0.0, 4), r(3.0, 0.0, 4)], None).unwrap();
        assert_eq!(two, 2.0);

        let all_zero: Vec<PrivacyReport> = (0..50).map(|_| r(0.7, 0.0, 10)).collect();
        let (_, histogram) = aggregate_privacy(&all_zero, None).unwrap();
        assert_eq!(histogram.counts[0], 50);
        assert!(histogram.counts[1..].iter().all(|&c| c == 0));

        // Proportion 1.0 clamps into the last bin.
        let full: Vec<PrivacyReport> = vec![r(0.0, 1.0, 10)];
        let (_, histogram) = aggregate_privacy(&full, Some(0.25)).unwrap();
        assert_eq!(*histogram.counts.last().unwrap(), 1);

        assert!(matches!(
            aggregate_privacy(&[], None),
            Err(Error::EmptyInput(_))
        ));
    }
}
