//! Deterministic dense-matrix utilities used by the closed-form limit
//! calculators and the anonymization core.
//!
//! Conventions fixed here and relied on everywhere else:
//! - eigenvalues and singular values are sorted descending;
//! - each eigenvector / right singular vector has its largest-magnitude
//!   entry positive (ties broken by lowest index);
//! - `vec` stacks columns, so entry (r, c) of a p-row matrix lands at
//!   position r + p·c (0-based).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Absolute symmetry tolerance for inputs that must be symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvalues of a PSD input may undershoot zero by at most this much
/// before the input is rejected; anything in (-EIGENVALUE_FLOOR, 0) is
/// clamped to zero.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Column-wise vectorization: stacks the columns of `m` top to bottom.
pub fn vectorize(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Kronecker product A ⊗ B.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// The (p, q)-commutation matrix: the unique 0/1 matrix K of dimension
/// pq satisfying K·vec(A) = vec(A') for every p×q matrix A.
pub fn commutation_matrix(p: usize, q: usize) -> DMatrix<f64> {
    let dim = p * q;
    let mut k = DMatrix::zeros(dim, dim);
    for i in 0..p {
        for j in 0..q {
            // vec(A) puts (i, j) at i + p*j; vec(A') puts it at j + q*i.
            k[(j + q * i, i + p * j)] = 1.0;
        }
    }
    k
}

/// diag{vec(I_p)}: the p²-dimensional diagonal selector of the positions
/// vec assigns to the diagonal of a p×p matrix.
pub fn vp_matrix(p: usize) -> DMatrix<f64> {
    let mut v = DMatrix::zeros(p * p, p * p);
    for k in 0..p {
        let idx = k + p * k;
        v[(idx, idx)] = 1.0;
    }
    v
}

/// Frobenius norm.
pub fn frobenius_norm(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

/// Symmetric eigendecomposition with eigenvalues sorted descending and
/// the sign of each eigenvector fixed (largest-magnitude entry positive).
///
/// Returns (eigenvalues, eigenvectors); column k of the eigenvector
/// matrix pairs with eigenvalue k.
pub fn sym_eigen_sorted(sigma: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_symmetric(sigma)?;
    let eig = sigma.clone().symmetric_eigen();
    let p = sigma.nrows();

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues of a finite symmetric matrix are finite")
            .then(a.cmp(&b))
    });

    let mut values = DVector::zeros(p);
    let mut vectors = DMatrix::zeros(p, p);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = eig.eigenvalues[src];
        let sign = dominant_sign(&eig.eigenvectors.column(src).into_owned());
        vectors
            .column_mut(dst)
            .copy_from(&(eig.eigenvectors.column(src) * sign));
    }
    Ok((values, vectors))
}

/// The non-symmetric matrix square root A = O·Λ^{1/2} from the
/// eigendecomposition Σ = OΛO' (descending eigenvalues, fixed signs).
///
/// A·A' = Σ, but A is not itself symmetric unless Σ is diagonal. The
/// eigenpair ordering matters downstream: the diagonal-selector term of
/// the covariance limit depends on which root is used, so this
/// convention is load-bearing, not cosmetic.
pub fn eig_sqrt(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (values, mut vectors) = sym_eigen_sorted(sigma)?;
    for k in 0..values.len() {
        let lambda = values[k];
        if lambda < -EIGENVALUE_FLOOR {
            return Err(Error::NegativeEigenvalue { value: lambda });
        }
        let scale = lambda.max(0.0).sqrt();
        vectors.column_mut(k).scale_mut(scale);
    }
    Ok(vectors)
}

/// Subtracts column means. Returns the centered matrix and the mean
/// vector; the n×n centering matrix is never materialized.
pub fn center(x: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let n = x.nrows();
    let p = x.ncols();
    let mut mean = DVector::zeros(p);
    for j in 0..p {
        mean[j] = x.column(j).sum() / n as f64;
    }
    let mut centered = x.clone();
    for j in 0..p {
        centered.column_mut(j).add_scalar_mut(-mean[j]);
    }
    (centered, mean)
}

/// Thin singular value decomposition of a centered n×p matrix (n ≥ p + 1).
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// n×p, orthonormal columns.
    pub u: DMatrix<f64>,
    /// Length p, descending, non-negative.
    pub singular_values: DVector<f64>,
    /// p×p, orthonormal columns (right singular vectors as columns).
    pub v: DMatrix<f64>,
}

/// Thin SVD Xc = U·diag(D)·V' with the crate's ordering and sign
/// conventions. Requires n ≥ p + 1 so centered data can reach rank p;
/// rank deficiency (zero singular values) is permitted and propagated.
pub fn thin_svd(xc: &DMatrix<f64>) -> Result<ThinSvd> {
    let n = xc.nrows();
    let p = xc.ncols();
    if n <= p {
        return Err(Error::TooFewRows {
            rows: n,
            cols: p,
            needed: p + 1,
        });
    }

    let svd = xc.clone().svd(true, true);
    let u_raw = svd.u.expect("u requested");
    let vt_raw = svd.v_t.expect("v_t requested");

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("singular values are finite")
            .then(a.cmp(&b))
    });

    let mut u = DMatrix::zeros(n, p);
    let mut d = DVector::zeros(p);
    let mut v = DMatrix::zeros(p, p);
    for (dst, &src) in order.iter().enumerate() {
        d[dst] = svd.singular_values[src];
        let v_col = vt_raw.row(src).transpose();
        let sign = dominant_sign(&v_col);
        v.column_mut(dst).copy_from(&(v_col * sign));
        u.column_mut(dst).copy_from(&(u_raw.column(src) * sign));
    }
    Ok(ThinSvd {
        u,
        singular_values: d,
        v,
    })
}

/// Sign that makes the largest-magnitude entry of `v` positive, ties
/// broken by lowest index. A zero vector gets +1.
fn dominant_sign(v: &DVector<f64>) -> f64 {
    let mut best = 0usize;
    let mut best_abs = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if v[best] < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            left: format!("{} rows", m.nrows()),
            right: format!("{} columns", m.ncols()),
        });
    }
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let deviation = (m[(i, j)] - m[(j, i)]).abs();
            if deviation > SYMMETRY_TOL {
                return Err(Error::NotSymmetric {
                    row: i,
                    col: j,
                    deviation,
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn vectorize_stacks_columns() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(vectorize(&a).as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        let i2 = DMatrix::<f64>::identity(2, 2);
        assert_eq!(vectorize(&i2).as_slice(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn commutation_carries_vec_to_transposed_vec() {
        // 3×2 with distinct entries; compare K·vec(A) to vec(A') element
        // by element.
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        let k = commutation_matrix(3, 2);
        let lhs = &k * vectorize(&a);
        let rhs = vectorize(&a.transpose());
        for idx in 0..6 {
            assert_eq!(lhs[idx], rhs[idx], "position {idx}");
        }
    }

    #[test]
    fn commutation_2_2_pattern() {
        let k = commutation_matrix(2, 2);
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        );
        assert_eq!(k, expected);
    }

    #[test]
    fn commutation_1_q_is_identity() {
        assert_eq!(commutation_matrix(1, 5), DMatrix::identity(5, 5));
    }

    #[test]
    fn commutation_inverse_pair() {
        let prod = commutation_matrix(3, 2) * commutation_matrix(2, 3);
        assert_eq!(prod, DMatrix::identity(6, 6));
    }

    #[test]
    fn kron_identities() {
        let i2 = DMatrix::<f64>::identity(2, 2);
        assert_eq!(kron(&i2, &i2), DMatrix::identity(4, 4));

        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]));
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![5.0, 7.0]));
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![10.0, 14.0, 15.0, 21.0]));
        assert_eq!(kron(&a, &b), expected);
    }

    #[test]
    fn kron_mixed_product() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = DMatrix::from_row_slice(2, 2, &[0.5, -1.0, 2.0, 1.5]);
        let c = DMatrix::from_row_slice(2, 2, &[-2.0, 1.0, 0.0, 3.0]);
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 2.0]);
        let lhs = kron(&a, &b) * kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn vp_matrix_examples() {
        let v2 = vp_matrix(2);
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0]));
        assert_eq!(v2, expected);
        assert_eq!(vp_matrix(1), DMatrix::from_element(1, 1, 1.0));
        assert_eq!(vp_matrix(5).trace(), 5.0);
    }

    #[test]
    fn eig_sqrt_identity_and_diagonal() {
        let i3 = DMatrix::<f64>::identity(3, 3);
        assert!(max_abs_diff(&eig_sqrt(&i3).unwrap(), &i3) < 1e-12);

        let sigma = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]));
        let root = eig_sqrt(&sigma).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        assert!(max_abs_diff(&root, &expected) < 1e-12);
    }

    #[test]
    fn eig_sqrt_reconstructs_random_psd() {
        // Σ built as BB' from a fixed arbitrary B.
        let b = DMatrix::from_row_slice(
            3,
            3,
            &[0.7, -1.2, 0.3, 1.5, 0.4, -0.8, -0.5, 0.9, 1.1],
        );
        let sigma = &b * b.transpose();
        let root = eig_sqrt(&sigma).unwrap();
        let rebuilt = &root * root.transpose();
        let rel = frobenius_norm(&(&rebuilt - &sigma)) / frobenius_norm(&sigma);
        assert!(rel < 1e-10, "relative reconstruction error {rel:e}");
    }

    #[test]
    fn eig_sqrt_rejects_bad_inputs() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(eig_sqrt(&asym), Err(Error::NotSymmetric { .. })));

        let indefinite = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.5]));
        assert!(matches!(
            eig_sqrt(&indefinite),
            Err(Error::NegativeEigenvalue { .. })
        ));
    }

    #[test]
    fn center_examples() {
        let x = DMatrix::from_row_slice(2, 1, &[1.0, 3.0]);
        let (centered, mean) = center(&x);
        assert_eq!(centered.as_slice(), &[-1.0, 1.0]);
        assert_eq!(mean[0], 2.0);

        // Already centered input is unchanged.
        let z = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, -1.0, 2.0]);
        let (zc, zmean) = center(&z);
        assert_eq!(zc, z);
        assert_eq!(zmean.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn center_zeroes_column_sums() {
        let x = DMatrix::from_fn(50, 4, |i, j| ((i * 31 + j * 17) % 23) as f64 * 0.37 + j as f64);
        let (centered, _) = center(&x);
        let bound = 1e-10 * 50.0 * x.abs().max();
        for j in 0..4 {
            assert!(centered.column(j).sum().abs() < bound);
        }
    }

    #[test]
    fn thin_svd_singular_values_match_gram_eigenvalues() {
        // Xc'Xc = [[8, 2], [2, 2]] has eigenvalues 5 ± √13.
        let xc = DMatrix::from_row_slice(3, 2, &[2.0, 0.0, 0.0, 1.0, -2.0, -1.0]);
        let svd = thin_svd(&xc).unwrap();
        let hi = (5.0 + 13.0f64.sqrt()).sqrt();
        let lo = (5.0 - 13.0f64.sqrt()).sqrt();
        assert!((svd.singular_values[0] - hi).abs() < 1e-12);
        assert!((svd.singular_values[1] - lo).abs() < 1e-12);
    }

    #[test]
    fn thin_svd_reconstructs_and_is_orthonormal() {
        let raw = DMatrix::from_fn(30, 3, |i, j| {
            (((i * 7 + j * 13) % 19) as f64 - 9.0) * 0.21 + (j as f64) * 0.5
        });
        let (xc, _) = center(&raw);
        let svd = thin_svd(&xc).unwrap();

        let rebuilt =
            &svd.u * DMatrix::from_diagonal(&svd.singular_values) * svd.v.transpose();
        let rel = frobenius_norm(&(&rebuilt - &xc)) / frobenius_norm(&xc);
        assert!(rel < 1e-9, "reconstruction error {rel:e}");

        let utu = svd.u.transpose() * &svd.u;
        let vtv = svd.v.transpose() * &svd.v;
        assert!(frobenius_norm(&(&utu - DMatrix::identity(3, 3))) < 1e-10);
        assert!(frobenius_norm(&(&vtv - DMatrix::identity(3, 3))) < 1e-10);

        // Columns of U inherit zero sums from the centered input.
        for j in 0..3 {
            assert!(svd.u.column(j).sum().abs() < 1e-10);
        }

        // Sign convention: dominant entry of each V column is positive.
        for j in 0..3 {
            let col = svd.v.column(j).into_owned();
            let sign = super::dominant_sign(&col);
            assert_eq!(sign, 1.0, "column {j} violates the sign convention");
        }
    }

    #[test]
    fn thin_svd_requires_strictly_more_rows_than_columns() {
        let xc = DMatrix::zeros(3, 3);
        assert!(matches!(
            thin_svd(&xc),
            Err(Error::TooFewRows { needed: 4, .. })
        ));
    }

    #[test]
    fn thin_svd_propagates_rank_deficiency() {
        // Second column is a multiple of the first: one zero singular value.
        let base = DMatrix::from_fn(10, 1, |i, _| (i as f64) - 4.5);
        let mut xc = DMatrix::zeros(10, 2);
        xc.column_mut(0).copy_from(&base.column(0));
        xc.column_mut(1).copy_from(&(base.column(0) * 2.0));
        let svd = thin_svd(&xc).unwrap();
        assert!(svd.singular_values[1].abs() < 1e-10);
        let rebuilt =
            &svd.u * DMatrix::from_diagonal(&svd.singular_values) * svd.v.transpose();
        assert!(frobenius_norm(&(&rebuilt - &xc)) < 1e-9);
    }

    proptest! {
        #[test]
        fn commutation_property_random(p in 1usize..=6, q in 1usize..=6, seed in 0u64..1000) {
            let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
            };
            let a = DMatrix::from_fn(p, q, |_, _| next());
            let lhs = commutation_matrix(p, q) * vectorize(&a);
            let rhs = vectorize(&a.transpose());
            prop_assert!((lhs - rhs).abs().max() == 0.0);
        }

        #[test]
        fn eig_sqrt_property_random_psd(seed in 0u64..500) {
            let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(7);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            };
            let b = DMatrix::from_fn(4, 4, |_, _| next());
            let sigma = &b * b.transpose();
            let root = eig_sqrt(&sigma).unwrap();
            let rebuilt = &root * root.transpose();
            let denom = frobenius_norm(&sigma).max(1e-12);
            prop_assert!(frobenius_norm(&(rebuilt - sigma)) / denom < 1e-10);
        }

        #[test]
        fn center_svd_roundtrip(seed in 0u64..200) {
            let mut state = seed.wrapping_mul(0x2545F4914F6CDD1D).wrapping_add(3);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 10.0 - 5.0
            };
            let x = DMatrix::from_fn(12, 3, |_, _| next());
            let (xc, mean) = center(&x);
            let svd = thin_svd(&xc).unwrap();
            let mut rebuilt = &svd.u * DMatrix::from_diagonal(&svd.singular_values) * svd.v.transpose();
            for j in 0..3 {
                rebuilt.column_mut(j).add_scalar_mut(mean[j]);
            }
            let rel = frobenius_norm(&(&rebuilt - &x)) / frobenius_norm(&x);
            prop_assert!(rel < 1e-9);
        }
    }
}
