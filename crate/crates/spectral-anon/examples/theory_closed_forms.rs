//! Closed-form limiting covariances of the scaled sample mean and
//! sample covariance, and the efficiency cost of anonymization.
//!
//!     cargo run --example theory_closed_forms

use nalgebra::{DMatrix, DVector};
use spectral_anon::asymptotics::{
    assumption_gap, cov_limit_cov, efficiency_ratio, mean_limit_cov, Estimator, GaussianSpec,
};

fn print_matrix(title: &str, m: &DMatrix<f64>) {
    println!("{title}");
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:6.2}", m[(i, j)])).collect();
        println!("  [{}]", row.join(" "));
    }
}

fn main() {
    let spec = GaussianSpec::diagonal(
        DVector::from_element(2, 3.0),
        DVector::from_vec(vec![2.0, 1.0]),
    )
    .unwrap();

    println!("population covariance diag(2, 1)");
    println!(
        "eigenvalue gap diagnostic: {}\n",
        assumption_gap(spec.covariance()).unwrap()
    );

    for estimator in [Estimator::Original, Estimator::SignFlip] {
        let mean_limit = mean_limit_cov(&spec, estimator);
        print_matrix(
            &format!("mean-statistic limit, {} estimator:", estimator.label()),
            &mean_limit.matrix,
        );
    }
    println!();

    for estimator in [Estimator::Original, Estimator::Permutation] {
        let cov_limit = cov_limit_cov(&spec, estimator).unwrap();
        print_matrix(
            &format!("covariance-statistic limit, {} estimator:", estimator.label()),
            &cov_limit.matrix,
        );
    }
    println!();

    let ratio = efficiency_ratio(&spec).unwrap();
    print_matrix("entrywise ratio anonymized / original:", &ratio);
    println!();
    println!("Variance entries cost nothing (ratio 1); cross-covariance entries");
    println!("are estimated with half the efficiency (ratio 2) after anonymization.");

    // Repeated eigenvalues are refused for anonymized estimators.
    let identity = GaussianSpec::new(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
    match cov_limit_cov(&identity, Estimator::Permutation) {
        Err(err) => println!("\nidentity covariance: {err}"),
        Ok(_) => unreachable!("repeated eigenvalues must be refused"),
    }
}
