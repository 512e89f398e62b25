//! Helpers shared by the integration and acceptance suites.

#![allow(dead_code)]

/// Two-sample Kolmogorov–Smirnov statistic: the largest gap between the
/// two empirical CDFs.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let fa = i as f64 / a.len() as f64;
        let fb = j as f64 / b.len() as f64;
        d = d.max((fa - fb).abs());
    }
    d
}

/// Critical value of the two-sample KS statistic at significance 1%
/// for samples of sizes m and n (asymptotic formula, c(0.01) = 1.628).
pub fn ks_critical_1pct(m: usize, n: usize) -> f64 {
    1.628 * (((m + n) as f64) / ((m * n) as f64)).sqrt()
}

/// Unbiased sample variance (divisor len − 1).
pub fn variance(xs: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0)
}

/// Path of the compiled CLI binary.
pub fn bin_path() -> &'static str {
    env!("CARGO_BIN_EXE_spectral-anon")
}

/// Repo-level configs directory.
pub fn configs_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .canonicalize()
        .expect("configs directory exists")
}
