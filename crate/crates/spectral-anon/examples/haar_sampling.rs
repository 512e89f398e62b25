//! The transformation samplers behind the anonymizer: uniform
//! permutations, fair sign vectors, and Haar-uniform orthogonal
//! matrices with their O(n) sphere-sampling shortcut.
//!
//!     cargo run --example haar_sampling

use nalgebra::DMatrix;
use spectral_anon::sampling::{
    haar_orthogonal, random_permutation, random_signs, uniform_sphere, RngStream,
};

fn main() {
    let mut rng = RngStream::from_seed(99);

    let perm = random_permutation(8, &mut rng);
    println!("permutation of 8:   {:?}", perm.as_slice());
    let signs = random_signs(8, &mut rng);
    println!("sign vector:        {:?}", signs.as_slice());

    let n = 6;
    let q = haar_orthogonal(n, &mut rng);
    let residual = (q.transpose() * &q - DMatrix::<f64>::identity(n, n)).abs().max();
    println!("haar {n}×{n}:          ‖Q'Q − I‖_max = {residual:.2e}, det = {:+.6}", q.determinant());

    // Moment check: diagonal entries of Haar matrices have mean 0 and
    // second moment 1/n.
    let draws = 20_000;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut negative = 0u32;
    for _ in 0..draws {
        let q = haar_orthogonal(n, &mut rng);
        for i in 0..n {
            sum += q[(i, i)];
            sum_sq += q[(i, i)] * q[(i, i)];
        }
        if q.determinant() < 0.0 {
            negative += 1;
        }
    }
    let count = (draws * n) as f64;
    println!(
        "over {draws} draws:   E(Q_ii) = {:+.4}, E(Q_ii²) = {:.4} (1/n = {:.4}), det<0 share = {:.3}",
        sum / count,
        sum_sq / count,
        1.0 / n as f64,
        negative as f64 / draws as f64
    );

    // The shortcut: rotating a fixed unit vector by a Haar matrix is the
    // same as drawing a uniform sphere direction, at O(n) instead of
    // O(n³). Compare first-coordinate histograms.
    let dim = 12;
    let samples = 30_000;
    let mut rotated = Vec::with_capacity(samples);
    let mut direct = Vec::with_capacity(samples);
    let fixed = nalgebra::DVector::from_fn(dim, |i, _| if i == 0 { 1.0 } else { 0.0 });
    for _ in 0..samples {
        rotated.push((haar_orthogonal(dim, &mut rng) * &fixed)[0]);
        direct.push(uniform_sphere(dim, &mut rng)[0]);
    }
    println!("\nfirst coordinate, rotated fixed vector vs direct sphere draw (dim {dim}):");
    print_histogram(&rotated, "rotated");
    print_histogram(&direct, "sphere ");
}

fn print_histogram(xs: &[f64], label: &str) {
    let bins = 11;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        let b = (((x + 1.0) / 2.0) * bins as f64).floor() as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let scale = 400;
    let bars: Vec<String> = counts
        .iter()
        .map(|&c| "#".repeat(c / scale).to_string())
        .collect();
    println!("  {label} {}", bars.join("|"));
}
