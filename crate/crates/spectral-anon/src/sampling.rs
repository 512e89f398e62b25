//! Seeded generation of the three transformation families (uniform
//! permutations, uniform sign-changes, Haar-uniform orthogonal matrices)
//! and the sphere sampler that makes the orthogonal variant O(n).

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A reproducible random stream: a 64-bit seed plus a 64-bit stream id.
///
/// Identical (seed, stream) pairs reproduce identical draw sequences on
/// any platform; distinct stream ids under the same seed are independent
/// ChaCha streams, so parallel replications can each own one without
/// coordination or sequence overlap. A stream is single-owner: never draw
/// from one concurrently (the `&mut` receivers enforce this).
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha12Rng,
    seed: u64,
    stream: u64,
}

impl RngStream {
    /// Stream 0 of the given seed.
    pub fn from_seed(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            inner,
            seed,
            stream,
        }
    }

    /// A fresh stream under the same seed, e.g. one per replication.
    pub fn substream(&self, stream: u64) -> Self {
        Self::with_stream(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

/// A permutation of {0, …, n−1}, stored as an index vector and applied
/// as a gather; the n×n permutation matrix is never materialized.
///
/// Entry i of the permuted vector is entry `map[i]` of the source, i.e.
/// the matrix view has a one at (i, map[i]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    /// Validates that `map` is a bijection of {0, …, n−1}.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &idx in &map {
            if idx >= n || seen[idx] {
                return Err(Error::InvalidConfig(format!(
                    "index vector of length {n} is not a permutation"
                )));
            }
            seen[idx] = true;
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, src: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.map.len(), |i, _| src[self.map[i]])
    }

    /// Number of fixed points, i.e. the trace of the matrix view.
    pub fn trace(&self) -> usize {
        self.map.iter().enumerate().filter(|&(i, &m)| i == m).count()
    }

    /// Trace of the squared matrix view: points returning after two steps.
    pub fn trace_squared(&self) -> usize {
        self.map
            .iter()
            .enumerate()
            .filter(|&(i, &m)| self.map[m] == i)
            .count()
    }
}

/// A vector of ±1 entries, the diagonal of a sign-change matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SignVector {
    signs: Vec<f64>,
}

impl SignVector {
    pub fn all_positive(n: usize) -> Self {
        Self {
            signs: vec![1.0; n],
        }
    }

    pub fn new(signs: Vec<f64>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::InvalidConfig(
                "sign vector entries must be exactly ±1".to_string(),
            ));
        }
        Ok(Self { signs })
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.signs
    }

    pub fn apply(&self, src: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.signs.len(), |i, _| self.signs[i] * src[i])
    }

    /// Sum of the signs, i.e. the trace of the diagonal matrix view.
    pub fn trace(&self) -> f64 {
        self.signs.iter().sum()
    }
}

/// Uniform draw over all n! permutations (Fisher–Yates with unbiased
/// index draws).
pub fn random_permutation(n: usize, rng: &mut RngStream) -> Permutation {
    let mut map: Vec<usize> = (0..n).collect();
    map.shuffle(rng);
    Permutation { map }
}

/// Each entry independently ±1 with probability 1/2.
pub fn random_signs(n: usize, rng: &mut RngStream) -> SignVector {
    let signs = (0..n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    SignVector { signs }
}

/// Haar-uniform n×n orthogonal matrix: QR of an i.i.d. standard Gaussian
/// matrix with the sign of each diagonal entry of R folded into the
/// corresponding column of Q, making the factorization the unique one
/// with positive R diagonal. Plain QR without the sign correction is
/// not Haar and must not be used.
pub fn haar_orthogonal(n: usize, rng: &mut RngStream) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Uniform direction on the unit sphere in ℝⁿ: a normalized i.i.d.
/// standard Gaussian vector (resampled in the measure-zero event of an
/// exactly zero draw).
pub fn uniform_sphere(n: usize, rng: &mut RngStream) -> DVector<f64> {
    loop {
        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = z.norm();
        if norm > 0.0 {
            return z / norm;
        }
    }
}
