//! Seeded sampling: Haar unitaries, permutations, Monte-Carlo reports.

pub mod family;
pub mod norm;
pub mod symmetrize;

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operand::CMatrix;

/// A reproducible random stream identified by `(seed, index)`.
///
/// Streams with different indices under the same seed are independent ChaCha
/// streams, so work split across threads draws the same numbers regardless of
/// scheduling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RngStream {
    pub seed: u64,
    pub index: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        RngStream { seed, index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.index);
        r
    }

    /// An independent family of streams derived from this one (e.g. one per experiment).
    pub fn derive(&self, tag: u64) -> RngStream {
        RngStream { seed: splitmix(self.seed ^ splitmix(self.index.wrapping_add(1)) ^ tag.rotate_left(17)), index: 0 }
    }

    /// Stream for the `i`-th sample of this family.
    pub fn sample(&self, i: u64) -> RngStream {
        RngStream { seed: self.seed, index: self.index.wrapping_add(i) }
    }
}

/// Complex Ginibre matrix with `E|z|² = 1`.
pub fn sample_ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

/// Haar unitary from the QR factorization of a Ginibre matrix, with the phases of
/// `R`'s diagonal moved into `Q` so the factorization is unique.
pub fn sample_haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = sample_ginibre(n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn sample_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// The matrix sending `e_j` to `e_{p(j)}`.
pub fn permutation_matrix(p: &[usize]) -> CMatrix {
    let n = p.len();
    let mut m = CMatrix::zeros(n, n);
    for (j, &i) in p.iter().enumerate() {
        m[(i, j)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Largest entry of `|U*U − I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - CMatrix::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Summary of a Monte-Carlo run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MCReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub samples: usize,
    pub estimate: Complex64,
    /// `sqrt(stderr_re² + stderr_im²)`.
    pub stderr: f64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    /// Sample variance `Σ|x − x̄|² / (S − 1)`.
    pub variance: f64,
    #[serde(skip)]
    pub wallclock: f64,
}

impl MCReport {
    pub fn from_samples(n: usize, values: &[Complex64], wallclock: f64) -> Self {
        let s = values.len();
        let mean = pairwise_sum(values) / s.max(1) as f64;
        let (var_re, var_im) = if s > 1 {
            let dev: Vec<Complex64> = values
                .iter()
                .map(|x| Complex64::new((x.re - mean.re).powi(2), (x.im - mean.im).powi(2)))
                .collect();
            let d = pairwise_sum(&dev) / (s - 1) as f64;
            (d.re, d.im)
        } else {
            (0.0, 0.0)
        };
        let stderr_re = (var_re / s as f64).sqrt();
        let stderr_im = (var_im / s as f64).sqrt();
        MCReport {
            n,
            samples: s,
            estimate: mean,
            stderr: stderr_re.hypot(stderr_im),
            stderr_re,
            stderr_im,
            variance: var_re + var_im,
            wallclock,
        }
    }

    /// `|estimate − target| ≤ k · stderr` (exact agreement when the stderr is zero).
    pub fn within(&self, target: Complex64, k: f64) -> bool {
        (self.estimate - target).norm() <= k * self.stderr + 1e-12
    }
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Evaluates `f` on the sample streams `0..samples` of `stream` in parallel; values
/// come back in sample order so nothing depends on the thread count.
pub fn sample_values<F>(samples: usize, stream: RngStream, f: F) -> Result<(Vec<Complex64>, f64)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Complex64> + Sync,
{
    if samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    let start = Instant::now();
    let values = (0..samples as u64)
        .into_par_iter()
        .map(|i| f(&mut stream.sample(i).rng()))
        .collect::<Result<Vec<_>>>()?;
    Ok((values, start.elapsed().as_secs_f64()))
}

/// [`sample_values`] summarized as an [`MCReport`].
pub fn monte_carlo<F>(n: usize, samples: usize, stream: RngStream, f: F) -> Result<MCReport>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Complex64> + Sync,
{
    let (values, secs) = sample_values(samples, stream, f)?;
    Ok(MCReport::from_samples(n, &values, secs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_is_unitary() {
        let mut rng = RngStream::new(1, 0).rng();
        for n in [1, 2, 5, 40] {
            let u = sample_haar_unitary(n, &mut rng);
            assert!(unitarity_defect(&u) <= 1e-12, "n = {}", n);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = sample_haar_unitary(3, &mut RngStream::new(5, 2).rng());
        let b = sample_haar_unitary(3, &mut RngStream::new(5, 2).rng());
        let c = sample_haar_unitary(3, &mut RngStream::new(5, 3).rng());
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(RngStream::new(5, 0).derive(1), RngStream::new(5, 0).derive(2));
    }

    #[test]
    fn trace_moments() {
        let n = 10;
        let rep = monte_carlo(n, 10_000, RngStream::new(11, 0), |rng| {
            Ok(sample_haar_unitary(n, rng).trace() / n as f64)
        })
        .unwrap();
        assert!(rep.within(Complex64::new(0.0, 0.0), 3.0), "{:?}", rep);
        let rep = monte_carlo(n, 10_000, RngStream::new(12, 0), |rng| {
            Ok(Complex64::new(sample_haar_unitary(n, rng).trace().norm_sqr(), 0.0))
        })
        .unwrap();
        assert!(rep.within(Complex64::new(1.0, 0.0), 3.0), "{:?}", rep);
    }

    #[test]
    fn report_statistics() {
        let vals = [Complex64::new(1.0, 0.0), Complex64::new(3.0, 2.0)];
        let r = MCReport::from_samples(4, &vals, 0.0);
        assert_eq!(r.estimate, Complex64::new(2.0, 1.0));
        assert!((r.variance - 4.0).abs() < 1e-12);
        assert!((r.stderr_re - 1.0).abs() < 1e-12);
        let single = MCReport::from_samples(4, &[Complex64::new(1.0, 0.0); 3], 0.0);
        assert_eq!(single.stderr, 0.0);
        assert!(single.within(Complex64::new(1.0, 0.0), 3.0));
    }

    #[test]
    fn permutation_matrix_action() {
        let p = vec![2, 0, 1];
        let m = permutation_matrix(&p);
        assert_eq!(m[(2, 0)], Complex64::new(1.0, 0.0));
        assert!(unitarity_defect(&m) == 0.0);
    }
}
