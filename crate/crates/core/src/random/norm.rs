//! Operator norm of `Σ_ℓ U_ℓ ⊗ V_ℓ`: independent Haar pairs versus `V_ℓ = Ū_ℓ`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sample_ginibre, sample_haar_unitary, RngStream};
use crate::error::{Error, Result};
use crate::operand::CMatrix;

/// Largest `N²` accepted.
pub const MAX_NORM_DEMO_SIDE: usize = 4096;
const MAX_ITERATIONS: usize = 20_000;
const TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// `V_ℓ` independent Haar unitaries.
    HaarPair,
    /// `V_ℓ = conj(U_ℓ)`; `(U ⊗ Ū)` fixes `Σ_i e_i ⊗ e_i`.
    ConjugatePair,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub mode: NormMode,
    pub norm: f64,
    /// `2√(L−1)` for Haar pairs, `L` for conjugate pairs.
    pub reference: f64,
    pub iterations: usize,
    /// `‖S ξ‖` for the unit vector `ξ = N^{−1/2} Σ_i e_i ⊗ e_i` (a lower bound on the norm).
    pub fixed_vector_bound: f64,
}

/// `(U ⊗ V) vec(X) = vec(U X V^t)` with row-major vectorization.
fn apply(pairs: &[(CMatrix, CMatrix)], x: &CMatrix, adjoint: bool) -> CMatrix {
    let n = x.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (u, v) in pairs {
        if adjoint {
            out += u.adjoint() * x * v.conjugate();
        } else {
            out += u * x * v.transpose();
        }
    }
    out
}

/// Largest singular value by power iteration on `S*S`.
pub fn largest_singular_value<R: Rng + ?Sized>(pairs: &[(CMatrix, CMatrix)], rng: &mut R) -> (f64, usize) {
    let n = pairs[0].0.nrows();
    let mut x = sample_ginibre(n, rng);
    x /= Complex64::new(x.norm(), 0.0);
    let mut sigma = 0.0;
    for it in 1..=MAX_ITERATIONS {
        let y = apply(pairs, &apply(pairs, &x, false), true);
        let lambda = y.norm();
        let next = lambda.sqrt();
        x = y / Complex64::new(lambda, 0.0);
        if (next - sigma).abs() <= TOLERANCE * next {
            return (next, it);
        }
        sigma = next;
    }
    (sigma, MAX_ITERATIONS)
}

pub fn norm_absorption_demo(l: usize, n: usize, mode: NormMode, stream: RngStream) -> Result<NormReport> {
    if l == 0 || n == 0 {
        return Err(Error::invalid("L and N must be positive"));
    }
    if n * n > MAX_NORM_DEMO_SIDE {
        return Err(Error::limit(format!("N^2 = {} exceeds {}", n * n, MAX_NORM_DEMO_SIDE)));
    }
    let mut rng = stream.rng();
    let pairs: Vec<(CMatrix, CMatrix)> = (0..l)
        .map(|_| {
            let u = sample_haar_unitary(n, &mut rng);
            let v = match mode {
                NormMode::HaarPair => sample_haar_unitary(n, &mut rng),
                NormMode::ConjugatePair => u.conjugate(),
            };
            (u, v)
        })
        .collect();
    let (power, iterations) = largest_singular_value(&pairs, &mut rng);
    let xi = CMatrix::identity(n, n) / Complex64::new((n as f64).sqrt(), 0.0);
    let fixed_vector_bound = apply(&pairs, &xi, false).norm();
    let norm = power.max(fixed_vector_bound);
    let reference = match mode {
        NormMode::HaarPair => 2.0 * ((l as f64) - 1.0).sqrt(),
        NormMode::ConjugatePair => l as f64,
    };
    Ok(NormReport { l, n, mode, norm, reference, iterations, fixed_vector_bound })
}
