//! The families `W_ℓ = U_ℓ^{⊗K₁} ⊗ (U_ℓ^t)^{⊗K₂} ⊗ V_ℓ`, word evaluation, and
//! Monte-Carlo moments of states on them.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{monte_carlo, permutation_matrix, sample_haar_unitary, sample_values, MCReport, RngStream};
use crate::error::{Error, Result};
use crate::operand::{matmul, CMatrix, TensorOperand};
use crate::trace::state::StateSpec;
use crate::word::StarWord;

/// How the last `K₃` legs of each `W_ℓ` are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VFamily {
    /// Independent Haar unitaries on every leg, resampled with the `U`s.
    #[default]
    Haar,
    /// Fixed cyclic-shift permutation matrices (leg `j` of `V_ℓ` shifts by `ℓ + j + 1`).
    Permutation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WSpec {
    pub k1: usize,
    pub k2: usize,
    pub k3: usize,
    /// Number of letters `L`.
    pub letters: usize,
    pub v: VFamily,
}

impl WSpec {
    pub fn new(k1: usize, k2: usize, k3: usize, letters: usize) -> Result<Self> {
        if k1 == 0 {
            return Err(Error::invalid("K1 must be at least 1"));
        }
        if letters == 0 {
            return Err(Error::invalid("at least one letter is required"));
        }
        Ok(WSpec { k1, k2, k3, letters, v: VFamily::Haar })
    }

    pub fn with_v(mut self, v: VFamily) -> Self {
        self.v = v;
        self
    }

    pub fn legs(&self) -> usize {
        self.k1 + self.k2 + self.k3
    }

    /// One draw of the whole family `(W_1, …, W_L)`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Vec<CMatrix>> {
        let us: Vec<CMatrix> = (0..self.letters).map(|_| sample_haar_unitary(n, rng)).collect();
        let vs: Vec<Vec<CMatrix>> = (0..self.letters)
            .map(|l| {
                (0..self.k3)
                    .map(|j| match self.v {
                        VFamily::Haar => sample_haar_unitary(n, rng),
                        VFamily::Permutation => {
                            let shift = l + j + 1;
                            permutation_matrix(&(0..n).map(|i| (i + shift) % n).collect::<Vec<_>>())
                        }
                    })
                    .collect()
            })
            .collect();
        build_w(&us, &vs, self.k1, self.k2, self.k3).expect("shapes are consistent by construction")
    }
}

/// Legs of every `W_ℓ`: `K₁` copies of `U_ℓ`, `K₂` of `U_ℓ^t`, then the `K₃` legs of `V_ℓ`.
pub fn build_w(us: &[CMatrix], vs: &[Vec<CMatrix>], k1: usize, k2: usize, k3: usize) -> Result<Vec<Vec<CMatrix>>> {
    if k1 == 0 {
        return Err(Error::invalid("K1 must be at least 1"));
    }
    if us.len() != vs.len() {
        return Err(Error::invalid(format!("{} U's but {} V's", us.len(), vs.len())));
    }
    us.iter()
        .zip(vs)
        .enumerate()
        .map(|(l, (u, v))| {
            if v.len() != k3 {
                return Err(Error::invalid(format!("V_{} has {} legs, expected K3 = {}", l + 1, v.len(), k3)));
            }
            let mut legs = vec![u.clone(); k1];
            legs.extend(std::iter::repeat_n(u.transpose(), k2));
            legs.extend(v.iter().cloned());
            Ok(legs)
        })
        .collect()
}

/// `M(W)` legwise: leg `k` is the ordered product of the `k`-th legs of the letters.
pub fn evaluate_word(w: &[Vec<CMatrix>], m: &StarWord) -> Result<Vec<CMatrix>> {
    let Some(first) = w.first() else {
        return Err(Error::invalid("empty family"));
    };
    if m.alphabet_size() > w.len() {
        return Err(Error::invalid(format!(
            "word uses letter {} but the family has {}",
            m.alphabet_size(),
            w.len()
        )));
    }
    let n = first[0].nrows();
    let legs = first.len();
    Ok((0..legs)
        .map(|k| {
            m.letters().iter().fold(CMatrix::identity(n, n), |acc, l| {
                let x = &w[l.index][k];
                if l.star {
                    matmul(&acc, &x.adjoint(), false)
                } else {
                    matmul(&acc, x, false)
                }
            })
        })
        .collect())
}

fn check_state(psi: &StateSpec, spec: &WSpec, m: &StarWord) -> Result<()> {
    use crate::trace::state::LinearFunctional;
    if psi.legs() != spec.legs() {
        return Err(Error::invalid(format!(
            "state has K = {} legs, blocks give {}",
            psi.legs(),
            spec.legs()
        )));
    }
    if m.alphabet_size() > spec.letters {
        return Err(Error::invalid("word uses more letters than the family provides"));
    }
    Ok(())
}

/// `ψ(M(W))` for one draw.
pub fn sample_state_value<R: Rng + ?Sized>(psi: &StateSpec, spec: &WSpec, m: &StarWord, rng: &mut R) -> Result<Complex64> {
    use crate::trace::state::LinearFunctional;
    let w = spec.sample(psi.dim(), rng);
    psi.apply(&TensorOperand::Factored(evaluate_word(&w, m)?))
}

/// Monte-Carlo estimate of `E ψ(M(W))`.
pub fn mc_expectation(psi: &StateSpec, spec: &WSpec, m: &StarWord, samples: usize, stream: RngStream) -> Result<MCReport> {
    use crate::trace::state::LinearFunctional;
    check_state(psi, spec, m)?;
    if samples < 2 {
        return Err(Error::invalid("Monte-Carlo runs need at least 2 samples"));
    }
    monte_carlo(psi.dim(), samples, stream, |rng| sample_state_value(psi, spec, m, rng))
}

/// Monte-Carlo estimate of `Var ψ(M(W)) = E|ψ(M(W)) − E ψ(M(W))|²`: the estimate is
/// the sample variance, the stderr that of the mean of the squared deviations.
pub fn mc_variance(psi: &StateSpec, spec: &WSpec, m: &StarWord, samples: usize, stream: RngStream) -> Result<MCReport> {
    use crate::trace::state::LinearFunctional;
    check_state(psi, spec, m)?;
    if samples < 2 {
        return Err(Error::invalid("Monte-Carlo runs need at least 2 samples"));
    }
    let (values, secs) = sample_values(samples, stream, |rng| sample_state_value(psi, spec, m, rng))?;
    let mean = MCReport::from_samples(psi.dim(), &values, secs);
    let s = values.len() as f64;
    let devs: Vec<Complex64> =
        values.iter().map(|x| Complex64::new((x - mean.estimate).norm_sqr() * s / (s - 1.0), 0.0)).collect();
    let mut rep = MCReport::from_samples(mean.n, &devs, secs);
    rep.variance = mean.variance;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::unitarity_defect;
    use crate::operand::kron_all;

    fn word(s: &str) -> StarWord {
        s.parse().unwrap()
    }

    #[test]
    fn w_shapes() {
        let spec = WSpec::new(2, 1, 2, 2).unwrap();
        let w = spec.sample(3, &mut RngStream::new(1, 0).rng());
        assert_eq!(w.len(), 2);
        assert!(w.iter().all(|legs| legs.len() == 5));
        assert_eq!(w[0][2], w[0][0].transpose());
        assert!(w.iter().flatten().all(|m| unitarity_defect(m) < 1e-12));
        assert!(WSpec::new(0, 1, 0, 1).is_err());
        assert!(build_w(&[CMatrix::identity(2, 2)], &[vec![]], 1, 0, 1).is_err());
    }

    #[test]
    fn word_evaluation() {
        let spec = WSpec::new(1, 1, 0, 2).unwrap();
        let w = spec.sample(3, &mut RngStream::new(2, 0).rng());
        let id = evaluate_word(&w, &word("1,1*")).unwrap();
        assert!(id.iter().all(|m| (m - CMatrix::identity(3, 3)).norm() < 1e-12));
        assert_eq!(evaluate_word(&w, &word("2")).unwrap(), w[1]);
        // legwise product equals the dense product of Kronecker factors
        let m = evaluate_word(&w, &word("1,2*,1")).unwrap();
        let dense = kron_all(&w[0]) * kron_all(&w[1]).adjoint() * kron_all(&w[0]);
        assert!((kron_all(&m) - dense).norm() < 1e-12);
        let long = evaluate_word(&w, &word("1,2,1*,2*,1,1,2*,1")).unwrap();
        assert!(long.iter().all(|m| unitarity_defect(m) < 1e-10));
        assert!(evaluate_word(&w, &word("3")).is_err());
    }

    #[test]
    fn trivial_word_is_exact() {
        let psi = StateSpec::tracial(2, 4).unwrap();
        let spec = WSpec::new(1, 1, 0, 1).unwrap();
        let rep = mc_expectation(&psi, &spec, &StarWord::empty(), 10, RngStream::new(3, 0)).unwrap();
        assert!((rep.estimate - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(rep.stderr < 1e-12);
    }

    #[test]
    fn commutator_moment() {
        let n = 20;
        let psi = StateSpec::tracial(1, n).unwrap();
        let spec = WSpec::new(1, 0, 0, 2).unwrap();
        let rep = mc_expectation(&psi, &spec, &word("1,2,1*,2*"), 2000, RngStream::new(4, 0)).unwrap();
        assert!(rep.within(Complex64::new(1.0 / (n * n) as f64, 0.0), 3.0), "{:?}", rep);
    }

    #[test]
    fn variance_report_is_consistent() {
        let psi = StateSpec::tracial(1, 4).unwrap();
        let spec = WSpec::new(1, 0, 0, 1).unwrap();
        let stream = RngStream::new(5, 0);
        let e = mc_expectation(&psi, &spec, &word("1"), 200, stream).unwrap();
        let v = mc_variance(&psi, &spec, &word("1"), 200, stream).unwrap();
        assert!((v.estimate.re - e.variance).abs() < 1e-12);
    }
}
