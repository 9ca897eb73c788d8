//! Averaging over conjugation by `g^{⊗K}` for `g` in `S_N` or `U_N`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{permutation_matrix, sample_haar_unitary, sample_permutation, RngStream};
use crate::error::{Error, Result};
use crate::operand::{CMatrix, TensorOperand};
use crate::perm::all_permutations;
use crate::trace::state::LinearFunctional;

/// Largest `N` for exact averaging over `S_N`.
pub const MAX_EXACT_SYMMETRIC: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "group", rename_all = "snake_case")]
pub enum SymmetryGroup {
    /// Every permutation of `S_N` once (`N ≤ 5`).
    SymmetricExact,
    /// `count` uniformly sampled permutations.
    SymmetricSampled { count: usize },
    /// `count` Haar-sampled unitaries.
    UnitarySampled { count: usize },
}

fn group_elements(group: SymmetryGroup, n: usize, stream: RngStream) -> Result<Vec<CMatrix>> {
    match group {
        SymmetryGroup::SymmetricExact => {
            if n > MAX_EXACT_SYMMETRIC {
                return Err(Error::limit(format!(
                    "exact averaging over S_N is limited to N <= {}",
                    MAX_EXACT_SYMMETRIC
                )));
            }
            Ok(all_permutations(n).iter().map(|p| permutation_matrix(p)).collect())
        }
        SymmetryGroup::SymmetricSampled { count } => {
            let mut rng = stream.rng();
            Ok((0..count.max(1)).map(|_| permutation_matrix(&sample_permutation(n, &mut rng))).collect())
        }
        SymmetryGroup::UnitarySampled { count } => {
            let mut rng = stream.rng();
            Ok((0..count.max(1)).map(|_| sample_haar_unitary(n, &mut rng)).collect())
        }
    }
}

/// `|G|^{−1} Σ_g g^{⊗K} B g^{*⊗K}` as a sum of factored terms (never densified
/// for factored input).
pub fn symmetrize_operand(b: &TensorOperand, group: SymmetryGroup, stream: RngStream) -> Result<TensorOperand> {
    let n = b.dim();
    let elements = group_elements(group, n, stream)?;
    let weight = 1.0 / elements.len() as f64;
    match b.terms() {
        Some(terms) => {
            let mut out = Vec::with_capacity(terms.len() * elements.len());
            for g in &elements {
                let ga = g.adjoint();
                for (w, f) in &terms {
                    out.push((w * weight, f.iter().map(|a| g * a * &ga).collect()));
                }
            }
            TensorOperand::sum(out)
        }
        None => {
            let legs = b.legs();
            let dense = b.to_dense()?;
            let mut acc = CMatrix::zeros(dense.nrows(), dense.ncols());
            for g in &elements {
                let big = crate::operand::kron_all(&vec![g.clone(); legs]);
                acc += &big * &dense * big.adjoint() * Complex64::new(weight, 0.0);
            }
            TensorOperand::dense(n, legs, acc)
        }
    }
}

/// `A ↦ |G|^{−1} Σ_σ ψ(σ^{⊗K} A σ^{*⊗K})` for permutations `σ`.
pub struct SymmetrizedFunctional<'a, F: LinearFunctional + ?Sized> {
    inner: &'a F,
    perms: Vec<Vec<usize>>,
}

pub fn symmetrize_functional<F: LinearFunctional + ?Sized>(
    psi: &F,
    group: SymmetryGroup,
    stream: RngStream,
) -> Result<SymmetrizedFunctional<'_, F>> {
    let n = psi.dim();
    let perms = match group {
        SymmetryGroup::SymmetricExact => {
            if n > MAX_EXACT_SYMMETRIC {
                return Err(Error::limit(format!(
                    "exact averaging over S_N is limited to N <= {}",
                    MAX_EXACT_SYMMETRIC
                )));
            }
            all_permutations(n)
        }
        SymmetryGroup::SymmetricSampled { count } => {
            let mut rng = stream.rng();
            (0..count.max(1)).map(|_| sample_permutation(n, &mut rng)).collect()
        }
        SymmetryGroup::UnitarySampled { .. } => {
            return Err(Error::invalid("functionals are symmetrized over S_N only"));
        }
    };
    Ok(SymmetrizedFunctional { inner: psi, perms })
}

impl<F: LinearFunctional + ?Sized> LinearFunctional for SymmetrizedFunctional<'_, F> {
    fn legs(&self) -> usize {
        self.inner.legs()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// `σ E_{𝐢,𝐣} σ* = E_{σ(𝐢),σ(𝐣)}`.
    fn on_unit(&self, rows: &[usize], cols: &[usize]) -> Complex64 {
        let total: Complex64 = self
            .perms
            .iter()
            .map(|p| {
                let r: Vec<usize> = rows.iter().map(|&i| p[i]).collect();
                let c: Vec<usize> = cols.iter().map(|&i| p[i]).collect();
                self.inner.on_unit(&r, &c)
            })
            .sum();
        total / self.perms.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::state::{StateSpec, UnitFunctional};

    #[test]
    fn invariant_functional_unchanged() {
        let psi = StateSpec::max_entangled(2, 3).unwrap();
        let sym = symmetrize_functional(&psi, SymmetryGroup::SymmetricExact, RngStream::new(0, 0)).unwrap();
        for r in 0..9 {
            for c in 0..9 {
                let rows = [r / 3, r % 3];
                let cols = [c / 3, c % 3];
                assert!((sym.on_unit(&rows, &cols) - psi.on_unit(&rows, &cols)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn corner_entry_becomes_uniform_diagonal() {
        let n = 3;
        let corner = UnitFunctional {
            legs: 1,
            n,
            f: |r: &[usize], c: &[usize]| if r[0] == 0 && c[0] == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) },
        };
        let sym = symmetrize_functional(&corner, SymmetryGroup::SymmetricExact, RngStream::new(0, 0)).unwrap();
        // exact S_3 table: 1/3 on every diagonal unit, 0 elsewhere
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert!((sym.on_unit(&[i], &[j]) - Complex64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
        let diag = StateSpec::diagonal_uniform(1, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert!((sym.on_unit(&[i], &[j]) - diag.on_unit(&[i], &[j])).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn operand_symmetrization_is_idempotent() {
        let b = TensorOperand::factored(vec![
            CMatrix::from_fn(3, 3, |i, j| Complex64::new((i * 3 + j) as f64, 1.0)),
            CMatrix::from_fn(3, 3, |i, j| Complex64::new(i as f64 - j as f64, 0.5)),
        ])
        .unwrap();
        let once = symmetrize_operand(&b, SymmetryGroup::SymmetricExact, RngStream::new(0, 0)).unwrap();
        let twice = symmetrize_operand(&once, SymmetryGroup::SymmetricExact, RngStream::new(0, 0)).unwrap();
        let d1 = once.to_dense().unwrap();
        assert!((d1.clone() - twice.to_dense().unwrap()).norm() < 1e-9 * d1.norm());
        let dense_path =
            symmetrize_operand(&TensorOperand::dense(3, 2, b.to_dense().unwrap()).unwrap(), SymmetryGroup::SymmetricExact, RngStream::new(0, 0))
                .unwrap();
        assert!((d1 - dense_path.to_dense().unwrap()).norm() < 1e-9);
        assert!(symmetrize_operand(&TensorOperand::identity(6, 1), SymmetryGroup::SymmetricExact, RngStream::new(0, 0)).is_err());
    }
}
