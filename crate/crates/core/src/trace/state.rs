//! States on `M_N(ℂ)^{⊗K}` and their expansion `ψ = Σ_π a_π Tr_{T₀^π}`.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::graph_trace;
use crate::error::{Error, Result};
use crate::graph::LinearGraph;
use crate::operand::{multi_index, TensorOperand};
use crate::partition::{enumerate_partitions, kernel, mobius_unchecked, SetPartition};

/// Tolerance for unitality and invariance checks.
pub const STATE_TOLERANCE: f64 = 1e-9;

/// A linear functional on `M_N(ℂ)^{⊗K}` known through its values on matrix units.
pub trait LinearFunctional {
    fn legs(&self) -> usize;
    fn dim(&self) -> usize;
    /// `ψ(E_{𝐢,𝐣})` for 0-based row multi-index `𝐢` and column multi-index `𝐣`.
    fn on_unit(&self, rows: &[usize], cols: &[usize]) -> Complex64;

    /// `ψ(A)`; the default expands `A` over all matrix units.
    fn apply(&self, a: &TensorOperand) -> Result<Complex64> {
        check_shape(self.legs(), self.dim(), a)?;
        let n = self.dim();
        let k = self.legs();
        let side = n.pow(k as u32);
        if side.saturating_mul(side) > 1 << 24 {
            return Err(Error::limit("generic functional evaluation is capped at N^{2K} <= 2^24"));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for r in 0..side {
            let rows = multi_index(r, n, k);
            for c in 0..side {
                let cols = multi_index(c, n, k);
                let u = self.on_unit(&rows, &cols);
                if u != Complex64::new(0.0, 0.0) {
                    total += u * a.entry(&rows, &cols);
                }
            }
        }
        Ok(total)
    }
}

fn check_shape(legs: usize, n: usize, a: &TensorOperand) -> Result<()> {
    if a.legs() != legs || a.dim() != n {
        return Err(Error::invalid(format!(
            "state acts on K = {}, N = {} but the operand has K = {}, N = {}",
            legs,
            n,
            a.legs(),
            a.dim()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateKind {
    /// `tr_N^{⊗K}`.
    Tracial,
    /// Vector state of `⊗_{pairs} N^{−1/2} Σ_i e_i ⊗ e_i`, legs paired (1,2), (3,4), …
    MaxEntangled,
    /// `A ↦ N^{−1} Σ_i A(i…i, i…i)`.
    DiagonalUniform,
    /// `Σ_π a_π Tr_{T₀^π}`, coefficients listed in [`enumerate_partitions`] order.
    ElementaryCombination { coefficients: Vec<Complex64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateSpec {
    kind: StateKind,
    legs: usize,
    n: usize,
}

impl StateSpec {
    pub fn new(kind: StateKind, legs: usize, n: usize) -> Result<Self> {
        if legs == 0 || n == 0 {
            return Err(Error::invalid("states need K >= 1 and N >= 1"));
        }
        if kind == StateKind::MaxEntangled && legs % 2 == 1 {
            return Err(Error::invalid("the maximally entangled state needs an even number of legs"));
        }
        let spec = StateSpec { kind, legs, n };
        if let StateKind::ElementaryCombination { coefficients } = &spec.kind {
            let count = enumerate_partitions(2 * legs)?.len();
            if coefficients.len() != count {
                return Err(Error::invalid(format!(
                    "expected {} coefficients (partitions of 2K = {}), got {}",
                    count,
                    2 * legs,
                    coefficients.len()
                )));
            }
            let one = spec.apply(&TensorOperand::identity(n, legs))?;
            if (one - Complex64::new(1.0, 0.0)).norm() > STATE_TOLERANCE {
                return Err(Error::invalid(format!("coefficients are not unital: psi(1) = {}", one)));
            }
        }
        Ok(spec)
    }

    pub fn tracial(legs: usize, n: usize) -> Result<Self> {
        StateSpec::new(StateKind::Tracial, legs, n)
    }

    pub fn max_entangled(legs: usize, n: usize) -> Result<Self> {
        StateSpec::new(StateKind::MaxEntangled, legs, n)
    }

    pub fn diagonal_uniform(legs: usize, n: usize) -> Result<Self> {
        StateSpec::new(StateKind::DiagonalUniform, legs, n)
    }

    pub fn kind(&self) -> &StateKind {
        &self.kind
    }
}

impl LinearFunctional for StateSpec {
    fn legs(&self) -> usize {
        self.legs
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn on_unit(&self, rows: &[usize], cols: &[usize]) -> Complex64 {
        let nf = self.n as f64;
        let indicator = |b: bool| if b { 1.0 } else { 0.0 };
        match &self.kind {
            StateKind::Tracial => {
                Complex64::new(indicator(rows == cols) * nf.powi(-(self.legs as i32)), 0.0)
            }
            StateKind::MaxEntangled => {
                let paired = (0..self.legs / 2)
                    .all(|m| rows[2 * m] == rows[2 * m + 1] && cols[2 * m] == cols[2 * m + 1]);
                Complex64::new(indicator(paired) * nf.powi(-(self.legs as i32) / 2), 0.0)
            }
            StateKind::DiagonalUniform => {
                let i = rows[0];
                let all = rows.iter().chain(cols).all(|&x| x == i);
                Complex64::new(indicator(all) / nf, 0.0)
            }
            StateKind::ElementaryCombination { coefficients } => {
                let mut ij = rows.to_vec();
                ij.extend_from_slice(cols);
                let ker = kernel(&ij).expect("nonempty multi-index");
                enumerate_partitions(2 * self.legs)
                    .expect("size checked at construction")
                    .iter()
                    .zip(coefficients)
                    .filter(|(p, _)| p.refines(&ker))
                    .map(|(_, a)| *a)
                    .sum()
            }
        }
    }

    fn apply(&self, a: &TensorOperand) -> Result<Complex64> {
        check_shape(self.legs, self.n, a)?;
        let nf = self.n as f64;
        let zero = Complex64::new(0.0, 0.0);
        if let StateKind::ElementaryCombination { coefficients } = &self.kind {
            let t0 = LinearGraph::minimal(self.legs)?;
            let mut total = zero;
            for (pi, c) in enumerate_partitions(2 * self.legs)?.iter().zip(coefficients) {
                if *c != zero {
                    total += c * graph_trace(&t0.quotient(pi)?, a)?;
                }
            }
            return Ok(total);
        }
        let Some(terms) = a.terms() else {
            return LinearFunctionalDefault(self).apply(a);
        };
        let mut total = zero;
        for (w, f) in terms {
            let v = match &self.kind {
                StateKind::Tracial => f.iter().map(|m| m.trace() / nf).product::<Complex64>(),
                StateKind::MaxEntangled => f
                    .chunks(2)
                    .map(|p| (0..self.n).flat_map(|i| (0..self.n).map(move |j| (i, j))).map(|(i, j)| p[0][(i, j)] * p[1][(i, j)]).sum::<Complex64>() / nf)
                    .product(),
                StateKind::DiagonalUniform => {
                    (0..self.n).map(|i| f.iter().map(|m| m[(i, i)]).product::<Complex64>()).sum::<Complex64>() / nf
                }
                StateKind::ElementaryCombination { .. } => unreachable!(),
            };
            total += w * v;
        }
        Ok(total)
    }
}

/// Runs the trait's default (matrix-unit) evaluation for a functional that overrides `apply`.
struct LinearFunctionalDefault<'a, F: LinearFunctional>(&'a F);

impl<F: LinearFunctional> LinearFunctional for LinearFunctionalDefault<'_, F> {
    fn legs(&self) -> usize {
        self.0.legs()
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn on_unit(&self, rows: &[usize], cols: &[usize]) -> Complex64 {
        self.0.on_unit(rows, cols)
    }
}

/// `ψ(A)` for a state.
pub fn apply_state(psi: &StateSpec, a: &TensorOperand) -> Result<Complex64> {
    psi.apply(a)
}

/// A functional given by a closure on matrix units.
pub struct UnitFunctional<F: Fn(&[usize], &[usize]) -> Complex64> {
    pub legs: usize,
    pub n: usize,
    pub f: F,
}

impl<F: Fn(&[usize], &[usize]) -> Complex64> LinearFunctional for UnitFunctional<F> {
    fn legs(&self) -> usize {
        self.legs
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn on_unit(&self, rows: &[usize], cols: &[usize]) -> Complex64 {
        (self.f)(rows, cols)
    }
}

/// Coefficients `a_{N,π}` of an invariant functional over the partitions of `2K`.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub legs: usize,
    pub n: usize,
    pub partitions: Vec<SetPartition>,
    /// `ψ(E_{𝐢,𝐣})` for a representative of each kernel.
    pub unit_values: Vec<Complex64>,
    pub coefficients: Vec<Complex64>,
}

impl Decomposition {
    /// `Σ_π a_π Tr_{T₀^π}(A)`.
    pub fn reconstruct(&self, a: &TensorOperand) -> Result<Complex64> {
        let t0 = LinearGraph::minimal(self.legs)?;
        let mut total = Complex64::new(0.0, 0.0);
        for (pi, c) in self.partitions.iter().zip(&self.coefficients) {
            if c.norm() > 0.0 {
                total += c * graph_trace(&t0.quotient(pi)?, a)?;
            }
        }
        Ok(total)
    }

    pub fn coefficient(&self, pi: &SetPartition) -> Option<Complex64> {
        self.partitions.iter().position(|p| p == pi).map(|i| self.coefficients[i])
    }

    /// `b_π = Σ_{π′≤π} a_{π′}`.
    pub fn cumulative(&self, pi: &SetPartition) -> Complex64 {
        self.partitions
            .iter()
            .zip(&self.coefficients)
            .filter(|(p, _)| p.refines(pi))
            .map(|(_, a)| *a)
            .sum()
    }

    pub fn into_state(self) -> Result<StateSpec> {
        StateSpec::new(StateKind::ElementaryCombination { coefficients: self.coefficients }, self.legs, self.n)
    }
}

/// Row and column multi-indices whose joint kernel is `pi` (block `b` takes value `b`).
pub fn representative(pi: &SetPartition, legs: usize) -> (Vec<usize>, Vec<usize>) {
    let rgs = pi.rgs();
    (rgs[..legs].to_vec(), rgs[legs..].to_vec())
}

/// Random relabelings checked per partition in the invariance test.
const INVARIANCE_TRIALS: usize = 3;

/// Expands an `S_N`-invariant functional as `Σ_π a_π Tr_{T₀^π}`.
pub fn decompose_invariant_state<F: LinearFunctional + ?Sized>(psi: &F) -> Result<Decomposition> {
    let legs = psi.legs();
    let n = psi.dim();
    if n < 2 * legs {
        return Err(Error::invalid(format!(
            "decomposition needs N >= 2K = {} to represent every kernel, got N = {}",
            2 * legs,
            n
        )));
    }
    let partitions = enumerate_partitions(2 * legs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_1a75);
    let mut values: Vec<usize> = (0..n).collect();
    let mut unit_values = Vec::with_capacity(partitions.len());
    for pi in &partitions {
        let (rows, cols) = representative(pi, legs);
        let b = psi.on_unit(&rows, &cols);
        for _ in 0..INVARIANCE_TRIALS {
            values.shuffle(&mut rng);
            let r: Vec<usize> = rows.iter().map(|&i| values[i]).collect();
            let c: Vec<usize> = cols.iter().map(|&i| values[i]).collect();
            let other = psi.on_unit(&r, &c);
            if (other - b).norm() > STATE_TOLERANCE * (1.0 + b.norm()) {
                return Err(Error::NotInvariant(format!(
                    "value on kernel {} changes from {} to {} under relabeling",
                    pi.to_block_string(),
                    b,
                    other
                )));
            }
        }
        unit_values.push(b);
    }
    let coefficients = partitions
        .iter()
        .map(|pi| {
            partitions
                .iter()
                .zip(&unit_values)
                .filter(|(p, _)| p.refines(pi))
                .map(|(p, b)| b * mobius_unchecked(p, pi) as f64)
                .sum()
        })
        .collect();
    Ok(Decomposition { legs, n, partitions, unit_values, coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operand::CMatrix;
    use rand::Rng;

    fn random_op(n: usize, k: usize, seed: u64) -> TensorOperand {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TensorOperand::factored(
            (0..k)
                .map(|_| CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn unital_on_identity() {
        for psi in [
            StateSpec::tracial(2, 4).unwrap(),
            StateSpec::max_entangled(2, 4).unwrap(),
            StateSpec::diagonal_uniform(2, 4).unwrap(),
        ] {
            let v = psi.apply(&TensorOperand::identity(4, 2)).unwrap();
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        assert!(StateSpec::max_entangled(3, 4).is_err());
    }

    #[test]
    fn fast_paths_match_unit_expansion() {
        for psi in [
            StateSpec::tracial(2, 3).unwrap(),
            StateSpec::max_entangled(2, 3).unwrap(),
            StateSpec::diagonal_uniform(2, 3).unwrap(),
        ] {
            let a = random_op(3, 2, 7);
            let fast = psi.apply(&a).unwrap();
            let slow = LinearFunctionalDefault(&psi).apply(&a).unwrap();
            assert!((fast - slow).norm() < 1e-12, "{:?}", psi.kind());
        }
    }

    #[test]
    fn max_entangled_pairing_expansion() {
        // <Ω, (U ⊗ U^t) Ω> = N^{-1} Σ_{i,j} U(i,j) U(j,i)
        let a = random_op(3, 1, 9);
        let TensorOperand::Factored(f) = &a else { unreachable!() };
        let u = f[0].clone();
        let op = TensorOperand::factored(vec![u.clone(), u.transpose()]).unwrap();
        let expected: Complex64 =
            (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| u[(i, j)] * u[(j, i)]).sum::<Complex64>() / 3.0;
        let v = StateSpec::max_entangled(2, 3).unwrap().apply(&op).unwrap();
        assert!((v - expected).norm() < 1e-12);
    }

    #[test]
    fn tracial_k1_coefficients() {
        let d = decompose_invariant_state(&StateSpec::tracial(1, 4).unwrap()).unwrap();
        let full = SetPartition::full(2);
        let disc = SetPartition::discrete(2);
        assert!((d.coefficient(&full).unwrap() - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert!(d.coefficient(&disc).unwrap().norm() < 1e-15);
    }

    #[test]
    fn all_entries_functional() {
        let n = 4;
        let psi = UnitFunctional { legs: 1, n, f: |_: &[usize], _: &[usize]| Complex64::new(1.0 / 16.0, 0.0) };
        let d = decompose_invariant_state(&psi).unwrap();
        assert!((d.coefficient(&SetPartition::discrete(2)).unwrap() - Complex64::new(1.0 / 16.0, 0.0)).norm() < 1e-15);
        assert!(d.coefficient(&SetPartition::full(2)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn reconstruction_every_kind() {
        for (k, psi) in [
            (2, StateSpec::tracial(2, 5).unwrap()),
            (2, StateSpec::max_entangled(2, 5).unwrap()),
            (2, StateSpec::diagonal_uniform(2, 5).unwrap()),
        ] {
            let d = decompose_invariant_state(&psi).unwrap();
            for seed in 0..20 {
                let a = random_op(5, k, seed);
                let r = d.reconstruct(&a).unwrap() - psi.apply(&a).unwrap();
                assert!(r.norm() < 1e-9, "{:?} residual {}", psi.kind(), r.norm());
            }
            let spec = d.clone().into_state().unwrap();
            let a = random_op(5, k, 99);
            assert!((spec.apply(&a).unwrap() - psi.apply(&a).unwrap()).norm() < 1e-9);
            let again = decompose_invariant_state(&spec).unwrap();
            for (x, y) in again.coefficients.iter().zip(&d.coefficients) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn non_invariant_is_rejected() {
        let psi = UnitFunctional {
            legs: 1,
            n: 1,
            f: |r: &[usize], c: &[usize]| if r[0] == 0 && c[0] == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) },
        };
        assert!(matches!(decompose_invariant_state(&psi), Err(Error::InvalidArgument(_))));
        let psi = UnitFunctional { legs: 1, n: 4, f: psi.f };
        assert!(matches!(decompose_invariant_state(&psi), Err(Error::NotInvariant(_))));
    }

    #[test]
    fn non_unital_combination_rejected() {
        let count = enumerate_partitions(2).unwrap().len();
        let coefficients = vec![Complex64::new(1.0, 0.0); count];
        assert!(StateSpec::new(StateKind::ElementaryCombination { coefficients }, 1, 3).is_err());
    }
}
