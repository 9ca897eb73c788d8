//! Randomized extraction of `b_{N,π} = Σ_{π′≤π} a_{N,π′}` from an invariant functional.
//!
//! Each vertex `ℓ` of `T₀` gets the diagonal matrix `D_ℓ = D̄_C D̃_C` of its block `C`
//! of `π`: `D̃_C` has i.i.d. uniform `|C|`-th roots of unity on the diagonal and `D̄_C`
//! hands every index `i` to at most one block (chosen uniformly among `2^n` slots,
//! `n = ⌈log₂|π|⌉`), with weight `2^{n/|C|}`. Then
//! `E[Tr⁰_{T₀^σ}(D A D)] = δ_{σ,π} Tr⁰_{T₀^π}(A)`.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::injective_graph_trace;
use super::state::LinearFunctional;
use crate::error::{Error, Result};
use crate::graph::LinearGraph;
use crate::operand::{CMatrix, TensorOperand};
use crate::partition::SetPartition;
use crate::random::{sample_values, MCReport, RngStream};

/// Largest number of joint assignments enumerated by the exact oracle.
pub const MAX_EXACT_ASSIGNMENTS: u64 = 2_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct ExtractionReport {
    pub partition: SetPartition,
    /// Estimate of `b_{N,π}`.
    pub report: MCReport,
    pub probe_injective_trace: Complex64,
}

fn slot_bits(blocks: usize) -> u32 {
    usize::BITS - (blocks.max(1) - 1).leading_zeros()
}

/// The randomness behind one draw of the scalings.
#[derive(Clone, Debug)]
struct Draw {
    /// `roots[c][i]` = exponent `r` of `exp(2πi r / |C|)` for block `c` at index `i`.
    roots: Vec<Vec<usize>>,
    /// `slots[i]` in `0..2^n`.
    slots: Vec<usize>,
}

fn block_diagonals(pi: &SetPartition, n: usize, draw: &Draw) -> Vec<Vec<Complex64>> {
    let blocks = pi.blocks();
    let bits = slot_bits(blocks.len());
    blocks
        .iter()
        .enumerate()
        .map(|(c, b)| {
            let size = b.len() as f64;
            let weight = 2f64.powf(bits as f64 / size);
            (0..n)
                .map(|i| {
                    if draw.slots[i] != c {
                        return Complex64::new(0.0, 0.0);
                    }
                    let angle = 2.0 * std::f64::consts::PI * draw.roots[c][i] as f64 / size;
                    Complex64::from_polar(weight, angle)
                })
                .collect()
        })
        .collect()
}

/// `(left, right)` per-leg diagonals: leg `k` becomes `D_k A_k D_{K+k}`.
fn scalings(pi: &SetPartition, legs: usize, n: usize, draw: &Draw) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    let diag = block_diagonals(pi, n, draw);
    let left = (0..legs).map(|k| diag[pi.block_of(k)].clone()).collect();
    let right = (0..legs).map(|k| diag[pi.block_of(legs + k)].clone()).collect();
    (left, right)
}

fn random_draw<R: Rng + ?Sized>(pi: &SetPartition, n: usize, rng: &mut R) -> Draw {
    let blocks = pi.blocks();
    let bits = slot_bits(blocks.len());
    Draw {
        roots: blocks.iter().map(|b| (0..n).map(|_| rng.random_range(0..b.len())).collect()).collect(),
        slots: (0..n).map(|_| rng.random_range(0..1usize << bits)).collect(),
    }
}

fn check_partition(pi: &SetPartition, legs: usize) -> Result<()> {
    if pi.ground_size() != 2 * legs {
        return Err(Error::invalid(format!(
            "partition of {} elements, expected 2K = {}",
            pi.ground_size(),
            2 * legs
        )));
    }
    Ok(())
}

/// `J^{⊗K}` (all-ones legs); its injective trace on `T₀^π` is `N!/(N−|π|)!`.
pub fn default_probe(n: usize, legs: usize) -> TensorOperand {
    TensorOperand::Factored(vec![CMatrix::from_element(n, n, Complex64::new(1.0, 0.0)); legs])
}

fn probe_trace(pi: &SetPartition, probe: &TensorOperand) -> Result<Complex64> {
    let legs = probe.legs();
    let q = LinearGraph::minimal(legs)?.quotient(pi)?;
    let t = injective_graph_trace(&q, probe)?;
    if t.norm() < 1e-300 {
        return Err(Error::ProbeFailure(format!(
            "the probe has zero injective trace on the quotient by {}; pick another probe",
            pi.to_block_string()
        )));
    }
    Ok(t)
}

/// Monte-Carlo estimate of `b_{N,π}` as `mean ψ(D A D) / Tr⁰_{T₀^π}(A)`.
pub fn randomized_coefficient_extract<F: LinearFunctional + Sync + ?Sized>(
    psi: &F,
    pi: &SetPartition,
    samples: usize,
    stream: RngStream,
    probe: Option<&TensorOperand>,
) -> Result<ExtractionReport> {
    let legs = psi.legs();
    let n = psi.dim();
    check_partition(pi, legs)?;
    if samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    let owned;
    let probe = match probe {
        Some(p) => p,
        None => {
            owned = default_probe(n, legs);
            &owned
        }
    };
    let denom = probe_trace(pi, probe)?;
    let (values, secs) = sample_values(samples, stream, |rng| {
        let draw = random_draw(pi, n, rng);
        let (l, r) = scalings(pi, legs, n, &draw);
        Ok(psi.apply(&probe.scale_diagonal(&l, &r)?)? / denom)
    })?;
    Ok(ExtractionReport {
        partition: pi.clone(),
        report: MCReport::from_samples(n, &values, secs),
        probe_injective_trace: denom,
    })
}

/// Monte-Carlo estimate of `E[Tr⁰_{T₀^{π′}}(D A D)] / Tr⁰_{T₀^π}(A)` for scalings built from
/// `π`: 1 when `π′ = π`, 0 otherwise.
pub fn extraction_selectivity(
    pi: &SetPartition,
    pi_prime: &SetPartition,
    probe: &TensorOperand,
    samples: usize,
    stream: RngStream,
) -> Result<MCReport> {
    let legs = probe.legs();
    let n = probe.dim();
    check_partition(pi, legs)?;
    check_partition(pi_prime, legs)?;
    let denom = probe_trace(pi, probe)?;
    let target = LinearGraph::minimal(legs)?.quotient(pi_prime)?;
    let (values, secs) = sample_values(samples, stream, |rng| {
        let draw = random_draw(pi, n, rng);
        let (l, r) = scalings(pi, legs, n, &draw);
        Ok(injective_graph_trace(&target, &probe.scale_diagonal(&l, &r)?)? / denom)
    })?;
    Ok(MCReport::from_samples(n, &values, secs))
}

/// The exact expectation behind [`randomized_coefficient_extract`], by enumerating
/// every root-of-unity and slot assignment.
pub fn exact_extraction_expectation<F: LinearFunctional + ?Sized>(
    psi: &F,
    pi: &SetPartition,
    probe: Option<&TensorOperand>,
) -> Result<Complex64> {
    let legs = psi.legs();
    let n = psi.dim();
    check_partition(pi, legs)?;
    let owned;
    let probe = match probe {
        Some(p) => p,
        None => {
            owned = default_probe(n, legs);
            &owned
        }
    };
    let denom = probe_trace(pi, probe)?;
    let blocks = pi.blocks();
    let bits = slot_bits(blocks.len());
    // mixed radix: per block, per index a root exponent; per index a slot
    let mut radices: Vec<usize> = Vec::new();
    for b in &blocks {
        radices.extend(std::iter::repeat_n(b.len(), n));
    }
    radices.extend(std::iter::repeat_n(1usize << bits, n));
    let total = radices.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r as u64)).filter(|&t| t <= MAX_EXACT_ASSIGNMENTS);
    let Some(total) = total else {
        return Err(Error::limit("too many assignments for exact enumeration"));
    };
    let mut digits = vec![0usize; radices.len()];
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..total {
        let roots = (0..blocks.len()).map(|c| digits[c * n..(c + 1) * n].to_vec()).collect();
        let slots = digits[blocks.len() * n..].to_vec();
        let draw = Draw { roots, slots };
        let (l, r) = scalings(pi, legs, n, &draw);
        sum += psi.apply(&probe.scale_diagonal(&l, &r)?)?;
        for p in 0..digits.len() {
            digits[p] += 1;
            if digits[p] < radices[p] {
                break;
            }
            digits[p] = 0;
        }
    }
    Ok(sum / total as f64 / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::enumerate_partitions;
    use crate::trace::state::{decompose_invariant_state, StateSpec};

    #[test]
    fn slot_bits_values() {
        assert_eq!(slot_bits(1), 0);
        assert_eq!(slot_bits(2), 1);
        assert_eq!(slot_bits(3), 2);
        assert_eq!(slot_bits(4), 2);
        assert_eq!(slot_bits(5), 3);
    }

    #[test]
    fn exact_oracle_matches_cumulative_coefficients() {
        let psi = StateSpec::tracial(1, 3).unwrap();
        let d = decompose_invariant_state(&StateSpec::tracial(1, 2).unwrap()).unwrap();
        assert_eq!(d.coefficients.len(), 2);
        for pi in enumerate_partitions(2).unwrap() {
            let exact = exact_extraction_expectation(&psi, &pi, None).unwrap();
            let b = if pi.is_full() { 1.0 / 3.0 } else { 0.0 };
            assert!((exact - Complex64::new(b, 0.0)).norm() < 1e-12, "{:?}: {}", pi, exact);
        }
        let diag = StateSpec::diagonal_uniform(1, 3).unwrap();
        let exact = exact_extraction_expectation(&diag, &SetPartition::full(2), None).unwrap();
        assert!((exact - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn tracial_full_partition_estimate() {
        let n = 4;
        let psi = StateSpec::tracial(1, n).unwrap();
        let rep = randomized_coefficient_extract(&psi, &SetPartition::full(2), 400, RngStream::new(7, 0), None).unwrap();
        assert!(rep.report.within(Complex64::new(0.25, 0.0), 3.0), "{:?}", rep.report);
    }

    #[test]
    fn cross_terms_vanish() {
        let n = 4;
        let probe = default_probe(n, 2);
        let parts = enumerate_partitions(4).unwrap();
        let pi = &parts[3];
        for (i, other) in parts.iter().enumerate().step_by(4) {
            let rep = extraction_selectivity(pi, other, &probe, 300, RngStream::new(8, i as u64 * 1000)).unwrap();
            let target = if other == pi { 1.0 } else { 0.0 };
            assert!(rep.within(Complex64::new(target, 0.0), 3.5), "{:?} {:?}", other, rep);
        }
    }

    #[test]
    fn degenerate_probe_is_reported() {
        let psi = StateSpec::tracial(1, 3).unwrap();
        let zero = TensorOperand::Factored(vec![CMatrix::zeros(3, 3)]);
        assert!(matches!(
            randomized_coefficient_extract(&psi, &SetPartition::full(2), 10, RngStream::new(0, 0), Some(&zero)),
            Err(Error::ProbeFailure(_))
        ));
    }
}
