//! Exact-identity checks run by the `selftest` subcommand.

use num_complex::Complex64;
use num_rational::Rational64;
use serde::Serialize;

use crate::error::Result;
use crate::graph::LinearGraph;
use crate::haar::{haar_limit_injective, splitting_identity_check};
use crate::operand::{CMatrix, TensorOperand};
use crate::partition::{enumerate_partitions, mobius, SetPartition};
use crate::perm::{all_permutations, compose};
use crate::random::{sample_ginibre, sample_haar_unitary, RngStream};
use crate::repr::{cycle_factorization_check, leg_permutation, normalized_character, Signature};
use crate::trace::state::{decompose_invariant_state, LinearFunctional, StateSpec};
use crate::trace::{graph_trace, injective_from_plain, injective_graph_trace, plain_from_injective};
use crate::word::Letter;

#[derive(Clone, Debug, Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(name: &'static str, residual: f64, tolerance: f64) -> SelfCheck {
    SelfCheck { name, residual, tolerance, pass: residual <= tolerance }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

/// `Tr_{T₀^π} = Σ_{π′ ≥ π} Tr⁰_{T₀^{π′}}` over `P(4)`.
fn plain_vs_injective(stream: RngStream) -> Result<f64> {
    let mut rng = stream.rng();
    let parts = enumerate_partitions(4)?;
    let t0 = LinearGraph::minimal(2)?;
    let mut worst: f64 = 0.0;
    for n in [3, 4] {
        let a = TensorOperand::Factored(vec![sample_ginibre(n, &mut rng), sample_ginibre(n, &mut rng)]);
        let inj: Vec<Complex64> = parts
            .iter()
            .map(|p| injective_graph_trace(&t0.quotient(p)?, &a))
            .collect::<Result<_>>()?;
        for p in &parts {
            let plain = graph_trace(&t0.quotient(p)?, &a)?;
            let sum: Complex64 = parts.iter().zip(&inj).filter(|(q, _)| p.refines(q)).map(|(_, v)| v).sum();
            worst = worst.max(rel(sum, plain));
        }
    }
    Ok(worst)
}

/// Closed-form Möbius values against `μ(σ, π) = −Σ_{σ ≤ ρ < π} μ(σ, ρ)`.
fn mobius_recursion() -> Result<f64> {
    let mut bad = 0usize;
    for n in 1..=5 {
        let parts = enumerate_partitions(n)?;
        let bottom = SetPartition::discrete(n);
        let mut rec: Vec<i64> = Vec::with_capacity(parts.len());
        // finer partitions first so every strict refinement is already known
        let mut order: Vec<usize> = (0..parts.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(parts[i].block_count()));
        rec.resize(parts.len(), 0);
        for &i in &order {
            rec[i] = if parts[i].is_discrete() {
                1
            } else {
                -order
                    .iter()
                    .filter(|&&j| j != i && parts[j].refines(&parts[i]))
                    .map(|&j| rec[j])
                    .sum::<i64>()
            };
        }
        for (p, &r) in parts.iter().zip(&rec) {
            if mobius(&bottom, p)? != r {
                bad += 1;
            }
        }
    }
    Ok(bad as f64)
}

fn mobius_roundtrip(stream: RngStream) -> Result<f64> {
    use rand::Rng;
    let mut rng = stream.rng();
    let table: Vec<i64> = (0..15).map(|_| rng.random_range(-50..50)).collect();
    let back = plain_from_injective(4, &injective_from_plain(4, &table)?)?;
    Ok(table.iter().zip(&back).filter(|(a, b)| a != b).count() as f64)
}

fn splitting(stream: RngStream) -> Result<f64> {
    let mut rng = stream.rng();
    let g = LinearGraph::new(3, vec![(1, 0), (2, 1), (0, 2), (2, 0)])?;
    let b1 = TensorOperand::Factored(vec![sample_ginibre(4, &mut rng), sample_ginibre(4, &mut rng)]);
    let b2 = TensorOperand::Factored(vec![sample_ginibre(4, &mut rng), sample_ginibre(4, &mut rng)]);
    let rep = splitting_identity_check(&g, &[1, 1, 2, 2], &b1, &b2, None, stream.derive(1))?;
    Ok(rep.residual / (1.0 + rep.rhs.norm()))
}

fn decomposition(stream: RngStream) -> Result<f64> {
    let mut rng = stream.rng();
    let psi = StateSpec::max_entangled(2, 5)?;
    let dec = decompose_invariant_state(&psi)?;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let a = TensorOperand::Factored(vec![sample_ginibre(5, &mut rng), sample_ginibre(5, &mut rng)]);
        worst = worst.max(rel(dec.reconstruct(&a)?, psi.apply(&a)?));
    }
    Ok(worst)
}

fn factorization(stream: RngStream) -> Result<f64> {
    let mut rng = stream.rng();
    let mut worst: f64 = 0.0;
    for d in 1..=4 {
        for sigma in all_permutations(d) {
            let a = sample_ginibre(4, &mut rng);
            let c = cycle_factorization_check(&a, &sigma)?;
            worst = worst.max(c.residual / (1.0 + c.direct.norm()));
        }
    }
    Ok(worst)
}

fn leg_homomorphism() -> Result<f64> {
    let perms = all_permutations(3);
    let mut worst: f64 = 0.0;
    for s in &perms {
        for t in &perms {
            let lhs = leg_permutation(&compose(s, t), 2)?;
            let rhs = leg_permutation(s, 2)? * leg_permutation(t, 2)?;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

fn characters(stream: RngStream) -> Result<f64> {
    let mut rng = stream.rng();
    let u: CMatrix = sample_haar_unitary(6, &mut rng);
    let fundamental = normalized_character(&Signature::parse("1", "")?, &u)?;
    let unital = normalized_character(&"2,1;1".parse()?, &CMatrix::identity(6, 6))?;
    Ok(rel(fundamental, u.trace() / 6.0).max((unital - 1.0).norm()))
}

fn limits() -> Result<f64> {
    let u = Letter::plain(0);
    let s = Letter::star(0);
    let cases = [
        (LinearGraph::cycle(2)?, vec![u, s], 1),
        (LinearGraph::cycle(4)?, vec![u, s, u, s], -1),
        (LinearGraph::cycle(6)?, vec![u, s, u, s, u, s], 2),
        (LinearGraph::cycle(2)?, vec![u, u], 0),
    ];
    let mut bad = 0;
    for (g, labels, expect) in cases {
        if haar_limit_injective(&g, &labels)? != Rational64::from_integer(expect) {
            bad += 1;
        }
    }
    Ok(bad as f64)
}

/// Runs every check; all randomness derives from `seed`.
pub fn run_selftest(seed: u64) -> Result<Vec<SelfCheck>> {
    let root = RngStream::new(seed, 0);
    Ok(vec![
        check("plain_vs_injective_traces", plain_vs_injective(root.derive(1))?, 1e-10),
        check("mobius_recursion", mobius_recursion()?, 0.0),
        check("mobius_inversion_roundtrip", mobius_roundtrip(root.derive(2))?, 0.0),
        check("splitting_identity_exact", splitting(root.derive(3))?, 1e-9),
        check("state_decomposition", decomposition(root.derive(4))?, 1e-9),
        check("cycle_factorization", factorization(root.derive(5))?, 1e-10),
        check("leg_permutation_homomorphism", leg_homomorphism()?, 0.0),
        check("character_normalization", characters(root.derive(6))?, 1e-10),
        check("cactus_limits", limits()?, 0.0),
    ])
}
