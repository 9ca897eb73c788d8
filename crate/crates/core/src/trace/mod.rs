//! Graph traces `Tr_{N,T}` and injective traces `Tr⁰_{N,T}` of tensor operands.
//!
//! Entry convention: edge `(v, w)` (source `v`, target `w`) contributes
//! `A(φ(w), φ(v))`, row index from the target, column index from the source.

mod contract;
pub mod extract;
pub mod state;
pub mod witness;

use std::collections::HashMap;

use num_complex::Complex64;
use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::graph::LinearGraph;
use crate::invariants::leaf_count;
use crate::operand::{CMatrix, TensorOperand};
use crate::partition::{enumerate_partitions, mobius_from_discrete, mobius_unchecked, SetPartition};
use crate::perm::all_permutations;

pub use contract::{contraction_plan, ContractionPlan};

/// Largest vertex count for the Möbius-over-quotients route.
pub const MAX_MOBIUS_VERTICES: usize = 9;
/// Largest `N^{|V|}` for direct enumeration.
pub const MAX_NAIVE_TERMS: u64 = 50_000_000;

fn identity_slots(g: &LinearGraph, a: &TensorOperand) -> Result<Vec<usize>> {
    if g.order() != a.legs() {
        return Err(Error::invalid(format!(
            "graph of order {} needs an operand with {} legs, got {}",
            g.order(),
            g.order(),
            a.legs()
        )));
    }
    Ok((0..g.order()).collect())
}

fn check_slots(g: &LinearGraph, legs: usize, slots: &[usize]) -> Result<()> {
    if slots.len() != g.order() {
        return Err(Error::invalid(format!(
            "{} letters assigned for a graph of order {}",
            slots.len(),
            g.order()
        )));
    }
    if let Some(&s) = slots.iter().find(|&&s| s >= legs) {
        return Err(Error::invalid(format!("edge assigned factor {} but the operand has {} legs", s + 1, legs)));
    }
    Ok(())
}

fn dense_requires_identity(slots: &[usize]) -> Result<()> {
    if slots.iter().enumerate().any(|(k, &s)| k != s) {
        return Err(Error::invalid("dense operands only support the identity edge-to-leg assignment"));
    }
    Ok(())
}

/// `Tr_{N,T}(A)` with edge `k` carrying leg `k`.
pub fn graph_trace(g: &LinearGraph, a: &TensorOperand) -> Result<Complex64> {
    let slots = identity_slots(g, a)?;
    graph_trace_assigned(g, a, &slots)
}

/// `Tr_{N,T}` with edge `k` carrying leg `letter_of_edge[k]` of a factored operand.
pub fn graph_trace_assigned(g: &LinearGraph, a: &TensorOperand, letter_of_edge: &[usize]) -> Result<Complex64> {
    check_slots(g, a.legs(), letter_of_edge)?;
    match a.terms() {
        Some(terms) => {
            let plan = contraction_plan(g);
            let mut total = Complex64::new(0.0, 0.0);
            for (w, f) in terms {
                total += w * contract::contract(g, f, letter_of_edge, &plan)?;
            }
            Ok(total)
        }
        None => {
            dense_requires_identity(letter_of_edge)?;
            naive_sum(g, a, false)
        }
    }
}

/// `Tr_{N,T}` on bare matrices, `mats[letter_of_edge[k]]` on edge `k`.
pub fn graph_trace_factors(g: &LinearGraph, mats: &[CMatrix], letter_of_edge: &[usize]) -> Result<Complex64> {
    check_mats(mats)?;
    check_slots(g, mats.len(), letter_of_edge)?;
    contract::contract(g, mats, letter_of_edge, &contraction_plan(g))
}

fn check_mats(mats: &[CMatrix]) -> Result<()> {
    let Some(first) = mats.first() else {
        return Err(Error::invalid("no matrices given"));
    };
    let n = first.nrows();
    if mats.iter().any(|m| m.nrows() != n || m.ncols() != n) {
        return Err(Error::invalid("all matrices must be square of the same size"));
    }
    Ok(())
}

/// `Tr⁰_{N,T}(A)` with edge `k` carrying leg `k`.
pub fn injective_graph_trace(g: &LinearGraph, a: &TensorOperand) -> Result<Complex64> {
    let slots = identity_slots(g, a)?;
    injective_graph_trace_assigned(g, a, &slots)
}

pub fn injective_graph_trace_assigned(
    g: &LinearGraph,
    a: &TensorOperand,
    letter_of_edge: &[usize],
) -> Result<Complex64> {
    check_slots(g, a.legs(), letter_of_edge)?;
    if a.dim() < g.vertex_count() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    match a.terms() {
        Some(terms) => {
            let plan = InjectivePlan::new(g, letter_of_edge)?;
            let mut total = Complex64::new(0.0, 0.0);
            for (w, f) in terms {
                total += w * plan.evaluate(f)?;
            }
            Ok(total)
        }
        None => {
            dense_requires_identity(letter_of_edge)?;
            naive_sum(g, a, true)
        }
    }
}

/// One class of isomorphic quotients `T^π` with its summed Möbius weight.
#[derive(Clone, Debug)]
pub struct QuotientClass {
    pub graph: LinearGraph,
    pub coefficient: i64,
    pub multiplicity: usize,
    plan: ContractionPlan,
}

/// Precomputed Möbius expansion `Tr⁰_T = Σ_π μ(0̂, π) Tr_{T^π}`, with quotients that
/// are isomorphic as letter-labelled graphs merged into one evaluation.
#[derive(Clone, Debug)]
pub struct InjectivePlan {
    vertex_count: usize,
    slots: Vec<usize>,
    classes: Vec<QuotientClass>,
}

/// Quotients with at most this many vertices are merged up to full labelled isomorphism.
const LABELLED_ISO_MAX_VERTICES: usize = 6;

fn labelled_key(g: &LinearGraph, slots: &[usize], perms: &HashMap<usize, Vec<Vec<usize>>>) -> (usize, Vec<(usize, usize, usize)>) {
    let b = g.vertex_count();
    match perms.get(&b) {
        Some(all) => {
            let best = all
                .iter()
                .map(|p| {
                    let mut e: Vec<(usize, usize, usize)> =
                        g.edges().iter().zip(slots).map(|(&(s, t), &l)| (p[s], p[t], l)).collect();
                    e.sort_unstable();
                    e
                })
                .min()
                .unwrap_or_default();
            (b, best)
        }
        None => {
            let c = g.canonical_form();
            (b, c.edges().iter().zip(slots).map(|(&(s, t), &l)| (s, t, l)).collect())
        }
    }
}

impl InjectivePlan {
    pub fn new(g: &LinearGraph, letter_of_edge: &[usize]) -> Result<Self> {
        if letter_of_edge.len() != g.order() {
            return Err(Error::invalid("one letter per edge is required"));
        }
        let v = g.vertex_count();
        if v > MAX_MOBIUS_VERTICES {
            return Err(Error::limit(format!(
                "injective traces via quotients are limited to {} vertices, graph has {}",
                MAX_MOBIUS_VERTICES, v
            )));
        }
        if v == 0 {
            return Ok(InjectivePlan {
                vertex_count: 0,
                slots: letter_of_edge.to_vec(),
                classes: vec![QuotientClass {
                    graph: g.clone(),
                    coefficient: 1,
                    multiplicity: 1,
                    plan: contraction_plan(g),
                }],
            });
        }
        let perms: HashMap<usize, Vec<Vec<usize>>> = if v <= 8 {
            (1..=LABELLED_ISO_MAX_VERTICES.min(v)).map(|b| (b, all_permutations(b))).collect()
        } else {
            HashMap::new()
        };
        let mut index: HashMap<(usize, Vec<(usize, usize, usize)>), usize> = HashMap::new();
        let mut classes: Vec<QuotientClass> = Vec::new();
        for pi in enumerate_partitions(v)? {
            let q = g.quotient_unchecked(&pi);
            let key = labelled_key(&q, letter_of_edge, &perms);
            let mu = mobius_from_discrete(&pi);
            match index.get(&key) {
                Some(&i) => {
                    classes[i].coefficient += mu;
                    classes[i].multiplicity += 1;
                }
                None => {
                    index.insert(key, classes.len());
                    let plan = contraction_plan(&q);
                    classes.push(QuotientClass { graph: q, coefficient: mu, multiplicity: 1, plan });
                }
            }
        }
        classes.retain(|c| c.coefficient != 0);
        Ok(InjectivePlan { vertex_count: v, slots: letter_of_edge.to_vec(), classes })
    }

    pub fn classes(&self) -> &[QuotientClass] {
        &self.classes
    }

    /// `Tr⁰_{N,T}` on `mats` (indexed by letter).
    pub fn evaluate(&self, mats: &[CMatrix]) -> Result<Complex64> {
        check_mats(mats)?;
        if let Some(&s) = self.slots.iter().find(|&&s| s >= mats.len()) {
            return Err(Error::invalid(format!("letter {} has no matrix", s + 1)));
        }
        if mats[0].nrows() < self.vertex_count {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for c in &self.classes {
            total += contract::contract(&c.graph, mats, &self.slots, &c.plan)? * c.coefficient as f64;
        }
        Ok(total)
    }
}

fn naive_terms(n: usize, v: usize) -> Result<u64> {
    (n as u64)
        .checked_pow(v as u32)
        .filter(|&t| t <= MAX_NAIVE_TERMS)
        .ok_or_else(|| Error::limit(format!("direct summation over N^|V| = {}^{} labelings", n, v)))
}

fn naive_sum(g: &LinearGraph, a: &TensorOperand, injective: bool) -> Result<Complex64> {
    let n = a.dim();
    let v = g.vertex_count();
    let total = naive_terms(n, v)?;
    let mut phi = vec![0usize; v];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut rows = vec![0; g.order()];
    let mut cols = vec![0; g.order()];
    let mut seen = vec![false; n];
    for _ in 0..total {
        let ok = !injective || {
            seen.iter_mut().for_each(|s| *s = false);
            phi.iter().all(|&x| !std::mem::replace(&mut seen[x], true))
        };
        if ok {
            for (k, &(s, t)) in g.edges().iter().enumerate() {
                rows[k] = phi[t];
                cols[k] = phi[s];
            }
            sum += a.entry(&rows, &cols);
        }
        for p in (0..v).rev() {
            phi[p] += 1;
            if phi[p] < n {
                break;
            }
            phi[p] = 0;
        }
    }
    Ok(sum)
}

/// Reference `Tr_{N,T}` by summing over every labeling (operand legs = edges).
pub fn naive_graph_trace(g: &LinearGraph, a: &TensorOperand) -> Result<Complex64> {
    identity_slots(g, a)?;
    naive_sum(g, a, false)
}

/// Reference `Tr⁰_{N,T}` by summing over every injective labeling.
pub fn naive_injective_trace(g: &LinearGraph, a: &TensorOperand) -> Result<Complex64> {
    identity_slots(g, a)?;
    naive_sum(g, a, true)
}

/// `N^{−c(T)} Tr_{N,T}(A)`.
pub fn zeta_trace(g: &LinearGraph, a: &TensorOperand) -> Result<Complex64> {
    let c = g.component_count() as i32;
    Ok(graph_trace(g, a)? * (a.dim() as f64).powi(-c))
}

/// `N^{−𝔏(T)/2} Tr_{N,T}(A)`.
pub fn tau_trace(g: &LinearGraph, a: &TensorOperand) -> Result<Complex64> {
    let l = leaf_count(g) as f64;
    Ok(graph_trace(g, a)? * (a.dim() as f64).powf(-l / 2.0))
}

/// Scalars the Möbius conversions between trace tables can run on.
pub trait MobiusScalar: Copy + std::ops::Add<Output = Self> + std::ops::Mul<Output = Self> {
    fn zero() -> Self;
    fn from_i64(x: i64) -> Self;
}

impl MobiusScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
}

impl MobiusScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_i64(x: i64) -> Self {
        Complex64::new(x as f64, 0.0)
    }
}

impl MobiusScalar for Rational64 {
    fn zero() -> Self {
        Rational64::from_integer(0)
    }
    fn from_i64(x: i64) -> Self {
        Rational64::from_integer(x)
    }
}

impl MobiusScalar for i64 {
    fn zero() -> Self {
        0
    }
    fn from_i64(x: i64) -> Self {
        x
    }
}

fn check_table<T>(parts: &[SetPartition], table: &[T]) -> Result<()> {
    if parts.len() != table.len() {
        return Err(Error::invalid(format!(
            "table has {} entries, the lattice has {}",
            table.len(),
            parts.len()
        )));
    }
    Ok(())
}

/// From `π ↦ Tr_{T₀^π}` to `π ↦ Tr⁰_{T₀^π}`: `Tr⁰_π = Σ_{π′≥π} μ(π, π′) Tr_{π′}`.
/// Tables are indexed like [`enumerate_partitions`]`(n)`.
pub fn injective_from_plain<T: MobiusScalar>(n: usize, plain: &[T]) -> Result<Vec<T>> {
    let parts = enumerate_partitions(n)?;
    check_table(&parts, plain)?;
    Ok(parts
        .iter()
        .map(|p| {
            parts.iter().zip(plain).fold(T::zero(), |acc, (q, &v)| {
                if p.refines(q) {
                    acc + T::from_i64(mobius_unchecked(p, q)) * v
                } else {
                    acc
                }
            })
        })
        .collect())
}

/// From `π ↦ Tr⁰_{T₀^π}` to `π ↦ Tr_{T₀^π} = Σ_{π′≥π} Tr⁰_{π′}`.
pub fn plain_from_injective<T: MobiusScalar>(n: usize, injective: &[T]) -> Result<Vec<T>> {
    let parts = enumerate_partitions(n)?;
    check_table(&parts, injective)?;
    Ok(parts
        .iter()
        .map(|p| {
            parts
                .iter()
                .zip(injective)
                .fold(T::zero(), |acc, (q, &v)| if p.refines(q) { acc + v } else { acc })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn convention_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(4, &mut rng);
        let op = TensorOperand::factored(vec![a.clone()]).unwrap();
        let loop1 = LinearGraph::loops(1);
        assert!(close(graph_trace(&loop1, &op).unwrap(), a.trace(), 1e-12));
        let edge = LinearGraph::minimal(1).unwrap();
        let all: Complex64 = a.iter().sum();
        assert!(close(graph_trace(&edge, &op).unwrap(), all, 1e-12));
        assert!(close(injective_graph_trace(&edge, &op).unwrap(), all - a.trace(), 1e-12));
        assert!(close(injective_graph_trace(&loop1, &op).unwrap(), a.trace(), 1e-12));

        let b = random_matrix(4, &mut rng);
        let path = LinearGraph::path(2);
        let two = TensorOperand::factored(vec![a.clone(), b.clone()]).unwrap();
        let prod: Complex64 = (&a * &b).iter().sum();
        assert!(close(graph_trace(&path, &two).unwrap(), prod, 1e-12));
        let cyc = LinearGraph::cycle(2).unwrap();
        assert!(close(graph_trace(&cyc, &two).unwrap(), (&a * &b).trace(), 1e-12));
    }

    #[test]
    fn isolated_vertices_multiply_by_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(3, &mut rng);
        let op = TensorOperand::factored(vec![a.clone()]).unwrap();
        let g = LinearGraph::new(3, vec![(0, 0)]).unwrap();
        assert!(close(graph_trace(&g, &op).unwrap(), a.trace() * 9.0, 1e-12));
        // injective: the two extra vertices avoid the loop vertex and each other
        assert!(close(injective_graph_trace(&g, &op).unwrap(), a.trace() * 2.0, 1e-12));
    }

    #[test]
    fn plan_matches_naive_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let v = rng.random_range(1..=5);
            let m = rng.random_range(1..=5);
            let edges = (0..m).map(|_| (rng.random_range(0..v), rng.random_range(0..v))).collect();
            let g = LinearGraph::new(v, edges).unwrap();
            let op = TensorOperand::factored((0..m).map(|_| random_matrix(3, &mut rng)).collect()).unwrap();
            let fast = graph_trace(&g, &op).unwrap();
            let slow = naive_graph_trace(&g, &op).unwrap();
            assert!(close(fast, slow, 1e-10), "{:?}", g);
            let fast0 = injective_graph_trace(&g, &op).unwrap();
            let slow0 = naive_injective_trace(&g, &op).unwrap();
            assert!(close(fast0, slow0, 1e-10), "{:?}", g);
        }
    }

    #[test]
    fn dense_and_sum_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t0 = LinearGraph::minimal(2).unwrap();
        let f1: Vec<CMatrix> = (0..2).map(|_| random_matrix(3, &mut rng)).collect();
        let f2: Vec<CMatrix> = (0..2).map(|_| random_matrix(3, &mut rng)).collect();
        let sum = TensorOperand::sum(vec![(Complex64::new(0.5, 0.0), f1), (Complex64::new(0.0, 2.0), f2)]).unwrap();
        let dense = TensorOperand::dense(3, 2, sum.to_dense().unwrap()).unwrap();
        for pi in enumerate_partitions(4).unwrap() {
            let q = t0.quotient(&pi).unwrap();
            assert!(close(graph_trace(&q, &sum).unwrap(), graph_trace(&q, &dense).unwrap(), 1e-10));
            assert!(close(
                injective_graph_trace(&q, &sum).unwrap(),
                injective_graph_trace(&q, &dense).unwrap(),
                1e-10
            ));
        }
    }

    #[test]
    fn assigned_letters_reuse_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_matrix(4, &mut rng);
        let op = TensorOperand::factored(vec![u.clone()]).unwrap();
        let cyc = LinearGraph::cycle(3).unwrap();
        let v = graph_trace_assigned(&cyc, &op, &[0, 0, 0]).unwrap();
        assert!(close(v, (&u * &u * &u).trace(), 1e-12));
        assert!(graph_trace_assigned(&cyc, &op, &[0, 1, 0]).is_err());
        assert!(graph_trace(&cyc, &op).is_err());
    }

    #[test]
    fn small_n_injective_vanishes() {
        let op = TensorOperand::identity(2, 3);
        let g = LinearGraph::minimal(3).unwrap();
        assert_eq!(injective_graph_trace(&g, &op).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zeta_tau_examples() {
        let n = 5;
        let id = TensorOperand::identity(n, 1);
        let loop1 = LinearGraph::loops(1);
        assert!(close(zeta_trace(&loop1, &id).unwrap(), Complex64::new(1.0, 0.0), 1e-12));
        assert!(close(tau_trace(&loop1, &id).unwrap(), Complex64::new(1.0, 0.0), 1e-12));
        let j = TensorOperand::factored(vec![CMatrix::from_element(n, n, Complex64::new(1.0 / n as f64, 0.0))]).unwrap();
        let edge = LinearGraph::minimal(1).unwrap();
        assert!(close(zeta_trace(&edge, &j).unwrap(), Complex64::new(1.0, 0.0), 1e-12));
    }

    #[test]
    fn mobius_roundtrip_exact() {
        for k in 1..=2 {
            let n = 2 * k;
            let parts = enumerate_partitions(n).unwrap();
            let table: Vec<Rational64> =
                (0..parts.len()).map(|i| Rational64::from_integer((i as i64 * 7919) % 23 - 11)).collect();
            let inj = injective_from_plain(n, &table).unwrap();
            assert_eq!(plain_from_injective(n, &inj).unwrap(), table);
            assert_eq!(injective_from_plain(n, &plain_from_injective(n, &table).unwrap()).unwrap(), table);
        }
    }

    #[test]
    fn plan_merges_isomorphic_quotients() {
        let g = LinearGraph::cycle(4).unwrap();
        let plan = InjectivePlan::new(&g, &[0, 1, 0, 1]).unwrap();
        let total: usize = plan.classes().iter().map(|c| c.multiplicity).sum();
        assert!(total <= 15);
        assert!(plan.classes().len() < 15);
    }
}
