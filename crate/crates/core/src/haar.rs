//! Linearization of a *-monomial against a base graph, the colored splitting of its
//! quotients, the limit of injective traces of Haar unitaries, and the quotient ledger
//! behind the freeness-limit prediction.

use std::collections::HashMap;

use num_complex::Complex64;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::LinearGraph;
use crate::invariants::{cactus_cycles, colored_subgraphs, eta, leaf_count, validity, Validity};
use crate::operand::{CMatrix, TensorOperand};
use crate::partition::{enumerate_partitions, SetPartition};
use crate::perm::all_permutations;
use crate::random::{
    permutation_matrix, sample_haar_unitary, sample_permutation, sample_values, MCReport, RngStream,
};
use crate::trace::{injective_graph_trace_assigned, InjectivePlan};
use crate::word::{Letter, StarWord};

/// Largest `|V(T_M)|` whose quotients are enumerated.
pub const MAX_PREDICT_VERTICES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockTag {
    /// `U_ℓ` legs.
    U,
    /// `U_ℓ^t` legs (reversed paths).
    T,
    /// `V_ℓ` legs.
    V,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeMeta {
    /// 0-based base edge `k` (in the doubled graph, `K + k` for the adjoint copy).
    pub base_edge: usize,
    /// 0-based position `i` in the word.
    pub position: usize,
    pub block: BlockTag,
    pub letter: Letter,
}

#[derive(Clone, Debug)]
pub struct LinearizationResult {
    pub graph: LinearGraph,
    pub edge_meta: Vec<EdgeMeta>,
    pub k1: usize,
    pub k2: usize,
    pub k3: usize,
    /// Word length `p`.
    pub p: usize,
}

impl LinearizationResult {
    /// `1` for `U`/`T` edges, `2` for `V` edges.
    pub fn colors(&self) -> Vec<u8> {
        self.edge_meta.iter().map(|m| if m.block == BlockTag::V { 2 } else { 1 }).collect()
    }

    pub fn letters(&self) -> Vec<Letter> {
        self.edge_meta.iter().map(|m| m.letter).collect()
    }

    /// `T_M ⊔ T_M^*`: the adjoint copy reverses every edge and flips every star,
    /// so that its graph trace is the complex conjugate.
    pub fn doubled(&self) -> LinearizationResult {
        let k = self.k1 + self.k2 + self.k3;
        let graph = self.graph.disjoint_union(&self.graph.adjoint());
        let mut edge_meta = self.edge_meta.clone();
        edge_meta.extend(self.edge_meta.iter().map(|m| EdgeMeta {
            base_edge: k + m.base_edge,
            letter: m.letter.inverse(),
            ..*m
        }));
        LinearizationResult { graph, edge_meta, ..*self }
    }
}

/// Replaces base edge `k = (v_k → w_k)` by a `p`-path through fresh vertices
/// `x_0 = w_k, x_1, …, x_{p−1}, x_p = v_k`: edge `(k, i)` runs `x_i → x_{i−1}` on
/// `U` and `V` blocks and `x_{i−1} → x_i` on `T` blocks, and carries letter `i`.
pub fn linearize(t: &LinearGraph, m: &StarWord, k1: usize, k2: usize, k3: usize) -> Result<LinearizationResult> {
    if k1 == 0 {
        return Err(Error::invalid("K1 must be at least 1"));
    }
    if k1 + k2 + k3 != t.order() {
        return Err(Error::invalid(format!(
            "blocks {}+{}+{} do not add up to the order {} of the graph",
            k1,
            k2,
            k3,
            t.order()
        )));
    }
    let p = m.len();
    if p == 0 {
        return Err(Error::invalid("the word must have at least one letter"));
    }
    let base = t.vertex_count();
    let mut edges = Vec::with_capacity(t.order() * p);
    let mut edge_meta = Vec::with_capacity(t.order() * p);
    for (k, &(v, w)) in t.edges().iter().enumerate() {
        let block = if k < k1 {
            BlockTag::U
        } else if k < k1 + k2 {
            BlockTag::T
        } else {
            BlockTag::V
        };
        let x = |i: usize| {
            if i == 0 {
                w
            } else if i == p {
                v
            } else {
                base + k * (p - 1) + (i - 1)
            }
        };
        for (i, &letter) in m.letters().iter().enumerate() {
            let i = i + 1;
            edges.push(if block == BlockTag::T { (x(i - 1), x(i)) } else { (x(i), x(i - 1)) });
            edge_meta.push(EdgeMeta { base_edge: k, position: i - 1, block, letter });
        }
    }
    let graph = LinearGraph::new(base + t.order() * (p - 1), edges)?;
    Ok(LinearizationResult { graph, edge_meta, k1, k2, k3, p })
}

/// `(T₁, T₂)` on the full vertex set of `t_prime`, with the letters of `T₁`'s edges.
pub fn split_graphs(t_prime: &LinearGraph, meta: &[EdgeMeta]) -> Result<(LinearGraph, LinearGraph, Vec<Letter>)> {
    if meta.len() != t_prime.order() {
        return Err(Error::invalid("edge metadata does not match the graph order"));
    }
    let colors: Vec<u8> = meta.iter().map(|m| if m.block == BlockTag::V { 2 } else { 1 }).collect();
    let (t1, t2) = colored_subgraphs(t_prime, &colors)?;
    let letters = meta.iter().filter(|m| m.block != BlockTag::V).map(|m| m.letter).collect();
    Ok((t1, t2, letters))
}

/// `(−1)^{k−1} (2k−2)! / ((k−1)! k!)`, i.e. a signed Catalan number.
pub fn cycle_coefficient(k: usize) -> Result<i64> {
    if k == 0 {
        return Err(Error::invalid("cycles have positive half-length"));
    }
    // C_{k−1} = binom(2k−2, k−1) / k
    let n = k - 1;
    let mut c: i128 = 1;
    for j in 0..n as i128 {
        c = c * (2 * n as i128 - j) / (j + 1);
    }
    c /= k as i128;
    let c = i64::try_from(c).map_err(|_| Error::Numerical(format!("cycle coefficient overflows for k = {}", k)))?;
    Ok(if n % 2 == 0 { c } else { -c })
}

/// `lim N^{−c(T)} E[Tr⁰_{N,T}(U_{δ(1)}^{ε(1)} ⊗ ⋯)]` for independent Haar unitaries.
pub fn haar_limit_injective(g: &LinearGraph, labels: &[Letter]) -> Result<Rational64> {
    if validity(g, labels)? != Validity::Valid {
        return Ok(Rational64::from_integer(0));
    }
    let cycles = cactus_cycles(g).expect("valid graphs are cacti");
    let mut value: i64 = 1;
    for c in cycles {
        value = value
            .checked_mul(cycle_coefficient(c.len() / 2)?)
            .ok_or_else(|| Error::Numerical("limit overflows i64".into()))?;
    }
    Ok(Rational64::from_integer(value))
}

/// Distinct `(letter, star)` pairs get their own slot; returns the slot of every edge
/// and the letters behind the slots.
fn letter_slots(labels: &[Letter]) -> (Vec<usize>, Vec<Letter>) {
    let mut slots: Vec<Letter> = Vec::new();
    let of_edge = labels
        .iter()
        .map(|l| match slots.iter().position(|s| s == l) {
            Some(p) => p,
            None => {
                slots.push(*l);
                slots.len() - 1
            }
        })
        .collect();
    (of_edge, slots)
}

/// Monte-Carlo estimate of `N^{−c(T)} E[Tr⁰_{N,T}(U^ε ⊗ ⋯)]`.
pub fn haar_injective_mc(g: &LinearGraph, labels: &[Letter], n: usize, samples: usize, stream: RngStream) -> Result<MCReport> {
    if labels.len() != g.order() {
        return Err(Error::invalid("one label per edge is required"));
    }
    if samples < 2 {
        return Err(Error::invalid("Monte-Carlo runs need at least 2 samples"));
    }
    let (of_edge, slots) = letter_slots(labels);
    let letters = labels.iter().map(|l| l.index + 1).max().unwrap_or(0);
    let plan = InjectivePlan::new(g, &of_edge)?;
    let scale = (n as f64).powi(-(g.component_count() as i32));
    let (values, secs) = sample_values(samples, stream, |rng| {
        let us: Vec<CMatrix> = (0..letters).map(|_| sample_haar_unitary(n, rng)).collect();
        let mats: Vec<CMatrix> =
            slots.iter().map(|l| if l.star { us[l.index].adjoint() } else { us[l.index].clone() }).collect();
        Ok(plan.evaluate(&mats)? * scale)
    })?;
    Ok(MCReport::from_samples(n, &values, secs))
}

#[derive(Clone, Debug, Serialize)]
pub struct SplittingReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub vertices: usize,
    /// `E[Tr⁰_{T′}(B₁ ⊗ B₂)]` (exact average or Monte-Carlo mean).
    pub lhs: Complex64,
    /// `(N−|V′|)!/N! · Tr⁰_{T₁}(B₁) · Tr⁰_{T₂}(B₂)`.
    pub rhs: Complex64,
    pub residual: f64,
    /// Monte-Carlo error of `lhs − rhs`; zero on the exact path.
    pub stderr: f64,
    pub exact: bool,
    /// `N < |V′|`: both sides vanish.
    pub degenerate: bool,
}

fn falling_ratio(n: usize, v: usize) -> f64 {
    // (N−v)!/N!
    (0..v).map(|j| 1.0 / (n - j) as f64).product()
}

/// Checks `E[Tr⁰_{T′}(B₁ ⊗ B₂)] = (N−|V′|)!/N! · Tr⁰_{T₁}(B₁) · E[Tr⁰_{T₂}(B₂)]` where
/// `B₂` is made `S_N`-invariant by conjugation with a uniform permutation: averaged over
/// all of `S_N` when `samples` is `None` (`N ≤ 5`), sampled otherwise.
///
/// Edges with `color[k] == 1` take the legs of `B₁` in order, the others those of `B₂`.
pub fn splitting_identity_check(
    t_prime: &LinearGraph,
    color: &[u8],
    b1: &TensorOperand,
    b2: &TensorOperand,
    samples: Option<usize>,
    stream: RngStream,
) -> Result<SplittingReport> {
    let (t1, t2) = colored_subgraphs(t_prime, color)?;
    if b1.legs() != t1.order() || b2.legs() != t2.order() {
        return Err(Error::invalid(format!(
            "operands have {} and {} legs, the colored subgraphs need {} and {}",
            b1.legs(),
            b2.legs(),
            t1.order(),
            t2.order()
        )));
    }
    if b1.dim() != b2.dim() {
        return Err(Error::invalid("operands must share N"));
    }
    let n = b1.dim();
    let v = t_prime.vertex_count();
    let zero = Complex64::new(0.0, 0.0);
    if n < v {
        return Ok(SplittingReport { n, vertices: v, lhs: zero, rhs: zero, residual: 0.0, stderr: 0.0, exact: true, degenerate: true });
    }
    let mut slots = Vec::with_capacity(color.len());
    let (mut i1, mut i2) = (0, b1.legs());
    for &c in color {
        if c == 1 {
            slots.push(i1);
            i1 += 1;
        } else {
            slots.push(i2);
            i2 += 1;
        }
    }
    let rhs = falling_ratio(n, v)
        * crate::trace::injective_graph_trace(&t1, b1)?
        * crate::trace::injective_graph_trace(&t2, b2)?;
    let conjugated = |p: &[usize]| -> Result<Complex64> {
        let g = permutation_matrix(p);
        let gs = g.adjoint();
        let b2g = match b2.terms() {
            Some(terms) => TensorOperand::sum(
                terms.into_iter().map(|(w, f)| (w, f.iter().map(|a| &g * a * &gs).collect())).collect(),
            )?,
            None => {
                let big = crate::operand::kron_all(&vec![g.clone(); b2.legs()]);
                TensorOperand::dense(n, b2.legs(), &big * b2.to_dense()? * big.adjoint())?
            }
        };
        injective_graph_trace_assigned(t_prime, &b1.tensor(&b2g)?, &slots)
    };
    match samples {
        None => {
            if n > crate::random::symmetrize::MAX_EXACT_SYMMETRIC {
                return Err(Error::limit(format!(
                    "exact averaging over S_N is limited to N <= {}",
                    crate::random::symmetrize::MAX_EXACT_SYMMETRIC
                )));
            }
            let perms = all_permutations(n);
            let mut total = zero;
            for p in &perms {
                total += conjugated(p)?;
            }
            let lhs = total / perms.len() as f64;
            Ok(SplittingReport { n, vertices: v, lhs, rhs, residual: (lhs - rhs).norm(), stderr: 0.0, exact: true, degenerate: false })
        }
        Some(s) => {
            let (values, secs) = sample_values(s, stream, |rng| Ok(conjugated(&sample_permutation(n, rng))? - rhs))?;
            let rep = MCReport::from_samples(n, &values, secs);
            Ok(SplittingReport {
                n,
                vertices: v,
                lhs: rep.estimate + rhs,
                rhs,
                residual: rep.estimate.norm(),
                stderr: rep.stderr,
                exact: false,
                degenerate: false,
            })
        }
    }
}

fn ratio_string<S: Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// Every quotient term is `o(1)` after normalization.
    Vanishes,
    /// Some quotient has `η = 0` with a valid `T₁`; the ledger does not decide.
    Inconclusive,
}

/// Subgroup of the free group generated by `M` and `M_mirr`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MirrorGroup {
    /// `M` and `M_mirr` commute (then `M_mirr = M`): infinite cyclic.
    Cyclic,
    /// They do not commute: free of rank 2.
    FreeRank2,
}

/// Two elements of a free group commute iff their commutator reduces to 1; a
/// 2-generated subgroup is free (Nielsen–Schreier), so it is ℤ or `F₂`.
pub fn mirror_group(m: &StarWord) -> Result<MirrorGroup> {
    if m.is_trivial() {
        return Err(Error::invalid("the word reduces to the identity"));
    }
    let a = m.free_reduce();
    let b = a.mirror();
    let comm = a.concat(&b).concat(&a.inverse()).concat(&b.inverse());
    Ok(if comm.is_trivial() { MirrorGroup::Cyclic } else { MirrorGroup::FreeRank2 })
}

#[derive(Clone, Debug, Serialize)]
pub struct CircuitWord {
    /// Read in matrix-product order.
    pub word: String,
    pub trivial: bool,
    /// Some rotation of the circuit spells a product of copies of `M` and `M_mirr`.
    pub composed_of_paths: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LeafCounts {
    pub quotient: usize,
    pub t1: usize,
    pub t2: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientEntry {
    /// Lowest partition (in enumeration order) producing this quotient.
    pub partition: SetPartition,
    /// Number of partitions producing the same quotient.
    pub multiplicity: usize,
    #[serde(serialize_with = "ratio_string")]
    pub eta: Rational64,
    /// Validity of `(T₁, δ, ε)`.
    pub valid: bool,
    pub validity: Validity,
    pub leaf_counts: LeafCounts,
    /// Directed circuits of the components of `T₁` whose vertices are balanced.
    pub circuits: Vec<CircuitWord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub word: String,
    pub blocks: [usize; 3],
    pub variance: bool,
    pub mirror_group: MirrorGroup,
    pub vertices: usize,
    /// `𝔏` of the linearized (for the variance, doubled) graph.
    pub base_leaves: usize,
    pub max_eta: String,
    pub partitions_enumerated: usize,
    pub quotients: Vec<QuotientEntry>,
}

impl Certificate {
    /// `η ≤ 0` everywhere and no entry with `η = 0` and valid `T₁`.
    pub fn ledger_consistent(&self) -> bool {
        self.quotients.iter().all(|q| q.eta <= Rational64::from_integer(0))
            && !self.quotients.iter().any(|q| q.eta == Rational64::from_integer(0) && q.valid)
    }
}

/// Directed circuits (Hierholzer) of the components of `g` in which every vertex
/// has equal in- and out-degree; each is returned in orientation order.
fn balanced_circuits(g: &LinearGraph) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for (verts, edges) in g.components() {
        if edges.is_empty() {
            continue;
        }
        let balanced = verts.iter().all(|&v| {
            let outd = edges.iter().filter(|&&k| g.edge(k).0 == v).count();
            let ind = edges.iter().filter(|&&k| g.edge(k).1 == v).count();
            outd == ind
        });
        if !balanced {
            continue;
        }
        let mut used = vec![false; g.order()];
        let start = g.edge(edges[0]).0;
        let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
        let mut circuit = Vec::with_capacity(edges.len());
        while let Some(&(v, via)) = stack.last() {
            match edges.iter().find(|&&k| !used[k] && g.edge(k).0 == v) {
                Some(&k) => {
                    used[k] = true;
                    stack.push((g.edge(k).1, Some(k)));
                }
                None => {
                    stack.pop();
                    if let Some(k) = via {
                        circuit.push(k);
                    }
                }
            }
        }
        circuit.reverse();
        out.push(circuit);
    }
    out
}

fn is_product_of(word: &[Letter], pieces: &[&[Letter]]) -> bool {
    let n = word.len();
    let mut ok = vec![false; n + 1];
    ok[0] = true;
    for i in 0..n {
        if !ok[i] {
            continue;
        }
        for p in pieces {
            if !p.is_empty() && i + p.len() <= n && &word[i..i + p.len()] == *p {
                ok[i + p.len()] = true;
            }
        }
    }
    ok[n]
}

fn circuit_word(circuit: &[usize], letters: &[Letter], m: &StarWord) -> CircuitWord {
    let w: Vec<Letter> = circuit.iter().rev().map(|&k| letters[k]).collect();
    let word = StarWord::new(w.clone());
    let mirr = m.mirror();
    let pieces = [m.letters(), mirr.letters()];
    let composed = (0..w.len()).any(|r| {
        let rotated: Vec<Letter> = w[r..].iter().chain(&w[..r]).copied().collect();
        is_product_of(&rotated, &pieces)
    });
    CircuitWord { word: word.to_string(), trivial: word.is_trivial(), composed_of_paths: composed }
}

fn ledger_entry(
    q: &LinearGraph,
    lin: &LinearizationResult,
    m: &StarWord,
    partition: SetPartition,
    multiplicity: usize,
) -> Result<QuotientEntry> {
    let colors = lin.colors();
    let e = eta(q, &colors)?;
    let (t1, t2, letters) = split_graphs(q, &lin.edge_meta)?;
    let v = validity(&t1, &letters)?;
    let circuits = balanced_circuits(&t1).iter().map(|c| circuit_word(c, &letters, m)).collect();
    Ok(QuotientEntry {
        partition,
        multiplicity,
        eta: e,
        valid: v.is_valid(),
        validity: v,
        leaf_counts: LeafCounts { quotient: leaf_count(q), t1: leaf_count(&t1), t2: leaf_count(&t2) },
        circuits,
    })
}

/// Enumerates every quotient `T′ ≥ T_M` (or of `T_M ⊔ T_M^*` with `variance`), records
/// `η(T′)`, the validity of `(T₁, δ, ε)` and the words of the directed circuits of `T₁`,
/// and concludes `VANISHES` when no quotient has `η = 0` together with a valid `T₁`.
pub fn predict_freeness_limit(
    m: &StarWord,
    t: &LinearGraph,
    k1: usize,
    k2: usize,
    k3: usize,
    variance: bool,
) -> Result<Certificate> {
    let mirror = mirror_group(m)?;
    let lin = linearize(t, m, k1, k2, k3)?;
    let lin = if variance { lin.doubled() } else { lin };
    let v = lin.graph.vertex_count();
    if v > MAX_PREDICT_VERTICES {
        return Err(Error::limit(format!(
            "the linearized graph has {} vertices; quotient enumeration is limited to {}",
            v, MAX_PREDICT_VERTICES
        )));
    }
    let partitions = enumerate_partitions(v)?;
    let forms: Vec<LinearGraph> = partitions
        .par_iter()
        .map(|pi| lin.graph.quotient(pi).map(|q| q.canonical_form()))
        .collect::<Result<_>>()?;
    let mut index: HashMap<&LinearGraph, usize> = HashMap::new();
    let mut firsts: Vec<(usize, usize)> = Vec::new();
    for (i, f) in forms.iter().enumerate() {
        match index.get(f) {
            Some(&j) => firsts[j].1 += 1,
            None => {
                index.insert(f, firsts.len());
                firsts.push((i, 1));
            }
        }
    }
    let quotients: Vec<QuotientEntry> = firsts
        .par_iter()
        .map(|&(i, mult)| ledger_entry(&forms[i], &lin, m, partitions[i].clone(), mult))
        .collect::<Result<_>>()?;
    let zero = Rational64::from_integer(0);
    let max_eta = quotients.iter().map(|q| q.eta).max().unwrap_or(zero);
    let blocked = quotients.iter().any(|q| q.eta == zero && q.valid);
    Ok(Certificate {
        verdict: if blocked { Verdict::Inconclusive } else { Verdict::Vanishes },
        word: m.to_string(),
        blocks: [k1, k2, k3],
        variance,
        mirror_group: mirror,
        vertices: v,
        base_leaves: leaf_count(&lin.graph),
        max_eta: max_eta.to_string(),
        partitions_enumerated: partitions.len(),
        quotients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LinearGraph;
    use crate::trace::graph_trace_assigned;

    fn w(s: &str) -> StarWord {
        s.parse().unwrap()
    }

    #[test]
    fn linearize_shapes() {
        let t = LinearGraph::minimal(3).unwrap();
        let lin = linearize(&t, &w("1,2,1*"), 1, 1, 1).unwrap();
        assert_eq!(lin.graph.order(), 9);
        assert_eq!(lin.graph.vertex_count(), 6 + 3 * 2);
        let one = linearize(&t, &w("2"), 2, 0, 1).unwrap();
        assert_eq!(one.graph, t);
        let lp = linearize(&LinearGraph::loops(1), &w("1,2"), 1, 0, 0).unwrap();
        assert!(lp.graph.is_isomorphic(&LinearGraph::cycle(2).unwrap()));
        assert!(linearize(&t, &w("1"), 1, 1, 0).is_err());
        assert!(linearize(&t, &w("1"), 0, 2, 1).is_err());
    }

    #[test]
    fn linearization_reproduces_the_word() {
        // Tr_T(M(U) ⊗ M(U)^t-leg ⊗ M(V)) against Tr_{T_M}(letters).
        let mut rng = RngStream::new(4, 0).rng();
        let n = 3;
        let m = w("1,2*,1");
        let t = LinearGraph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let us: Vec<CMatrix> = (0..2).map(|_| sample_haar_unitary(n, &mut rng)).collect();
        let vs: Vec<CMatrix> = (0..2).map(|_| sample_haar_unitary(n, &mut rng)).collect();
        let word = |fam: &[CMatrix]| {
            m.letters().iter().fold(CMatrix::identity(n, n), |acc, l| {
                if l.star { acc * fam[l.index].adjoint() } else { acc * &fam[l.index] }
            })
        };
        let mu = word(&us);
        let direct = crate::trace::graph_trace(&t, &TensorOperand::Factored(vec![mu.clone(), mu.transpose(), word(&vs)])).unwrap();
        let lin = linearize(&t, &m, 1, 1, 1).unwrap();
        let mut mats = Vec::new();
        let mut slots = Vec::new();
        for meta in &lin.edge_meta {
            let fam = if meta.block == BlockTag::V { &vs } else { &us };
            let x = &fam[meta.letter.index];
            slots.push(mats.len());
            mats.push(if meta.letter.star { x.adjoint() } else { x.clone() });
        }
        let lin_value = graph_trace_assigned(&lin.graph, &TensorOperand::Factored(mats), &slots).unwrap();
        assert!((direct - lin_value).norm() < 1e-10, "{} vs {}", direct, lin_value);
    }

    #[test]
    fn split_orders_and_union() {
        let t = LinearGraph::minimal(3).unwrap();
        let lin = linearize(&t, &w("1,2"), 1, 1, 1).unwrap();
        let (t1, t2, letters) = split_graphs(&lin.graph, &lin.edge_meta).unwrap();
        assert_eq!((t1.order(), t2.order()), (4, 2));
        assert_eq!(letters.len(), 4);
        assert_eq!(t1.vertex_count(), lin.graph.vertex_count());
        let mut all: Vec<(usize, usize)> = t1.edges().to_vec();
        all.extend_from_slice(t2.edges());
        assert_eq!(all, lin.graph.edges());
        let lin0 = linearize(&LinearGraph::minimal(1).unwrap(), &w("1"), 1, 0, 0).unwrap();
        let (_, t2, _) = split_graphs(&lin0.graph, &lin0.edge_meta).unwrap();
        assert_eq!(t2.order(), 0);
    }

    #[test]
    fn discrete_quotient_paths_spell_m_and_mirror() {
        let t = LinearGraph::minimal(2).unwrap();
        let m = w("1,2,2*");
        let lin = linearize(&t, &m, 1, 1, 0).unwrap();
        let g = &lin.graph;
        for k in 0..2 {
            let edges: Vec<usize> = (0..g.order()).filter(|&e| lin.edge_meta[e].base_edge == k).collect();
            // read against orientation, starting from the end of the directed path
            let mut at = g.edge(edges[0]).1;
            while let Some(&e) = edges.iter().find(|&&e| g.edge(e).0 == at) {
                at = g.edge(e).1;
            }
            let mut spelled = Vec::new();
            while let Some(&e) = edges.iter().find(|&&e| g.edge(e).1 == at) {
                spelled.push(lin.edge_meta[e].letter);
                at = g.edge(e).0;
            }
            let expect = if k == 0 { m.clone() } else { m.mirror() };
            assert_eq!(StarWord::new(spelled), expect);
        }
    }

    #[test]
    fn cycle_coefficients() {
        let got: Vec<i64> = (1..=8).map(|k| cycle_coefficient(k).unwrap()).collect();
        // oracle: signed Catalan numbers from the recurrence C_{n+1} = Σ C_i C_{n−i}
        let mut cat = vec![1i64];
        for n in 0..7 {
            cat.push((0..=n).map(|i| cat[i] * cat[n - i]).sum());
        }
        let expect: Vec<i64> = (0..8).map(|n| if n % 2 == 0 { cat[n] } else { -cat[n] }).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn limit_values() {
        let alt = |len: usize, letter: usize| -> Vec<Letter> {
            (0..len).map(|i| if i % 2 == 0 { Letter::plain(letter) } else { Letter::star(letter) }).collect()
        };
        for (len, v) in [(2, 1), (4, -1), (6, 2), (8, -5)] {
            let g = LinearGraph::cycle(len).unwrap();
            assert_eq!(haar_limit_injective(&g, &alt(len, 0)).unwrap(), Rational64::from_integer(v));
        }
        let g = LinearGraph::cycle(2).unwrap();
        assert_eq!(haar_limit_injective(&g, &[Letter::plain(0), Letter::plain(0)]).unwrap(), Rational64::from_integer(0));
        assert_eq!(haar_limit_injective(&g, &[Letter::plain(0), Letter::star(1)]).unwrap(), Rational64::from_integer(0));
        // two 2-cycles sharing a vertex, different letters: product 1·1
        let fig8 = LinearGraph::new(3, vec![(1, 0), (0, 1), (2, 0), (0, 2)]).unwrap();
        let labels = [Letter::plain(0), Letter::star(0), Letter::plain(1), Letter::star(1)];
        assert_eq!(haar_limit_injective(&fig8, &labels).unwrap(), Rational64::from_integer(1));
    }

    #[test]
    fn two_cycle_mc_is_one_minus_one_over_n() {
        // E[N^{-1} Σ_{i≠j} |U_ij|²] = 1 − 1/N exactly.
        let g = LinearGraph::cycle(2).unwrap();
        let n = 6;
        let rep = haar_injective_mc(&g, &[Letter::plain(0), Letter::star(0)], n, 4000, RngStream::new(10, 0)).unwrap();
        assert!(rep.within(Complex64::new(1.0 - 1.0 / n as f64, 0.0), 3.5), "{:?}", rep);
    }

    #[test]
    fn splitting_exact_and_degenerate() {
        let mut rng = RngStream::new(21, 0).rng();
        let n = 4;
        let g = LinearGraph::new(3, vec![(1, 0), (2, 1), (0, 2), (2, 0)]).unwrap();
        let color = [1, 1, 2, 2];
        let rand_mat = |rng: &mut rand_chacha::ChaCha8Rng| crate::random::sample_ginibre(n, rng);
        let b1 = TensorOperand::Factored(vec![rand_mat(&mut rng), rand_mat(&mut rng)]);
        let b2 = TensorOperand::Factored(vec![rand_mat(&mut rng), rand_mat(&mut rng)]);
        let rep = splitting_identity_check(&g, &color, &b1, &b2, None, RngStream::new(0, 0)).unwrap();
        assert!(rep.residual <= 1e-9 * (1.0 + rep.rhs.norm()), "{:?}", rep);
        let small = TensorOperand::Factored(vec![CMatrix::identity(2, 2); 2]);
        let rep = splitting_identity_check(&g, &color, &small, &small, None, RngStream::new(0, 0)).unwrap();
        assert!(rep.degenerate);
        // identity B₂: both sides count injective labelings
        let id = TensorOperand::identity(n, 2);
        let rep = splitting_identity_check(&g, &color, &b1, &id, None, RngStream::new(0, 0)).unwrap();
        assert!(rep.residual <= 1e-9 * (1.0 + rep.rhs.norm()));
    }

    #[test]
    fn mirror_groups() {
        assert_eq!(mirror_group(&w("1")).unwrap(), MirrorGroup::Cyclic);
        assert_eq!(mirror_group(&w("1,2,1")).unwrap(), MirrorGroup::Cyclic);
        assert_eq!(mirror_group(&w("1,2")).unwrap(), MirrorGroup::FreeRank2);
        assert!(mirror_group(&w("1,1*")).is_err());
    }

    #[test]
    fn circuits_of_a_cycle() {
        let g = LinearGraph::cycle(3).unwrap();
        let c = balanced_circuits(&g);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].len(), 3);
        for w in c[0].windows(2) {
            assert_eq!(g.edge(w[0]).1, g.edge(w[1]).0);
        }
        assert!(balanced_circuits(&LinearGraph::path(2)).is_empty());
    }

    #[test]
    fn predictions() {
        let cert = predict_freeness_limit(&w("1"), &LinearGraph::loops(1), 1, 0, 0, false).unwrap();
        assert_eq!(cert.verdict, Verdict::Vanishes);
        assert!(cert.ledger_consistent());
        let cert = predict_freeness_limit(&w("1,2,1*,2*"), &LinearGraph::loops(1), 1, 0, 0, false).unwrap();
        assert_eq!(cert.verdict, Verdict::Vanishes);
        assert_eq!(cert.partitions_enumerated, 15);
        let total: usize = cert.quotients.iter().map(|q| q.multiplicity).sum();
        assert_eq!(total, 15);
        assert!(cert.ledger_consistent());
        assert!(matches!(
            predict_freeness_limit(&w("1,1*"), &LinearGraph::loops(1), 1, 0, 0, false),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            predict_freeness_limit(&w("1,2,1,2,1,2"), &LinearGraph::loops(2), 1, 1, 0, false),
            Err(Error::ResourceLimit(_))
        ));
    }
}
