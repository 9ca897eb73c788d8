//! Variable elimination for graph sums `Σ_φ ∏_e A_e(φ(target), φ(source))`.
//!
//! Every vertex is a summation variable of range `N`, every edge a rank-2 factor
//! (rank 1 for a loop). Vertices are summed out along a greedy min-degree
//! order; eliminations touching at most two other vertices are done with one
//! matrix product, anything wider falls back to a dense tensor loop.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::LinearGraph;
use crate::operand::CMatrix;

/// Largest intermediate the dense fallback will materialize.
const MAX_INTERMEDIATE: usize = 1 << 26;

/// A vertex elimination order with its widest step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContractionPlan {
    pub order: Vec<usize>,
    /// Number of distinct neighbours of each vertex at the time it is eliminated,
    /// which is the rank of the intermediate tensor it produces.
    pub degrees: Vec<usize>,
    pub width: usize,
}

/// Greedy min-degree elimination on the interaction graph (ties: lowest vertex id).
pub fn contraction_plan(g: &LinearGraph) -> ContractionPlan {
    let n = g.vertex_count();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(s, t) in g.edges() {
        if s != t {
            adj[s].insert(t);
            adj[t].insert(s);
        }
    }
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    let mut degrees = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (adj[v].len(), v))
            .expect("a vertex remains");
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for &a in &nbrs {
            adj[a].remove(&v);
            for &b in &nbrs {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        adj[v].clear();
        alive[v] = false;
        order.push(v);
        degrees.push(nbrs.len());
    }
    let width = degrees.iter().copied().max().unwrap_or(0);
    ContractionPlan { order, degrees, width }
}

/// Dense tensor over an ascending list of distinct variables, row-major.
#[derive(Clone, Debug)]
struct Factor {
    vars: Vec<usize>,
    data: Vec<Complex64>,
}

impl Factor {
    fn from_edge(a: &CMatrix, source: usize, target: usize) -> Factor {
        let n = a.nrows();
        if source == target {
            Factor { vars: vec![target], data: (0..n).map(|i| a[(i, i)]).collect() }
        } else if target < source {
            let mut data = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    data.push(a[(i, j)]);
                }
            }
            Factor { vars: vec![target, source], data }
        } else {
            let mut data = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..n {
                    data.push(a[(i, j)]);
                }
            }
            Factor { vars: vec![source, target], data }
        }
    }

    fn hadamard_in_place(&mut self, other: &Factor) {
        debug_assert_eq!(self.vars, other.vars);
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x *= y;
        }
    }
}

/// Evaluates the graph sum for `mats[slot_of_edge[k]]` on edge `k` along `plan`.
pub(crate) fn contract(
    g: &LinearGraph,
    mats: &[CMatrix],
    slot_of_edge: &[usize],
    plan: &ContractionPlan,
) -> Result<Complex64> {
    let n = mats.first().map(|m| m.nrows()).unwrap_or(0);
    let mut pool: Vec<Factor> = Vec::with_capacity(g.order());
    for (k, &(s, t)) in g.edges().iter().enumerate() {
        let f = Factor::from_edge(&mats[slot_of_edge[k]], s, t);
        match pool.iter_mut().find(|p| p.vars == f.vars) {
            Some(p) => p.hadamard_in_place(&f),
            None => pool.push(f),
        }
    }
    let mut scalar = Complex64::new(1.0, 0.0);
    for &v in &plan.order {
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = pool.into_iter().partition(|f| f.vars.contains(&v));
        pool = rest;
        if touching.is_empty() {
            scalar *= n as f64;
            continue;
        }
        let out = eliminate(v, touching, n)?;
        if out.vars.is_empty() {
            scalar *= out.data[0];
        } else {
            match pool.iter_mut().find(|p| p.vars == out.vars) {
                Some(p) => p.hadamard_in_place(&out),
                None => pool.push(out),
            }
        }
    }
    debug_assert!(pool.is_empty());
    Ok(scalar)
}

fn eliminate(v: usize, factors: Vec<Factor>, n: usize) -> Result<Factor> {
    let mut scope: Vec<usize> = factors.iter().flat_map(|f| f.vars.iter().copied()).collect();
    scope.sort_unstable();
    scope.dedup();
    if scope.len() <= 3 && factors.iter().all(|f| f.vars.len() <= 2) {
        Ok(eliminate_small(v, &factors, &scope, n))
    } else {
        eliminate_dense(v, &factors, &scope, n)
    }
}

/// `Σ_v M_a(a,v) d(v) M_b(v,b)` for scopes `{v}`, `{a,v}` or `{a,v,b}`.
fn eliminate_small(v: usize, factors: &[Factor], scope: &[usize], n: usize) -> Factor {
    let one = Complex64::new(1.0, 0.0);
    let mut d = vec![one; n];
    for f in factors.iter().filter(|f| f.vars.len() == 1) {
        for (x, y) in d.iter_mut().zip(&f.data) {
            *x *= y;
        }
    }
    let others: Vec<usize> = scope.iter().copied().filter(|&x| x != v).collect();
    // Matrix indexed [other value][v value], merged over all factors on {other, v}.
    let side = |other: usize| -> CMatrix {
        let mut m = CMatrix::from_element(n, n, one);
        for f in factors.iter().filter(|f| f.vars.len() == 2 && f.vars.contains(&other)) {
            let other_first = f.vars[0] == other;
            for i in 0..n {
                for j in 0..n {
                    let val = if other_first { f.data[i * n + j] } else { f.data[j * n + i] };
                    m[(i, j)] *= val;
                }
            }
        }
        m
    };
    match others.len() {
        0 => Factor { vars: vec![], data: vec![d.iter().sum()] },
        1 => {
            let m = side(others[0]);
            let data = (0..n).map(|i| (0..n).map(|j| m[(i, j)] * d[j]).sum()).collect();
            Factor { vars: others, data }
        }
        _ => {
            let mut ma = side(others[0]);
            let mb = side(others[1]);
            for j in 0..n {
                for i in 0..n {
                    ma[(i, j)] *= d[j];
                }
            }
            let r = crate::operand::matmul(&ma, &mb, true);
            let mut data = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    data.push(r[(i, j)]);
                }
            }
            Factor { vars: others, data }
        }
    }
}

fn eliminate_dense(v: usize, factors: &[Factor], scope: &[usize], n: usize) -> Result<Factor> {
    let total = n
        .checked_pow(scope.len() as u32)
        .filter(|&t| t <= MAX_INTERMEDIATE)
        .ok_or_else(|| {
            Error::limit(format!(
                "contraction step over {} vertices at N = {} is too large",
                scope.len(),
                n
            ))
        })?;
    let vpos = scope.iter().position(|&x| x == v).expect("v is in scope");
    let out_vars: Vec<usize> = scope.iter().copied().filter(|&x| x != v).collect();
    // Per-factor strides aligned with `scope`.
    let strides: Vec<Vec<usize>> = factors
        .iter()
        .map(|f| {
            scope
                .iter()
                .map(|x| match f.vars.iter().position(|y| y == x) {
                    Some(p) => n.pow((f.vars.len() - 1 - p) as u32),
                    None => 0,
                })
                .collect()
        })
        .collect();
    let out_strides: Vec<usize> = (0..scope.len())
        .map(|p| {
            if p == vpos {
                0
            } else {
                let later = (p + 1..scope.len()).filter(|&q| q != vpos).count();
                n.pow(later as u32)
            }
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); total / n];
    let mut digits = vec![0usize; scope.len()];
    for _ in 0..total {
        let mut prod = Complex64::new(1.0, 0.0);
        for (f, st) in factors.iter().zip(&strides) {
            let idx: usize = digits.iter().zip(st).map(|(d, s)| d * s).sum();
            prod *= f.data[idx];
        }
        let oidx: usize = digits.iter().zip(&out_strides).map(|(d, s)| d * s).sum();
        out[oidx] += prod;
        for p in (0..digits.len()).rev() {
            digits[p] += 1;
            if digits[p] < n {
                break;
            }
            digits[p] = 0;
        }
    }
    Ok(Factor { vars: out_vars, data: out })
}
