//! Unit-norm factored operands on which `|Tr⁰_{N,T₀^π}|` grows like `N^{𝔏(T₀^π)/2}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::LinearGraph;
use crate::invariants::forest_of_tec;
use crate::operand::{CMatrix, TensorOperand};
use crate::partition::SetPartition;

/// `(𝕁/2K)^{⊕m} ⊕ 0_r` with `N = 2Km + r`.
pub fn block_ones(n: usize, block: usize) -> CMatrix {
    let m = n / block;
    let val = Complex64::new(1.0 / block as f64, 0.0);
    CMatrix::from_fn(n, n, |i, j| if i / block == j / block && i / block < m { val } else { Complex64::new(0.0, 0.0) })
}

/// Cutting edges touching exactly one leaf of the forest pin their non-leaf endpoint to a
/// fixed index (one index per distinct endpoint, `N^{−1/2}` on that column or row); every
/// other edge carries the block-all-ones matrix.
pub fn ms_optimality_witness(pi: &SetPartition, n: usize) -> Result<TensorOperand> {
    if pi.ground_size() % 2 != 0 || pi.ground_size() == 0 {
        return Err(Error::invalid("the witness needs a partition of 2K elements"));
    }
    let k = pi.ground_size() / 2;
    if n < 2 * k {
        return Err(Error::invalid(format!("the witness needs N >= 2K = {}, got {}", 2 * k, n)));
    }
    let g = LinearGraph::minimal(k)?.quotient(pi)?;
    let forest = forest_of_tec(&g);
    let b = block_ones(n, 2 * k);
    let scale = Complex64::new((n as f64).powf(-0.5), 0.0);
    let mut pinned: Vec<usize> = Vec::new();
    let mut factors = Vec::with_capacity(k);
    for e in 0..k {
        let (s, t) = g.edge(e);
        let bridge = forest.forest_edges.iter().find(|f| f.2 == e);
        let one_leaf = bridge.and_then(|&(cs, ct, _)| match (forest.is_leaf(cs), forest.is_leaf(ct)) {
            (false, true) => Some((s, true)),
            (true, false) => Some((t, false)),
            _ => None,
        });
        let f = match one_leaf {
            Some((anchor, anchor_is_source)) => {
                let idx = match pinned.iter().position(|&v| v == anchor) {
                    Some(p) => p,
                    None => {
                        pinned.push(anchor);
                        pinned.len() - 1
                    }
                };
                CMatrix::from_fn(n, n, |i, j| {
                    let hit = if anchor_is_source { j == idx } else { i == idx };
                    if hit { scale } else { Complex64::new(0.0, 0.0) }
                })
            }
            None => b.clone(),
        };
        factors.push(f);
    }
    TensorOperand::factored(factors)
}
