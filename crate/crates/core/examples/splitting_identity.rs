//! Injective traces of B1 (x) B2 split over the two colored subgraphs once B2 is
//! averaged over conjugation by permutations.

use traffic_tensors::graph::LinearGraph;
use traffic_tensors::haar::splitting_identity_check;
use traffic_tensors::operand::TensorOperand;
use traffic_tensors::random::{sample_ginibre, RngStream};

fn main() -> traffic_tensors::Result<()> {
    let g = LinearGraph::new(3, vec![(1, 0), (2, 1), (0, 2), (2, 0)])?;
    let color = [1, 1, 2, 2];
    for (n, samples) in [(4, None), (20, Some(4000))] {
        let mut rng = RngStream::new(9, n as u64).rng();
        let b1 = TensorOperand::Factored(vec![sample_ginibre(n, &mut rng), sample_ginibre(n, &mut rng)]);
        let b2 = TensorOperand::Factored(vec![sample_ginibre(n, &mut rng), sample_ginibre(n, &mut rng)]);
        let rep = splitting_identity_check(&g, &color, &b1, &b2, samples, RngStream::new(1, 0))?;
        println!(
            "N={:>2} {:<8} lhs {:.5}  rhs {:.5}  residual {:.2e}  stderr {:.2e}",
            n,
            if rep.exact { "exact" } else { "sampled" },
            rep.lhs,
            rep.rhs,
            rep.residual,
            rep.stderr
        );
    }
    Ok(())
}
