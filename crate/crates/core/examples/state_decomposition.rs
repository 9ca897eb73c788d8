//! Expanding invariant states over graph traces of the minimal graph, and recovering
//! single coefficients by randomized extraction.

use traffic_tensors::operand::TensorOperand;
use traffic_tensors::partition::SetPartition;
use traffic_tensors::random::{sample_ginibre, RngStream};
use traffic_tensors::trace::extract::randomized_coefficient_extract;
use traffic_tensors::trace::state::{decompose_invariant_state, LinearFunctional, StateSpec};

fn main() -> traffic_tensors::Result<()> {
    let n = 5;
    for psi in [StateSpec::tracial(2, n)?, StateSpec::max_entangled(2, n)?, StateSpec::diagonal_uniform(2, n)?] {
        let dec = decompose_invariant_state(&psi)?;
        println!("{:?}", psi.kind());
        for (p, a) in dec.partitions.iter().zip(&dec.coefficients) {
            if a.norm() > 1e-12 {
                println!("  a[{}] = {:.6}", p.to_block_string(), a);
            }
        }
        let mut rng = RngStream::new(3, 0).rng();
        let a = TensorOperand::Factored(vec![sample_ginibre(n, &mut rng), sample_ginibre(n, &mut rng)]);
        println!("  reconstruction residual {:.1e}", (dec.reconstruct(&a)? - psi.apply(&a)?).norm());
    }

    // b at the full partition of the tracial state on one leg is 1/N
    let psi = StateSpec::tracial(1, n)?;
    let rep = randomized_coefficient_extract(&psi, &SetPartition::full(2), 4000, RngStream::new(11, 0), None)?;
    println!(
        "\nextracted b = {:.5} +- {:.5} (exact {:.5})",
        rep.report.estimate.re,
        rep.report.stderr,
        1.0 / n as f64
    );
    Ok(())
}
