//! Graph traces of factored operands, the injective variant, and how the two are
//! related by summing over coarser quotients.

use traffic_tensors::graph::LinearGraph;
use traffic_tensors::operand::TensorOperand;
use traffic_tensors::partition::enumerate_partitions;
use traffic_tensors::random::{sample_ginibre, RngStream};
use traffic_tensors::trace::{contraction_plan, graph_trace, injective_graph_trace, tau_trace, zeta_trace};

fn main() -> traffic_tensors::Result<()> {
    let mut rng = RngStream::new(7, 0).rng();
    let n = 4;
    let a = TensorOperand::Factored(vec![sample_ginibre(n, &mut rng), sample_ginibre(n, &mut rng)]);

    // Tr over a loop pair is Tr(A1) Tr(A2); over the 2-cycle it is Tr(A1 A2)
    let loops = LinearGraph::loops(2);
    let cycle = LinearGraph::cycle(2)?;
    println!("loops:  {:.6}", graph_trace(&loops, &a)?);
    println!("cycle:  {:.6}", graph_trace(&cycle, &a)?);
    println!("zeta(cycle) = {:.6}, tau(cycle) = {:.6}", zeta_trace(&cycle, &a)?, tau_trace(&cycle, &a)?);

    // every quotient of the minimal graph, plain vs. sum of injective traces above it
    let t0 = LinearGraph::minimal(2)?;
    let parts = enumerate_partitions(4)?;
    let inj: Vec<_> = parts.iter().map(|p| injective_graph_trace(&t0.quotient(p).unwrap(), &a).unwrap()).collect();
    println!("\n{:<14} {:>24} {:>10} {:>6}", "partition", "Tr", "residual", "width");
    for p in &parts {
        let q = t0.quotient(p)?;
        let plain = graph_trace(&q, &a)?;
        let sum: num_complex::Complex64 = parts
            .iter()
            .zip(&inj)
            .filter(|(r, _)| p.leq(r).unwrap())
            .map(|(_, v)| v)
            .sum();
        println!(
            "{:<14} {:>24.6} {:>10.1e} {:>6}",
            p.to_block_string(),
            plain,
            (plain - sum).norm() / plain.norm().max(1.0),
            contraction_plan(&q).width
        );
    }
    Ok(())
}
