//! Growth of injective traces on the optimality witness: log2-slope versus the leaf
//! count, for every partition of four legs.

use traffic_tensors::graph::LinearGraph;
use traffic_tensors::invariants::leaf_count;
use traffic_tensors::partition::enumerate_partitions;
use traffic_tensors::trace::injective_graph_trace;
use traffic_tensors::trace::witness::ms_optimality_witness;

fn main() -> traffic_tensors::Result<()> {
    let t0 = LinearGraph::minimal(2)?;
    let dims = [24usize, 48, 96];
    println!("{:<18} {:>4} {:>8}", "partition", "L/2", "slope");
    for p in enumerate_partitions(4)? {
        let q = t0.quotient(&p)?;
        let values: Vec<f64> = dims
            .iter()
            .map(|&n| injective_graph_trace(&q, &ms_optimality_witness(&p, n).unwrap()).unwrap().norm())
            .collect();
        // least-squares slope of log2 |Tr0| against log2 N
        let xs: Vec<f64> = dims.iter().map(|&n| (n as f64).log2()).collect();
        let ys: Vec<f64> = values.iter().map(|v| v.log2()).collect();
        let mx = xs.iter().sum::<f64>() / 3.0;
        let my = ys.iter().sum::<f64>() / 3.0;
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        println!("{:<18} {:>4.1} {:>8.3}", p.to_block_string(), leaf_count(&q) as f64 / 2.0, slope);
    }
    Ok(())
}
