//! Certificates for the vanishing of limits of words in tensor Haar families: the
//! linearized graph, every quotient's eta and the validity of its first colored part.

use traffic_tensors::graph::LinearGraph;
use traffic_tensors::haar::{linearize, predict_freeness_limit};
use traffic_tensors::word::StarWord;

fn main() -> traffic_tensors::Result<()> {
    let word: StarWord = "1,2,1*,2*".parse()?;
    let lin = linearize(&LinearGraph::loops(2), &word, 1, 1, 0)?;
    println!("linearized graph: {} vertices, edges {:?}", lin.graph.vertex_count(), lin.graph.edges());

    for (blocks, t) in [((1, 0, 0), LinearGraph::loops(1)), ((1, 1, 0), LinearGraph::loops(2))] {
        let cert = predict_freeness_limit(&word, &t, blocks.0, blocks.1, blocks.2, false)?;
        println!(
            "\nblocks {:?}: {:?}, mirror group {:?}, {} quotients ({} classes), max eta {}",
            blocks,
            cert.verdict,
            cert.mirror_group,
            cert.partitions_enumerated,
            cert.quotients.len(),
            cert.max_eta
        );
        for q in cert.quotients.iter().filter(|q| q.eta == 0.into()).take(4) {
            println!("  eta 0 at {} (T1 {:?})", q.partition.to_block_string(), q.validity);
        }
    }

    let cert = predict_freeness_limit(&"1".parse()?, &LinearGraph::loops(1), 1, 0, 0, true)?;
    println!("\nvariance of X1: {:?}, max eta {}", cert.verdict, cert.max_eta);
    Ok(())
}
