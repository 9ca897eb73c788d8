//! Bridges, two-edge connected components, leaf counts, cactus structure and the
//! splitting exponent eta of two-colored graphs.

use traffic_tensors::graph::LinearGraph;
use traffic_tensors::invariants::{
    cactus_cycles, cutting_edges, eta, forest_of_tec, is_forest_of_cacti, is_well_oriented, validity,
};
use traffic_tensors::word::Letter;

fn main() -> traffic_tensors::Result<()> {
    let graphs = [
        ("single edge", LinearGraph::minimal(1)?),
        ("path of 3", LinearGraph::path(3)),
        ("4-cycle", LinearGraph::cycle(4)?),
        ("figure eight", LinearGraph::new(3, vec![(1, 0), (0, 1), (2, 0), (0, 2)])?),
        ("theta", LinearGraph::new(2, vec![(0, 1), (1, 0), (0, 1)])?),
    ];
    for (name, g) in &graphs {
        let f = forest_of_tec(g);
        println!(
            "{:<13} L = {}  bridges = {:?}  components = {:?}  cactus = {}  well oriented = {}",
            name,
            f.leaf_count(),
            cutting_edges(g),
            f.components,
            is_forest_of_cacti(g),
            is_well_oriented(g)
        );
    }

    let u = Letter::plain(0);
    let s = Letter::star(0);
    let c4 = LinearGraph::cycle(4)?;
    println!("\ncycles of the 4-cycle: {:?}", cactus_cycles(&c4));
    println!("u s u s: {:?}", validity(&c4, &[u, s, u, s])?);
    println!("u u s s: {:?}", validity(&c4, &[u, u, s, s])?);

    // eta for a bichromatic 2-cycle and for two monochromatic loops glued at a vertex
    println!("\neta(2-cycle, colors 1,2) = {}", eta(&LinearGraph::cycle(2)?, &[1, 2])?);
    println!("eta(two loops, colors 1,2) = {}", eta(&LinearGraph::loops(2), &[1, 2])?);
    Ok(())
}
