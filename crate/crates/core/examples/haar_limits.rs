//! Limits of normalized injective traces of Haar unitaries along labelled cacti,
//! compared with Monte-Carlo estimates.

use traffic_tensors::graph::LinearGraph;
use traffic_tensors::haar::{haar_injective_mc, haar_limit_injective};
use traffic_tensors::invariants::validity;
use traffic_tensors::random::RngStream;
use traffic_tensors::word::Letter;

fn main() -> traffic_tensors::Result<()> {
    let u = Letter::plain(0);
    let s = Letter::star(0);
    let v = Letter::plain(1);
    let cases = vec![
        ("2-cycle u s", LinearGraph::cycle(2)?, vec![u, s]),
        ("4-cycle u s u s", LinearGraph::cycle(4)?, vec![u, s, u, s]),
        ("2-cycle u u", LinearGraph::cycle(2)?, vec![u, u]),
        ("2-cycle u v*", LinearGraph::cycle(2)?, vec![u, v.inverse()]),
        ("figure eight", LinearGraph::new(3, vec![(1, 0), (0, 1), (2, 0), (0, 2)])?, vec![u, s, v, v.inverse()]),
    ];
    let n = 40;
    for (name, g, labels) in cases {
        let limit = haar_limit_injective(&g, &labels)?;
        let mc = haar_injective_mc(&g, &labels, n, 400, RngStream::new(5, 0))?;
        println!(
            "{:<18} {:<16} limit {:>3}   N={} estimate {:>8.4} +- {:.4}",
            name,
            format!("{:?}", validity(&g, &labels)?),
            limit.to_string(),
            n,
            mc.estimate.re,
            mc.stderr
        );
    }
    Ok(())
}
