//! Operator norm of sum_l U_l (x) V_l: near 2 sqrt(L-1) for independent Haar pairs,
//! at least L when V_l = conj(U_l).

use traffic_tensors::random::norm::{norm_absorption_demo, NormMode};
use traffic_tensors::random::RngStream;

fn main() -> traffic_tensors::Result<()> {
    for mode in [NormMode::HaarPair, NormMode::ConjugatePair] {
        for seed in 0..3 {
            let r = norm_absorption_demo(3, 30, mode, RngStream::new(seed, 0))?;
            println!(
                "{:?} seed {}: norm {:.4} (reference {:.4}, fixed-vector bound {:.4})",
                mode, seed, r.norm, r.reference, r.fixed_vector_bound
            );
        }
    }
    Ok(())
}
