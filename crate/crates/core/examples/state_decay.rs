//! Expectations and variances of states on words in the family
//! W = U (x) U^t, decaying with N.

use traffic_tensors::random::family::{mc_expectation, mc_variance, WSpec};
use traffic_tensors::random::RngStream;
use traffic_tensors::trace::state::StateSpec;
use traffic_tensors::word::StarWord;

fn main() -> traffic_tensors::Result<()> {
    let spec = WSpec::new(1, 1, 0, 2)?;
    let words: Vec<StarWord> = vec!["1".parse()?, "1,2".parse()?, "1,2,1*,2*".parse()?];
    for word in &words {
        println!("word {}", word);
        for n in [8, 16, 32, 64] {
            let psi = StateSpec::max_entangled(2, n)?;
            let stream = RngStream::new(2, n as u64);
            let e = mc_expectation(&psi, &spec, word, 400, stream)?;
            let v = mc_variance(&psi, &spec, word, 400, stream)?;
            println!("  N={:>3}  |E| = {:.5}  (stderr {:.5})  Var = {:.2e}", n, e.estimate.norm(), e.stderr, v.estimate.re);
        }
    }
    Ok(())
}
