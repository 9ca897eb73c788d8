//! Normalized rational characters of U(N): exact dimensions, values on Haar
//! unitaries and their approach to powers of tr U and tr conj(U).

use traffic_tensors::random::{sample_haar_unitary, RngStream};
use traffic_tensors::repr::{character_leading_term, character_mc, normalized_character, Signature};

fn main() -> traffic_tensors::Result<()> {
    for s in ["1;", "1;1", "2;", "1,1;1", "3,1;2"] {
        let sig: Signature = s.parse()?;
        println!("dim {} at N=8: {}", sig, sig.dimension(8)?);
    }

    let u = sample_haar_unitary(64, &mut RngStream::new(4, 0).rng());
    for s in ["1;1", "2;", "1,1;1"] {
        let sig: Signature = s.parse()?;
        println!(
            "{}: chi(U) = {:.6}, leading term {:.6}",
            sig,
            normalized_character(&sig, &u)?,
            character_leading_term(&sig, &u)
        );
    }

    let sig: Signature = "1;1".parse()?;
    let word = "1,2".parse()?;
    for n in [16, 32, 64] {
        let r = character_mc(&sig, &word, 1, n, 200, RngStream::new(8, n as u64))?;
        println!(
            "N={:>2}: E chi(U conj U) = {:.5} +- {:.5}, mean asymptotic error {:.5}",
            n, r.report.estimate.re, r.report.stderr, r.asymptotic_error
        );
    }
    Ok(())
}
