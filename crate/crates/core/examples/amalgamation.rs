//! Leg permutations on (C^N)^(x d): the cycle factorization, left regular character
//! checks, and the conditional expectation onto the span of the permutations.

use traffic_tensors::operand::TensorOperand;
use traffic_tensors::perm::all_permutations;
use traffic_tensors::random::{sample_ginibre, sample_haar_unitary, RngStream};
use traffic_tensors::repr::{
    amalgamation_probe, conditional_expectation_sd, cycle_factorization_check, left_regular_check, PermutationWord,
};

fn main() -> traffic_tensors::Result<()> {
    let mut rng = RngStream::new(1, 0).rng();
    let a = sample_ginibre(4, &mut rng);
    let worst = all_permutations(3)
        .iter()
        .map(|s| cycle_factorization_check(&a, s).unwrap().residual)
        .fold(0.0, f64::max);
    println!("cycle factorization, d = 3: worst residual {:.1e}", worst);

    for (free, sigma) in [("1", vec![0, 1]), ("1,2*", vec![1, 0]), ("1,3", vec![0, 1])] {
        let w = PermutationWord::new(free.parse()?, sigma.clone())?;
        print!("word ({}, {:?}):", free, sigma);
        for n in [8, 16, 32] {
            let r = left_regular_check(&w, 2, n, 200, RngStream::new(2, n as u64))?;
            print!("  N={} {:.5}", n, r.estimate.norm());
        }
        println!();
    }

    let u = sample_haar_unitary(8, &mut rng);
    let proj = conditional_expectation_sd(&TensorOperand::Factored(vec![u.clone(), u]), 2)?;
    println!("\nE(U (x) U) coefficients over S_2: {:?}", proj.coefficients);

    // alternating centered word x y x* y* in two independent U^(x)2
    for n in [8, 16, 32, 64] {
        println!("amalgamation probe N={:>2}: {:.2e}", n, amalgamation_probe(2, n, 200, RngStream::new(3, n as u64))?);
    }
    Ok(())
}
