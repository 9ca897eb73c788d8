//! The lattice of set partitions: enumeration, order, join/meet and Möbius values.

use traffic_tensors::partition::{bell_numbers, enumerate_partitions, mobius, SetPartition};

fn main() -> traffic_tensors::Result<()> {
    println!("Bell numbers: {:?}", bell_numbers(8));

    let a: SetPartition = "0,0,1,1".parse()?;
    let b: SetPartition = "0,1,1,2".parse()?;
    println!("{} v {} = {}", a.to_block_string(), b.to_block_string(), a.join(&b)?.to_block_string());
    println!("{} ^ {} = {}", a.to_block_string(), b.to_block_string(), a.meet(&b)?.to_block_string());

    let bottom = SetPartition::discrete(4);
    println!("\nmu(0, pi) on P(4):");
    for p in enumerate_partitions(4)? {
        println!("  {:<18} {:>3}", p.to_block_string(), mobius(&bottom, &p)?);
    }
    for n in 1..=6 {
        println!("mu(0_{n}, 1_{n}) = {}", mobius(&SetPartition::discrete(n), &SetPartition::full(n))?);
    }
    Ok(())
}
