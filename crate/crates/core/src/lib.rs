pub mod cli;
pub mod error;
pub mod graph;
pub mod haar;
pub mod invariants;
pub mod io;
pub mod operand;
pub mod partition;
pub mod perm;
pub mod random;
pub mod repr;
pub mod selftest;
pub mod trace;
pub mod word;

pub use error::{Error, Result};
