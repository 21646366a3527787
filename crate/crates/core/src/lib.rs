//! Geometric pattern mining in discrete 2-D matrices.
//!
//! A matrix is described by a set of sparse patterns plus the positions at
//! which they are instantiated. The miner greedily merges adjacent patterns
//! as long as the total description length in bits decreases.

pub mod cli;
pub mod encoding;
pub mod eval;
pub mod grid;
pub mod miner;
pub mod ril;

pub use encoding::{EncodingParams, LengthReport};
pub use grid::{Matrix, Offset, Pattern};
pub use miner::{mine, Heuristic, MineOutcome, MinerConfig, MiningState};
