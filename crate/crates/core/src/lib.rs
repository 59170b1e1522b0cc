//! Hamilton circuit search by products of admissible permutations.

pub mod graphgen;
pub mod tour;
pub mod contract;
pub mod solver;
pub mod oracle;
pub mod problab;
pub mod tsp;
pub mod cli;
