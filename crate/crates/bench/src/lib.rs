//! Fixed inputs shared by the benchmarks.

use sparse_rank::ensembles::{sample_sym_adj, stack_abc};
use sparse_rank::gradcode::straggler_set;
use sparse_rank::{Seed, SparseBinMatrix};

pub const SEED: u64 = 0xBE7C;

/// Adjacency matrix of G(n, d/n).
pub fn graph(n: usize, d: f64) -> SparseBinMatrix {
    sample_sym_adj(n, d / n as f64, Seed::new(SEED)).expect("valid edge probability")
}

/// Stacked ABC assignment and one straggler set of `floor(p n)` columns.
pub fn decoding_case(n: usize, gamma: usize, d: usize, p: f64) -> (SparseBinMatrix, Vec<usize>) {
    let a = stack_abc(n, gamma, d, Seed::new(SEED)).expect("valid stacked ABC shape");
    let set = straggler_set(n, (n as f64 * p) as usize, Seed::new(SEED), 0);
    (a, set)
}
