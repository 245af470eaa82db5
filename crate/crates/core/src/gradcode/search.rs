use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::least_squares_error;
use crate::ensembles::Seed;
use crate::error::{Error, Result};
use crate::matrix::SparseBinMatrix;

pub const DEFAULT_RESTARTS: usize = 32;
/// Consecutive rejected swaps after which a restart is treated as a local
/// optimum.
pub const DEFAULT_PATIENCE: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversarialResult {
    /// Worst straggler set found, increasing.
    pub stragglers: Vec<usize>,
    pub err: f64,
    pub normalized: f64,
    pub evaluations: usize,
    pub restarts: usize,
}

/// Greedily straggles whole rows: repeatedly adds the uncovered row needing
/// the fewest new columns, then pads at random.
fn row_cover_start<R: Rng>(a: &SparseBinMatrix, s: usize, rng: &mut R) -> Vec<usize> {
    let mut chosen = vec![false; a.n_cols()];
    let mut size = 0;
    let mut rows: Vec<usize> = (0..a.n_rows()).filter(|&r| a.row_weight(r) > 0).collect();
    rows.shuffle(rng);
    loop {
        let best = rows
            .iter()
            .map(|&r| (a.row(r).iter().filter(|&&c| !chosen[c as usize]).count(), r))
            .filter(|&(need, _)| need > 0 && size + need <= s)
            .min_by_key(|&(need, _)| need);
        let Some((need, r)) = best else { break };
        for &c in a.row(r) {
            chosen[c as usize] = true;
        }
        size += need;
    }
    let mut rest: Vec<usize> = (0..a.n_cols()).filter(|&c| !chosen[c]).collect();
    rest.shuffle(rng);
    for &c in rest.iter().take(s - size) {
        chosen[c] = true;
    }
    (0..a.n_cols()).filter(|&c| chosen[c]).collect()
}

/// Local search for a straggler set of size `s` with large decoding error,
/// using at most `iters` error evaluations.
///
/// Restarts alternate between row-covering starts and uniform random sets;
/// each restart does first-improvement random swaps until
/// [`DEFAULT_PATIENCE`] consecutive swaps fail. The result lower-bounds the
/// true worst case.
pub fn adversarial_search(a: &SparseBinMatrix, s: usize, iters: usize, seed: Seed) -> Result<AdversarialResult> {
    let n = a.n_cols();
    if s >= n {
        return Err(Error::InvalidParameter(format!("{s} stragglers leave no column of {n}")));
    }
    let n_rows = a.n_rows().max(1) as f64;
    let mut rng = seed.rng();
    let mut evaluations = 0;
    let mut best = AdversarialResult {
        stragglers: Vec::new(),
        err: least_squares_error(a, &[])?,
        normalized: 0.0,
        evaluations: 1,
        restarts: 0,
    };
    evaluations += 1;
    let mut restarts = 0;
    while s > 0 && restarts < DEFAULT_RESTARTS && evaluations < iters.max(1) {
        let mut set = if restarts % 2 == 0 {
            row_cover_start(a, s, &mut rng)
        } else {
            index::sample(&mut rng, n, s).into_vec()
        };
        restarts += 1;
        let mut current = least_squares_error(a, &set)?;
        evaluations += 1;
        let mut in_set = vec![false; n];
        for &c in &set {
            in_set[c] = true;
        }
        let mut failures = 0;
        while failures < DEFAULT_PATIENCE && evaluations < iters && s < n {
            let i = rng.random_range(0..s);
            let j = loop {
                let j = rng.random_range(0..n);
                if !in_set[j] {
                    break j;
                }
            };
            let old = set[i];
            set[i] = j;
            let err = least_squares_error(a, &set)?;
            evaluations += 1;
            if err > current + 1e-9 {
                in_set[old] = false;
                in_set[j] = true;
                current = err;
                failures = 0;
            } else {
                set[i] = old;
                failures += 1;
            }
        }
        if current > best.err {
            best.err = current;
            best.stragglers = set.clone();
            best.stragglers.sort_unstable();
        }
    }
    best.normalized = best.err / n_rows;
    best.evaluations = evaluations;
    best.restarts = restarts;
    Ok(best)
}
