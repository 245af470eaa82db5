//! Seeded samplers for the random matrix ensembles.
//!
//! Every sampler is a pure function of its parameters and a [`Seed`]. A seed
//! is a master value plus a trial index; the generator for a trial is ChaCha8
//! keyed by a 64-bit mix of the two, so trials can run on any worker in any
//! order. Streams are reproducible within this implementation only.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SparseBinMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub trial: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    pub fn new(master: u64) -> Self {
        Self { master, trial: 0 }
    }

    pub fn with_trial(self, trial: u64) -> Self {
        Self { trial, ..self }
    }

    /// The 64-bit stream key of this (master, trial) pair.
    pub fn stream(self) -> u64 {
        splitmix64(splitmix64(self.master) ^ self.trial.wrapping_mul(0xD6E8_FEB8_6659_FD93))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.stream())
    }

    /// An independent sub-stream, for samplers that consume several streams
    /// inside one trial.
    pub fn child(self, index: u64) -> Self {
        Self {
            master: self.stream(),
            trial: index,
        }
    }
}

impl From<u64> for Seed {
    fn from(master: u64) -> Self {
        Self::new(master)
    }
}

pub(crate) fn check_probability(what: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { what, value: p })
    }
}

/// Visits the indices in `0..total` retained by independent Bernoulli(p)
/// trials, jumping between successes with geometric gaps.
pub(crate) fn bernoulli_indices<R: Rng>(total: u64, p: f64, rng: &mut R, mut visit: impl FnMut(u64)) {
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(visit);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut k: u64 = 0;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let gap = (u.ln() / log_q).floor();
        if gap >= (total - k) as f64 {
            return;
        }
        k += gap as u64;
        visit(k);
        k += 1;
        if k >= total {
            return;
        }
    }
}

/// Symmetric adjacency matrix of G(n, p).
pub fn sample_sym_adj(n: usize, p: f64, seed: Seed) -> Result<SparseBinMatrix> {
    check_probability("edge probability", p)?;
    let mut rng = seed.rng();
    let total = (n as u64) * (n.saturating_sub(1) as u64) / 2;
    let mut entries = Vec::new();
    // walk the strict upper triangle row by row
    let (mut row, mut row_start) = (0usize, 0u64);
    bernoulli_indices(total, p, &mut rng, |k| {
        while k >= row_start + (n - 1 - row) as u64 {
            row_start += (n - 1 - row) as u64;
            row += 1;
        }
        let col = row + 1 + (k - row_start) as usize;
        entries.push((row, col));
        entries.push((col, row));
    });
    SparseBinMatrix::from_entries(n, n, entries)
}

/// `n_rows x n_cols` matrix with i.i.d. Bernoulli(p) entries.
pub fn sample_bernoulli(n_rows: usize, n_cols: usize, p: f64, seed: Seed) -> Result<SparseBinMatrix> {
    check_probability("entry probability", p)?;
    let mut rng = seed.rng();
    let mut entries = Vec::new();
    bernoulli_indices(n_rows as u64 * n_cols as u64, p, &mut rng, |k| {
        entries.push(((k / n_cols as u64) as usize, (k % n_cols as u64) as usize));
    });
    SparseBinMatrix::from_entries(n_rows, n_cols, entries)
}

/// A configuration-model sample `A0` with `gamma * n` rows of degree `d` and
/// `n` columns of degree `gamma * d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigModelSample {
    pub assignment: SparseBinMatrix,
    /// FNV-1a digest of the half-edge pairing.
    pub permutation_digest: u64,
    /// Half-edges lost when parallel edges collapse to a single 1.
    pub multi_edge_count: usize,
    pub simple: bool,
}

fn fnv1a(values: &[u32]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for byte in v.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

fn abc_shape(n: usize, gamma: usize, d: usize) -> Result<(usize, usize, usize)> {
    if gamma == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "configuration model needs gamma >= 1 and d >= 1 (got gamma = {gamma}, d = {d})"
        )));
    }
    Ok((gamma * n, n, gamma * d * n))
}

/// Uniform configuration-model pairing.
///
/// Half-edges are numbered on both sides: row `r` owns left half-edges
/// `r*d .. (r+1)*d` and column `c` owns right half-edges
/// `c*gamma*d .. (c+1)*gamma*d`. A uniformly random permutation `rho` pairs
/// right half-edge `i` with left half-edge `rho(i)`, and `(A0)_{rc} = 1` iff
/// at least one such pair joins row `r` and column `c`.
pub fn sample_abc(n: usize, gamma: usize, d: usize, seed: Seed) -> Result<ConfigModelSample> {
    let (n_rows, n_cols, half_edges) = abc_shape(n, gamma, d)?;
    let mut rho: Vec<u32> = (0..half_edges as u32).collect();
    rho.shuffle(&mut seed.rng());
    let col_degree = gamma * d;
    let entries = rho
        .iter()
        .enumerate()
        .map(|(i, &left)| (left as usize / d, i / col_degree));
    let (assignment, multi_edge_count) = SparseBinMatrix::from_entries_collapsing(n_rows, n_cols, entries)?;
    Ok(ConfigModelSample {
        assignment,
        permutation_digest: fnv1a(&rho),
        multi_edge_count,
        simple: multi_edge_count == 0,
    })
}

/// A configuration-model sample conditioned on having no parallel edges.
///
/// Attempt `a` draws its pairing from `seed.child(a)`; an attempt is abandoned
/// at the first repeated (row, column) pair, which leaves the accepted sample
/// uniform over simple pairings. Returns the sample and the number of
/// attempts used.
pub fn sample_abc_simple(
    n: usize,
    gamma: usize,
    d: usize,
    seed: Seed,
    max_attempts: u64,
) -> Result<(ConfigModelSample, u64)> {
    let (n_rows, n_cols, half_edges) = abc_shape(n, gamma, d)?;
    let col_degree = gamma * d;
    let mut rho: Vec<u32> = Vec::with_capacity(half_edges);
    let mut col_rows: Vec<u32> = Vec::with_capacity(col_degree);
    'attempt: for attempt in 0..max_attempts {
        let mut rng = seed.child(attempt).rng();
        rho.clear();
        rho.extend(0..half_edges as u32);
        // forward Fisher-Yates: position i is final once swapped
        for i in 0..half_edges {
            if i % col_degree == 0 {
                col_rows.clear();
            }
            let j = rng.random_range(i..half_edges);
            rho.swap(i, j);
            let row = rho[i] / d as u32;
            if col_rows.contains(&row) {
                continue 'attempt;
            }
            col_rows.push(row);
        }
        let entries = rho
            .iter()
            .enumerate()
            .map(|(i, &left)| (left as usize / d, i / col_degree));
        let assignment = SparseBinMatrix::from_entries(n_rows, n_cols, entries)?;
        let sample = ConfigModelSample {
            assignment,
            permutation_digest: fnv1a(&rho),
            multi_edge_count: 0,
            simple: true,
        };
        return Ok((sample, attempt + 1));
    }
    Err(Error::ConvergenceFailure {
        method: "simple configuration sampling",
        iterations: max_attempts as usize,
    })
}

/// Keeps the first `floor(n_rows * (1 - p))` rows.
pub fn truncate_rows(a0: &SparseBinMatrix, p: f64) -> Result<SparseBinMatrix> {
    check_probability("row deletion fraction", p)?;
    let keep = (a0.n_rows() as f64 * (1.0 - p) + 1e-9).floor() as usize;
    if keep == 0 {
        return Err(Error::EmptyResult);
    }
    Ok(a0.truncate_rows(keep.min(a0.n_rows())))
}

fn require_divides(what: &'static str, divisor: usize, value: usize) -> Result<()> {
    if divisor == 0 || value % divisor != 0 {
        return Err(Error::DivisibilityViolation { what, divisor, value });
    }
    Ok(())
}

/// `gamma` vertically stacked copies of `a0` transposed.
pub fn stack_transpose(a0: &SparseBinMatrix, gamma: usize) -> SparseBinMatrix {
    let block = a0.transpose();
    let mut out = block.clone();
    for _ in 1..gamma {
        out = out.vstack(&block);
    }
    out
}

fn stacked_base(n: usize, gamma: usize, d: usize) -> Result<(usize, usize)> {
    require_divides("stacked ABC (gamma | n)", gamma, n)?;
    require_divides("stacked ABC (gamma | d)", gamma, d)?;
    Ok((n / gamma, d / gamma))
}

/// Stacked ABC assignment: `A0 ~ ABC(n/gamma, gamma, d/gamma)` and the
/// `n x n` matrix of `gamma` copies of `A0^T`.
pub fn stack_abc(n: usize, gamma: usize, d: usize, seed: Seed) -> Result<SparseBinMatrix> {
    Ok(stack_abc_sample(n, gamma, d, seed)?.0)
}

/// As [`stack_abc`], also returning the underlying configuration sample.
pub fn stack_abc_sample(n: usize, gamma: usize, d: usize, seed: Seed) -> Result<(SparseBinMatrix, ConfigModelSample)> {
    let (base_n, base_d) = stacked_base(n, gamma, d)?;
    let sample = sample_abc(base_n, gamma, base_d, seed)?;
    Ok((stack_transpose(&sample.assignment, gamma), sample))
}

/// Stacked ABC built from a simple configuration sample, so every row and
/// column has weight exactly `d`.
pub fn stack_abc_simple(
    n: usize,
    gamma: usize,
    d: usize,
    seed: Seed,
    max_attempts: u64,
) -> Result<(SparseBinMatrix, ConfigModelSample, u64)> {
    let (base_n, base_d) = stacked_base(n, gamma, d)?;
    let (sample, attempts) = sample_abc_simple(base_n, gamma, base_d, seed, max_attempts)?;
    Ok((stack_transpose(&sample.assignment, gamma), sample, attempts))
}

/// Fractional repetition code: `n/d` all-ones `d x d` blocks on the diagonal.
pub fn sample_frc(n: usize, d: usize) -> Result<SparseBinMatrix> {
    require_divides("FRC (d | n)", d, n)?;
    let entries = (0..n).flat_map(|r| {
        let block = r / d * d;
        (block..block + d).map(move |c| (r, c))
    });
    SparseBinMatrix::from_entries(n, n, entries)
}
