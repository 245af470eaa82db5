//! Gradient-code assignment matrices under stragglers.
//!
//! Columns of an assignment matrix are machines and rows are data parts. When
//! the machines in `S` straggle, the decoder can only use the surviving
//! columns, and the decoding error is the squared distance from the all-ones
//! vector to their span.

mod lstsq;
mod search;
mod spectral;

use rand::seq::index;
use serde::{Deserialize, Serialize};

pub use search::{adversarial_search, AdversarialResult, DEFAULT_PATIENCE, DEFAULT_RESTARTS};
pub use spectral::{adversarial_bound, sigma2, SpectralBound, DENSE_SVD_MAX_DIM};

use crate::ensembles::Seed;
use crate::error::{Error, Result};
use crate::exactlin::dependent_column_set;
use crate::matrix::SparseBinMatrix;

pub const CG_REL_TOL: f64 = 1e-12;
pub const DEPENDENCY_BOUND_MAX_ROWS: usize = 2048;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodingReport {
    /// `min |A_{~S} w - 1|^2`, from the QR path.
    pub err: f64,
    /// `err / n_rows`.
    pub normalized: f64,
    /// `|err_qr - err_cg|`.
    pub residual_gap: f64,
    pub straggler_count: usize,
    /// Numerical rank of the surviving columns.
    pub rank: usize,
    pub cg_iterations: usize,
    /// False when CG hit `10 * n_cols` iterations; `err` is still valid.
    pub cg_converged: bool,
}

fn surviving(a: &SparseBinMatrix, stragglers: &[usize]) -> Result<SparseBinMatrix> {
    let mut dead = vec![false; a.n_cols()];
    for &c in stragglers {
        if c >= a.n_cols() {
            return Err(Error::IndexOutOfRange {
                index: c,
                limit: a.n_cols(),
            });
        }
        if std::mem::replace(&mut dead[c], true) {
            return Err(Error::InvalidParameter(format!("straggler {c} listed twice")));
        }
    }
    Ok(a.delete_columns(stragglers))
}

/// Decoding error computed by dense QR only.
pub fn least_squares_error(a: &SparseBinMatrix, stragglers: &[usize]) -> Result<f64> {
    Ok(lstsq::qr_error(&surviving(a, stragglers)?).0)
}

/// Decoding error of `a` when the columns in `stragglers` are lost, by dense
/// column-pivoted QR and cross-checked by CGLS on the sparse matrix.
pub fn decoding_error(a: &SparseBinMatrix, stragglers: &[usize], tol: f64) -> Result<DecodingReport> {
    if stragglers.len() >= a.n_cols() && a.n_cols() > 0 {
        return Err(Error::InvalidParameter(format!(
            "{} stragglers leave no column of {}",
            stragglers.len(),
            a.n_cols()
        )));
    }
    let sub = surviving(a, stragglers)?;
    let (err, rank) = lstsq::qr_error(&sub);
    let cg = lstsq::cgls_error(&sub, tol.clamp(f64::EPSILON, CG_REL_TOL), 10 * sub.n_cols().max(1));
    let n_rows = a.n_rows().max(1) as f64;
    Ok(DecodingReport {
        err,
        normalized: err / n_rows,
        residual_gap: (err - cg.err).abs(),
        straggler_count: stragglers.len(),
        rank,
        cg_iterations: cg.iterations,
        cg_converged: cg.converged,
    })
}

/// Straggler set `index` of a Monte Carlo run: a uniform `s`-subset of the
/// columns drawn from `seed.child(index)`, increasing.
pub fn straggler_set(n_cols: usize, s: usize, seed: Seed, index: u64) -> Vec<usize> {
    let mut set = index::sample(&mut seed.child(index).rng(), n_cols, s).into_vec();
    set.sort_unstable();
    set
}

/// Straggler count `floor(p * n_cols)`.
pub fn straggler_count(n_cols: usize, p: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability {
            what: "straggler fraction",
            value: p,
        });
    }
    Ok(((n_cols as f64 * p) + 1e-9).floor() as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl MeanEstimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: 0.0,
                stderr: 0.0,
                samples: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, samples: n }
    }
}

/// Mean normalized decoding error over `trials` uniform straggler sets of
/// size `floor(p * n_cols)`, with the standard error of the mean.
pub fn expected_error_mc(a: &SparseBinMatrix, p: f64, trials: usize, seed: Seed) -> Result<MeanEstimate> {
    let s = straggler_count(a.n_cols(), p)?;
    let values = (0..trials as u64)
        .map(|t| decoding_error(a, &straggler_set(a.n_cols(), s, seed, t), CG_REL_TOL).map(|r| r.normalized))
        .collect::<Result<Vec<f64>>>()?;
    Ok(MeanEstimate::from_samples(&values))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitEstimate {
    /// Exact `E[zero rows] / n_rows`.
    pub zero_row_part: f64,
    /// Monte Carlo estimate of the normalized error on the other rows.
    pub remainder: MeanEstimate,
    pub mean: f64,
    pub stderr: f64,
}

/// Expected normalized decoding error split as `E[Z] + E[err - Z]`, where `Z`
/// counts surviving all-zero rows. Each such row adds exactly 1 to the error
/// and constrains nothing else, so `err - Z` is the error of the remaining
/// rows. `E[Z]` is exact, which resolves error rates far below `1 / trials`
/// when zero rows are the dominant failure.
pub fn expected_error_split(a: &SparseBinMatrix, p: f64, trials: usize, seed: Seed) -> Result<SplitEstimate> {
    let s = straggler_count(a.n_cols(), p)?;
    let n_rows = a.n_rows().max(1) as f64;
    let values = (0..trials as u64)
        .map(|t| {
            let set = straggler_set(a.n_cols(), s, seed, t);
            let err = least_squares_error(a, &set)?;
            Ok((err - zero_row_lower_bound(a, &set) as f64).max(0.0) / n_rows)
        })
        .collect::<Result<Vec<f64>>>()?;
    let remainder = MeanEstimate::from_samples(&values);
    let zero_row_part = expected_zero_rows(a, s) / n_rows;
    Ok(SplitEstimate {
        zero_row_part,
        remainder,
        mean: zero_row_part + remainder.mean,
        stderr: remainder.stderr,
    })
}

/// Rows whose every 1 lies in a straggling column. Each forces a unit of error.
pub fn zero_row_lower_bound(a: &SparseBinMatrix, stragglers: &[usize]) -> usize {
    let mut dead = vec![false; a.n_cols()];
    for &c in stragglers {
        if c < a.n_cols() {
            dead[c] = true;
        }
    }
    (0..a.n_rows())
        .filter(|&r| a.row(r).iter().all(|&c| dead[c as usize]))
        .count()
}

/// `|D|`, where `D` is the set of rows in the support of some left-kernel
/// vector of the surviving columns. The indicator of the other rows is
/// orthogonal to the left kernel, hence in the column span, so `err <= |D|`.
pub fn dependency_upper_bound(a: &SparseBinMatrix, stragglers: &[usize]) -> Result<usize> {
    if a.n_rows() > DEPENDENCY_BOUND_MAX_ROWS {
        return Err(Error::DimensionTooLarge {
            dim: a.n_rows(),
            limit: DEPENDENCY_BOUND_MAX_ROWS,
        });
    }
    let sub = surviving(a, stragglers)?;
    Ok(dependent_column_set(&sub.transpose()).len())
}

/// `C(n - w, s - w) / C(n, s)`: probability that a uniform `s`-subset of `n`
/// items contains `w` given items.
pub fn containment_probability(n: usize, s: usize, w: usize) -> f64 {
    if w > s {
        return 0.0;
    }
    (0..w).map(|i| (s - i) as f64 / (n - i) as f64).product()
}

/// Expected number of all-zero surviving rows under uniform `s`-subsets.
pub fn expected_zero_rows(a: &SparseBinMatrix, s: usize) -> f64 {
    a.row_weights()
        .into_iter()
        .map(|w| containment_probability(a.n_cols(), s, w))
        .sum()
}

/// Exact expected decoding error of FRC(n, d) under uniform `s`-subsets: each
/// fully straggling block contributes `d`, the others nothing.
pub fn frc_expected_error(n: usize, d: usize, s: usize) -> f64 {
    (n / d) as f64 * d as f64 * containment_probability(n, s, d)
}
