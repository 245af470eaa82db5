//! Exact rank, kernel and span-membership queries for 0/1 matrices.
//!
//! Rational rank is obtained as the maximum of the ranks modulo three large
//! primes. Reduction mod p can only lose rank, and only for the finitely many
//! primes dividing some maximal nonzero minor, so the maximum is exact with
//! overwhelming probability. Small inputs are additionally checked against a
//! fraction-free elimination over the integers.

mod bareiss;
mod modp;
mod primes;

use serde::{Deserialize, Serialize};

pub use bareiss::{bareiss_rank, BAREISS_MAX_DIM};
pub use primes::{is_prime, PrimeSet, PRIME_HI, PRIME_LO};

use crate::error::{Error, Result};
use crate::matrix::SparseBinMatrix;

/// Inputs at or below this minimum dimension are cross-checked by Bareiss.
pub const BAREISS_CROSSCHECK_DIM: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    pub corank_rows: usize,
    pub corank_cols: usize,
    pub primes_used: Vec<u32>,
    pub per_prime_rank: Vec<usize>,
    /// All primes returned the same rank.
    pub consensus: bool,
}

/// Rank of `m` over GF(p).
///
/// # Panics
/// If `p` is not an odd prime below 2^31.
pub fn rank_mod_p(m: &SparseBinMatrix, p: u32) -> usize {
    assert!(p > 2 && p < PRIME_HI && is_prime(p), "{p} is not an odd prime below 2^31");
    modp::rank(m, p)
}

pub fn rank_exact(m: &SparseBinMatrix) -> Result<RankReport> {
    rank_exact_with(m, PrimeSet::shared())
}

pub fn rank_exact_with(m: &SparseBinMatrix, primes: &PrimeSet) -> Result<RankReport> {
    let per_prime_rank: Vec<usize> = primes.primes().iter().map(|&p| modp::rank(m, p)).collect();
    let rank = *per_prime_rank.iter().max().unwrap();
    let consensus = per_prime_rank.iter().all(|&r| r == rank);
    if m.n_rows().min(m.n_cols()) <= BAREISS_CROSSCHECK_DIM {
        let rational = bareiss_rank(m)?;
        if rational != rank {
            return Err(Error::BareissDisagreement {
                modular: rank,
                rational,
            });
        }
    }
    Ok(RankReport {
        rank,
        corank_rows: m.n_rows() - rank,
        corank_cols: m.n_cols() - rank,
        primes_used: primes.primes().to_vec(),
        per_prime_rank,
        consensus,
    })
}

/// A right-kernel vector represented by its residues modulo each prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelVector {
    pub primes: Vec<u32>,
    /// `residues[j]` is the vector modulo `primes[j]`.
    pub residues: Vec<Vec<u32>>,
    /// Indices that are nonzero modulo every prime.
    pub support: Vec<usize>,
    pub support_consensus: bool,
}

impl KernelVector {
    pub fn len(&self) -> usize {
        self.residues.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Residues modulo `primes[j]` mapped to the symmetric range `(-p/2, p/2]`.
    pub fn centered(&self, j: usize) -> Vec<i64> {
        let p = self.primes[j] as i64;
        self.residues[j]
            .iter()
            .map(|&v| {
                let v = v as i64;
                if v > p / 2 {
                    v - p
                } else {
                    v
                }
            })
            .collect()
    }
}

/// Reduced echelon forms for the primes that attain the maximal rank.
fn max_rank_rrefs(m: &SparseBinMatrix, primes: &PrimeSet) -> Vec<modp::Rref> {
    let all: Vec<modp::Rref> = primes.primes().iter().map(|&p| modp::rref(m, p)).collect();
    let best = all.iter().map(modp::Rref::rank).max().unwrap();
    all.into_iter().filter(|r| r.rank() == best).collect()
}

pub fn kernel_basis(m: &SparseBinMatrix) -> Result<Vec<KernelVector>> {
    kernel_basis_with(m, PrimeSet::shared())
}

/// One kernel vector per free column of the reduced echelon form; the free
/// column carries a 1 and the other free columns carry 0.
pub fn kernel_basis_with(m: &SparseBinMatrix, primes: &PrimeSet) -> Result<Vec<KernelVector>> {
    let rrefs = max_rank_rrefs(m, primes);
    let reference = &rrefs[0];
    for other in &rrefs[1..] {
        if other.pivot_cols != reference.pivot_cols {
            let column = reference
                .pivot_cols
                .iter()
                .zip(&other.pivot_cols)
                .find(|(a, b)| a != b)
                .map_or(0, |(a, b)| *a.min(b));
            return Err(Error::SupportAmbiguous { column });
        }
    }
    let bases: Vec<Vec<Vec<u32>>> = rrefs.iter().map(modp::Rref::kernel_basis).collect();
    let used: Vec<u32> = rrefs.iter().map(|r| r.p).collect();
    let mut out = Vec::with_capacity(bases[0].len());
    for k in 0..bases[0].len() {
        let residues: Vec<Vec<u32>> = bases.iter().map(|b| b[k].clone()).collect();
        let mut support = Vec::new();
        for i in 0..m.n_cols() {
            let nonzero = residues.iter().filter(|v| v[i] != 0).count();
            if nonzero == residues.len() {
                support.push(i);
            } else if nonzero != 0 {
                return Err(Error::SupportAmbiguous { column: i });
            }
        }
        out.push(KernelVector {
            primes: used.clone(),
            residues,
            support,
            support_consensus: true,
        });
    }
    Ok(out)
}

fn check_col(m: &SparseBinMatrix, i: usize) -> Result<()> {
    if i >= m.n_cols() {
        return Err(Error::IndexOutOfRange {
            index: i,
            limit: m.n_cols(),
        });
    }
    Ok(())
}

/// Whether column `i` lies in the rational span of the other columns.
pub fn column_in_span_of_rest(m: &SparseBinMatrix, i: usize) -> Result<bool> {
    check_col(m, i)?;
    let full = rank_exact(m)?.rank;
    let rest = rank_exact(&m.delete_columns(&[i]))?.rank;
    Ok(full == rest)
}

/// Whether the standard basis vector `e_i` lies in the row space of `m`.
pub fn std_basis_in_rowspan(m: &SparseBinMatrix, i: usize) -> Result<bool> {
    check_col(m, i)?;
    let unit = SparseBinMatrix::from_rows(m.n_cols(), &[vec![i]])?;
    let full = rank_exact(m)?.rank;
    let augmented = rank_exact(&m.vstack(&unit))?.rank;
    Ok(full == augmented)
}

/// Columns that appear in the support of some kernel vector, equivalently
/// the columns lying in the span of the others.
///
/// For a fixed prime the union of kernel supports is the free columns plus
/// every pivot column whose reduced row touches a free column. Modulo a prime
/// attaining the rational rank that set is contained in the rational one, so
/// the union over such primes is taken.
pub fn dependent_column_set(m: &SparseBinMatrix) -> Vec<usize> {
    dependent_column_set_with(m, PrimeSet::shared())
}

pub fn dependent_column_set_with(m: &SparseBinMatrix, primes: &PrimeSet) -> Vec<usize> {
    let mut dependent = vec![false; m.n_cols()];
    for rref in max_rank_rrefs(m, primes) {
        let free = rref.free_cols();
        for &f in &free {
            dependent[f] = true;
        }
        for (row, &pc) in rref.rows.iter().zip(&rref.pivot_cols) {
            if free.iter().any(|&f| row[f] != 0) {
                dependent[pc] = true;
            }
        }
    }
    (0..m.n_cols()).filter(|&i| dependent[i]).collect()
}

/// Checks `m * v == 0` modulo every prime carried by `v`.
pub fn annihilates(m: &SparseBinMatrix, v: &KernelVector) -> bool {
    v.primes
        .iter()
        .zip(&v.residues)
        .all(|(&p, r)| r.len() == m.n_cols() && modp::annihilates(m, r, p))
}
