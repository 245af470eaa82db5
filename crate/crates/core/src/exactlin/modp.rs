//! Dense Gaussian elimination over GF(p) for primes below 2^31.
//!
//! Rows are dense `u32` residues. The inner update `row += f * pivot` uses
//! Shoup's precomputed-quotient multiplication so that every step stays in
//! 32/64-bit integer arithmetic; on x86-64 the kernel is compiled a second
//! time with AVX2 enabled and selected at runtime.

use crate::matrix::SparseBinMatrix;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Field {
    pub p: u32,
}

impl Field {
    pub fn new(p: u32) -> Self {
        debug_assert!(p > 2 && p < (1 << 31) && p % 2 == 1);
        Self { p }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        (a as u64 * b as u64 % self.p as u64) as u32
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn pow(self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1u32;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(self, a: u32) -> u32 {
        debug_assert!(a != 0);
        self.pow(a, self.p as u64 - 2)
    }
}

/// Multiplier with a precomputed Shoup quotient.
#[derive(Clone, Copy)]
struct ShoupFactor {
    f: u32,
    quot: u32,
    p: u32,
}

impl ShoupFactor {
    #[inline]
    fn new(f: u32, p: u32) -> Self {
        let quot = (((f as u64) << 32) / p as u64) as u32;
        Self { f, quot, p }
    }

    #[inline(always)]
    fn mul(self, b: u32) -> u32 {
        let q = ((self.quot as u64 * b as u64) >> 32) as u32;
        let r = self.f.wrapping_mul(b).wrapping_sub(q.wrapping_mul(self.p));
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }
}

#[inline(always)]
fn axpy_generic(row: &mut [u32], pivot: &[u32], f: ShoupFactor) {
    let p = f.p;
    for (x, &y) in row.iter_mut().zip(pivot) {
        // both terms are below p < 2^31; wrapping add keeps overflow checks out of the loop
        let s = x.wrapping_add(f.mul(y));
        *x = if s >= p { s - p } else { s };
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn axpy_avx2(row: &mut [u32], pivot: &[u32], f: ShoupFactor) {
    axpy_generic(row, pivot, f)
}

/// `row += f * pivot` elementwise mod p.
#[inline]
fn axpy(row: &mut [u32], pivot: &[u32], f: ShoupFactor) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was detected at runtime.
            unsafe { axpy_avx2(row, pivot, f) };
            return;
        }
    }
    axpy_generic(row, pivot, f)
}

fn dense_rows(m: &SparseBinMatrix) -> Vec<Vec<u32>> {
    (0..m.n_rows())
        .filter(|&r| m.row_weight(r) > 0)
        .map(|r| {
            let mut dense = vec![0u32; m.n_cols()];
            for &c in m.row(r) {
                dense[c as usize] = 1;
            }
            dense
        })
        .collect()
}

/// Applies `row += f * pivot` over columns `from..`, skipping pivot zeros when
/// the pivot row is sparse.
fn eliminate_with(row: &mut [u32], pivot: &[u32], support: Option<&[u32]>, from: usize, f: ShoupFactor) {
    match support {
        Some(idx) => {
            let p = f.p;
            for &j in idx {
                let j = j as usize;
                let s = row[j].wrapping_add(f.mul(pivot[j]));
                row[j] = if s >= p { s - p } else { s };
            }
        }
        None => axpy(&mut row[from..], &pivot[from..], f),
    }
}

fn sparse_support(pivot: &[u32], from: usize) -> Option<Vec<u32>> {
    let width = pivot.len() - from;
    let nnz = pivot[from..].iter().filter(|&&v| v != 0).count();
    (nnz * 8 < width).then(|| {
        (from..pivot.len())
            .filter(|&j| pivot[j] != 0)
            .map(|j| j as u32)
            .collect()
    })
}

/// Rank of `m` over GF(p). Pivots are taken column by column, each from the
/// first remaining row (in row order) that is nonzero in that column.
pub(crate) fn rank(m: &SparseBinMatrix, p: u32) -> usize {
    let field = Field::new(p);
    let mut rows = dense_rows(m);
    let n_cols = m.n_cols();
    // indices of rows not yet used as pivots, in row order
    let mut active: Vec<usize> = (0..rows.len()).collect();
    let mut rank = 0;
    for c in 0..n_cols {
        if active.is_empty() {
            break;
        }
        let Some(pos) = active.iter().position(|&r| rows[r][c] != 0) else {
            continue;
        };
        let pivot_row = active.remove(pos);
        rank += 1;
        let pivot = std::mem::take(&mut rows[pivot_row]);
        let inv = field.inv(pivot[c]);
        let support = sparse_support(&pivot, c + 1);
        active.retain(|&r| {
            let row = &mut rows[r];
            let lead = row[c];
            if lead != 0 {
                let f = ShoupFactor::new(field.neg(field.mul(lead, inv)), p);
                eliminate_with(row, &pivot, support.as_deref(), c + 1, f);
                row[c] = 0;
            }
            // rows that became zero never pivot again
            lead == 0 || row[c + 1..].iter().any(|&v| v != 0)
        });
    }
    rank
}

/// Reduced row echelon form over GF(p).
pub(crate) struct Rref {
    pub p: u32,
    /// Pivot column of each pivot row, increasing.
    pub pivot_cols: Vec<usize>,
    /// Pivot rows normalised to a leading 1, fully reduced above and below.
    pub rows: Vec<Vec<u32>>,
    pub n_cols: usize,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    pub fn free_cols(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.n_cols];
        for &c in &self.pivot_cols {
            is_pivot[c] = true;
        }
        (0..self.n_cols).filter(|&c| !is_pivot[c]).collect()
    }

    /// Kernel basis: one vector per free column `f`, with `v[f] = 1` and
    /// `v[pivot_i] = -rows[i][f]`.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let field = Field::new(self.p);
        self.free_cols()
            .into_iter()
            .map(|f| {
                let mut v = vec![0u32; self.n_cols];
                v[f] = 1;
                for (row, &pc) in self.rows.iter().zip(&self.pivot_cols) {
                    v[pc] = field.neg(row[f]);
                }
                v
            })
            .collect()
    }
}

pub(crate) fn rref(m: &SparseBinMatrix, p: u32) -> Rref {
    let field = Field::new(p);
    let mut rows = dense_rows(m);
    let n_cols = m.n_cols();
    let mut pivot_rows: Vec<Vec<u32>> = Vec::new();
    let mut pivot_cols = Vec::new();
    for c in 0..n_cols {
        if rows.is_empty() {
            break;
        }
        let Some(pos) = rows.iter().position(|r| r[c] != 0) else {
            continue;
        };
        let mut pivot = rows.remove(pos);
        let inv = field.inv(pivot[c]);
        if inv != 1 {
            let f = ShoupFactor::new(inv, p);
            for v in pivot[c..].iter_mut() {
                *v = f.mul(*v);
            }
        }
        let support = sparse_support(&pivot, c + 1);
        let mut reduce = |row: &mut Vec<u32>| {
            let lead = row[c];
            if lead != 0 {
                let f = ShoupFactor::new(field.neg(lead), p);
                eliminate_with(row, &pivot, support.as_deref(), c + 1, f);
                row[c] = 0;
            }
        };
        rows.iter_mut().for_each(&mut reduce);
        pivot_rows.iter_mut().for_each(&mut reduce);
        rows.retain(|r| r[c + 1..].iter().any(|&v| v != 0));
        pivot_rows.push(pivot);
        pivot_cols.push(c);
    }
    Rref {
        p,
        pivot_cols,
        rows: pivot_rows,
        n_cols,
    }
}

/// Checks `m * v == 0` over GF(p).
pub(crate) fn annihilates(m: &SparseBinMatrix, v: &[u32], p: u32) -> bool {
    (0..m.n_rows()).all(|r| {
        m.row(r)
            .iter()
            .fold(0u64, |acc, &c| (acc + v[c as usize] as u64) % p as u64)
            == 0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 1_000_003;

    #[test]
    fn shoup_matches_naive() {
        let p = 2_147_483_629u32;
        for &(f, b) in &[(0u32, 5u32), (1, p - 1), (p - 1, p - 1), (123_456_789, 987_654_321), (p - 2, 3)] {
            let sf = ShoupFactor::new(f, p);
            assert_eq!(sf.mul(b) as u64, f as u64 * b as u64 % p as u64);
        }
    }

    #[test]
    fn axpy_dispatch_matches_generic() {
        let p = 1_073_741_827u32;
        let pivot: Vec<u32> = (0..97).map(|i| (i * 7_919_993u64 % p as u64) as u32).collect();
        let base: Vec<u32> = (0..97).map(|i| (i * 104_729u64 % p as u64) as u32).collect();
        let f = ShoupFactor::new(p - 12345, p);
        let mut a = base.clone();
        let mut b = base.clone();
        axpy(&mut a, &pivot, f);
        axpy_generic(&mut b, &pivot, f);
        assert_eq!(a, b);
        for i in 0..97 {
            assert_eq!(a[i] as u64, (base[i] as u64 + (p as u64 - 12345) * pivot[i] as u64) % p as u64);
        }
    }

    #[test]
    fn rank_small_cases() {
        assert_eq!(rank(&SparseBinMatrix::identity(5), 2_147_483_647), 5);
        assert_eq!(rank(&SparseBinMatrix::zeros(3, 4), P), 0);
        let p3 = SparseBinMatrix::from_dense(&[[0, 1, 0], [1, 0, 1], [0, 1, 0]]);
        assert_eq!(rank(&p3, P), 2);
        assert_eq!(rank(&SparseBinMatrix::ones(4, 6), P), 1);
    }

    #[test]
    fn rref_kernel_is_annihilated() {
        let m = SparseBinMatrix::from_dense(&[[1, 1, 0, 0], [0, 1, 1, 0], [1, 0, 1, 1]]);
        let r = rref(&m, P);
        assert_eq!(r.rank(), 3);
        let kernel = r.kernel_basis();
        assert_eq!(kernel.len(), 1);
        assert!(annihilates(&m, &kernel[0], P));
    }
}
