use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::SparseBinMatrix;

pub const BAREISS_MAX_DIM: usize = 32;

/// Exact rank over the rationals by fraction-free (Bareiss) elimination.
///
/// Every intermediate entry is a minor of the input, so the division by the
/// previous pivot is always exact.
pub fn bareiss_rank(m: &SparseBinMatrix) -> Result<usize> {
    let dim = m.n_rows().min(m.n_cols());
    if dim > BAREISS_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim,
            limit: BAREISS_MAX_DIM,
        });
    }
    let mut a: Vec<Vec<BigInt>> = m
        .to_dense()
        .into_iter()
        .map(|row| row.into_iter().map(BigInt::from).collect())
        .collect();
    let (n_rows, n_cols) = (m.n_rows(), m.n_cols());
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..n_cols {
        if r == n_rows {
            break;
        }
        let Some(pivot) = (r..n_rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, pivot);
        for i in r + 1..n_rows {
            for j in c + 1..n_cols {
                let num = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                debug_assert!((&num % &prev).is_zero());
                a[i][j] = num / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        assert_eq!(bareiss_rank(&SparseBinMatrix::ones(2, 2)).unwrap(), 1);
        assert_eq!(bareiss_rank(&SparseBinMatrix::identity(8)).unwrap(), 8);
        let p3 = SparseBinMatrix::from_dense(&[[0, 1, 0], [1, 0, 1], [0, 1, 0]]);
        assert_eq!(bareiss_rank(&p3).unwrap(), 2);
        assert_eq!(bareiss_rank(&SparseBinMatrix::zeros(0, 3)).unwrap(), 0);
    }

    #[test]
    fn odd_triangle_is_nonsingular_even_square_is_not() {
        let tri = SparseBinMatrix::from_dense(&[[1, 1, 0], [0, 1, 1], [1, 0, 1]]);
        assert_eq!(bareiss_rank(&tri).unwrap(), 3);
        let c4 = SparseBinMatrix::from_dense(&[[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1], [1, 0, 0, 1]]);
        assert_eq!(bareiss_rank(&c4).unwrap(), 3);
    }

    #[test]
    fn rational_rank_differs_from_gf2_rank() {
        // rows sum to 2 * (1,1,1): dependent over GF(2), independent over Q
        let m = SparseBinMatrix::from_dense(&[[1, 1, 0], [0, 1, 1], [1, 0, 1]]);
        assert_eq!(bareiss_rank(&m).unwrap(), 3);
    }

    #[test]
    fn guards_large_inputs() {
        assert!(matches!(
            bareiss_rank(&SparseBinMatrix::identity(33)),
            Err(Error::DimensionTooLarge { dim: 33, .. })
        ));
        assert_eq!(bareiss_rank(&SparseBinMatrix::ones(40, 2)).unwrap(), 1);
    }
}
