//! Sparse 0/1 matrices in canonical compressed-row form.
//!
//! Every matrix in the crate (adjacency matrices, bi-adjacency matrices,
//! assignment matrices and all of their submatrices) is a [`SparseBinMatrix`].
//! Entries are stored row-major with strictly increasing column indices inside
//! each row, so two matrices are equal exactly when their entry lists are.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SparseBinMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
}

impl SparseBinMatrix {
    /// Builds a matrix from coordinates in any order. Out-of-range and
    /// duplicate coordinates are rejected.
    pub fn from_entries<I>(n_rows: usize, n_cols: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut coords: Vec<(usize, usize)> = entries.into_iter().collect();
        for &(row, col) in &coords {
            if row >= n_rows || col >= n_cols {
                return Err(Error::EntryOutOfRange {
                    row,
                    col,
                    n_rows,
                    n_cols,
                });
            }
        }
        coords.sort_unstable();
        if let Some(w) = coords.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEntry {
                row: w[0].0,
                col: w[0].1,
            });
        }
        Ok(Self::from_sorted_unique(n_rows, n_cols, &coords))
    }

    /// Builds a matrix from coordinates, collapsing repeated coordinates into
    /// a single entry. Returns the matrix and the number of collapsed repeats.
    pub fn from_entries_collapsing<I>(n_rows: usize, n_cols: usize, entries: I) -> Result<(Self, usize)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut coords: Vec<(usize, usize)> = entries.into_iter().collect();
        for &(row, col) in &coords {
            if row >= n_rows || col >= n_cols {
                return Err(Error::EntryOutOfRange {
                    row,
                    col,
                    n_rows,
                    n_cols,
                });
            }
        }
        let total = coords.len();
        coords.sort_unstable();
        coords.dedup();
        let collapsed = total - coords.len();
        Ok((Self::from_sorted_unique(n_rows, n_cols, &coords), collapsed))
    }

    fn from_sorted_unique(n_rows: usize, n_cols: usize, coords: &[(usize, usize)]) -> Self {
        let mut row_ptr = vec![0usize; n_rows + 1];
        for &(r, _) in coords {
            row_ptr[r + 1] += 1;
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let col_idx = coords.iter().map(|&(_, c)| c as u32).collect();
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
        }
    }

    /// Builds a matrix from per-row column lists; each list may be unsorted
    /// but must not repeat a column.
    pub fn from_rows(n_cols: usize, rows: &[Vec<usize>]) -> Result<Self> {
        let entries = rows
            .iter()
            .enumerate()
            .flat_map(|(r, cols)| cols.iter().map(move |&c| (r, c)));
        Self::from_entries(rows.len(), n_cols, entries)
    }

    /// Builds a matrix from a dense 0/1 table. Any nonzero value counts as 1.
    pub fn from_dense<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let entries = rows.iter().enumerate().flat_map(|(r, row)| {
            let row = row.as_ref();
            assert_eq!(row.len(), n_cols, "ragged dense matrix");
            row.iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(move |(c, _)| (r, c))
                .collect::<Vec<_>>()
        });
        Self::from_entries(rows.len(), n_cols, entries).expect("dense input is always valid")
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self::from_sorted_unique(n_rows, n_cols, &[])
    }

    pub fn identity(n: usize) -> Self {
        let coords: Vec<_> = (0..n).map(|i| (i, i)).collect();
        Self::from_sorted_unique(n, n, &coords)
    }

    pub fn ones(n_rows: usize, n_cols: usize) -> Self {
        let coords: Vec<_> = (0..n_rows)
            .flat_map(|r| (0..n_cols).map(move |c| (r, c)))
            .collect();
        Self::from_sorted_unique(n_rows, n_cols, &coords)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.col_idx.is_empty()
    }

    /// Sorted column indices of the ones in row `r`.
    pub fn row(&self, r: usize) -> &[u32] {
        &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row(r).binary_search(&(c as u32)).is_ok()
    }

    /// Row-major iterator over the coordinates of the ones.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row(r).iter().map(move |&c| (r, c as usize)))
    }

    pub fn row_weights(&self) -> Vec<usize> {
        (0..self.n_rows).map(|r| self.row_weight(r)).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0usize; self.n_cols];
        for &c in &self.col_idx {
            w[c as usize] += 1;
        }
        w
    }

    /// Column-major view: for each column, the sorted rows holding a one.
    pub fn columns(&self) -> Vec<Vec<u32>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (r, c) in self.entries() {
            cols[c].push(r as u32);
        }
        cols
    }

    pub fn transpose(&self) -> Self {
        let mut coords: Vec<(usize, usize)> = self.entries().map(|(r, c)| (c, r)).collect();
        coords.sort_unstable();
        Self::from_sorted_unique(self.n_cols, self.n_rows, &coords)
    }

    /// Submatrix keeping the listed columns, renumbered in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut map = vec![u32::MAX; self.n_cols];
        for (new, &old) in cols.iter().enumerate() {
            map[old] = new as u32;
        }
        let mut coords = Vec::new();
        for r in 0..self.n_rows {
            for &c in self.row(r) {
                let m = map[c as usize];
                if m != u32::MAX {
                    coords.push((r, m as usize));
                }
            }
        }
        coords.sort_unstable();
        Self::from_sorted_unique(self.n_rows, cols.len(), &coords)
    }

    /// Submatrix keeping the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let coords: Vec<_> = rows
            .iter()
            .enumerate()
            .flat_map(|(new, &old)| self.row(old).iter().map(move |&c| (new, c as usize)))
            .collect();
        Self::from_sorted_unique(rows.len(), self.n_cols, &coords)
    }

    /// Principal submatrix on `vertices` (rows and columns), in the given order.
    pub fn principal_submatrix(&self, vertices: &[usize]) -> Self {
        self.select_rows(vertices).select_columns(vertices)
    }

    /// Deletes the listed columns, keeping the rest in order.
    pub fn delete_columns(&self, cols: &[usize]) -> Self {
        let mut drop = vec![false; self.n_cols];
        for &c in cols {
            drop[c] = true;
        }
        let keep: Vec<usize> = (0..self.n_cols).filter(|&c| !drop[c]).collect();
        self.select_columns(&keep)
    }

    /// The first `k` rows.
    pub fn truncate_rows(&self, k: usize) -> Self {
        let k = k.min(self.n_rows);
        Self {
            n_rows: k,
            n_cols: self.n_cols,
            row_ptr: self.row_ptr[..=k].to_vec(),
            col_idx: self.col_idx[..self.row_ptr[k]].to_vec(),
        }
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.n_cols, other.n_cols, "vstack needs equal column counts");
        let mut row_ptr = self.row_ptr.clone();
        let offset = self.nnz();
        row_ptr.extend(other.row_ptr[1..].iter().map(|p| p + offset));
        let mut col_idx = self.col_idx.clone();
        col_idx.extend_from_slice(&other.col_idx);
        Self {
            n_rows: self.n_rows + other.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
        }
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    /// True when the matrix is square, symmetric and has a zero diagonal,
    /// i.e. it is the adjacency matrix of a simple graph.
    pub fn is_simple_adjacency(&self) -> bool {
        self.is_square()
            && self.entries().all(|(r, c)| r != c && self.get(c, r))
    }

    /// Number of all-zero rows.
    pub fn zero_rows(&self) -> usize {
        (0..self.n_rows).filter(|&r| self.row_weight(r) == 0).count()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut dense = vec![vec![0u8; self.n_cols]; self.n_rows];
        for (r, c) in self.entries() {
            dense[r][c] = 1;
        }
        dense
    }

    /// Neighbour lists of the graph whose adjacency matrix this is.
    pub(crate) fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n_rows)
            .map(|r| self.row(r).iter().map(|&c| c as usize).collect())
            .collect()
    }
}

impl fmt::Debug for SparseBinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseBinMatrix({}x{}, nnz={})", self.n_rows, self.n_cols, self.nnz())?;
        if self.n_rows <= 16 && self.n_cols <= 32 {
            write!(f, "\n{self}")?;
        }
        Ok(())
    }
}

impl fmt::Display for SparseBinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_dense() {
            let line: String = row.iter().map(|&v| if v == 1 { '1' } else { '.' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_out_of_range_and_duplicates() {
        assert!(matches!(
            SparseBinMatrix::from_entries(2, 2, [(2, 0)]),
            Err(Error::EntryOutOfRange { .. })
        ));
        assert!(matches!(
            SparseBinMatrix::from_entries(2, 2, [(1, 1), (0, 0), (1, 1)]),
            Err(Error::DuplicateEntry { row: 1, col: 1 })
        ));
    }

    #[test]
    fn collapsing_counts_repeats() {
        let (m, collapsed) =
            SparseBinMatrix::from_entries_collapsing(1, 1, [(0, 0), (0, 0), (0, 0)]).unwrap();
        assert_eq!(m, SparseBinMatrix::ones(1, 1));
        assert_eq!(collapsed, 2);
    }

    #[test]
    fn submatrices_and_transpose() {
        let m = SparseBinMatrix::from_dense(&[[1, 0, 1], [0, 1, 1]]);
        assert_eq!(m.transpose(), SparseBinMatrix::from_dense(&[[1, 0], [0, 1], [1, 1]]));
        assert_eq!(m.select_columns(&[2, 0]), SparseBinMatrix::from_dense(&[[1, 1], [1, 0]]));
        assert_eq!(m.delete_columns(&[1]), SparseBinMatrix::from_dense(&[[1, 1], [0, 1]]));
        assert_eq!(m.truncate_rows(1), SparseBinMatrix::from_dense(&[[1, 0, 1]]));
        assert_eq!(m.col_weights(), vec![1, 1, 2]);
        let stacked = m.vstack(&m);
        assert_eq!(stacked.n_rows(), 4);
        assert_eq!(stacked.row(3), &[1, 2]);
    }

    #[test]
    fn adjacency_check() {
        let p3 = SparseBinMatrix::from_dense(&[[0, 1, 0], [1, 0, 1], [0, 1, 0]]);
        assert!(p3.is_simple_adjacency());
        assert!(!SparseBinMatrix::identity(2).is_simple_adjacency());
        assert!(!SparseBinMatrix::from_dense(&[[0, 1], [0, 0]]).is_simple_adjacency());
    }

    proptest! {
        #[test]
        fn canonical_form_is_idempotent(
            rows in 1usize..12,
            cols in 1usize..12,
            bits in proptest::collection::vec(any::<bool>(), 144),
        ) {
            let coords: Vec<_> = (0..rows)
                .flat_map(|r| (0..cols).map(move |c| (r, c)))
                .filter(|&(r, c)| bits[r * 12 + c])
                .rev()
                .collect();
            let m = SparseBinMatrix::from_entries(rows, cols, coords).unwrap();
            let again = SparseBinMatrix::from_entries(rows, cols, m.entries()).unwrap();
            prop_assert_eq!(&again, &m);
            let listed: Vec<_> = m.entries().collect();
            let mut sorted = listed.clone();
            sorted.sort_unstable();
            prop_assert_eq!(listed, sorted);
            prop_assert_eq!(m.transpose().transpose(), m);
        }
    }
}
