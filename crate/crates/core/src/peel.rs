//! Karp-Sipser leaf removal, k-cores, and the corank bookkeeping they imply.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::rank_exact;
use crate::matrix::SparseBinMatrix;

/// Which degree-1 vertex is removed when several are available.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeafOrder {
    #[default]
    LowestIndex,
    HighestIndex,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KsResult {
    /// Vertices of the KS core (minimum degree at least 2), increasing.
    pub core_vertices: Vec<usize>,
    /// `I_KS`: vertices of degree 0 when peeling stops, increasing.
    pub isolated: Vec<usize>,
    /// Removed vertices, increasing.
    pub peeled: Vec<usize>,
    /// `(leaf, neighbour)` pairs in removal order.
    pub trace: Vec<(usize, usize)>,
    /// Bipartite runs only: isolated rows.
    pub isolated_left: Option<usize>,
    /// Bipartite runs only: isolated columns.
    pub isolated_right: Option<usize>,
}

impl KsResult {
    pub fn i_ks(&self) -> usize {
        self.isolated.len()
    }
}

enum LeafQueue {
    Low(BinaryHeap<Reverse<usize>>),
    High(BinaryHeap<usize>),
}

impl LeafQueue {
    fn new(order: LeafOrder) -> Self {
        match order {
            LeafOrder::LowestIndex => Self::Low(BinaryHeap::new()),
            LeafOrder::HighestIndex => Self::High(BinaryHeap::new()),
        }
    }

    fn push(&mut self, v: usize) {
        match self {
            Self::Low(h) => h.push(Reverse(v)),
            Self::High(h) => h.push(v),
        }
    }

    fn pop(&mut self) -> Option<usize> {
        match self {
            Self::Low(h) => h.pop().map(|Reverse(v)| v),
            Self::High(h) => h.pop(),
        }
    }
}

/// Leaf removal on a simple graph given by neighbour lists. Stale queue
/// entries are skipped on pop, so each step takes the extreme-index vertex
/// whose current degree is 1.
fn peel_graph(adj: &[Vec<usize>], order: LeafOrder) -> KsResult {
    let n = adj.len();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut queue = LeafQueue::new(order);
    for v in 0..n {
        if degree[v] == 1 {
            queue.push(v);
        }
    }
    let mut trace = Vec::new();
    while let Some(leaf) = queue.pop() {
        if removed[leaf] || degree[leaf] != 1 {
            continue;
        }
        let hub = *adj[leaf].iter().find(|&&u| !removed[u]).expect("leaf has a live neighbour");
        removed[leaf] = true;
        removed[hub] = true;
        trace.push((leaf, hub));
        for &w in &adj[hub] {
            if !removed[w] {
                degree[w] -= 1;
                if degree[w] == 1 {
                    queue.push(w);
                }
            }
        }
    }
    let mut result = KsResult {
        core_vertices: Vec::new(),
        isolated: Vec::new(),
        peeled: Vec::new(),
        trace,
        isolated_left: None,
        isolated_right: None,
    };
    for v in 0..n {
        if removed[v] {
            result.peeled.push(v);
        } else if degree[v] == 0 {
            result.isolated.push(v);
        } else {
            result.core_vertices.push(v);
        }
    }
    result
}

fn require_adjacency(adjacency: &SparseBinMatrix) -> Result<()> {
    if adjacency.is_simple_adjacency() {
        Ok(())
    } else {
        Err(Error::NotSymmetric)
    }
}

/// Karp-Sipser leaf removal, lowest-index leaf first.
pub fn karp_sipser(adjacency: &SparseBinMatrix) -> Result<KsResult> {
    karp_sipser_ordered(adjacency, LeafOrder::LowestIndex)
}

pub fn karp_sipser_ordered(adjacency: &SparseBinMatrix, order: LeafOrder) -> Result<KsResult> {
    require_adjacency(adjacency)?;
    Ok(peel_graph(&adjacency.adjacency_lists(), order))
}

/// Neighbour lists of the bipartite graph of `b`: rows are vertices
/// `0..n_rows`, columns are `n_rows..n_rows + n_cols`.
fn bipartite_lists(b: &SparseBinMatrix) -> Vec<Vec<usize>> {
    let m = b.n_rows();
    let mut adj = vec![Vec::new(); m + b.n_cols()];
    for (r, c) in b.entries() {
        adj[r].push(m + c);
        adj[m + c].push(r);
    }
    adj
}

/// Leaf removal on the bipartite graph with biadjacency matrix `b`. Vertex
/// indices are rows first, then columns offset by `n_rows`.
pub fn karp_sipser_bipartite(b: &SparseBinMatrix) -> KsResult {
    karp_sipser_bipartite_ordered(b, LeafOrder::LowestIndex)
}

pub fn karp_sipser_bipartite_ordered(b: &SparseBinMatrix, order: LeafOrder) -> KsResult {
    let mut result = peel_graph(&bipartite_lists(b), order);
    let left = result.isolated.iter().filter(|&&v| v < b.n_rows()).count();
    result.isolated_left = Some(left);
    result.isolated_right = Some(result.isolated.len() - left);
    result
}

/// Splits bipartite core vertices into (rows, columns) of `b`.
pub fn bipartite_core_sides(b: &SparseBinMatrix, ks: &KsResult) -> (Vec<usize>, Vec<usize>) {
    let m = b.n_rows();
    let (rows, cols): (Vec<usize>, Vec<usize>) = ks.core_vertices.iter().partition(|&&v| v < m);
    (rows, cols.into_iter().map(|v| v - m).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreResult {
    pub k: usize,
    pub vertices: Vec<usize>,
}

/// The k-core: the largest vertex set inducing minimum degree at least `k`.
pub fn k_core(adjacency: &SparseBinMatrix, k: usize) -> Result<CoreResult> {
    require_adjacency(adjacency)?;
    let adj = adjacency.adjacency_lists();
    let n = adj.len();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&v| degree[v] < k).collect();
    for &v in &stack {
        removed[v] = true;
    }
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !removed[w] {
                degree[w] -= 1;
                if degree[w] < k {
                    removed[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    Ok(CoreResult {
        k,
        vertices: (0..n).filter(|&v| !removed[v]).collect(),
    })
}

/// Removes the lowest-index column with a single 1 together with the row
/// holding that 1. Column corank is unchanged.
pub fn one_sided_peel(m: &SparseBinMatrix) -> Result<SparseBinMatrix> {
    let columns = m.columns();
    let (col, rows) = columns
        .iter()
        .enumerate()
        .find(|(_, rows)| rows.len() == 1)
        .ok_or(Error::NoSingletonColumn)?;
    let row = rows[0] as usize;
    let keep: Vec<usize> = (0..m.n_rows()).filter(|&r| r != row).collect();
    Ok(m.select_rows(&keep).delete_columns(&[col]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorankDecomposition {
    pub corank_total: usize,
    pub i_ks: usize,
    pub corank_core: usize,
}

impl CorankDecomposition {
    /// `corank(A) == |I_KS| + corank(A_KS)`.
    pub fn identity_holds(&self) -> bool {
        self.corank_total == self.i_ks + self.corank_core
    }
}

pub fn corank_decomposition(adjacency: &SparseBinMatrix) -> Result<CorankDecomposition> {
    corank_decomposition_ordered(adjacency, LeafOrder::LowestIndex)
}

pub fn corank_decomposition_ordered(adjacency: &SparseBinMatrix, order: LeafOrder) -> Result<CorankDecomposition> {
    let ks = karp_sipser_ordered(adjacency, order)?;
    let core = adjacency.principal_submatrix(&ks.core_vertices);
    Ok(CorankDecomposition {
        corank_total: rank_exact(adjacency)?.corank_cols,
        i_ks: ks.i_ks(),
        corank_core: rank_exact(&core)?.corank_cols,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteDecomposition {
    pub corank_rows: usize,
    pub corank_cols: usize,
    pub isolated_left: usize,
    pub isolated_right: usize,
    pub core_corank_rows: usize,
    pub core_corank_cols: usize,
}

impl BipartiteDecomposition {
    pub fn identities_hold(&self) -> bool {
        self.corank_cols == self.isolated_right + self.core_corank_cols
            && self.corank_rows == self.isolated_left + self.core_corank_rows
    }

    /// Column corank is at least the isolated column count and row corank at
    /// least the isolated row count; for square `B` this reads
    /// `corank(B) >= max(|I_KS ∩ L|, |I_KS ∩ R|)`.
    pub fn lower_bound_holds(&self) -> bool {
        self.corank_cols >= self.isolated_right && self.corank_rows >= self.isolated_left
    }

    /// `corank(B) == max(|I_KS ∩ L|, |I_KS ∩ R|)`, meaningful for square `B`.
    pub fn max_isolated_matches(&self) -> bool {
        self.corank_cols == self.isolated_left.max(self.isolated_right)
    }
}

pub fn bipartite_decomposition(b: &SparseBinMatrix) -> Result<BipartiteDecomposition> {
    let ks = karp_sipser_bipartite(b);
    let (rows, cols) = bipartite_core_sides(b, &ks);
    let core = b.select_rows(&rows).select_columns(&cols);
    let full = rank_exact(b)?;
    let core_rank = rank_exact(&core)?;
    Ok(BipartiteDecomposition {
        corank_rows: full.corank_rows,
        corank_cols: full.corank_cols,
        isolated_left: ks.isolated_left.unwrap_or(0),
        isolated_right: ks.isolated_right.unwrap_or(0),
        core_corank_rows: core_rank.corank_rows,
        core_corank_cols: core_rank.corank_cols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> SparseBinMatrix {
        SparseBinMatrix::from_dense(&[[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    }

    fn cycle(n: usize) -> SparseBinMatrix {
        let entries = (0..n).flat_map(|i| [(i, (i + 1) % n), ((i + 1) % n, i)]);
        SparseBinMatrix::from_entries(n, n, entries).unwrap()
    }

    fn star3() -> SparseBinMatrix {
        SparseBinMatrix::from_dense(&[[0, 1, 1, 1], [1, 0, 0, 0], [1, 0, 0, 0], [1, 0, 0, 0]])
    }

    #[test]
    fn ks_examples() {
        let r = karp_sipser(&path3()).unwrap();
        assert_eq!(r.peeled, vec![0, 1]);
        assert_eq!(r.isolated, vec![2]);
        assert!(r.core_vertices.is_empty());
        assert_eq!(r.trace, vec![(0, 1)]);

        let r = karp_sipser(&cycle(4)).unwrap();
        assert_eq!(r.core_vertices, vec![0, 1, 2, 3]);
        assert!(r.isolated.is_empty());

        let r = karp_sipser(&star3()).unwrap();
        assert_eq!(r.trace, vec![(1, 0)]);
        assert_eq!(r.isolated, vec![2, 3]);
        assert_eq!(r.i_ks(), 2);
    }

    #[test]
    fn isolated_edge_is_removed_whole() {
        let edge = SparseBinMatrix::from_dense(&[[0, 1], [1, 0]]);
        let r = karp_sipser(&edge).unwrap();
        assert_eq!(r.peeled, vec![0, 1]);
        assert!(r.isolated.is_empty());
    }

    #[test]
    fn initially_isolated_vertices_count() {
        let r = karp_sipser(&SparseBinMatrix::zeros(5, 5)).unwrap();
        assert_eq!(r.i_ks(), 5);
    }

    #[test]
    fn highest_order_star() {
        let r = karp_sipser_ordered(&star3(), LeafOrder::HighestIndex).unwrap();
        assert_eq!(r.trace, vec![(3, 0)]);
        assert_eq!(r.isolated, vec![1, 2]);
    }

    #[test]
    fn rejects_non_adjacency() {
        let m = SparseBinMatrix::from_dense(&[[0, 1], [0, 0]]);
        assert!(matches!(karp_sipser(&m), Err(Error::NotSymmetric)));
        assert!(matches!(k_core(&m, 2), Err(Error::NotSymmetric)));
    }

    #[test]
    fn bipartite_examples() {
        let r = karp_sipser_bipartite(&SparseBinMatrix::from_dense(&[[1, 1]]));
        assert_eq!(r.trace, vec![(1, 0)]);
        assert_eq!((r.isolated_left, r.isolated_right), (Some(0), Some(1)));

        let r = karp_sipser_bipartite(&SparseBinMatrix::identity(3));
        assert_eq!(r.peeled.len(), 6);
        assert!(r.isolated.is_empty());

        let r = karp_sipser_bipartite(&SparseBinMatrix::zeros(2, 2));
        assert_eq!((r.isolated_left, r.isolated_right), (Some(2), Some(2)));
    }

    #[test]
    fn k_core_examples() {
        let k4 = SparseBinMatrix::from_dense(&[[0, 1, 1, 1], [1, 0, 1, 1], [1, 1, 0, 1], [1, 1, 1, 0]]);
        assert_eq!(k_core(&k4, 3).unwrap().vertices, vec![0, 1, 2, 3]);
        assert!(k_core(&star3(), 2).unwrap().vertices.is_empty());
        let mut entries: Vec<(usize, usize)> = cycle(5).entries().collect();
        entries.extend([(0, 5), (5, 0)]);
        let c5_pendant = SparseBinMatrix::from_entries(6, 6, entries).unwrap();
        assert_eq!(k_core(&c5_pendant, 2).unwrap().vertices, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn one_sided_peel_examples() {
        assert_eq!(one_sided_peel(&SparseBinMatrix::identity(3)).unwrap(), SparseBinMatrix::identity(2));
        let row = SparseBinMatrix::from_dense(&[[1, 1]]);
        let peeled = one_sided_peel(&row).unwrap();
        assert_eq!((peeled.n_rows(), peeled.n_cols()), (0, 1));
        assert_eq!(rank_exact(&row).unwrap().corank_cols, rank_exact(&peeled).unwrap().corank_cols);
        assert!(matches!(
            one_sided_peel(&SparseBinMatrix::ones(2, 2)),
            Err(Error::NoSingletonColumn)
        ));
    }

    #[test]
    fn decomposition_examples() {
        let d = corank_decomposition(&path3()).unwrap();
        assert_eq!((d.corank_total, d.i_ks, d.corank_core), (1, 1, 0));
        let d = corank_decomposition(&cycle(4)).unwrap();
        assert_eq!((d.corank_total, d.i_ks, d.corank_core), (2, 0, 2));
        assert!(d.identity_holds());
    }
}
