//! Minimal linear dependencies and their structural classes.
//!
//! A `k`-column 0/1 matrix is a minimal dependency when it has rank `k - 1`
//! and its one-dimensional kernel is spanned by a vector with no zero
//! coordinate. The structural classes read the nonzero rows as edges (support
//! 2) or a hyperedge (support 3) on the column set:
//!
//! * `Tree`: `k - 1` edges forming a spanning tree (`2k - 2` ones).
//! * `TwoForest`: `k - 2` edges forming a forest with two components, plus one
//!   support-3 row with two entries at even distance in one component and the
//!   third in the other (`2k - 1` ones).
//! * `TreePlusEdge`: `k` edges forming a connected graph whose unique cycle is
//!   even; a doubled edge is a 2-cycle (`2k` ones).

mod enumerate;
mod exhaustive;

use serde::{Deserialize, Serialize};

pub use enumerate::{
    enumerate_minimal_dependencies, enumerate_minimal_dependencies_in, theorem_char_check, theorem_char_trial,
    CharEnsemble, CharReport, CharTrial, DependencyCensus, LabelCounts, DEFAULT_BUDGET, MAX_K,
};
pub use exhaustive::{exhaustive_classification_check, ClassCheckReport};

use crate::error::{Error, Result};
use crate::exactlin::{kernel_basis, rank_exact, KernelVector};
use crate::matrix::SparseBinMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DepClass {
    Tree,
    TwoForest,
    TreePlusEdge,
    Other,
}

impl DepClass {
    pub const ALL: [DepClass; 4] = [DepClass::Tree, DepClass::TwoForest, DepClass::TreePlusEdge, DepClass::Other];

    pub fn name(self) -> &'static str {
        match self {
            DepClass::Tree => "tree",
            DepClass::TwoForest => "two_forest",
            DepClass::TreePlusEdge => "tree_plus_edge",
            DepClass::Other => "other",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyRecord {
    /// Column indices `S` in the parent matrix, increasing.
    pub columns: Vec<usize>,
    pub kernel: KernelVector,
    /// Number of ones in `M_S`.
    pub ones_count: usize,
    /// Number of nonzero rows of `M_S`.
    pub nonzero_rows: usize,
    pub label: DepClass,
}

/// Disjoint-set forest with path halving.
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

fn nonzero_rows(m: &SparseBinMatrix) -> Vec<&[u32]> {
    (0..m.n_rows()).map(|r| m.row(r)).filter(|r| !r.is_empty()).collect()
}

fn edge_lists(k: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); k];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

/// BFS from `start`; `None` for unreachable vertices.
fn bfs_depths(adj: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut depth = vec![None; adj.len()];
    depth[start] = Some(0);
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let dv = depth[v].unwrap();
        for &w in &adj[v] {
            if depth[w].is_none() {
                depth[w] = Some(dv + 1);
                queue.push_back(w);
            }
        }
    }
    depth
}

/// Whether the columns are connected through shared nonzero rows.
pub fn columns_connected(m: &SparseBinMatrix) -> bool {
    let k = m.n_cols();
    if k <= 1 {
        return true;
    }
    let mut uf = UnionFind::new(k);
    for row in nonzero_rows(m) {
        for w in row.windows(2) {
            uf.union(w[0] as usize, w[1] as usize);
        }
    }
    let root = uf.find(0);
    (1..k).all(|c| uf.find(c) == root)
}

/// Rows as edges, if every nonzero row has support exactly 2.
fn all_edges(rows: &[&[u32]]) -> Option<Vec<(usize, usize)>> {
    rows.iter()
        .map(|r| (r.len() == 2).then(|| (r[0] as usize, r[1] as usize)))
        .collect()
}

/// Incidence matrix of a spanning tree on the columns (a lone zero column is
/// the one-vertex tree).
pub fn is_tree(m: &SparseBinMatrix) -> bool {
    let k = m.n_cols();
    let rows = nonzero_rows(m);
    if k == 0 || m.nnz() != 2 * k - 2 || rows.len() != k - 1 {
        return false;
    }
    let Some(edges) = all_edges(&rows) else {
        return false;
    };
    let mut uf = UnionFind::new(k);
    edges.iter().all(|&(a, b)| uf.union(a, b))
}

pub fn is_two_forest(m: &SparseBinMatrix) -> bool {
    let k = m.n_cols();
    let rows = nonzero_rows(m);
    if k < 3 || m.nnz() != 2 * k - 1 || rows.len() != k - 1 {
        return false;
    }
    let (triples, pairs): (Vec<&[u32]>, Vec<&[u32]>) = rows.iter().partition(|r| r.len() == 3);
    if triples.len() != 1 || pairs.len() != k - 2 || pairs.iter().any(|r| r.len() != 2) {
        return false;
    }
    let edges: Vec<(usize, usize)> = pairs.iter().map(|r| (r[0] as usize, r[1] as usize)).collect();
    let mut uf = UnionFind::new(k);
    if !edges.iter().all(|&(a, b)| uf.union(a, b)) {
        return false;
    }
    // k - 2 acyclic edges on k vertices: exactly two components
    let t: Vec<usize> = triples[0].iter().map(|&c| c as usize).collect();
    let comps: Vec<usize> = t.iter().map(|&c| uf.find(c)).collect();
    let (a, b) = match (comps[0] == comps[1], comps[1] == comps[2], comps[0] == comps[2]) {
        (true, false, false) => (t[0], t[1]),
        (false, true, false) => (t[1], t[2]),
        (false, false, true) => (t[0], t[2]),
        _ => return false,
    };
    let depth = bfs_depths(&edge_lists(k, &edges), a);
    depth[b].is_some_and(|d| d % 2 == 0)
}

pub fn is_tree_plus_edge(m: &SparseBinMatrix) -> bool {
    let k = m.n_cols();
    let rows = nonzero_rows(m);
    if k < 2 || m.nnz() != 2 * k || rows.len() != k {
        return false;
    }
    let Some(edges) = all_edges(&rows) else {
        return false;
    };
    // connected with k edges on k vertices: exactly one cycle, which is even
    // iff the graph is bipartite
    let depth = bfs_depths(&edge_lists(k, &edges), 0);
    depth.iter().all(Option::is_some) && edges.iter().all(|&(a, b)| (depth[a].unwrap() + depth[b].unwrap()) % 2 == 1)
}

/// Structural label, without checking minimality.
pub fn structural_label(m: &SparseBinMatrix) -> DepClass {
    if is_tree(m) {
        DepClass::Tree
    } else if is_two_forest(m) {
        DepClass::TwoForest
    } else if is_tree_plus_edge(m) {
        DepClass::TreePlusEdge
    } else {
        DepClass::Other
    }
}

fn has_singleton_row(m: &SparseBinMatrix) -> bool {
    (0..m.n_rows()).any(|r| m.row_weight(r) == 1)
}

/// The spanning kernel vector when `m` is a minimal dependency.
pub fn minimal_dependency_kernel(m: &SparseBinMatrix) -> Result<Option<KernelVector>> {
    let k = m.n_cols();
    // a row with a single 1 forces that coordinate of any kernel vector to 0
    if k == 0 || has_singleton_row(m) || m.nnz() + 2 < 2 * k {
        return Ok(None);
    }
    if rank_exact(m)?.rank != k - 1 {
        return Ok(None);
    }
    let mut basis = kernel_basis(m)?;
    debug_assert_eq!(basis.len(), 1);
    let v = basis.pop().expect("corank 1 has a kernel vector");
    Ok((v.support.len() == k).then_some(v))
}

pub fn is_minimal_dependency(m: &SparseBinMatrix) -> Result<bool> {
    Ok(minimal_dependency_kernel(m)?.is_some())
}

pub fn classify(m: &SparseBinMatrix) -> Result<DepClass> {
    if !is_minimal_dependency(m)? {
        return Err(Error::NotMinimal);
    }
    Ok(structural_label(m))
}

/// Builds the record for `m = M_S`, or `None` if it is not minimal.
pub fn dependency_record(m: &SparseBinMatrix, columns: Vec<usize>) -> Result<Option<DependencyRecord>> {
    let Some(kernel) = minimal_dependency_kernel(m)? else {
        return Ok(None);
    };
    let record = DependencyRecord {
        columns,
        kernel,
        ones_count: m.nnz(),
        nonzero_rows: nonzero_rows(m).len(),
        label: structural_label(m),
    };
    if record.ones_count + 2 < 2 * m.n_cols() || !columns_connected(m) {
        return Err(Error::ClassificationViolation {
            matrix: m.clone(),
            detail: "minimal dependency with fewer than 2k-2 ones or disconnected columns".into(),
        });
    }
    Ok(Some(record))
}

/// For a tree dependency, checks `v_i = (-1)^{d(i, 0)} v_0` modulo every
/// prime, with `d` the tree distance.
pub fn tree_kernel_signs_hold(m: &SparseBinMatrix, kernel: &KernelVector) -> bool {
    let k = m.n_cols();
    let rows = nonzero_rows(m);
    let Some(edges) = all_edges(&rows) else {
        return false;
    };
    let depth = bfs_depths(&edge_lists(k, &edges), 0);
    kernel.primes.iter().zip(&kernel.residues).all(|(&p, v)| {
        (0..k).all(|i| match depth[i] {
            Some(d) if d % 2 == 0 => v[i] == v[0],
            Some(_) => (v[i] as u64 + v[0] as u64) % p as u64 == 0,
            None => false,
        })
    })
}
