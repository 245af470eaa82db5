use serde::{Deserialize, Serialize};

use super::{dependency_record, DepClass, DependencyRecord};
use crate::ensembles::{sample_bernoulli, sample_sym_adj, Seed};
use crate::error::{Error, Result};
use crate::exactlin::dependent_column_set;
use crate::matrix::SparseBinMatrix;

pub const MAX_K: usize = 10;
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub tree: usize,
    pub two_forest: usize,
    pub tree_plus_edge: usize,
    pub other: usize,
}

impl LabelCounts {
    pub fn add(&mut self, label: DepClass) {
        *self.get_mut(label) += 1;
    }

    pub fn get(&self, label: DepClass) -> usize {
        match label {
            DepClass::Tree => self.tree,
            DepClass::TwoForest => self.two_forest,
            DepClass::TreePlusEdge => self.tree_plus_edge,
            DepClass::Other => self.other,
        }
    }

    fn get_mut(&mut self, label: DepClass) -> &mut usize {
        match label {
            DepClass::Tree => &mut self.tree,
            DepClass::TwoForest => &mut self.two_forest,
            DepClass::TreePlusEdge => &mut self.tree_plus_edge,
            DepClass::Other => &mut self.other,
        }
    }

    pub fn merge(&mut self, other: &LabelCounts) {
        for label in DepClass::ALL {
            *self.get_mut(label) += other.get(label);
        }
    }

    pub fn total(&self) -> usize {
        self.tree + self.two_forest + self.tree_plus_edge + self.other
    }

    pub fn tree_only(&self) -> bool {
        self.total() == self.tree
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyCensus {
    pub k_max: usize,
    /// `by_size[k]` counts minimal dependencies on `k` columns.
    pub by_size: Vec<LabelCounts>,
    /// `|D|`, the number of columns in some kernel support.
    pub dependent_columns: usize,
    pub subsets_tested: u64,
    pub budget: u64,
    pub truncated: bool,
    pub records: Vec<DependencyRecord>,
}

impl DependencyCensus {
    pub fn totals(&self) -> LabelCounts {
        let mut all = LabelCounts::default();
        for counts in &self.by_size {
            all.merge(counts);
        }
        all
    }
}

struct Search<'a> {
    k_max: usize,
    budget: u64,
    tested: u64,
    truncated: bool,
    adj: Vec<Vec<usize>>,
    /// `closed[u] > 0` iff u is in the current subset or adjacent to it.
    closed: Vec<u32>,
    columns: &'a [usize],
    col_rows: &'a [Vec<u32>],
    /// Scratch: local row slot for each parent row, `u32::MAX` when unused.
    row_slot: Vec<u32>,
    records: Vec<DependencyRecord>,
    error: Option<Error>,
}

impl Search<'_> {
    fn mark(&mut self, v: usize, delta: i32) {
        self.closed[v] = self.closed[v].wrapping_add_signed(delta);
        for i in 0..self.adj[v].len() {
            let u = self.adj[v][i];
            self.closed[u] = self.closed[u].wrapping_add_signed(delta);
        }
    }

    /// Tests one connected subset (local vertex indices). Returns false to stop.
    fn test(&mut self, subset: &[usize]) -> bool {
        if self.tested >= self.budget {
            self.truncated = true;
            return false;
        }
        self.tested += 1;
        let mut rows: Vec<Vec<usize>> = Vec::new();
        let mut touched: Vec<u32> = Vec::new();
        for (local, &v) in subset.iter().enumerate() {
            for &r in &self.col_rows[self.columns[v]] {
                let slot = &mut self.row_slot[r as usize];
                if *slot == u32::MAX {
                    *slot = rows.len() as u32;
                    rows.push(Vec::new());
                    touched.push(r);
                }
                rows[*slot as usize].push(local);
            }
        }
        for r in touched {
            self.row_slot[r as usize] = u32::MAX;
        }
        // a row meeting the subset once forces a zero coordinate
        if rows.iter().any(|r| r.len() == 1) {
            return true;
        }
        let mut parent: Vec<usize> = subset.iter().map(|&v| self.columns[v]).collect();
        let mut order: Vec<usize> = (0..subset.len()).collect();
        order.sort_by_key(|&i| parent[i]);
        let mut inverse = vec![0; subset.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        for row in &mut rows {
            for c in row.iter_mut() {
                *c = inverse[*c];
            }
        }
        parent.sort_unstable();
        let sub = SparseBinMatrix::from_rows(subset.len(), &rows).expect("valid local rows");
        match dependency_record(&sub, parent) {
            Ok(Some(record)) => self.records.push(record),
            Ok(None) => {}
            Err(e) => {
                self.error = Some(e);
                return false;
            }
        }
        true
    }

    /// ESU extension: every connected subset whose minimum vertex is `root`
    /// is reached exactly once.
    fn extend(&mut self, subset: &mut Vec<usize>, mut extension: Vec<usize>, root: usize) -> bool {
        if !self.test(subset) {
            return false;
        }
        if subset.len() == self.k_max {
            return true;
        }
        while let Some(w) = extension.pop() {
            let mut next = extension.clone();
            for &u in &self.adj[w] {
                if u > root && self.closed[u] == 0 {
                    next.push(u);
                }
            }
            subset.push(w);
            self.mark(w, 1);
            let keep_going = self.extend(subset, next, root);
            self.mark(w, -1);
            subset.pop();
            if !keep_going {
                return false;
            }
        }
        true
    }
}

/// All minimal dependencies on at most `k_max` columns, searched over
/// connected column subsets of the dependent set `D`.
pub fn enumerate_minimal_dependencies(m: &SparseBinMatrix, k_max: usize, budget: u64) -> Result<DependencyCensus> {
    let d = dependent_column_set(m);
    enumerate_minimal_dependencies_in(m, &d, k_max, budget)
}

/// As [`enumerate_minimal_dependencies`], restricted to `columns`.
pub fn enumerate_minimal_dependencies_in(
    m: &SparseBinMatrix,
    columns: &[usize],
    k_max: usize,
    budget: u64,
) -> Result<DependencyCensus> {
    if k_max == 0 || k_max > MAX_K {
        return Err(Error::InvalidParameter(format!("k_max must be in 1..={MAX_K}, got {k_max}")));
    }
    let mut columns = columns.to_vec();
    columns.sort_unstable();
    columns.dedup();
    if let Some(&c) = columns.iter().find(|&&c| c >= m.n_cols()) {
        return Err(Error::IndexOutOfRange {
            index: c,
            limit: m.n_cols(),
        });
    }
    let col_rows = m.columns();
    let mut local = vec![usize::MAX; m.n_cols()];
    for (i, &c) in columns.iter().enumerate() {
        local[c] = i;
    }
    let mut adj = vec![Vec::new(); columns.len()];
    for r in 0..m.n_rows() {
        let here: Vec<usize> = m.row(r).iter().map(|&c| local[c as usize]).filter(|&l| l != usize::MAX).collect();
        for (i, &a) in here.iter().enumerate() {
            for &b in &here[i + 1..] {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let n = columns.len();
    let mut search = Search {
        k_max,
        budget,
        tested: 0,
        truncated: false,
        adj,
        closed: vec![0; n],
        columns: &columns,
        col_rows: &col_rows,
        row_slot: vec![u32::MAX; m.n_rows()],
        records: Vec::new(),
        error: None,
    };
    for root in 0..n {
        let extension: Vec<usize> = search.adj[root].iter().copied().filter(|&u| u > root).collect();
        let mut subset = vec![root];
        search.mark(root, 1);
        let keep_going = search.extend(&mut subset, extension, root);
        search.mark(root, -1);
        if !keep_going {
            break;
        }
    }
    if let Some(e) = search.error {
        return Err(e);
    }
    let mut by_size = vec![LabelCounts::default(); k_max + 1];
    for record in &search.records {
        by_size[record.columns.len()].add(record.label);
    }
    let mut records = search.records;
    records.sort_by(|a, b| (a.columns.len(), &a.columns).cmp(&(b.columns.len(), &b.columns)));
    Ok(DependencyCensus {
        k_max,
        by_size,
        dependent_columns: columns.len(),
        subsets_tested: search.tested,
        budget,
        truncated: search.truncated,
        records,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharEnsemble {
    /// Symmetric adjacency matrix of G(n, d/n).
    Symmetric,
    /// `n x n` matrix with i.i.d. Bernoulli(d/n) entries.
    Bipartite,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharTrial {
    pub labels: LabelCounts,
    /// Bipartite only: labels of the dependencies among rows.
    pub transpose_labels: Option<LabelCounts>,
    pub dependent_columns: usize,
    pub truncated: bool,
    /// Every dependency found is a tree (bipartite: on at least one side).
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharReport {
    pub ensemble: CharEnsemble,
    pub n: usize,
    pub d: f64,
    pub k_max: usize,
    pub trials: usize,
    pub pass_count: usize,
    pub pass_fraction: f64,
    pub truncated_trials: usize,
    pub labels: LabelCounts,
}

/// One sample of the ensemble and the census of its minimal dependencies.
pub fn theorem_char_trial(
    ensemble: CharEnsemble,
    n: usize,
    d: f64,
    k_max: usize,
    budget: u64,
    seed: Seed,
) -> Result<CharTrial> {
    let p = if n == 0 { 0.0 } else { (d / n as f64).min(1.0) };
    match ensemble {
        CharEnsemble::Symmetric => {
            let a = sample_sym_adj(n, p, seed)?;
            let census = enumerate_minimal_dependencies(&a, k_max, budget)?;
            let labels = census.totals();
            Ok(CharTrial {
                pass: labels.tree_only(),
                labels,
                transpose_labels: None,
                dependent_columns: census.dependent_columns,
                truncated: census.truncated,
            })
        }
        CharEnsemble::Bipartite => {
            let b = sample_bernoulli(n, n, p, seed)?;
            let cols = enumerate_minimal_dependencies(&b, k_max, budget)?;
            let rows = enumerate_minimal_dependencies(&b.transpose(), k_max, budget)?;
            let (labels, transpose_labels) = (cols.totals(), rows.totals());
            Ok(CharTrial {
                pass: labels.tree_only() || transpose_labels.tree_only(),
                labels,
                transpose_labels: Some(transpose_labels),
                dependent_columns: cols.dependent_columns,
                truncated: cols.truncated || rows.truncated,
            })
        }
    }
}

pub fn theorem_char_check(
    ensemble: CharEnsemble,
    n: usize,
    d: f64,
    trials: usize,
    k_max: usize,
    seed: Seed,
) -> Result<CharReport> {
    let mut report = CharReport {
        ensemble,
        n,
        d,
        k_max,
        trials,
        pass_count: 0,
        pass_fraction: 0.0,
        truncated_trials: 0,
        labels: LabelCounts::default(),
    };
    for t in 0..trials {
        let trial = theorem_char_trial(ensemble, n, d, k_max, DEFAULT_BUDGET, seed.with_trial(t as u64))?;
        report.pass_count += trial.pass as usize;
        report.truncated_trials += trial.truncated as usize;
        report.labels.merge(&trial.labels);
        if let Some(t) = &trial.transpose_labels {
            report.labels.merge(t);
        }
    }
    if trials > 0 {
        report.pass_fraction = report.pass_count as f64 / trials as f64;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_no_dependencies() {
        let c = enumerate_minimal_dependencies(&SparseBinMatrix::identity(6), 5, DEFAULT_BUDGET).unwrap();
        assert_eq!(c.totals().total(), 0);
        assert_eq!(c.dependent_columns, 0);
        assert!(!c.truncated);
    }

    #[test]
    fn path_incidence_is_one_tree() {
        let m = SparseBinMatrix::from_rows(4, &[vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        let c = enumerate_minimal_dependencies(&m, 8, DEFAULT_BUDGET).unwrap();
        assert_eq!(c.records.len(), 1);
        assert_eq!(c.records[0].columns, vec![0, 1, 2, 3]);
        assert_eq!(c.records[0].label, DepClass::Tree);
        assert_eq!(c.by_size[4].tree, 1);
    }

    #[test]
    fn zero_columns_are_singleton_trees() {
        let m = SparseBinMatrix::from_rows(3, &[vec![0, 2], vec![0, 2]]).unwrap();
        let c = enumerate_minimal_dependencies(&m, 4, DEFAULT_BUDGET).unwrap();
        assert_eq!(c.by_size[1].tree, 1);
        assert_eq!(c.by_size[2].tree_plus_edge, 1);
    }

    #[test]
    fn budget_truncates() {
        let m = SparseBinMatrix::ones(3, 6);
        let c = enumerate_minimal_dependencies(&m, 6, 5).unwrap();
        assert!(c.truncated);
        assert_eq!(c.subsets_tested, 5);
    }

    #[test]
    fn esu_visits_each_connected_subset_once() {
        // all subsets of K4's columns are connected: 4 + 6 + 4 + 1
        let m = SparseBinMatrix::ones(1, 4);
        let c = enumerate_minimal_dependencies_in(&m, &[0, 1, 2, 3], 4, u64::MAX).unwrap();
        assert_eq!(c.subsets_tested, 15);
        // a path of 4 columns has 4 + 3 + 2 + 1 connected subsets
        let p = SparseBinMatrix::from_rows(4, &[vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        let c = enumerate_minimal_dependencies_in(&p, &[0, 1, 2, 3], 4, u64::MAX).unwrap();
        assert_eq!(c.subsets_tested, 10);
    }

    #[test]
    fn empty_graph_is_vacuously_tree_only() {
        let t = theorem_char_trial(CharEnsemble::Symmetric, 20, 0.0, 5, DEFAULT_BUDGET, Seed::new(1)).unwrap();
        assert!(t.pass);
        // every column is zero: twenty singleton trees
        assert_eq!(t.labels.tree, 20);
    }
}
