use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{is_minimal_dependency, is_tree, is_tree_plus_edge, is_two_forest, structural_label, LabelCounts};
use crate::error::{Error, Result};
use crate::matrix::SparseBinMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCheckReport {
    pub k: usize,
    pub max_rows: usize,
    /// Row multisets examined.
    pub matrices: usize,
    pub minimal: usize,
    /// Minimal dependencies by number of ones, split by structural label.
    pub minimal_by_ones: BTreeMap<usize, LabelCounts>,
    pub violations: usize,
}

fn mask_matrix(k: usize, masks: &[u32]) -> SparseBinMatrix {
    let rows: Vec<Vec<usize>> = masks
        .iter()
        .map(|&mask| (0..k).filter(|&c| mask >> c & 1 == 1).collect())
        .collect();
    SparseBinMatrix::from_rows(k, &rows).expect("mask columns are in range")
}

fn violation(m: SparseBinMatrix, detail: String) -> Error {
    Error::ClassificationViolation { matrix: m, detail }
}

fn check_one(k: usize, masks: &[u32], report: &mut ClassCheckReport) -> Result<()> {
    let m = mask_matrix(k, masks);
    let ones = m.nnz();
    let minimal = is_minimal_dependency(&m)?;
    report.matrices += 1;
    let expected = if ones + 2 == 2 * k {
        Some(("tree", is_tree(&m)))
    } else if ones + 1 == 2 * k {
        Some(("two-forest", is_two_forest(&m)))
    } else if ones == 2 * k && masks.len() == k {
        Some(("tree-plus-edge", is_tree_plus_edge(&m)))
    } else {
        None
    };
    if let Some((class, predicate)) = expected {
        if predicate != minimal {
            return Err(violation(
                m,
                format!("{ones} ones: minimal = {minimal} but {class} predicate = {predicate}"),
            ));
        }
    }
    if minimal {
        if ones + 2 < 2 * k {
            return Err(violation(m, format!("minimal dependency with only {ones} ones")));
        }
        report.minimal += 1;
        report.minimal_by_ones.entry(ones).or_default().add(structural_label(&m));
    }
    Ok(())
}

/// Visits every multiset of nonzero rows (as column bitmasks, nondecreasing)
/// with at most `max_rows` rows and at most `max_ones` ones.
fn visit_multisets(
    k: usize,
    start: u32,
    masks: &mut Vec<u32>,
    ones: usize,
    max_rows: usize,
    max_ones: usize,
    f: &mut dyn FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    f(masks)?;
    if masks.len() == max_rows {
        return Ok(());
    }
    for mask in start..(1u32 << k) {
        let w = mask.count_ones() as usize;
        if ones + w <= max_ones {
            masks.push(mask);
            visit_multisets(k, mask, masks, ones + w, max_rows, max_ones, f)?;
            masks.pop();
        }
    }
    Ok(())
}

/// Checks the classification of minimal dependencies with `2k - 2`, `2k - 1`
/// and (with `k` nonzero rows) `2k` ones over every 0/1 matrix with `k`
/// columns, up to `max_rows` nonzero rows and `2k` ones. Row order and zero
/// rows do not affect any of the properties, so rows are enumerated as
/// multisets.
pub fn exhaustive_classification_check(k: usize, max_rows: usize) -> Result<ClassCheckReport> {
    if k == 0 || k > 4 || max_rows > 2 * k {
        return Err(Error::InvalidParameter(format!(
            "exhaustive check needs 1 <= k <= 4 and max_rows <= 2k (got k = {k}, max_rows = {max_rows})"
        )));
    }
    let mut report = ClassCheckReport {
        k,
        max_rows,
        matrices: 0,
        minimal: 0,
        minimal_by_ones: BTreeMap::new(),
        violations: 0,
    };
    let mut masks = Vec::with_capacity(max_rows);
    visit_multisets(k, 1, &mut masks, 0, max_rows, 2 * k, &mut |m| check_one(k, m, &mut report))?;
    Ok(report)
}
