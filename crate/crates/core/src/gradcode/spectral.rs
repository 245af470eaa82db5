use faer::Mat;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::Seed;
use crate::error::{Error, Result};
use crate::matrix::SparseBinMatrix;

/// Largest minimum dimension handled by a dense SVD.
pub const DENSE_SVD_MAX_DIM: usize = 512;
const POWER_MAX_ITER: usize = 200_000;

fn gram_apply(a: &SparseBinMatrix, v: &[f64], tmp: &mut [f64], out: &mut [f64]) {
    for (r, t) in tmp.iter_mut().enumerate() {
        *t = a.row(r).iter().map(|&c| v[c as usize]).sum();
    }
    out.fill(0.0);
    for (r, &t) in tmp.iter().enumerate() {
        for &c in a.row(r) {
            out[c as usize] += t;
        }
    }
}

fn project_out(v: &mut [f64], u: &[f64]) {
    let dot: f64 = v.iter().zip(u).map(|(x, y)| x * y).sum();
    for (x, y) in v.iter_mut().zip(u) {
        *x -= dot * y;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Largest singular value of `a` restricted to the orthogonal complement of
/// `deflate`, and its right singular vector, by power iteration on `A^T A`.
fn power_iteration(a: &SparseBinMatrix, tol: f64, deflate: Option<&[f64]>, seed: u64) -> Result<(f64, Vec<f64>)> {
    let n = a.n_cols();
    let mut rng = Seed::new(seed).rng();
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    if let Some(u) = deflate {
        project_out(&mut v, u);
    }
    if normalize(&mut v) == 0.0 {
        return Ok((0.0, v));
    }
    let mut tmp = vec![0.0; a.n_rows()];
    let mut w = vec![0.0; n];
    let mut sigma = f64::INFINITY;
    for _ in 0..POWER_MAX_ITER {
        gram_apply(a, &v, &mut tmp, &mut w);
        if let Some(u) = deflate {
            project_out(&mut w, u);
        }
        let lambda = normalize(&mut w);
        std::mem::swap(&mut v, &mut w);
        let next = lambda.sqrt();
        if lambda == 0.0 || (next - sigma).abs() <= tol {
            return Ok((next, v));
        }
        sigma = next;
    }
    Err(Error::ConvergenceFailure {
        method: "power iteration",
        iterations: POWER_MAX_ITER,
    })
}

/// Second-largest singular value. Dense SVD when the smaller dimension is at
/// most [`DENSE_SVD_MAX_DIM`]; otherwise power iteration on `A^T A`, deflating
/// the numerically computed top right singular vector.
pub fn sigma2(a: &SparseBinMatrix, tol: f64) -> Result<f64> {
    let (m, n) = (a.n_rows(), a.n_cols());
    if m.min(n) < 2 {
        return Ok(0.0);
    }
    if m.min(n) <= DENSE_SVD_MAX_DIM {
        let mut dense = Mat::<f64>::zeros(m, n);
        for (r, c) in a.entries() {
            dense[(r, c)] = 1.0;
        }
        let values = dense.singular_values().map_err(|_| Error::ConvergenceFailure {
            method: "dense SVD",
            iterations: 0,
        })?;
        return Ok(values[1]);
    }
    let (_, top) = power_iteration(a, tol, None, 0x51)?;
    let (second, _) = power_iteration(a, tol, Some(&top), 0x52)?;
    Ok(second)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralBound {
    pub sigma2: f64,
    pub s: usize,
    /// The common row weight `D`.
    pub row_weight: usize,
    /// `(sigma2 / D)^2 * s * M / (M - s) / N` for an `N x M` matrix.
    pub bound: f64,
}

impl SpectralBound {
    pub fn from_sigma2(sigma2: f64, row_weight: usize, s: usize, n_rows: usize, n_cols: usize) -> Self {
        let ratio = sigma2 / row_weight as f64;
        let m = n_cols as f64;
        let bound = ratio * ratio * s as f64 * m / (m - s as f64) / n_rows as f64;
        Self {
            sigma2,
            s,
            row_weight,
            bound,
        }
    }
}

/// Normalized worst-case decoding error bound for `s` stragglers, valid when
/// every row has the same weight.
pub fn adversarial_bound(a: &SparseBinMatrix, s: usize) -> Result<SpectralBound> {
    let weights = a.row_weights();
    let min = weights.iter().copied().min().unwrap_or(0);
    let max = weights.iter().copied().max().unwrap_or(0);
    if min != max || min == 0 {
        return Err(Error::RowWeightNotUniform { min, max });
    }
    if s >= a.n_cols() {
        return Err(Error::InvalidParameter(format!(
            "{s} stragglers leave no column of {}",
            a.n_cols()
        )));
    }
    let sigma = sigma2(a, 1e-10)?;
    Ok(SpectralBound::from_sigma2(sigma, min, s, a.n_rows(), a.n_cols()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma2_examples() {
        assert!(sigma2(&SparseBinMatrix::ones(6, 7), 1e-12).unwrap().abs() < 1e-9);
        assert!((sigma2(&SparseBinMatrix::identity(6), 1e-12).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn power_iteration_matches_svd() {
        // a cycle's incidence matrix: singular values 2|cos(pi j / n)|
        let n = 12;
        let rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
        let a = SparseBinMatrix::from_rows(n, &rows).unwrap();
        let dense = sigma2(&a, 1e-12).unwrap();
        let (_, top) = power_iteration(&a, 1e-13, None, 1).unwrap();
        let (power, _) = power_iteration(&a, 1e-13, Some(&top), 2).unwrap();
        let expected = 2.0 * (std::f64::consts::PI / n as f64).cos();
        assert!((dense - expected).abs() < 1e-9, "{dense} vs {expected}");
        assert!((power - expected).abs() < 1e-5, "{power} vs {expected}");
    }

    #[test]
    fn bound_examples() {
        let b = adversarial_bound(&SparseBinMatrix::ones(5, 5), 2).unwrap();
        assert!(b.bound.abs() < 1e-12);
        let n = 7;
        let b = adversarial_bound(&SparseBinMatrix::identity(n), 1).unwrap();
        assert!((b.bound - 1.0 / (n as f64 - 1.0)).abs() < 1e-12);
        let uneven = SparseBinMatrix::from_dense(&[[1, 1], [0, 1]]);
        assert!(matches!(
            adversarial_bound(&uneven, 1),
            Err(Error::RowWeightNotUniform { min: 1, max: 2 })
        ));
    }
}
