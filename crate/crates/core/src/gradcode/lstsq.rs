use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::householder;
use faer::{Conj, Mat, Par};

use crate::matrix::SparseBinMatrix;

/// `|| (I - P) 1 ||^2` for `P` the orthogonal projector onto the column span,
/// from a column-pivoted Householder QR. Also returns the numerical rank.
pub(crate) fn qr_error(a: &SparseBinMatrix) -> (f64, usize) {
    let (m, k) = (a.n_rows(), a.n_cols());
    if m == 0 {
        return (0.0, 0);
    }
    if k == 0 || a.nnz() == 0 {
        return (m as f64, 0);
    }
    let mut dense = Mat::<f64>::zeros(m, k);
    for (r, c) in a.entries() {
        dense[(r, c)] = 1.0;
    }
    let qr = dense.col_piv_qr();
    let r_factor = qr.R();
    let size = m.min(k);
    let lead = r_factor[(0, 0)].abs();
    let threshold = lead * (m.max(k) as f64) * f64::EPSILON * 16.0;
    let rank = (0..size).take_while(|&i| r_factor[(i, i)].abs() > threshold).count();

    let mut rhs = Mat::<f64>::from_fn(m, 1, |_, _| 1.0);
    let block = qr.Q_coeff().nrows();
    let mut buf = MemBuffer::new(
        householder::apply_block_householder_sequence_transpose_on_the_left_in_place_scratch::<f64>(m, block, 1),
    );
    householder::apply_block_householder_sequence_transpose_on_the_left_in_place_with_conj(
        qr.Q_basis(),
        qr.Q_coeff(),
        Conj::No,
        rhs.as_mut(),
        Par::Seq,
        MemStack::new(&mut buf),
    );
    let err = (rank..m).map(|i| rhs[(i, 0)] * rhs[(i, 0)]).sum();
    (err, rank)
}

fn matvec(a: &SparseBinMatrix, x: &[f64], out: &mut [f64]) {
    for (r, o) in out.iter_mut().enumerate() {
        *o = a.row(r).iter().map(|&c| x[c as usize]).sum();
    }
}

fn matvec_t(a: &SparseBinMatrix, y: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (r, &v) in y.iter().enumerate() {
        if v != 0.0 {
            for &c in a.row(r) {
                out[c as usize] += v;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) struct CgOutcome {
    pub err: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// CGLS (conjugate gradient on the normal equations) for `min |A w - 1|`,
/// stopping when `|A^T r| <= rel_tol * |A^T 1|`.
pub(crate) fn cgls_error(a: &SparseBinMatrix, rel_tol: f64, max_iter: usize) -> CgOutcome {
    let (m, k) = (a.n_rows(), a.n_cols());
    let mut x = vec![0.0; k];
    let mut r = vec![1.0; m];
    let mut s = vec![0.0; k];
    matvec_t(a, &r, &mut s);
    let target = rel_tol * dot(&s, &s).sqrt();
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    let mut q = vec![0.0; m];
    let mut iterations = 0;
    let mut converged = gamma.sqrt() <= target;
    while !converged && iterations < max_iter {
        matvec(a, &p, &mut q);
        let qq = dot(&q, &q);
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi += alpha * pi;
        }
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= alpha * qi;
        }
        matvec_t(a, &r, &mut s);
        let gamma_next = dot(&s, &s);
        iterations += 1;
        if gamma_next.sqrt() <= target {
            converged = true;
            break;
        }
        let beta = gamma_next / gamma;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
        gamma = gamma_next;
    }
    // recompute the residual directly rather than trusting the recurrence
    matvec(a, &x, &mut q);
    let err = q.iter().map(|v| (1.0 - v) * (1.0 - v)).sum();
    CgOutcome {
        err,
        iterations,
        converged,
    }
}
