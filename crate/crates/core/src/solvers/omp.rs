use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;
use rayon::prelude::*;

use super::dictionary::{Dictionary, SparseCode};
use super::linalg::{cholesky_solve, norm};
use crate::error::{Error, Result};

/// Residual norm below which coding stops early.
pub const OMP_RESIDUAL_TOL: f64 = 1e-10;

/// Orthogonal matching pursuit on every column of `signals`.
///
/// Greedy selection uses the largest `|<r, d_p>|` (lowest index on ties) and
/// refits all selected coefficients by least squares after every pick.
pub fn omp(dict: &Dictionary, signals: &Array2<Complex64>, k: usize) -> Result<SparseCode> {
    let p = dict.n_atoms();
    if k == 0 || k > p {
        return Err(Error::invalid_argument(format!("sparsity {k} must be in 1..={p}")));
    }
    if signals.nrows() != dict.atom_len() {
        return Err(Error::invalid_input(format!(
            "signals have length {}, atoms {}",
            signals.nrows(),
            dict.atom_len()
        )));
    }
    let gram = dict.gram();
    // gram_cols.row(a) is column a of the Gram matrix
    let gram_cols = gram.t().as_standard_layout().into_owned();
    // contiguous rows: one per atom, one per signal
    let atoms_t = dict.atoms().t().as_standard_layout().into_owned();
    let signals_t = signals.t().as_standard_layout().into_owned();
    let corr0 = signals_t.dot(&dict.atoms().mapv(|c| c.conj()));
    let columns: Vec<Vec<(usize, Complex64)>> = (0..signals.ncols())
        .into_par_iter()
        .map(|l| code_one(&atoms_t, &gram, &gram_cols, corr0.row(l), signals_t.row(l), k))
        .collect();
    let mut codes = Array2::zeros((p, signals.ncols()));
    for (l, col) in columns.into_iter().enumerate() {
        for (idx, v) in col {
            codes[[idx, l]] = v;
        }
    }
    Ok(SparseCode { codes })
}

fn code_one(
    atoms_t: &Array2<Complex64>,
    gram: &Array2<Complex64>,
    gram_cols: &Array2<Complex64>,
    corr0: ArrayView1<Complex64>,
    signal: ArrayView1<Complex64>,
    k: usize,
) -> Vec<(usize, Complex64)> {
    let p = corr0.len();
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut coef: Vec<Complex64> = Vec::new();
    let mut corr = corr0.to_owned();
    let mut selected = vec![false; p];
    let mut residual = signal.to_vec();
    let signal_scale = norm(&residual);
    if signal_scale < OMP_RESIDUAL_TOL {
        return Vec::new();
    }
    while support.len() < k {
        let mut best = None;
        let mut best_val = 0.0;
        for (idx, c) in corr.iter().enumerate() {
            let v = c.norm_sqr();
            if !selected[idx] && v > best_val {
                best_val = v;
                best = Some(idx);
            }
        }
        let Some(pick) = best else { break };
        if best_val.sqrt() <= 1e-13 * signal_scale {
            break;
        }
        support.push(pick);
        selected[pick] = true;
        let m = support.len();
        let g_ss: Vec<Complex64> = support
            .iter()
            .flat_map(|&a| support.iter().map(move |&b| gram[[a, b]]))
            .collect();
        let rhs: Vec<Complex64> = support.iter().map(|&a| corr0[a]).collect();
        match cholesky_solve(&g_ss, &rhs, m) {
            Some(x) => coef = x,
            None => {
                // the new atom is linearly dependent on the support
                support.pop();
                break;
            }
        }
        corr.assign(&corr0);
        for (&a, &x) in support.iter().zip(&coef) {
            corr.iter_mut().zip(gram_cols.row(a)).for_each(|(c, &g)| *c -= g * x);
        }
        residual.iter_mut().zip(signal.iter()).for_each(|(r, &s)| *r = s);
        for (&a, &x) in support.iter().zip(&coef) {
            residual.iter_mut().zip(atoms_t.row(a)).for_each(|(r, &d)| *r -= d * x);
        }
        if norm(&residual) < OMP_RESIDUAL_TOL {
            break;
        }
    }
    support.into_iter().zip(coef).collect()
}

/// Per-column residual norms `||s_l - D a_l||`.
#[cfg(test)]
pub(crate) fn residual_norms(residual: &Array2<Complex64>) -> Vec<f64> {
    residual
        .axis_iter(ndarray::Axis(1))
        .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
        .collect()
}
