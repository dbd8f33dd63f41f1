use ndarray::{Array1, Array2};
use num_complex::Complex64;

use super::dictionary::{Dictionary, SparseCode};
use crate::error::{Error, Result};

const POWER_ITERS: usize = 500;
const POWER_TOL: f64 = 1e-13;

/// One K-SVD sweep over the atoms in index order.
///
/// Each used atom and its code row are replaced by the best rank-1
/// approximation of the residual restricted to the signals that use it.
/// Unused atoms are re-seeded with the worst represented signals (distinct
/// signals for distinct atoms) and keep an all-zero code row.
pub fn ksvd_update(dict: &Dictionary, code: &SparseCode, signals: &Array2<Complex64>) -> Result<(Dictionary, SparseCode)> {
    let (n, l) = signals.dim();
    let p = dict.n_atoms();
    if dict.atom_len() != n || code.codes.dim() != (p, l) {
        return Err(Error::invalid_input(format!(
            "inconsistent shapes: atoms {:?}, codes {:?}, signals {:?}",
            dict.atoms().dim(),
            code.codes.dim(),
            signals.dim()
        )));
    }
    let mut atoms = dict.atoms().clone();
    let mut codes = code.codes.clone();
    // one contiguous row per signal
    let mut residual = (signals - &atoms.dot(&codes)).reversed_axes().as_standard_layout().into_owned();
    let mut reseeded: Vec<usize> = Vec::new();

    for a in 0..p {
        let users: Vec<usize> = (0..l).filter(|&j| codes[[a, j]].norm_sqr() > 0.0).collect();
        if users.is_empty() {
            let norms: Vec<f64> = residual.rows().into_iter().map(|r| r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()).collect();
            let worst = (0..l)
                .filter(|j| !reseeded.contains(j))
                .fold(None, |best: Option<usize>, j| match best {
                    Some(b) if norms[b] >= norms[j] => Some(b),
                    _ => Some(j),
                });
            if let Some(j) = worst {
                let s = signals.column(j);
                let sn = s.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if norms[j] > 0.0 && sn > 0.0 {
                    atoms.column_mut(a).assign(&s.mapv(|c| c / sn));
                    reseeded.push(j);
                }
            }
            continue;
        }
        // rows of E^T: r_w + d a_w over the users w
        let d_old = atoms.column(a).to_owned();
        let mut et = Array2::zeros((users.len(), n));
        for (mut row, &j) in et.rows_mut().into_iter().zip(&users) {
            let x = codes[[a, j]];
            row.iter_mut().zip(residual.row(j)).zip(d_old.iter()).for_each(|((e, &r), &d)| *e = r + d * x);
        }
        let d_new = leading_left_singular(&et, &d_old);
        // code row = d^H E
        let row = et.dot(&d_new.mapv(|c| c.conj()));
        for ((erow, &j), &x) in et.rows().into_iter().zip(&users).zip(row.iter()) {
            codes[[a, j]] = x;
            residual.row_mut(j).iter_mut().zip(erow).zip(d_new.iter()).for_each(|((r, &e), &d)| *r = e - d * x);
        }
        atoms.column_mut(a).assign(&d_new);
    }
    Ok((Dictionary::from_normalized(atoms), SparseCode { codes }))
}

/// Power iteration on `E E^H` (given `E^T`), started from `start`. The
/// Rayleigh quotient never decreases, so the fit is never worse than the
/// starting atom.
fn leading_left_singular(et: &Array2<Complex64>, start: &Array1<Complex64>) -> Array1<Complex64> {
    let m = et.t().dot(&et.mapv(|c| c.conj()));
    let mut u = start.clone();
    let mut mu = m.dot(&u);
    let mut lambda = dot_re(&u, &mu);
    for _ in 0..POWER_ITERS {
        let nn = mu.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(nn > 0.0) {
            break;
        }
        let next = mu.mapv(|c| c / nn);
        let m_next = m.dot(&next);
        let next_lambda = dot_re(&next, &m_next);
        if next_lambda < lambda {
            break;
        }
        let done = next_lambda - lambda <= POWER_TOL * next_lambda.max(1e-300);
        u = next;
        mu = m_next;
        lambda = next_lambda;
        if done {
            break;
        }
    }
    u
}

fn dot_re(u: &Array1<Complex64>, v: &Array1<Complex64>) -> f64 {
    u.iter().zip(v.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

#[cfg(test)]
mod tests {
    use super::super::omp::{omp, residual_norms};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
        Array2::from_shape_fn((rows, cols), |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn fro(signals: &Array2<Complex64>, d: &Dictionary, a: &SparseCode) -> f64 {
        (signals - &a.synthesize(d)).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn error_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let signals = random_matrix(16, 200, &mut rng);
        let mut d = Dictionary::new(random_matrix(16, 24, &mut rng)).unwrap();
        for _ in 0..5 {
            let a = omp(&d, &signals, 3).unwrap();
            let before = fro(&signals, &d, &a);
            let (d2, a2) = ksvd_update(&d, &a, &signals).unwrap();
            let after = fro(&signals, &d2, &a2);
            assert!(after <= before + 1e-10, "{after} > {before}");
            assert!(a2.max_support() <= 3);
            for col in d2.atoms().columns() {
                let n: f64 = col.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                assert!((n - 1.0).abs() < 1e-10);
            }
            d = d2;
        }
    }

    #[test]
    fn exact_representation_is_a_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = Dictionary::new(random_matrix(16, 8, &mut rng)).unwrap();
        let mut codes = Array2::zeros((8, 30));
        for j in 0..30 {
            codes[[j % 8, j]] = Complex64::new(rng.gen_range(0.5..2.0), 0.0);
            codes[[(j + 3) % 8, j]] = Complex64::new(0.0, rng.gen_range(0.5..2.0));
        }
        let a = SparseCode { codes };
        let signals = a.synthesize(&d);
        let (d2, a2) = ksvd_update(&d, &a, &signals).unwrap();
        assert!(fro(&signals, &d2, &a2) < 1e-10);
    }

    #[test]
    fn single_atom_learns_common_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_matrix(9, 1, &mut rng);
        let signals = Array2::from_shape_fn((9, 12), |(i, _)| s[[i, 0]]);
        let start = Dictionary::new(random_matrix(9, 1, &mut rng)).unwrap();
        let a = SparseCode { codes: Array2::from_elem((1, 12), Complex64::new(0.3, 0.0)) };
        let (d, a) = ksvd_update(&start, &a, &signals).unwrap();
        let sn = s.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let atom = d.atoms().column(0);
        let overlap: Complex64 = atom.iter().zip(s.iter()).map(|(x, y)| x.conj() * y / sn).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-10);
        assert!(fro(&signals, &d, &a) < 1e-9);
    }

    #[test]
    fn unused_atoms_reseeded_with_distinct_signals() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let signals = random_matrix(8, 10, &mut rng);
        let d = Dictionary::new(random_matrix(8, 3, &mut rng)).unwrap();
        let a = SparseCode { codes: Array2::zeros((3, 10)) };
        let (d2, a2) = ksvd_update(&d, &a, &signals).unwrap();
        assert_eq!(a2.max_support(), 0);
        let norms = residual_norms(&signals);
        let mut order: Vec<usize> = (0..10).collect();
        order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());
        for (atom, &sig) in order.iter().take(3).enumerate() {
            let s = signals.column(sig);
            let sn = s.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for i in 0..8 {
                assert!((d2.atoms()[[i, atom]] - s[i] / sn).norm() < 1e-12);
            }
        }
    }
}
