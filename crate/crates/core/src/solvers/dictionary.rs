use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `n x P` matrix of unit-norm atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: Array2<Complex64>,
}

impl Dictionary {
    /// Normalises every column; zero columns are rejected.
    pub fn new(mut atoms: Array2<Complex64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid_input("empty dictionary"));
        }
        for mut col in atoms.columns_mut() {
            let n = col.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::invalid_input("dictionary atoms must be finite and non-zero"));
            }
            col.mapv_inplace(|c| c / n);
        }
        Ok(Self { atoms })
    }

    pub(crate) fn from_normalized(atoms: Array2<Complex64>) -> Self {
        Self { atoms }
    }

    /// Overcomplete 2D DCT for `b x b` patches: the Kronecker product of two
    /// `b x m` cosine frames with `m = ceil(sqrt(P))`, truncated to `P` atoms.
    pub fn overcomplete_dct(b: usize, p: usize) -> Result<Self> {
        if b == 0 || p == 0 {
            return Err(Error::invalid_argument("block size and atom count must be positive"));
        }
        let m = (p as f64).sqrt().ceil() as usize;
        let mut d1 = Array2::<f64>::zeros((b, m));
        for k in 0..m {
            for i in 0..b {
                d1[[i, k]] = (std::f64::consts::PI * i as f64 * k as f64 / m as f64).cos();
            }
            if k > 0 {
                let mean = d1.column(k).sum() / b as f64;
                d1.column_mut(k).mapv_inplace(|v| v - mean);
            }
        }
        let mut atoms = Array2::zeros((b * b, p));
        for a in 0..p {
            let (k1, k2) = (a / m, a % m);
            for i in 0..b {
                for j in 0..b {
                    atoms[[i * b + j, a]] = Complex64::new(d1[[i, k1]] * d1[[j, k2]], 0.0);
                }
            }
        }
        // a column can vanish only when b is too small to resolve the frequency
        for mut col in atoms.columns_mut() {
            if col.iter().all(|c| c.norm() < 1e-12) {
                col[0] = Complex64::new(1.0, 0.0);
            }
        }
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &Array2<Complex64> {
        &self.atoms
    }


    pub fn n_atoms(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn atom_len(&self) -> usize {
        self.atoms.nrows()
    }

    /// `D^H D`.
    pub fn gram(&self) -> Array2<Complex64> {
        let dh = self.atoms.t().mapv(|c| c.conj());
        dh.dot(&self.atoms)
    }
}

/// `P x L` code matrix; column `l` has at most `K` non-zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    pub codes: Array2<Complex64>,
}

impl SparseCode {
    pub fn n_signals(&self) -> usize {
        self.codes.ncols()
    }

    /// Largest column support.
    pub fn max_support(&self) -> usize {
        self.codes
            .columns()
            .into_iter()
            .map(|c| c.iter().filter(|v| v.norm_sqr() > 0.0).count())
            .max()
            .unwrap_or(0)
    }

    /// `D A`.
    pub fn synthesize(&self, dict: &Dictionary) -> Array2<Complex64> {
        dict.atoms().dot(&self.codes)
    }
}
