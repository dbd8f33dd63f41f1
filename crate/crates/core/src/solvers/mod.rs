mod cs;
mod dictionary;
mod dictl;
mod linalg;
mod objective;
mod omp;
mod ksvd;

pub use cs::{cs_fista, CsParams};
pub use dictionary::{Dictionary, SparseCode};
pub use dictl::{dictl_reconstruct, dictl_reconstruct_traced, dictl_x_update, DictlParams, DictlTrace};
pub use ksvd::ksvd_update;
pub use objective::{evaluate_objective_cs, evaluate_objective_dictl};
pub use omp::{omp, OMP_RESIDUAL_TOL};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::imaging::{ComplexImage, KSpace};
use crate::sampling::SamplingMask;

/// `U y` with unobserved entries zeroed.
pub(crate) fn observed(y: &KSpace, mask: &SamplingMask) -> Result<Array2<Complex64>> {
    if y.shape() != mask.shape() {
        return Err(Error::invalid_input(format!(
            "k-space {:?} and mask {:?} differ in shape",
            y.shape(),
            mask.shape()
        )));
    }
    let mut out = y.data().clone();
    out.zip_mut_with(mask.mask(), |v, &m| {
        if !m {
            *v = Complex64::new(0.0, 0.0);
        }
    });
    Ok(out)
}

pub(crate) fn zero_filled(fft: &crate::imaging::CenteredFft, uy: &Array2<Complex64>) -> ComplexImage {
    ComplexImage::from_raw(fft.inverse(uy))
}
