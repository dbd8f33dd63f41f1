use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{observed, zero_filled};
use crate::error::{Error, Result};
use crate::imaging::{CenteredFft, ComplexImage, KSpace};
use crate::sampling::SamplingMask;
use crate::transforms::{dwt2_padded, idwt2, soft_threshold_inplace, Wavelet, DEFAULT_LEVELS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CsParams {
    pub lambda: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub wavelet: Wavelet,
    pub levels: usize,
}

impl Default for CsParams {
    fn default() -> Self {
        Self { lambda: 1e-3, max_iters: 200, rel_tol: 1e-6, wavelet: Wavelet::Db4, levels: DEFAULT_LEVELS }
    }
}

impl CsParams {
    pub fn with_lambda(lambda: f64) -> Self {
        Self { lambda, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid_argument(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid_argument("max_iters must be >= 1"));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(Error::invalid_argument("rel_tol must be >= 0"));
        }
        Ok(())
    }
}

/// FISTA for `min 0.5 ||U F x - y||^2 + lambda ||W x||_1` with unit step.
pub fn cs_fista(y: &KSpace, mask: &SamplingMask, params: &CsParams) -> Result<ComplexImage> {
    params.validate()?;
    let uy = observed(y, mask)?;
    let fft = CenteredFft::new(y.shape());
    let mut x = zero_filled(&fft, &uy).into_data();
    let mut z = x.clone();
    let mut t = 1.0f64;
    let m = mask.mask();
    for _ in 0..params.max_iters {
        // gradient step: z - F^H (U F z - U y)
        let mut k = z.clone();
        fft.forward_inplace(&mut k);
        ndarray::Zip::from(&mut k).and(m).and(&uy).for_each(|v, &keep, &obs| {
            *v = if keep { *v - obs } else { Complex64::new(0.0, 0.0) };
        });
        fft.inverse_inplace(&mut k);
        let v = &z - &k;
        let mut c = dwt2_padded(&v, params.wavelet, params.levels)?;
        soft_threshold_inplace(c.data.as_slice_mut().expect("contiguous"), params.lambda)?;
        let x_next = idwt2(&c)?;

        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let diff: f64 = x_next.iter().zip(x.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let scale: f64 = x_next.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let momentum = (t - 1.0) / t_next;
        z = &x_next + &((&x_next - &x) * Complex64::new(momentum, 0.0));
        x = x_next;
        t = t_next;
        if diff <= params.rel_tol * scale || scale == 0.0 {
            break;
        }
    }
    Ok(ComplexImage::from_raw(x))
}
