//! Periodised orthogonal 2D wavelet transform, Mallat layout.
//!
//! Complex inputs are handled by linearity (the filters are real), which is
//! the same as transforming real and imaginary parts separately.

use ndarray::{s, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::Shape;

pub const DEFAULT_LEVELS: usize = 4;

/// Decomposition low-pass of Daubechies-4 (8 taps).
const DB4: [f64; 8] = [
    -0.010_597_401_784_997_278,
    0.032_883_011_666_982_945,
    0.030_841_381_835_986_965,
    -0.187_034_811_718_881_14,
    -0.027_983_769_416_983_85,
    0.630_880_767_929_590_4,
    0.714_846_570_552_541_5,
    0.230_377_813_308_855_23,
];

const HAAR: [f64; 2] = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wavelet {
    Haar,
    #[default]
    Db4,
}

impl Wavelet {
    fn lowpass(self) -> &'static [f64] {
        match self {
            Wavelet::Haar => &HAAR,
            Wavelet::Db4 => &DB4,
        }
    }

    /// Quadrature mirror high-pass, `g[k] = (-1)^k h[N-1-k]`.
    fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let n = h.len();
        (0..n).map(|k| if k % 2 == 0 { h[n - 1 - k] } else { -h[n - 1 - k] }).collect()
    }
}

/// Multi-level coefficients packed in the standard pyramid layout: the
/// coarsest approximation occupies the top-left `H/2^L x W/2^L` block.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoeffs {
    pub data: Array2<Complex64>,
    pub levels: usize,
    pub wavelet: Wavelet,
    /// Shape of the image before dyadic padding.
    pub original_shape: Shape,
}

impl WaveletCoeffs {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

struct Filters {
    h: &'static [f64],
    g: Vec<f64>,
}

impl Filters {
    fn new(w: Wavelet) -> Self {
        Self { h: w.lowpass(), g: w.highpass() }
    }

    fn analyze(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = x.len();
        let half = n / 2;
        for i in 0..half {
            let mut lo = Complex64::new(0.0, 0.0);
            let mut hi = Complex64::new(0.0, 0.0);
            for (k, (&hk, &gk)) in self.h.iter().zip(&self.g).enumerate() {
                let v = x[(2 * i + k) % n];
                lo += v * hk;
                hi += v * gk;
            }
            out[i] = lo;
            out[half + i] = hi;
        }
    }

    fn synthesize(&self, c: &[Complex64], out: &mut [Complex64]) {
        let n = c.len();
        let half = n / 2;
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for i in 0..half {
            let lo = c[i];
            let hi = c[half + i];
            for (k, (&hk, &gk)) in self.h.iter().zip(&self.g).enumerate() {
                out[(2 * i + k) % n] += lo * hk + hi * gk;
            }
        }
    }
}

fn check_levels(shape: Shape, levels: usize) -> Result<()> {
    let d = 1usize.checked_shl(levels as u32).unwrap_or(0);
    if levels == 0 || d == 0 || shape.0 % d != 0 || shape.1 % d != 0 || shape.0 < d || shape.1 < d {
        return Err(Error::invalid_argument(format!(
            "{levels} wavelet levels need dims divisible by 2^{levels}, got {shape:?}"
        )));
    }
    Ok(())
}

/// One pass over the rows then the columns of the `h x w` top-left block.
fn pass(data: &mut Array2<Complex64>, h: usize, w: usize, f: &Filters, forward: bool) {
    let mut buf = vec![Complex64::new(0.0, 0.0); h.max(w)];
    let mut out = buf.clone();
    let rows = |data: &mut Array2<Complex64>, buf: &mut Vec<Complex64>, out: &mut Vec<Complex64>| {
        for r in 0..h {
            let mut row = data.slice_mut(s![r, ..w]);
            for (b, v) in buf.iter_mut().zip(row.iter()) {
                *b = *v;
            }
            if forward {
                f.analyze(&buf[..w], &mut out[..w]);
            } else {
                f.synthesize(&buf[..w], &mut out[..w]);
            }
            row.iter_mut().zip(out.iter()).for_each(|(v, o)| *v = *o);
        }
    };
    let cols = |data: &mut Array2<Complex64>, buf: &mut Vec<Complex64>, out: &mut Vec<Complex64>| {
        for c in 0..w {
            let mut col = data.slice_mut(s![..h, c]);
            for (b, v) in buf.iter_mut().zip(col.iter()) {
                *b = *v;
            }
            if forward {
                f.analyze(&buf[..h], &mut out[..h]);
            } else {
                f.synthesize(&buf[..h], &mut out[..h]);
            }
            col.iter_mut().zip(out.iter()).for_each(|(v, o)| *v = *o);
        }
    };
    if forward {
        rows(data, &mut buf, &mut out);
        cols(data, &mut buf, &mut out);
    } else {
        cols(data, &mut buf, &mut out);
        rows(data, &mut buf, &mut out);
    }
}

/// Forward transform; dims must be divisible by `2^levels`.
pub fn dwt2(img: &Array2<Complex64>, wavelet: Wavelet, levels: usize) -> Result<WaveletCoeffs> {
    let shape = img.dim();
    check_levels(shape, levels)?;
    let f = Filters::new(wavelet);
    let mut data = img.clone();
    for l in 0..levels {
        pass(&mut data, shape.0 >> l, shape.1 >> l, &f, true);
    }
    Ok(WaveletCoeffs { data, levels, wavelet, original_shape: shape })
}

/// Inverse of [`dwt2`]; strips any dyadic padding recorded by [`dwt2_padded`].
pub fn idwt2(coeffs: &WaveletCoeffs) -> Result<Array2<Complex64>> {
    let shape = coeffs.data.dim();
    check_levels(shape, coeffs.levels)?;
    let f = Filters::new(coeffs.wavelet);
    let mut data = coeffs.data.clone();
    for l in (0..coeffs.levels).rev() {
        pass(&mut data, shape.0 >> l, shape.1 >> l, &f, false);
    }
    let (h, w) = coeffs.original_shape;
    if (h, w) == shape {
        Ok(data)
    } else {
        Ok(data.slice(s![..h, ..w]).to_owned())
    }
}

/// Zero-pads to the next multiple of `2^levels` on the high-index side, then
/// transforms. The original shape is kept for [`idwt2`].
pub fn dwt2_padded(img: &Array2<Complex64>, wavelet: Wavelet, levels: usize) -> Result<WaveletCoeffs> {
    if levels == 0 || levels > 30 {
        return Err(Error::invalid_argument(format!("unsupported level count {levels}")));
    }
    let d = 1usize << levels;
    let (h, w) = img.dim();
    let padded_shape = (h.div_ceil(d) * d, w.div_ceil(d) * d);
    if padded_shape == (h, w) {
        return dwt2(img, wavelet, levels);
    }
    let mut padded = Array2::zeros(padded_shape);
    padded.slice_mut(s![..h, ..w]).assign(img);
    let mut c = dwt2(&padded, wavelet, levels)?;
    c.original_shape = (h, w);
    Ok(c)
}

pub fn idwt2_padded(coeffs: &WaveletCoeffs) -> Result<Array2<Complex64>> {
    idwt2(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(shape: Shape, seed: u64) -> Array2<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn(shape, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn max_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn db4_filter_is_orthonormal() {
        let h = Wavelet::Db4.lowpass();
        let sum: f64 = h.iter().sum();
        let energy: f64 = h.iter().map(|v| v * v).sum();
        assert!((sum - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((energy - 1.0).abs() < 1e-12);
        for shift in [2, 4, 6] {
            let dot: f64 = (0..8 - shift).map(|k| h[k] * h[k + shift]).sum();
            assert!(dot.abs() < 1e-12, "shift {shift}: {dot}");
        }
    }

    #[test]
    fn perfect_reconstruction_and_norm() {
        for w in [Wavelet::Db4, Wavelet::Haar] {
            let x = random((64, 64), 1);
            let c = dwt2(&x, w, 4).unwrap();
            assert_eq!(c.len(), x.len());
            let norm_x = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!((c.norm() - norm_x).abs() < 1e-10 * norm_x);
            assert!(max_diff(&idwt2(&c).unwrap(), &x) < 1e-10);
        }
    }

    #[test]
    fn rectangular_and_coarse_levels() {
        let x = random((48, 80), 2);
        let c = dwt2(&x, Wavelet::Db4, 4).unwrap();
        assert!(max_diff(&idwt2(&c).unwrap(), &x) < 1e-10);
        // 3x5 approximation band is smaller than the filter; periodisation still holds
    }

    #[test]
    fn constant_has_no_detail() {
        let x = Array2::from_elem((32, 32), Complex64::new(0.7, -0.2));
        let c = dwt2(&x, Wavelet::Db4, 4).unwrap();
        for ((i, j), v) in c.data.indexed_iter() {
            if i >= 2 || j >= 2 {
                assert!(v.norm() < 1e-12, "({i},{j}) = {v}");
            }
        }
    }

    #[test]
    fn adjoint_identity() {
        let x = random((32, 32), 3);
        let y = random((32, 32), 4);
        let wx = dwt2(&x, Wavelet::Db4, 4).unwrap();
        let wty = idwt2(&WaveletCoeffs { data: y.clone(), levels: 4, wavelet: Wavelet::Db4, original_shape: (32, 32) }).unwrap();
        let lhs: Complex64 = wx.data.iter().zip(&y).map(|(a, b)| a * b.conj()).sum();
        let rhs: Complex64 = x.iter().zip(&wty).map(|(a, b)| a * b.conj()).sum();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn padded_round_trip() {
        let x = random((37, 21), 5);
        let c = dwt2_padded(&x, Wavelet::Db4, 4).unwrap();
        assert_eq!(c.data.dim(), (48, 32));
        assert!(max_diff(&idwt2_padded(&c).unwrap(), &x) < 1e-10);
    }

    #[test]
    fn too_many_levels() {
        let x = random((24, 24), 6);
        assert!(matches!(dwt2(&x, Wavelet::Db4, 4), Err(Error::InvalidArgument(_))));
        assert!(dwt2(&x, Wavelet::Db4, 3).is_ok());
        assert!(dwt2(&x, Wavelet::Db4, 0).is_err());
    }
}
