use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::types::{ComplexImage, KSpace, Shape};
use crate::error::{Error, Result};

/// Planned centered, unitary 2D DFT for one array shape.
///
/// Forward: `K = fftshift(fft2(ifftshift(x))) / sqrt(H W)`; inverse is the
/// exact adjoint. Plans are shareable across threads.
#[derive(Clone)]
pub struct CenteredFft {
    shape: Shape,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for CenteredFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CenteredFft").field("shape", &self.shape).finish()
    }
}

impl CenteredFft {
    pub fn new(shape: Shape) -> Self {
        let (h, w) = shape;
        let mut planner = FftPlanner::new();
        Self {
            shape,
            row_fwd: planner.plan_fft_forward(w),
            row_inv: planner.plan_fft_inverse(w),
            col_fwd: planner.plan_fft_forward(h),
            col_inv: planner.plan_fft_inverse(h),
            scale: 1.0 / ((h * w) as f64).sqrt(),
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// In-place forward transform (image -> k-space).
    pub fn forward_inplace(&self, data: &mut Array2<Complex64>) {
        self.transform(data, true);
    }

    /// In-place inverse transform (k-space -> image).
    pub fn inverse_inplace(&self, data: &mut Array2<Complex64>) {
        self.transform(data, false);
    }

    pub fn forward(&self, data: &Array2<Complex64>) -> Array2<Complex64> {
        let mut out = data.to_owned();
        self.forward_inplace(&mut out);
        out
    }

    pub fn inverse(&self, data: &Array2<Complex64>) -> Array2<Complex64> {
        let mut out = data.to_owned();
        self.inverse_inplace(&mut out);
        out
    }

    fn transform(&self, data: &mut Array2<Complex64>, forward: bool) {
        let (h, w) = self.shape;
        assert_eq!(data.dim(), self.shape, "CenteredFft planned for {:?}", self.shape);
        if !data.is_standard_layout() {
            *data = data.as_standard_layout().into_owned();
        }
        let (ch, cw) = (h / 2, w / 2);
        let (rows, cols) = if forward {
            (&self.row_fwd, &self.col_fwd)
        } else {
            (&self.row_inv, &self.col_inv)
        };
        let buf = data.as_slice_mut().expect("standard layout");
        let mut scratch = vec![Complex64::new(0.0, 0.0); h * w];

        // ifftshift: origin (ch, cw) -> (0, 0)
        for i in 0..h {
            let si = (i + ch) % h;
            for j in 0..w {
                scratch[i * w + j] = buf[si * w + (j + cw) % w];
            }
        }
        rows.process(&mut scratch);

        // transpose into buf (w x h), transform columns as rows
        for i in 0..h {
            for j in 0..w {
                buf[j * h + i] = scratch[i * w + j];
            }
        }
        cols.process(buf);

        // transpose back with fftshift and unitary scaling
        for i in 0..h {
            let si = (i + h - ch) % h;
            for j in 0..w {
                let sj = (j + w - cw) % w;
                scratch[i * w + j] = buf[sj * h + si] * self.scale;
            }
        }
        buf.copy_from_slice(&scratch);
    }
}

fn ensure_finite(data: &Array2<Complex64>, what: &str) -> Result<()> {
    match data.indexed_iter().find(|(_, v)| !v.is_finite()) {
        Some(((i, j), v)) => Err(Error::invalid_input(format!(
            "{what} has non-finite value {v} at ({i}, {j})"
        ))),
        None => Ok(()),
    }
}

/// Centered unitary forward DFT.
pub fn dft2_centered(img: &ComplexImage) -> Result<KSpace> {
    ensure_finite(img.data(), "image")?;
    let plan = CenteredFft::new(img.shape());
    Ok(KSpace::from_raw(plan.forward(img.data())))
}

/// Centered unitary inverse DFT; exact inverse of [`dft2_centered`].
pub fn idft2_centered(ksp: &KSpace) -> Result<ComplexImage> {
    ensure_finite(ksp.data(), "k-space")?;
    let plan = CenteredFft::new(ksp.shape());
    Ok(ComplexImage::from_raw(plan.inverse(ksp.data())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random(shape: Shape, seed: u64) -> Array2<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn(shape, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    /// Direct double-sum DFT with both origins at the centered index.
    fn naive(x: &Array2<Complex64>, sign: f64) -> Array2<Complex64> {
        let (h, w) = x.dim();
        let (ch, cw) = ((h / 2) as f64, (w / 2) as f64);
        let s = 1.0 / ((h * w) as f64).sqrt();
        Array2::from_shape_fn((h, w), |(u, v)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..h {
                for n in 0..w {
                    let ph = sign
                        * 2.0
                        * PI
                        * ((u as f64 - ch) * (m as f64 - ch) / h as f64
                            + (v as f64 - cw) * (n as f64 - cw) / w as f64);
                    acc += x[[m, n]] * Complex64::from_polar(1.0, ph);
                }
            }
            acc * s
        })
    }

    fn max_abs(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn constant_image_maps_to_center_spike() {
        let img = ComplexImage::from_real(&Array2::ones((4, 4))).unwrap();
        let k = dft2_centered(&img).unwrap();
        for ((i, j), v) in k.data().indexed_iter() {
            let expected = if (i, j) == (2, 2) { 4.0 } else { 0.0 };
            assert!((v - Complex64::new(expected, 0.0)).norm() < 1e-14, "({i},{j}) = {v}");
        }
    }

    #[test]
    fn center_impulse_maps_to_constant() {
        let mut k = Array2::zeros((8, 8));
        k[[4, 4]] = Complex64::new(1.0, 0.0);
        let img = idft2_centered(&KSpace::new(k).unwrap()).unwrap();
        for v in img.data() {
            assert!((v - Complex64::new(0.125, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn matches_naive_oracle_even_and_odd() {
        for (shape, seed) in [((16, 16), 1), ((9, 12), 2), ((7, 5), 3)] {
            let x = random(shape, seed);
            let plan = CenteredFft::new(shape);
            assert!(max_abs(&plan.forward(&x), &naive(&x, -1.0)) < 1e-10);
            assert!(max_abs(&plan.inverse(&x), &naive(&x, 1.0)) < 1e-10);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let x = random((16, 24), 4);
        let img = ComplexImage::new(x.clone()).unwrap();
        let k = dft2_centered(&img).unwrap();
        let back = idft2_centered(&k).unwrap();
        assert!(max_abs(back.data(), &x) < 1e-12);
        assert!((k.norm() - img.norm()).abs() / img.norm() < 1e-12);
    }

    #[test]
    fn non_finite_rejected() {
        let mut x = Array2::zeros((8, 8));
        x[[1, 2]] = Complex64::new(f64::NAN, 0.0);
        assert!(ComplexImage::new(x.clone()).is_err());
        let img = ComplexImage::from_raw(x);
        assert!(matches!(dft2_centered(&img), Err(Error::InvalidInput(_))));
    }
}
