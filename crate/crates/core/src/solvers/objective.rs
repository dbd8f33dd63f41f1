use super::observed;
use crate::error::{Error, Result};
use crate::imaging::{CenteredFft, ComplexImage, KSpace};
use crate::sampling::SamplingMask;
use crate::transforms::{dwt2_padded, Wavelet};

/// `0.5 * ||U F x - U y||^2`.
fn data_term(x: &ComplexImage, y: &KSpace, mask: &SamplingMask) -> Result<f64> {
    if x.shape() != y.shape() {
        return Err(Error::invalid_input(format!("image {:?} and k-space {:?} differ", x.shape(), y.shape())));
    }
    let uy = observed(y, mask)?;
    let fx = CenteredFft::new(x.shape()).forward(x.data());
    let mut acc = 0.0;
    for ((f, o), &m) in fx.iter().zip(uy.iter()).zip(mask.mask().iter()) {
        if m {
            acc += (f - o).norm_sqr();
        }
    }
    Ok(0.5 * acc)
}

/// `0.5 * ||U F x - y||^2 + lambda * ||W x||_1` with the default db4,
/// 4-level transform.
pub fn evaluate_objective_cs(x: &ComplexImage, y: &KSpace, mask: &SamplingMask, lambda: f64) -> Result<f64> {
    evaluate_objective_cs_with(x, y, mask, lambda, Wavelet::Db4, crate::transforms::DEFAULT_LEVELS)
}

pub(crate) fn evaluate_objective_cs_with(
    x: &ComplexImage,
    y: &KSpace,
    mask: &SamplingMask,
    lambda: f64,
    wavelet: Wavelet,
    levels: usize,
) -> Result<f64> {
    let data = data_term(x, y, mask)?;
    if lambda == 0.0 {
        return Ok(data);
    }
    let c = dwt2_padded(x.data(), wavelet, levels)?;
    let l1: f64 = c.data.iter().map(|v| v.norm()).sum();
    Ok(data + lambda * l1)
}

/// `0.5 * ||U F x - y||^2 + 0.5 * lambda_d * ||x - z||^2`, where `z` is the
/// patch-averaged sparse approximation.
pub fn evaluate_objective_dictl(
    x: &ComplexImage,
    z: &ComplexImage,
    y: &KSpace,
    mask: &SamplingMask,
    lambda_d: f64,
) -> Result<f64> {
    if x.shape() != z.shape() {
        return Err(Error::invalid_input("x and z differ in shape"));
    }
    let data = data_term(x, y, mask)?;
    let prox: f64 = x.data().iter().zip(z.data().iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(data + 0.5 * lambda_d * prox)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use crate::imaging::dft2_centered;
    use crate::sampling::{build_pdf, draw_mask, SamplingScheme};
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(n: usize, seed: u64) -> ComplexImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexImage::new(Array2::from_shape_fn((n, n), |_| Complex64::new(rng.gen(), rng.gen()))).unwrap()
    }

    #[test]
    fn consistent_zero_image_has_zero_objective() {
        let x = ComplexImage::zeros((16, 16));
        let y = KSpace::zeros((16, 16));
        let pdf = build_pdf((16, 16), SamplingScheme::uniform(), 0.5, (0, 0)).unwrap();
        let m = draw_mask(&pdf, 1);
        assert_eq!(evaluate_objective_cs(&x, &y, &m, 0.3).unwrap(), 0.0);
        assert_eq!(evaluate_objective_dictl(&x, &x, &y, &m, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn zero_image_gives_half_observed_energy() {
        let y = dft2_centered(&random_image(16, 2)).unwrap();
        let pdf = build_pdf((16, 16), SamplingScheme::uniform(), 0.4, (2, 2)).unwrap();
        let m = draw_mask(&pdf, 2);
        let expected: f64 = y.data().iter().zip(m.mask().iter()).filter(|(_, &b)| b).map(|(v, _)| v.norm_sqr()).sum::<f64>() * 0.5;
        let got = evaluate_objective_cs(&ComplexImage::zeros((16, 16)), &y, &m, 1.0).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn matches_scalar_loop() {
        let n = 16;
        let x = random_image(n, 3);
        let z = random_image(n, 4);
        let y = dft2_centered(&random_image(n, 5)).unwrap();
        let pdf = build_pdf((n, n), SamplingScheme::weak_vd(), 0.3, (2, 2)).unwrap();
        let m = draw_mask(&pdf, 3);
        // naive centred DFT of x
        let c = (n / 2) as f64;
        let mut data = 0.0;
        for u in 0..n {
            for v in 0..n {
                if !m.mask()[[u, v]] {
                    continue;
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let ph = -2.0 * std::f64::consts::PI * ((u as f64 - c) * (i as f64 - c) + (v as f64 - c) * (j as f64 - c)) / n as f64;
                        acc += x.data()[[i, j]] * Complex64::from_polar(1.0, ph);
                    }
                }
                acc /= n as f64;
                data += (acc - y.data()[[u, v]]).norm_sqr();
            }
        }
        data *= 0.5;
        let mut prox = 0.0;
        for i in 0..n {
            for j in 0..n {
                prox += (x.data()[[i, j]] - z.data()[[i, j]]).norm_sqr();
            }
        }
        let dictl = evaluate_objective_dictl(&x, &z, &y, &m, 0.7).unwrap();
        assert!((dictl - (data + 0.35 * prox)).abs() < 1e-12 * dictl);
        let cs0 = evaluate_objective_cs(&x, &y, &m, 0.0).unwrap();
        assert!((cs0 - data).abs() < 1e-12 * data);
    }
}
