use ndarray::{Array1, Array2, Axis, Zip};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dictionary::Dictionary;
use super::ksvd::ksvd_update;
use super::objective::evaluate_objective_dictl;
use super::omp::omp;
use super::{observed, zero_filled};
use crate::error::{Error, Result};
use crate::imaging::{CenteredFft, ComplexImage, KSpace};
use crate::sampling::SamplingMask;
use crate::seeding::mix;
use crate::transforms::{extract_patches, extract_patches_at, reassemble_patches, PatchMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DictlParams {
    /// Number of atoms.
    pub atoms: usize,
    /// Sparsity per patch.
    pub sparsity: usize,
    pub lambda_d: f64,
    pub block: usize,
    pub n_iter: usize,
    /// Training patches per outer iteration; 0 picks `2 x` the patch-grid
    /// size capped at 10 000.
    pub train_patches: usize,
    pub stride: usize,
    pub ksvd_sweeps: usize,
    pub subtract_mean: bool,
    pub seed: u64,
}

impl Default for DictlParams {
    fn default() -> Self {
        Self {
            atoms: 64,
            sparsity: 5,
            lambda_d: 1e-2,
            block: 8,
            n_iter: 5,
            train_patches: 0,
            stride: 2,
            ksvd_sweeps: 10,
            subtract_mean: true,
            seed: 0,
        }
    }
}

impl DictlParams {
    pub fn validate(&self) -> Result<()> {
        let n = self.block * self.block;
        if self.block < 2 {
            return Err(Error::invalid_argument("block size must be >= 2"));
        }
        if self.atoms == 0 || self.sparsity == 0 || self.sparsity > self.atoms.min(n) {
            return Err(Error::invalid_argument(format!(
                "sparsity {} must be in 1..=min(atoms {}, block^2 {n})",
                self.sparsity, self.atoms
            )));
        }
        if self.n_iter == 0 || self.ksvd_sweeps == 0 || self.stride == 0 || self.stride > self.block {
            return Err(Error::invalid_argument("n_iter, ksvd_sweeps must be >= 1 and 1 <= stride <= block"));
        }
        if !(self.lambda_d > 0.0) || !self.lambda_d.is_finite() {
            return Err(Error::invalid_argument(format!("lambda_d must be finite and > 0, got {}", self.lambda_d)));
        }
        Ok(())
    }

    fn training_count(&self, grid_patches: usize) -> usize {
        if self.train_patches > 0 {
            self.train_patches
        } else {
            (2 * grid_patches).min(10_000)
        }
    }
}

/// Intermediate quantities of a reconstruction, for diagnostics and tests.
#[derive(Debug, Clone)]
pub struct DictlTrace {
    pub image: ComplexImage,
    /// Patch approximation used in the last image update.
    pub z: ComplexImage,
    pub dictionary: Dictionary,
    /// Objective after each image update, evaluated with that iteration's `z`.
    pub objective: Vec<f64>,
    /// Objective of the zero-filled image against the first `z`.
    pub initial_objective: f64,
}

/// Closed-form image update: per frequency, keeps `Z` where nothing was
/// measured and blends `(Y + lambda_d Z) / (1 + lambda_d)` where it was.
pub fn dictl_x_update(z: &ComplexImage, y: &KSpace, mask: &SamplingMask, lambda_d: f64) -> Result<ComplexImage> {
    if z.shape() != y.shape() {
        return Err(Error::invalid_input("z and y differ in shape"));
    }
    let uy = observed(y, mask)?;
    let fft = CenteredFft::new(z.shape());
    Ok(x_update(&fft, z.data(), &uy, mask, lambda_d))
}

fn x_update(fft: &CenteredFft, z: &Array2<Complex64>, uy: &Array2<Complex64>, mask: &SamplingMask, lambda_d: f64) -> ComplexImage {
    let mut k = fft.forward(z);
    let w = 1.0 / (1.0 + lambda_d);
    Zip::from(&mut k).and(uy).and(mask.mask()).for_each(|zk, &yk, &m| {
        if m {
            *zk = (yk + *zk * lambda_d) * w;
        }
    });
    fft.inverse_inplace(&mut k);
    ComplexImage::from_raw(k)
}

fn subtract_means(pm: &mut PatchMatrix, enabled: bool) -> Array1<Complex64> {
    let n = pm.patch_len() as f64;
    let means = pm.columns.sum_axis(Axis(0)).mapv(|s| s / n);
    if enabled {
        for (mut col, &m) in pm.columns.axis_iter_mut(Axis(1)).zip(means.iter()) {
            col.mapv_inplace(|v| v - m);
        }
        means
    } else {
        Array1::zeros(means.len())
    }
}

/// Alternating dictionary-learning reconstruction.
pub fn dictl_reconstruct(y: &KSpace, mask: &SamplingMask, params: &DictlParams) -> Result<ComplexImage> {
    dictl_reconstruct_traced(y, mask, params).map(|t| t.image)
}

pub fn dictl_reconstruct_traced(y: &KSpace, mask: &SamplingMask, params: &DictlParams) -> Result<DictlTrace> {
    params.validate()?;
    let uy = observed(y, mask)?;
    let shape = y.shape();
    if params.block > shape.0 || params.block > shape.1 {
        return Err(Error::invalid_argument(format!("block {} exceeds image {shape:?}", params.block)));
    }
    let fft = CenteredFft::new(shape);
    let x0 = zero_filled(&fft, &uy);
    let mut x = x0.clone();
    let mut dict = Dictionary::overcomplete_dct(params.block, params.atoms)?;
    let mut z = x.clone();
    let mut objective = Vec::with_capacity(params.n_iter);
    let mut initial_objective = f64::NAN;

    for it in 0..params.n_iter {
        let grid = extract_patches(x.data(), params.block, params.stride)?;
        let n_train = params.training_count(grid.n_patches());
        let mut rng = ChaCha8Rng::seed_from_u64(mix(params.seed, &[it as u64]));
        let origins = (0..n_train).map(|_| (rng.gen_range(0..shape.0), rng.gen_range(0..shape.1))).collect();
        let mut train = extract_patches_at(x.data(), params.block, params.stride, origins)?;
        subtract_means(&mut train, params.subtract_mean);
        for _ in 0..params.ksvd_sweeps {
            let code = omp(&dict, &train.columns, params.sparsity)?;
            dict = ksvd_update(&dict, &code, &train.columns)?.0;
        }

        let mut all = grid;
        let means = subtract_means(&mut all, params.subtract_mean);
        let code = omp(&dict, &all.columns, params.sparsity)?;
        let mut approx = code.synthesize(&dict);
        for (mut col, &m) in approx.axis_iter_mut(Axis(1)).zip(means.iter()) {
            col.mapv_inplace(|v| v + m);
        }
        all.columns = approx;
        z = ComplexImage::from_raw(reassemble_patches(&all, shape)?);
        if it == 0 {
            initial_objective = evaluate_objective_dictl(&x0, &z, y, mask, params.lambda_d)?;
        }
        x = x_update(&fft, z.data(), &uy, mask, params.lambda_d);
        objective.push(evaluate_objective_dictl(&x, &z, y, mask, params.lambda_d)?);
    }
    Ok(DictlTrace { image: x, z, dictionary: dict, objective, initial_objective })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{dft2_centered, idft2_centered};
    use crate::sampling::{build_pdf, draw_mask, SamplingScheme};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_image(n: usize, seed: u64) -> ComplexImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexImage::new(Array2::from_shape_fn((n, n), |_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).unwrap()
    }

    #[test]
    fn x_update_matches_scalar_minimiser() {
        let n = 16;
        let z = random_image(n, 1);
        let y = dft2_centered(&random_image(n, 2)).unwrap();
        let pdf = build_pdf((n, n), SamplingScheme::uniform(), 0.4, (2, 2)).unwrap();
        let mask = draw_mask(&pdf, 5);
        let lam = 0.37;
        let x = dictl_x_update(&z, &y, &mask, lam).unwrap();
        let xk = dft2_centered(&x).unwrap();
        let zk = dft2_centered(&z).unwrap();
        for ((idx, &m), xv) in mask.mask().indexed_iter().zip(xk.data().iter()) {
            // minimise 0.5 m |X - Y|^2 + 0.5 lam |X - Z|^2 over X by setting the
            // Wirtinger derivative to zero
            let (yv, zv) = (y.data()[idx], zk.data()[idx]);
            let mf = if m { 1.0 } else { 0.0 };
            let oracle = (yv * mf + zv * lam) / (mf + lam);
            assert!((xv - oracle).norm() < 1e-10, "{idx:?}");
            // the oracle is a stationary point: perturbations increase the cost
            let cost = |v: Complex64| 0.5 * mf * (v - yv).norm_sqr() + 0.5 * lam * (v - zv).norm_sqr();
            for d in [c(1e-4, 0.0), c(0.0, 1e-4), c(-1e-4, 0.0), c(0.0, -1e-4)] {
                assert!(cost(oracle + d) > cost(oracle));
            }
        }
    }

    #[test]
    fn fully_sampled_small_lambda_returns_data() {
        let x = random_image(16, 3);
        let y = dft2_centered(&x).unwrap();
        let m = SamplingMask::full((16, 16));
        let p = DictlParams { atoms: 16, sparsity: 2, lambda_d: 1e-12, block: 4, n_iter: 1, train_patches: 50, ksvd_sweeps: 1, ..DictlParams::default() };
        let out = dictl_reconstruct(&y, &m, &p).unwrap();
        let want = idft2_centered(&y).unwrap();
        let err = out.data().iter().zip(want.data().iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn deterministic_given_seed() {
        let x = random_image(16, 4);
        let y = dft2_centered(&x).unwrap();
        let pdf = build_pdf((16, 16), SamplingScheme::strong_vd_for(4.0), 0.25, (2, 2)).unwrap();
        let m = draw_mask(&pdf, 1);
        let p = DictlParams { atoms: 16, sparsity: 2, block: 4, n_iter: 2, train_patches: 64, ksvd_sweeps: 2, seed: 9, ..DictlParams::default() };
        let a = dictl_reconstruct(&y, &m, &p).unwrap();
        let b = dictl_reconstruct(&y, &m, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_params() {
        let bad = [
            DictlParams { sparsity: 65, ..DictlParams::default() },
            DictlParams { stride: 9, ..DictlParams::default() },
            DictlParams { lambda_d: 0.0, ..DictlParams::default() },
            DictlParams { n_iter: 0, ..DictlParams::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
        assert!(DictlParams::default().validate().is_ok());
    }
}
