//! Synthetic multi-coil acquisitions built from a jittered Shepp-Logan
//! phantom.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::RawCase;
use crate::error::{Error, Result};
use crate::imaging::{CenteredFft, KSpace, MultiCoilKSpace, Shape};
use crate::seeding::mix;

/// (intensity, semi-axis a, semi-axis b, x0, y0, angle in degrees)
const ELLIPSES: [(f64, f64, f64, f64, f64, f64); 10] = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

const SUPERSAMPLE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhantomSpec {
    pub shape: Shape,
    pub n_coils: usize,
    /// k-space SNR in dB relative to the RMS coil signal; `None` is noiseless.
    pub snr_db: Option<f64>,
    /// Randomise ellipse parameters per seed.
    pub jitter: bool,
    /// Standard deviation (pixels) of a Gaussian edge blur; 0 disables.
    pub smoothing: f64,
    /// Amplitude of a multiplicative `1/f^beta` tissue texture; 0 disables.
    pub texture: f64,
    pub texture_beta: f64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            shape: (256, 256),
            n_coils: 4,
            snr_db: Some(40.0),
            jitter: true,
            smoothing: 0.0,
            texture: 0.0,
            texture_beta: 1.0,
        }
    }
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_coils == 0 {
            return Err(Error::invalid_argument("n_coils must be >= 1"));
        }
        if self.shape.0 < 2 || self.shape.1 < 2 {
            return Err(Error::invalid_argument(format!("phantom shape {:?} too small", self.shape)));
        }
        if self.snr_db.is_some_and(|s| !s.is_finite()) || !(self.smoothing >= 0.0) || !(self.texture >= 0.0) {
            return Err(Error::invalid_argument("snr, smoothing and texture must be finite and non-negative"));
        }
        Ok(())
    }
}

fn centered_coords(n: usize, samples: usize) -> Vec<f64> {
    let total = (n * samples) as f64;
    (0..n * samples).map(|i| (i as f64 + 0.5) / total * 2.0 - 1.0).collect()
}

/// Real, non-negative-ish phantom image (values near 0..1) before coil
/// weighting and noise.
pub fn phantom_image(spec: &PhantomSpec, seed: u64) -> Result<Array2<f64>> {
    spec.validate()?;
    let (h, w) = spec.shape;
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, &[0x5EED_E111]));
    let ys = centered_coords(h, SUPERSAMPLE);
    let xs = centered_coords(w, SUPERSAMPLE);
    let mut fine = Array2::<f64>::zeros((h * SUPERSAMPLE, w * SUPERSAMPLE));
    for &(mut val, mut a, mut b, mut x0, mut y0, angle) in ELLIPSES.iter() {
        let mut theta = angle;
        if spec.jitter {
            val *= 1.0 + 0.1 * rng.gen_range(-1.0..1.0);
            a *= 1.0 + 0.05 * rng.gen_range(-1.0..1.0);
            b *= 1.0 + 0.05 * rng.gen_range(-1.0..1.0);
            x0 += 0.02 * rng.gen_range(-1.0..1.0);
            y0 += 0.02 * rng.gen_range(-1.0..1.0);
            theta += 3.0 * rng.gen_range(-1.0..1.0);
        }
        let (s, c) = theta.to_radians().sin_cos();
        for (i, &yy) in ys.iter().enumerate() {
            let y = -yy;
            for (j, &x) in xs.iter().enumerate() {
                let (dx, dy) = (x - x0, y - y0);
                let xr = dx * c + dy * s;
                let yr = -dx * s + dy * c;
                if (xr / a).powi(2) + (yr / b).powi(2) <= 1.0 {
                    fine[[i, j]] += val;
                }
            }
        }
    }
    let norm = (SUPERSAMPLE * SUPERSAMPLE) as f64;
    let mut img = Array2::from_shape_fn((h, w), |(i, j)| {
        let mut acc = 0.0;
        for di in 0..SUPERSAMPLE {
            for dj in 0..SUPERSAMPLE {
                acc += fine[[i * SUPERSAMPLE + di, j * SUPERSAMPLE + dj]];
            }
        }
        acc / norm
    });
    if spec.smoothing > 0.0 {
        img = gaussian_blur(&img, spec.smoothing);
    }
    if spec.texture > 0.0 {
        let tex = texture_field(spec.shape, spec.texture_beta, &mut rng);
        img.zip_mut_with(&tex, |v, &t| *v = (*v * (1.0 + spec.texture * t)).max(0.0));
    }
    Ok(img)
}

/// Periodic Gaussian blur applied in the Fourier domain.
fn gaussian_blur(img: &Array2<f64>, sigma: f64) -> Array2<f64> {
    let (h, w) = img.dim();
    let fft = CenteredFft::new((h, w));
    let mut k = fft.forward(&img.mapv(|v| Complex64::new(v, 0.0)));
    let (ch, cw) = ((h / 2) as f64, (w / 2) as f64);
    for ((i, j), v) in k.indexed_iter_mut() {
        let (fy, fx) = ((i as f64 - ch) / h as f64, (j as f64 - cw) / w as f64);
        let two_pi_sq = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
        *v *= (-two_pi_sq * sigma * sigma * (fy * fy + fx * fx)).exp();
    }
    fft.inverse_inplace(&mut k);
    k.mapv(|c| c.re)
}

/// Zero-mean, unit-variance Gaussian field with a `1/|k|^beta` amplitude
/// spectrum.
fn texture_field(shape: Shape, beta: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let (h, w) = shape;
    let (ch, cw) = ((h / 2) as f64, (w / 2) as f64);
    let mut k = Array2::from_shape_fn(shape, |(i, j)| {
        let r = ((i as f64 - ch).powi(2) + (j as f64 - cw).powi(2)).sqrt().max(1.0);
        let z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        z / r.powf(beta)
    });
    CenteredFft::new(shape).inverse_inplace(&mut k);
    let re = k.mapv(|c| c.re);
    let n = re.len() as f64;
    let mean = re.sum() / n;
    let std = (re.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    re.mapv(|v| (v - mean) / std.max(1e-300))
}

/// Smooth complex coil sensitivities, normalised so that their root sum of
/// squares is exactly 1 at every pixel.
pub fn coil_sensitivities(shape: Shape, n_coils: usize, seed: u64) -> Vec<Array2<Complex64>> {
    let (h, w) = shape;
    let ys = centered_coords(h, 1);
    let xs = centered_coords(w, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, &[0xC011_5E25]));
    let mut maps: Vec<Array2<Complex64>> = (0..n_coils)
        .map(|c| {
            let mut co: Vec<Complex64> = (0..6)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let phase = 2.0 * std::f64::consts::PI * c as f64 / n_coils as f64;
            co[0] += Complex64::from_polar(2.0, phase);
            Array2::from_shape_fn(shape, |(i, j)| {
                let (y, x) = (ys[i], xs[j]);
                co[0] + co[1] * x + co[2] * y + co[3] * x * x + co[4] * x * y + co[5] * y * y
            })
        })
        .collect();
    for i in 0..h {
        for j in 0..w {
            let rss = maps.iter().map(|m| m[[i, j]].norm_sqr()).sum::<f64>().sqrt();
            for m in maps.iter_mut() {
                m[[i, j]] /= rss;
            }
        }
    }
    maps
}

/// Deterministic multi-coil k-space for `(spec, seed)`.
pub fn phantom(spec: &PhantomSpec, seed: u64) -> Result<RawCase> {
    let img = phantom_image(spec, seed)?;
    let maps = coil_sensitivities(spec.shape, spec.n_coils, seed);
    let fft = CenteredFft::new(spec.shape);
    let mut coils: Vec<Array2<Complex64>> = maps
        .iter()
        .map(|s| {
            let mut k = Array2::from_shape_fn(spec.shape, |idx| s[idx] * img[idx]);
            fft.forward_inplace(&mut k);
            k
        })
        .collect();
    if let Some(snr) = spec.snr_db {
        let energy: f64 = coils.iter().flat_map(|k| k.iter()).map(|v| v.norm_sqr()).sum();
        let count = (coils.len() * img.len()) as f64;
        let sigma = (energy / count).sqrt() / 10f64.powf(snr / 20.0);
        let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, &[0x0015_E000]));
        let scale = sigma / std::f64::consts::SQRT_2;
        for k in coils.iter_mut() {
            for v in k.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *v += Complex64::new(re, im) * scale;
            }
        }
    }
    let mck = MultiCoilKSpace::new(coils.into_iter().map(KSpace::from_raw).collect())?;
    Ok(RawCase { mck, source_id: format!("phantom-{seed}") })
}
