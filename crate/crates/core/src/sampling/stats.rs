use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mask::{draw_mask, effective_rate};
use super::pdf::{build_pdf, SamplingScheme};
use crate::error::{Error, Result};
use crate::imaging::{zero_pad_shape, Shape};
use crate::seeding::mix;

/// Base (unpadded) acquisition geometry for mask experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskGeometry {
    pub base_shape: Shape,
    pub base_calib: Shape,
}

/// Calibration block scaled with the zero-padding factor.
pub fn scaled_calibration(base_calib: Shape, factor: f64) -> Shape {
    let scale = |n: usize| ((n as f64) * factor).round() as usize;
    (scale(base_calib.0), scale(base_calib.1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskStatRow {
    pub scheme: String,
    pub padding: f64,
    pub target_rate: f64,
    pub mean_effective: f64,
    pub std_effective: f64,
    pub n_masks: usize,
}

/// Mean and sample standard deviation of the effective rate over `n_masks`
/// seeds, for every (scheme, padding) pair in input order.
///
/// Mask `k` of every combination uses seed `mix(seed, [k])`.
pub fn mask_statistics(
    schemes: &[SamplingScheme],
    paddings: &[f64],
    target_rate: f64,
    geometry: MaskGeometry,
    n_masks: usize,
    seed: u64,
) -> Result<Vec<MaskStatRow>> {
    if n_masks == 0 {
        return Err(Error::invalid_argument("n_masks must be >= 1"));
    }
    let mut rows = Vec::with_capacity(schemes.len() * paddings.len());
    for scheme in schemes {
        for &padding in paddings {
            let shape = zero_pad_shape(geometry.base_shape, padding)?;
            let calib = scaled_calibration(geometry.base_calib, padding);
            let pdf = build_pdf(shape, *scheme, target_rate, calib)?;
            let rates: Vec<f64> = (0..n_masks as u64)
                .into_par_iter()
                .map(|k| effective_rate(&draw_mask(&pdf, mix(seed, &[k])), geometry.base_shape))
                .collect::<Result<_>>()?;
            let (mean, std) = mean_std(&rates);
            rows.push(MaskStatRow {
                scheme: scheme.label(),
                padding,
                target_rate,
                mean_effective: mean,
                std_effective: std,
                n_masks,
            });
        }
    }
    Ok(rows)
}

/// Mean and sample (n - 1) standard deviation; std is 0 for a single value.
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
