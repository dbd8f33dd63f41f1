use ndarray::{s, Array2};

use super::pdf::SamplingPdf;
use crate::error::{Error, Result};
use crate::imaging::{center_offset, Shape};
use crate::seeding::counter_uniform;

/// Binary k-space selection drawn from a [`SamplingPdf`].
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMask {
    mask: Array2<bool>,
    seed: u64,
    realized_rate: f64,
}

impl SamplingMask {
    /// Wraps an explicit mask (e.g. fully sampled), seed 0.
    pub fn from_mask(mask: Array2<bool>) -> Self {
        let realized_rate = rate_of(&mask);
        Self { mask, seed: 0, realized_rate }
    }

    pub fn full(shape: Shape) -> Self {
        Self::from_mask(Array2::from_elem(shape, true))
    }

    pub fn mask(&self) -> &Array2<bool> {
        &self.mask
    }

    pub fn shape(&self) -> Shape {
        self.mask.dim()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of ones over the full array size.
    pub fn realized_rate(&self) -> f64 {
        self.realized_rate
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

fn rate_of(mask: &Array2<bool>) -> f64 {
    let ones = mask.iter().filter(|&&b| b).count();
    ones as f64 / mask.len() as f64
}

/// Independent Bernoulli draws keyed by `(seed, i, j)`; identical on every
/// platform and independent of traversal order.
pub fn draw_mask(pdf: &SamplingPdf, seed: u64) -> SamplingMask {
    let prob = pdf.prob();
    let mask = Array2::from_shape_fn(prob.dim(), |(i, j)| counter_uniform(seed, i, j) < prob[[i, j]]);
    let realized_rate = rate_of(&mask);
    SamplingMask { mask, seed, realized_rate }
}

/// Sampling rate inside the centered `original_extent` block.
pub fn effective_rate(mask: &SamplingMask, original_extent: Shape) -> Result<f64> {
    let shape = mask.shape();
    if original_extent.0 > shape.0 || original_extent.1 > shape.1 || original_extent.0 * original_extent.1 == 0 {
        return Err(Error::invalid_argument(format!(
            "extent {original_extent:?} does not fit in mask {shape:?}"
        )));
    }
    if original_extent == shape {
        return Ok(mask.realized_rate());
    }
    let (oi, oj) = center_offset(shape, original_extent);
    let block = mask.mask().slice(s![oi..oi + original_extent.0, oj..oj + original_extent.1]);
    let ones = block.iter().filter(|&&b| b).count();
    Ok(ones as f64 / (original_extent.0 * original_extent.1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{build_pdf, SamplingScheme};

    #[test]
    fn all_ones_pdf_samples_everything() {
        let pdf = SamplingPdf::from_probabilities(Array2::ones((16, 16)), (0, 0)).unwrap();
        let m = draw_mask(&pdf, 3);
        assert_eq!(m.realized_rate(), 1.0);
    }

    #[test]
    fn zero_pdf_keeps_only_calibration() {
        let pdf = SamplingPdf::from_probabilities(Array2::zeros((320, 320)), (6, 6)).unwrap();
        let m = draw_mask(&pdf, 11);
        assert_eq!(m.realized_rate(), 36.0 / 102_400.0);
        assert_eq!(m.count(), 36);
        assert!(m.mask()[[160, 160]] && m.mask()[[157, 157]] && m.mask()[[162, 162]]);
    }

    #[test]
    fn uniform_rate_within_binomial_error() {
        let pdf = build_pdf((320, 320), SamplingScheme::uniform(), 0.17, (0, 0)).unwrap();
        let n = 100;
        let mean = (0..n).map(|s| draw_mask(&pdf, s).realized_rate()).sum::<f64>() / n as f64;
        let sigma = (0.17f64 * 0.83 / 102_400.0).sqrt();
        let se = sigma / (n as f64).sqrt();
        assert!((mean - 0.17).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn same_seed_same_mask() {
        let pdf = build_pdf((64, 48), SamplingScheme::weak_vd(), 0.25, (6, 4)).unwrap();
        assert_eq!(draw_mask(&pdf, 99), draw_mask(&pdf, 99));
        assert_ne!(draw_mask(&pdf, 99), draw_mask(&pdf, 100));
    }

    #[test]
    fn effective_rate_edge_cases() {
        let pdf = build_pdf((64, 64), SamplingScheme::strong_vd_for(4.0), 0.25, (6, 6)).unwrap();
        let m = draw_mask(&pdf, 5);
        assert_eq!(effective_rate(&m, (64, 64)).unwrap(), m.realized_rate());
        assert_eq!(effective_rate(&SamplingMask::full((40, 40)), (13, 7)).unwrap(), 1.0);
        assert!(effective_rate(&m, (65, 10)).is_err());
    }
}
