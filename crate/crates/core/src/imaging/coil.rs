use ndarray::{s, Array2};
use num_complex::Complex64;

use super::types::{ComplexImage, KSpace, MultiCoilKSpace, Shape};
use crate::error::{Error, Result};

/// Offset of a centered `inner` block inside an `outer` array such that the
/// two centered origins coincide: `outer / 2 - inner / 2` per axis.
///
/// When the padding amount is odd the spare row (column) lands on the side
/// that keeps the origin aligned, so crop and pad are exact inverses.
pub fn center_offset(outer: Shape, inner: Shape) -> Shape {
    (outer.0 / 2 - inner.0 / 2, outer.1 / 2 - inner.1 / 2)
}

/// Output shape of [`zero_pad_kspace`]: `round(H * factor)`, `round(W * factor)`.
pub fn zero_pad_shape(shape: Shape, factor: f64) -> Result<Shape> {
    if !(factor.is_finite() && factor >= 1.0) {
        return Err(Error::invalid_argument(format!("zero-pad factor must be >= 1, got {factor}")));
    }
    let scale = |n: usize| ((n as f64) * factor).round() as usize;
    Ok((scale(shape.0).max(shape.0), scale(shape.1).max(shape.1)))
}

fn embed(src: &Array2<Complex64>, out_shape: Shape) -> Array2<Complex64> {
    let (h, w) = src.dim();
    let (oi, oj) = center_offset(out_shape, (h, w));
    let mut out = Array2::zeros(out_shape);
    out.slice_mut(s![oi..oi + h, oj..oj + w]).assign(src);
    out
}

/// Zero-pads every coil's k-space by `factor` per axis, keeping the original
/// samples in the centered block.
pub fn zero_pad_kspace(mck: &MultiCoilKSpace, factor: f64) -> Result<MultiCoilKSpace> {
    let out_shape = zero_pad_shape(mck.shape(), factor)?;
    let coils = mck
        .coils()
        .iter()
        .map(|k| KSpace::from_raw(embed(k.data(), out_shape)))
        .collect();
    MultiCoilKSpace::new(coils)
}

/// Extracts the centered `target` block, the inverse of zero-padding.
pub fn center_crop(ksp: &KSpace, target: Shape) -> Result<KSpace> {
    let (h, w) = ksp.shape();
    if target.0 > h || target.1 > w || target.0 == 0 || target.1 == 0 {
        return Err(Error::invalid_argument(format!(
            "cannot crop {h}x{w} to {}x{}",
            target.0, target.1
        )));
    }
    let (oi, oj) = center_offset((h, w), target);
    Ok(KSpace::from_raw(
        ksp.data().slice(s![oi..oi + target.0, oj..oj + target.1]).to_owned(),
    ))
}

/// Root-sum-of-squares coil combination. The result is real (zero imaginary
/// parts) and non-negative.
pub fn rss_combine(coil_images: &[ComplexImage]) -> Result<ComplexImage> {
    let first = coil_images
        .first()
        .ok_or_else(|| Error::invalid_input("rss_combine needs at least one coil image"))?;
    let shape = first.shape();
    if let Some((c, img)) = coil_images.iter().enumerate().find(|(_, x)| x.shape() != shape) {
        return Err(Error::invalid_input(format!(
            "coil image {c} has shape {:?}, expected {shape:?}",
            img.shape()
        )));
    }
    let mut acc = Array2::<f64>::zeros(shape);
    for img in coil_images {
        acc.zip_mut_with(img.data(), |a, v| *a += v.norm_sqr());
    }
    ComplexImage::new(acc.mapv(|v| Complex64::new(v.sqrt(), 0.0)))
}
