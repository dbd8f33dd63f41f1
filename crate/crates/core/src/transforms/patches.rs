use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::imaging::Shape;

/// Vectorised `b x b` patches (one per column, row-major inside the patch)
/// taken with periodic wrap-around.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchMatrix {
    pub columns: Array2<Complex64>,
    pub origins: Vec<(usize, usize)>,
    pub block: usize,
    pub stride: usize,
    pub image_shape: Shape,
}

impl PatchMatrix {
    pub fn n_patches(&self) -> usize {
        self.origins.len()
    }

    pub fn patch_len(&self) -> usize {
        self.block * self.block
    }

    /// Number of patches covering each pixel.
    pub fn weight_map(&self) -> Array2<f64> {
        let (h, w) = self.image_shape;
        let mut weights = Array2::zeros((h, w));
        for &(oi, oj) in &self.origins {
            for di in 0..self.block {
                for dj in 0..self.block {
                    weights[[(oi + di) % h, (oj + dj) % w]] += 1.0;
                }
            }
        }
        weights
    }
}

fn check(shape: Shape, b: usize, stride: usize) -> Result<()> {
    if b < 2 || stride == 0 || stride > b {
        return Err(Error::invalid_argument(format!("need b >= 2 and 1 <= stride <= b, got b={b}, stride={stride}")));
    }
    if b > shape.0 || b > shape.1 {
        return Err(Error::invalid_argument(format!("block {b} larger than image {shape:?}")));
    }
    Ok(())
}

/// Patches on the periodic grid `{0, s, 2s, ...}` in both directions, in
/// row-major origin order.
pub fn extract_patches(img: &Array2<Complex64>, b: usize, stride: usize) -> Result<PatchMatrix> {
    let shape = img.dim();
    check(shape, b, stride)?;
    let origins: Vec<_> = (0..shape.0)
        .step_by(stride)
        .flat_map(|i| (0..shape.1).step_by(stride).map(move |j| (i, j)))
        .collect();
    extract_patches_at(img, b, stride, origins)
}

/// Patches at arbitrary origins (wrapping at the borders).
pub fn extract_patches_at(
    img: &Array2<Complex64>,
    b: usize,
    stride: usize,
    origins: Vec<(usize, usize)>,
) -> Result<PatchMatrix> {
    let (h, w) = img.dim();
    check((h, w), b, stride)?;
    let mut columns = Array2::zeros((b * b, origins.len()));
    for (col, &(oi, oj)) in origins.iter().enumerate() {
        for di in 0..b {
            for dj in 0..b {
                columns[[di * b + dj, col]] = img[[(oi + di) % h, (oj + dj) % w]];
            }
        }
    }
    Ok(PatchMatrix { columns, origins, block: b, stride, image_shape: (h, w) })
}

/// Overlap-add of the columns without normalisation; the adjoint of
/// extraction.
pub fn reassemble_adjoint(pm: &PatchMatrix) -> Array2<Complex64> {
    let (h, w) = pm.image_shape;
    let b = pm.block;
    let mut img = Array2::zeros((h, w));
    for (col, &(oi, oj)) in pm.origins.iter().enumerate() {
        for di in 0..b {
            for dj in 0..b {
                img[[(oi + di) % h, (oj + dj) % w]] += pm.columns[[di * b + dj, col]];
            }
        }
    }
    img
}

/// Overlap-average: accumulated sums divided by the weight map.
pub fn reassemble_patches(pm: &PatchMatrix, shape: Shape) -> Result<Array2<Complex64>> {
    if shape != pm.image_shape {
        return Err(Error::invalid_input(format!("patches were taken from {:?}, not {shape:?}", pm.image_shape)));
    }
    if pm.columns.dim() != (pm.patch_len(), pm.n_patches()) {
        return Err(Error::invalid_input("patch matrix does not match its origin list"));
    }
    let weights = pm.weight_map();
    if weights.iter().any(|&v| v == 0.0) {
        return Err(Error::invalid_input("patch set does not cover every pixel"));
    }
    let mut img = reassemble_adjoint(pm);
    img.zip_mut_with(&weights, |v, &wt| *v /= wt);
    Ok(img)
}
