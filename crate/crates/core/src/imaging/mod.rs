//! Complex 2D arrays, centered unitary Fourier transforms, zero-padding and
//! coil combination.
//!
//! Layout convention: in both image space and k-space the origin sits at the
//! centered index `(H / 2, W / 2)` (integer division). For even sizes this is
//! the usual `fftshift` layout.

mod coil;
mod fourier;
mod types;

pub use coil::{center_crop, center_offset, rss_combine, zero_pad_kspace, zero_pad_shape};
pub use fourier::{dft2_centered, idft2_centered, CenteredFft};
pub use types::{ComplexImage, KSpace, MultiCoilKSpace, Shape};
