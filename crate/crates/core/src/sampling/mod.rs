//! Variable-density k-space sampling: probability maps, Monte-Carlo masks and
//! effective sampling rates inside a zero-padded extent.

mod mask;
mod pdf;
mod stats;

pub use mask::{draw_mask, effective_rate, SamplingMask};
pub use pdf::{build_pdf, SamplingPdf, SamplingScheme, SchemeKind};
pub use stats::{mask_statistics, scaled_calibration, MaskGeometry, MaskStatRow};
pub(crate) use stats::mean_std;
