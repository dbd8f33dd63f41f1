mod patches;
mod threshold;
mod wavelet;

pub use patches::{extract_patches, extract_patches_at, reassemble_adjoint, reassemble_patches, PatchMatrix};
pub use threshold::{soft_threshold, soft_threshold_inplace};
pub use wavelet::{dwt2, dwt2_padded, idwt2, idwt2_padded, Wavelet, WaveletCoeffs, DEFAULT_LEVELS};
