mod dataset;
mod export;
pub mod jpeg;
mod phantom;
mod preprocess;

#[cfg(feature = "hdf5")]
pub use dataset::{export_dataset, ingest_dataset, DatasetReader};
pub use export::{read_case_dir, write_case_dir, write_mask_png, write_png16};
pub use jpeg::{jpeg_codec, JpegQuality};
pub use phantom::{coil_sensitivities, phantom, phantom_image, PhantomSpec};
pub use preprocess::{
    jpeg_pipeline, reproduce, scanner_pipeline, synthesize_kspace, PipelineKind, PreprocessedCase, Provenance,
};

use crate::imaging::MultiCoilKSpace;

/// Raw multi-coil acquisition of one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCase {
    pub mck: MultiCoilKSpace,
    pub source_id: String,
}
