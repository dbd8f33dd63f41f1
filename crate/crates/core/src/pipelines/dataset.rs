//! Raw multi-coil containers: HDF5 with a complex dataset `kspace` shaped
//! `(slices, coils, H, W)`.
#![cfg(feature = "hdf5")]

use std::path::{Path, PathBuf};

use hdf5_metno as hdf5;
use hdf5::types::{FloatSize, TypeDescriptor};
use ndarray::{s, Array3, Array4};
use num_complex::{Complex32, Complex64};

use super::RawCase;
use crate::error::{Error, Result};
use crate::imaging::{KSpace, MultiCoilKSpace};

const KEY: &str = "kspace";

/// Streams one slice at a time from an open container.
pub struct DatasetReader {
    path: PathBuf,
    stem: String,
    dataset: hdf5::Dataset,
    double: bool,
    n_slices: usize,
    next: usize,
}

impl DatasetReader {
    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::Ingest { path: self.path.clone(), reason: reason.into() }
    }

    pub fn read_slice(&self, index: usize) -> Result<RawCase> {
        if index >= self.n_slices {
            return Err(self.fail(format!("slice {index} out of range ({} slices)", self.n_slices)));
        }
        let data: Array3<Complex64> = if self.double {
            self.dataset.read_slice(s![index, .., .., ..]).map_err(|e| self.fail(e.to_string()))?
        } else {
            let a: Array3<Complex32> = self.dataset.read_slice(s![index, .., .., ..]).map_err(|e| self.fail(e.to_string()))?;
            a.mapv(|c| Complex64::new(c.re as f64, c.im as f64))
        };
        let coils = data
            .outer_iter()
            .map(|c| KSpace::new(c.to_owned()))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| self.fail(e.to_string()))?;
        Ok(RawCase { mck: MultiCoilKSpace::new(coils)?, source_id: format!("{}:{index}", self.stem) })
    }
}

impl Iterator for DatasetReader {
    type Item = Result<RawCase>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.n_slices {
            return None;
        }
        let out = self.read_slice(self.next);
        self.next += 1;
        Some(out)
    }
}

/// Opens `path` and validates the `kspace` dataset without reading it.
pub fn ingest_dataset(path: &Path) -> Result<DatasetReader> {
    let fail = |reason: String| Error::Ingest { path: path.to_path_buf(), reason };
    let file = hdf5::File::open(path).map_err(|e| fail(e.to_string()))?;
    let dataset = file.dataset(KEY).map_err(|_| fail(format!("missing dataset \"{KEY}\"")))?;
    let shape = dataset.shape();
    if shape.len() != 4 {
        return Err(fail(format!("\"{KEY}\" must have rank 4 (slices, coils, H, W), got shape {shape:?}")));
    }
    let dtype = dataset.dtype().and_then(|t| t.to_descriptor()).map_err(|e| fail(e.to_string()))?;
    let double = match &dtype {
        TypeDescriptor::Compound(c) if c.fields.len() == 2 => match (&c.fields[0].ty, &c.fields[1].ty) {
            (TypeDescriptor::Float(FloatSize::U4), TypeDescriptor::Float(FloatSize::U4)) => false,
            (TypeDescriptor::Float(FloatSize::U8), TypeDescriptor::Float(FloatSize::U8)) => true,
            _ => return Err(fail(format!("\"{KEY}\" must be complex, got {dtype}"))),
        },
        _ => return Err(fail(format!("\"{KEY}\" must be complex, got {dtype}"))),
    };
    if shape[1] == 0 || shape[2] == 0 || shape[3] == 0 {
        return Err(fail(format!("\"{KEY}\" has an empty axis: {shape:?}")));
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(DatasetReader { path: path.to_path_buf(), stem, dataset, double, n_slices: shape[0], next: 0 })
}

/// Writes cases as complex64 (two 32-bit floats); all cases must share
/// coil count and shape.
pub fn export_dataset(path: &Path, cases: &[RawCase]) -> Result<()> {
    let fail = |reason: String| Error::Ingest { path: path.to_path_buf(), reason };
    let first = cases.first().ok_or_else(|| fail("no cases to export".into()))?;
    let (c, (h, w)) = (first.mck.n_coils(), first.mck.shape());
    let mut data = Array4::<Complex32>::zeros((cases.len(), c, h, w));
    for (i, case) in cases.iter().enumerate() {
        if case.mck.n_coils() != c || case.mck.shape() != (h, w) {
            return Err(fail(format!("case {i} differs in coil count or shape")));
        }
        for (j, coil) in case.mck.coils().iter().enumerate() {
            data.slice_mut(s![i, j, .., ..]).assign(&coil.data().mapv(|v| Complex32::new(v.re as f32, v.im as f32)));
        }
    }
    let file = hdf5::File::create(path).map_err(|e| fail(e.to_string()))?;
    file.new_dataset_builder().with_data(&data).create(KEY).map_err(|e| fail(e.to_string()))?;
    Ok(())
}
