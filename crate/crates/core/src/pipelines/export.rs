use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use ndarray::Array2;
use ndarray_npy::{read_npy, write_npy};
use num_complex::Complex64;

use super::preprocess::{PreprocessedCase, Provenance};
use crate::error::{Error, Result};
use crate::imaging::{ComplexImage, KSpace};

fn npy_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Serde(format!("{}: {e}", path.display()))
}

/// 16-bit grayscale PNG, linearly mapping `[0, max]` to `[0, 65535]`.
pub fn write_png16(img: &Array2<f64>, path: &Path) -> Result<()> {
    let (h, w) = img.dim();
    let max = img.iter().cloned().fold(0.0, f64::max);
    let scale = if max > 0.0 { 65535.0 / max } else { 0.0 };
    let mut bytes = Vec::with_capacity(h * w * 2);
    for v in img.iter() {
        let q = (v * scale).round().clamp(0.0, 65535.0) as u16;
        bytes.extend_from_slice(&q.to_be_bytes());
    }
    write_png(path, w, h, png::BitDepth::Sixteen, &bytes)
}

/// Binary mask as an 8-bit PNG (0 or 255).
pub fn write_mask_png(mask: &Array2<bool>, path: &Path) -> Result<()> {
    let (h, w) = mask.dim();
    let bytes: Vec<u8> = mask.iter().map(|&b| if b { 255 } else { 0 }).collect();
    write_png(path, w, h, png::BitDepth::Eight, &bytes)
}

fn write_png(path: &Path, w: usize, h: usize, depth: png::BitDepth, data: &[u8]) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    let mut enc = png::Encoder::new(file, w as u32, h as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(depth);
    let mut writer = enc.write_header().map_err(|e| Error::Serde(e.to_string()))?;
    writer.write_image_data(data).map_err(|e| Error::Serde(e.to_string()))?;
    writer.finish().map_err(|e| Error::Serde(e.to_string()))?;
    Ok(())
}

/// Writes `gold.png`, `gold.npy`, `kspace.npy` and `provenance.json`.
pub fn write_case_dir(case: &PreprocessedCase, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let gold = case.gold.real_part();
    write_png16(&gold, &dir.join("gold.png"))?;
    let p = dir.join("gold.npy");
    write_npy(&p, &gold).map_err(|e| npy_err(&p, e))?;
    let p = dir.join("kspace.npy");
    write_npy(&p, case.synth_kspace.data()).map_err(|e| npy_err(&p, e))?;
    let json = serde_json::to_string_pretty(&case.provenance)?;
    fs::write(dir.join("provenance.json"), json + "\n")?;
    Ok(())
}

/// Reads a directory written by [`write_case_dir`].
pub fn read_case_dir(dir: &Path) -> Result<PreprocessedCase> {
    let p = dir.join("gold.npy");
    let gold: Array2<f64> = read_npy(&p).map_err(|e| npy_err(&p, e))?;
    let p = dir.join("kspace.npy");
    let k: Array2<Complex64> = read_npy(&p).map_err(|e| npy_err(&p, e))?;
    let provenance: Provenance = serde_json::from_str(&fs::read_to_string(dir.join("provenance.json"))?)?;
    Ok(PreprocessedCase { gold: ComplexImage::from_real(&gold)?, synth_kspace: KSpace::new(k)?, provenance })
}
