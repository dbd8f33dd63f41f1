use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::jpeg::{jpeg_codec, JpegQuality};
use super::RawCase;
use crate::error::{Error, Result};
use crate::imaging::{dft2_centered, idft2_centered, rss_combine, zero_pad_kspace, ComplexImage, KSpace, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelineKind {
    /// Zero-padding, inverse FFT and RSS coil combination.
    Scanner,
    /// RSS image quantised to 8 bits and JPEG compressed.
    Jpeg,
}

/// Everything needed to regenerate a preprocessed case from its source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub pipeline: PipelineKind,
    /// Per-axis zero-padding factor (scanner pipeline).
    pub zero_pad: Option<f64>,
    pub quality: Option<JpegQuality>,
    pub source_id: String,
    pub original_shape: Shape,
    pub n_coils: usize,
    /// The RSS image was divided by this value so that its maximum is 1.
    pub normalization: f64,
    /// Multiplier mapping the normalised image to 8-bit grey levels.
    pub eight_bit_scale: Option<f64>,
    pub padding_convention: String,
    pub quantization_convention: Option<String>,
}

/// A gold-standard image with the "fully sampled" k-space synthesised from
/// it.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedCase {
    pub gold: ComplexImage,
    pub synth_kspace: KSpace,
    pub provenance: Provenance,
}

impl PreprocessedCase {
    pub fn shape(&self) -> Shape {
        self.gold.shape()
    }
}

/// Forward transform of a real non-negative gold image.
pub fn synthesize_kspace(gold: &ComplexImage) -> Result<KSpace> {
    if !gold.is_real_nonnegative() {
        return Err(Error::invalid_input("gold image must be real and non-negative"));
    }
    dft2_centered(gold)
}

fn rss_of(raw: &RawCase, factor: f64) -> Result<Array2<f64>> {
    let padded = zero_pad_kspace(&raw.mck, factor)?;
    let images = padded.coils().iter().map(idft2_centered).collect::<Result<Vec<_>>>()?;
    Ok(rss_combine(&images)?.real_part())
}

fn max_normalize(img: Array2<f64>) -> Result<(Array2<f64>, f64)> {
    let max = img.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::invalid_input("coil-combined image is identically zero"));
    }
    Ok((img.mapv(|v| v / max), max))
}

fn finish(gold: Array2<f64>, provenance: Provenance) -> Result<PreprocessedCase> {
    let gold = ComplexImage::from_real(&gold)?;
    let synth_kspace = synthesize_kspace(&gold)?;
    Ok(PreprocessedCase { gold, synth_kspace, provenance })
}

/// Simulates scanner reconstruction: zero-pad each coil, inverse FFT, RSS,
/// normalise to a maximum of 1.
pub fn scanner_pipeline(raw: &RawCase, zero_pad_factor: f64) -> Result<PreprocessedCase> {
    let rss = rss_of(raw, zero_pad_factor)?;
    let (gold, max) = max_normalize(rss)?;
    finish(
        gold,
        Provenance {
            pipeline: PipelineKind::Scanner,
            zero_pad: Some(zero_pad_factor),
            quality: None,
            source_id: raw.source_id.clone(),
            original_shape: raw.mck.shape(),
            n_coils: raw.mck.n_coils(),
            normalization: max,
            eight_bit_scale: None,
            padding_convention: "per-axis, centred".into(),
            quantization_convention: None,
        },
    )
}

/// RSS without padding, then optional 8-bit JPEG round trip. The NC variant
/// keeps the unquantised floating-point image.
pub fn jpeg_pipeline(raw: &RawCase, quality: JpegQuality) -> Result<PreprocessedCase> {
    let rss = rss_of(raw, 1.0)?;
    let (norm, max) = max_normalize(rss)?;
    let (gold, scale, convention) = match quality {
        JpegQuality::NoCompression => (norm, None, None),
        JpegQuality::Quality(qf) => {
            let img8 = norm.mapv(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8);
            let decoded = jpeg_codec(&img8, qf)?;
            (
                decoded.mapv(|v| v as f64 / 255.0),
                Some(255.0),
                Some("linear: round(255 * image / max), clamped to [0, 255]".to_string()),
            )
        }
    };
    finish(
        gold,
        Provenance {
            pipeline: PipelineKind::Jpeg,
            zero_pad: None,
            quality: Some(quality),
            source_id: raw.source_id.clone(),
            original_shape: raw.mck.shape(),
            n_coils: raw.mck.n_coils(),
            normalization: max,
            eight_bit_scale: scale,
            padding_convention: "none".into(),
            quantization_convention: convention,
        },
    )
}

/// Re-runs the pipeline recorded in `provenance` on its source.
pub fn reproduce(raw: &RawCase, provenance: &Provenance) -> Result<PreprocessedCase> {
    if raw.source_id != provenance.source_id || raw.mck.shape() != provenance.original_shape {
        return Err(Error::invalid_input(format!(
            "source {} {:?} does not match provenance {} {:?}",
            raw.source_id,
            raw.mck.shape(),
            provenance.source_id,
            provenance.original_shape
        )));
    }
    match provenance.pipeline {
        PipelineKind::Scanner => {
            let f = provenance.zero_pad.ok_or_else(|| Error::invalid_input("scanner provenance without zero_pad"))?;
            scanner_pipeline(raw, f)
        }
        PipelineKind::Jpeg => {
            let q = provenance.quality.ok_or_else(|| Error::invalid_input("jpeg provenance without quality"))?;
            jpeg_pipeline(raw, q)
        }
    }
}
