use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::imaging::Shape;
use crate::metrics::NrmseNorm;
use crate::pipelines::{JpegQuality, PhantomSpec};
use crate::sampling::{SamplingScheme, SchemeKind};
use crate::solvers::{CsParams, DictlParams};
use crate::transforms::{Wavelet, DEFAULT_LEVELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrimeKind {
    #[serde(rename = "I")]
    ZeroPadding,
    #[serde(rename = "II")]
    Jpeg,
    #[serde(rename = "mask-stats")]
    MaskStats,
}

impl CrimeKind {
    pub fn label(self) -> &'static str {
        match self {
            CrimeKind::ZeroPadding => "I",
            CrimeKind::Jpeg => "II",
            CrimeKind::MaskStats => "mask-stats",
        }
    }
}

impl fmt::Display for CrimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Cs,
    Dictl,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Cs => "cs",
            SolverKind::Dictl => "dictl",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cs" => Ok(SolverKind::Cs),
            "dictl" => Ok(SolverKind::Dictl),
            _ => Err(Error::invalid_argument(format!("unknown solver {s:?}"))),
        }
    }
}

/// Preprocessing variants of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantConfig {
    /// Per-axis zero-padding factors (crime I).
    #[serde(default)]
    pub zero_pad: Vec<f64>,
    /// JPEG settings (crime II), e.g. `["NC", 75, 50, 20]`.
    #[serde(default)]
    pub quality: Vec<JpegQuality>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub scheme: SchemeKind,
    /// Acceleration factors R; each yields target rate 1/R.
    pub accelerations: Vec<f64>,
    /// Overrides the scheme's default VD power.
    #[serde(default)]
    pub power: Option<u32>,
    /// Calibration block at the unpadded size; scaled with zero-padding.
    pub calibration: Shape,
}

impl SamplingConfig {
    pub fn scheme_for(&self, acceleration: f64) -> SamplingScheme {
        let mut s = SamplingScheme::for_kind(self.scheme, acceleration);
        if let Some(p) = self.power {
            s.power = p;
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusSource {
    Phantom,
    Hdf5,
}

/// Where raw cases come from. Case `i` of a phantom corpus uses seed
/// `mix(seed, [i])`; an HDF5 corpus yields its slices in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub source: CorpusSource,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub phantom: PhantomSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub calibration: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsConfig {
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default)]
    pub wavelet: Wavelet,
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_lambda_grid() -> Vec<f64> {
    (0..9).map(|i| 10f64.powi(i - 9)).collect()
}
fn default_max_iters() -> usize {
    200
}
fn default_rel_tol() -> f64 {
    1e-6
}
fn default_levels() -> usize {
    DEFAULT_LEVELS
}

impl Default for CsConfig {
    fn default() -> Self {
        Self {
            lambda_grid: default_lambda_grid(),
            max_iters: default_max_iters(),
            rel_tol: default_rel_tol(),
            wavelet: Wavelet::Db4,
            levels: DEFAULT_LEVELS,
        }
    }
}

impl CsConfig {
    pub fn params(&self, lambda: f64) -> CsParams {
        CsParams { lambda, max_iters: self.max_iters, rel_tol: self.rel_tol, wavelet: self.wavelet, levels: self.levels }
    }
}

/// Product grid over the tunable DictL axes plus fixed settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictlConfig {
    #[serde(default = "d_atoms")]
    pub atoms: Vec<usize>,
    #[serde(default = "d_sparsity")]
    pub sparsity: Vec<usize>,
    #[serde(default = "d_lambda")]
    pub lambda_d: Vec<f64>,
    #[serde(default = "d_block")]
    pub block: Vec<usize>,
    #[serde(default = "d_iter")]
    pub n_iter: Vec<usize>,
    #[serde(default = "d_stride")]
    pub stride: usize,
    #[serde(default = "d_sweeps")]
    pub ksvd_sweeps: usize,
    /// 0 selects the default training-set size.
    #[serde(default)]
    pub train_patches: usize,
    #[serde(default = "d_true")]
    pub subtract_mean: bool,
}

fn d_atoms() -> Vec<usize> {
    vec![64, 128]
}
fn d_sparsity() -> Vec<usize> {
    vec![5, 9]
}
fn d_lambda() -> Vec<f64> {
    vec![1e-3, 1e-2]
}
fn d_block() -> Vec<usize> {
    vec![8]
}
fn d_iter() -> Vec<usize> {
    vec![5, 9]
}
fn d_stride() -> usize {
    2
}
fn d_sweeps() -> usize {
    10
}
fn d_true() -> bool {
    true
}

impl Default for DictlConfig {
    fn default() -> Self {
        Self {
            atoms: d_atoms(),
            sparsity: d_sparsity(),
            lambda_d: d_lambda(),
            block: d_block(),
            n_iter: d_iter(),
            stride: d_stride(),
            ksvd_sweeps: d_sweeps(),
            train_patches: 0,
            subtract_mean: true,
        }
    }
}

impl DictlConfig {
    /// Grid points in lexicographic order of (atoms, sparsity, lambda_d,
    /// block, n_iter).
    pub fn grid(&self) -> Vec<DictlParams> {
        let mut out = Vec::new();
        for &atoms in &self.atoms {
            for &sparsity in &self.sparsity {
                for &lambda_d in &self.lambda_d {
                    for &block in &self.block {
                        for &n_iter in &self.n_iter {
                            out.push(DictlParams {
                                atoms,
                                sparsity,
                                lambda_d,
                                block,
                                n_iter,
                                train_patches: self.train_patches,
                                stride: self.stride,
                                ksvd_sweeps: self.ksvd_sweeps,
                                subtract_mean: self.subtract_mean,
                                seed: 0,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub cs: Option<CsConfig>,
    #[serde(default)]
    pub dictl: Option<DictlConfig>,
}

impl SolverConfig {
    pub fn enabled(&self) -> Vec<SolverKind> {
        let mut v = Vec::new();
        if self.cs.is_some() {
            v.push(SolverKind::Cs);
        }
        if self.dictl.is_some() {
            v.push(SolverKind::Dictl);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskStatsConfig {
    pub schemes: Vec<SchemeKind>,
    pub paddings: Vec<f64>,
    pub target_rate: f64,
    pub n_masks: usize,
    pub base_shape: Shape,
    pub base_calibration: Shape,
    /// VD power for the strong scheme; defaults to the power keyed to R.
    #[serde(default)]
    pub strong_power: Option<u32>,
}

/// Complete, declarative description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub crime: CrimeKind,
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub metric: NrmseNorm,
    #[serde(default)]
    pub variants: Option<VariantConfig>,
    #[serde(default)]
    pub sampling: Option<SamplingConfig>,
    #[serde(default)]
    pub corpus: Option<CorpusConfig>,
    #[serde(default)]
    pub split: Option<SplitConfig>,
    #[serde(default)]
    pub solvers: SolverConfig,
    #[serde(default)]
    pub mask_stats: Option<MaskStatsConfig>,
}

fn default_output() -> PathBuf {
    PathBuf::from("crimescope-out")
}

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| cfg(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => cfg(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| cfg(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form of the parsed configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serialises");
        let digest = Sha256::digest(&canonical);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        match self.crime {
            CrimeKind::MaskStats => {
                let m = self.mask_stats.as_ref().ok_or_else(|| cfg("mask-stats needs a [mask_stats] table"))?;
                if m.schemes.is_empty() || m.paddings.is_empty() {
                    return Err(cfg("mask_stats.schemes and mask_stats.paddings must be non-empty"));
                }
                if m.n_masks == 0 {
                    return Err(cfg("mask_stats.n_masks must be >= 1"));
                }
                if !(m.target_rate > 0.0 && m.target_rate <= 1.0) {
                    return Err(cfg("mask_stats.target_rate must be in (0, 1]"));
                }
                if m.paddings.iter().any(|&p| !(p >= 1.0) || !p.is_finite()) {
                    return Err(cfg("paddings must be >= 1"));
                }
            }
            CrimeKind::ZeroPadding | CrimeKind::Jpeg => {
                let v = self.variants.as_ref().ok_or_else(|| cfg("missing [variants]"))?;
                match self.crime {
                    CrimeKind::ZeroPadding => {
                        if v.zero_pad.is_empty() || !v.quality.is_empty() {
                            return Err(cfg("crime I needs variants.zero_pad and no variants.quality"));
                        }
                        if v.zero_pad.iter().any(|&f| !(f >= 1.0) || !f.is_finite()) {
                            return Err(cfg("zero-padding factors must be >= 1"));
                        }
                    }
                    _ => {
                        if v.quality.is_empty() || !v.zero_pad.is_empty() {
                            return Err(cfg("crime II needs variants.quality and no variants.zero_pad"));
                        }
                    }
                }
                let s = self.sampling.as_ref().ok_or_else(|| cfg("missing [sampling]"))?;
                if s.accelerations.is_empty() || s.accelerations.iter().any(|&r| !(r >= 1.0) || !r.is_finite()) {
                    return Err(cfg("sampling.accelerations must be non-empty and >= 1"));
                }
                if s.power == Some(0) {
                    return Err(cfg("sampling.power must be >= 1"));
                }
                if self.corpus.is_none() {
                    return Err(cfg("missing [corpus]"));
                }
                let corpus = self.corpus.as_ref().expect("checked above");
                match corpus.source {
                    CorpusSource::Phantom => corpus.phantom.validate().map_err(|e| cfg(e.to_string()))?,
                    CorpusSource::Hdf5 => {
                        if corpus.path.is_none() {
                            return Err(cfg("an hdf5 corpus needs corpus.path"));
                        }
                    }
                }
                let split = self.split.ok_or_else(|| cfg("missing [split]"))?;
                if split.calibration == 0 || split.test == 0 {
                    return Err(cfg("split.calibration and split.test must be >= 1"));
                }
                if self.solvers.enabled().is_empty() {
                    return Err(cfg("enable at least one solver ([solvers.cs] or [solvers.dictl])"));
                }
                if let Some(cs) = &self.solvers.cs {
                    if cs.lambda_grid.is_empty() {
                        return Err(cfg("solvers.cs.lambda_grid must be non-empty"));
                    }
                    for &l in &cs.lambda_grid {
                        cs.params(l).validate().map_err(|e| cfg(e.to_string()))?;
                    }
                }
                if let Some(d) = &self.solvers.dictl {
                    let grid = d.grid();
                    if grid.is_empty() {
                        return Err(cfg("solvers.dictl grid must be non-empty"));
                    }
                    for p in grid {
                        p.validate().map_err(|e| cfg(e.to_string()))?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Variant labels in sweep order.
    pub fn variant_labels(&self) -> Vec<String> {
        match (&self.variants, self.crime) {
            (Some(v), CrimeKind::ZeroPadding) => v.zero_pad.iter().map(|f| f.to_string()).collect(),
            (Some(v), CrimeKind::Jpeg) => v.quality.iter().map(|q| q.to_string()).collect(),
            _ => Vec::new(),
        }
    }
}
