use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{CorpusConfig, CorpusSource, CrimeKind, ExperimentConfig, SolverKind};
use super::results::{CaseRow, ResultsTable};
use crate::error::{Error, Result};
use crate::imaging::{center_crop, dft2_centered, idft2_centered, ComplexImage, KSpace, Shape};
use crate::metrics::{nrmse_with, ssim, NrmseNorm};
use crate::pipelines::{jpeg_pipeline, phantom, scanner_pipeline, JpegQuality, PreprocessedCase, RawCase};
use crate::sampling::{
    build_pdf, draw_mask, effective_rate, mask_statistics, scaled_calibration, MaskGeometry, MaskStatRow, SamplingMask,
    SamplingPdf, SamplingScheme,
};
use crate::seeding::mix;
use crate::solvers::{cs_fista, dictl_reconstruct, CsParams, DictlParams};

/// Stream tag separating DictL training randomness from mask seeds.
const DICTL_STREAM: u64 = 0xD1C7_0001;

/// Seed of mask `draw` for case `case_id`.
pub fn mask_seed_for(master_seed: u64, case_id: usize, draw: u64) -> u64 {
    mix(master_seed, &[case_id as u64, draw])
}

fn dictl_seed_for(master_seed: u64, case_id: usize) -> u64 {
    mix(master_seed, &[case_id as u64, DICTL_STREAM])
}

/// Seed of phantom case `case_id` in a corpus seeded with `corpus_seed`.
pub fn phantom_seed_for(corpus_seed: u64, case_id: usize) -> u64 {
    mix(corpus_seed, &[case_id as u64])
}

/// Sampling scheme, rate and calibration block for one variant; masks are
/// drawn over the full extent of whatever k-space they are applied to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskSpec {
    pub scheme: SamplingScheme,
    pub acceleration: f64,
    pub calibration: Shape,
    pub master_seed: u64,
}

impl MaskSpec {
    pub fn target_rate(&self) -> f64 {
        1.0 / self.acceleration
    }

    pub fn pdf(&self, shape: Shape) -> Result<SamplingPdf> {
        build_pdf(shape, self.scheme, self.target_rate(), self.calibration)
    }

    pub fn mask_for(&self, pdf: &SamplingPdf, case_id: usize) -> SamplingMask {
        draw_mask(pdf, mask_seed_for(self.master_seed, case_id, 0))
    }
}

/// A preprocessed case tagged with its corpus id.
#[derive(Debug, Clone)]
pub struct EvalCase {
    pub case_id: usize,
    pub data: PreprocessedCase,
}

/// One concrete solver configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solver", rename_all = "lowercase")]
pub enum SolverSetting {
    Cs(CsParams),
    Dictl(DictlParams),
}

impl SolverSetting {
    pub fn kind(&self) -> SolverKind {
        match self {
            SolverSetting::Cs(_) => SolverKind::Cs,
            SolverSetting::Dictl(_) => SolverKind::Dictl,
        }
    }

    /// Compact `key=value` summary of the tuned parameters.
    pub fn describe(&self) -> String {
        match self {
            SolverSetting::Cs(p) => format!("lambda={}", p.lambda),
            SolverSetting::Dictl(p) => format!(
                "atoms={};sparsity={};lambda_d={};block={};n_iter={}",
                p.atoms, p.sparsity, p.lambda_d, p.block, p.n_iter
            ),
        }
    }

    pub fn reconstruct(&self, y: &KSpace, mask: &SamplingMask, master_seed: u64, case_id: usize) -> Result<ComplexImage> {
        match self {
            SolverSetting::Cs(p) => cs_fista(y, mask, p),
            SolverSetting::Dictl(p) => {
                let p = DictlParams { seed: dictl_seed_for(master_seed, case_id), ..p.clone() };
                dictl_reconstruct(y, mask, &p)
            }
        }
    }
}

fn case_error(case_id: usize, variant: &str, e: Error) -> Error {
    match e {
        e @ Error::Case { .. } => e,
        e => Error::Case { case_id, variant: variant.to_string(), source: Box::new(e) },
    }
}

/// Result of a grid search on the calibration split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub variant: String,
    pub solver: SolverKind,
    #[serde(rename = "R")]
    pub acceleration: f64,
    pub grid_size: usize,
    pub chosen: SolverSetting,
    /// Mean calibration NRMSE per grid point, in grid order.
    pub scores: Vec<f64>,
}

/// Exhaustive search: mean NRMSE over the calibration cases for every grid
/// point; the first minimum in grid order wins.
pub fn calibrate(
    grid: &[SolverSetting],
    cases: &[EvalCase],
    mask_spec: &MaskSpec,
    metric: NrmseNorm,
    variant: &str,
) -> Result<(usize, Vec<f64>)> {
    if grid.is_empty() {
        return Err(Error::Config("calibration grid is empty".into()));
    }
    if cases.is_empty() {
        return Err(Error::invalid_argument("calibration needs at least one case"));
    }
    let pdf = mask_spec.pdf(cases[0].data.shape())?;
    let items: Vec<(usize, usize)> = (0..grid.len()).flat_map(|g| (0..cases.len()).map(move |c| (g, c))).collect();
    let errors: Vec<f64> = items
        .par_iter()
        .map(|&(g, c)| {
            let case = &cases[c];
            let run = || -> Result<f64> {
                let mask = mask_spec.mask_for(&pdf, case.case_id);
                let recon = grid[g].reconstruct(&case.data.synth_kspace, &mask, mask_spec.master_seed, case.case_id)?;
                nrmse_with(&case.data.gold, &recon, metric)
            };
            run().map_err(|e| case_error(case.case_id, variant, e))
        })
        .collect::<Result<_>>()?;
    let scores: Vec<f64> = errors.chunks(cases.len()).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s < scores[best] {
            best = i;
        }
    }
    Ok((best, scores))
}

/// Best lambda on the calibration cases; ties go to the smaller lambda.
pub fn calibrate_cs(cases: &[EvalCase], mask_spec: &MaskSpec, grid: &[f64], base: &CsParams, metric: NrmseNorm) -> Result<f64> {
    let mut lambdas = grid.to_vec();
    lambdas.sort_by(f64::total_cmp);
    let settings: Vec<_> = lambdas.iter().map(|&l| SolverSetting::Cs(CsParams { lambda: l, ..base.clone() })).collect();
    let (best, _) = calibrate(&settings, cases, mask_spec, metric, "calibration")?;
    Ok(lambdas[best])
}

/// Best grid point on the calibration cases; ties go to the earliest point in
/// lexicographic grid order.
pub fn calibrate_dictl(cases: &[EvalCase], mask_spec: &MaskSpec, grid: &[DictlParams], metric: NrmseNorm) -> Result<DictlParams> {
    let settings: Vec<_> = grid.iter().cloned().map(SolverSetting::Dictl).collect();
    let (best, _) = calibrate(&settings, cases, mask_spec, metric, "calibration")?;
    Ok(grid[best].clone())
}

/// Wall time of one stage of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Everything a run produces, before it is written to disk.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub jobs: usize,
    pub cases: Vec<CaseRow>,
    pub table: ResultsTable,
    pub calibrations: Vec<CalibrationRecord>,
    pub mask_stats: Vec<MaskStatRow>,
    pub timings: Vec<StageTiming>,
}

struct Stopwatch {
    timings: Vec<StageTiming>,
    last: Instant,
}

impl Stopwatch {
    fn new() -> Self {
        Self { timings: Vec::new(), last: Instant::now() }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        let seconds = (now - self.last).as_secs_f64();
        match self.timings.iter_mut().find(|t| t.stage == stage) {
            Some(t) => t.seconds += seconds,
            None => self.timings.push(StageTiming { stage: stage.to_string(), seconds }),
        }
        self.last = now;
    }
}

/// Runs the configured experiment on a dedicated pool of `jobs` workers
/// (all available cores when `None`).
pub fn run_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentOutcome> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::Config("jobs must be >= 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match config.crime {
        CrimeKind::ZeroPadding => run_crime1(config),
        CrimeKind::Jpeg => run_crime2(config),
        CrimeKind::MaskStats => run_mask_stats(config),
    })
}

/// Loads the first `n` raw cases of the corpus.
pub fn load_corpus(corpus: &CorpusConfig, n: usize) -> Result<Vec<RawCase>> {
    match corpus.source {
        CorpusSource::Phantom => (0..n)
            .into_par_iter()
            .map(|i| phantom(&corpus.phantom, phantom_seed_for(corpus.seed, i)))
            .collect(),
        CorpusSource::Hdf5 => load_hdf5(corpus, n),
    }
}

#[cfg(feature = "hdf5")]
fn load_hdf5(corpus: &CorpusConfig, n: usize) -> Result<Vec<RawCase>> {
    let path = corpus.path.as_ref().ok_or_else(|| Error::Config("an hdf5 corpus needs corpus.path".into()))?;
    let reader = crate::pipelines::ingest_dataset(path)?;
    if reader.n_slices() < n {
        return Err(Error::Config(format!(
            "{} holds {} slices but the split needs {n}",
            path.display(),
            reader.n_slices()
        )));
    }
    reader.take(n).collect()
}

#[cfg(not(feature = "hdf5"))]
fn load_hdf5(_: &CorpusConfig, _: usize) -> Result<Vec<RawCase>> {
    Err(Error::Config("built without HDF5 support".into()))
}

fn solver_grid(config: &ExperimentConfig, kind: SolverKind) -> Vec<SolverSetting> {
    match kind {
        SolverKind::Cs => {
            let cs = config.solvers.cs.as_ref().expect("enabled solver");
            let mut lambdas = cs.lambda_grid.clone();
            lambdas.sort_by(f64::total_cmp);
            lambdas.dedup();
            lambdas.into_iter().map(|l| SolverSetting::Cs(cs.params(l))).collect()
        }
        SolverKind::Dictl => config.solvers.dictl.as_ref().expect("enabled solver").grid().into_iter().map(SolverSetting::Dictl).collect(),
    }
}

/// One preprocessing variant of the corpus, split into calibration and test
/// cases.
struct Variant {
    label: String,
    calibration_block: Shape,
    calib: Vec<EvalCase>,
    test: Vec<EvalCase>,
}

/// Reference used for the oracle column, and how a reconstruction is brought
/// onto its grid.
trait Oracle: Sync {
    fn oracle_nrmse(&self, case_id: usize, variant: &PreprocessedCase, recon: &ComplexImage, metric: NrmseNorm) -> Result<f64>;
    fn effective_rate(&self, mask: &SamplingMask) -> Result<f64>;
}

struct ZeroPadOracle {
    base: BTreeMap<usize, PreprocessedCase>,
    base_shape: Shape,
}

impl Oracle for ZeroPadOracle {
    fn oracle_nrmse(&self, case_id: usize, variant: &PreprocessedCase, recon: &ComplexImage, metric: NrmseNorm) -> Result<f64> {
        let base = &self.base[&case_id];
        // Undo the interpolation: keep the measured k-space band and rescale to
        // the unpadded normalisation.
        let k = center_crop(&dft2_centered(recon)?, self.base_shape)?;
        let mut img = idft2_centered(&k)?;
        let scale = variant.provenance.normalization / base.provenance.normalization;
        img.data_mut().mapv_inplace(|v| v * scale);
        nrmse_with(&base.gold, &img, metric)
    }

    fn effective_rate(&self, mask: &SamplingMask) -> Result<f64> {
        effective_rate(mask, self.base_shape)
    }
}

struct JpegOracle {
    base: BTreeMap<usize, PreprocessedCase>,
}

impl Oracle for JpegOracle {
    fn oracle_nrmse(&self, case_id: usize, _: &PreprocessedCase, recon: &ComplexImage, metric: NrmseNorm) -> Result<f64> {
        nrmse_with(&self.base[&case_id].gold, recon, metric)
    }

    fn effective_rate(&self, mask: &SamplingMask) -> Result<f64> {
        Ok(mask.realized_rate())
    }
}

fn preprocess_variant(
    raw: &[RawCase],
    n_calib: usize,
    label: &str,
    calibration_block: Shape,
    f: impl Fn(&RawCase) -> Result<PreprocessedCase> + Sync,
) -> Result<Variant> {
    let cases: Vec<EvalCase> = raw
        .par_iter()
        .enumerate()
        .map(|(i, r)| f(r).map(|data| EvalCase { case_id: i, data }).map_err(|e| case_error(i, label, e)))
        .collect::<Result<_>>()?;
    let mut calib = cases;
    let test = calib.split_off(n_calib);
    Ok(Variant { label: label.to_string(), calibration_block, calib, test })
}

fn run_sweep(config: &ExperimentConfig, variants: Vec<Variant>, oracle: &dyn Oracle, clock: &mut Stopwatch) -> Result<ExperimentOutcome> {
    let sampling = config.sampling.as_ref().expect("validated");
    let solvers = config.solvers.enabled();
    let crime = config.crime.label();
    let mut rows = Vec::new();
    let mut calibrations = Vec::new();
    let mut hyper = BTreeMap::new();
    for &acceleration in &sampling.accelerations {
        let scheme = sampling.scheme_for(acceleration);
        for variant in &variants {
            let mask_spec = MaskSpec { scheme, acceleration, calibration: variant.calibration_block, master_seed: config.seed };
            for &solver in &solvers {
                let grid = solver_grid(config, solver);
                let chosen = if grid.len() == 1 {
                    calibrations.push(CalibrationRecord {
                        variant: variant.label.clone(),
                        solver,
                        acceleration,
                        grid_size: 1,
                        chosen: grid[0].clone(),
                        scores: Vec::new(),
                    });
                    grid[0].clone()
                } else {
                    let (best, scores) = calibrate(&grid, &variant.calib, &mask_spec, config.metric, &variant.label)?;
                    calibrations.push(CalibrationRecord {
                        variant: variant.label.clone(),
                        solver,
                        acceleration,
                        grid_size: grid.len(),
                        chosen: grid[best].clone(),
                        scores,
                    });
                    grid[best].clone()
                };
                clock.lap("calibration");
                hyper.insert((variant.label.clone(), solver, acceleration.to_bits()), chosen.describe());
                let pdf = mask_spec.pdf(variant.test[0].data.shape())?;
                let scored: Vec<CaseRow> = variant
                    .test
                    .par_iter()
                    .map(|case| {
                        let run = || -> Result<CaseRow> {
                            let mask = mask_spec.mask_for(&pdf, case.case_id);
                            let recon = chosen.reconstruct(&case.data.synth_kspace, &mask, config.seed, case.case_id)?;
                            Ok(CaseRow {
                                crime: crime.to_string(),
                                variant: variant.label.clone(),
                                solver: solver.as_str().to_string(),
                                scheme: scheme.label(),
                                acceleration,
                                case_id: case.case_id,
                                nrmse: nrmse_with(&case.data.gold, &recon, config.metric)?,
                                ssim: ssim(&case.data.gold, &recon)?,
                                oracle_nrmse: oracle.oracle_nrmse(case.case_id, &case.data, &recon, config.metric)?,
                                effective_rate: oracle.effective_rate(&mask)?,
                                seed: mask.seed(),
                            })
                        };
                        run().map_err(|e| case_error(case.case_id, &variant.label, e))
                    })
                    .collect::<Result<_>>()?;
                rows.extend(scored);
                clock.lap("reconstruction");
            }
        }
    }
    let table = ResultsTable::from_cases(&rows, config.metric, |variant, solver, r| {
        hyper.get(&(variant.to_string(), solver, r.to_bits())).cloned().unwrap_or_default()
    });
    Ok(ExperimentOutcome {
        config: config.clone(),
        jobs: rayon::current_num_threads(),
        cases: rows,
        table,
        calibrations,
        mask_stats: Vec::new(),
        timings: std::mem::take(&mut clock.timings),
    })
}

fn corpus_for(config: &ExperimentConfig, clock: &mut Stopwatch) -> Result<(Vec<RawCase>, usize)> {
    let split = config.split.expect("validated");
    let raw = load_corpus(config.corpus.as_ref().expect("validated"), split.calibration + split.test)?;
    clock.lap("corpus");
    Ok((raw, split.calibration))
}

/// Zero-padding sweep: every variant is reconstructed from masks spanning its
/// full padded k-space and scored against its own gold.
pub fn run_crime1(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    if config.crime != CrimeKind::ZeroPadding {
        return Err(Error::Config("run_crime1 needs crime = \"I\"".into()));
    }
    let mut clock = Stopwatch::new();
    let (raw, n_calib) = corpus_for(config, &mut clock)?;
    let sampling = config.sampling.as_ref().expect("validated");
    let base_shape = raw[0].mck.shape();
    if raw.iter().any(|r| r.mck.shape() != base_shape) {
        return Err(Error::invalid_input("all corpus slices must share one matrix size"));
    }
    let base: BTreeMap<usize, PreprocessedCase> = raw
        .par_iter()
        .enumerate()
        .map(|(i, r)| scanner_pipeline(r, 1.0).map(|c| (i, c)).map_err(|e| case_error(i, "1", e)))
        .collect::<Result<_>>()?;
    let factors = &config.variants.as_ref().expect("validated").zero_pad;
    let variants = factors
        .iter()
        .map(|&f| {
            let calib = scaled_calibration(sampling.calibration, f);
            preprocess_variant(&raw, n_calib, &f.to_string(), calib, |r| scanner_pipeline(r, f))
        })
        .collect::<Result<Vec<_>>>()?;
    clock.lap("preprocess");
    run_sweep(config, variants, &ZeroPadOracle { base, base_shape }, &mut clock)
}

/// JPEG sweep: every quality level is scored against its own decoded gold.
pub fn run_crime2(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    if config.crime != CrimeKind::Jpeg {
        return Err(Error::Config("run_crime2 needs crime = \"II\"".into()));
    }
    let mut clock = Stopwatch::new();
    let (raw, n_calib) = corpus_for(config, &mut clock)?;
    let sampling = config.sampling.as_ref().expect("validated");
    let base: BTreeMap<usize, PreprocessedCase> = raw
        .par_iter()
        .enumerate()
        .map(|(i, r)| jpeg_pipeline(r, JpegQuality::NoCompression).map(|c| (i, c)).map_err(|e| case_error(i, "NC", e)))
        .collect::<Result<_>>()?;
    let qualities = &config.variants.as_ref().expect("validated").quality;
    let variants = qualities
        .iter()
        .map(|&q| preprocess_variant(&raw, n_calib, &q.to_string(), sampling.calibration, |r| jpeg_pipeline(r, q)))
        .collect::<Result<Vec<_>>>()?;
    clock.lap("preprocess");
    run_sweep(config, variants, &JpegOracle { base }, &mut clock)
}

/// Effective-rate statistics over schemes and paddings.
pub fn run_mask_stats(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let m = config
        .mask_stats
        .as_ref()
        .ok_or_else(|| Error::Config("mask-stats needs a [mask_stats] table".into()))?;
    let mut clock = Stopwatch::new();
    let acceleration = 1.0 / m.target_rate;
    let schemes: Vec<SamplingScheme> = m
        .schemes
        .iter()
        .map(|&k| {
            let mut s = SamplingScheme::for_kind(k, acceleration);
            if let (crate::sampling::SchemeKind::StrongVd, Some(p)) = (k, m.strong_power) {
                s.power = p;
            }
            s
        })
        .collect();
    let geometry = MaskGeometry { base_shape: m.base_shape, base_calib: m.base_calibration };
    let rows = mask_statistics(&schemes, &m.paddings, m.target_rate, geometry, m.n_masks, config.seed)?;
    clock.lap("mask_statistics");
    Ok(ExperimentOutcome {
        config: config.clone(),
        jobs: rayon::current_num_threads(),
        cases: Vec::new(),
        table: ResultsTable { crime: CrimeKind::MaskStats, metric: config.metric, rows: Vec::new() },
        calibrations: Vec::new(),
        mask_stats: rows,
        timings: clock.timings,
    })
}
