//! Experiment orchestration: configuration, per-variant calibration, the two
//! preprocessing sweeps, mask statistics and report files.

mod config;
mod report;
mod results;
mod runner;

pub use config::{
    CorpusConfig, CorpusSource, CrimeKind, CsConfig, DictlConfig, ExperimentConfig, MaskStatsConfig, SamplingConfig,
    SolverConfig, SolverKind, SplitConfig, VariantConfig,
};
pub use report::{
    read_cases_csv, read_csv, report, report_from_dir, write_csv, Manifest, CALIBRATION_JSON, CASES_CSV, MANIFEST_JSON,
    MASK_STATS_CSV, SUMMARY_CSV,
};
pub use results::{monotone_chain, CaseRow, ChainCheck, Direction, ResultsTable, SummaryRow};
pub use runner::{
    calibrate, calibrate_cs, calibrate_dictl, load_corpus, mask_seed_for, phantom_seed_for, run_crime1, run_crime2,
    run_experiment, run_mask_stats, CalibrationRecord, EvalCase, ExperimentOutcome, MaskSpec, SolverSetting, StageTiming,
};
