use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crimescope::harness::{self, CorpusConfig, CorpusSource, ExperimentConfig, MaskSpec, SolverSetting};
use crimescope::metrics::{nrmse, ssim};
use crimescope::pipelines::{
    jpeg_pipeline, phantom, read_case_dir, scanner_pipeline, write_case_dir, write_mask_png, write_png16, JpegQuality,
    PhantomSpec, RawCase,
};
use crimescope::sampling::{SamplingScheme, SchemeKind};
use crimescope::solvers::{CsParams, DictlParams};
use crimescope::{Error, Result};

#[derive(Parser)]
#[command(name = "crimescope", version, about = "Preprocessing-bias experiments for undersampled MRI reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pipeline {
    Scanner,
    Jpeg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Cs,
    Dictl,
}

#[derive(Subcommand)]
enum Command {
    /// Effective sampling rate statistics.
    MaskStats(RunArgs),
    /// Zero-padding sweep.
    Crime1(RunArgs),
    /// JPEG compression sweep.
    Crime2(RunArgs),
    /// Writes preprocessed case directories.
    Preprocess {
        #[arg(long, value_enum)]
        pipeline: Pipeline,
        /// Zero-padding factor for the scanner pipeline.
        #[arg(long, default_value_t = 1.0)]
        zero_pad: f64,
        /// JPEG quality (1-100 or NC) for the jpeg pipeline.
        #[arg(long, default_value = "NC")]
        quality: JpegQuality,
        /// HDF5 container with a `kspace` dataset; phantoms are generated when absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Takes the corpus from an experiment configuration instead.
        #[arg(long, conflicts_with = "input")]
        config: Option<PathBuf>,
        /// Number of cases (all slices of an HDF5 input by default).
        #[arg(long)]
        count: Option<usize>,
        /// Phantom corpus seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Reconstructs one preprocessed case directory.
    Reconstruct {
        /// Directory written by `preprocess`.
        #[arg(long)]
        case: PathBuf,
        #[arg(long, value_enum, default_value = "cs")]
        solver: Solver,
        /// CS regularisation weight.
        #[arg(long, default_value_t = 1e-3)]
        lambda: f64,
        #[arg(long, default_value = "strong_vd")]
        scheme: String,
        /// Acceleration factor R.
        #[arg(long = "R", default_value_t = 4.0)]
        acceleration: f64,
        /// Side of the fully sampled calibration block.
        #[arg(long, default_value_t = 6)]
        calibration: usize,
        /// Mask seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Rebuilds summary tables and plots from a results directory.
    Report {
        /// Directory holding cases.csv.
        #[arg(long)]
        results: Option<PathBuf>,
        /// Uses the output directory named in this configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::MaskStats(a) => experiment(a, harness::CrimeKind::MaskStats),
        Command::Crime1(a) => experiment(a, harness::CrimeKind::ZeroPadding),
        Command::Crime2(a) => experiment(a, harness::CrimeKind::Jpeg),
        Command::Preprocess { pipeline, zero_pad, quality, input, config, count, seed, out, jobs } => {
            let corpus = match (input, config) {
                (Some(path), _) => CorpusConfig { source: CorpusSource::Hdf5, seed, path: Some(path), phantom: PhantomSpec::default() },
                (None, Some(cfg)) => ExperimentConfig::from_file(&cfg)?
                    .corpus
                    .ok_or_else(|| Error::Config(format!("{} has no [corpus] table", cfg.display())))?,
                (None, None) => CorpusConfig { source: CorpusSource::Phantom, seed, path: None, phantom: PhantomSpec::default() },
            };
            with_pool(jobs, || preprocess(&corpus, pipeline, zero_pad, quality, count, &out))
        }
        Command::Reconstruct { case, solver, lambda, scheme, acceleration, calibration, seed, out, jobs } => {
            let kind: SchemeKind = serde_json::from_value(serde_json::Value::String(scheme.clone()))
                .map_err(|_| Error::Config(format!("unknown scheme {scheme:?}")))?;
            if !(acceleration >= 1.0) {
                return Err(Error::Config("R must be >= 1".into()));
            }
            let setting = match solver {
                Solver::Cs => SolverSetting::Cs(CsParams { lambda, ..CsParams::default() }),
                Solver::Dictl => SolverSetting::Dictl(DictlParams::default()),
            };
            let spec = MaskSpec {
                scheme: SamplingScheme::for_kind(kind, acceleration),
                acceleration,
                calibration: (calibration, calibration),
                master_seed: seed,
            };
            with_pool(jobs, || reconstruct(&case, &setting, &spec, &out))
        }
        Command::Report { results, config, out } => {
            let dir = match (results.or(out), config) {
                (Some(d), _) => d,
                (None, Some(c)) => ExperimentConfig::from_file(&c)?.output_dir,
                (None, None) => return Err(Error::Config("report needs --results DIR or --config FILE".into())),
            };
            for p in harness::report_from_dir(&dir)? {
                info!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::Config("jobs must be >= 1".into()));
        }
        b = b.num_threads(j);
    }
    b.build().map_err(|e| Error::Config(e.to_string()))?.install(f)
}

fn experiment(args: RunArgs, expected: harness::CrimeKind) -> Result<()> {
    let mut config = ExperimentConfig::from_file(&args.config)?;
    if config.crime != expected {
        return Err(Error::Config(format!(
            "{} declares crime = {:?} but this subcommand runs {:?}",
            args.config.display(),
            config.crime.label(),
            expected.label()
        )));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    info!("config {} (sha256 {})", args.config.display(), config.hash());
    let outcome = harness::run_experiment(&config, args.jobs)?;
    for row in &outcome.table.rows {
        info!(
            "R={} {} {} {}: nrmse {:.5} +/- {:.5}, ssim {:.4}, oracle nrmse {:.5} [{}]",
            row.acceleration,
            row.variant,
            row.solver,
            row.scheme,
            row.mean_nrmse,
            row.std_nrmse,
            row.mean_ssim,
            row.mean_oracle_nrmse,
            row.chosen_hyperparams
        );
    }
    for p in harness::report(&outcome, &config.output_dir)? {
        info!("wrote {}", p.display());
    }
    Ok(())
}

fn preprocess(
    corpus: &CorpusConfig,
    pipeline: Pipeline,
    zero_pad: f64,
    quality: JpegQuality,
    count: Option<usize>,
    out: &Path,
) -> Result<()> {
    let raw: Vec<RawCase> = match corpus.source {
        CorpusSource::Phantom => {
            let n = count.unwrap_or(1);
            (0..n).map(|i| phantom(&corpus.phantom, harness::phantom_seed_for(corpus.seed, i))).collect::<Result<_>>()?
        }
        CorpusSource::Hdf5 => hdf5_cases(corpus.path.as_deref().expect("hdf5 corpus has a path"), count)?,
    };
    for (i, r) in raw.iter().enumerate() {
        let case = match pipeline {
            Pipeline::Scanner => scanner_pipeline(r, zero_pad)?,
            Pipeline::Jpeg => jpeg_pipeline(r, quality)?,
        };
        let dir = out.join(format!("case_{i:04}"));
        write_case_dir(&case, &dir)?;
        info!("{} -> {}", r.source_id, dir.display());
    }
    Ok(())
}

#[cfg(feature = "hdf5")]
fn hdf5_cases(path: &Path, count: Option<usize>) -> Result<Vec<RawCase>> {
    let reader = crimescope::pipelines::ingest_dataset(path)?;
    let n = count.unwrap_or(reader.n_slices());
    reader.take(n).collect()
}

#[cfg(not(feature = "hdf5"))]
fn hdf5_cases(_: &Path, _: Option<usize>) -> Result<Vec<RawCase>> {
    Err(Error::Config("built without HDF5 support".into()))
}

fn reconstruct(case_dir: &Path, setting: &SolverSetting, spec: &MaskSpec, out: &Path) -> Result<()> {
    let case = read_case_dir(case_dir)?;
    let pdf = spec.pdf(case.shape())?;
    let mask = spec.mask_for(&pdf, 0);
    let recon = setting.reconstruct(&case.synth_kspace, &mask, spec.master_seed, 0)?;
    std::fs::create_dir_all(out)?;
    let p = out.join("recon.npy");
    ndarray_npy::write_npy(&p, recon.data()).map_err(|e| Error::Serde(format!("{}: {e}", p.display())))?;
    write_png16(&recon.magnitude(), &out.join("recon.png"))?;
    write_mask_png(mask.mask(), &out.join("mask.png"))?;
    let metrics = serde_json::json!({
        "solver": setting.kind().as_str(),
        "params": setting.describe(),
        "scheme": spec.scheme.label(),
        "R": spec.acceleration,
        "mask_seed": mask.seed(),
        "realized_rate": mask.realized_rate(),
        "nrmse": nrmse(&case.gold, &recon)?,
        "ssim": ssim(&case.gold, &recon)?,
    });
    std::fs::write(out.join("metrics.json"), serde_json::to_string_pretty(&metrics)? + "\n")?;
    info!("nrmse {} ssim {}", metrics["nrmse"], metrics["ssim"]);
    Ok(())
}
