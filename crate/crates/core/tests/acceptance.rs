//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 4 9`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use crimescope::harness::{
    mask_seed_for, monotone_chain, read_cases_csv, read_csv, CaseRow, Direction, ExperimentConfig, SummaryRow,
};
use crimescope::imaging::{dft2_centered, idft2_centered, ComplexImage, KSpace};
use crimescope::metrics::nrmse;
use crimescope::pipelines::jpeg::{quantization_table, quantize_block, STD_LUMINANCE_TABLE};
use crimescope::pipelines::{phantom, scanner_pipeline, PhantomSpec};
use crimescope::sampling::{MaskStatRow, SamplingMask};
use crimescope::solvers::{
    cs_fista, dictl_reconstruct, dictl_x_update, ksvd_update, omp, CsParams, DictlParams, Dictionary,
};
use crimescope::transforms::{dwt2, extract_patches, idwt2, reassemble_patches, soft_threshold, Wavelet};
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_grid(shape: (usize, usize), rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    Array2::from_shape_fn(shape, |_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn rel(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    let num: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|v| v.norm_sqr()).sum();
    (num / den).sqrt()
}

fn within(elapsed: Duration, limit_s: f64) -> Outcome {
    ensure!(elapsed.as_secs_f64() < limit_s, "took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64());
    Ok(String::new())
}

// ---------------------------------------------------------------- 1

fn naive_centered_dft(x: &Array2<Complex64>) -> Array2<Complex64> {
    let (h, w) = x.dim();
    let (ch, cw) = ((h / 2) as f64, (w / 2) as f64);
    let scale = 1.0 / ((h * w) as f64).sqrt();
    Array2::from_shape_fn((h, w), |(k, l)| {
        let mut acc = c(0.0, 0.0);
        for ((n, m), v) in x.indexed_iter() {
            let phase = -2.0
                * std::f64::consts::PI
                * ((k as f64 - ch) * (n as f64 - ch) / h as f64 + (l as f64 - cw) * (m as f64 - cw) / w as f64);
            acc += v * Complex64::from_polar(1.0, phase);
        }
        acc * scale
    })
}

fn transform_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_rt: f64 = 0.0;
    let mut worst_parseval: f64 = 0.0;
    for shape in [(16, 16), (17, 9), (64, 48), (128, 128), (33, 80)] {
        let x = random_grid(shape, &mut rng);
        let k = dft2_centered(&ComplexImage::new(x.clone()).unwrap()).unwrap();
        let back = idft2_centered(&k).unwrap();
        worst_rt = worst_rt.max(rel(back.data(), &x));
        let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        worst_parseval = worst_parseval.max(((k.norm().powi(2) - ex) / ex).abs());
        let kk = KSpace::new(x.clone()).unwrap();
        let img = idft2_centered(&kk).unwrap();
        worst_rt = worst_rt.max(rel(dft2_centered(&img).unwrap().data(), &x));
    }
    ensure!(worst_rt < 1e-12, "DFT round trip error {worst_rt:e}");
    ensure!(worst_parseval < 1e-12, "Parseval error {worst_parseval:e}");

    let x = random_grid((16, 16), &mut rng);
    let fast = dft2_centered(&ComplexImage::new(x.clone()).unwrap()).unwrap();
    let oracle_err = rel(fast.data(), &naive_centered_dft(&x));
    ensure!(oracle_err < 1e-10, "naive DFT disagreement {oracle_err:e}");

    let mut worst_wav: f64 = 0.0;
    for wavelet in [Wavelet::Haar, Wavelet::Db4] {
        for (shape, levels) in [((64, 64), 4), ((128, 96), 3), ((32, 32), 1)] {
            let x = random_grid(shape, &mut rng);
            let back = idwt2(&dwt2(&x, wavelet, levels).unwrap()).unwrap();
            worst_wav = worst_wav.max(rel(&back, &x));
        }
    }
    ensure!(worst_wav < 1e-10, "wavelet reconstruction error {worst_wav:e}");

    let mut worst_patch: f64 = 0.0;
    for (shape, b, s) in [((32, 32), 8, 1), ((40, 36), 8, 2), ((21, 19), 4, 3), ((16, 16), 16, 1)] {
        let x = random_grid(shape, &mut rng);
        let back = reassemble_patches(&extract_patches(&x, b, s).unwrap(), shape).unwrap();
        worst_patch = worst_patch.max(rel(&back, &x));
    }
    ensure!(worst_patch < 1e-12, "patch round trip error {worst_patch:e}");
    within(start.elapsed(), 5.0)?;
    Ok(format!(
        "dft {worst_rt:.1e}, parseval {worst_parseval:.1e}, naive {oracle_err:.1e}, wavelet {worst_wav:.1e}, patches {worst_patch:.1e}"
    ))
}

// ---------------------------------------------------------------- 2

fn ls_residual(d: &Array2<Complex64>, support: &[usize], s: &Array1<Complex64>) -> f64 {
    let g = |i: usize, j: usize| -> Complex64 { d.column(i).iter().zip(d.column(j)).map(|(a, b)| a.conj() * b).sum() };
    let r = |i: usize| -> Complex64 { d.column(i).iter().zip(s.iter()).map(|(a, b)| a.conj() * b).sum() };
    let coef = match support {
        [i] => vec![r(*i) / g(*i, *i)],
        [i, j] => {
            let det = g(*i, *i) * g(*j, *j) - g(*i, *j) * g(*j, *i);
            vec![(r(*i) * g(*j, *j) - g(*i, *j) * r(*j)) / det, (g(*i, *i) * r(*j) - g(*j, *i) * r(*i)) / det]
        }
        _ => unreachable!(),
    };
    let mut res = s.clone();
    for (&i, a) in support.iter().zip(&coef) {
        res.zip_mut_with(&d.column(i), |v, x| *v -= x * a);
    }
    res.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn solver_sub_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);

    // soft threshold vs a dense grid search of the prox objective
    let step = 2.5e-3;
    let mut worst_prox: f64 = 0.0;
    for _ in 0..20 {
        let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let tau = rng.gen_range(0.0..1.5);
        let got = soft_threshold(&[z], tau).unwrap()[0];
        let obj = |x: Complex64| 0.5 * (x - z).norm_sqr() + tau * x.norm();
        let mut best = (f64::INFINITY, c(0.0, 0.0));
        for a in -1000..=1000 {
            for b in -1000..=1000 {
                let x = c(a as f64 * step, b as f64 * step);
                let v = obj(x);
                if v < best.0 {
                    best = (v, x);
                }
            }
        }
        ensure!(obj(got) <= best.0 + 1e-12, "prox objective above grid minimum for z={z}, tau={tau}");
        worst_prox = worst_prox.max((got - best.1).norm());
    }
    ensure!(worst_prox <= 2.0 * step, "prox minimiser off the grid optimum by {worst_prox:e}");

    // OMP vs exhaustive supports, n=16, P=8, K<=2, 100 signals
    let dict = Dictionary::new(random_grid((16, 8), &mut rng)).unwrap();
    let d = dict.atoms().clone();
    let signals = random_grid((16, 100), &mut rng);
    let mut matches = [0usize; 2];
    let mut worst_ratio: f64 = 0.0;
    for k in 1..=2 {
        let code = omp(&dict, &signals, k).unwrap();
        ensure!(code.max_support() <= k, "omp support exceeds K={k}");
        let recon = code.synthesize(&dict);
        for col in 0..100 {
            let s = signals.column(col).to_owned();
            let got = (&s - &recon.column(col)).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let supports: Vec<Vec<usize>> = if k == 1 {
                (0..8).map(|i| vec![i]).collect()
            } else {
                (0..8).flat_map(|i| (i + 1..8).map(move |j| vec![i, j])).collect()
            };
            let (best, best_support) = supports
                .iter()
                .map(|sup| (ls_residual(&d, sup, &s), sup.clone()))
                .fold((f64::INFINITY, vec![]), |acc, x| if x.0 < acc.0 { x } else { acc });
            ensure!(got >= best - 1e-10, "omp residual below the exhaustive optimum");
            ensure!(got <= 10.0 * best, "omp residual {got} more than 10x the optimum {best}");
            if k == 1 {
                ensure!((got - best).abs() < 1e-10, "K=1 omp is not optimal");
            }
            worst_ratio = worst_ratio.max(got / best);
            let support: Vec<usize> = (0..8).filter(|&i| code.codes[[i, col]].norm_sqr() > 0.0).collect();
            if support == best_support {
                matches[k - 1] += 1;
            }
        }
    }

    // K-SVD: Frobenius error never increases across a sweep
    let mut dict = Dictionary::overcomplete_dct(4, 32).unwrap();
    let train = random_grid((16, 400), &mut rng);
    let mut sweeps = 0;
    for _ in 0..10 {
        let code = omp(&dict, &train, 3).unwrap();
        let before = rel(&code.synthesize(&dict), &train);
        let (d2, c2) = ksvd_update(&dict, &code, &train).unwrap();
        let after = rel(&c2.synthesize(&d2), &train);
        ensure!(after * train.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
            <= before * train.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() + 1e-10,
            "k-svd sweep increased the error {before} -> {after}");
        dict = d2;
        sweeps += 1;
    }

    // DictL x-update vs per-frequency scalar minimisation
    let shape = (24, 20);
    let z = ComplexImage::new(random_grid(shape, &mut rng)).unwrap();
    let y = KSpace::new(random_grid(shape, &mut rng)).unwrap();
    let mask = SamplingMask::from_mask(Array2::from_shape_fn(shape, |_| rng.gen_bool(0.4)));
    let lambda = 0.37;
    let x = dictl_x_update(&z, &y, &mask, lambda).unwrap();
    let fx = dft2_centered(&x).unwrap();
    let fz = dft2_centered(&z).unwrap();
    let mut worst_x: f64 = 0.0;
    for ((i, j), &on) in mask.mask().indexed_iter() {
        let (yk, zk) = (y.data()[[i, j]], fz.data()[[i, j]]);
        let m = if on { 1.0 } else { 0.0 };
        // minimise 0.5 m |v - y|^2 + 0.5 lambda |v - z|^2 over v: the
        // objective is a real quadratic in (re, im), solve each by its
        // vanishing derivative independently
        let re = (m * yk.re + lambda * zk.re) / (m + lambda);
        let im = (m * yk.im + lambda * zk.im) / (m + lambda);
        worst_x = worst_x.max((fx.data()[[i, j]] - c(re, im)).norm());
        let f = |v: Complex64| 0.5 * m * (v - yk).norm_sqr() + 0.5 * lambda * (v - zk).norm_sqr();
        for d in [c(1e-4, 0.0), c(0.0, 1e-4), c(-1e-4, 0.0), c(0.0, -1e-4)] {
            ensure!(f(fx.data()[[i, j]]) <= f(fx.data()[[i, j]] + d), "x-update is not a minimiser at ({i}, {j})");
        }
    }
    ensure!(worst_x < 1e-10, "x-update differs from scalar minimiser by {worst_x:e}");
    within(start.elapsed(), 60.0)?;
    Ok(format!(
        "prox {worst_prox:.1e}; omp support matches exhaustive {}/100 (K=1), {}/100 (K=2), worst residual ratio {worst_ratio:.2}; {sweeps} k-svd sweeps monotone; x-update {worst_x:.1e}",
        matches[0], matches[1]
    ))
}

// ---------------------------------------------------------------- 3

fn degenerate_recovery() -> Outcome {
    let start = Instant::now();
    let spec = PhantomSpec { shape: (64, 64), n_coils: 4, ..PhantomSpec::default() };
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let case = scanner_pipeline(&phantom(&spec, seed).unwrap(), 1.0).unwrap();
        let mask = SamplingMask::full(case.shape());
        let y = &case.synth_kspace;
        let cs = cs_fista(y, &mask, &CsParams::with_lambda(1e-12)).unwrap();
        let dl = dictl_reconstruct(
            y,
            &mask,
            &DictlParams { lambda_d: 1e-12, n_iter: 2, ksvd_sweeps: 2, seed, ..DictlParams::default() },
        )
        .unwrap();
        for x in [cs, dl] {
            worst = worst.max(nrmse(&case.gold, &x).unwrap());
        }
    }
    ensure!(worst < 1e-6, "worst nrmse {worst:e}");
    within(start.elapsed(), 60.0)?;
    Ok(format!("worst nrmse {worst:.1e} over 5 phantoms x 2 solvers"))
}

// ---------------------------------------------------------------- experiments

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scratch() -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// Runs the CLI on a repository configuration, returning the output
/// directory and wall time.
fn run_cli(sub: &str, config: &str, out: &str, jobs: usize) -> std::result::Result<(PathBuf, Duration), String> {
    let cfg = repo_root().join("configs").join(config);
    let out = scratch().join(out);
    let _ = fs::remove_dir_all(&out);
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_crimescope"))
        .args([sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", &jobs.to_string()])
        .env("RUST_LOG", "warn")
        .status()
        .map_err(|e| e.to_string())?;
    ensure!(status.success(), "crimescope {sub} exited with {status}");
    Ok((out, start.elapsed()))
}

/// Runtime budgets are stated for 8 workers; on smaller machines they are
/// reported but not enforced.
fn budget(elapsed: Duration, limit_s: f64) -> Outcome {
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let secs = elapsed.as_secs_f64();
    if cores >= 8 {
        ensure!(secs < limit_s, "took {secs:.0}s on {cores} cores, limit {limit_s}s");
        Ok(format!("{secs:.0}s"))
    } else {
        Ok(format!("{secs:.0}s on {cores} core(s), {limit_s:.0}s budget applies to 8 workers"))
    }
}

fn summaries(dir: &Path) -> BTreeMap<(String, String), SummaryRow> {
    let rows: Vec<SummaryRow> = read_csv(&dir.join("summary.csv")).unwrap();
    rows.into_iter().map(|r| ((r.solver.clone(), r.variant.clone()), r)).collect()
}

fn chain(
    rows: &BTreeMap<(String, String), SummaryRow>,
    solver: &str,
    variants: &[String],
    get: fn(&SummaryRow) -> (f64, f64),
    dir: Direction,
) -> std::result::Result<(usize, f64), String> {
    let pts: Vec<(f64, f64, usize)> = variants
        .iter()
        .map(|v| {
            let r = &rows[&(solver.to_string(), v.clone())];
            let (m, s) = get(r);
            (m, s, r.n_cases)
        })
        .collect();
    let check = monotone_chain(&pts, dir, 1, 0.5);
    let means: Vec<String> = pts.iter().map(|p| format!("{:.4}", p.0)).collect();
    ensure!(
        check.passed,
        "{solver} chain [{}] has {} violation(s), worst {:.2} SE",
        means.join(", "),
        check.violations,
        check.worst
    );
    Ok((check.violations, check.worst))
}

fn nrmse_of(r: &SummaryRow) -> (f64, f64) {
    (r.mean_nrmse, r.std_nrmse)
}
fn ssim_of(r: &SummaryRow) -> (f64, f64) {
    (r.mean_ssim, r.std_ssim)
}

// ---------------------------------------------------------------- 4

fn effective_rates() -> Outcome {
    let (dir, elapsed) = run_cli("mask-stats", "acceptance/mask_stats.toml", "mask_stats", 8)?;
    let rows: Vec<MaskStatRow> = read_csv(&dir.join("mask_stats.csv")).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for r in rows.iter().filter(|r| r.scheme == "uniform") {
        let gap = (r.mean_effective - r.target_rate).abs();
        ensure!(gap < 0.01, "uniform at padding {}: effective {:.4} vs global {}", r.padding, r.mean_effective, r.target_rate);
    }
    let weak2 = rows
        .iter()
        .find(|r| r.scheme.starts_with("weak_vd") && r.padding == 2.0)
        .ok_or("no weak-VD row at padding 2")?;
    ensure!(weak2.n_masks >= 15, "only {} masks", weak2.n_masks);
    ensure!(
        (0.19..=0.30).contains(&weak2.mean_effective),
        "weak VD at 2x padding: effective {:.4} outside [0.19, 0.30]",
        weak2.mean_effective
    );
    detail.push(format!("weak VD 2x {:.3}", weak2.mean_effective));
    for scheme in ["weak_vd", "strong_vd"] {
        let series: Vec<&MaskStatRow> = rows.iter().filter(|r| r.scheme.starts_with(scheme)).collect();
        ensure!(series.len() == 4, "{scheme}: expected paddings 1, 1.5, 2, 3");
        for w in series.windows(2) {
            ensure!(
                w[1].mean_effective > w[0].mean_effective,
                "{scheme}: effective rate {:.4} at {} not above {:.4} at {}",
                w[1].mean_effective,
                w[1].padding,
                w[0].mean_effective,
                w[0].padding
            );
        }
        let vals: Vec<String> = series.iter().map(|r| format!("{:.3}", r.mean_effective)).collect();
        detail.push(format!("{scheme} [{}]", vals.join(", ")));
    }
    within(elapsed, 30.0)?;
    Ok(format!("{}; {:.1}s", detail.join("; "), elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------- 5 and 8

fn crime1_variants() -> Vec<String> {
    let cfg = ExperimentConfig::from_file(&repo_root().join("configs/acceptance/crime1.toml")).unwrap();
    cfg.variant_labels()
}

fn crime1_bias(dir: &Path, elapsed: Duration) -> Outcome {
    let rows = summaries(dir);
    let variants = crime1_variants();
    let (first, last) = (variants.first().unwrap().clone(), variants.last().unwrap().clone());
    ensure!(first == "1" && last == "2", "variants must run from 1 to 2, got {variants:?}");
    let mut detail = Vec::new();
    for solver in ["cs", "dictl"] {
        let a = &rows[&(solver.to_string(), first.clone())];
        let b = &rows[&(solver.to_string(), last.clone())];
        ensure!(a.n_cases == 20 && b.n_cases == 20, "{solver}: expected 20 test cases");
        let gain = 1.0 - b.mean_nrmse / a.mean_nrmse;
        ensure!(
            gain >= 0.15,
            "{solver}: nrmse {:.4} -> {:.4} improves {:.1}%, need 15%",
            a.mean_nrmse,
            b.mean_nrmse,
            100.0 * gain
        );
        ensure!(b.mean_ssim > a.mean_ssim, "{solver}: ssim {:.4} -> {:.4} did not increase", a.mean_ssim, b.mean_ssim);
        let (vn, wn) = chain(&rows, solver, &variants, nrmse_of, Direction::NonIncreasing)?;
        let (vs, ws) = chain(&rows, solver, &variants, ssim_of, Direction::NonDecreasing)?;
        detail.push(format!(
            "{solver} nrmse {:.4}->{:.4} (-{:.0}%), ssim {:.3}->{:.3}, chain violations nrmse {vn} ({wn:.2} SE) ssim {vs} ({ws:.2} SE)",
            a.mean_nrmse,
            b.mean_nrmse,
            100.0 * gain,
            a.mean_ssim,
            b.mean_ssim
        ));
    }
    detail.push(budget(elapsed, 1800.0)?);
    Ok(detail.join("; "))
}

fn determinism(a: &Path, b: &Path) -> Outcome {
    let mut checked = Vec::new();
    for name in ["cases.csv", "summary.csv"] {
        let x = fs::read(a.join(name)).map_err(|e| e.to_string())?;
        let y = fs::read(b.join(name)).map_err(|e| e.to_string())?;
        ensure!(x == y, "{name} differs between --jobs 8 and --jobs 1");
        checked.push(format!("{name} {} bytes", x.len()));
    }
    let cases: Vec<CaseRow> = read_cases_csv(&a.join("cases.csv")).map_err(|e| e.to_string())?;
    // masks are keyed by case id only, never by worker or order
    let cfg = ExperimentConfig::from_file(&repo_root().join("configs/acceptance/crime1.toml")).unwrap();
    ensure!(
        cases.iter().all(|r| r.seed == mask_seed_for(cfg.seed, r.case_id, 0)),
        "mask seeds do not follow the case id"
    );
    Ok(format!("identical {}", checked.join(", ")))
}

// ---------------------------------------------------------------- 6 and 7

fn crime2_bias(dir: &Path, elapsed: Duration) -> Outcome {
    let rows = summaries(dir);
    let variants: Vec<String> = ["NC", "75", "50", "20"].iter().map(|s| s.to_string()).collect();
    let mut detail = Vec::new();
    for (solver, need) in [("cs", 0.15), ("dictl", 0.08)] {
        let means: Vec<f64> = variants.iter().map(|v| rows[&(solver.to_string(), v.clone())].mean_nrmse).collect();
        ensure!(
            variants.iter().all(|v| rows[&(solver.to_string(), v.clone())].n_cases == 20),
            "{solver}: expected 20 test cases"
        );
        let shown: Vec<String> = means.iter().map(|m| format!("{m:.4}")).collect();
        ensure!(means.windows(2).all(|w| w[1] < w[0]), "{solver}: nrmse not decreasing [{}]", shown.join(", "));
        let gain = 1.0 - means[3] / means[0];
        ensure!(
            gain >= need,
            "{solver}: NC->20 improves {:.1}%, need {:.0}% [{}]",
            100.0 * gain,
            100.0 * need,
            shown.join(", ")
        );
        detail.push(format!("{solver} [{}] -{:.0}%", shown.join(", "), 100.0 * gain));
    }
    detail.push(budget(elapsed, 1800.0)?);
    Ok(detail.join("; "))
}

fn metric_blindness(dir: &Path) -> Outcome {
    let rows = summaries(dir);
    let mut detail = Vec::new();
    for solver in ["cs", "dictl"] {
        let nc = &rows[&(solver.to_string(), "NC".to_string())];
        let q20 = &rows[&(solver.to_string(), "20".to_string())];
        ensure!(
            q20.mean_oracle_nrmse >= nc.mean_oracle_nrmse,
            "{solver}: oracle nrmse improved {:.4} -> {:.4}",
            nc.mean_oracle_nrmse,
            q20.mean_oracle_nrmse
        );
        detail.push(format!("{solver} oracle {:.4} -> {:.4}", nc.mean_oracle_nrmse, q20.mean_oracle_nrmse));
    }
    Ok(detail.join("; "))
}

// ---------------------------------------------------------------- 9

fn naive_quantise(block: &[u8; 64], table: &[u16; 64]) -> [i32; 64] {
    std::array::from_fn(|k| {
        let (u, v) = (k / 8, k % 8);
        let cu = if u == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
        let cv = if v == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
        let mut acc = 0.0;
        for x in 0..8 {
            for y in 0..8 {
                acc += (block[x * 8 + y] as f64 - 128.0)
                    * ((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos()
                    * ((2 * y + 1) as f64 * v as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        let q = 0.25 * cu * cv * acc / table[k] as f64;
        // integer input makes exact half-step ties possible
        if (q.abs().fract() - 0.5).abs() < 1e-9 {
            (q.abs().trunc() + 1.0).copysign(q) as i32
        } else {
            q.round() as i32
        }
    })
}

fn jpeg_conformance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    ensure!(quantization_table(50).unwrap() == STD_LUMINANCE_TABLE, "QF-50 table differs from the standard table");
    let mut blocks = 0;
    for qf in [20u8, 50, 75] {
        let scale = if qf < 50 { 5000 / qf as u32 } else { 200 - 2 * qf as u32 };
        let table = quantization_table(qf).unwrap();
        for (k, &t) in table.iter().enumerate() {
            let expect = ((STD_LUMINANCE_TABLE[k] as u32 * scale + 50) / 100).clamp(1, 255) as u16;
            ensure!(t == expect, "QF {qf} table entry {k}: {t} vs {expect}");
        }
        let smooth: [u8; 64] = std::array::from_fn(|k| (100 + (k / 8) * 6 + (k % 8) * 3) as u8);
        let mut cases = vec![smooth, [128u8; 64], [255u8; 64], [0u8; 64]];
        cases.extend((0..200).map(|_| std::array::from_fn(|_| rng.gen::<u8>())));
        for block in &cases {
            ensure!(quantize_block(block, &table) == naive_quantise(block, &table), "QF {qf}: coefficient mismatch");
            blocks += 1;
        }
    }
    Ok(format!("{blocks} blocks exact at QF 20/50/75; QF-50 table is standard"))
}

// ---------------------------------------------------------------- main

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |n: u32| wanted.is_empty() || wanted.contains(&n);
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();

    if want(1) {
        results.push((1, "transform exactness", transform_exactness()));
    }
    if want(2) {
        results.push((2, "solver sub-oracles", solver_sub_oracles()));
    }
    if want(3) {
        results.push((3, "degenerate recovery", degenerate_recovery()));
    }
    if want(4) {
        results.push((4, "effective-rate reproduction", effective_rates()));
    }
    if want(9) {
        results.push((9, "JPEG codec conformance", jpeg_conformance()));
    }
    print_results(&results);

    let mut late: Vec<(u32, &str, Outcome)> = Vec::new();
    if want(5) || want(8) {
        match run_cli("crime1", "acceptance/crime1.toml", "crime1_jobs8", 8) {
            Ok((dir8, elapsed)) => {
                if want(5) {
                    late.push((5, "crime I bias", crime1_bias(&dir8, elapsed)));
                }
                if want(8) {
                    let outcome = run_cli("crime1", "acceptance/crime1.toml", "crime1_jobs1", 1)
                        .and_then(|(dir1, _)| determinism(&dir8, &dir1));
                    late.push((8, "determinism", outcome));
                }
            }
            Err(e) => {
                for (n, name) in [(5, "crime I bias"), (8, "determinism")] {
                    if want(n) {
                        late.push((n, name, Err(e.clone())));
                    }
                }
            }
        }
    }
    if want(6) || want(7) {
        match run_cli("crime2", "acceptance/crime2.toml", "crime2", 8) {
            Ok((dir, elapsed)) => {
                if want(6) {
                    late.push((6, "crime II bias", crime2_bias(&dir, elapsed)));
                }
                if want(7) {
                    late.push((7, "metric-blindness falsifier", metric_blindness(&dir)));
                }
            }
            Err(e) => {
                for (n, name) in [(6, "crime II bias"), (7, "metric-blindness falsifier")] {
                    if want(n) {
                        late.push((n, name, Err(e.clone())));
                    }
                }
            }
        }
    }
    print_results(&late);
    results.extend(late);
    results.sort_by_key(|r| r.0);

    println!("\nacceptance summary");
    for (n, name, outcome) in &results {
        println!("criterion {n} {name}: {}", if outcome.is_ok() { "PASS" } else { "FAIL" });
    }
    if results.iter().any(|r| r.2.is_err()) {
        std::process::exit(1);
    }
}

fn print_results(results: &[(u32, &str, Outcome)]) {
    for (n, name, outcome) in results {
        match outcome {
            Ok(detail) => println!("criterion {n} {name}: PASS ({detail})"),
            Err(why) => println!("criterion {n} {name}: FAIL ({why})"),
        }
    }
}
