use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::CrimeKind;
use super::results::{CaseRow, ResultsTable, SummaryRow};
use super::runner::{CalibrationRecord, ExperimentOutcome, StageTiming};
use crate::error::{Error, Result};
use crate::sampling::MaskStatRow;

pub const CASES_CSV: &str = "cases.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const MASK_STATS_CSV: &str = "mask_stats.csv";
pub const CALIBRATION_JSON: &str = "calibration.json";
pub const MANIFEST_JSON: &str = "manifest.json";

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Serde(format!("{other:?}")),
    }
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Serde(e.to_string())
}

pub fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn read_cases_csv(path: &Path) -> Result<Vec<CaseRow>> {
    read_csv(path)
}

/// Run manifest written next to the tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub crime: CrimeKind,
    pub config_hash: String,
    pub seed: u64,
    pub jobs: usize,
    pub nrmse_norm: String,
    pub crimescope_version: String,
    pub stages: Vec<StageTiming>,
    pub total_seconds: f64,
}

impl Manifest {
    pub fn for_outcome(outcome: &ExperimentOutcome) -> Self {
        Self {
            crime: outcome.config.crime,
            config_hash: outcome.config.hash(),
            seed: outcome.config.seed,
            jobs: outcome.jobs,
            nrmse_norm: outcome.config.metric.as_str().to_string(),
            crimescope_version: env!("CARGO_PKG_VERSION").to_string(),
            stages: outcome.timings.clone(),
            total_seconds: outcome.timings.iter().map(|t| t.seconds).sum(),
        }
    }
}

/// Writes every artifact of a run into `out_dir` (created on demand) and
/// returns the paths written.
pub fn report(outcome: &ExperimentOutcome, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str| {
        let p = out_dir.join(name);
        written.push(p.clone());
        p
    };
    if outcome.config.crime == CrimeKind::MaskStats {
        if outcome.mask_stats.is_empty() {
            return Err(Error::invalid_argument("nothing to report"));
        }
        write_csv(&outcome.mask_stats, &put(MASK_STATS_CSV))?;
        fs::write(put("effective_rate.svg"), mask_stats_svg(&outcome.mask_stats))?;
    } else {
        if outcome.cases.is_empty() {
            return Err(Error::invalid_argument("nothing to report"));
        }
        write_csv(&outcome.cases, &put(CASES_CSV))?;
        write_tables(&outcome.table, &outcome.calibrations, &mut put)?;
    }
    let manifest = serde_json::to_string_pretty(&Manifest::for_outcome(outcome)).map_err(json_err)?;
    fs::write(put(MANIFEST_JSON), manifest)?;
    Ok(written)
}

fn write_tables(table: &ResultsTable, calibrations: &[CalibrationRecord], put: &mut impl FnMut(&str) -> PathBuf) -> Result<()> {
    write_csv(&table.rows, &put(SUMMARY_CSV))?;
    fs::write(put("nrmse.svg"), metric_svg(table, "NRMSE", |r| (r.mean_nrmse, r.std_nrmse)))?;
    fs::write(put("ssim.svg"), metric_svg(table, "SSIM", |r| (r.mean_ssim, r.std_ssim)))?;
    fs::write(put("oracle_nrmse.svg"), metric_svg(table, "oracle NRMSE", |r| (r.mean_oracle_nrmse, r.std_oracle_nrmse)))?;
    if !calibrations.is_empty() {
        fs::write(put(CALIBRATION_JSON), serde_json::to_string_pretty(calibrations).map_err(json_err)?)?;
    }
    Ok(())
}

/// Rebuilds the summary table and plots of an earlier run from its
/// `cases.csv` (and `calibration.json`, when present).
pub fn report_from_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let cases = read_cases_csv(&dir.join(CASES_CSV))?;
    if cases.is_empty() {
        return Err(Error::invalid_input(format!("{} has no rows", dir.join(CASES_CSV).display())));
    }
    let calib_path = dir.join(CALIBRATION_JSON);
    let calibrations: Vec<CalibrationRecord> = if calib_path.exists() {
        serde_json::from_str(&fs::read_to_string(&calib_path)?).map_err(json_err)?
    } else {
        Vec::new()
    };
    let metric = fs::read_to_string(dir.join(MANIFEST_JSON))
        .ok()
        .and_then(|m| serde_json::from_str::<Manifest>(&m).ok())
        .and_then(|m| serde_json::from_value(serde_json::Value::String(m.nrmse_norm)).ok())
        .unwrap_or_default();
    let table = ResultsTable::from_cases(&cases, metric, |variant, solver, r| {
        calibrations
            .iter()
            .find(|c| c.variant == variant && c.solver == solver && c.acceleration == r)
            .map(|c| c.chosen.describe())
            .unwrap_or_default()
    });
    let mut written = Vec::new();
    let mut put = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };
    write_tables(&table, &[], &mut put)?;
    Ok(written)
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Series {
    name: String,
    /// (x, mean, std)
    points: Vec<(f64, f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line plot with one polyline and whiskers per series.
fn line_plot(title: &str, x_label: &str, y_label: &str, x_ticks: &[(f64, String)], series: &[Series]) -> String {
    let xs = x_ticks.iter().map(|t| t.0).chain(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let ys = series.iter().flat_map(|s| s.points.iter().flat_map(|p| [p.1 - p.2, p.1 + p.2]));
    let (mut y0, mut y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !(y1 > y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let span_x = if x1 > x0 { x1 - x0 } else { 1.0 };
    let px = |x: f64| MARGIN + (x - x0) / span_x * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{b}" stroke="black"/>"#,
        b = H - MARGIN,
        r = W - MARGIN
    );
    for (x, label) in x_ticks {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#, px(*x), H - MARGIN + 18.0, escape(label));
    }
    for k in 0..=4 {
        let y = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{:.4}</text>"#, MARGIN - 6.0, py(y) + 4.0, y);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, H - 16.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let pts: Vec<String> = ser.points.iter().map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        for p in &ser.points {
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{colour}"/>"#,
                py(p.1 - p.2),
                py(p.1 + p.2),
                x = px(p.0)
            );
        }
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{ly:.2}" font-size="12" fill="{colour}">{}</text>"#,
            W - MARGIN - 150.0,
            escape(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn metric_svg(table: &ResultsTable, metric: &str, get: fn(&SummaryRow) -> (f64, f64)) -> String {
    let mut variants: Vec<&str> = Vec::new();
    for r in &table.rows {
        if !variants.contains(&r.variant.as_str()) {
            variants.push(&r.variant);
        }
    }
    let ticks: Vec<(f64, String)> = variants.iter().enumerate().map(|(i, v)| (i as f64, v.to_string())).collect();
    let series: Vec<Series> = table
        .series_keys()
        .into_iter()
        .map(|(solver, scheme, r)| Series {
            name: format!("{solver} {scheme} R={r}"),
            points: table
                .series(&solver, &scheme, r)
                .into_iter()
                .map(|row| {
                    let (m, sd) = get(row);
                    (variants.iter().position(|v| *v == row.variant).unwrap_or(0) as f64, m, sd)
                })
                .collect(),
        })
        .collect();
    let x_label = match table.crime {
        CrimeKind::Jpeg => "JPEG quality",
        _ => "zero-padding factor",
    };
    line_plot(&format!("{metric} (mean +/- std)"), x_label, metric, &ticks, &series)
}

fn mask_stats_svg(rows: &[MaskStatRow]) -> String {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.scheme.as_str()) {
            names.push(&r.scheme);
        }
    }
    let series: Vec<Series> = names
        .iter()
        .map(|n| Series {
            name: n.to_string(),
            points: rows.iter().filter(|r| r.scheme == *n).map(|r| (r.padding, r.mean_effective, r.std_effective)).collect(),
        })
        .collect();
    let mut ticks: Vec<(f64, String)> = rows.iter().map(|r| (r.padding, r.padding.to_string())).collect();
    ticks.sort_by(|a, b| a.0.total_cmp(&b.0));
    ticks.dedup_by(|a, b| a.0 == b.0);
    line_plot("Effective sampling rate", "zero-padding factor", "effective rate", &ticks, &series)
}
