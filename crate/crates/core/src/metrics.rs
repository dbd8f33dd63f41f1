//! Image quality metrics on magnitude images.

use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::ComplexImage;

/// Denominator convention for NRMSE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NrmseNorm {
    /// `max|ref| - min|ref|`
    #[default]
    Range,
    /// RMS of `|ref|`
    L2,
}

impl NrmseNorm {
    pub fn as_str(self) -> &'static str {
        match self {
            NrmseNorm::Range => "range",
            NrmseNorm::L2 => "l2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub nrmse: f64,
    pub ssim: f64,
    pub case_id: usize,
    pub variant: String,
}

impl MetricReport {
    pub fn compute(reference: &ComplexImage, estimate: &ComplexImage, norm: NrmseNorm, case_id: usize, variant: &str) -> Result<Self> {
        Ok(Self {
            nrmse: nrmse_with(reference, estimate, norm)?,
            ssim: ssim(reference, estimate)?,
            case_id,
            variant: variant.to_string(),
        })
    }
}

fn magnitudes(reference: &ComplexImage, estimate: &ComplexImage) -> Result<(Array2<f64>, Array2<f64>)> {
    if reference.shape() != estimate.shape() {
        return Err(Error::invalid_input(format!(
            "metric shapes differ: {:?} vs {:?}",
            reference.shape(),
            estimate.shape()
        )));
    }
    Ok((reference.magnitude(), estimate.magnitude()))
}

fn range(a: &Array2<f64>) -> f64 {
    let (lo, hi) = a.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// Range-normalised NRMSE.
pub fn nrmse(reference: &ComplexImage, estimate: &ComplexImage) -> Result<f64> {
    nrmse_with(reference, estimate, NrmseNorm::Range)
}

pub fn nrmse_with(reference: &ComplexImage, estimate: &ComplexImage, norm: NrmseNorm) -> Result<f64> {
    let (r, e) = magnitudes(reference, estimate)?;
    let n = r.len() as f64;
    let denom = match norm {
        NrmseNorm::Range => range(&r),
        NrmseNorm::L2 => (r.iter().map(|v| v * v).sum::<f64>() / n).sqrt(),
    };
    if !(denom > 0.0) {
        return Err(Error::UndefinedMetric(format!("reference has zero {}", norm.as_str())));
    }
    let mse = Zip::from(&r).and(&e).fold(0.0, |acc, a, b| acc + (b - a) * (b - a)) / n;
    Ok(mse.sqrt() / denom)
}

const WIN: usize = 11;
const SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

fn gaussian_window() -> [f64; WIN] {
    let mut w = [0.0; WIN];
    let c = (WIN / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Separable weighted mean over every fully contained window.
fn filter_valid(x: &Array2<f64>, w: &[f64; WIN]) -> Array2<f64> {
    let (h, wd) = x.dim();
    let (oh, ow) = (h + 1 - WIN, wd + 1 - WIN);
    let mut tmp = Array2::<f64>::zeros((h, ow));
    for i in 0..h {
        for j in 0..ow {
            tmp[[i, j]] = (0..WIN).map(|k| w[k] * x[[i, j + k]]).sum::<f64>();
        }
    }
    let mut out = Array2::<f64>::zeros((oh, ow));
    for i in 0..oh {
        for j in 0..ow {
            out[[i, j]] = (0..WIN).map(|k| w[k] * tmp[[i + k, j]]).sum::<f64>();
        }
    }
    out
}

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03 and dynamic range taken from the reference. Only windows fully
/// inside the image contribute.
pub fn ssim(reference: &ComplexImage, estimate: &ComplexImage) -> Result<f64> {
    let (r, e) = magnitudes(reference, estimate)?;
    let (h, w) = r.dim();
    if h < WIN || w < WIN {
        return Err(Error::invalid_input(format!("SSIM needs at least {WIN}x{WIN} images, got {h}x{w}")));
    }
    let l = range(&r);
    if !(l > 0.0) {
        return Err(Error::UndefinedMetric("reference has zero dynamic range".into()));
    }
    let c1 = (K1 * l).powi(2);
    let c2 = (K2 * l).powi(2);
    let win = gaussian_window();
    let mu_r = filter_valid(&r, &win);
    let mu_e = filter_valid(&e, &win);
    let second = |a: &Array2<f64>, b: &Array2<f64>, ma: &Array2<f64>, mb: &Array2<f64>| {
        let mut m = filter_valid(&(a * b), &win);
        Zip::from(&mut m).and(ma).and(mb).for_each(|v, &x, &y| *v -= x * y);
        m
    };
    let s_rr = second(&r, &r, &mu_r, &mu_r);
    let s_ee = second(&e, &e, &mu_e, &mu_e);
    let s_re = second(&r, &e, &mu_r, &mu_e);
    let mut total = 0.0;
    Zip::from(&mu_r).and(&mu_e).and(&s_rr).and(&s_ee).and(&s_re).for_each(|&mr, &me, &vr, &ve, &cv| {
        let num = (2.0 * mr * me + c1) * (2.0 * cv + c2);
        let den = (mr * mr + me * me + c1) * (vr + ve + c2);
        total += num / den;
    });
    Ok(total / mu_r.len() as f64)
}
