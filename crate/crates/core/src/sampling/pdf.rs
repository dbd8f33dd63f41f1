use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{center_offset, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Uniform,
    WeakVd,
    StrongVd,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Uniform => "uniform",
            SchemeKind::WeakVd => "weak_vd",
            SchemeKind::StrongVd => "strong_vd",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SchemeKind::Uniform),
            "weak_vd" => Ok(SchemeKind::WeakVd),
            "strong_vd" => Ok(SchemeKind::StrongVd),
            other => Err(Error::invalid_argument(format!("unknown sampling scheme '{other}'"))),
        }
    }
}

/// A density family `f(r) = (1 - r)^p`, or a flat density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingScheme {
    pub kind: SchemeKind,
    pub power: u32,
}

impl SamplingScheme {
    pub const WEAK_VD_POWER: u32 = 7;

    pub fn uniform() -> Self {
        Self { kind: SchemeKind::Uniform, power: 0 }
    }

    pub fn weak_vd() -> Self {
        Self { kind: SchemeKind::WeakVd, power: Self::WEAK_VD_POWER }
    }

    /// Strong VD with the power keyed to the acceleration: R = 2, 3, 4 map to
    /// p = 1, 2, 3. Other accelerations clamp into that range.
    pub fn strong_vd_for(acceleration: f64) -> Self {
        let p = (acceleration.round() as i64 - 1).clamp(1, 3) as u32;
        Self { kind: SchemeKind::StrongVd, power: p }
    }

    /// Default scheme of `kind` at acceleration `r`.
    pub fn for_kind(kind: SchemeKind, acceleration: f64) -> Self {
        match kind {
            SchemeKind::Uniform => Self::uniform(),
            SchemeKind::WeakVd => Self::weak_vd(),
            SchemeKind::StrongVd => Self::strong_vd_for(acceleration),
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            SchemeKind::Uniform => "uniform".to_string(),
            k => format!("{k}_p{}", self.power),
        }
    }
}

/// Per-pixel sampling probabilities with a forced-ones calibration block.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPdf {
    prob: Array2<f64>,
    target_rate: f64,
    calib_shape: Shape,
}

impl SamplingPdf {
    /// Wraps an explicit probability map. The calibration block is forced to 1.
    pub fn from_probabilities(mut prob: Array2<f64>, calib_shape: Shape) -> Result<Self> {
        let shape = prob.dim();
        check_calib(shape, calib_shape)?;
        if prob.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid_input("probabilities must lie in [0, 1]"));
        }
        let (oi, oj) = center_offset(shape, calib_shape);
        prob.slice_mut(ndarray::s![oi..oi + calib_shape.0, oj..oj + calib_shape.1]).fill(1.0);
        let target_rate = prob.mean().unwrap_or(0.0);
        Ok(Self { prob, target_rate, calib_shape })
    }

    pub fn prob(&self) -> &Array2<f64> {
        &self.prob
    }

    pub fn shape(&self) -> Shape {
        self.prob.dim()
    }

    pub fn target_rate(&self) -> f64 {
        self.target_rate
    }

    pub fn calib_shape(&self) -> Shape {
        self.calib_shape
    }

    pub fn in_calibration(&self, i: usize, j: usize) -> bool {
        let (oi, oj) = center_offset(self.shape(), self.calib_shape);
        (oi..oi + self.calib_shape.0).contains(&i) && (oj..oj + self.calib_shape.1).contains(&j)
    }
}

fn check_calib(shape: Shape, calib: Shape) -> Result<()> {
    if calib.0 > shape.0 || calib.1 > shape.1 {
        return Err(Error::invalid_argument(format!(
            "calibration block {calib:?} does not fit in {shape:?}"
        )));
    }
    Ok(())
}

/// Normalised radius: per-axis coordinates mapped to [-1, 1] around the
/// centered origin, Euclidean distance clipped at 1.
pub(crate) fn radius(shape: Shape, i: usize, j: usize) -> f64 {
    let y = (i as f64 - (shape.0 / 2) as f64) / (shape.0 as f64 / 2.0);
    let x = (j as f64 - (shape.1 / 2) as f64) / (shape.1 as f64 / 2.0);
    (x * x + y * y).sqrt().min(1.0)
}

/// Builds a sampling density whose mean equals `target_rate`.
///
/// Outside the calibration block the density is `clip(f(r) + c, 0, 1)` with
/// the scalar offset `c` found by bisection; the block itself is 1.
pub fn build_pdf(shape: Shape, scheme: SamplingScheme, target_rate: f64, calib_shape: Shape) -> Result<SamplingPdf> {
    if !(target_rate > 0.0 && target_rate <= 1.0) {
        return Err(Error::invalid_argument(format!("target rate must be in (0, 1], got {target_rate}")));
    }
    if shape.0 == 0 || shape.1 == 0 {
        return Err(Error::invalid_argument("pdf shape must be non-empty"));
    }
    check_calib(shape, calib_shape)?;
    let total = (shape.0 * shape.1) as f64;
    let n_calib = (calib_shape.0 * calib_shape.1) as f64;
    let floor = n_calib / total;
    if target_rate < floor {
        return Err(Error::InfeasibleRate { target: target_rate, floor });
    }

    let base = Array2::from_shape_fn(shape, |(i, j)| match scheme.kind {
        SchemeKind::Uniform => target_rate,
        _ => (1.0 - radius(shape, i, j)).powi(scheme.power as i32),
    });
    let (oi, oj) = center_offset(shape, calib_shape);
    let in_calib = |i: usize, j: usize| {
        (oi..oi + calib_shape.0).contains(&i) && (oj..oj + calib_shape.1).contains(&j)
    };
    let free: Vec<f64> = base
        .indexed_iter()
        .filter(|((i, j), _)| !in_calib(*i, *j))
        .map(|(_, &v)| v)
        .collect();
    let mean_with = |c: f64| (n_calib + free.iter().map(|v| (v + c).clamp(0.0, 1.0)).sum::<f64>()) / total;

    let offset = if (mean_with(0.0) - target_rate).abs() < 1e-15 {
        0.0
    } else {
        let (mut lo, mut hi) = (-1.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mean_with(mid) > target_rate {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let prob = Array2::from_shape_fn(shape, |(i, j)| {
        if in_calib(i, j) {
            1.0
        } else {
            (base[[i, j]] + offset).clamp(0.0, 1.0)
        }
    });
    Ok(SamplingPdf { prob, target_rate, calib_shape })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_without_calibration_is_constant() {
        let pdf = build_pdf((32, 40), SamplingScheme::uniform(), 0.17, (0, 0)).unwrap();
        assert!(pdf.prob().iter().all(|p| (p - 0.17).abs() < 1e-12));
    }

    #[test]
    fn mean_hits_target_for_every_scheme() {
        for scheme in [SamplingScheme::uniform(), SamplingScheme::weak_vd(), SamplingScheme::strong_vd_for(4.0)] {
            for (shape, calib) in [((64, 64), (6, 6)), ((80, 46), (12, 7)), ((33, 17), (3, 2))] {
                for rate in [0.1, 0.17, 0.25, 0.5] {
                    let pdf = build_pdf(shape, scheme, rate, calib).unwrap();
                    let m = pdf.prob().mean().unwrap();
                    assert!((m - rate).abs() <= 1e-4, "{scheme:?} {shape:?} {rate}: {m}");
                    assert!(pdf.prob().iter().all(|p| (0.0..=1.0).contains(p)));
                }
            }
        }
    }

    #[test]
    fn weak_vd_profile_on_320() {
        let shape = (320, 320);
        let pdf = build_pdf(shape, SamplingScheme::weak_vd(), 0.17, (6, 6)).unwrap();
        let p = pdf.prob();
        assert_eq!(p[[160, 160]], 1.0);
        // the corner carries only the additive floor
        let corner = p[[0, 0]];
        assert!(p.iter().all(|&v| v >= corner));
        assert!(corner < 0.17);

        // outside the calibration block probability never increases with radius
        let mut pts: Vec<(f64, f64)> = p
            .indexed_iter()
            .filter(|((i, j), _)| !pdf.in_calibration(*i, *j))
            .map(|((i, j), &v)| (radius(shape, i, j), v))
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in pts.windows(2) {
            if w[1].0 > w[0].0 {
                assert!(w[1].1 <= w[0].1 + 1e-15);
            }
        }
        // ring means (integer pixel radius) are non-increasing as well
        let mut rings = vec![(0.0, 0usize); 230];
        for ((i, j), &v) in p.indexed_iter() {
            let r = (((i as f64 - 160.0).powi(2) + (j as f64 - 160.0).powi(2)).sqrt()) as usize;
            rings[r].0 += v;
            rings[r].1 += 1;
        }
        let means: Vec<f64> = rings.iter().filter(|r| r.1 > 0).map(|r| r.0 / r.1 as f64).collect();
        for w in means.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn infeasible_rate() {
        let err = build_pdf((16, 16), SamplingScheme::weak_vd(), 0.01, (4, 4)).unwrap_err();
        assert!(matches!(err, Error::InfeasibleRate { .. }));
        assert!(build_pdf((16, 16), SamplingScheme::weak_vd(), 0.0, (0, 0)).is_err());
        assert!(build_pdf((16, 16), SamplingScheme::weak_vd(), 0.5, (17, 1)).is_err());
    }

    #[test]
    fn strong_power_keyed_to_acceleration() {
        assert_eq!(SamplingScheme::strong_vd_for(2.0).power, 1);
        assert_eq!(SamplingScheme::strong_vd_for(3.0).power, 2);
        assert_eq!(SamplingScheme::strong_vd_for(4.0).power, 3);
        assert_eq!(SamplingScheme::weak_vd().power, 7);
    }
}
