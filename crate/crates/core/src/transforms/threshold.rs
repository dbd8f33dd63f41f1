use num_complex::Complex64;

use crate::error::{Error, Result};

/// Proximal map of `tau * |.|_1`: shrinks each value's magnitude by `tau`.
pub fn soft_threshold(coeffs: &[Complex64], tau: f64) -> Result<Vec<Complex64>> {
    let mut out = coeffs.to_vec();
    soft_threshold_inplace(&mut out, tau)?;
    Ok(out)
}

pub fn soft_threshold_inplace(coeffs: &mut [Complex64], tau: f64) -> Result<()> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::invalid_argument(format!("threshold must be finite and >= 0, got {tau}")));
    }
    if tau == 0.0 {
        return Ok(());
    }
    for c in coeffs.iter_mut() {
        let mag = c.norm();
        *c = if mag > tau { *c * (1.0 - tau / mag) } else { Complex64::new(0.0, 0.0) };
    }
    Ok(())
}
