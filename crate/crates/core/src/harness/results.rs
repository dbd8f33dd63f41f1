use serde::{Deserialize, Serialize};

use super::config::{CrimeKind, SolverKind};
use crate::metrics::NrmseNorm;
use crate::sampling::mean_std;

/// One reconstructed test case; field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub crime: String,
    pub variant: String,
    pub solver: String,
    pub scheme: String,
    #[serde(rename = "R")]
    pub acceleration: f64,
    pub case_id: usize,
    pub nrmse: f64,
    pub ssim: f64,
    /// NRMSE against the unprocessed (f = 1 or NC) gold.
    pub oracle_nrmse: f64,
    pub effective_rate: f64,
    /// Mask seed.
    pub seed: u64,
}

/// Aggregate over the test cases of one (R, variant, solver, scheme) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variant: String,
    pub solver: String,
    pub scheme: String,
    #[serde(rename = "R")]
    pub acceleration: f64,
    pub mean_nrmse: f64,
    pub std_nrmse: f64,
    pub mean_ssim: f64,
    pub std_ssim: f64,
    pub mean_oracle_nrmse: f64,
    pub std_oracle_nrmse: f64,
    pub mean_effective_rate: f64,
    pub n_cases: usize,
    pub chosen_hyperparams: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub crime: CrimeKind,
    pub metric: NrmseNorm,
    pub rows: Vec<SummaryRow>,
}

impl ResultsTable {
    /// Groups case rows by (R, variant, solver, scheme) in order of first
    /// appearance.
    pub fn from_cases(cases: &[CaseRow], metric: NrmseNorm, hyper: impl Fn(&str, SolverKind, f64) -> String) -> Self {
        let crime = match cases.first().map(|c| c.crime.as_str()) {
            Some("II") => CrimeKind::Jpeg,
            _ => CrimeKind::ZeroPadding,
        };
        let mut keys: Vec<(f64, &str, &str, &str)> = Vec::new();
        for c in cases {
            let k = (c.acceleration, c.variant.as_str(), c.solver.as_str(), c.scheme.as_str());
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        let rows = keys
            .into_iter()
            .map(|(r, variant, solver, scheme)| {
                let group: Vec<&CaseRow> = cases
                    .iter()
                    .filter(|c| c.acceleration == r && c.variant == variant && c.solver == solver && c.scheme == scheme)
                    .collect();
                let stat = |f: fn(&CaseRow) -> f64| mean_std(&group.iter().map(|c| f(c)).collect::<Vec<_>>());
                let (mean_nrmse, std_nrmse) = stat(|c| c.nrmse);
                let (mean_ssim, std_ssim) = stat(|c| c.ssim);
                let (mean_oracle_nrmse, std_oracle_nrmse) = stat(|c| c.oracle_nrmse);
                let (mean_effective_rate, _) = stat(|c| c.effective_rate);
                let chosen_hyperparams = solver.parse::<SolverKind>().map(|s| hyper(variant, s, r)).unwrap_or_default();
                SummaryRow {
                    variant: variant.to_string(),
                    solver: solver.to_string(),
                    scheme: scheme.to_string(),
                    acceleration: r,
                    mean_nrmse,
                    std_nrmse,
                    mean_ssim,
                    std_ssim,
                    mean_oracle_nrmse,
                    std_oracle_nrmse,
                    mean_effective_rate,
                    n_cases: group.len(),
                    chosen_hyperparams,
                }
            })
            .collect();
        Self { crime, metric, rows }
    }

    /// Rows of one series in variant order.
    pub fn series(&self, solver: &str, scheme: &str, acceleration: f64) -> Vec<&SummaryRow> {
        self.rows
            .iter()
            .filter(|r| r.solver == solver && r.scheme == scheme && r.acceleration == acceleration)
            .collect()
    }

    pub fn row(&self, variant: &str, solver: &str, acceleration: f64) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.variant == variant && r.solver == solver && r.acceleration == acceleration)
    }

    /// Distinct (solver, scheme, R) series in order of first appearance.
    pub fn series_keys(&self) -> Vec<(String, String, f64)> {
        let mut keys: Vec<(String, String, f64)> = Vec::new();
        for r in &self.rows {
            let k = (r.solver.clone(), r.scheme.clone(), r.acceleration);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    NonIncreasing,
    NonDecreasing,
}

/// Outcome of a monotone-chain test along an ordered sequence of means.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainCheck {
    pub violations: usize,
    /// Largest violation in units of the pooled standard error of the pair.
    pub worst: f64,
    pub passed: bool,
}

/// Counts adjacent pairs that step the wrong way. The chain passes when at
/// most `max_violations` pairs do and each by no more than `tolerance_se`
/// pooled standard errors, `sqrt(s_a^2 / n_a + s_b^2 / n_b)`.
pub fn monotone_chain(points: &[(f64, f64, usize)], direction: Direction, max_violations: usize, tolerance_se: f64) -> ChainCheck {
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    let mut within = true;
    for w in points.windows(2) {
        let ((ma, sa, na), (mb, sb, nb)) = (w[0], w[1]);
        let step = match direction {
            Direction::NonIncreasing => mb - ma,
            Direction::NonDecreasing => ma - mb,
        };
        if step > 0.0 {
            violations += 1;
            let se = (sa * sa / na.max(1) as f64 + sb * sb / nb.max(1) as f64).sqrt();
            let units = if se > 0.0 { step / se } else { f64::INFINITY };
            worst = worst.max(units);
            if units > tolerance_se {
                within = false;
            }
        }
    }
    ChainCheck { violations, worst, passed: violations <= max_violations && within }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(variant: &str, solver: &str, case_id: usize, nrmse: f64) -> CaseRow {
        CaseRow {
            crime: "I".into(),
            variant: variant.into(),
            solver: solver.into(),
            scheme: "strong_vd(p=3)".into(),
            acceleration: 4.0,
            case_id,
            nrmse,
            ssim: 1.0 - nrmse,
            oracle_nrmse: nrmse,
            effective_rate: 0.25,
            seed: case_id as u64,
        }
    }

    #[test]
    fn groups_in_first_appearance_order() {
        let cases = vec![row("1", "cs", 0, 0.1), row("1", "cs", 1, 0.3), row("2", "cs", 0, 0.05), row("1", "dictl", 0, 0.2)];
        let t = ResultsTable::from_cases(&cases, NrmseNorm::Range, |v, s, _| format!("{v}-{s}"));
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[0].n_cases, 2);
        assert!((t.rows[0].mean_nrmse - 0.2).abs() < 1e-15);
        assert!((t.rows[0].std_nrmse - 0.02f64.sqrt()).abs() < 1e-15);
        assert_eq!(t.rows[1].std_nrmse, 0.0);
        assert_eq!(t.rows[0].chosen_hyperparams, "1-cs");
        assert_eq!(t.series("cs", "strong_vd(p=3)", 4.0).len(), 2);
        assert!(t.rows.iter().all(|r| r.std_nrmse >= 0.0 && r.std_ssim >= 0.0));
    }

    #[test]
    fn chain_rules() {
        let strict = [(3.0, 0.1, 10), (2.0, 0.1, 10), (1.0, 0.1, 10)];
        assert!(monotone_chain(&strict, Direction::NonIncreasing, 0, 0.0).passed);
        assert!(!monotone_chain(&strict, Direction::NonDecreasing, 1, 0.5).passed);
        // se = sqrt(2 * 1/4) ~ 0.707; a rise of 0.3 is ~0.42 se
        let wobble = [(3.0, 1.0, 4), (3.3, 1.0, 4), (1.0, 1.0, 4)];
        let c = monotone_chain(&wobble, Direction::NonIncreasing, 1, 0.5);
        assert_eq!(c.violations, 1);
        assert!(c.passed, "{c:?}");
        assert!(!monotone_chain(&wobble, Direction::NonIncreasing, 1, 0.4).passed);
        assert!(!monotone_chain(&wobble, Direction::NonIncreasing, 0, 0.5).passed);
    }
}
