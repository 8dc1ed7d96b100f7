//! Zeta-zero ordinate tables, the counting-formula integrity check, and
//! the trace-norm contradiction report.
//!
//! The report is the artifact's headline comparison: were the determinant
//! identity behind question (A) true, every critical-line zero `1/2 + i g`
//! would force `1/g` into the operator's singular values, so partial sums
//! of `1/g_j` could never exceed any upper bound on the trace norm. They
//! do — at the very first zero.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::QncError;
use crate::real::HighPrecisionReal;
use crate::spectral::SpectrumResult;

/// Ascending positive ordinates of zeta zeros on the critical line.
/// Binary64 is sufficient for every consumer of this table.
#[derive(Debug, Clone)]
pub struct ZetaZeroTable {
    ordinates: Vec<f64>,
    source: String,
}

const BUNDLED_ZEROS: &str = include_str!("../data/zeta_zeros_100.txt");

/// `2 pi e`, the lower edge of the counting formula's domain.
const TWO_PI_E: f64 = 17.079468445347132;

impl ZetaZeroTable {
    /// The table bundled with the crate: the first 100 positive ordinates.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_ZEROS, "bundled: first 100 positive ordinates (mpmath zetazero)")
            .expect("bundled table is valid")
    }

    /// Parse the text format: one positive decimal ordinate per line,
    /// `#` comments allowed, strictly increasing.
    pub fn parse(text: &str, source: &str) -> Result<Self, QncError> {
        let mut ordinates = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let value: f64 = line.parse().map_err(|e| QncError::Parse {
                line: idx + 1,
                message: format!("bad ordinate {line:?}: {e}"),
            })?;
            ordinates.push(value);
        }
        let table = Self {
            ordinates,
            source: source.to_string(),
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<(), QncError> {
        if self.ordinates.is_empty() {
            return Err(QncError::Validation("zero table is empty".into()));
        }
        let g1 = self.ordinates[0];
        if !(14.0 < g1 && g1 < 15.0) {
            return Err(QncError::Validation(format!(
                "first ordinate {g1} outside the sanity range (14, 15)"
            )));
        }
        for (i, w) in self.ordinates.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                return Err(QncError::Validation(format!(
                    "ordinates not strictly increasing at position {}: {} then {}",
                    i + 1,
                    w[0],
                    w[1]
                )));
            }
            if !w[1].is_finite() || w[1] <= 0.0 {
                return Err(QncError::Validation(format!(
                    "ordinate {} is not a positive finite number",
                    w[1]
                )));
            }
        }
        // counting-formula integrity: at each ordinate inside the formula's
        // domain, the inclusive count must match the estimate within 1
        for (j, &g) in self.ordinates.iter().enumerate() {
            if g <= TWO_PI_E {
                continue;
            }
            let est = count_estimate(g)?;
            let count = (j + 1) as f64;
            if (count - est).abs() > 1.0 {
                return Err(QncError::Validation(format!(
                    "count {count} at ordinate {g} deviates from the counting formula \
                     estimate {est:.3} by more than 1"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Number of ordinates at or below `t`.
    pub fn count_below(&self, t: f64) -> usize {
        self.ordinates.partition_point(|&g| g <= t)
    }

    /// Partial sum of reciprocal ordinates, `sum_{j<=k} 1/g_j`. Each
    /// critical-line zero contributes its positive ordinate once; tables
    /// list positive ordinates only, so this is half of the two-sided sum,
    /// which changes nothing about divergence or the contradiction.
    pub fn reciprocal_partial_sum(&self, k: usize) -> Result<f64, QncError> {
        if k == 0 || k > self.ordinates.len() {
            return Err(QncError::Range(format!(
                "partial-sum index {k} outside 1..={}",
                self.ordinates.len()
            )));
        }
        Ok(self.ordinates[..k].iter().map(|g| 1.0 / g).sum())
    }
}

/// Load and validate a zero table from a file.
pub fn load_zeros(path: &Path) -> Result<ZetaZeroTable, QncError> {
    let text = std::fs::read_to_string(path)?;
    ZetaZeroTable::parse(&text, &path.display().to_string())
}

/// Smooth zero-counting estimate `(T/2pi) ln(T/2pi) - T/2pi + 7/8` for the
/// number of zeros with ordinate in (0, T].
pub fn count_estimate(t: f64) -> Result<f64, QncError> {
    if t <= TWO_PI_E {
        return Err(QncError::Domain(format!(
            "counting formula requires T > 2 pi e = {TWO_PI_E:.6}, got {t}"
        )));
    }
    let x = t / (2.0 * std::f64::consts::PI);
    Ok(x * x.ln() - x + 0.875)
}

/// Side-by-side comparison of a trace-norm upper bound for the full
/// operator against partial sums of reciprocal zero ordinates.
#[derive(Debug, Clone, Serialize)]
pub struct ContradictionReport {
    /// `sum lambda_j (R_n) + tail_bound(n)`: an upper bound on the full
    /// operator's trace norm.
    pub trace_norm_bound: f64,
    /// `partial_sums[k-1] = sum_{j<=k} 1/g_j`.
    pub partial_sums: Vec<f64>,
    /// Smallest k whose partial sum exceeds the bound; `None` when no
    /// prefix of the table does.
    pub crossover_k: Option<usize>,
    /// Truncation dimension behind the bound.
    pub n: usize,
    /// Number of ordinates consumed.
    pub zeros_used: usize,
}

/// Build the contradiction report from a standard-variant spectrum, the
/// truncation's finite tail bound, and a zero table.
pub fn contradiction_report(
    s: &SpectrumResult,
    tail: &HighPrecisionReal,
    table: &ZetaZeroTable,
) -> ContradictionReport {
    let bound = s.trace_norm() + tail.to_f64();
    let mut partial_sums = Vec::with_capacity(table.len());
    let mut acc = 0.0f64;
    let mut crossover = None;
    for (j, &g) in table.ordinates().iter().enumerate() {
        acc += 1.0 / g;
        partial_sums.push(acc);
        if crossover.is_none() && acc > bound {
            crossover = Some(j + 1);
        }
    }
    ContradictionReport {
        trace_norm_bound: bound,
        partial_sums,
        crossover_k: crossover,
        n: s.source_dim,
        zeros_used: table.len(),
    }
}

impl fmt::Display for ContradictionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "trace-norm bound from the n = {} truncation (sum of singular values + tail): {:.6e}",
            self.n, self.trace_norm_bound
        )?;
        writeln!(
            f,
            "a spectral determinant detecting every zero 1/2 + i*g would place 1/g among the"
        )?;
        writeln!(
            f,
            "singular values, so every partial sum below must stay under that bound:"
        )?;
        writeln!(f, "{:>5} {:>22}", "k", "sum_(j<=k) 1/g_j")?;
        for (j, s) in self.partial_sums.iter().enumerate() {
            let mark = match self.crossover_k {
                Some(k) if k == j + 1 => "  <- exceeds the bound",
                _ => "",
            };
            writeln!(f, "{:>5} {:>22.12}{}", j + 1, s, mark)?;
        }
        match self.crossover_k {
            Some(k) => writeln!(
                f,
                "bound exceeded at k = {k}: the required containment fails (and the full \
                 reciprocal sum diverges, so no finite bound could hold)"
            ),
            None => writeln!(f, "no crossover within {} zeros", self.zeros_used),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_matrix, tail_bound, Variant, VariantKind};
    use crate::spectral::singular_values;

    #[test]
    fn bundled_table_loads_and_validates() {
        let t = ZetaZeroTable::bundled();
        assert_eq!(t.len(), 100);
        assert!(t.ordinates()[0] > 14.0 && t.ordinates()[0] < 15.0);
        assert!((t.ordinates()[0] - 14.134725141734694).abs() < 1e-9);
        assert!(t.count_below(100.0) == 29);
    }

    #[test]
    fn parse_rejects_bad_tables() {
        assert!(matches!(
            ZetaZeroTable::parse("", "test"),
            Err(QncError::Validation(_))
        ));
        assert!(matches!(
            ZetaZeroTable::parse("# only comments\n", "test"),
            Err(QncError::Validation(_))
        ));
        // duplicate ordinate violates strict monotonicity
        let dup = "14.134725141734694\n21.022039638771555\n21.022039638771555\n";
        assert!(matches!(
            ZetaZeroTable::parse(dup, "test"),
            Err(QncError::Validation(_))
        ));
        // first ordinate out of the sanity range
        assert!(matches!(
            ZetaZeroTable::parse("21.022039638771555\n", "test"),
            Err(QncError::Validation(_))
        ));
        // unparseable line reported with its number
        match ZetaZeroTable::parse("14.134725141734694\nnot-a-number\n", "test") {
            Err(QncError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        // counting-formula violation: a fake gap-free sequence
        let fake: String = (0..40)
            .map(|i| format!("{}\n", 14.2 + i as f64 * 0.2))
            .collect();
        assert!(matches!(
            ZetaZeroTable::parse(&fake, "test"),
            Err(QncError::Validation(_))
        ));
    }

    #[test]
    fn count_estimate_values() {
        // est(100) is within 1 of the 29 actual zeros below 100
        let est = count_estimate(100.0).unwrap();
        assert!((est - 29.0).abs() <= 1.0, "est(100) = {est}");
        // near the domain edge the formula continues smoothly from 7/8
        let near = count_estimate(TWO_PI_E * 1.0001).unwrap();
        assert!((near - 0.875).abs() < 0.01, "est near 2 pi e = {near}");
        assert!(count_estimate(TWO_PI_E).is_err());
        assert!(count_estimate(5.0).is_err());
        // monotone
        assert!(count_estimate(200.0).unwrap() > count_estimate(100.0).unwrap());
    }

    #[test]
    fn count_matches_estimate_at_every_ordinate() {
        let t = ZetaZeroTable::bundled();
        for (j, &g) in t.ordinates().iter().enumerate() {
            if g <= TWO_PI_E {
                continue;
            }
            let est = count_estimate(g).unwrap();
            assert!(
                ((j + 1) as f64 - est).abs() <= 1.0,
                "count {} vs estimate {est} at ordinate {g}",
                j + 1
            );
        }
    }

    #[test]
    fn reciprocal_partial_sums() {
        let t = ZetaZeroTable::bundled();
        let s1 = t.reciprocal_partial_sum(1).unwrap();
        assert!((s1 - 0.0707477).abs() < 1e-6);
        // strictly increasing in k
        let mut prev = 0.0;
        for k in 1..=t.len() {
            let s = t.reciprocal_partial_sum(k).unwrap();
            assert!(s > prev);
            prev = s;
        }
        assert!(t.reciprocal_partial_sum(0).is_err());
        assert!(t.reciprocal_partial_sum(101).is_err());
    }

    #[test]
    fn divergence_trend_against_density_increment() {
        // sum(2k) - sum(k) stays above 0.9x the counting-density integral
        let t = ZetaZeroTable::bundled();
        for k in [25usize, 50] {
            let inc =
                t.reciprocal_partial_sum(2 * k).unwrap() - t.reciprocal_partial_sum(k).unwrap();
            let a = t.ordinates()[k - 1];
            let b = t.ordinates()[2 * k - 1];
            let two_pi = 2.0 * std::f64::consts::PI;
            let theo = ((b / two_pi).ln().powi(2) - (a / two_pi).ln().powi(2))
                / (4.0 * std::f64::consts::PI);
            assert!(
                inc >= 0.9 * theo,
                "k = {k}: increment {inc} below 0.9 x density integral {theo}"
            );
        }
    }

    #[test]
    fn report_crossover_at_first_zero_for_n25() {
        let m = build_matrix(25, &Variant::Standard, 192).unwrap();
        let s = singular_values(&m).unwrap();
        let tail = m.tail_bound().as_finite().unwrap().clone();
        let t = ZetaZeroTable::bundled();
        let report = contradiction_report(&s, &tail, &t);
        assert_eq!(report.crossover_k, Some(1));
        assert_eq!(report.n, 25);
        assert_eq!(report.zeros_used, 100);
        assert!(report.trace_norm_bound < t.reciprocal_partial_sum(1).unwrap());
        assert_eq!(report.partial_sums.len(), 100);
        // render and check the JSON schema keys
        let json = serde_json::to_value(&report).unwrap();
        for key in [
            "trace_norm_bound",
            "partial_sums",
            "crossover_k",
            "n",
            "zeros_used",
        ] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
        let text = report.to_string();
        assert!(text.contains("exceeds the bound"));
    }

    #[test]
    fn report_well_formed_for_trivial_truncation() {
        // n = 1: empty spectrum contribution, bound is the tail alone
        let m = build_matrix(1, &Variant::Standard, 192).unwrap();
        let s = singular_values(&m).unwrap();
        let tail = m.tail_bound().as_finite().unwrap().clone();
        let t = ZetaZeroTable::bundled();
        let report = contradiction_report(&s, &tail, &t);
        assert!((report.trace_norm_bound - tail.to_f64()).abs() < 1e-15);
        assert!(report.crossover_k.is_some());
    }

    #[test]
    fn crossover_never_increases_with_n() {
        let t = ZetaZeroTable::bundled();
        let mut prev: Option<usize> = None;
        for n in [1usize, 3, 8, 25] {
            let m = build_matrix(n, &Variant::Standard, 192).unwrap();
            let s = singular_values(&m).unwrap();
            let tail = m.tail_bound().as_finite().unwrap().clone();
            let report = contradiction_report(&s, &tail, &t);
            let k = report.crossover_k.expect("bundled table always crosses");
            if let Some(p) = prev {
                assert!(k <= p, "crossover grew from {p} to {k} at n = {n}");
            }
            prev = Some(k);
        }
    }

    #[test]
    fn trace_norm_bound_stays_below_reciprocal_sum() {
        let t = ZetaZeroTable::bundled();
        let full = t.reciprocal_partial_sum(100).unwrap();
        for n in [1usize, 10, 50] {
            let m = build_matrix(n, &Variant::Standard, 192).unwrap();
            let s = singular_values(&m).unwrap();
            let tail = m.tail_bound().as_finite().unwrap();
            let bound = s.trace_norm() + tail.to_f64();
            assert!(
                bound < full,
                "n = {n}: trace-norm bound {bound} is not below the reciprocal sum {full}"
            );
        }
    }

    #[test]
    fn load_zeros_io_error() {
        assert!(load_zeros(Path::new("/nonexistent/zeros.txt")).is_err());
    }

    #[test]
    fn tail_kind_matches_report_usage() {
        // the report consumes finite tails; the modified variant has none
        assert!(tail_bound(25, VariantKind::Modified, 192).is_divergent());
    }
}
