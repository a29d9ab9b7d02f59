//! Cell-by-cell comparison of two report CSVs sharing one config fingerprint.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::output::{parse_csv, CsvRow};

/// One cell whose relative difference exceeded the tolerance.
#[derive(Clone, Debug)]
pub struct CellDiff {
    pub sigma: f64,
    pub intervals: u64,
    /// Which column disagreed: "error" or "order".
    pub column: &'static str,
    pub a: f64,
    pub b: f64,
    pub rel: f64,
}

impl std::fmt::Display for CellDiff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "sigma={} J={} {}: {} vs {} (relative difference {:.3e})",
            self.sigma, self.intervals, self.column, self.a, self.b, self.rel
        )
    }
}

/// Symmetric relative difference; zero when both values are zero.
fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

fn uniform_fingerprint(rows: &[CsvRow], label: &str) -> Result<String> {
    let first = rows
        .first()
        .with_context(|| format!("report {label} has no data rows"))?;
    for row in rows {
        if row.fingerprint != first.fingerprint {
            bail!(
                "report {label} mixes fingerprints {} and {}",
                first.fingerprint,
                row.fingerprint
            );
        }
    }
    Ok(first.fingerprint.clone())
}

/// Compare two report files cell by cell. Errors on structural problems
/// (unreadable files, differing fingerprints, mismatched row sets); otherwise
/// returns the cells whose relative difference exceeds `tolerance`.
pub fn compare_reports(a: &Path, b: &Path, tolerance: f64) -> Result<Vec<CellDiff>> {
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        bail!("tolerance must be a finite non-negative number, got {tolerance}");
    }
    let rows_a = parse_csv(&fs::read(a).with_context(|| format!("reading {}", a.display()))?)
        .with_context(|| format!("parsing {}", a.display()))?;
    let rows_b = parse_csv(&fs::read(b).with_context(|| format!("reading {}", b.display()))?)
        .with_context(|| format!("parsing {}", b.display()))?;

    let fp_a = uniform_fingerprint(&rows_a, "A")?;
    let fp_b = uniform_fingerprint(&rows_b, "B")?;
    if fp_a != fp_b {
        bail!("config fingerprints differ: {fp_a} (A) vs {fp_b} (B); the reports describe different runs");
    }
    if rows_a.len() != rows_b.len() {
        bail!("row counts differ: {} (A) vs {} (B)", rows_a.len(), rows_b.len());
    }

    let mut diffs = Vec::new();
    for (ra, rb) in rows_a.iter().zip(&rows_b) {
        if ra.sigma != rb.sigma || ra.intervals != rb.intervals || ra.metric != rb.metric {
            bail!(
                "row layout differs: (sigma={}, J={}, {}) vs (sigma={}, J={}, {})",
                ra.sigma,
                ra.intervals,
                ra.metric,
                rb.sigma,
                rb.intervals,
                rb.metric
            );
        }
        let rel = rel_diff(ra.error, rb.error);
        if rel > tolerance {
            diffs.push(CellDiff {
                sigma: ra.sigma,
                intervals: ra.intervals,
                column: "error",
                a: ra.error,
                b: rb.error,
                rel,
            });
        }
        match (ra.order, rb.order) {
            (None, None) => {}
            (Some(oa), Some(ob)) => {
                let rel = rel_diff(oa, ob);
                if rel > tolerance {
                    diffs.push(CellDiff {
                        sigma: ra.sigma,
                        intervals: ra.intervals,
                        column: "order",
                        a: oa,
                        b: ob,
                        rel,
                    });
                }
            }
            _ => bail!(
                "order present in only one report at sigma={}, J={}",
                ra.sigma,
                ra.intervals
            ),
        }
    }
    Ok(diffs)
}
