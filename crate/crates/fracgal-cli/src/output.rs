//! Report writers: an RFC-4180 CSV with one row per `(sigma, J)` cell and a
//! Markdown table with one column group per grading exponent.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use csv::{Terminator, WriterBuilder};

use fracgal_core::report::Metric;

use crate::config::{Experiment, RunConfig};
use crate::experiments::{OracleRun, StudyOutcome};

/// Column order of every report CSV.
pub const CSV_HEADER: [&str; 6] = ["sigma", "J", "error", "order", "metric", "fingerprint"];

/// Margin within which a finest observed order counts as matching the
/// expected asymptotic order in the run summary.
pub const ORDER_TOLERANCE: f64 = 0.2;

/// One parsed CSV row; numeric strings are kept verbatim so comparisons can
/// report exactly what a file said.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub sigma: f64,
    pub intervals: u64,
    pub error: f64,
    /// Absent on the first row of each ladder.
    pub order: Option<f64>,
    pub metric: String,
    pub fingerprint: String,
}

/// The study as CSV bytes. Numbers use shortest round-trip decimals, so
/// parsing a cell back yields bit-identical values.
pub fn csv_bytes(outcome: &StudyOutcome) -> Result<Vec<u8>> {
    let mut writer = WriterBuilder::new()
        .terminator(Terminator::CRLF)
        .from_writer(Vec::new());
    writer.write_record(CSV_HEADER)?;
    for report in &outcome.reports {
        for row in report.rows() {
            writer.write_record([
                format!("{}", report.sigma),
                format!("{}", row.intervals),
                format!("{}", row.error),
                row.order.map(|o| format!("{o}")).unwrap_or_default(),
                report.metric.label().to_string(),
                outcome.fingerprint.clone(),
            ])?;
        }
    }
    writer
        .into_inner()
        .context("flushing the CSV writer")
}

/// Parse a report CSV produced by [`csv_bytes`].
pub fn parse_csv(bytes: &[u8]) -> Result<Vec<CsvRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    {
        let headers = reader.headers().context("reading the CSV header")?;
        if headers.iter().ne(CSV_HEADER.iter().copied()) {
            bail!(
                "unexpected CSV header {:?}; expected {:?}",
                headers.iter().collect::<Vec<_>>(),
                CSV_HEADER
            );
        }
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.context("reading a CSV record")?;
        if record.len() != CSV_HEADER.len() {
            bail!("CSV record has {} fields, expected {}", record.len(), CSV_HEADER.len());
        }
        let order_field = &record[3];
        rows.push(CsvRow {
            sigma: record[0].parse().context("parsing sigma")?,
            intervals: record[1].parse().context("parsing J")?,
            error: record[2].parse().context("parsing error")?,
            order: if order_field.is_empty() {
                None
            } else {
                Some(order_field.parse().context("parsing order")?)
            },
            metric: record[4].to_string(),
            fingerprint: record[5].to_string(),
        });
    }
    Ok(rows)
}

/// Three-significant-digit scientific notation, the table format for errors.
fn sci3(x: f64) -> String {
    format!("{x:.2e}")
}

/// Two-decimal fixed notation, the table format for observed orders.
fn ord2(o: Option<f64>) -> String {
    match o {
        Some(o) => format!("{o:.2}"),
        None => "—".to_string(),
    }
}

/// The study as a Markdown report: a header describing every semantic knob,
/// the error/order table, and a summary grading observed orders against the
/// expected asymptotics.
pub fn markdown(cfg: &RunConfig, outcome: &StudyOutcome) -> String {
    let metric = cfg.experiment.metric().expect("convergence experiment");
    let mut md = String::new();
    let title = match cfg.experiment {
        Experiment::Diffusion => "Diffusion field convergence",
        Experiment::Wave => "Wave field convergence",
        Experiment::ScalarDiffusion => "Scalar diffusion convergence",
        Experiment::ScalarWave => "Scalar wave convergence",
        Experiment::Oracles => unreachable!("oracle runs render elsewhere"),
    };
    md.push_str(&format!("# {title}\n\n"));
    md.push_str(&format!("- alpha: {}\n", cfg.alpha));
    md.push_str(&format!("- metric: {}\n", metric.label()));
    md.push_str(&format!("- profile: {}\n", cfg.profile.label()));
    if cfg.experiment.is_field() {
        md.push_str(&format!(
            "- backend: {} ({} spatial cells)\n",
            cfg.backend.label(),
            cfg.cells
        ));
        md.push_str(&format!(
            "- reference: J* = {} at sigma* = {}, same spatial mesh\n",
            cfg.reference_intervals, cfg.reference_sigma
        ));
    } else {
        md.push_str("- reference: exact Mittag-Leffler mode solution (lambda = 1)\n");
    }
    md.push_str(&format!("- seed: {}\n", cfg.seed));
    md.push_str(&format!("- fingerprint: {}\n", outcome.fingerprint));
    if metric == Metric::FieldSup {
        md.push_str(
            "- E1 sampling: each coarse interval is sampled at interior offsets i/5 \
             (i = 1..4) plus the left limit at its right node; the reference is \
             evaluated inside its own cell containing each sample time\n",
        );
    }
    md.push('\n');

    // One column group (error, order) per grading exponent; all groups share
    // the grid ladder.
    md.push_str("| J |");
    for report in &outcome.reports {
        md.push_str(&format!(" {} (σ={}) | order |", metric.label(), report.sigma));
    }
    md.push('\n');
    md.push_str("|---:|");
    for _ in &outcome.reports {
        md.push_str("---:|---:|");
    }
    md.push('\n');
    for (gi, &grid) in cfg.grids.iter().enumerate() {
        md.push_str(&format!("| {grid} |"));
        for report in &outcome.reports {
            let row = report.rows()[gi];
            md.push_str(&format!(" {} | {} |", sci3(row.error), ord2(row.order)));
        }
        md.push('\n');
    }
    md.push('\n');

    md.push_str("## Order summary\n\n");
    for line in summary_lines(outcome) {
        md.push_str(&format!("- {line}\n"));
    }
    md
}

/// One verdict per grading exponent: the finest observed order next to the
/// expected asymptotic order, graded pass/fail when theory declares one.
pub fn summary_lines(outcome: &StudyOutcome) -> Vec<String> {
    outcome
        .reports
        .iter()
        .zip(&outcome.expected)
        .map(|(report, expected)| {
            let observed = report.last_order();
            let observed_text = ord2(observed);
            match (expected, observed) {
                (Some(want), Some(got)) => {
                    let verdict = if (got - want).abs() <= ORDER_TOLERANCE {
                        "pass"
                    } else {
                        "FAIL"
                    };
                    format!(
                        "sigma={}: expected order {:.2}, observed {} -> {}",
                        report.sigma, want, observed_text, verdict
                    )
                }
                (Some(want), None) => format!(
                    "sigma={}: expected order {:.2}, but a single grid gives no observed order",
                    report.sigma, want
                ),
                (None, _) => format!(
                    "sigma={}: observed order {} (no asymptotic claim at this grading)",
                    report.sigma, observed_text
                ),
            }
        })
        .collect()
}

/// Whether every declared expectation was met.
pub fn summary_passes(outcome: &StudyOutcome) -> bool {
    outcome
        .reports
        .iter()
        .zip(&outcome.expected)
        .all(|(report, expected)| match (expected, report.last_order()) {
            (Some(want), Some(got)) => (got - want).abs() <= ORDER_TOLERANCE,
            _ => true,
        })
}

/// The oracle run as display lines (also written to disk under `--out`).
pub fn oracle_lines(run: &OracleRun) -> Vec<String> {
    let mut lines = Vec::with_capacity(run.outcomes.len() + 1);
    for o in &run.outcomes {
        lines.push(format!(
            "{:<24} samples={:<6} worst_margin={:>10.3e} seed={:<12} {}",
            o.check,
            o.samples,
            o.worst_margin,
            o.seed,
            if o.passed() { "PASS" } else { "FAIL" }
        ));
    }
    lines.push(format!(
        "oracle suite: {} checks, seed {}, {}",
        run.outcomes.len(),
        run.seed,
        if run.all_passed() { "all passed" } else { "VIOLATIONS FOUND" }
    ));
    lines
}

/// Write the CSV and Markdown reports under the configured output directory.
/// File names carry the experiment and fingerprint, so distinct configs never
/// collide. Writes happen sequentially on one thread.
pub fn write_reports(cfg: &RunConfig, outcome: &StudyOutcome) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating output directory {}", cfg.out_dir.display()))?;
    let stem = format!("{}-{}", cfg.experiment.label(), outcome.fingerprint);
    let csv_path = cfg.out_dir.join(format!("{stem}.csv"));
    let md_path = cfg.out_dir.join(format!("{stem}.md"));
    let bytes = csv_bytes(outcome)?;
    fs::File::create(&csv_path)
        .and_then(|mut f| f.write_all(&bytes))
        .with_context(|| format!("writing {}", csv_path.display()))?;
    fs::write(&md_path, markdown(cfg, outcome))
        .with_context(|| format!("writing {}", md_path.display()))?;
    Ok((csv_path, md_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Profile, RunConfig};
    use crate::experiments::run_study;

    fn small_outcome() -> (RunConfig, StudyOutcome) {
        let mut cfg = RunConfig::defaults(Experiment::ScalarDiffusion, 0.5, Profile::Ci);
        cfg.grids = vec![16, 32, 64];
        cfg.sigmas = vec![1.0, 4.0];
        cfg.validate().unwrap();
        let outcome = run_study(&cfg).unwrap();
        (cfg, outcome)
    }

    #[test]
    fn csv_round_trips_exactly() {
        let (_, outcome) = small_outcome();
        let bytes = csv_bytes(&outcome).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("sigma,J,error,order,metric,fingerprint\r\n"));
        assert_eq!(text.matches("\r\n").count(), 1 + 6);

        let rows = parse_csv(&bytes).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].sigma, 1.0);
        assert_eq!(rows[0].intervals, 16);
        assert!(rows[0].order.is_none());
        // Shortest round-trip decimals: the parsed error is bit-identical.
        assert_eq!(rows[1].error, outcome.reports[0].rows()[1].error);
        assert_eq!(
            rows[1].order.unwrap(),
            outcome.reports[0].rows()[1].order.unwrap()
        );
        assert!(rows.iter().all(|r| r.metric == "max-node"));
        assert!(rows.iter().all(|r| r.fingerprint == outcome.fingerprint));
    }

    #[test]
    fn markdown_formats_errors_and_orders() {
        let (cfg, outcome) = small_outcome();
        let md = markdown(&cfg, &outcome);
        assert!(md.contains("# Scalar diffusion convergence"));
        assert!(md.contains("- fingerprint: "));
        assert!(md.contains("| 16 |"));
        // Errors appear in 3-significant-digit scientific notation.
        let err = outcome.reports[0].rows()[0].error;
        assert!(md.contains(&format!("{err:.2e}")));
        // Orders appear with two decimals; the first row shows a dash.
        assert!(md.contains("| — |"));
        assert!(md.contains("## Order summary"));
    }

    #[test]
    fn sci3_and_ord2_format_as_the_tables_expect() {
        assert_eq!(sci3(1.06e-2), "1.06e-2");
        assert_eq!(sci3(7.64e-5), "7.64e-5");
        assert_eq!(ord2(Some(1.047)), "1.05");
        assert_eq!(ord2(None), "—");
    }

    #[test]
    fn summary_grades_against_expected_orders() {
        let (_, outcome) = small_outcome();
        let lines = summary_lines(&outcome);
        assert_eq!(lines.len(), 2);
        assert!(lines[0].contains("sigma=1"));
        assert!(lines[0].contains("expected order 0.50"));
    }

    #[test]
    fn reports_land_in_the_output_directory() {
        let dir = tempfile::tempdir().unwrap();
        let (mut cfg, outcome) = small_outcome();
        cfg.out_dir = dir.path().to_path_buf();
        let (csv_path, md_path) = write_reports(&cfg, &outcome).unwrap();
        assert!(csv_path.exists());
        assert!(md_path.exists());
        let rows = parse_csv(&fs::read(&csv_path).unwrap()).unwrap();
        assert_eq!(rows.len(), 6);
    }
}
