//! Checks `ml_e` against a frozen table of high-precision reference values
//! covering all three evaluation regimes and their hand-off bands.
//!
//! The table was produced offline at 60+ significant digits; rows where the
//! function is vanishingly small relative to its natural scale were excluded
//! when the table was drawn, so a plain relative comparison is meaningful on
//! every row.

use fracgal_core::ml::ml_e;

const TABLE: &str = include_str!("data/ml_reference.csv");
const REL_TOL: f64 = 1e-10;

#[test]
fn matches_reference_table() {
    let mut rows = 0usize;
    let mut worst = 0.0f64;
    let mut worst_row = String::new();
    for line in TABLE.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let alpha: f64 = parts.next().unwrap().parse().unwrap();
        let beta: f64 = parts.next().unwrap().parse().unwrap();
        let z: f64 = parts.next().unwrap().parse().unwrap();
        let want: f64 = parts.next().unwrap().parse().unwrap();
        assert!(parts.next().is_none(), "malformed row: {line}");

        let got = ml_e(alpha, beta, z).unwrap_or_else(|e| {
            panic!("ml_e({alpha}, {beta}, {z}) failed: {e}");
        });
        let rel = (got - want).abs() / want.abs().max(1e-300);
        if rel > worst {
            worst = rel;
            worst_row = line.to_string();
        }
        assert!(
            rel <= REL_TOL,
            "ml_e({alpha}, {beta}, {z}) = {got}, reference {want}, rel err {rel:.3e}"
        );
        rows += 1;
    }
    assert!(rows >= 1000, "expected at least 1000 rows, got {rows}");
    eprintln!("ml fixture: {rows} rows, worst relative error {worst:.3e} at [{worst_row}]");
}
