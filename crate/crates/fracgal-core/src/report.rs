//! Convergence-study bookkeeping: error-vs-resolution tables with observed
//! orders.

use alloc::vec::Vec;

use crate::stepper::Scheme;

/// Which error functional a study measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Max over mesh nodes of the scalar error `|U_m - y(t_m)|`.
    MaxNode,
    /// Sup over dense time samples of the scalar error.
    SupTime,
    /// Sup-in-time of the spatial `L^2` norm of the field error (E1).
    FieldSup,
    /// Max over coarse nodes of the spatial `L^2` norm of the field error (E2).
    FieldNodes,
}

impl Metric {
    /// Stable identifier used in file outputs.
    pub fn label(self) -> &'static str {
        match self {
            Metric::MaxNode => "max-node",
            Metric::SupTime => "sup-time",
            Metric::FieldSup => "E1",
            Metric::FieldNodes => "E2",
        }
    }
}

/// The finer, more strongly graded run a study measured errors against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceDescriptor {
    pub intervals: usize,
    pub sigma: f64,
}

/// One resolution of a study.
#[derive(Clone, Copy, Debug)]
pub struct ReportRow {
    pub intervals: usize,
    pub error: f64,
    /// Observed order against the previous row,
    /// `ln(E_prev/E_this) / ln(J_this/J_prev)`; absent on the first row.
    pub order: Option<f64>,
}

/// Error-vs-resolution table for one `(scheme, alpha, sigma, metric)` study.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub scheme: Scheme,
    pub alpha: f64,
    pub sigma: f64,
    pub metric: Metric,
    pub reference: Option<ReferenceDescriptor>,
    rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    pub fn new(scheme: Scheme, alpha: f64, sigma: f64, metric: Metric) -> Self {
        ConvergenceReport {
            scheme,
            alpha,
            sigma,
            metric,
            reference: None,
            rows: Vec::new(),
        }
    }

    pub fn with_reference(mut self, reference: ReferenceDescriptor) -> Self {
        self.reference = Some(reference);
        self
    }

    /// Append a row, deriving its observed order from the previous row.
    /// Rows must arrive in strictly increasing resolution.
    pub fn push(&mut self, intervals: usize, error: f64) {
        let order = self.rows.last().map(|prev| {
            debug_assert!(intervals > prev.intervals);
            crate::math::f::ln(prev.error / error)
                / crate::math::f::ln(intervals as f64 / prev.intervals as f64)
        });
        self.rows.push(ReportRow {
            intervals,
            error,
            order,
        });
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    /// Observed order of the finest pair, if at least two rows exist.
    pub fn last_order(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.order)
    }

    /// Smallest and largest observed order over the last `tail` pairs.
    pub fn tail_order_range(&self, tail: usize) -> Option<(f64, f64)> {
        let orders: Vec<f64> = self
            .rows
            .iter()
            .rev()
            .take(tail)
            .filter_map(|r| r.order)
            .collect();
        if orders.is_empty() {
            return None;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &o in &orders {
            lo = lo.min(o);
            hi = hi.max(o);
        }
        Some((lo, hi))
    }
}
