//! Graded temporal meshes.
//!
//! The mesh with `J` intervals, grading exponent `sigma >= 1`, and horizon
//! `T > 0` has nodes
//!
//! ```text
//!     t_j = (j / J)^sigma * T,       j = 0, 1, ..., J,
//! ```
//!
//! computed as `exp(sigma * ln(j/J)) * T` with the endpoints pinned to `0`
//! and `T` exactly.  Because `j/J` and `2j/(2J)` round to the same `f64`
//! (identical real quotients), refining `J -> 2J` reproduces the coarse nodes
//! bit for bit — the error studies rely on that nesting.  `sigma = 1` is the
//! uniform mesh up to roundoff in `exp(ln(.))`.
//!
//! ```
//! use fracgal_core::mesh::GradedMesh;
//!
//! let mesh = GradedMesh::new(4, 2.0, 1.0).unwrap();
//! assert_eq!(mesh.node(0), 0.0);
//! assert!((mesh.node(1) - 1.0 / 16.0).abs() < 1e-16);
//! assert!((mesh.node(3) - 9.0 / 16.0).abs() < 1e-15);
//! assert_eq!(mesh.node(4), 1.0);
//! ```

use crate::math::f;
use crate::quad::gauss_legendre;
use crate::{Error, Result};
use alloc::vec::Vec;

/// Graded mesh `t_j = (j/J)^sigma T` on `[0, T]`.
#[derive(Debug, Clone)]
pub struct GradedMesh {
    sigma: f64,
    horizon: f64,
    nodes: Vec<f64>,
}

/// How [`GradedMesh::interval_averages`] integrates each interval.
#[derive(Debug, Clone)]
pub struct AveragePlan {
    /// Gauss-Legendre points per interval (and per origin panel).
    pub points: usize,
    /// Split the first interval into geometrically shrinking panels toward
    /// `t = 0`, where the integrands of interest behave like `t^gamma` with
    /// `gamma` as small as the fractional order.  Plain Gauss on `(0, t_1]`
    /// would lose most of its digits there.
    pub graded_origin: bool,
    /// If set, re-integrate with twice the points and fail with
    /// [`Error::QuadratureNonConvergence`] when the two answers differ by
    /// more than `tol * (1 + |value|)` on some interval.
    pub check: Option<f64>,
}

impl Default for AveragePlan {
    fn default() -> Self {
        AveragePlan {
            points: 16,
            graded_origin: true,
            check: None,
        }
    }
}

// Origin panels: [r^{k+1} t_1, r^k t_1] down to ~1e-25 t_1, then one closing
// panel [0, r^panels t_1].  For Hoelder-continuous integrands the leftover
// mass is far below double precision.
const ORIGIN_RATIO: f64 = 0.15;
const ORIGIN_PANELS: usize = 30;

impl GradedMesh {
    /// Build the mesh.  Requires `intervals >= 1`, `sigma >= 1`, and a
    /// positive finite `horizon`.
    pub fn new(intervals: usize, sigma: f64, horizon: f64) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::Size {
                name: "intervals",
                value: 0,
                need: "at least 1",
            });
        }
        if !(sigma >= 1.0) || !sigma.is_finite() {
            return Err(Error::Param {
                name: "sigma",
                value: sigma,
                need: ">= 1 and finite",
            });
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Param {
                name: "horizon",
                value: horizon,
                need: "positive and finite",
            });
        }
        let j_count = intervals as f64;
        let mut nodes = Vec::with_capacity(intervals + 1);
        nodes.push(0.0);
        for j in 1..intervals {
            let q = j as f64 / j_count;
            nodes.push(f::exp(sigma * f::ln(q)) * horizon);
        }
        nodes.push(horizon);
        for j in 1..=intervals {
            if !(nodes[j] > nodes[j - 1]) {
                return Err(Error::Param {
                    name: "mesh step",
                    value: nodes[j] - nodes[j - 1],
                    need: "positive (grading too extreme for this interval count)",
                });
            }
        }
        Ok(GradedMesh {
            sigma,
            horizon,
            nodes,
        })
    }

    #[inline]
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    #[inline]
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Node `t_j`, `0 <= j <= J`.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Step `tau_m = t_m - t_{m-1}` for `1 <= m <= J`.
    #[inline]
    pub fn step(&self, m: usize) -> f64 {
        self.nodes[m] - self.nodes[m - 1]
    }

    /// Smallest step (always the first on a graded mesh).
    pub fn min_step(&self) -> f64 {
        (1..=self.intervals())
            .map(|m| self.step(m))
            .fold(f64::INFINITY, f64::min)
    }

    /// Index `k` (1-based) of the interval `(t_{k-1}, t_k]` containing `t`,
    /// with `t = 0` assigned to the first interval.
    pub fn cell_containing(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0) || t > self.horizon {
            return Err(Error::Domain {
                name: "t",
                value: t,
                lo: 0.0,
                hi: self.horizon,
            });
        }
        let inner = &self.nodes[1..];
        let idx = inner.partition_point(|&x| x < t);
        Ok((idx + 1).min(self.intervals()))
    }

    /// Interval averages `(1/tau_j) \int_{t_{j-1}}^{t_j} f` for `j = 1..=J`.
    pub fn interval_averages<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        plan: &AveragePlan,
    ) -> Result<Vec<f64>> {
        if plan.points == 0 {
            return Err(Error::Size {
                name: "plan.points",
                value: 0,
                need: "at least 1",
            });
        }
        let base = gauss_legendre(plan.points)?;
        let fine = if plan.check.is_some() {
            Some(gauss_legendre(2 * plan.points)?)
        } else {
            None
        };
        let mut out = Vec::with_capacity(self.intervals());
        for j in 1..=self.intervals() {
            let lo = self.nodes[j - 1];
            let hi = self.nodes[j];
            let graded = j == 1 && plan.graded_origin;
            let val = if graded {
                origin_integral(&base, hi, &mut f)
            } else {
                base.integrate(lo, hi, &mut f)
            };
            if let (Some(tol), Some(fine)) = (plan.check, fine.as_ref()) {
                let val2 = if graded {
                    origin_integral(fine, hi, &mut f)
                } else {
                    fine.integrate(lo, hi, &mut f)
                };
                let defect = f::abs(val - val2) / (1.0 + f::abs(val2));
                if defect > tol {
                    return Err(Error::QuadratureNonConvergence {
                        interval: j,
                        defect,
                    });
                }
            }
            out.push(val / (hi - lo));
        }
        Ok(out)
    }

    /// Interval averages of the piecewise-linear interpolant of nodal values:
    /// exactly `(v_{j-1} + v_j) / 2`.
    pub fn nodal_interval_averages(&self, nodal: &[f64]) -> Result<Vec<f64>> {
        if nodal.len() != self.nodes.len() {
            return Err(Error::Size {
                name: "nodal.len()",
                value: nodal.len(),
                need: "intervals + 1",
            });
        }
        Ok((1..nodal.len())
            .map(|j| 0.5 * (nodal[j - 1] + nodal[j]))
            .collect())
    }

    /// Evaluate the continuous piecewise-linear interpolant of `nodal`
    /// (length `J + 1`) at `t` in `[0, T]`.
    pub fn interp_linear(&self, nodal: &[f64], t: f64) -> Result<f64> {
        if nodal.len() != self.nodes.len() {
            return Err(Error::Size {
                name: "nodal.len()",
                value: nodal.len(),
                need: "intervals + 1",
            });
        }
        let k = self.cell_containing(t)?;
        let (t0, t1) = (self.nodes[k - 1], self.nodes[k]);
        let theta = (t - t0) / (t1 - t0);
        Ok(nodal[k - 1] + theta * (nodal[k] - nodal[k - 1]))
    }
}

/// Integral over `(0, t1]` with geometric panels clustering at the origin.
fn origin_integral<F: FnMut(f64) -> f64>(rule: &crate::quad::QuadRule, t1: f64, f: &mut F) -> f64 {
    let mut total = 0.0;
    let mut right = t1;
    for _ in 0..ORIGIN_PANELS {
        let left = right * ORIGIN_RATIO;
        total += rule.integrate(left, right, &mut *f);
        right = left;
    }
    total += rule.integrate(0.0, right, &mut *f);
    total
}
