//! Fractional kernel weights shared by both time steppers.
//!
//! For a mesh `0 = t_0 < t_1 < ... < t_J = T` and an exponent `p > 0` the
//! weights are the kernel integrals
//!
//! ```text
//!     w_{m,j} = [ (t_m - t_{j-1})^p - (t_m - t_j)^p ] / Gamma(p + 1),
//!     1 <= j <= m <= J,
//! ```
//!
//! with `p = 1 - alpha` for the piecewise-constant scheme (`0 < alpha < 1`)
//! and `p = 2 - alpha` for the piecewise-linear scheme (`1 < alpha < 2`).
//! Rows telescope: `sum_j w_{m,j} = t_m^p / Gamma(p+1)`, and the diagonal is
//! `tau_m^p / Gamma(p+1)`.
//!
//! The steppers actually consume *differences* of weights from consecutive
//! rows, `w_{m-1,j} - w_{m,j}`, which are positive but suffer catastrophic
//! cancellation if formed literally (for `j` far from `m` the two weights
//! agree to most of their digits).  [`WeightKernel::history_diff_row`]
//! evaluates the differences in stable form instead:
//!
//! ```text
//!     w_{m-1,j} - w_{m,j} = phi(t_{m-1} - t_j, tau_j) - phi(t_m - t_j, tau_j)
//! ```
//!
//! where `phi(a, d) = (a + d)^p - a^p` is computed as
//! `a^p * expm1(p * log1p(d/a))` when `d/a` is small.  The relative error of
//! a row entry is then a few ulp of the entry itself, not of the much larger
//! undifferenced weights.

use crate::math::{f, gamma};
use crate::mesh::GradedMesh;
use crate::{Error, Result};

/// `(a + d)^p - a^p` for `a >= 0`, `d > 0`, evaluated without cancellation.
pub fn power_increment(a: f64, d: f64, p: f64) -> f64 {
    debug_assert!(a >= 0.0 && d > 0.0);
    if a == 0.0 {
        return f::powf(d, p);
    }
    let r = d / a;
    if r > 0.5 {
        // The two terms are far apart; the direct difference is fine.
        f::powf(a + d, p) - f::powf(a, p)
    } else {
        f::powf(a, p) * f::expm1(p * f::ln_1p(r))
    }
}

/// Kernel weight evaluator bound to a mesh and exponent `p`.
#[derive(Debug, Clone)]
pub struct WeightKernel<'a> {
    mesh: &'a GradedMesh,
    p: f64,
    inv_gamma_p1: f64,
}

impl<'a> WeightKernel<'a> {
    /// Requires `0 < p < 1`.  Both schemes stay in this range (`p = 1 - alpha`
    /// with `0 < alpha < 1`, or `p = 2 - alpha` with `1 < alpha < 2`), and the
    /// positivity of the history differences depends on it: for `p > 1` the
    /// map `m -> w_{m,j}` would be increasing instead of decreasing.
    pub fn new(mesh: &'a GradedMesh, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Param {
                name: "p",
                value: p,
                need: "in (0, 1)",
            });
        }
        Ok(WeightKernel {
            mesh,
            p,
            inv_gamma_p1: 1.0 / gamma(p + 1.0),
        })
    }

    #[inline]
    pub fn exponent(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn mesh(&self) -> &GradedMesh {
        self.mesh
    }

    /// Single weight `w_{m,j}`, `1 <= j <= m`.
    pub fn weight(&self, m: usize, j: usize) -> f64 {
        debug_assert!(1 <= j && j <= m && m <= self.mesh.intervals());
        let a = self.mesh.node(m) - self.mesh.node(j);
        let d = self.mesh.step(j);
        power_increment(a, d, self.p) * self.inv_gamma_p1
    }

    /// Diagonal weight `w_{m,m} = tau_m^p / Gamma(p+1)`.
    #[inline]
    pub fn diagonal(&self, m: usize) -> f64 {
        f::powf(self.mesh.step(m), self.p) * self.inv_gamma_p1
    }

    /// Full row `w_{m,1}, ..., w_{m,m}` into `row` (length `>= m`).
    pub fn row(&self, m: usize, row: &mut [f64]) {
        debug_assert!(row.len() >= m);
        for j in 1..=m {
            row[j - 1] = self.weight(m, j);
        }
    }

    /// History differences `c_{m,j} = w_{m-1,j} - w_{m,j}` for
    /// `j = 1, ..., m-1`, written into `diff[0..m-1]`.  All entries are
    /// positive; `j = m-1` uses the algebraically exact three-term form
    /// `tau_{m-1}^p + tau_m^p - (tau_{m-1} + tau_m)^p`.
    pub fn history_diff_row(&self, m: usize, diff: &mut [f64]) {
        debug_assert!(m >= 2 && diff.len() >= m - 1);
        let tm = self.mesh.node(m);
        let tm1 = self.mesh.node(m - 1);
        for j in 1..m - 1 {
            let tj = self.mesh.node(j);
            let d = self.mesh.step(j);
            let near = power_increment(tm1 - tj, d, self.p);
            let far = power_increment(tm - tj, d, self.p);
            diff[j - 1] = (near - far) * self.inv_gamma_p1;
        }
        let tau_prev = tm1 - self.mesh.node(m - 2);
        let tau_m = tm - tm1;
        diff[m - 2] = (f::powf(tau_prev, self.p) + f::powf(tau_m, self.p)
            - f::powf(tau_prev + tau_m, self.p))
            * self.inv_gamma_p1;
    }

    /// Telescoped row sum `sum_{j=1}^m w_{m,j} = t_m^p / Gamma(p+1)`.
    #[inline]
    pub fn row_sum(&self, m: usize) -> f64 {
        f::powf(self.mesh.node(m), self.p) * self.inv_gamma_p1
    }
}
