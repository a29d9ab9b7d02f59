//! Scalar time steppers for `D^alpha (u - u_0) + lambda u = 0` on graded
//! meshes.
//!
//! Two schemes share the machinery in [`crate::weights`]:
//!
//! * `0 < alpha < 1`: piecewise-constant discontinuous Galerkin in time.  The
//!   solution is left-continuous, constant on each `(t_{m-1}, t_m]`.
//! * `1 < alpha < 2`: continuous piecewise-linear Petrov-Galerkin in time
//!   (piecewise-constant test space), with exact initial value and zero
//!   initial slope built into the ansatz.
//!
//! Both recurrences are marched in difference form (`v_m = U_m - u_0` for the
//! first, slopes `delta_m = (U_m - U_{m-1})/tau_m` for the second) so that the
//! `lambda = 0` steady state is reproduced exactly and rounding stays relative
//! to the deviation rather than to `u_0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{f, Accum};
use crate::mesh::GradedMesh;
use crate::ml::ml_e;
use crate::report::{ConvergenceReport, Metric};
use crate::weights::WeightKernel;
use crate::{Error, Result};

/// Which temporal scheme produced a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Piecewise-constant discontinuous Galerkin, for `alpha` in `(0, 1)`.
    Dg,
    /// Continuous piecewise-linear Petrov-Galerkin, for `alpha` in `(1, 2)`.
    Pg,
}

impl Scheme {
    /// Stable identifier used in file outputs.
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Dg => "dg",
            Scheme::Pg => "pg",
        }
    }

    /// The scheme that handles the given fractional order.
    pub fn for_alpha(alpha: f64) -> Result<Scheme> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Scheme::Dg)
        } else if alpha > 1.0 && alpha < 2.0 {
            Ok(Scheme::Pg)
        } else {
            Err(Error::Param {
                name: "alpha",
                value: alpha,
                need: "in (0, 1) or (1, 2)",
            })
        }
    }

    /// Exponent of the weight kernel the scheme integrates against:
    /// `1 - alpha` or `2 - alpha`.
    pub fn kernel_exponent(self, alpha: f64) -> f64 {
        match self {
            Scheme::Dg => 1.0 - alpha,
            Scheme::Pg => 2.0 - alpha,
        }
    }
}

/// A computed scalar trajectory on its mesh.
///
/// `node_values()[m]` holds `U_m` for `m = 1, ..., J` and the initial value
/// `u_0` at index 0.  For the DG scheme `U_m` is the constant value on
/// `(t_{m-1}, t_m]` (the solution jumps at `t = 0`); for the PG scheme the
/// values interpolate linearly.
#[derive(Clone, Debug)]
pub struct ScalarTrajectory {
    mesh: GradedMesh,
    scheme: Scheme,
    values: Vec<f64>,
}

impl ScalarTrajectory {
    #[inline]
    pub fn mesh(&self) -> &GradedMesh {
        &self.mesh
    }

    #[inline]
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    #[inline]
    pub fn initial_value(&self) -> f64 {
        self.values[0]
    }

    /// `[u_0, U_1, ..., U_J]`.
    #[inline]
    pub fn node_values(&self) -> &[f64] {
        &self.values
    }

    /// Left limit `U(t_m-)`, `1 <= m <= J` (equals the node value for PG).
    #[inline]
    pub fn left_limit(&self, m: usize) -> f64 {
        debug_assert!(1 <= m && m <= self.mesh.intervals());
        self.values[m]
    }

    #[inline]
    pub fn final_value(&self) -> f64 {
        self.values[self.mesh.intervals()]
    }

    /// Value at time `t` in `[0, T]`.  DG evaluates the left-continuous
    /// piecewise constant (with `u(0) = u_0`); PG interpolates linearly.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        match self.scheme {
            Scheme::Dg => {
                if t == 0.0 {
                    return Ok(self.values[0]);
                }
                let k = self.mesh.cell_containing(t)?;
                Ok(self.values[k])
            }
            Scheme::Pg => self.mesh.interp_linear(&self.values, t),
        }
    }
}

fn check_scalar_params(lambda: f64, u0: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Param {
            name: "lambda",
            value: lambda,
            need: "nonnegative and finite",
        });
    }
    if !u0.is_finite() {
        return Err(Error::Param {
            name: "u0",
            value: u0,
            need: "finite",
        });
    }
    Ok(())
}

/// March the DG scheme for `0 < alpha < 1`.
///
/// Step `m` solves, with `omega = tau_m^{1-alpha} / Gamma(2-alpha)` and
/// history differences `c_{m,j} > 0`,
///
/// ```text
/// (omega + lambda tau_m) U_m = omega u_0 + sum_{j<m} c_{m,j} (U_j - u_0),
/// ```
///
/// marched in the deviation `v_m = U_m - u_0`:
/// `(omega + lambda tau_m) v_m = sum_{j<m} c_{m,j} v_j - lambda tau_m u_0`.
pub fn dg_scalar_solve(
    mesh: &GradedMesh,
    alpha: f64,
    lambda: f64,
    u0: f64,
) -> Result<ScalarTrajectory> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Param {
            name: "alpha",
            value: alpha,
            need: "in (0, 1)",
        });
    }
    check_scalar_params(lambda, u0)?;
    let kernel = WeightKernel::new(mesh, 1.0 - alpha)?;
    let jn = mesh.intervals();
    let mut v = vec![0.0; jn + 1];
    let mut diff = vec![0.0; jn.saturating_sub(1)];
    for m in 1..=jn {
        let tau = mesh.step(m);
        let mut rhs = Accum::new();
        if m >= 2 {
            kernel.history_diff_row(m, &mut diff);
            for j in 1..m {
                rhs.add_prod(diff[j - 1], v[j]);
            }
        }
        rhs.add_prod(-lambda * tau, u0);
        v[m] = rhs.total() / (kernel.diagonal(m) + lambda * tau);
    }
    let mut values = v;
    values[0] = u0;
    for val in values.iter_mut().skip(1) {
        *val += u0;
    }
    Ok(ScalarTrajectory {
        mesh: mesh.clone(),
        scheme: Scheme::Dg,
        values,
    })
}

/// March the PG scheme for `1 < alpha < 2`.
///
/// Step `m` solves, with `kappa = tau_m^{2-alpha} / Gamma(3-alpha)`, slopes
/// `delta_j = (U_j - U_{j-1}) / tau_j`, and history differences
/// `c_{m,j} > 0`,
///
/// ```text
/// (kappa/tau_m + lambda tau_m/2) U_m
///     = (kappa/tau_m - lambda tau_m/2) U_{m-1} + sum_{j<m} c_{m,j} delta_j,
/// ```
///
/// marched in the slopes:
/// `(kappa + lambda tau_m^2/2) delta_m
///     = sum_{j<m} c_{m,j} delta_j - lambda tau_m U_{m-1}`.
pub fn pg_scalar_solve(
    mesh: &GradedMesh,
    alpha: f64,
    lambda: f64,
    u0: f64,
) -> Result<ScalarTrajectory> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Param {
            name: "alpha",
            value: alpha,
            need: "in (1, 2)",
        });
    }
    check_scalar_params(lambda, u0)?;
    let kernel = WeightKernel::new(mesh, 2.0 - alpha)?;
    let jn = mesh.intervals();
    let mut delta = vec![0.0; jn + 1];
    let mut values = vec![u0; jn + 1];
    let mut diff = vec![0.0; jn.saturating_sub(1)];
    for m in 1..=jn {
        let tau = mesh.step(m);
        let mut rhs = Accum::new();
        if m >= 2 {
            kernel.history_diff_row(m, &mut diff);
            for j in 1..m {
                rhs.add_prod(diff[j - 1], delta[j]);
            }
        }
        rhs.add_prod(-lambda * tau, values[m - 1]);
        delta[m] = rhs.total() / (kernel.diagonal(m) + 0.5 * lambda * tau * tau);
        values[m] = values[m - 1] + tau * delta[m];
    }
    Ok(ScalarTrajectory {
        mesh: mesh.clone(),
        scheme: Scheme::Pg,
        values,
    })
}

/// Exact solution `u_0 E_alpha(-lambda t^alpha)` of the scalar mode problem.
pub fn mode_solution(alpha: f64, lambda: f64, u0: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Param {
            name: "t",
            value: t,
            need: "nonnegative and finite",
        });
    }
    check_scalar_params(lambda, u0)?;
    Ok(u0 * ml_e(alpha, 1.0, -lambda * f::powf(t, alpha))?)
}

/// Number of equal sub-samples per interval used by [`Metric::SupTime`].
const SUP_SAMPLES: usize = 8;

/// Error of a scalar trajectory against the exact mode solution.
///
/// * [`Metric::MaxNode`]: max over `m = 1..J` of `|U(t_m-) - y(t_m)|`.
/// * [`Metric::SupTime`]: additionally samples `SUP_SAMPLES` equispaced
///   points inside every interval together with both one-sided limits at the
///   nodes (for DG the right limit at `t_{m-1}` is `U_m`, so the initial
///   jump's contribution `|U_1 - u_0|` is included).
pub fn scalar_error(
    traj: &ScalarTrajectory,
    alpha: f64,
    lambda: f64,
    metric: Metric,
) -> Result<f64> {
    let mesh = traj.mesh();
    let u0 = traj.initial_value();
    let vals = traj.node_values();
    let mut worst = 0.0f64;
    match metric {
        Metric::MaxNode => {
            for m in 1..=mesh.intervals() {
                let y = mode_solution(alpha, lambda, u0, mesh.node(m))?;
                worst = worst.max(f::abs(vals[m] - y));
            }
        }
        Metric::SupTime => {
            for m in 1..=mesh.intervals() {
                let (t0, t1) = (mesh.node(m - 1), mesh.node(m));
                for i in 0..=SUP_SAMPLES {
                    let frac = i as f64 / SUP_SAMPLES as f64;
                    let t = t0 + frac * (t1 - t0);
                    let num = match traj.scheme() {
                        Scheme::Dg => vals[m],
                        Scheme::Pg => vals[m - 1] + frac * (vals[m] - vals[m - 1]),
                    };
                    let y = mode_solution(alpha, lambda, u0, t)?;
                    worst = worst.max(f::abs(num - y));
                }
            }
        }
        _ => {
            return Err(Error::Param {
                name: "metric",
                value: f64::NAN,
                need: "a scalar metric (max-node or sup-time)",
            });
        }
    }
    Ok(worst)
}

/// Convergence study of the scalar scheme selected by `alpha` against the
/// exact mode solution, with `u_0 = 1`, over a ladder of interval counts.
pub fn scalar_error_study(
    alpha: f64,
    lambda: f64,
    sigma: f64,
    horizon: f64,
    j_list: &[usize],
    metric: Metric,
) -> Result<ConvergenceReport> {
    let scheme = Scheme::for_alpha(alpha)?;
    if j_list.is_empty() {
        return Err(Error::Size {
            name: "j_list",
            value: 0,
            need: "at least one interval count",
        });
    }
    for w in j_list.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Size {
                name: "j_list",
                value: w[1],
                need: "strictly increasing entries",
            });
        }
    }
    let mut report = ConvergenceReport::new(scheme, alpha, sigma, metric);
    for &jn in j_list {
        let mesh = GradedMesh::new(jn, sigma, horizon)?;
        let traj = match scheme {
            Scheme::Dg => dg_scalar_solve(&mesh, alpha, lambda, 1.0)?,
            Scheme::Pg => pg_scalar_solve(&mesh, alpha, lambda, 1.0)?,
        };
        let err = scalar_error(&traj, alpha, lambda, metric)?;
        report.push(jn, err);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::gamma;
    use proptest::prelude::*;

    fn mesh(j: usize, sigma: f64) -> GradedMesh {
        GradedMesh::new(j, sigma, 1.0).unwrap()
    }

    #[test]
    fn scheme_selection() {
        assert_eq!(Scheme::for_alpha(0.4).unwrap(), Scheme::Dg);
        assert_eq!(Scheme::for_alpha(1.6).unwrap(), Scheme::Pg);
        for bad in [0.0, 1.0, 2.0, -0.3, f64::NAN] {
            assert!(Scheme::for_alpha(bad).is_err());
        }
        assert_eq!(Scheme::Dg.label(), "dg");
        assert_eq!(Scheme::Pg.label(), "pg");
    }

    #[test]
    fn rejects_bad_parameters() {
        let m = mesh(4, 2.0);
        assert!(dg_scalar_solve(&m, 1.2, 1.0, 1.0).is_err());
        assert!(pg_scalar_solve(&m, 0.8, 1.0, 1.0).is_err());
        assert!(dg_scalar_solve(&m, 0.5, -1.0, 1.0).is_err());
        assert!(pg_scalar_solve(&m, 1.5, f64::NAN, 1.0).is_err());
        assert!(scalar_error_study(0.5, 1.0, 2.0, 1.0, &[], Metric::MaxNode).is_err());
        assert!(scalar_error_study(0.5, 1.0, 2.0, 1.0, &[16, 16], Metric::MaxNode).is_err());
        assert!(scalar_error_study(0.5, 1.0, 2.0, 1.0, &[16, 32], Metric::FieldSup).is_err());
    }

    #[test]
    fn lambda_zero_is_exactly_constant() {
        let m = mesh(37, 2.3);
        let u0 = 0.7;
        for traj in [
            dg_scalar_solve(&m, 0.6, 0.0, u0).unwrap(),
            pg_scalar_solve(&m, 1.4, 0.0, u0).unwrap(),
        ] {
            for &v in traj.node_values() {
                assert_eq!(v, u0);
            }
        }
    }

    // One implicit step on [0, 1] with alpha = 1/2, lambda = 1, u0 = 1:
    // omega = 1/Gamma(3/2) = 2/sqrt(pi) and U_1 = omega / (omega + 1).
    #[test]
    fn dg_single_step_closed_form() {
        let m = mesh(1, 1.0);
        let traj = dg_scalar_solve(&m, 0.5, 1.0, 1.0).unwrap();
        let omega = 1.0 / gamma(1.5);
        let expect = omega / (omega + 1.0);
        assert!((traj.final_value() - expect).abs() <= 1e-15);
        assert!((traj.final_value() - 0.530_158_904_268_618_9).abs() < 1e-12);
    }

    // One step with alpha = 3/2: kappa = 1/Gamma(3/2) and
    // U_1 = (kappa - 1/2) / (kappa + 1/2).
    #[test]
    fn pg_single_step_closed_form() {
        let m = mesh(1, 1.0);
        let traj = pg_scalar_solve(&m, 1.5, 1.0, 1.0).unwrap();
        let kappa = 1.0 / gamma(1.5);
        let expect = (kappa - 0.5) / (kappa + 0.5);
        assert!((traj.final_value() - expect).abs() <= 1e-15);
        assert!((traj.final_value() - 0.385_892_413_630_132_7).abs() < 1e-12);
    }

    // On a uniform mesh the DG recurrence coincides with the classical
    // collocation scheme built from a_i = (i+1)^{1-alpha} - i^{1-alpha}:
    //   tau^{-alpha}/Gamma(2-alpha) sum_{j=1}^m a_{m-j}(U_j - U_{j-1})
    //     + lambda U_m = 0.
    // The reference below implements that formula directly.
    fn l1_collocation(alpha: f64, lambda: f64, u0: f64, jn: usize) -> Vec<f64> {
        let tau = 1.0 / jn as f64;
        let coeff = f::powf(tau, -alpha) / gamma(2.0 - alpha);
        let a = |i: usize| -> f64 {
            f::powf(i as f64 + 1.0, 1.0 - alpha) - f::powf(i as f64, 1.0 - alpha)
        };
        let mut u = vec![u0; jn + 1];
        for m in 1..=jn {
            let mut hist = 0.0;
            for j in 1..m {
                hist += a(m - j) * (u[j] - u[j - 1]);
            }
            u[m] = (coeff * (a(0) * u[m - 1] - hist)) / (coeff * a(0) + lambda);
        }
        u
    }

    #[test]
    fn dg_matches_collocation_on_uniform_mesh() {
        let jn = 64;
        let m = mesh(jn, 1.0);
        // The sigma = 1 mesh must be uniform to rounding for the comparison
        // to make sense.
        for j in 0..=jn {
            assert!((m.node(j) - j as f64 / jn as f64).abs() <= 1e-14);
        }
        for alpha in [0.3, 0.7] {
            for lambda in [0.5, 3.0] {
                let traj = dg_scalar_solve(&m, alpha, lambda, 1.0).unwrap();
                let oracle = l1_collocation(alpha, lambda, 1.0, jn);
                for mm in 1..=jn {
                    let got = traj.node_values()[mm];
                    let want = oracle[mm];
                    assert!(
                        (got - want).abs() <= 1e-11 * want.abs().max(1.0),
                        "alpha={alpha} lambda={lambda} m={mm}: {got} vs {want}"
                    );
                }
            }
        }
    }

    // Uniform-mesh reference for the PG recurrence, written in the
    // non-rearranged prefix form: with slopes delta_j and
    //   P_m = sum_{j<=m} delta_j [(t_m-t_{j-1})^{2-alpha} - (t_m-t_j)^{2-alpha}]
    //         / Gamma(3-alpha),
    // the step solves (P_m - P_{m-1})/tau + lambda (U_m + U_{m-1})/2 = 0.
    fn pg_prefix_reference(alpha: f64, lambda: f64, u0: f64, jn: usize) -> Vec<f64> {
        let p = 2.0 - alpha;
        let inv_g = 1.0 / gamma(3.0 - alpha);
        let tau = 1.0 / jn as f64;
        let node = |j: usize| j as f64 * tau;
        let kap = |m: usize, j: usize| {
            (f::powf(node(m) - node(j - 1), p) - f::powf(node(m) - node(j), p)) * inv_g
        };
        let mut delta = vec![0.0; jn + 1];
        let mut u = vec![u0; jn + 1];
        let mut prefix_prev = 0.0;
        for m in 1..=jn {
            let mut hist = 0.0;
            for j in 1..m {
                hist += delta[j] * kap(m, j);
            }
            delta[m] = ((prefix_prev - hist) / tau - lambda * u[m - 1])
                / (kap(m, m) / tau + 0.5 * lambda * tau);
            u[m] = u[m - 1] + tau * delta[m];
            prefix_prev = hist + delta[m] * kap(m, m);
        }
        u
    }

    #[test]
    fn pg_matches_prefix_reference_on_uniform_mesh() {
        let jn = 64;
        let m = mesh(jn, 1.0);
        for alpha in [1.3, 1.7] {
            for lambda in [0.5, 3.0] {
                let traj = pg_scalar_solve(&m, alpha, lambda, 1.0).unwrap();
                let oracle = pg_prefix_reference(alpha, lambda, 1.0, jn);
                for mm in 1..=jn {
                    let got = traj.node_values()[mm];
                    let want = oracle[mm];
                    assert!(
                        (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                        "alpha={alpha} lambda={lambda} m={mm}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn dg_monotone_decay() {
        let m = mesh(200, 3.0);
        let traj = dg_scalar_solve(&m, 0.4, 10.0, 1.0).unwrap();
        let v = traj.node_values();
        assert!(v[1] < v[0]);
        for mm in 2..=200 {
            assert!(v[mm] < v[mm - 1], "m={mm}");
            assert!(v[mm] > 0.0);
        }
    }

    proptest! {
        // The DG solution obeys 0 < U_J <= ... <= U_1 <= u_0 for any
        // admissible parameters; rounding slack stays at the u_0 scale.
        #[test]
        fn dg_decay_invariant(
            alpha in 0.05f64..0.95,
            lambda in 0.0f64..50.0,
            sigma in 1.0f64..4.0,
            u0 in 0.1f64..2.0,
        ) {
            let m = mesh(48, sigma);
            let traj = dg_scalar_solve(&m, alpha, lambda, u0).unwrap();
            let v = traj.node_values();
            for mm in 1..=48usize {
                prop_assert!(v[mm] > 0.0);
                prop_assert!(v[mm] <= v[mm - 1] + 1e-14 * u0);
            }
        }
    }

    #[test]
    fn mode_solution_basics() {
        assert_eq!(mode_solution(0.5, 3.0, 2.5, 0.0).unwrap(), 2.5);
        let a = mode_solution(0.5, 1.0, 1.0, 0.25).unwrap();
        let b = mode_solution(0.5, 1.0, 1.0, 1.0).unwrap();
        assert!(0.0 < b && b < a && a < 1.0);
        assert!(mode_solution(0.5, 1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn sup_time_dominates_max_node() {
        let m = mesh(128, 2.0);
        let traj = dg_scalar_solve(&m, 0.5, 1.0, 1.0).unwrap();
        let e_node = scalar_error(&traj, 0.5, 1.0, Metric::MaxNode).unwrap();
        let e_sup = scalar_error(&traj, 0.5, 1.0, Metric::SupTime).unwrap();
        assert!(e_sup >= e_node);
    }

    // Graded-mesh orders for the DG scheme at alpha = 1/2: the nodal error
    // decays like J^{-min(sigma alpha, 2 - alpha)}, so sigma = 2 gives first
    // order while sigma = 1 is limited to 1/2.
    #[test]
    fn dg_observed_orders() {
        let js = [64, 128, 256, 512, 1024];
        let rep = scalar_error_study(0.5, 1.0, 2.0, 1.0, &js, Metric::MaxNode).unwrap();
        let order = rep.last_order().unwrap();
        assert!((order - 1.0).abs() < 0.1, "sigma=2 order {order}");
        let rep = scalar_error_study(0.5, 1.0, 1.0, 1.0, &js, Metric::MaxNode).unwrap();
        let order = rep.last_order().unwrap();
        assert!((order - 0.5).abs() < 0.1, "sigma=1 order {order}");
    }

    // PG at alpha = 3/2 with the order-optimal grading sigma = 2(3-alpha)/alpha
    // = 2 converges at rate 3 - alpha = 3/2 in the nodal error.
    #[test]
    fn pg_observed_order() {
        let js = [64, 128, 256, 512, 1024];
        let rep = scalar_error_study(1.5, 1.0, 2.0, 1.0, &js, Metric::MaxNode).unwrap();
        let order = rep.last_order().unwrap();
        assert!((order - 1.5).abs() < 0.15, "order {order}");
    }
}
