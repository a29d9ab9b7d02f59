//! Full space-time discretizations on the P1 space: Galerkin time stepping
//! applied to the spatially discrete problem `D^alpha (U - u_0) + A_h U = 0`,
//! with two interchangeable backends and the error metrics the convergence
//! experiments report.
//!
//! * [`Backend::Direct`] marches coefficient vectors, solving one symmetric
//!   positive definite tridiagonal system per step and keeping the full
//!   history of states (the fractional operator is nonlocal in time).
//! * [`Backend::Spectral`] expands the initial datum in the generalized
//!   eigenbasis `K v_n = lambda_n M v_n` and marches every mode with the
//!   scalar recurrences of [`crate::stepper`], sharing one weight-table row
//!   per step across all modes.  States are kept as eigen-coefficients —
//!   the basis is M-orthonormal, so L2 norms are plain Euclidean norms
//!   there and nodal coefficients are only materialized on request.
//!
//! Both backends march deviations (DG) or slopes (PG) like the scalar
//! steppers, so a zero spatial operator reproduces the initial datum exactly
//! and rounding stays relative to the deviation.

use alloc::vec;
use alloc::vec::Vec;

use crate::fem::FemSpace;
use crate::linalg::{solve_spd_tridiag, SymTridiag};
use crate::math::{comp_dot, f};
use crate::mesh::GradedMesh;
use crate::report::{ConvergenceReport, Metric, ReferenceDescriptor};
use crate::stepper::Scheme;
use crate::weights::WeightKernel;
use crate::{Error, Result};

/// How a field solve is carried out.  Results agree to roundoff; see the
/// module docs for the trade-offs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Per-mode scalar recurrences in the generalized eigenbasis.  Requires
    /// [`FemSpace::eigen_decompose`] to have run on the space.
    Spectral,
    /// Tridiagonal solves on the FEM coefficients, full state history.
    Direct,
}

impl Backend {
    /// Stable identifier used in file outputs.
    pub fn label(self) -> &'static str {
        match self {
            Backend::Spectral => "spectral",
            Backend::Direct => "direct",
        }
    }
}

/// Storage of per-time-index states: FEM coefficients (direct backend) or
/// eigen-coefficients (spectral backend).  Either way the width is `dof` and
/// row `m` of `0..=J` belongs to time index `m`.
#[derive(Clone, Debug)]
enum FieldStates {
    Nodal(Vec<f64>),
    Modal(Vec<f64>),
}

/// A computed space-time solution.
///
/// Row `m` holds the state at time index `m`: the DG solution is constant on
/// each `(t_{m-1}, t_m]` with value row `m`, the PG solution interpolates the
/// rows linearly in time.  Row 0 is the initial datum (for DG it is the
/// prescribed initial value, not a trajectory value — the scheme jumps at
/// `t = 0`).
#[derive(Clone, Debug)]
pub struct FieldTrajectory<'a> {
    mesh: GradedMesh,
    space: &'a FemSpace,
    scheme: Scheme,
    /// The exact initial FEM coefficients as passed in (row 0 of `states`
    /// may be its eigen-expansion, which reproduces it only to roundoff).
    initial: Vec<f64>,
    states: FieldStates,
}

impl<'a> FieldTrajectory<'a> {
    #[inline]
    pub fn mesh(&self) -> &GradedMesh {
        &self.mesh
    }

    #[inline]
    pub fn space(&self) -> &FemSpace {
        self.space
    }

    #[inline]
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    #[inline]
    pub fn backend(&self) -> Backend {
        match self.states {
            FieldStates::Nodal(_) => Backend::Direct,
            FieldStates::Modal(_) => Backend::Spectral,
        }
    }

    /// The initial FEM coefficient vector, exactly as prescribed.
    #[inline]
    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    fn width(&self) -> usize {
        self.space.dof()
    }

    fn row(&self, m: usize) -> &[f64] {
        let w = self.width();
        let buf = match &self.states {
            FieldStates::Nodal(v) => v,
            FieldStates::Modal(v) => v,
        };
        &buf[m * w..(m + 1) * w]
    }

    /// Write the FEM coefficients of the state at time index `m` (`0..=J`)
    /// into `out`.  Spectral states are recombined over ascending mode index,
    /// so the output is identical across runs.
    pub fn state_nodal(&self, m: usize, out: &mut [f64]) -> Result<()> {
        let w = self.width();
        if out.len() != w {
            return Err(Error::Size {
                name: "out.len()",
                value: out.len(),
                need: "space dof",
            });
        }
        if m > self.mesh.intervals() {
            return Err(Error::Size {
                name: "m",
                value: m,
                need: "at most the interval count",
            });
        }
        if m == 0 {
            out.copy_from_slice(&self.initial);
            return Ok(());
        }
        match &self.states {
            FieldStates::Nodal(_) => out.copy_from_slice(self.row(m)),
            FieldStates::Modal(_) => {
                self.materialize(self.row(m), out);
            }
        }
        Ok(())
    }

    /// `out = sum_n modal[n] * v_n` over ascending `n`.
    fn materialize(&self, modal: &[f64], out: &mut [f64]) {
        let eig = self
            .space
            .eigenpairs()
            .expect("modal states exist only for decomposed spaces");
        out.fill(0.0);
        for (n, y) in modal.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(eig.vector(n)) {
                *o += y * v;
            }
        }
    }

    /// L2(0,1) norm of the difference between this trajectory's row `m` and
    /// the row `other_row` of `other` (given in `other`'s own representation,
    /// so callers can pass interpolated rows).  Uses scratch space from the
    /// caller to stay allocation-free in sampling loops.
    fn diff_norm(
        &self,
        m: usize,
        other: &FieldTrajectory<'_>,
        other_row: &[f64],
        scratch: &mut [f64],
        scratch2: &mut [f64],
    ) -> f64 {
        match (&self.states, &other.states) {
            (FieldStates::Modal(_), FieldStates::Modal(_)) => {
                // M-orthonormal basis: the L2 norm is the Euclidean norm of
                // the mode coefficients.
                let mut s = 0.0;
                for (a, b) in self.row(m).iter().zip(other_row) {
                    s += (a - b) * (a - b);
                }
                f::sqrt(s)
            }
            (FieldStates::Nodal(_), FieldStates::Nodal(_)) => {
                for ((d, a), b) in scratch.iter_mut().zip(self.row(m)).zip(other_row) {
                    *d = a - b;
                }
                self.space.l2_norm(scratch).expect("widths checked")
            }
            _ => {
                match &self.states {
                    FieldStates::Nodal(_) => scratch.copy_from_slice(self.row(m)),
                    FieldStates::Modal(_) => self.materialize(self.row(m), scratch),
                }
                match &other.states {
                    FieldStates::Nodal(_) => scratch2.copy_from_slice(other_row),
                    FieldStates::Modal(_) => other.materialize(other_row, scratch2),
                }
                for (d, b) in scratch.iter_mut().zip(scratch2.iter()) {
                    *d -= b;
                }
                self.space.l2_norm(scratch).expect("widths checked")
            }
        }
    }
}

fn check_u0(space: &FemSpace, u0: &[f64]) -> Result<()> {
    if u0.len() != space.dof() {
        return Err(Error::Size {
            name: "u0.len()",
            value: u0.len(),
            need: "space dof",
        });
    }
    Ok(())
}

/// Solve the DG-in-time discretization for `0 < alpha < 1`.
///
/// Step `m` solves `(omega_m M + tau_m K) U_m = omega_m M u_0
/// + M sum_{j<m} c_{m,j} (U_j - u_0)` with `omega_m = tau_m^{1-alpha} /
/// Gamma(2-alpha)`, marched in the deviations `U_m - u_0`.
pub fn solve_dg<'a>(
    space: &'a FemSpace,
    mesh: &GradedMesh,
    alpha: f64,
    u0: &[f64],
    backend: Backend,
) -> Result<FieldTrajectory<'a>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Param {
            name: "alpha",
            value: alpha,
            need: "in (0, 1)",
        });
    }
    check_u0(space, u0)?;
    let states = match backend {
        Backend::Direct => FieldStates::Nodal(direct_march(
            space.mass(),
            space.stiffness(),
            mesh,
            Scheme::Dg,
            alpha,
            u0,
        )?),
        Backend::Spectral => FieldStates::Modal(spectral_march(
            space,
            mesh,
            Scheme::Dg,
            alpha,
            u0,
        )?),
    };
    Ok(FieldTrajectory {
        mesh: mesh.clone(),
        space,
        scheme: Scheme::Dg,
        initial: u0.to_vec(),
        states,
    })
}

/// Solve the PG-in-time discretization for `1 < alpha < 2`.
///
/// Step `m` solves `((kappa_m/tau_m) M + (tau_m/2) K) U_m =
/// ((kappa_m/tau_m) M - (tau_m/2) K) U_{m-1} + M sum_{j<m} c_{m,j} delta_j`
/// with `kappa_m = tau_m^{2-alpha} / Gamma(3-alpha)`, marched in the slopes
/// `delta_m = (U_m - U_{m-1}) / tau_m`.
pub fn solve_pg<'a>(
    space: &'a FemSpace,
    mesh: &GradedMesh,
    alpha: f64,
    u0: &[f64],
    backend: Backend,
) -> Result<FieldTrajectory<'a>> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Param {
            name: "alpha",
            value: alpha,
            need: "in (1, 2)",
        });
    }
    check_u0(space, u0)?;
    let states = match backend {
        Backend::Direct => FieldStates::Nodal(direct_march(
            space.mass(),
            space.stiffness(),
            mesh,
            Scheme::Pg,
            alpha,
            u0,
        )?),
        Backend::Spectral => FieldStates::Modal(spectral_march(
            space,
            mesh,
            Scheme::Pg,
            alpha,
            u0,
        )?),
    };
    Ok(FieldTrajectory {
        mesh: mesh.clone(),
        space,
        scheme: Scheme::Pg,
        initial: u0.to_vec(),
        states,
    })
}

/// Direct backend: tridiagonal solves on FEM coefficients.  Returns the
/// flattened `(J+1) x dof` state rows.  Kept generic over the matrices so
/// tests can pass a zero stiffness (the lambda = 0 hook).
fn direct_march(
    mass: &SymTridiag,
    stiffness: &SymTridiag,
    mesh: &GradedMesh,
    scheme: Scheme,
    alpha: f64,
    u0: &[f64],
) -> Result<Vec<f64>> {
    let kernel = WeightKernel::new(mesh, scheme.kernel_exponent(alpha))?;
    let jn = mesh.intervals();
    let dof = u0.len();
    // `work` holds deviations (DG) or slopes (PG), row per time index.
    let mut work = vec![0.0; (jn + 1) * dof];
    let mut states = vec![0.0; (jn + 1) * dof];
    states[..dof].copy_from_slice(u0);
    let mut diff = vec![0.0; jn.saturating_sub(1)];
    let mut s = vec![0.0; dof];
    let mut rhs = vec![0.0; dof];
    let mut ku = vec![0.0; dof];
    let mut system = SymTridiag::new(vec![0.0; dof], vec![0.0; dof.saturating_sub(1)])?;
    if let Scheme::Dg = scheme {
        stiffness.matvec(u0, &mut ku);
    }
    for m in 1..=jn {
        let tau = mesh.step(m);
        let diag = kernel.diagonal(m);
        if m >= 2 {
            kernel.history_diff_row(m, &mut diff);
        }
        s.fill(0.0);
        for j in 1..m {
            let c = diff[j - 1];
            let row = &work[j * dof..(j + 1) * dof];
            for (si, wi) in s.iter_mut().zip(row) {
                *si += c * wi;
            }
        }
        mass.matvec(&s, &mut rhs);
        match scheme {
            Scheme::Dg => {
                // (diag M + tau K) V_m = M s - tau K u0.
                for i in 0..dof {
                    rhs[i] -= tau * ku[i];
                    system.diag[i] = diag * mass.diag[i] + tau * stiffness.diag[i];
                }
                for i in 0..dof - 1 {
                    system.off[i] = diag * mass.off[i] + tau * stiffness.off[i];
                }
                solve_spd_tridiag(&system, &mut rhs)?;
                let (head, tail) = states.split_at_mut(m * dof);
                let u_prev = &head[..dof]; // u0 row
                for i in 0..dof {
                    work[m * dof + i] = rhs[i];
                    tail[i] = u_prev[i] + rhs[i];
                }
            }
            Scheme::Pg => {
                // (diag M + (tau^2/2) K) delta_m = M s - tau K U_{m-1}.
                stiffness.matvec(&states[(m - 1) * dof..m * dof], &mut ku);
                let half = 0.5 * tau * tau;
                for i in 0..dof {
                    rhs[i] -= tau * ku[i];
                    system.diag[i] = diag * mass.diag[i] + half * stiffness.diag[i];
                }
                for i in 0..dof - 1 {
                    system.off[i] = diag * mass.off[i] + half * stiffness.off[i];
                }
                solve_spd_tridiag(&system, &mut rhs)?;
                let (head, tail) = states.split_at_mut(m * dof);
                let u_prev = &head[(m - 1) * dof..];
                for i in 0..dof {
                    work[m * dof + i] = rhs[i];
                    tail[i] = u_prev[i] + tau * rhs[i];
                }
            }
        }
    }
    Ok(states)
}

/// Spectral backend: march every eigenmode with the scalar recurrence,
/// sharing each step's weight row across modes.  Returns the flattened
/// `(J+1) x n_modes` rows of mode values (not deviations).
fn spectral_march(
    space: &FemSpace,
    mesh: &GradedMesh,
    scheme: Scheme,
    alpha: f64,
    u0: &[f64],
) -> Result<Vec<f64>> {
    let eig = space.eigenpairs().ok_or(Error::Size {
        name: "space.eigenpairs()",
        value: 0,
        need: "eigen_decompose() before spectral solves",
    })?;
    let kernel = WeightKernel::new(mesh, scheme.kernel_exponent(alpha))?;
    let jn = mesh.intervals();
    let nm = eig.n;
    // Mode loads g_n = v_n^T M u0.
    let mut mu0 = vec![0.0; nm];
    space.mass().matvec(u0, &mut mu0);
    let g: Vec<f64> = (0..nm).map(|n| comp_dot(eig.vector(n), &mu0)).collect();

    // `work` rows: deviations v (DG) or slopes delta (PG).
    let mut work = vec![0.0; (jn + 1) * nm];
    let mut diff = vec![0.0; jn.saturating_sub(1)];
    let mut s = vec![0.0; nm];
    // PG value rows accumulate separately (slopes must stay exact; deriving
    // them back from values would divide rounding by tau_1 ~ J^{-sigma}).
    let mut values = match scheme {
        Scheme::Dg => Vec::new(),
        Scheme::Pg => {
            let mut v = vec![0.0; (jn + 1) * nm];
            v[..nm].copy_from_slice(&g);
            v
        }
    };
    for m in 1..=jn {
        let tau = mesh.step(m);
        let diag = kernel.diagonal(m);
        if m >= 2 {
            kernel.history_diff_row(m, &mut diff);
        }
        s.fill(0.0);
        for j in 1..m {
            let c = diff[j - 1];
            let row = &work[j * nm..(j + 1) * nm];
            for (si, wi) in s.iter_mut().zip(row) {
                *si += c * wi;
            }
        }
        match scheme {
            Scheme::Dg => {
                for n in 0..nm {
                    let lam = eig.values[n];
                    work[m * nm + n] = (s[n] - lam * tau * g[n]) / (diag + lam * tau);
                }
            }
            Scheme::Pg => {
                for n in 0..nm {
                    let lam = eig.values[n];
                    let u_prev = values[(m - 1) * nm + n];
                    let d = (s[n] - lam * tau * u_prev) / (diag + 0.5 * lam * tau * tau);
                    work[m * nm + n] = d;
                    values[m * nm + n] = u_prev + tau * d;
                }
            }
        }
    }
    Ok(match scheme {
        Scheme::Dg => {
            // Mode values are deviations plus loads.
            for m in 0..=jn {
                for n in 0..nm {
                    work[m * nm + n] += g[n];
                }
            }
            work
        }
        Scheme::Pg => values,
    })
}

fn check_pair(
    u: &FieldTrajectory<'_>,
    ustar: &FieldTrajectory<'_>,
    scheme: Scheme,
) -> Result<()> {
    if u.space.n_cells() != ustar.space.n_cells() {
        return Err(Error::Size {
            name: "ustar.space.n_cells()",
            value: ustar.space.n_cells(),
            need: "the same spatial mesh as u",
        });
    }
    if u.scheme != scheme || ustar.scheme != scheme {
        return Err(Error::Param {
            name: "scheme",
            value: f64::NAN,
            need: match scheme {
                Scheme::Dg => "DG trajectories on both sides",
                Scheme::Pg => "PG trajectories on both sides",
            },
        });
    }
    if u.mesh.horizon() != ustar.mesh.horizon() {
        return Err(Error::Param {
            name: "ustar horizon",
            value: ustar.mesh.horizon(),
            need: "the same time horizon as u",
        });
    }
    Ok(())
}

/// Interior sample points per coarse interval for [`error_e1`], in addition
/// to the node left-limit.
const E1_INTERIOR_SAMPLES: usize = 4;

/// `E_1 = sup_t ||U(t) - U*(t)||_{L2}` for DG trajectories, both evaluated
/// as left-continuous piecewise constants.
///
/// The sup is discretized by the coarse-mesh node left-limits plus
/// [`E1_INTERIOR_SAMPLES`] interior points per coarse interval; the
/// reference's containing cell is found by binary search on its own node
/// array.  `U*` is typically a fine-mesh solve of the same problem, so the
/// shared spatial error cancels and `E_1` isolates the temporal error.
pub fn error_e1(u: &FieldTrajectory<'_>, ustar: &FieldTrajectory<'_>) -> Result<f64> {
    check_pair(u, ustar, Scheme::Dg)?;
    let dof = u.width();
    let mut scratch = vec![0.0; dof];
    let mut scratch2 = vec![0.0; dof];
    let mut worst = 0.0f64;
    let per = E1_INTERIOR_SAMPLES + 1;
    for m in 1..=u.mesh.intervals() {
        let (t0, t1) = (u.mesh.node(m - 1), u.mesh.node(m));
        for i in 1..=per {
            let t = if i == per {
                t1
            } else {
                t0 + (i as f64 / per as f64) * (t1 - t0)
            };
            let k = ustar.mesh.cell_containing(t)?;
            let d = u.diff_norm(m, ustar, ustar.row(k), &mut scratch, &mut scratch2);
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

/// `E_2 = max_{1<=m<=J} ||U(t_m) - U*(t_m)||_{L2}` for PG trajectories.
///
/// The reference is evaluated at the coarse nodes by linear interpolation on
/// its own mesh, which is exact for the piecewise-linear `U*`.
pub fn error_e2(u: &FieldTrajectory<'_>, ustar: &FieldTrajectory<'_>) -> Result<f64> {
    check_pair(u, ustar, Scheme::Pg)?;
    let dof = u.width();
    let mut blended = vec![0.0; dof];
    let mut scratch = vec![0.0; dof];
    let mut scratch2 = vec![0.0; dof];
    let mut worst = 0.0f64;
    for m in 1..=u.mesh.intervals() {
        let t = u.mesh.node(m);
        let k = ustar.mesh.cell_containing(t)?;
        let (s0, s1) = (ustar.mesh.node(k - 1), ustar.mesh.node(k));
        let theta = (t - s0) / (s1 - s0);
        for ((b, lo), hi) in blended
            .iter_mut()
            .zip(ustar.row(k - 1))
            .zip(ustar.row(k))
        {
            *b = lo + theta * (hi - lo);
        }
        let d = u.diff_norm(m, ustar, &blended, &mut scratch, &mut scratch2);
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Reference-mesh grading exponent matched to the scheme's maximal rate:
/// `2/alpha` (DG) or `2(3-alpha)/alpha` (PG), so the reference solve
/// converges at its best possible order.
pub fn default_reference_grading(scheme: Scheme, alpha: f64) -> f64 {
    match scheme {
        Scheme::Dg => 2.0 / alpha,
        Scheme::Pg => 2.0 * (3.0 - alpha) / alpha,
    }
}

/// Inputs of a field convergence study: one fixed space and initial datum,
/// a list of coarse grid sizes, and one fine reference solve.
#[derive(Clone, Debug)]
pub struct FieldStudy<'a> {
    pub space: &'a FemSpace,
    pub alpha: f64,
    /// Grading exponent of the coarse meshes.
    pub sigma: f64,
    pub horizon: f64,
    /// Initial FEM coefficients (shared by coarse and reference solves).
    pub initial: &'a [f64],
    /// Coarse interval counts, strictly increasing.
    pub grids: &'a [usize],
    pub reference_intervals: usize,
    /// Grading exponent of the reference mesh.
    pub reference_sigma: f64,
    pub backend: Backend,
    /// [`Metric::FieldSup`] (DG) or [`Metric::FieldNodes`] (PG).
    pub metric: Metric,
}

/// Run the convergence study: solve the reference once, then each coarse
/// grid, and report errors with observed orders.
pub fn field_error_study(study: &FieldStudy<'_>) -> Result<ConvergenceReport> {
    let reference = field_reference(study)?;
    field_error_study_against(study, &reference)
}

fn study_scheme(study: &FieldStudy<'_>) -> Result<Scheme> {
    let scheme = match study.metric {
        Metric::FieldSup => Scheme::Dg,
        Metric::FieldNodes => Scheme::Pg,
        _ => {
            return Err(Error::Param {
                name: "metric",
                value: f64::NAN,
                need: "a field metric (E1 or E2)",
            });
        }
    };
    if Scheme::for_alpha(study.alpha)? != scheme {
        return Err(Error::Param {
            name: "alpha",
            value: study.alpha,
            need: "an order the chosen metric's scheme discretizes",
        });
    }
    if study.grids.is_empty() {
        return Err(Error::Size {
            name: "grids.len()",
            value: 0,
            need: "at least 1",
        });
    }
    for w in study.grids.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Size {
                name: "grids",
                value: w[1],
                need: "strictly increasing interval counts",
            });
        }
    }
    let last = *study.grids.last().expect("nonempty");
    if study.reference_intervals <= last {
        return Err(Error::Size {
            name: "reference_intervals",
            value: study.reference_intervals,
            need: "more intervals than the finest coarse grid",
        });
    }
    Ok(scheme)
}

/// Solve just the reference problem of a study. Useful when several studies
/// (for example a sweep over grading exponents) share one reference solve,
/// which dominates the total cost.
pub fn field_reference<'a>(study: &FieldStudy<'a>) -> Result<FieldTrajectory<'a>> {
    let scheme = study_scheme(study)?;
    let mesh = GradedMesh::new(
        study.reference_intervals,
        study.reference_sigma,
        study.horizon,
    )?;
    match scheme {
        Scheme::Dg => solve_dg(study.space, &mesh, study.alpha, study.initial, study.backend),
        Scheme::Pg => solve_pg(study.space, &mesh, study.alpha, study.initial, study.backend),
    }
}

/// Run the coarse half of a convergence study against an already computed
/// reference trajectory. The reference must match the study's declared
/// reference mesh and scheme.
pub fn field_error_study_against(
    study: &FieldStudy<'_>,
    reference: &FieldTrajectory<'_>,
) -> Result<ConvergenceReport> {
    let scheme = study_scheme(study)?;
    if reference.scheme() != scheme
        || reference.mesh().intervals() != study.reference_intervals
        || reference.mesh().sigma() != study.reference_sigma
    {
        return Err(Error::Size {
            name: "reference",
            value: reference.mesh().intervals(),
            need: "a trajectory solved on the study's declared reference mesh",
        });
    }

    let mut report = ConvergenceReport::new(scheme, study.alpha, study.sigma, study.metric)
        .with_reference(ReferenceDescriptor {
            intervals: study.reference_intervals,
            sigma: study.reference_sigma,
        });
    for &grid in study.grids {
        let mesh = GradedMesh::new(grid, study.sigma, study.horizon)?;
        let traj = match scheme {
            Scheme::Dg => solve_dg(study.space, &mesh, study.alpha, study.initial, study.backend)?,
            Scheme::Pg => solve_pg(study.space, &mesh, study.alpha, study.initial, study.backend)?,
        };
        let err = match scheme {
            Scheme::Dg => error_e1(&traj, reference)?,
            Scheme::Pg => error_e2(&traj, reference)?,
        };
        report.push(grid, err);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_space;
    use crate::stepper::{dg_scalar_solve, pg_scalar_solve};

    fn decomposed_space(n_cells: usize) -> FemSpace {
        let mut space = build_space(n_cells).unwrap();
        space.eigen_decompose().unwrap();
        space
    }

    fn datum(space: &FemSpace) -> Vec<f64> {
        space
            .l2_project(|x: f64| x.powf(0.51) * (1.0 - x))
            .unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        let space = decomposed_space(8);
        let mesh = GradedMesh::new(4, 2.0, 1.0).unwrap();
        let u0 = vec![1.0; space.dof()];
        assert!(solve_dg(&space, &mesh, 1.5, &u0, Backend::Direct).is_err());
        assert!(solve_pg(&space, &mesh, 0.5, &u0, Backend::Direct).is_err());
        assert!(solve_dg(&space, &mesh, 0.5, &u0[1..], Backend::Direct).is_err());

        let raw = build_space(8).unwrap();
        assert!(solve_dg(&raw, &mesh, 0.5, &u0, Backend::Spectral).is_err());
        assert!(solve_dg(&raw, &mesh, 0.5, &u0, Backend::Direct).is_ok());

        let study = FieldStudy {
            space: &space,
            alpha: 0.5,
            sigma: 2.0,
            horizon: 1.0,
            initial: &u0,
            grids: &[8, 8],
            reference_intervals: 32,
            reference_sigma: 4.0,
            backend: Backend::Spectral,
            metric: Metric::FieldSup,
        };
        assert!(field_error_study(&study).is_err());
        let study = FieldStudy {
            grids: &[4, 8],
            metric: Metric::MaxNode,
            ..study
        };
        assert!(field_error_study(&study).is_err());
        let study = FieldStudy {
            metric: Metric::FieldNodes,
            ..study
        };
        assert!(field_error_study(&study).is_err()); // alpha 0.5 is not PG
        let study = FieldStudy {
            metric: Metric::FieldSup,
            reference_intervals: 8,
            ..study
        };
        assert!(field_error_study(&study).is_err());
    }

    #[test]
    fn zero_datum_stays_zero() {
        let space = decomposed_space(8);
        let mesh = GradedMesh::new(12, 2.0, 1.0).unwrap();
        let u0 = vec![0.0; space.dof()];
        let mut out = vec![0.0; space.dof()];
        for traj in [
            solve_dg(&space, &mesh, 0.5, &u0, Backend::Direct).unwrap(),
            solve_dg(&space, &mesh, 0.5, &u0, Backend::Spectral).unwrap(),
            solve_pg(&space, &mesh, 1.5, &u0, Backend::Direct).unwrap(),
            solve_pg(&space, &mesh, 1.5, &u0, Backend::Spectral).unwrap(),
        ] {
            for m in 0..=mesh.intervals() {
                traj.state_nodal(m, &mut out).unwrap();
                assert!(out.iter().all(|&x| x == 0.0));
            }
        }
    }

    #[test]
    fn initial_state_is_exact() {
        let space = decomposed_space(16);
        let mesh = GradedMesh::new(8, 3.0, 1.0).unwrap();
        let u0 = datum(&space);
        let mut out = vec![0.0; space.dof()];
        for traj in [
            solve_dg(&space, &mesh, 0.3, &u0, Backend::Direct).unwrap(),
            solve_dg(&space, &mesh, 0.3, &u0, Backend::Spectral).unwrap(),
            solve_pg(&space, &mesh, 1.3, &u0, Backend::Direct).unwrap(),
            solve_pg(&space, &mesh, 1.3, &u0, Backend::Spectral).unwrap(),
        ] {
            traj.state_nodal(0, &mut out).unwrap();
            assert_eq!(out, u0);
        }
    }

    /// With an eigenvector as initial datum the field solve collapses to the
    /// scalar recurrence for its eigenvalue times the eigenvector.
    #[test]
    fn eigenmode_datum_matches_scalar() {
        let space = decomposed_space(16);
        let eig = space.eigenpairs().unwrap().clone();
        let mesh = GradedMesh::new(32, 2.0, 1.0).unwrap();
        let mode = 2;
        let u0 = eig.vector(mode).to_vec();
        let lam = eig.values[mode];
        let mut out = vec![0.0; space.dof()];

        let scalar = dg_scalar_solve(&mesh, 0.4, lam, 1.0).unwrap();
        for backend in [Backend::Direct, Backend::Spectral] {
            let traj = solve_dg(&space, &mesh, 0.4, &u0, backend).unwrap();
            for m in 1..=mesh.intervals() {
                traj.state_nodal(m, &mut out).unwrap();
                let y = scalar.node_values()[m];
                for (o, v) in out.iter().zip(&u0) {
                    assert!(
                        (o - y * v).abs() <= 1e-13 * y.abs().max(1.0),
                        "{:?} m={m}: {o} vs {}",
                        backend,
                        y * v
                    );
                }
            }
        }

        let scalar = pg_scalar_solve(&mesh, 1.5, lam, 1.0).unwrap();
        for backend in [Backend::Direct, Backend::Spectral] {
            let traj = solve_pg(&space, &mesh, 1.5, &u0, backend).unwrap();
            for m in 1..=mesh.intervals() {
                traj.state_nodal(m, &mut out).unwrap();
                let y = scalar.node_values()[m];
                for (o, v) in out.iter().zip(&u0) {
                    assert!(
                        (o - y * v).abs() <= 1e-13 * y.abs().max(1.0),
                        "{:?} m={m}: {o} vs {}",
                        backend,
                        y * v
                    );
                }
            }
        }
    }

    #[test]
    fn backends_agree() {
        let space = decomposed_space(64);
        let u0 = datum(&space);
        let mesh = GradedMesh::new(128, 2.0, 1.0).unwrap();
        let mut a = vec![0.0; space.dof()];
        let mut b = vec![0.0; space.dof()];
        let mut d = vec![0.0; space.dof()];
        for (ts, td) in [
            (
                solve_dg(&space, &mesh, 0.6, &u0, Backend::Spectral).unwrap(),
                solve_dg(&space, &mesh, 0.6, &u0, Backend::Direct).unwrap(),
            ),
            (
                solve_pg(&space, &mesh, 1.4, &u0, Backend::Spectral).unwrap(),
                solve_pg(&space, &mesh, 1.4, &u0, Backend::Direct).unwrap(),
            ),
        ] {
            for m in 0..=mesh.intervals() {
                ts.state_nodal(m, &mut a).unwrap();
                td.state_nodal(m, &mut b).unwrap();
                for i in 0..space.dof() {
                    d[i] = a[i] - b[i];
                }
                let gap = space.l2_norm(&d).unwrap();
                assert!(gap <= 1e-10, "m={m}: backend gap {gap}");
            }
        }
    }

    /// The lambda = 0 hook: with zero stiffness the direct march must return
    /// the initial datum at every step, exactly.
    #[test]
    fn zero_stiffness_reproduces_datum_exactly() {
        let space = build_space(16).unwrap();
        let u0 = datum(&space);
        let zero =
            SymTridiag::new(vec![0.0; space.dof()], vec![0.0; space.dof() - 1]).unwrap();
        let mesh = GradedMesh::new(24, 3.0, 1.0).unwrap();
        for scheme in [Scheme::Dg, Scheme::Pg] {
            let alpha = match scheme {
                Scheme::Dg => 0.5,
                Scheme::Pg => 1.5,
            };
            let states =
                direct_march(space.mass(), &zero, &mesh, scheme, alpha, &u0).unwrap();
            for m in 0..=mesh.intervals() {
                assert_eq!(&states[m * space.dof()..(m + 1) * space.dof()], &u0[..]);
            }
        }
    }

    #[test]
    fn solves_are_linear_in_the_datum() {
        let space = decomposed_space(16);
        let u0 = datum(&space);
        let scaled: Vec<f64> = u0.iter().map(|x| 2.5 * x).collect();
        let mesh = GradedMesh::new(24, 2.0, 1.0).unwrap();
        let base = solve_dg(&space, &mesh, 0.5, &u0, Backend::Spectral).unwrap();
        let big = solve_dg(&space, &mesh, 0.5, &scaled, Backend::Spectral).unwrap();
        let mut a = vec![0.0; space.dof()];
        let mut b = vec![0.0; space.dof()];
        for m in 0..=mesh.intervals() {
            base.state_nodal(m, &mut a).unwrap();
            big.state_nodal(m, &mut b).unwrap();
            for i in 0..space.dof() {
                assert!((b[i] - 2.5 * a[i]).abs() <= 1e-13 * a[i].abs().max(1e-3));
            }
        }
    }

    #[test]
    fn metrics_vanish_on_identical_runs() {
        let space = decomposed_space(16);
        let u0 = datum(&space);
        let mesh = GradedMesh::new(16, 2.0, 1.0).unwrap();
        let a = solve_dg(&space, &mesh, 0.5, &u0, Backend::Spectral).unwrap();
        let b = solve_dg(&space, &mesh, 0.5, &u0, Backend::Spectral).unwrap();
        assert_eq!(error_e1(&a, &b).unwrap(), 0.0);
        let a = solve_pg(&space, &mesh, 1.5, &u0, Backend::Spectral).unwrap();
        let b = solve_pg(&space, &mesh, 1.5, &u0, Backend::Spectral).unwrap();
        assert_eq!(error_e2(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn metrics_reject_mismatched_pairs() {
        let space = decomposed_space(16);
        let other = decomposed_space(8);
        let u0 = datum(&space);
        let mesh = GradedMesh::new(8, 2.0, 1.0).unwrap();
        let dg = solve_dg(&space, &mesh, 0.5, &u0, Backend::Spectral).unwrap();
        let pg = solve_pg(&space, &mesh, 1.5, &u0, Backend::Spectral).unwrap();
        assert!(error_e1(&dg, &pg).is_err());
        assert!(error_e2(&dg, &pg).is_err());
        let small = solve_dg(&other, &mesh, 0.5, &datum(&other), Backend::Spectral).unwrap();
        assert!(error_e1(&dg, &small).is_err());
        let short_mesh = GradedMesh::new(8, 2.0, 0.5).unwrap();
        let short = solve_dg(&space, &short_mesh, 0.5, &u0, Backend::Spectral).unwrap();
        assert!(error_e1(&dg, &short).is_err());
    }

    /// Observed E1 orders grow with the grading and saturate near 1,
    /// matching min(sigma nu alpha, 1) with nu = 1/2 regularity of the
    /// x^0.51 (1-x) datum at alpha = 1/2.
    #[test]
    fn e1_order_increases_with_grading() {
        let space = decomposed_space(64);
        let u0 = datum(&space);
        let mut orders = Vec::new();
        for sigma in [1.0, 2.0, 4.0] {
            let study = FieldStudy {
                space: &space,
                alpha: 0.5,
                sigma,
                horizon: 1.0,
                initial: &u0,
                grids: &[32, 64, 128, 256],
                reference_intervals: 2048,
                reference_sigma: 4.0,
                backend: Backend::Spectral,
                metric: Metric::FieldSup,
            };
            let report = field_error_study(&study).unwrap();
            orders.push(report.last_order().unwrap());
        }
        assert!(
            orders[0] < orders[1] && orders[1] < orders[2],
            "orders not increasing: {orders:?}"
        );
        assert!(
            (orders[2] - 1.0).abs() < 0.2,
            "sigma=4 order {} not saturating near 1",
            orders[2]
        );
        assert!(
            (orders[1] - 0.5).abs() < 0.15,
            "sigma=2 order {} not near 1/2",
            orders[1]
        );
    }

    #[test]
    fn e2_study_runs_and_converges() {
        let space = decomposed_space(32);
        let u0 = space
            .l2_project(|x: f64| x.powf(1.51) * (1.0 - x) * (1.0 - x))
            .unwrap();
        let study = FieldStudy {
            space: &space,
            alpha: 1.5,
            sigma: default_reference_grading(Scheme::Pg, 1.5).min(2.0),
            horizon: 1.0,
            initial: &u0,
            grids: &[16, 32, 64, 128],
            reference_intervals: 2048,
            reference_sigma: default_reference_grading(Scheme::Pg, 1.5),
            backend: Backend::Spectral,
            metric: Metric::FieldNodes,
        };
        let report = field_error_study(&study).unwrap();
        let rows = report.rows();
        for w in rows.windows(2) {
            assert!(w[1].error < w[0].error, "errors not decreasing");
        }
        let order = report.last_order().unwrap();
        assert!(
            (order - 1.5).abs() < 0.25,
            "observed PG order {order} far from 3 - alpha"
        );
    }
}
