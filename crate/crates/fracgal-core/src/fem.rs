//! Conforming P1 finite elements on (0, 1) with homogeneous Dirichlet
//! boundary conditions.
//!
//! The spatial operator is the weak 1-D Laplacian, sign convention chosen so
//! that the stiffness matrix is positive definite.  On the uniform mesh with
//! `n_cells` intervals of width `h = 1/n_cells` the degrees of freedom are the
//! interior nodal values, and
//!
//! ```text
//!     M = (h/6) tridiag(1, 4, 1),      K = (1/h) tridiag(-1, 2, -1).
//! ```
//!
//! [`FemSpace`] assembles both matrices, projects initial data onto the
//! space, and computes the generalized eigenpairs `K v = lambda M v` that the
//! spectral time-stepping backend diagonalizes against.  The discrete
//! eigenvalues admit a closed form on the uniform mesh
//! ([`uniform_eigenvalue`]), which the tests pin the solver to.

use crate::linalg::{pencil_eigen, solve_spd_tridiag, PencilEigen, SymTridiag};
use crate::math::f;
use crate::quad::gauss_legendre;
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Gauss-Legendre points per cell for [`FemSpace::l2_project`].
///
/// The initial data of interest are smooth except for an `x^s` factor
/// (`s > 1/2`) at a domain endpoint, where every basis function vanishes
/// linearly; eight points per cell put the quadrature error far below the
/// projection error itself (checked by refinement in the tests).
pub const PROJECTION_POINTS: usize = 8;

/// P1 finite element space on (0, 1) with zero boundary values.
///
/// Immutable after construction except for the cached eigendecomposition:
/// call [`FemSpace::eigen_decompose`] once (it needs `&mut self`), then share
/// the space freely across threads — every other method takes `&self`.
#[derive(Debug, Clone)]
pub struct FemSpace {
    n_cells: usize,
    h: f64,
    mass: SymTridiag,
    stiffness: SymTridiag,
    eigen: Option<PencilEigen>,
}

/// Assemble the P1 space with `n_cells` uniform cells (`n_cells >= 2`).
///
/// The eigendecomposition is deferred until [`FemSpace::eigen_decompose`].
pub fn build_space(n_cells: usize) -> Result<FemSpace> {
    if n_cells < 2 {
        return Err(Error::Size {
            name: "n_cells",
            value: n_cells,
            need: "at least 2",
        });
    }
    let dof = n_cells - 1;
    let h = 1.0 / n_cells as f64;
    let mass = SymTridiag::new(vec![4.0 * h / 6.0; dof], vec![h / 6.0; dof - 1])?;
    let stiffness = SymTridiag::new(vec![2.0 / h; dof], vec![-1.0 / h; dof - 1])?;
    Ok(FemSpace {
        n_cells,
        h,
        mass,
        stiffness,
        eigen: None,
    })
}

impl FemSpace {
    #[inline]
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Cell width `1/n_cells`.
    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of interior nodes, `n_cells - 1`.
    #[inline]
    pub fn dof(&self) -> usize {
        self.n_cells - 1
    }

    /// Mass matrix `M` (symmetric positive definite tridiagonal).
    #[inline]
    pub fn mass(&self) -> &SymTridiag {
        &self.mass
    }

    /// Stiffness matrix `K` (symmetric positive definite tridiagonal).
    #[inline]
    pub fn stiffness(&self) -> &SymTridiag {
        &self.stiffness
    }

    /// L2 inner product of two coefficient vectors, `a^T M b`.
    pub fn l2_inner(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        Ok(self.mass.bilinear_form(a, b))
    }

    /// L2(0,1) norm of the finite element function with coefficients `c`.
    pub fn l2_norm(&self, c: &[f64]) -> Result<f64> {
        self.check_len(c.len())?;
        Ok(f::sqrt(self.mass.quadratic_form(c).max(0.0)))
    }

    /// L2-orthogonal projection of `func` onto the space: solves `M c = b`
    /// with `b_i = \int func * hat_i` using [`PROJECTION_POINTS`] Gauss
    /// points per cell.
    pub fn l2_project<F: FnMut(f64) -> f64>(&self, func: F) -> Result<Vec<f64>> {
        self.l2_project_with_points(func, PROJECTION_POINTS)
    }

    /// [`FemSpace::l2_project`] with an explicit per-cell quadrature order,
    /// for refinement comparisons.
    pub fn l2_project_with_points<F: FnMut(f64) -> f64>(
        &self,
        mut func: F,
        points: usize,
    ) -> Result<Vec<f64>> {
        let rule = gauss_legendre(points)?;
        let dof = self.dof();
        let h = self.h;
        let mut b = vec![0.0; dof];
        for k in 0..self.n_cells {
            let lo = k as f64 * h;
            let hi = lo + h;
            // Nodes k and k+1 support the two hats alive on cell k; node
            // indices 1..=dof map to coefficients 0..dof.
            if k >= 1 {
                b[k - 1] += rule.integrate(lo, hi, |x| func(x) * (hi - x) / h);
            }
            if k + 1 <= dof {
                b[k] += rule.integrate(lo, hi, |x| func(x) * (x - lo) / h);
            }
        }
        solve_spd_tridiag(&self.mass, &mut b)?;
        Ok(b)
    }

    /// Compute (once) and cache all generalized eigenpairs `K v = lambda M v`
    /// with `v^T M v = 1`, eigenvalues ascending.
    ///
    /// Subsequent calls are no-ops.  Requiring `&mut` makes initialization
    /// exclusive at compile time; afterwards the pairs are reachable through
    /// [`FemSpace::eigenpairs`] from shared references.
    pub fn eigen_decompose(&mut self) -> Result<()> {
        if self.eigen.is_none() {
            self.eigen = Some(pencil_eigen(&self.stiffness, &self.mass)?);
        }
        Ok(())
    }

    /// The cached eigendecomposition, if [`FemSpace::eigen_decompose`] has run.
    #[inline]
    pub fn eigenpairs(&self) -> Option<&PencilEigen> {
        self.eigen.as_ref()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dof() {
            return Err(Error::Size {
                name: "coefficients.len()",
                value: len,
                need: "n_cells - 1",
            });
        }
        Ok(())
    }
}

/// Closed-form discrete eigenvalue of the uniform P1 pencil:
///
/// ```text
///     lambda_n = (6/h^2) (1 - cos(n pi h)) / (2 + cos(n pi h)),
/// ```
///
/// `h = 1/n_cells`, `n = 1..n_cells-1`.  Approaches `(n pi)^2` from above as
/// `h -> 0`.
pub fn uniform_eigenvalue(n_cells: usize, n: usize) -> f64 {
    let h = 1.0 / n_cells as f64;
    let half = 0.5 * n as f64 * core::f64::consts::PI * h;
    // 1 - cos(x) evaluated as 2 sin^2(x/2): the direct form cancels for the
    // low modes of fine meshes and would be less accurate than the solver.
    let s = f::sin(half);
    let c = f::cos(2.0 * half);
    6.0 / (h * h) * 2.0 * s * s / (2.0 + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_spaces() {
        assert!(build_space(0).is_err());
        assert!(build_space(1).is_err());
        assert!(build_space(2).is_ok());
    }

    #[test]
    fn two_cell_space_by_hand() {
        // h = 1/2: single dof, M = [h*4/6] = [1/3], K = [2/h] = [4],
        // eigenvalue K/M = 12.
        let mut space = build_space(2).unwrap();
        assert_eq!(space.dof(), 1);
        assert!((space.mass().diag[0] - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(space.stiffness().diag[0], 4.0);
        space.eigen_decompose().unwrap();
        let eig = space.eigenpairs().unwrap();
        assert!((eig.values[0] - 12.0).abs() < 1e-11);
        assert!((uniform_eigenvalue(2, 1) - 12.0).abs() < 1e-11);
    }

    #[test]
    fn four_cell_eigenvalues_match_closed_form() {
        let mut space = build_space(4).unwrap();
        space.eigen_decompose().unwrap();
        let eig = space.eigenpairs().unwrap();
        for n in 1..=3 {
            let want = uniform_eigenvalue(4, n);
            let got = eig.values[n - 1];
            assert!(
                ((got - want) / want).abs() < 1e-10,
                "lambda_{n}: got {got}, closed form {want}"
            );
        }
        // The lowest mode sits above the continuum limit pi^2.
        assert!((eig.values[0] - 10.3866).abs() < 5e-4);
        assert!(eig.values[0] > core::f64::consts::PI.powi(2));
    }

    #[test]
    fn dense_eigenvalues_match_closed_form() {
        let mut space = build_space(512).unwrap();
        space.eigen_decompose().unwrap();
        let eig = space.eigenpairs().unwrap();
        for n in 1..=space.dof() {
            let want = uniform_eigenvalue(512, n);
            let got = eig.values[n - 1];
            assert!(
                ((got - want) / want).abs() < 1e-10,
                "lambda_{n}: got {got}, closed form {want}"
            );
        }
    }

    #[test]
    fn eigenvectors_m_orthonormal_and_complete() {
        let mut space = build_space(256).unwrap();
        space.eigen_decompose().unwrap();
        let eig = space.eigenpairs().unwrap();
        let dof = space.dof();
        let lambda_max = eig.values[dof - 1];
        for a in 0..dof {
            for b in a..dof {
                let m_ab = space.mass().bilinear_form(eig.vector(a), eig.vector(b));
                let k_ab = space.stiffness().bilinear_form(eig.vector(a), eig.vector(b));
                if a == b {
                    assert!((m_ab - 1.0).abs() < 1e-12, "vMv({a}) = {m_ab}");
                    assert!(
                        ((k_ab - eig.values[a]) / eig.values[a]).abs() < 1e-10,
                        "vKv({a}) = {k_ab} vs {}",
                        eig.values[a]
                    );
                } else {
                    assert!(m_ab.abs() < 1e-12, "vMv({a},{b}) = {m_ab}");
                    assert!(k_ab.abs() < 1e-10 * lambda_max, "vKv({a},{b}) = {k_ab}");
                }
            }
        }
    }

    #[test]
    fn eigen_residual_small() {
        let mut space = build_space(512).unwrap();
        space.eigen_decompose().unwrap();
        let eig = space.eigenpairs().unwrap();
        let dof = space.dof();
        let mut kv = vec![0.0; dof];
        let mut mv = vec![0.0; dof];
        for n in 0..dof {
            let v = eig.vector(n);
            space.stiffness().matvec(v, &mut kv);
            space.mass().matvec(v, &mut mv);
            let mut res = 0.0f64;
            let mut knorm = 0.0f64;
            for i in 0..dof {
                res += (kv[i] - eig.values[n] * mv[i]).powi(2);
                knorm += kv[i] * kv[i];
            }
            assert!(
                res.sqrt() <= 1e-10 * knorm.sqrt(),
                "pair {n}: residual {} vs 1e-10 * {}",
                res.sqrt(),
                knorm.sqrt()
            );
        }
    }

    #[test]
    fn eigen_decompose_caches() {
        let mut space = build_space(8).unwrap();
        assert!(space.eigenpairs().is_none());
        space.eigen_decompose().unwrap();
        let first = space.eigenpairs().unwrap().values.clone();
        space.eigen_decompose().unwrap();
        assert_eq!(first, space.eigenpairs().unwrap().values);
    }

    /// Piecewise-linear interpolant of the nodal values `vals` (zero at the
    /// boundary), evaluated at `x`.
    fn interpolant(vals: &[f64], n_cells: usize, x: f64) -> f64 {
        let h = 1.0 / n_cells as f64;
        let k = ((x / h) as usize).min(n_cells - 1);
        let node = |j: usize| -> f64 {
            if j == 0 || j == n_cells {
                0.0
            } else {
                vals[j - 1]
            }
        };
        let frac = (x - k as f64 * h) / h;
        node(k) * (1.0 - frac) + node(k + 1) * frac
    }

    #[test]
    fn projection_reproduces_in_space_functions() {
        let space = build_space(16).unwrap();
        // A single hat...
        let hat = |x: f64| {
            let x7 = 7.0 / 16.0;
            (1.0 - (x - x7).abs() * 16.0).max(0.0)
        };
        let c = space.l2_project(hat).unwrap();
        for (i, ci) in c.iter().enumerate() {
            let want = if i == 6 { 1.0 } else { 0.0 };
            assert!((ci - want).abs() < 1e-12, "c[{i}] = {ci}");
        }
        // ...and a generic member of the space.
        let vals: Vec<f64> = (1..16).map(|i| (i as f64 * 0.7).sin()).collect();
        let c = space
            .l2_project(|x| interpolant(&vals, 16, x))
            .unwrap();
        for (ci, vi) in c.iter().zip(&vals) {
            assert!((ci - vi).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_is_l2_orthogonal() {
        // <f - Pf, hat_i> = 0 for every basis function; evaluate the inner
        // products with a finer rule than the projection used.
        let n_cells = 32;
        let space = build_space(n_cells).unwrap();
        let func = |x: f64| (3.0 * core::f64::consts::PI * x).sin() * (x * x).exp();
        let c = space.l2_project(func).unwrap();
        let rule = gauss_legendre(16).unwrap();
        let h = space.h();
        for i in 1..n_cells {
            let mut inner = 0.0;
            for k in [i - 1, i] {
                let lo = k as f64 * h;
                let hi = lo + h;
                inner += rule.integrate(lo, hi, |x| {
                    let hat = 1.0 - (x - i as f64 * h).abs() / h;
                    (func(x) - interpolant(&c, n_cells, x)) * hat
                });
            }
            assert!(inner.abs() < 1e-12, "residual inner product {i}: {inner}");
        }
    }

    #[test]
    fn projection_quadrature_is_converged_for_singular_data() {
        // The experiment initial data have an x^s endpoint factor; compare
        // the default rule against doubled rules.  The drift has to sit far
        // below the projection error itself (~h^{1+s}, about 6.6e-4 for
        // s = 0.51 at 128 cells) and shrink under refinement.
        let space = build_space(128).unwrap();
        let sup = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max)
        };
        for (s, q, bound) in [(0.51f64, 1.0f64, 1e-6), (1.51, 2.0, 1e-9)] {
            let datum = |x: f64| x.powf(s) * (1.0 - x).powf(q);
            let f8 = space.l2_project(datum).unwrap();
            let f16 = space.l2_project_with_points(datum, 16).unwrap();
            let f32p = space.l2_project_with_points(datum, 32).unwrap();
            let d1 = sup(&f8, &f16);
            let d2 = sup(&f16, &f32p);
            assert!(d1 < bound, "s = {s}: quadrature drift {d1}");
            assert!(d2 < d1 / 4.0, "s = {s}: not converging ({d1} -> {d2})");
        }
    }

    #[test]
    fn l2_norm_basics() {
        let space = build_space(2).unwrap();
        assert_eq!(space.l2_norm(&[0.0]).unwrap(), 0.0);
        // Single hat on h = 1/2: ||hat||^2 = M_11 = 1/3.
        let n = space.l2_norm(&[1.0]).unwrap();
        assert!((n * n - 1.0 / 3.0).abs() < 1e-15);
        assert!(space.l2_norm(&[1.0, 2.0]).is_err());

        let mut space = build_space(8).unwrap();
        space.eigen_decompose().unwrap();
        let eig = space.eigenpairs().unwrap().clone();
        for n in 0..space.dof() {
            let nrm = space.l2_norm(eig.vector(n)).unwrap();
            assert!((nrm - 1.0).abs() < 1e-12);
        }
    }
}
