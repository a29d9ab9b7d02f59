//! Symmetric tridiagonal matrices and the generalized eigensolver used for
//! the P1 stiffness/mass pencil.
//!
//! The eigensolver computes all pairs of `K x = lambda M x` (both symmetric
//! tridiagonal, `M` positive definite and diagonally dominant) by Sturm-count
//! bisection on the inertia of `K - lambda M`, inverse iteration for the
//! vectors, Gram-Schmidt reorthogonalization inside tight clusters, and a
//! final compensated Rayleigh-quotient polish.  Bisection locates each
//! eigenvalue to machine-relative precision, which a dense QR approach can't
//! deliver at the top of the spectrum (its absolute error `eps * lambda_max`
//! swamps small relative tolerances for the low modes).

use crate::math::{f, Accum};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Symmetric tridiagonal matrix: `diag` has length `n`, `off` length `n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Size {
                name: "diag.len()",
                value: 0,
                need: "at least 1",
            });
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::Size {
                name: "off.len()",
                value: off.len(),
                need: "diag.len() - 1",
            });
        }
        Ok(SymTridiag { diag, off })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(y.len(), n);
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    /// Quadratic form `x^T A x` with compensated accumulation.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let n = self.n();
        debug_assert_eq!(x.len(), n);
        let mut acc = Accum::new();
        for i in 0..n {
            acc.add_prod(self.diag[i] * x[i], x[i]);
            if i + 1 < n {
                acc.add_prod(2.0 * self.off[i] * x[i], x[i + 1]);
            }
        }
        acc.total()
    }

    /// Bilinear form `x^T A y` with compensated accumulation.
    pub fn bilinear_form(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.n();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(y.len(), n);
        let mut acc = Accum::new();
        for i in 0..n {
            acc.add_prod(self.diag[i] * x[i], y[i]);
            if i + 1 < n {
                acc.add_prod(self.off[i] * x[i], y[i + 1]);
                acc.add_prod(self.off[i] * x[i + 1], y[i]);
            }
        }
        acc.total()
    }
}

/// Solve `A x = b` for symmetric positive definite tridiagonal `A` by
/// unpivoted LDL^T (stable for SPD input).  `b` is overwritten with `x`.
pub fn solve_spd_tridiag(a: &SymTridiag, b: &mut [f64]) -> Result<()> {
    let n = a.n();
    debug_assert_eq!(b.len(), n);
    let mut d = vec![0.0; n];
    let mut l = vec![0.0; n.saturating_sub(1)];
    d[0] = a.diag[0];
    if d[0] <= 0.0 {
        return Err(Error::Param {
            name: "pivot",
            value: d[0],
            need: "positive (matrix must be positive definite)",
        });
    }
    for i in 1..n {
        l[i - 1] = a.off[i - 1] / d[i - 1];
        d[i] = a.diag[i] - l[i - 1] * a.off[i - 1];
        if d[i] <= 0.0 {
            return Err(Error::Param {
                name: "pivot",
                value: d[i],
                need: "positive (matrix must be positive definite)",
            });
        }
    }
    // Forward: L z = b.
    for i in 1..n {
        b[i] -= l[i - 1] * b[i - 1];
    }
    // Diagonal and backward: L^T x = D^{-1} z.
    b[n - 1] /= d[n - 1];
    for i in (0..n - 1).rev() {
        b[i] = b[i] / d[i] - l[i] * b[i + 1];
    }
    Ok(())
}

/// LU factorization with partial pivoting of a general tridiagonal matrix,
/// stored with the second superdiagonal fill-in.  Used by inverse iteration
/// where the shifted matrix is numerically singular.
struct TriLu {
    dl: Vec<f64>,  // multipliers
    d: Vec<f64>,   // U diagonal
    du: Vec<f64>,  // U first superdiagonal
    du2: Vec<f64>, // U second superdiagonal (fill)
    swapped: Vec<bool>,
}

impl TriLu {
    /// Factor the tridiagonal with diagonal `d`, sub/super diagonals `dl`/`du`.
    /// Zero pivots are replaced by `pert` to keep the solve finite.
    fn factor(dl_in: &[f64], d_in: &[f64], du_in: &[f64], pert: f64) -> TriLu {
        let n = d_in.len();
        let mut dl = vec![0.0; n.saturating_sub(1)];
        let mut d = d_in.to_vec();
        let mut du = du_in.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let mut sub = dl_in.to_vec();
        for i in 0..n.saturating_sub(1) {
            if f::abs(sub[i]) > f::abs(d[i]) {
                // Swap rows i, i+1.
                swapped[i] = true;
                core::mem::swap(&mut d[i], &mut sub[i]);
                // After swap: row i = (old row i+1), whose diag entry is now
                // at column i (stored in d[i]); its col-(i+1) entry is old
                // d[i+1], its col-(i+2) entry is old du[i+1].
                let old_du_i = du[i];
                du[i] = d[i + 1];
                d[i + 1] = old_du_i;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = 0.0;
                }
            }
            if d[i] == 0.0 {
                d[i] = pert;
            }
            let m = sub[i] / d[i];
            dl[i] = m;
            d[i + 1] -= m * du[i];
            if i + 2 < n {
                if swapped[i] {
                    du[i + 1] -= m * du2[i];
                } else {
                    // No fill when rows were not swapped.
                }
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = pert;
        }
        TriLu {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    /// Solve `A x = b` in place.
    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        // Forward elimination, replaying the pivoting order.
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        // Back substitution with two superdiagonals.
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            let i = n - 2;
            b[i] = (b[i] - self.du[i] * b[i + 1]) / self.d[i];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// All eigenpairs of the symmetric tridiagonal pencil `K x = lambda M x`.
#[derive(Debug, Clone)]
pub struct PencilEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Eigenvectors, column-major: `vectors[i*n..(i+1)*n]` is the i-th vector,
    /// normalized to `x^T M x = 1` with its largest-magnitude entry positive.
    pub vectors: Vec<f64>,
    pub n: usize,
}

impl PencilEigen {
    #[inline]
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }
}

/// Count eigenvalues of the pencil strictly below `lam` via the inertia of
/// `K - lam M` (number of negative pivots in its LDL^T factorization).
fn sturm_count(k: &SymTridiag, m: &SymTridiag, lam: f64) -> usize {
    let n = k.n();
    let pivmin = 1e-300;
    let mut count = 0usize;
    let mut prev = 1.0f64;
    for i in 0..n {
        let di = k.diag[i] - lam * m.diag[i];
        let mut q = if i == 0 {
            di
        } else {
            let e = k.off[i - 1] - lam * m.off[i - 1];
            di - e * (e / prev)
        };
        if f::abs(q) < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        prev = q;
    }
    count
}

/// Solve the full generalized symmetric tridiagonal eigenproblem.
///
/// Requires `M` strictly diagonally dominant with positive diagonal (true for
/// P1 mass matrices and for the identity) and `K` positive semidefinite.
pub fn pencil_eigen(k: &SymTridiag, m: &SymTridiag) -> Result<PencilEigen> {
    let n = k.n();
    if m.n() != n {
        return Err(Error::Size {
            name: "m.n()",
            value: m.n(),
            need: "k.n()",
        });
    }

    // Upper bound on the spectrum: lambda <= max_i (row_i |K|) / (slack_i M),
    // valid because K - lam M is then strictly diagonally negative.
    let mut hi_bound = 0.0f64;
    for i in 0..n {
        let mut knum = f::abs(k.diag[i]);
        let mut mden = m.diag[i];
        if i > 0 {
            knum += f::abs(k.off[i - 1]);
            mden -= f::abs(m.off[i - 1]);
        }
        if i + 1 < n {
            knum += f::abs(k.off[i]);
            mden -= f::abs(m.off[i]);
        }
        if mden <= 0.0 {
            return Err(Error::Param {
                name: "m",
                value: mden,
                need: "strict diagonal dominance",
            });
        }
        hi_bound = hi_bound.max(knum / mden);
    }
    hi_bound = hi_bound * (1.0 + 1e-10) + 1e-280;

    let lo_bound = {
        // K is PSD in our uses; allow a sliver of negative range anyway so
        // rounding in the Sturm count cannot strand an eigenvalue.
        -hi_bound * 1e-12 - 1e-280
    };

    // Bisection for each eigenvalue index.
    let mut values = vec![0.0; n];
    for idx in 0..n {
        let mut lo = if idx > 0 { values[idx - 1] } else { lo_bound };
        if sturm_count(k, m, lo) > idx {
            lo = lo_bound;
        }
        let mut hi = hi_bound;
        // Invariant: count(lo) <= idx < count(hi).
        for _ in 0..120 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(k, m, mid) > idx {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * f::abs(hi) {
                break;
            }
        }
        values[idx] = 0.5 * (lo + hi);
    }

    // Inverse iteration for each vector.
    let mut vectors = vec![0.0; n * n];
    let mut sub = vec![0.0; n.saturating_sub(1)];
    let mut dia = vec![0.0; n];
    let mut sup = vec![0.0; n.saturating_sub(1)];
    let scale = hi_bound.max(1.0);
    for idx in 0..n {
        let lam = values[idx];
        for i in 0..n {
            dia[i] = k.diag[i] - lam * m.diag[i];
        }
        for i in 0..n - 1 {
            sub[i] = k.off[i] - lam * m.off[i];
            sup[i] = sub[i];
        }
        let pert = f64::EPSILON * scale * 1e-3 + 1e-290;
        let lu = TriLu::factor(&sub, &dia, &sup, pert);

        let v = &mut vectors[idx * n..(idx + 1) * n];
        // Deterministic pseudo-random start (xorshift), keyed by the index.
        let mut state =
            0x9E37_79B9_7F4A_7C15u64 ^ (idx as u64 + 1).wrapping_mul(0x2545_F491_4F6C_DD1D);
        for vi in v.iter_mut() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            *vi = ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5;
        }
        let mut converged = false;
        for _ in 0..8 {
            lu.solve(v);
            let nrm = f::sqrt(v.iter().map(|x| x * x).sum::<f64>());
            if !nrm.is_finite() || nrm == 0.0 {
                return Err(Error::Eigen { index: idx });
            }
            for vi in v.iter_mut() {
                *vi /= nrm;
            }
            // Growth by ~1/(eps*scale) per iteration signals convergence;
            // two solves after a good start are typically plenty.  Check the
            // actual residual instead of the growth factor: cheap and direct.
            let mut kv = vec![0.0; n];
            let mut mv = vec![0.0; n];
            k.matvec(v, &mut kv);
            m.matvec(v, &mut mv);
            let mut res = 0.0f64;
            for i in 0..n {
                res = res.max(f::abs(kv[i] - lam * mv[i]));
            }
            if res <= 64.0 * f64::EPSILON * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Eigen { index: idx });
        }

        // The iteration above stops at an absolute threshold tied to the top
        // of the spectrum, which leaves low modes with relative residuals
        // far above machine precision.  Two passes of residual refinement
        // fix that: compute r = (K - lam M) v with fma-captured products and
        // correct v by the deflated solve.  `K - lam M` is numerically
        // singular along v, so the component of r along v is removed before
        // the solve (it would otherwise amplify by 1/(lam - lam_exact),
        // rescaling the uncorrected error), and the component of the update
        // along v is removed after it (it only rescales v).  Afterwards
        // every pair sits near eps * ||K v||.
        let mut r = vec![0.0; n];
        for _pass in 0..2 {
            for i in 0..n {
                let mut acc = Accum::new();
                acc.add_prod(k.diag[i], v[i]);
                acc.add_prod(-lam * m.diag[i], v[i]);
                if i > 0 {
                    acc.add_prod(k.off[i - 1], v[i - 1]);
                    acc.add_prod(-lam * m.off[i - 1], v[i - 1]);
                }
                if i + 1 < n {
                    acc.add_prod(k.off[i], v[i + 1]);
                    acc.add_prod(-lam * m.off[i], v[i + 1]);
                }
                r[i] = acc.total();
            }
            let vv: f64 = v.iter().map(|x| x * x).sum();
            let vr: f64 = v.iter().zip(r.iter()).map(|(a, b)| a * b).sum();
            for (ri, vi) in r.iter_mut().zip(v.iter()) {
                *ri -= vr / vv * vi;
            }
            lu.solve(&mut r);
            let along: f64 = v.iter().zip(r.iter()).map(|(a, b)| a * b).sum::<f64>() / vv;
            for i in 0..n {
                v[i] -= r[i] - along * v[i];
            }
            let nrm = f::sqrt(v.iter().map(|x| x * x).sum::<f64>());
            if !(nrm > 0.0) || !nrm.is_finite() {
                return Err(Error::Eigen { index: idx });
            }
            for vi in v.iter_mut() {
                *vi /= nrm;
            }
        }
    }

    // Reorthogonalize clusters in the M inner product (two MGS passes), then
    // M-normalize.  Eigenvalues with small *relative* gaps leave overlaps of
    // order eps * lambda / gap in the computed vectors and need explicit
    // cleanup; a relative criterion keeps well-separated low modes (whose
    // vectors the refinement above already decoupled) out of the clusters.
    let mut mv = vec![0.0; n];
    let mut start = 0usize;
    for idx in 0..n {
        let cluster_tol = 1e-3 * f::abs(values[idx]) + 1024.0 * f64::EPSILON * scale;
        if idx > 0 && values[idx] - values[idx - 1] > cluster_tol {
            start = idx;
        }
        if idx > start {
            for _pass in 0..2 {
                for prev in start..idx {
                    let (head, tail) = vectors.split_at_mut(idx * n);
                    let vprev = &head[prev * n..(prev + 1) * n];
                    let v = &mut tail[..n];
                    m.matvec(vprev, &mut mv);
                    let coef: f64 = v.iter().zip(&mv).map(|(a, b)| a * b).sum();
                    for i in 0..n {
                        v[i] -= coef * vprev[i];
                    }
                }
            }
        }
        let v = &mut vectors[idx * n..(idx + 1) * n];
        let mnorm = m.quadratic_form(v);
        if !(mnorm > 0.0) {
            return Err(Error::Eigen { index: idx });
        }
        let s = 1.0 / f::sqrt(mnorm);
        for vi in v.iter_mut() {
            *vi *= s;
        }
        // Deterministic sign: largest-magnitude entry positive.
        let mut imax = 0;
        for i in 1..n {
            if f::abs(v[i]) > f::abs(v[imax]) {
                imax = i;
            }
        }
        if v[imax] < 0.0 {
            for vi in v.iter_mut() {
                *vi = -*vi;
            }
        }
    }

    // Rayleigh-quotient polish with compensated dot products.
    for idx in 0..n {
        let v = &vectors[idx * n..(idx + 1) * n];
        let num = k.quadratic_form(v);
        let den = m.quadratic_form(v);
        if den > 0.0 {
            values[idx] = num / den;
        }
    }

    Ok(PencilEigen {
        values,
        vectors,
        n,
    })
}

/// Convenience: eigenpairs of a plain symmetric tridiagonal matrix
/// (`M = identity`).
pub fn sym_tridiag_eigen(t: &SymTridiag) -> Result<PencilEigen> {
    let ident = SymTridiag {
        diag: vec![1.0; t.n()],
        off: vec![0.0; t.n().saturating_sub(1)],
    };
    pencil_eigen(t, &ident)
}
