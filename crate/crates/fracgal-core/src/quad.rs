//! Gaussian quadrature rules: Gauss-Legendre (Newton on the Legendre
//! recurrence) and Gauss-Jacobi (Golub-Welsch on the Jacobi recurrence
//! coefficients, reusing the tridiagonal eigensolver).

use crate::linalg::{sym_tridiag_eigen, SymTridiag};
use crate::math::{f, gamma, ln_gamma, Accum};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Quadrature rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    /// Integrate `f` over `[lo, hi]` (affine map of the reference rule).
    /// For weighted rules the weight function is implicit: the caller must
    /// supply only the smooth factor and account for the mapped weight scale.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        let c = 0.5 * (hi + lo);
        let h = 0.5 * (hi - lo);
        let mut acc = Accum::new();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add_prod(w, f(c + h * x));
        }
        h * acc.total()
    }
}

/// Gauss-Legendre rule with `n` points, exact for polynomials of degree
/// `2n - 1`.  Nodes are the roots of `P_n`, found by Newton iteration from
/// the Chebyshev-like initial guesses; weights are `2 / ((1-x^2) P_n'(x)^2)`.
pub fn gauss_legendre(n: usize) -> Result<QuadRule> {
    if n == 0 {
        return Err(Error::Size {
            name: "n",
            value: 0,
            need: "at least 1",
        });
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Initial guess for the i-th root in descending order.
        let mut x = f::cos(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if f::abs(dx) <= 1e-15 * f::abs(x).max(1.0) {
                // One more pass for a clean double-precision root.
                let mut q0 = 1.0;
                let mut q1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let q2 = ((2.0 * kf - 1.0) * x * q1 - (kf - 1.0) * q0) / kf;
                    q0 = q1;
                    q1 = q2;
                }
                dp = nf * (x * q1 - q0) / (x * x - 1.0);
                x -= q1 / dp;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Roots come out descending in x for ascending i; store ascending.
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadRule { nodes, weights })
}

/// Gauss-Jacobi rule with `n` points for the weight `(1-x)^a (1+x)^b` on
/// `[-1, 1]`, with `a, b > -1`.  Built by Golub-Welsch: nodes are the
/// eigenvalues of the Jacobi recurrence matrix, weights `mu0 * v_1^2` with
/// `v` the normalized eigenvectors and `mu0` the total weight mass.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<QuadRule> {
    if n == 0 {
        return Err(Error::Size {
            name: "n",
            value: 0,
            need: "at least 1",
        });
    }
    if !(a > -1.0) || !(b > -1.0) {
        return Err(Error::Param {
            name: "jacobi exponent",
            value: if a > -1.0 { b } else { a },
            need: "> -1",
        });
    }
    // Recurrence x p_k = p_{k+1} + alpha_k p_k + beta_k p_{k-1} for the monic
    // Jacobi polynomials.
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let apb = a + b;
    diag[0] = (b - a) / (apb + 2.0);
    for k in 1..n {
        let kf = k as f64;
        let den = (2.0 * kf + apb) * (2.0 * kf + apb + 2.0);
        diag[k] = (b * b - a * a) / den;
        let num = 4.0 * kf * (kf + a) * (kf + b) * (kf + apb);
        let den2 = (2.0 * kf + apb) * (2.0 * kf + apb) * (2.0 * kf + apb + 1.0)
            * (2.0 * kf + apb - 1.0);
        let beta = num / den2;
        off[k - 1] = f::sqrt(beta);
    }
    // Total mass mu0 = integral of the weight = 2^{a+b+1} B(a+1, b+1).
    let mu0 = f::exp(
        (apb + 1.0) * core::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
            - ln_gamma(apb + 2.0),
    );

    // Shift the recurrence matrix to make it positive definite for the
    // bisection eigensolver (spectrum of the Jacobi matrix lies in (-1, 1)).
    let shift = 2.0;
    let shifted = SymTridiag::new(diag.iter().map(|d| d + shift).collect(), off)?;
    let e = sym_tridiag_eigen(&shifted)?;

    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        nodes[i] = e.values[i] - shift;
        let v0 = e.vector(i)[0];
        weights[i] = mu0 * v0 * v0;
    }
    Ok(QuadRule { nodes, weights })
}

/// Gauss-Jacobi rule mapped to `[0, len]` for integrands of the form
/// `(len - t)^a * smooth(t)`: returns nodes `t_i` in `(0, len)` and weights
/// absorbing the singular factor, so `sum w_i s(t_i) ~= int_0^len (len-t)^a s(t) dt`.
pub fn gauss_jacobi_endpoint(n: usize, a: f64, len: f64) -> Result<QuadRule> {
    if !(len > 0.0) {
        return Err(Error::Param {
            name: "len",
            value: len,
            need: "positive",
        });
    }
    let base = gauss_jacobi(n, a, 0.0)?;
    // Map x in [-1,1] -> t = len (1+x)/2; (len - t)^a = (len/2)^a (1-x)^a and
    // dt = (len/2) dx, so the mapped weight is w * (len/2)^{a+1}.
    let scale = f::powf(0.5 * len, a + 1.0);
    let nodes = base.nodes.iter().map(|x| 0.5 * len * (1.0 + x)).collect();
    let weights = base.weights.iter().map(|w| w * scale).collect();
    Ok(QuadRule { nodes, weights })
}

/// Check that `sum(weights) = mu0` for Jacobi rules (cheap internal sanity).
#[allow(dead_code)]
pub fn jacobi_mass(a: f64, b: f64) -> f64 {
    f::exp(
        (a + b + 1.0) * core::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
            - ln_gamma(a + b + 2.0),
    ) * gamma(a + b + 2.0).signum()
}
