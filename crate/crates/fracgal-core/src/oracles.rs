//! Randomized numerical verifiers for the scalar inequalities that underpin
//! the solver's stability and convergence analysis.
//!
//! Each check draws random parameters, evaluates both sides of its
//! inequality with the same stable power-difference kernels the solver uses,
//! and records the smallest relative slack seen together with the witness
//! parameters that produced it.  A passing oracle has every sample satisfy
//! its inequality with slack above [`MARGIN_FLOOR`] (relative to the scale
//! of the two sides), which absorbs roundoff; exact ties are re-drawn.
//!
//! The checks cover:
//! * monotonicity in the upper limit of ratios of power increments
//!   (plain, and shifted by a linear term with coefficient `mu >= 0`),
//! * the corresponding ratio bound for exponents in `(1, 2)`,
//! * boundedness of normalized convolution sums
//!   `sum_j j^beta (k^sigma - j^sigma)^{-gamma}`,
//! * coercivity of the fractional derivative pairing
//!   `cos(gamma pi) ||D^gamma_{0+} v||^2 <= (D^gamma_{0+} v, D^gamma_{1-} v)`
//!   on cubic trial functions, evaluated with exact Gauss-Jacobi quadrature.
//!
//! Sampling is embarrassingly parallel; the reduction keeps the minimum
//! margin.  The implementation stays serial — callers that want parallelism
//! can shard the sample count over seeds.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{f, gamma};
use crate::quad::gauss_jacobi;
use crate::weights::power_increment;
use crate::{Error, Result};

/// Minimal relative slack for an inequality to count as numerically strict.
pub const MARGIN_FLOOR: f64 = 1e-14;

/// Result of one randomized check.
#[derive(Clone, Debug)]
pub struct OracleOutcome {
    /// Stable identifier of the inequality family.
    pub check: &'static str,
    /// Number of accepted samples.
    pub samples: usize,
    /// Smallest relative slack `(dominant - dominated) / scale` observed;
    /// positive (above [`MARGIN_FLOOR`]) for a passing oracle.
    pub worst_margin: f64,
    /// Parameters of the worst sample; layout documented per check.
    pub witness: Vec<f64>,
    /// Seed that reproduces the run.
    pub seed: u64,
}

impl OracleOutcome {
    /// Whether every sample satisfied the inequality with margin above
    /// [`MARGIN_FLOOR`].
    pub fn passed(&self) -> bool {
        self.worst_margin > MARGIN_FLOOR
    }
}

/// Relative slack of `lhs > rhs`, normalized by the magnitude of both sides.
#[inline]
fn rel_margin(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs) / (f::abs(lhs) + f::abs(rhs))
}

/// Both sides of the power-increment ratio comparison: with `p = 1 - beta`,
///
/// ```text
/// lhs = ((d-t)^p - (d-a)^p) / ((d-a)^p - (d-b)^p)   (upper limit d)
/// rhs = ((c-t)^p - (c-a)^p) / ((c-a)^p - (c-b)^p)   (upper limit c)
/// ```
///
/// For `0 <= t < a < b < c < d` and `0 < beta < 1` the ratio increases with
/// the upper limit: `lhs > rhs`.
pub fn ratio_pair(t: f64, a: f64, b: f64, c: f64, d: f64, beta: f64) -> (f64, f64) {
    let p = 1.0 - beta;
    let lhs = power_increment(d - a, a - t, p) / power_increment(d - b, b - a, p);
    let rhs = power_increment(c - a, a - t, p) / power_increment(c - b, b - a, p);
    (lhs, rhs)
}

/// The same comparison with both numerators shifted by `mu (a-t)` and both
/// denominators by `mu (b-a)`, `mu >= 0`; the strict ordering survives the
/// shift.  `mu = 0` reduces exactly to [`ratio_pair`].
pub fn shifted_ratio_pair(
    t: f64,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    beta: f64,
    mu: f64,
) -> (f64, f64) {
    let p = 1.0 - beta;
    let (num_shift, den_shift) = (mu * (a - t), mu * (b - a));
    let lhs = (power_increment(d - a, a - t, p) + num_shift)
        / (power_increment(d - b, b - a, p) + den_shift);
    let rhs = (power_increment(c - a, a - t, p) + num_shift)
        / (power_increment(c - b, b - a, p) + den_shift);
    (lhs, rhs)
}

/// Both sides of the second-kind ratio bound: with `q = 2 - beta` and
/// `1 < beta < 2`, for `0 <= t < a < b <= c`,
///
/// ```text
/// lhs = ((c-t)^q - (c-a)^q) / ((c-a)^q - (c-b)^q) < (a-t)/(b-a) = rhs.
/// ```
pub fn wave_ratio_pair(t: f64, a: f64, b: f64, c: f64, beta: f64) -> (f64, f64) {
    let q = 2.0 - beta;
    let lhs = power_increment(c - a, a - t, q) / power_increment(c - b, b - a, q);
    (lhs, (a - t) / (b - a))
}

/// Which exponent regime a convolution-sum check runs in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvRegime {
    /// `gamma > 1`: the sum is dominated by its last terms and scales like
    /// `k^{beta - (sigma-1) gamma}`.
    Supercritical,
    /// `1/2 <= gamma < 1`: the sum scales like
    /// `(1-gamma)^{-1} k^{beta - sigma gamma + 1}`.
    Subcritical,
}

impl ConvRegime {
    fn id(self) -> &'static str {
        match self {
            ConvRegime::Supercritical => "conv-sum-supercritical",
            ConvRegime::Subcritical => "conv-sum-subcritical",
        }
    }
}

/// The normalized convolution sum
/// `sum_{j=1}^{k-1} j^beta (k^sigma - j^sigma)^{-gamma} / scale(k)`,
/// where `scale` is the regime's claimed growth.  Boundedness of this ratio
/// over `k` is what [`check_conv_bound`] monitors.
pub fn conv_ratio(regime: ConvRegime, beta: f64, gamma_: f64, sigma: f64, k: usize) -> f64 {
    let kf = k as f64;
    let mut sum = 0.0;
    for j in 1..k {
        let jf = j as f64;
        let gap = power_increment(jf, kf - jf, sigma);
        sum += f::powf(jf, beta) * f::powf(gap, -gamma_);
    }
    let scale = match regime {
        ConvRegime::Supercritical => f::powf(kf, beta - (sigma - 1.0) * gamma_),
        ConvRegime::Subcritical => f::powf(kf, beta - sigma * gamma_ + 1.0) / (1.0 - gamma_),
    };
    sum / scale
}

/// Both sides of the coercivity bound for `v(s) = c1 s + c2 s^2 + c3 s^3`
/// on `(0, 1)`: returns `(cos(gamma pi) ||L||^2, <L, R>)` where `L` and `R`
/// are the left- and right-sided fractional derivatives of order
/// `gamma in (0, 1/2)`.
///
/// Monomials differentiate in closed form,
/// `D^g s^k = Gamma(k+1)/Gamma(k+1-g) s^{k-g}` (and mirrored about 1 for the
/// right-sided derivative after re-expanding `v` in powers of `1 - s`), so
/// both integrands are a polynomial times a Jacobi weight and the
/// quadratures below are exact up to roundoff.
pub fn coercivity_pair(cubic: [f64; 3], gamma_: f64) -> (f64, f64) {
    let [c1, c2, c3] = cubic;
    // Left derivative: L(s) = s^{1-g} * P(s), P of degree 2.
    let p = [
        c1 * gamma(2.0) / gamma(2.0 - gamma_),
        c2 * gamma(3.0) / gamma(3.0 - gamma_),
        c3 * gamma(4.0) / gamma(4.0 - gamma_),
    ];
    // Right derivative: re-expand v in powers of u = 1 - s, then
    // R(s) = u^{-g} * Q(u), Q of degree 3.
    let d = [
        c1 + c2 + c3,
        -(c1 + 2.0 * c2 + 3.0 * c3),
        c2 + 3.0 * c3,
        -c3,
    ];
    let q = [
        d[0] * gamma(1.0) / gamma(1.0 - gamma_),
        d[1] * gamma(2.0) / gamma(2.0 - gamma_),
        d[2] * gamma(3.0) / gamma(3.0 - gamma_),
        d[3] * gamma(4.0) / gamma(4.0 - gamma_),
    ];
    let poly = |coef: &[f64], x: f64| {
        let mut acc = 0.0;
        for &ci in coef.iter().rev() {
            acc = acc * x + ci;
        }
        acc
    };
    // ||L||^2 = int_0^1 s^{2-2g} P(s)^2 ds: weight exponents A = 0 (at 1),
    // B = 2-2g (at 0); the mapped rule gives 2^{-(A+B+1)} sum w_i f(s_i).
    let rule = gauss_jacobi(4, 0.0, 2.0 - 2.0 * gamma_).expect("valid exponents");
    let mut norm2 = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let s = 0.5 * (1.0 + x);
        let ps = poly(&p, s);
        norm2 += w * ps * ps;
    }
    norm2 *= f::powf(0.5, 3.0 - 2.0 * gamma_);
    // <L, R> = int_0^1 s^{1-g} (1-s)^{-g} P(s) Q(1-s) ds.
    let rule = gauss_jacobi(4, -gamma_, 1.0 - gamma_).expect("valid exponents");
    let mut cross = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let s = 0.5 * (1.0 + x);
        cross += w * poly(&p, s) * poly(&q, 1.0 - s);
    }
    cross *= f::powf(0.5, 2.0 - 2.0 * gamma_);
    (f::cos(gamma_ * core::f64::consts::PI) * norm2, cross)
}

/// Draw `n` strictly increasing points in `(0, 1)`; ties are re-drawn.
fn ordered<R: Rng>(rng: &mut R, out: &mut [f64]) {
    loop {
        for x in out.iter_mut() {
            *x = rng.gen::<f64>();
        }
        out.sort_unstable_by(|a, b| a.partial_cmp(b).expect("uniform draws are not NaN"));
        if out.windows(2).all(|w| w[0] < w[1]) && out[0] > 0.0 {
            return;
        }
    }
}

/// Uniform draw strictly inside `(0, 1)`.
fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let x = rng.gen::<f64>();
        if x > 0.0 && x < 1.0 {
            return x;
        }
    }
}

/// Exponent in the open range `(lo, hi)`, with the near-endpoint values
/// `lo + 1e-3` and `hi - 1e-3` injected on the first two samples.
fn exponent_draw<R: Rng>(rng: &mut R, i: usize, lo: f64, hi: f64) -> f64 {
    match i {
        0 => lo + 1e-3,
        1 => hi - 1e-3,
        _ => lo + (hi - lo) * open_unit(rng),
    }
}

fn worse(worst: &mut f64, witness: &mut Vec<f64>, margin: f64, params: &[f64]) {
    if margin < *worst {
        *worst = margin;
        witness.clear();
        witness.extend_from_slice(params);
    }
}

/// Check that the power-increment ratio strictly increases with the upper
/// limit, over random tuples `0 <= t < a < b < c < d` and `beta in (0, 1)`.
/// Witness layout: `[t, a, b, c, d, beta]`.
pub fn check_ratio_monotone(samples: usize, seed: u64) -> OracleOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut witness = Vec::new();
    let mut pts = [0.0; 5];
    for i in 0..samples {
        let beta = exponent_draw(&mut rng, i, 0.0, 1.0);
        loop {
            ordered(&mut rng, &mut pts);
            let [mut t, a, mut b, mut c, d] = pts;
            if i % 17 == 0 {
                t = 0.0;
            }
            if i % 23 == 0 {
                // Nearly degenerate middle gap.
                c = b + (d - b) * 1e-6;
                if c <= b {
                    b = 0.5 * (pts[1] + pts[2]);
                    c = b + (d - b) * 1e-6;
                }
            }
            let (lhs, rhs) = ratio_pair(t, a, b, c, d, beta);
            if lhs != rhs {
                worse(
                    &mut worst,
                    &mut witness,
                    rel_margin(lhs, rhs),
                    &[t, a, b, c, d, beta],
                );
                break;
            }
        }
    }
    OracleOutcome {
        check: "ratio-monotone",
        samples,
        worst_margin: worst,
        witness,
        seed,
    }
}

/// The shifted variant: numerators gain `mu (a-t)`, denominators `mu (b-a)`,
/// with `mu` log-uniform over twelve decades plus the boundary cases
/// `mu = 0` and `mu = 1e6`.  Witness layout: `[t, a, b, c, d, beta, mu]`.
pub fn check_ratio_monotone_shifted(samples: usize, seed: u64) -> OracleOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut witness = Vec::new();
    let mut pts = [0.0; 5];
    for i in 0..samples {
        // The true margin vanishes both as beta approaches its endpoints
        // (the power increments degenerate to linear ones and the two sides
        // coincide) and as mu grows (both ratios approach (a-t)/(b-a), the
        // gap shrinking like 1/mu).  Each axis is stressed on its own —
        // compounding them would push genuine margins into the roundoff
        // floor and make strictness unmeasurable.
        let (beta, mu) = if i < 2 {
            (exponent_draw(&mut rng, i, 0.0, 1.0), 0.0)
        } else if i % 11 == 0 {
            (open_unit(&mut rng), 0.0)
        } else if i % 13 == 0 {
            (0.3 + 0.4 * open_unit(&mut rng), 1e6)
        } else {
            let mu = f::powf(10.0, -6.0 + 12.0 * rng.gen::<f64>());
            let beta = if mu > 1e3 {
                0.05 + 0.9 * open_unit(&mut rng)
            } else {
                open_unit(&mut rng)
            };
            (beta, mu)
        };
        loop {
            ordered(&mut rng, &mut pts);
            if mu > 1e3 && pts.windows(2).any(|w| w[1] - w[0] < 1e-2) {
                continue;
            }
            let [mut t, a, b, c, d] = pts;
            if i % 17 == 0 {
                t = 0.0;
            }
            let (lhs, rhs) = shifted_ratio_pair(t, a, b, c, d, beta, mu);
            if lhs != rhs {
                worse(
                    &mut worst,
                    &mut witness,
                    rel_margin(lhs, rhs),
                    &[t, a, b, c, d, beta, mu],
                );
                break;
            }
        }
    }
    OracleOutcome {
        check: "ratio-monotone-shifted",
        samples,
        worst_margin: worst,
        witness,
        seed,
    }
}

/// Check the second-kind bound `lhs < (a-t)/(b-a)` over random tuples
/// `0 <= t < a < b <= c` and `beta in (1, 2)`, including the `b = c`
/// boundary.  Witness layout: `[t, a, b, c, beta]`.
pub fn check_ratio_wave(samples: usize, seed: u64) -> OracleOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut witness = Vec::new();
    let mut pts = [0.0; 4];
    for i in 0..samples {
        let beta = exponent_draw(&mut rng, i, 1.0, 2.0);
        loop {
            ordered(&mut rng, &mut pts);
            let [mut t, a, b, mut c] = pts;
            if i % 17 == 0 {
                t = 0.0;
            }
            if i % 13 == 0 {
                c = b;
            }
            let (lhs, rhs) = wave_ratio_pair(t, a, b, c, beta);
            if lhs != rhs {
                // Dominant side is the right one here.
                worse(
                    &mut worst,
                    &mut witness,
                    rel_margin(rhs, lhs),
                    &[t, a, b, c, beta],
                );
                break;
            }
        }
    }
    OracleOutcome {
        check: "ratio-wave",
        samples,
        worst_margin: worst,
        witness,
        seed,
    }
}

/// Growth cap for [`check_conv_bound`]: the peak of the normalized sum over
/// the last octave of `k` may exceed the peak over all earlier `k` by at
/// most this factor.  Generous enough to absorb the slow transients near
/// exponent boundaries, tight enough to reject any polynomially growing
/// ratio (i.e. a wrong claimed exponent) over the sampled range.
const CONV_GROWTH_CAP: f64 = 1.25;

/// Check boundedness of the normalized convolution sum over
/// `k in [2, k_max]` for random exponents: `beta in (-1, 3]`,
/// `sigma in [1, 4]`, and `gamma` in the regime's range (`(1, 4]`
/// supercritical, `[1/2, 1)` subcritical).  The ratio is evaluated on a
/// two-points-per-octave grid of `k`; the margin is the relative slack of
/// the last octave's peak under [`CONV_GROWTH_CAP`] times the earlier peak.
/// Witness layout: `[beta, gamma, sigma, k_at_peak]`.
pub fn check_conv_bound(
    regime: ConvRegime,
    samples: usize,
    k_max: usize,
    seed: u64,
) -> Result<OracleOutcome> {
    if k_max < 16 {
        return Err(Error::Size {
            name: "k_max",
            value: k_max,
            need: "at least 16",
        });
    }
    // Geometric k grid, two points per octave, always ending at k_max.
    let mut ks = Vec::new();
    let mut k = 2usize;
    while k < k_max {
        ks.push(k);
        ks.push((k * 3 / 2).min(k_max - 1));
        k *= 2;
    }
    ks.push(k_max);
    ks.sort_unstable();
    ks.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut witness = Vec::new();
    for i in 0..samples {
        let beta = exponent_draw(&mut rng, i, -1.0, 3.0);
        let gamma_ = match regime {
            ConvRegime::Supercritical => exponent_draw(&mut rng, i, 1.0, 4.0),
            ConvRegime::Subcritical => match i {
                0 => 0.5,
                _ => exponent_draw(&mut rng, i, 0.5, 1.0),
            },
        };
        let sigma = match i {
            0 => 1.0,
            1 => 4.0,
            _ => 1.0 + 3.0 * rng.gen::<f64>(),
        };
        let half = k_max / 2;
        let mut early = 0.0f64;
        let mut late = 0.0f64;
        let mut peak_k = 0usize;
        let mut finite = true;
        for &ki in &ks {
            let r = conv_ratio(regime, beta, gamma_, sigma, ki);
            if !r.is_finite() || r <= 0.0 {
                finite = false;
                peak_k = ki;
                break;
            }
            if ki <= half {
                early = early.max(r);
            } else if r > late {
                late = r;
                peak_k = ki;
            }
        }
        let margin = if finite {
            rel_margin(CONV_GROWTH_CAP * early, late)
        } else {
            f64::NEG_INFINITY
        };
        worse(
            &mut worst,
            &mut witness,
            margin,
            &[beta, gamma_, sigma, peak_k as f64],
        );
    }
    Ok(OracleOutcome {
        check: regime.id(),
        samples,
        worst_margin: worst,
        witness,
        seed,
    })
}

/// Check the coercivity bound on random cubics `v` with `v(0) = 0` and
/// `gamma in (0, 1/2)`, near-endpoint orders included.  Witness layout:
/// `[gamma, c1, c2, c3]`.
pub fn check_coercivity(samples: usize, seed: u64) -> OracleOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut witness = Vec::new();
    for i in 0..samples {
        let gamma_ = match i {
            0 => 0.25,
            1 => 0.49,
            _ => exponent_draw(&mut rng, i, 0.0, 0.5),
        };
        let cubic = loop {
            let cubic = match i {
                0 => [1.0, 0.0, 0.0],
                1 => {
                    let s = 1.0 + 9.0 * rng.gen::<f64>();
                    [0.0, s, -s]
                }
                _ => [
                    2.0 * rng.gen::<f64>() - 1.0,
                    2.0 * rng.gen::<f64>() - 1.0,
                    2.0 * rng.gen::<f64>() - 1.0,
                ],
            };
            if cubic.iter().any(|c| f::abs(*c) > 1e-3) {
                break cubic;
            }
        };
        let (lhs, rhs) = coercivity_pair(cubic, gamma_);
        if lhs == rhs {
            continue; // exact tie: skip (measure zero; keeps sample count)
        }
        worse(
            &mut worst,
            &mut witness,
            rel_margin(rhs, lhs),
            &[gamma_, cubic[0], cubic[1], cubic[2]],
        );
    }
    OracleOutcome {
        check: "coercivity",
        samples,
        worst_margin: worst,
        witness,
        seed,
    }
}

/// Run every oracle at its standard sample count (10^4 per inequality, 10^2
/// for the quadrature-heavy coercivity check) under one seed.
pub fn standard_suite(seed: u64) -> Result<Vec<OracleOutcome>> {
    Ok(vec![
        check_ratio_monotone(10_000, seed),
        check_ratio_monotone_shifted(10_000, seed.wrapping_add(1)),
        check_ratio_wave(10_000, seed.wrapping_add(2)),
        check_conv_bound(ConvRegime::Supercritical, 10_000, 1_000, seed.wrapping_add(3))?,
        check_conv_bound(ConvRegime::Subcritical, 10_000, 1_000, seed.wrapping_add(4))?,
        check_coercivity(100, seed.wrapping_add(5)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_hand_example() {
        // (t,a,b,c,d) = (0,1,2,3,4), beta = 1/2: both sides in closed form.
        let (lhs, rhs) = ratio_pair(0.0, 1.0, 2.0, 3.0, 4.0, 0.5);
        let s2 = f64::sqrt(2.0);
        let s3 = f64::sqrt(3.0);
        assert!((lhs - (2.0 - s3) / (s3 - s2)).abs() < 1e-15);
        assert!((rhs - (s3 - s2) / (s2 - 1.0)).abs() < 1e-15);
        assert!(lhs > rhs);
    }

    #[test]
    fn shift_with_zero_mu_is_exact() {
        let (t, a, b, c, d) = (0.1, 0.3, 0.5, 0.8, 0.9);
        for beta in [1e-3, 0.3, 0.5, 0.9, 1.0 - 1e-3] {
            let plain = ratio_pair(t, a, b, c, d, beta);
            let shifted = shifted_ratio_pair(t, a, b, c, d, beta, 0.0);
            assert_eq!(plain, shifted);
        }
    }

    #[test]
    fn shifted_hand_examples() {
        let (lhs, rhs) = shifted_ratio_pair(0.0, 1.0, 2.0, 3.0, 4.0, 0.3, 10.0);
        assert!(lhs > rhs, "{lhs} <= {rhs}");
        // Large shifts push both ratios toward (a-t)/(b-a); the ordering
        // persists with a small positive margin.
        let (lhs, rhs) = shifted_ratio_pair(0.0, 1.0, 2.0, 3.0, 4.0, 0.3, 1e6);
        assert!(lhs > rhs);
        assert!((lhs - 1.0).abs() < 1e-5 && (rhs - 1.0).abs() < 1e-5);
    }

    #[test]
    fn wave_hand_example() {
        // (t,a,b,c) = (0,1,2,2), beta = 3/2: lhs = sqrt(2) - 1 < 1 = rhs.
        let (lhs, rhs) = wave_ratio_pair(0.0, 1.0, 2.0, 2.0, 1.5);
        assert!((lhs - (f64::sqrt(2.0) - 1.0)).abs() < 1e-15);
        assert_eq!(rhs, 1.0);
    }

    #[test]
    fn conv_single_term() {
        // k = 2 has the single term j = 1: sum = (2^sigma - 1)^{-gamma}.
        let r = conv_ratio(ConvRegime::Supercritical, 0.0, 1.5, 2.0, 2);
        let expect = f64::powf(3.0, -1.5) / f64::powf(2.0, -1.5);
        assert!((r - expect).abs() < 1e-15 * expect);
    }

    #[test]
    fn conv_spot_checks_are_bounded() {
        // Supercritical spot: beta=1, gamma=2, sigma=1 up to k = 10^4. Here
        // the ratio is zeta(2) - (ln k + gamma_E)/k - O(1/k), so it climbs
        // toward zeta(2) with shrinking increments.
        let r100 = conv_ratio(ConvRegime::Supercritical, 1.0, 2.0, 1.0, 100);
        let r1k = conv_ratio(ConvRegime::Supercritical, 1.0, 2.0, 1.0, 1_000);
        let r10k = conv_ratio(ConvRegime::Supercritical, 1.0, 2.0, 1.0, 10_000);
        assert!((r10k - 1.6449).abs() < 0.01, "{r10k}");
        assert!(r100 < r1k && r1k < r10k);
        assert!(r1k - r100 < 0.1 && r10k - r1k < 0.01);
        // Subcritical spot: gamma = 1/2, sigma = 3.
        let a = conv_ratio(ConvRegime::Subcritical, 0.0, 0.5, 3.0, 1_000);
        let b = conv_ratio(ConvRegime::Subcritical, 0.0, 0.5, 3.0, 10_000);
        assert!(a.is_finite() && b.is_finite());
        assert!(b < a * 1.05, "subcritical ratio grew: {a} -> {b}");
    }

    #[test]
    fn coercivity_linear_closed_form() {
        // v(s) = s, gamma = 1/4: ||L||^2 = 1/(2.5 Gamma(1.75)^2) and
        // <L,R> = 1/Gamma(2.5) - 1/Gamma(3.5).
        let (lhs, rhs) = coercivity_pair([1.0, 0.0, 0.0], 0.25);
        let g175 = gamma(1.75);
        let norm2 = 1.0 / (2.5 * g175 * g175);
        let cross = 1.0 / gamma(2.5) - 1.0 / gamma(3.5);
        let cos = f64::cos(0.25 * core::f64::consts::PI);
        assert!((lhs - cos * norm2).abs() < 1e-14, "{lhs} vs {}", cos * norm2);
        assert!((rhs - cross).abs() < 1e-14, "{rhs} vs {cross}");
        assert!(lhs < rhs);
    }

    #[test]
    fn suite_passes_under_fixed_and_fresh_seeds() {
        for outcome in standard_suite(7).unwrap() {
            assert!(
                outcome.passed(),
                "{} failed: margin {} at witness {:?} (seed {})",
                outcome.check,
                outcome.worst_margin,
                outcome.witness,
                outcome.seed,
            );
            assert_eq!(outcome.samples >= 100, true);
        }
        let fresh = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .expect("clock after epoch")
            .subsec_nanos() as u64;
        for outcome in standard_suite(fresh).unwrap() {
            assert!(
                outcome.passed(),
                "{} failed under fresh seed {}: margin {} at witness {:?}",
                outcome.check,
                fresh,
                outcome.worst_margin,
                outcome.witness,
            );
        }
    }

    #[test]
    fn outcomes_reproduce_from_their_seed() {
        let a = check_ratio_monotone(500, 99);
        let b = check_ratio_monotone(500, 99);
        assert_eq!(a.worst_margin, b.worst_margin);
        assert_eq!(a.witness, b.witness);
        let a = check_coercivity(50, 99);
        let b = check_coercivity(50, 99);
        assert_eq!(a.worst_margin, b.worst_margin);
        assert_eq!(a.witness, b.witness);
    }

    #[test]
    fn conv_bound_rejects_tiny_ranges() {
        assert!(check_conv_bound(ConvRegime::Supercritical, 10, 8, 1).is_err());
    }
}
