//! Scalar math support: float intrinsics that work without `std`, gamma
//! function helpers, and compensated (Neumaier) accumulation.

/// Float functions dispatched to `std` intrinsics when available and to
/// `libm` otherwise.  Signatures mirror the `f64` methods.
pub mod f {
    macro_rules! unary {
        ($($name:ident),* $(,)?) => {$(
            #[cfg(feature = "std")]
            #[inline(always)]
            pub fn $name(x: f64) -> f64 { f64::$name(x) }
            #[cfg(not(feature = "std"))]
            #[inline(always)]
            pub fn $name(x: f64) -> f64 { libm::$name(x) }
        )*};
    }

    unary!(exp, sqrt, sin, cos, atan, round);

    #[cfg(feature = "std")]
    #[inline(always)]
    pub fn expm1(x: f64) -> f64 {
        f64::exp_m1(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline(always)]
    pub fn expm1(x: f64) -> f64 {
        libm::expm1(x)
    }

    #[cfg(feature = "std")]
    #[inline(always)]
    pub fn ln(x: f64) -> f64 {
        f64::ln(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline(always)]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }

    #[cfg(feature = "std")]
    #[inline(always)]
    pub fn ln_1p(x: f64) -> f64 {
        f64::ln_1p(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline(always)]
    pub fn ln_1p(x: f64) -> f64 {
        libm::log1p(x)
    }

    #[cfg(feature = "std")]
    #[inline(always)]
    pub fn powf(x: f64, y: f64) -> f64 {
        f64::powf(x, y)
    }
    #[cfg(not(feature = "std"))]
    #[inline(always)]
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }

    #[cfg(feature = "std")]
    #[inline(always)]
    pub fn mul_add(a: f64, b: f64, c: f64) -> f64 {
        f64::mul_add(a, b, c)
    }
    #[cfg(not(feature = "std"))]
    #[inline(always)]
    pub fn mul_add(a: f64, b: f64, c: f64) -> f64 {
        libm::fma(a, b, c)
    }

    /// Complementary error function (only provided by `libm`); a test
    /// oracle for the order-1/2 Mittag-Leffler identity.
    #[cfg(test)]
    #[inline(always)]
    pub fn erfc(x: f64) -> f64 {
        libm::erfc(x)
    }

    #[inline(always)]
    pub fn abs(x: f64) -> f64 {
        // `f64::abs` is a `core` method since 1.85.
        x.abs()
    }
}

/// Gamma function.  `libm`'s implementation is accurate to a couple of ulp
/// over the ranges used here (arguments in roughly `[-170, 172]`).
#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Natural log of `|gamma(x)|`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `sin(pi x)` with exact argument reduction, so that integer `x` gives
/// exactly zero and half-integers give exactly +/-1 up to rounding of `sin`.
pub fn sinpi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    if f::abs(x) >= 9.007_199_254_740_992e15 {
        // Magnitude >= 2^53: x is an even integer.
        return 0.0;
    }
    let n = f::round(x);
    let r = x - n; // r in [-1/2, 1/2], exact
    let s = f::sin(core::f64::consts::PI * r);
    if (n as i64) & 1 == 0 {
        s
    } else {
        -s
    }
}

/// `cos(pi x)` with exact argument reduction.
pub fn cospi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    if f::abs(x) >= 9.007_199_254_740_992e15 {
        return 1.0;
    }
    let n = f::round(x);
    let r = x - n;
    let c = f::cos(core::f64::consts::PI * r);
    if (n as i64) & 1 == 0 {
        c
    } else {
        -c
    }
}

/// Reciprocal gamma `1/Gamma(x)`, returning exact zero at the poles
/// `x = 0, -1, -2, ...`.  Uses the reflection formula on the left half-line,
/// so it stays accurate near the poles where `1/tgamma` would lose digits.
pub fn rgamma(x: f64) -> f64 {
    if x > 0.5 {
        1.0 / gamma(x)
    } else {
        // 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
        let s = sinpi(x);
        if s == 0.0 {
            return 0.0;
        }
        if 1.0 - x > 170.0 {
            // Gamma(1-x) overflows; go through logs.
            let ln_mag = f::ln(f::abs(s) / core::f64::consts::PI) + ln_gamma(1.0 - x);
            let mag = f::exp(ln_mag);
            if s > 0.0 {
                mag
            } else {
                -mag
            }
        } else {
            s * gamma(1.0 - x) / core::f64::consts::PI
        }
    }
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accum {
    sum: f64,
    comp: f64,
}

impl Accum {
    #[inline]
    pub fn new() -> Self {
        Accum { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if f::abs(self.sum) >= f::abs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Add the product `a * b`, splitting it into rounded part plus exact
    /// fma residual so the residual is compensated too.
    #[inline]
    pub fn add_prod(&mut self, a: f64, b: f64) {
        let p = a * b;
        let e = f::mul_add(a, b, -p);
        self.add(p);
        self.add(e);
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated dot product.
pub fn comp_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Accum::new();
    for (&x, &y) in a.iter().zip(b) {
        acc.add_prod(x, y);
    }
    acc.total()
}
