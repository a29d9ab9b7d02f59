#!/usr/bin/env python3
"""Generate the Mittag-Leffler reference fixture (tests/data/ml_reference.csv).

Evaluates E_{a,b}(z) for z <= 0 to ~200 significant digits with mpmath,
using two branches that are cross-validated on an overlap band:

* power series  sum_k z^k / Gamma(a k + b)  while |z|^{1/a} <= R_SERIES.
  The alternating series cancels down from a peak term of size ~exp(|z|^{1/a}),
  so the working precision is raised by |z|^{1/a}/ln(10) digits.

* algebraic asymptotic series  -sum_{k>=1} z^{-k}/Gamma(b - a k)  beyond,
  truncated at its smallest term (error ~exp(-|z|^{1/a}), far below target
  precision once |z|^{1/a} > R_SERIES), plus the saddle-point exponential
  pair for a >= 1:
      (2/a) Re[ exp(s0) s0^{1-b} ],    s0 = |z|^{1/a} exp(i pi / a),
  which degenerates to a single half-weight term exp(-x) x^{1-b} cos(pi(1-b))
  at a = 1 exactly (the two saddles coincide on the negative axis).

Rows whose value sits too close to a zero of E relative to the natural
magnitude of its defining terms are excluded and resampled: double-precision
implementations cannot reach 1e-10 *relative* accuracy at cancellation-driven
near-zeros, so the fixture deliberately avoids them (the absolute fallback in
the consuming test covers zero itself via the z = 0 rows).

Deterministic: fixed RNG seed; reruns reproduce the same fixture byte for byte.
"""

import csv
import math
import os
import random
import sys
import tempfile

from mpmath import mp, mpf, mpc

R_SERIES = 700.0          # branch point in |z|^{1/a}
TARGET_DPS = 200          # digits we trust in the output
OUT_DIGITS = 30           # digits written to the fixture
SEED = 20260819


def ml_series(a, b, x, r_big):
    """Power series of E_{a,b}(-x); r_big = x**(1/a) bounds the peak term.

    All Gamma arguments are formed in working precision: `a*k + b` in double
    precision would perturb the argument by ~1e-16 relative, which is a
    ~psi(a k + b) * 1e-13 relative error on terms of size exp(r_big) — fatally
    amplified by the cancellation.  The stored doubles are exact rationals and
    are treated as such.
    """
    cancel = int(r_big / math.log(10.0)) + 10
    with mp.workdps(TARGET_DPS + cancel + 30):
        am = mpf(a)
        bm = mpf(b)
        xm = mpf(x)
        s = mp.rgamma(bm)
        term_scale = mpf(1)
        k = 0
        kmin = int(r_big / a) + 10
        kcap = int(r_big / a) + 40000
        tiny = mpf(10) ** (-(TARGET_DPS + cancel + 10))
        while True:
            k += 1
            term_scale *= xm
            term = term_scale * mp.rgamma(am * k + bm)
            if k % 2 == 1:
                s -= term
            else:
                s += term
            if k >= kmin and abs(term) < tiny:
                break
            if k > kcap:
                raise RuntimeError(f"series did not converge: a={a} b={b} x={x}")
        return +s


def ml_asymptotic(a, b, x, r_big):
    """Optimally truncated algebraic series plus saddle terms for a >= 1.

    The truncation decision uses the smooth envelope
    `x^{-k} Gamma(a k + 1 - b) / pi` of the terms, not the terms themselves:
    `1/Gamma(b - a k)` carries a `sin(pi (b - a k))` factor that dips through
    zero along the way (rapidly so for small `a`), and a naive
    first-term-growth rule would stop at a sin dip long before the true
    optimum.  The envelope bottoms out at ~exp(-x^{1/a}), which is far below
    the target precision whenever this branch is selected.
    """
    with mp.workdps(TARGET_DPS + 60):
        am = mpf(a)
        bm = mpf(b)
        xm = mpf(x)
        s = mpf(0)
        xk = mpf(1)
        lnx = math.log(x)
        floor_ln = -(TARGET_DPS + 40) * math.log(10.0)
        prev_env = math.inf
        truncated = False
        for k in range(1, 200000):
            arg = a * k + 1.0 - b
            if arg >= 2.0:
                env = math.lgamma(arg) - k * lnx
                if env > prev_env:
                    truncated = True  # past the optimal truncation point
                    break
                prev_env = env
            else:
                # |1/Gamma(b - a k)| <= 1 while arg < 2 (the sin zero tames
                # the Gamma pole), so x^{-k} alone bounds these terms; never
                # growth-stop here.
                env = -k * lnx
            xk /= xm
            term = xk * mp.rgamma(bm - am * k)
            if k % 2 == 1:
                s += term
            else:
                s -= term
            if env < floor_ln:
                truncated = True
                break
        if not truncated:
            raise RuntimeError(f"asymptotic did not truncate: a={a} b={b} x={x}")
        expo = mpf(0)
        if a == 1.0:
            expo = mp.exp(-xm) * mp.power(xm, 1 - bm) * mp.cospi(1 - bm)
        elif a > 1.0:
            r = mp.power(xm, 1 / am)
            s0 = r * mp.expjpi(1 / am)
            expo = (2 / am) * mp.re(mp.exp(s0) * mp.power(s0, mpc(1) - bm))
        return +(s + expo)


def exp_amplitude(a, b, x):
    """Magnitude of the saddle contribution (0 for a < 1)."""
    if a < 1.0 or x <= 0.0:
        return mpf(0)
    with mp.workdps(40):
        r = mp.power(mpf(x), 1 / mpf(a))
        re_s0 = r * mp.cospi(1 / mpf(a))
        if re_s0 < -4000:
            return mpf(0)
        weight = 1 if a == 1.0 else 2 / mpf(a)
        return weight * mp.exp(re_s0) * mp.power(r, 1 - b)


def ml_neg(a, b, x):
    """E_{a,b}(-x) for x >= 0."""
    if x == 0.0:
        with mp.workdps(TARGET_DPS + 20):
            return +mp.rgamma(b)
    log_r = math.log(x) / a
    if log_r <= math.log(R_SERIES):
        return ml_series(a, b, x, math.exp(log_r))
    return ml_asymptotic(a, b, x, math.exp(log_r))


def natural_scale(a, b, x):
    """Rough magnitude of the terms E is built from (for near-zero exclusion)."""
    if x <= 2.0:
        with mp.workdps(40):
            return abs(mp.rgamma(b)) + mpf(10) ** -2
    with mp.workdps(40):
        t1 = abs(mp.rgamma(b - a)) / mpf(x)
        t2 = abs(mp.rgamma(b - 2 * a)) / mpf(x) ** 2
        return t1 + t2 + exp_amplitude(a, b, x) + mpf(10) ** -300


def validate():
    ok = True

    def check(label, got, want, tol):
        nonlocal ok
        err = abs(got - want) / max(abs(want), mpf(10) ** -150)
        if err > tol:
            ok = False
            print(f"FAIL {label}: rel err {mp.nstr(err, 3)}")

    with mp.workdps(TARGET_DPS + 20):
        # exp identity at a = 1 across both branches
        for x in (0.3, 5.0, 60.0, 1.2e3, 3.7e7):
            check(f"exp({x})", ml_neg(1.0, 1.0, x), mp.exp(mpf(-x)), mpf(10) ** -180)
        # cos identity at a = 2
        for x in (0.5, 49.0, 1.0e6):
            want = mp.cos(mp.sqrt(mpf(x)))
            if abs(want) > 0.05:
                check(f"cos({x})", ml_neg(2.0, 1.0, x), want, mpf(10) ** -180)
        # erfc identity at a = 1/2: E_{1/2,1}(-x) = e^{x^2} erfc(x)
        for x in (0.25, 1.0, 9.0, 25.0, 28.0, 200.0):
            want = mp.exp(mpf(x) ** 2) * mp.erfc(mpf(x))
            check(f"erfc({x})", ml_neg(0.5, 1.0, x), want, mpf(10) ** -180)
        # recurrence E_{a,b}(z) = z E_{a,a+b}(z) + 1/Gamma(b).  Draw a and b
        # on a dyadic grid so the shifted parameter a+b is an exact double.
        rng = random.Random(SEED + 1)
        for _ in range(40):
            a = round(rng.uniform(0.05, 1.99) * 2.0**40) / 2.0**40
            b = round(rng.uniform(0.1, 3.0) * 2.0**40) / 2.0**40
            assert mpf(a + b) == mpf(a) + mpf(b)
            x = 10.0 ** rng.uniform(-6.0, 6.0)
            lhs = ml_neg(a, b, x)
            rhs = -mpf(x) * ml_neg(a, a + b, x) + mp.rgamma(b)
            scale = natural_scale(a, b, x) + abs(lhs)
            err = abs(lhs - rhs) / scale
            if err > mpf(10) ** -170:
                ok = False
                print(f"FAIL recurrence a={a} b={b} x={x}: {mp.nstr(err, 3)}")
        # overlap: series vs asymptotic around the branch point
        rng = random.Random(SEED + 2)
        for _ in range(30):
            a = rng.uniform(0.05, 1.99)
            b = rng.uniform(0.1, 4.0)
            rb = rng.uniform(R_SERIES * 0.9, R_SERIES * 1.25)
            x = math.exp(a * math.log(rb))
            se = ml_series(a, b, x, rb)
            asy = ml_asymptotic(a, b, x, rb)
            scale = natural_scale(a, b, x) + abs(se)
            err = abs(se - asy) / scale
            if err > mpf(10) ** -170:
                ok = False
                print(f"FAIL overlap a={a} b={b} x={x}: rel {mp.nstr(err, 3)}")
    return ok


def main():
    out_path = os.path.join(
        os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
        "crates",
        "fracgal-core",
        "tests",
        "data",
        "ml_reference.csv",
    )
    os.makedirs(os.path.dirname(out_path), exist_ok=True)

    print("validating branches ...", flush=True)
    if not validate():
        print("validation FAILED; fixture not written")
        sys.exit(1)
    print("validation OK", flush=True)

    rng = random.Random(SEED)
    rows = []
    excluded = 0

    def push(a, b, x):
        nonlocal excluded
        val = ml_neg(a, b, x)
        if x > 0.0 and abs(val) < mpf(10) ** -4 * natural_scale(a, b, x):
            excluded += 1
            return False
        rows.append((a, b, -x if x != 0.0 else 0.0, mp.nstr(val, OUT_DIGITS)))
        return True

    # Bulk random band.
    n_bulk = 850
    while len(rows) < n_bulk:
        a = rng.uniform(0.05, 1.99)
        b = rng.uniform(0.1, 4.0)
        x = 10.0 ** rng.uniform(-8.0, 8.0)
        if push(a, b, x) and len(rows) % 100 == 0:
            print(f"  {len(rows)} rows", flush=True)

    # a = 1 and a = 2 edges of the admissible order interval.
    for a_fixed, count in ((1.0, 40), (2.0, 40)):
        done = 0
        while done < count:
            b = rng.uniform(0.1, 4.0)
            x = 10.0 ** rng.uniform(-8.0, 8.0)
            if push(a_fixed, b, x):
                done += 1

    # z = 0 rows: E = 1/Gamma(b).
    for _ in range(30):
        a = rng.uniform(0.05, 2.0)
        b = rng.uniform(0.1, 4.0)
        push(a, b, 0.0)

    # Near-one orders from both sides (production switches formulas there).
    done = 0
    while done < 40:
        a = 1.0 + rng.choice([-1.0, 1.0]) * 10.0 ** rng.uniform(-6.0, -0.3)
        b = rng.uniform(0.1, 4.0)
        x = 10.0 ** rng.uniform(-8.0, 8.0)
        if push(a, b, x):
            done += 1

    print(f"{len(rows)} rows generated, {excluded} near-zero draws excluded", flush=True)

    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(out_path), suffix=".tmp")
    with os.fdopen(fd, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "beta", "z", "value"])
        for a, b, z, val in rows:
            w.writerow([repr(a), repr(b), repr(z), val])
    os.replace(tmp, out_path)
    print(f"wrote {out_path}", flush=True)


if __name__ == "__main__":
    main()
