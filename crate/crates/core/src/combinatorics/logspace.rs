//! `f64` natural-log versions of the exact counts, for indices where bignum
//! evaluation is too slow (sampler tables, tail constants).

use std::f64::consts::{LN_2, PI};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::ExactRational;

const SMALL_FACTORIALS: usize = 21;

/// `ln n!`. Exact integer values below 21, Stirling series above.
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < SMALL_FACTORIALS {
        let f: u64 = (2..=n).product();
        return (f as f64).ln();
    }
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + stirling_series(x)
}

fn stirling_series(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))))
}

/// `ln(a! / b!)` for `a ≥ b`, summed term by term when the gap is short so
/// that nearly-equal factorials do not cancel catastrophically.
pub fn ln_factorial_ratio(a: u64, b: u64) -> f64 {
    assert!(a >= b, "ln_factorial_ratio needs a >= b, got {a} < {b}");
    if a - b <= 64 {
        return (b + 1..=a).map(|i| (i as f64).ln()).sum();
    }
    ln_factorial(a) - ln_factorial(b)
}

/// `ln |x|` for an arbitrary-size integer; `-inf` at zero.
pub fn ln_bigint(x: &BigInt) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let x = x.abs();
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top: BigInt = &x >> shift;
    top.to_f64().expect("64-bit value").ln() + shift as f64 * LN_2
}

/// `ln x` for a positive rational.
pub fn ln_rational(x: &ExactRational) -> f64 {
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

pub fn ln_alpha() -> f64 {
    (13.5f64).ln()
}

pub fn ln_triangulation_count(n: u64, m: u64) -> f64 {
    (n + 1) as f64 * LN_2 + ln_factorial(2 * m + 1) + ln_factorial(2 * m + 3 * n)
        - 2.0 * ln_factorial(m)
        - ln_factorial(n)
        - ln_factorial(2 * m + 2 * n + 2)
}

pub fn ln_partition(m: u64) -> f64 {
    ln_factorial(2 * m) - ln_factorial(m) - ln_factorial(m + 2) + (m + 1) as f64 * (2.25f64).ln()
}

pub fn ln_marked_partition(m: u64) -> f64 {
    ln_factorial(2 * m + 2) - ln_factorial(m) - ln_factorial(m + 2) - (6.0f64).ln()
        + (m + 1) as f64 * (2.25f64).ln()
}

/// `ln P(|T| = n)` under the free law on `(m+2)`-gon triangulations.
pub fn ln_free_size_prob(m: u64, n: u64) -> f64 {
    ln_free_size_offset(m) + ln_free_size_shape(m, n)
}

/// The `n`-independent part of [`ln_free_size_prob`].
pub(crate) fn ln_free_size_offset(m: u64) -> f64 {
    LN_2 + ln_factorial(2 * m + 1) - 2.0 * ln_factorial(m) - ln_partition(m)
}

/// `ln (2m+3n)! - ln n! - ln (2m+2n+2)! - n ln(27/4)`, the `n`-dependent part
/// of [`ln_free_size_prob`]. For large `n` the three factorials are expanded
/// together so their leading terms cancel exactly instead of numerically.
pub(crate) fn ln_free_size_shape(m: u64, n: u64) -> f64 {
    if (n as usize) < SMALL_FACTORIALS {
        return ln_factorial(2 * m + 3 * n) - ln_factorial(n) - ln_factorial(2 * m + 2 * n + 2)
            - n as f64 * (6.75f64).ln();
    }
    let (mf, nf) = (m as f64, n as f64);
    let a = 2.0 * mf + 3.0 * nf;
    let c = 2.0 * mf + 2.0 * nf + 2.0;
    2.0 - 2.0 * nf.ln() + 2.0 * mf * 3f64.ln() - (2.0 * mf + 2.0) * LN_2
        + a * (2.0 * mf / (3.0 * nf)).ln_1p()
        - c * ((mf + 1.0) / nf).ln_1p()
        + 0.5 * (a / (2.0 * PI * nf * c)).ln()
        + stirling_series(a)
        - stirling_series(nf)
        - stirling_series(c)
}

/// `ln P(X = -k)` for the boundary chain at `m`.
pub fn ln_step_down_prob(m: u64, k: u64) -> f64 {
    assert!(k >= 1 && k <= m, "down-step {k} outside 1..={m}");
    LN_2 + ln_factorial(2 * k - 2) - ln_factorial(k - 1) - ln_factorial(k + 1)
        + 2.0 * ln_factorial_ratio(m, m - k)
        - ln_factorial_ratio(2 * m + 1, 2 * m - 2 * k + 1)
}

/// Ratio of the free-size tail constant to the partition function: the
/// probability of size `n` behaves like this value times `n^{-5/2}`.
pub fn free_size_tail_constant(m: u64) -> f64 {
    let m = m as f64;
    3f64.sqrt() * (2.0 * m + 1.0) * (m + 1.0) * (m + 2.0) / (9.0 * PI.sqrt())
}
