//! Exact counting formulas for type II triangulations of polygons and the
//! transition probabilities derived from them.
//!
//! Everything here is evaluated in arbitrary-precision rationals. The
//! [`logspace`] submodule mirrors the same quantities in `f64` log space for
//! indices where bignum evaluation becomes too slow.

mod laws;
pub mod logspace;
mod stable;

pub use laws::{FreePeelLaw, FreeSizeLaw, LawRow, MarkedStepLaw, StepLaw};
pub use stable::{stable_half_cdf, stable_half_tail};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type ExactRational = BigRational;

pub(crate) fn rat(numer: i64, denom: i64) -> ExactRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub(crate) fn int(value: impl Into<BigInt>) -> ExactRational {
    BigRational::from_integer(value.into())
}

pub(crate) fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// `x (x-1) ... (x-k+1)`; the empty product for `k = 0`.
pub(crate) fn descending_factorial(x: &ExactRational, k: u64) -> ExactRational {
    let mut acc = ExactRational::one();
    let mut term = x.clone();
    for _ in 0..k {
        acc *= &term;
        term -= ExactRational::one();
    }
    acc
}

/// Critical weight per internal vertex, 27/2.
pub fn alpha() -> ExactRational {
    rat(27, 2)
}

/// Number of rooted type II triangulations of an `(m+2)`-gon with `n`
/// internal vertices. The `(0, 0)` entry is 1, which stands for gluing the
/// two sides of a 2-gon together.
pub fn triangulation_count(n: u64, m: u64) -> ExactRational {
    let numer = (BigInt::one() << (n + 1)) * factorial(2 * m + 1) * factorial(2 * m + 3 * n);
    let mf = factorial(m);
    let denom = &mf * &mf * factorial(n) * factorial(2 * m + 2 * n + 2);
    BigRational::new(numer, denom)
}

/// Partition function of triangulations of an `(m+2)`-gon at the critical
/// weight: `(2m)! / (m! (m+2)!) * (9/4)^(m+1)`.
pub fn partition(m: u64) -> ExactRational {
    let base = BigRational::new(factorial(2 * m), factorial(m) * factorial(m + 2));
    base * rat(9, 4).pow((m + 1) as i32)
}

/// Partition function at the subcritical point `t = θ(1-2θ)²`, for
/// `θ ∈ [0, 1/6]`.
pub fn partition_at(m: u64, theta: &ExactRational) -> Result<ExactRational> {
    if theta.is_negative() || theta > &rat(1, 6) {
        return Err(Error::invalid("theta", format!("{theta} is outside [0, 1/6]")));
    }
    let one = ExactRational::one();
    let six_theta = rat(6, 1) * theta;
    let linear = (&one - &six_theta) * int(m) + int(2) - &six_theta;
    let base = BigRational::new(factorial(2 * m), factorial(m) * factorial(m + 2));
    let shrink = &one - rat(2, 1) * theta;
    Ok(base * linear / shrink.pow((2 * m + 2) as i32))
}

/// Partition function of triangulations of an `(m+2)`-gon with a marked
/// internal vertex: `(1/6) C(2m+2, m) (9/4)^(m+1)`.
pub fn marked_partition(m: u64) -> ExactRational {
    let binom = factorial(2 * m + 2) / (factorial(m) * factorial(m + 2));
    BigRational::new(binom, BigInt::from(6)) * rat(9, 4).pow((m + 1) as i32)
}

/// Mean number of internal vertices of a free triangulation of an
/// `(m+2)`-gon: `(m+1)(2m+1)/3`.
pub fn free_size_mean(m: u64) -> ExactRational {
    BigRational::new(BigInt::from((m + 1) * (2 * m + 1)), BigInt::from(3))
}

/// Drift of the boundary chain at boundary parameter `m`:
/// `4^m m!² / (2m+1)!`.
pub fn expected_step(m: u64) -> ExactRational {
    let mf = factorial(m);
    BigRational::new((BigInt::one() << (2 * m)) * &mf * &mf, factorial(2 * m + 1))
}

/// Closed form of `P(X = -k | M = m)`; `m ≥ k ≥ 1`.
pub fn step_down_prob(m: u64, k: u64) -> ExactRational {
    if k == 0 || k > m {
        return ExactRational::zero();
    }
    let left = BigRational::new(
        BigInt::from(2) * factorial(2 * k - 2),
        factorial(k - 1) * factorial(k + 1),
    );
    let mf = factorial(m);
    let mkf = factorial(m - k);
    let right = BigRational::new(
        &mf * &mf * factorial(2 * m - 2 * k + 1),
        &mkf * &mkf * factorial(2 * m + 1),
    );
    left * right
}

/// Large-`m` limit of [`step_down_prob`]: `2 (2k-2)! / ((k-1)! (k+1)! 4^k)`.
pub fn limit_down_prob(k: u64) -> ExactRational {
    assert!(k >= 1, "down-steps start at k = 1");
    BigRational::new(
        BigInt::from(2) * factorial(2 * k - 2),
        factorial(k - 1) * factorial(k + 1) * (BigInt::one() << (2 * k)),
    )
}

/// Probability that the boundary chain started at `n` ever visits `m`:
/// `1 - (n)_{m+1} / (n+1/2)_{m+1}`.
pub fn hitting_prob(n: u64, m: u64) -> Result<ExactRational> {
    if n == 0 {
        return Err(Error::invalid("n", "the starting state must be positive"));
    }
    let num = descending_factorial(&int(n), m + 1);
    let den = descending_factorial(&(int(n) + rat(1, 2)), m + 1);
    Ok(ExactRational::one() - num / den)
}

/// Mean of the (geometric) number of visits of the boundary chain to `n`:
/// `(3n+3)/(2n+3) * (n+3/2)_{n+1} / (n+1)!`.
pub fn expected_visits(n: u64) -> ExactRational {
    let lead = rat((3 * n + 3) as i64, (2 * n + 3) as i64);
    let rising = descending_factorial(&(int(n) + rat(3, 2)), n + 1);
    lead * rising / int(factorial(n + 1))
}

/// Converts an exact rational to the nearest-ish `f64` without overflowing
/// on huge numerators and denominators.
pub fn to_f64(x: &ExactRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * logspace::ln_rational(&x.abs()).exp()
}
