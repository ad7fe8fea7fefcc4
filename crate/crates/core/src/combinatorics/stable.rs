use statrs::function::erf::{erf, erfc};

use crate::error::{Error, Result};

/// `P(S > t)` for the limit law of the rescaled size of a marked free
/// triangulation: `(1/√(3π)) ∫_t^∞ x^{-3/2} e^{-1/(3x)} dx`.
///
/// The substitution `x = 1/(3s²)` turns this into `erf(1/√(3t))`, which is
/// what gets evaluated.
pub fn stable_half_tail(t: f64) -> Result<f64> {
    check(t)?;
    Ok(erf((3.0 * t).sqrt().recip()))
}

/// `1 - stable_half_tail(t)`, accurate for large `t`.
pub fn stable_half_cdf(t: f64) -> Result<f64> {
    check(t)?;
    Ok(erfc((3.0 * t).sqrt().recip()))
}

fn check(t: f64) -> Result<()> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::invalid("t", format!("{t} is not positive")));
    }
    Ok(())
}
