//! Closed-form functions behind the rising threshold and the marking budget.
//!
//! Every function comes in two flavours: a checked public one that enforces the
//! documented domain, and a `raw` crate-private one used on hot paths and in
//! the grid validators, where arguments are known to be in range (or where the
//! continuous extension to a boundary point is wanted).

pub mod verify;

use std::sync::LazyLock;

use serde::Serialize;

use crate::error::{domain, Result};

/// The three constants the algorithm is tuned with, derived from their
/// defining formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    /// Target competitive ratio, `1 / (1 + ln 2)`.
    pub ratio: f64,
    /// Density constant scaling the marking budget.
    pub xi_c: f64,
    /// Boundary between small and medium items.
    pub phi: f64,
}

impl Constants {
    fn compute() -> Self {
        let ratio = 1.0 / (1.0 + std::f64::consts::LN_2);
        let xi_c = (1.0 + (2.0 / 3.0) * (4.0f64 / 3.0).ln()) * ratio - 2.0 / 3.0;
        let phi = (2.0 / 3.0) * xi_c / (2.0 / 3.0 - ratio + xi_c);
        Constants { ratio, xi_c, phi }
    }
}

pub static CONSTANTS: LazyLock<Constants> = LazyLock::new(Constants::compute);

#[inline]
pub fn ratio() -> f64 {
    CONSTANTS.ratio
}

#[inline]
pub fn xi_c() -> f64 {
    CONSTANTS.xi_c
}

#[inline]
pub fn phi() -> f64 {
    CONSTANTS.phi
}

const TWO_E: f64 = 2.0 * std::f64::consts::E;

pub(crate) mod raw {
    use super::{phi, ratio, xi_c, TWO_E};

    #[inline]
    pub fn threshold(x: f64) -> f64 {
        if x <= ratio() {
            0.5
        } else {
            TWO_E.powf(x - 1.0)
        }
    }

    #[inline]
    pub fn threshold_integral(x: f64) -> f64 {
        if x <= ratio() {
            x / 2.0
        } else {
            ratio() * TWO_E.powf(x - 1.0)
        }
    }

    #[inline]
    pub fn threshold_inverse(c: f64) -> f64 {
        1.0 + ratio() * c.ln()
    }

    #[inline]
    pub fn capped_gain(c: f64) -> f64 {
        c - ratio() * c * (2.0 * c).ln()
    }

    #[inline]
    pub fn excess_gain(c: f64) -> f64 {
        ratio() * c * (2.0 * c).ln()
    }

    #[inline]
    pub fn marking_budget(x: f64) -> f64 {
        if x <= 1.0 / 3.0 {
            xi_c() / x
        } else {
            9.0 * xi_c() * (1.0 - 2.0 * x)
        }
    }

    #[inline]
    pub fn marking_budget_slope(x: f64) -> f64 {
        if x < 1.0 / 3.0 {
            -xi_c() / (x * x)
        } else {
            -18.0 * xi_c()
        }
    }

    #[inline]
    pub fn pile(x: f64) -> f64 {
        (2.0 * x).max(2.0 / 3.0)
    }

    #[inline]
    pub fn tight_adjustment(a: f64, b: f64) -> f64 {
        (a + b - 0.5) * (marking_budget(b) - marking_budget(a))
    }

    #[inline]
    pub fn is_medium(x: f64) -> bool {
        (phi()..=0.5).contains(&x)
    }
}

fn check_unit(function: &'static str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(domain(function, x, "[0, 1]"))
    }
}

fn check_upper_half(function: &'static str, c: f64) -> Result<()> {
    if c > 0.5 && c <= 1.0 {
        Ok(())
    } else {
        Err(domain(function, c, "(1/2, 1]"))
    }
}

fn check_medium(function: &'static str, x: f64) -> Result<()> {
    if raw::is_medium(x) {
        Ok(())
    } else {
        Err(domain(function, x, "[phi, 1/2]"))
    }
}

/// Minimum size of the next accepted large item when a fraction `x` of the
/// bins would hold large items after accepting it.
///
/// Equal to 1/2 up to `ratio()` and `(2e)^(x-1)` beyond, so it is continuous
/// and reaches 1 at `x = 1`.
pub fn threshold(x: f64) -> Result<f64> {
    check_unit("threshold", x)?;
    Ok(raw::threshold(x))
}

/// `∫₀ˣ threshold`.
pub fn threshold_integral(x: f64) -> Result<f64> {
    check_unit("threshold_integral", x)?;
    Ok(raw::threshold_integral(x))
}

/// Inverse of [`threshold`] on its strictly increasing part.
pub fn threshold_inverse(c: f64) -> Result<f64> {
    check_upper_half("threshold_inverse", c)?;
    Ok(raw::threshold_inverse(c))
}

/// `∫₀¹ min{threshold(y), c} dy`: the gain lower bound when every non-large bin
/// is filled to at least `c`.
pub fn capped_gain(c: f64) -> Result<f64> {
    check_upper_half("capped_gain", c)?;
    Ok(raw::capped_gain(c))
}

/// `∫₀¹ max{c - threshold(y), 0} dy`.
pub fn excess_gain(c: f64) -> Result<f64> {
    check_upper_half("excess_gain", c)?;
    Ok(raw::excess_gain(c))
}

/// Fraction of the bins that marked medium items of size at least `x` may
/// occupy.
pub fn marking_budget(x: f64) -> Result<f64> {
    check_medium("marking_budget", x)?;
    Ok(raw::marking_budget(x))
}

/// Derivative of [`marking_budget`]. Undefined at the kink `x = 1/3`.
pub fn marking_budget_slope(x: f64) -> Result<f64> {
    check_medium("marking_budget_slope", x)?;
    if x == 1.0 / 3.0 {
        return Err(domain(
            "marking_budget_slope",
            x,
            "[phi, 1/2] without the kink at 1/3",
        ));
    }
    Ok(raw::marking_budget_slope(x))
}

/// Guaranteed load of a bin stacked with medium items of size at least `x`.
pub fn pile(x: f64) -> Result<f64> {
    if x > 0.0 && x <= 0.5 {
        Ok(raw::pile(x))
    } else {
        Err(domain("pile", x, "(0, 1/2]"))
    }
}

/// `(a + b - 1/2) · (budget(b) - budget(a))`: the load that marked items of
/// sizes in `[b, a)` sitting next to large items contribute above 1/2.
pub fn tight_adjustment(a: f64, b: f64) -> Result<f64> {
    check_medium("tight_adjustment", a)?;
    check_medium("tight_adjustment", b)?;
    Ok(raw::tight_adjustment(a, b))
}
