//! Special functions used by the analytical error expressions.

use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecialError {
    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(String),
}

/// Modified Bessel function of the first kind of order -1/2.
///
/// `I_{-1/2}(y) = sqrt(2 / (pi * y)) * cosh(y)`, the closed form of the
/// half-integer series; diverges like `sqrt(2/(pi*y))` as `y -> 0+`.
pub fn bessel_i_neg_half<S: Scalar>(y: S) -> Result<S, SpecialError> {
    if !(y > S::zero()) {
        return Err(SpecialError::NonPositiveArgument(format!("{y}")));
    }
    Ok((S::of(2.0) / (S::PI() * y)).sqrt() * y.cosh())
}
