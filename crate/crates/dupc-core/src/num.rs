//! Scalar helpers that behave identically with or without `std`.

/// Absolute value via sign-bit masking (exact, backend-independent).
#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    f64::from_bits(x.to_bits() & (u64::MAX >> 1))
}

/// `base^exp` by square-and-multiply. Used instead of `f64::powi` so results
/// do not depend on which math backend (`std` or `libm`) is active.
#[inline]
pub(crate) fn powi(base: f64, mut exp: u32) -> f64 {
    let mut acc = 1.0;
    let mut b = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= b;
        }
        b *= b;
        exp >>= 1;
    }
    acc
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    <f64 as nalgebra::ComplexField>::sqrt(x)
}
