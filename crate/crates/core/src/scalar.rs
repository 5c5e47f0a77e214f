//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Real scalar the filters and models are generic over (`f32` or `f64`).
///
/// Everything numeric goes through `nalgebra::RealField` so the same type
/// plugs straight into the dense linear algebra used by the Gaussian filters.
pub trait Real:
    RealField
    + Copy
    + ToPrimitive
    + Default
    + std::fmt::Display
    + std::str::FromStr
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn neg_infinity() -> Self {
        Self::lit(f64::NEG_INFINITY)
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let two_pi = T::two_pi();
    let shifted = theta + T::pi();
    let mut wrapped = shifted - two_pi * (shifted / two_pi).floor() - T::pi();
    // floor() rounding can land exactly on +pi for inputs just below a multiple of 2pi
    if wrapped >= T::pi() {
        wrapped -= two_pi;
    }
    if wrapped < -T::pi() {
        wrapped = -T::pi();
    }
    wrapped
}
