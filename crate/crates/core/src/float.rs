//! Generic scalar abstraction.
//!
//! All numerics in this crate are written against [`Real`], a small
//! extension of `num_traits::Float`, so the same code runs at `f32` or
//! `f64` precision. Concrete `f64` aliases for the main types live at the
//! crate root; the stated tolerances (FOC residuals, quadrature targets)
//! are only meaningful at `f64`.

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the crate.
pub trait Real: Float + FloatConst + FromPrimitive + ToPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal. Panics only if the target
    /// type cannot represent any nearby value, which none of the supported
    /// scalars do.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal not representable in scalar type")
    }

    /// Lossy conversion to `f64` for reporting and formatting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize not representable in scalar type")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        assert_eq!(f64::of(1.5), 1.5);
        assert_eq!(f32::of(1.5), 1.5f32);
        assert_eq!(f64::of_usize(7), 7.0);
        assert_eq!(f64::two(), 2.0);
        assert_eq!(f64::half(), 0.5);
    }
}
