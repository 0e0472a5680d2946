//! Scalar abstraction for the numeric core.
//!
//! The clustering, projection, and geometry routines are generic over the
//! floating-point type; `f32` and `f64` both work. Concrete `f64` aliases
//! live at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar usable by the numeric core.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + 'static
{
    /// Lossy conversion from `f64`, for thresholds and literals.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 conversion")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sum_of_squares<F: Real>(xs: &[F]) -> F {
        xs.iter().map(|&x| x * x).sum()
    }

    #[test]
    fn works_for_both_float_widths() {
        assert_eq!(sum_of_squares(&[1.0f32, 2.0]), 5.0f32);
        assert_eq!(sum_of_squares(&[1.0f64, 2.0]), 5.0f64);
        assert_eq!(f32::from_f64_lossy(0.5), 0.5f32);
    }
}
