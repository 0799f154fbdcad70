//! Floating point abstraction used by every numeric kernel in this crate.
//!
//! All solvers are generic over [`Scalar`], a blanket trait satisfied by
//! `f32` and `f64`. The crate root exports `f64`-backed aliases, which is
//! the precision the toolkit is normally run at; `f32` trades accuracy for
//! memory on large grids.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts a finite `f64` constant into the scalar type, rounding if
    /// the target is narrower.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts into any float scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("float scalar widens to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn of_round_trips_through_f64() {
        assert_eq!(f64::of(0.25), 0.25);
        assert_eq!(f32::of(0.25), 0.25f32);
        assert_eq!(0.25f32.as_f64(), 0.25);
    }

    fn sum_generic<F: Scalar>(xs: &[F]) -> F {
        xs.iter().copied().sum()
    }

    #[test]
    fn generic_sum_works_for_both_widths() {
        assert_eq!(sum_generic(&[1.0f64, 2.0, 3.0]), 6.0);
        assert_eq!(sum_generic(&[1.0f32, 2.0, 3.0]), 6.0);
    }
}
