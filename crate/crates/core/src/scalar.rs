//! Numeric abstraction shared by the prestige and mining math.
//!
//! Everything that only needs field arithmetic is written against [`Scalar`],
//! so the same code runs on `f32`, `f64` and exact rationals such as
//! `num_rational::Ratio<i128>`.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num};

use crate::Coins;

/// A real-number stand-in: field operations, ordering and lossless-enough
/// conversion from integer coin balances.
pub trait Scalar: Num + Copy + PartialOrd + FromPrimitive + Debug + 'static {
    /// Converts a coin balance into prestige units.
    fn from_coins(coins: Coins) -> Self {
        Self::from_u64(coins).expect("coin balance not representable in scalar type")
    }

    /// `max(self, 0)`.
    fn non_negative(self) -> Self {
        if self > Self::zero() {
            self
        } else {
            Self::zero()
        }
    }

    fn abs_value(self) -> Self {
        if self < Self::zero() {
            Self::zero() - self
        } else {
            self
        }
    }
}

impl<T> Scalar for T where T: Num + Copy + PartialOrd + FromPrimitive + Debug + 'static {}

/// Relative difference `|a - b| / max(|a|, |b|, 1)`, the comparison used by
/// every conservation check in this workspace.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(1.0);
    (a - b).abs() / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn clamps_and_abs() {
        assert_eq!((-3.5f64).non_negative(), 0.0);
        assert_eq!(2.0f32.non_negative(), 2.0);
        assert_eq!((-3.5f64).abs_value(), 3.5);
        let r = Ratio::<i128>::new(-7, 3);
        assert_eq!(r.abs_value(), Ratio::new(7, 3));
        assert_eq!(<Ratio<i128> as Scalar>::from_coins(5), Ratio::from_integer(5));
    }

    #[test]
    fn relative_error_uses_unit_floor() {
        assert_eq!(relative_error(0.0, 1e-12), 1e-12);
        assert!((relative_error(1000.0, 1001.0) - 1.0 / 1001.0).abs() < 1e-15);
    }
}
