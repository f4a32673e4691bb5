use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::Dyadic;

/// Scalar type used for pixel volumes, capacities, and reallocation costs.
///
/// Only [`Dyadic`] and [`Ratio<i128>`] are exact. Floating point
/// implementations accumulate rounding error once layers get deep, so use
/// them for quick estimates only.
pub trait Volume:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + AddAssign
    + SubAssign
    + Send
    + Sync
    + 'static
{
    /// `4^exponent`.
    fn pow4(exponent: i32) -> Self;

    fn from_u64(n: u64) -> Self;

    fn to_f64(&self) -> f64;

    /// Volume of a pixel (or aligned square) in layer `layer`.
    #[inline]
    fn pixel(layer: u8) -> Self {
        Self::pow4(-(layer as i32))
    }
}

impl Volume for Dyadic {
    #[inline]
    fn pow4(exponent: i32) -> Self {
        Dyadic::pow4(exponent)
    }

    #[inline]
    fn from_u64(n: u64) -> Self {
        Dyadic::from_int(n as i128)
    }

    fn to_f64(&self) -> f64 {
        Dyadic::to_f64(self)
    }
}

impl Volume for Ratio<i128> {
    #[inline]
    fn pow4(exponent: i32) -> Self {
        let p = 1i128 << (2 * exponent.unsigned_abs());
        if exponent >= 0 {
            Ratio::from_integer(p)
        } else {
            Ratio::new(1, p)
        }
    }

    #[inline]
    fn from_u64(n: u64) -> Self {
        Ratio::from_integer(n as i128)
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

macro_rules! float_volume {
    ($t:ty) => {
        impl Volume for $t {
            #[inline]
            fn pow4(exponent: i32) -> Self {
                (4.0 as $t).powi(exponent)
            }

            #[inline]
            fn from_u64(n: u64) -> Self {
                n as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }
        }
    };
}

float_volume!(f32);
float_volume!(f64);
