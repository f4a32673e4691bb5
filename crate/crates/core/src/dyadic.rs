//! Exact dyadic rationals `m * 4^e`.
//!
//! Every volume that arises from aligned squares is a finite sum of powers of
//! four, so this representation is closed under the arithmetic the allocator
//! performs and comparisons are exact.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

/// A dyadic rational `mantissa * 4^exponent`.
///
/// Values are kept normalized: either the mantissa is zero and the exponent
/// is zero, or the mantissa is not divisible by four. Structural equality is
/// therefore numeric equality.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    mantissa: i128,
    exponent: i32,
}

/// Multiplies `m` by `4^k`, panicking on overflow.
#[inline]
fn scale(m: i128, k: u32) -> i128 {
    if m == 0 || k == 0 {
        return m;
    }
    let shifted = m.checked_shl(2 * k).unwrap_or(0);
    assert!(
        k < 63 && shifted >> (2 * k) == m,
        "dyadic overflow while aligning exponents"
    );
    shifted
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic {
        mantissa: 0,
        exponent: 0,
    };
    pub const ONE: Dyadic = Dyadic {
        mantissa: 1,
        exponent: 0,
    };

    #[inline]
    pub fn new(mantissa: i128, exponent: i32) -> Self {
        let mut d = Dyadic { mantissa, exponent };
        d.normalize();
        d
    }

    /// `4^exponent`.
    #[inline]
    pub fn pow4(exponent: i32) -> Self {
        Dyadic {
            mantissa: 1,
            exponent,
        }
    }

    pub fn from_int(n: i128) -> Self {
        Dyadic::new(n, 0)
    }

    pub fn mantissa(&self) -> i128 {
        self.mantissa
    }

    pub fn exponent(&self) -> i32 {
        self.exponent
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa < 0
    }

    pub fn abs(self) -> Self {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Multiplies by `4^k` exactly.
    pub fn mul_pow4(self, k: i32) -> Self {
        if self.mantissa == 0 {
            return self;
        }
        Dyadic {
            mantissa: self.mantissa,
            exponent: self.exponent + k,
        }
    }

    /// True if the value is `4^-l` for some integer `l >= 0`.
    pub fn is_power_of_quarter(&self) -> bool {
        self.mantissa == 1 && self.exponent <= 0
    }

    pub fn to_f64(&self) -> f64 {
        self.mantissa as f64 * 4f64.powi(self.exponent)
    }

    #[inline]
    fn normalize(&mut self) {
        if self.mantissa == 0 {
            self.exponent = 0;
            return;
        }
        let k = self.mantissa.trailing_zeros() / 2;
        self.mantissa >>= 2 * k;
        self.exponent += k as i32;
    }

    /// Mantissas of `self` and `other` at the common (smaller) exponent.
    #[inline]
    fn aligned(&self, other: &Self) -> (i128, i128, i32) {
        if self.mantissa == 0 {
            return (0, other.mantissa, other.exponent);
        }
        if other.mantissa == 0 {
            return (self.mantissa, 0, self.exponent);
        }
        let e = self.exponent.min(other.exponent);
        (
            scale(self.mantissa, (self.exponent - e) as u32),
            scale(other.mantissa, (other.exponent - e) as u32),
            e,
        )
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({self})")
    }
}

/// Prints the reduced fraction, e.g. `3/16`, or an integer.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent >= 0 {
            return write!(f, "{}", scale(self.mantissa, self.exponent as u32));
        }
        let mut num = self.mantissa;
        let mut twos = -2 * self.exponent as i64;
        if num % 2 == 0 {
            num /= 2;
            twos -= 1;
        }
        if twos >= 127 {
            return write!(f, "{num}/2^{twos}");
        }
        write!(f, "{num}/{}", 1i128 << twos)
    }
}

impl Ord for Dyadic {
    #[inline]
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exponent == other.exponent {
            return self.mantissa.cmp(&other.mantissa);
        }
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    #[inline]
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    #[inline]
    fn add(self, rhs: Dyadic) -> Dyadic {
        if rhs.mantissa == 0 {
            return self;
        }
        if self.mantissa == 0 {
            return rhs;
        }
        let (a, b, e) = self.aligned(&rhs);
        Dyadic::new(a.checked_add(b).expect("dyadic overflow in add"), e)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;

    #[inline]
    fn sub(self, rhs: Dyadic) -> Dyadic {
        self + (-rhs)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;

    #[inline]
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;

    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Dyadic) -> Dyadic {
        Dyadic::new(
            self.mantissa
                .checked_mul(rhs.mantissa)
                .expect("dyadic overflow in mul"),
            self.exponent + rhs.exponent,
        )
    }
}

impl AddAssign for Dyadic {
    #[inline]
    fn add_assign(&mut self, rhs: Dyadic) {
        *self = *self + rhs;
    }
}

impl SubAssign for Dyadic {
    #[inline]
    fn sub_assign(&mut self, rhs: Dyadic) {
        *self = *self - rhs;
    }
}

impl Zero for Dyadic {
    #[inline]
    fn zero() -> Self {
        Dyadic::ZERO
    }

    #[inline]
    fn is_zero(&self) -> bool {
        self.mantissa == 0
    }
}

impl One for Dyadic {
    fn one() -> Self {
        Dyadic::pow4(0)
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::ZERO, Add::add)
    }
}
