//! Exact coordinate scalars.
//!
//! Every position and length in a complex is an element of an exact ordered
//! field. The geometry is generic over [`Scalar`]; the crate root fixes the
//! default to [`crate::Rational`].

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// An exact ordered field usable as a coordinate type.
///
/// Floating point types are deliberately not implementors: they are not
/// `Ord`, and every comparison here must be decided exactly.
pub trait Scalar:
    Clone + Ord + Debug + Display + Num + Signed + Send + Sync + 'static
{
    /// `num / den`; `den` must be nonzero.
    fn ratio(num: i64, den: i64) -> Self;

    /// Parses `"p/q"` or `"p"`.
    fn parse_exact(s: &str) -> Option<Self>;

    /// Smallest integer `n >= self`, if it fits in a `u64` (negative values map to 0).
    fn ceil_u64(&self) -> Option<u64>;

    fn half(&self) -> Self {
        self.clone() / Self::from_int(2)
    }

    fn from_int(n: i64) -> Self {
        Self::ratio(n, 1)
    }

    fn recip_int(k: u64) -> Self {
        Self::ratio(1, k as i64)
    }
}

impl<I> Scalar for Ratio<I>
where
    I: Integer
        + Clone
        + Signed
        + FromPrimitive
        + ToPrimitive
        + FromStr
        + Display
        + Debug
        + Send
        + Sync
        + 'static,
{
    fn ratio(num: i64, den: i64) -> Self {
        let n = I::from_i64(num).expect("numerator fits");
        let d = I::from_i64(den).expect("denominator fits");
        Ratio::new(n, d)
    }

    fn parse_exact(s: &str) -> Option<Self> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n = n.parse::<I>().ok()?;
        let d = d.parse::<I>().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Ratio::new(n, d))
    }

    fn ceil_u64(&self) -> Option<u64> {
        if self.is_negative() {
            return Some(0);
        }
        self.ceil().to_integer().to_u64()
    }
}

/// Midpoint of two scalars.
pub fn midpoint<T: Scalar>(a: &T, b: &T) -> T {
    (a.clone() + b.clone()).half()
}
