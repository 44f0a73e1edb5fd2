//! The extended naturals `N ∪ {∞}`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A value in `N ∪ {∞}`, ordered with `∞` on top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtNat {
    Fin(u64),
    Inf,
}

pub use ExtNat::{Fin, Inf};

impl ExtNat {
    pub const ZERO: ExtNat = Fin(0);
    pub const ONE: ExtNat = Fin(1);

    pub fn is_finite(self) -> bool {
        matches!(self, Fin(_))
    }

    pub fn is_zero(self) -> bool {
        self == Fin(0)
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Fin(n) => Some(n),
            Inf => None,
        }
    }

    /// Compact containment in `N ∪ {∞}`: `a ≪ b` iff `a` is finite and `a ≤ b`.
    pub fn waybelow(self, other: ExtNat) -> bool {
        self.is_finite() && self <= other
    }

    /// Truncation `min(self, k)`, the canonical rapid chain with supremum `self`.
    pub fn cap(self, k: u64) -> ExtNat {
        self.min(Fin(k))
    }

    pub fn saturating_sub(self, other: ExtNat) -> ExtNat {
        match (self, other) {
            (Inf, _) => Inf,
            (Fin(_), Inf) => Fin(0),
            (Fin(a), Fin(b)) => Fin(a.saturating_sub(b)),
        }
    }
}

impl Default for ExtNat {
    fn default() -> Self {
        Fin(0)
    }
}

impl From<u64> for ExtNat {
    fn from(n: u64) -> Self {
        Fin(n)
    }
}

impl Add for ExtNat {
    type Output = ExtNat;

    fn add(self, rhs: ExtNat) -> ExtNat {
        match (self, rhs) {
            (Fin(a), Fin(b)) => a.checked_add(b).map_or(Inf, Fin),
            _ => Inf,
        }
    }
}

/// Multiplication with `0 · ∞ = 0`, so that `∞ · a = sup_n n · a`.
impl Mul for ExtNat {
    type Output = ExtNat;

    fn mul(self, rhs: ExtNat) -> ExtNat {
        match (self, rhs) {
            (Fin(0), _) | (_, Fin(0)) => Fin(0),
            (Fin(a), Fin(b)) => a.checked_mul(b).map_or(Inf, Fin),
            _ => Inf,
        }
    }
}

impl Sum for ExtNat {
    fn sum<I: Iterator<Item = ExtNat>>(iter: I) -> ExtNat {
        iter.fold(Fin(0), |a, b| a + b)
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fin(n) => write!(f, "{n}"),
            Inf => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Fin(n) => s.serialize_u64(*n),
            Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtNat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Fin(n)),
            Raw::S(s) if s == "inf" || s == "∞" => Ok(Inf),
            Raw::S(s) => Err(serde::de::Error::custom(format!(
                "expected a natural number or \"inf\", found {s:?}"
            ))),
        }
    }
}

/// Saturating addition into `N ∪ {∞}`.
pub fn extnat_add(a: ExtNat, b: ExtNat) -> ExtNat {
    a + b
}

/// Order and compact containment between two extended naturals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub leq: bool,
    pub waybelow: bool,
}

pub fn extnat_compare(a: ExtNat, b: ExtNat) -> Comparison {
    Comparison {
        leq: a <= b,
        waybelow: a.waybelow(b),
    }
}

/// Weighted rank `Σ wᵢ·tᵢ` of a tuple.
pub fn weighted_rank(weights: &[u64], tuple: &[ExtNat]) -> ExtNat {
    weights
        .iter()
        .zip(tuple)
        .map(|(&w, &t)| Fin(w) * t)
        .sum()
}

/// Componentwise order on tuples.
pub fn tuple_leq(a: &[ExtNat], b: &[ExtNat]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn tuple_waybelow(a: &[ExtNat], b: &[ExtNat]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.waybelow(*y))
}

pub fn tuple_add(a: &[ExtNat], b: &[ExtNat]) -> Vec<ExtNat> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

pub(crate) fn fmt_tuple(t: &[ExtNat]) -> String {
    let parts: Vec<String> = t.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb() -> impl Strategy<Value = ExtNat> {
        prop_oneof![4 => (0u64..50).prop_map(Fin), 1 => Just(Inf)]
    }

    #[test]
    fn addition_examples() {
        assert_eq!(extnat_add(Fin(2), Fin(3)), Fin(5));
        assert_eq!(extnat_add(Fin(7), Inf), Inf);
        assert_eq!(extnat_add(Fin(0), Inf), Inf);
        assert_eq!(Fin(u64::MAX) + Fin(1), Inf);
    }

    #[test]
    fn compare_examples() {
        assert_eq!(extnat_compare(Fin(2), Fin(5)), Comparison { leq: true, waybelow: true });
        assert_eq!(extnat_compare(Inf, Inf), Comparison { leq: true, waybelow: false });
        assert_eq!(extnat_compare(Fin(5), Fin(2)), Comparison { leq: false, waybelow: false });
    }

    #[test]
    fn multiplication_absorbs_zero() {
        assert_eq!(Inf * Fin(0), Fin(0));
        assert_eq!(Inf * Fin(2), Inf);
        assert_eq!(Fin(3) * Fin(2), Fin(6));
    }

    #[test]
    fn json_round_trip() {
        let v: Vec<ExtNat> = serde_json::from_str(r#"[0, 4, "inf"]"#).unwrap();
        assert_eq!(v, vec![Fin(0), Fin(4), Inf]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[0,4,"inf"]"#);
        assert!(serde_json::from_str::<ExtNat>(r#""lots""#).is_err());
    }

    proptest! {
        #[test]
        fn semigroup_laws(a in arb(), b in arb(), c in arb()) {
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!((a + b) + c, a + (b + c));
            if a <= b {
                prop_assert!(a + c <= b + c);
            }
            if a.waybelow(b) {
                prop_assert!(a <= b);
                if b <= c { prop_assert!(a.waybelow(c)); }
            }
            prop_assert_eq!(a.waybelow(b), a != Inf && a <= b);
        }

        #[test]
        fn compacts_are_finite(a in arb()) {
            prop_assert_eq!(a.waybelow(a), a.is_finite());
        }
    }
}
