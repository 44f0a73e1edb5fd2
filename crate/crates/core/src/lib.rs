//! Cuntz semigroups of model continuous fields over one-dimensional complexes.

pub mod action;
pub mod cellmap;
pub mod complex;
pub mod error;
pub mod extnat;
pub mod field;
pub mod limits;
pub mod metric;
pub mod order;
pub mod patch;
pub mod scalar;
pub mod schema;
pub mod sections;
pub mod step;

use num_bigint::BigInt;
use num_rational::Ratio;

pub type Rational = Ratio<i64>;
pub type BigRational = Ratio<BigInt>;

pub use error::{CuError, Result};
pub use extnat::ExtNat;
pub use scalar::Scalar;
