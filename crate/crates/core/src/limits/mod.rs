//! Pullbacks, quotients by order-ideals, and stalks as sequential limits.

pub mod germ;
pub mod pullback;
pub mod quotient;

pub use germ::{colimit_cu, colimit_sg, germ_leq, worked_example, stalk, GermElement, GermHandle, GermSignature};
pub use pullback::{pullback_glue, PullbackElement, PullbackHandle};
pub use quotient::{quotient_leq, QuotientHandle};
