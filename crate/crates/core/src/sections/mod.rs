//! Continuous sections of the bundle of stalks and their identification
//! with the Cuntz semigroup of the field.

mod gamma;
mod pcs;
mod section;

pub use section::{
    extend_nbhd, patch_with, sample_points, section_leq, section_leq_witness, section_waybelow, waybelow_by_interpolation,
    waybelow_by_suprema, RawSection, Section,
};
pub use pcs::{directed_join, pcs_from_element, pcs_make, realize, PCSection};
pub use gamma::{decompose, exact_depth, pointwise_sup_on, values_at, AlphaIso, AlphaReport, GammaElement, SectionsHandle};
