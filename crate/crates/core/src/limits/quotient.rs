//! Quotients `S/I` by the order-ideal of elements supported in an open set.

use std::sync::Arc;

use crate::cellmap::Region;
use crate::error::Result;
use crate::extnat::Inf;
use crate::field::{FieldElement, FieldHandle, ModelField};
use crate::order::CuSemigroup;
use crate::patch::OpenSet;
use crate::scalar::Scalar;
use crate::step::StepFn;

/// `[s] ≤ [t]` in `S(X)/I_W`, where `I_W = {z : {z ≥ 1} ⊆ W}`: pointwise
/// comparison on the complement of `W`.
pub fn quotient_leq<T: Scalar>(w: &OpenSet<T>, s: &FieldElement<T>, t: &FieldElement<T>) -> Result<bool> {
    let c = w.complement();
    s.restrict(&c)?.leq(&t.restrict(&c)?)
}

/// The same relation decided by exhibiting the largest ideal element
/// `z = ∞ · 1_W` and testing `s ≤ t + z`.
pub fn quotient_leq_by_ideal<T: Scalar>(w: &OpenSet<T>, s: &FieldElement<T>, t: &FieldElement<T>) -> Result<bool> {
    let z = FieldElement::lift_with(t.field().clone(), StepFn::indicator(w, Inf), |i, _| {
        vec![Inf; t.field().exceptional()[i].arity()]
    })?;
    s.leq(&t.add(&z)?)
}

/// `S(X)/I_W`, with classes represented by restrictions to `X ∖ W`.
#[derive(Clone, Debug)]
pub struct QuotientHandle<T: Scalar> {
    w: OpenSet<T>,
    inner: FieldHandle<T>,
}

impl<T: Scalar> QuotientHandle<T> {
    pub fn new(field: Arc<ModelField<T>>, w: OpenSet<T>) -> Self {
        let c = w.complement();
        QuotientHandle { w, inner: FieldHandle::on_region(field, c) }
    }

    pub fn ideal_support(&self) -> &OpenSet<T> {
        &self.w
    }

    pub fn complement(&self) -> &Region<T> {
        self.inner.domain()
    }

    /// The quotient map.
    pub fn class_of(&self, s: &FieldElement<T>) -> Result<FieldElement<T>> {
        s.restrict(self.inner.domain())
    }
}

impl<T: Scalar> CuSemigroup for QuotientHandle<T> {
    type Elem = FieldElement<T>;

    fn describe(&self) -> String {
        format!("S(X)/I where I is supported in {}", self.w.render())
    }

    fn zero(&self) -> Self::Elem {
        self.inner.zero()
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.inner.add(a, b)
    }

    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.inner.leq(a, b)
    }

    fn waybelow(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.inner.waybelow(a, b)
    }

    fn same(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        a == b
    }

    fn approximant(&self, x: &Self::Elem, k: u64) -> Self::Elem {
        self.inner.approximant(x, k)
    }

    fn horizon(&self, x: &Self::Elem, y: &Self::Elem) -> u64 {
        self.inner.horizon(x, y)
    }

    fn is_basis(&self, x: &Self::Elem) -> bool {
        self.inner.is_basis(x)
    }

    fn enumerate(&self, bound: u64, resolution: u64, cap: usize) -> Result<Vec<Self::Elem>> {
        self.inner.enumerate(bound, resolution, cap)
    }

    fn render(&self, x: &Self::Elem) -> String {
        format!("[{}]", x.render())
    }
}
