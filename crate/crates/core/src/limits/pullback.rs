//! The pullback `S(U) ⊕_{S(U∩V)} S(V)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{CuError, Result};
use crate::field::{FieldElement, FieldHandle, ModelField};
use crate::order::CuSemigroup;
use crate::patch::ClosedPatch;
use crate::scalar::Scalar;

/// A pair of sections agreeing on the overlap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PullbackElement<T: Scalar> {
    pub left: FieldElement<T>,
    pub right: FieldElement<T>,
}

/// Glues `a ∈ S(U)` and `b ∈ S(V)` into `S(U ∪ V)`; fails with the first
/// point of the overlap where they differ.
pub fn pullback_glue<T: Scalar>(a: &FieldElement<T>, b: &FieldElement<T>) -> Result<FieldElement<T>> {
    a.glue(b)
}

#[derive(Clone, Debug)]
pub struct PullbackHandle<T: Scalar> {
    field: Arc<ModelField<T>>,
    u: ClosedPatch<T>,
    v: ClosedPatch<T>,
    uv: ClosedPatch<T>,
}

impl<T: Scalar> PullbackHandle<T> {
    pub fn new(field: Arc<ModelField<T>>, u: ClosedPatch<T>, v: ClosedPatch<T>) -> Result<Self> {
        let uv = u
            .intersect(&v)
            .map_err(|_| CuError::Precondition(format!("{} ∩ {} has empty interior", u.render(), v.render())))?;
        Ok(PullbackHandle { field, u, v, uv })
    }

    pub fn pair(&self, left: FieldElement<T>, right: FieldElement<T>) -> Result<PullbackElement<T>> {
        let a = left.restrict_patch(&self.uv)?;
        let b = right.restrict_patch(&self.uv)?;
        if a != b {
            a.glue(&b)?;
            return Err(CuError::OverlapMismatch { at: self.uv.render() });
        }
        Ok(PullbackElement { left, right })
    }

    pub fn glued(&self, x: &PullbackElement<T>) -> FieldElement<T> {
        x.left.glue(&x.right).expect("pairs agree on the overlap")
    }

    fn split(&self, s: &FieldElement<T>) -> PullbackElement<T> {
        PullbackElement {
            left: s.restrict_patch(&self.u).expect("inside"),
            right: s.restrict_patch(&self.v).expect("inside"),
        }
    }
}

impl<T: Scalar> CuSemigroup for PullbackHandle<T> {
    type Elem = PullbackElement<T>;

    fn describe(&self) -> String {
        format!("S({}) ⊕ S({}) over S({})", self.u.render(), self.v.render(), self.uv.render())
    }

    fn zero(&self) -> Self::Elem {
        let whole = self.u.union(&self.v).expect("union of patches");
        self.split(&FieldElement::zero_on(self.field.clone(), whole.region()))
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        PullbackElement { left: a.left.add(&b.left).expect("same field"), right: a.right.add(&b.right).expect("same field") }
    }

    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        a.left.leq(&b.left).expect("same field") && a.right.leq(&b.right).expect("same field")
    }

    fn waybelow(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        a.left.waybelow(&b.left).expect("same field") && a.right.waybelow(&b.right).expect("same field")
    }

    fn same(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        a == b
    }

    /// Approximates the glued element and splits it again, so both
    /// coordinates stay compatible on the overlap.
    fn approximant(&self, x: &Self::Elem, k: u64) -> Self::Elem {
        self.split(&self.glued(x).approx(k))
    }

    fn horizon(&self, x: &Self::Elem, y: &Self::Elem) -> u64 {
        self.glued(x).horizon(&self.glued(y))
    }

    fn is_basis(&self, x: &Self::Elem) -> bool {
        x.left.is_bounded() && x.right.is_bounded()
    }

    fn enumerate(&self, bound: u64, resolution: u64, cap: usize) -> Result<Vec<Self::Elem>> {
        let su = FieldHandle::new(self.field.clone(), &self.u)?.enumerate(bound, resolution, cap)?;
        let sv = FieldHandle::new(self.field.clone(), &self.v)?.enumerate(bound, resolution, cap)?;
        let mut by_overlap: BTreeMap<String, Vec<&FieldElement<T>>> = BTreeMap::new();
        for b in &sv {
            by_overlap.entry(b.restrict_patch(&self.uv)?.render()).or_default().push(b);
        }
        let mut out = vec![];
        for a in &su {
            for b in by_overlap.get(&a.restrict_patch(&self.uv)?.render()).into_iter().flatten() {
                out.push(PullbackElement { left: a.clone(), right: (*b).clone() });
                if out.len() > cap {
                    return Err(CuError::EnumerationOverflow { cap });
                }
            }
        }
        Ok(out)
    }

    fn render(&self, x: &Self::Elem) -> String {
        format!("({} | {})", x.left.render(), x.right.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{OneComplex, Point};
    use crate::extnat::Fin;
    use crate::step::{LscMode, StepFn};
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn glue_examples() {
        let cx = Arc::new(OneComplex::<Rational>::unit_interval());
        let f = Arc::new(ModelField::trivial(cx.clone()));
        let u = ClosedPatch::interval(&cx, 0, r(0, 1), r(1, 2)).unwrap();
        let v = ClosedPatch::interval(&cx, 0, r(1, 2), r(1, 1)).unwrap();
        let lift = |s: StepFn<Rational>| FieldElement::lift(f.clone(), s).unwrap();
        let one_u = lift(StepFn::constant_on(u.region(), Fin(1)));
        let one_v = lift(StepFn::constant_on(v.region(), Fin(1)));
        let g = pullback_glue(&one_u, &one_v).unwrap();
        assert_eq!(g.profile(), &StepFn::constant(cx.clone(), Fin(1)));

        let two_v = lift(StepFn::constant_on(v.region(), Fin(2)));
        match pullback_glue(&one_u, &two_v) {
            Err(CuError::OverlapMismatch { at }) => assert_eq!(at, "e:1/2"),
            other => panic!("{other:?}"),
        }

        let half = Point::Interior(0, r(1, 2));
        let a = StepFn::make(cx.clone(), Some(u.region()), &[(0, r(0, 1), r(1, 2), Fin(1))], &[(half.clone(), Fin(0))], LscMode::Strict).unwrap();
        let b = StepFn::make(cx.clone(), Some(v.region()), &[(0, r(1, 2), r(1, 1), Fin(1))], &[(half.clone(), Fin(0))], LscMode::Strict).unwrap();
        let g = pullback_glue(&lift(a), &lift(b)).unwrap();
        assert_eq!(g.profile().eval(&half), Some(Fin(0)));
        assert_eq!(g.profile().eval(&Point::Vertex(0)), Some(Fin(1)));
        assert_eq!(g.profile().eval(&Point::Interior(0, r(1, 3))), Some(Fin(1)));
    }

    #[test]
    fn pullback_pairs_must_agree() {
        let cx = Arc::new(OneComplex::<Rational>::unit_interval());
        let f = Arc::new(ModelField::trivial(cx.clone()));
        let u = ClosedPatch::interval(&cx, 0, r(0, 1), r(2, 3)).unwrap();
        let v = ClosedPatch::interval(&cx, 0, r(1, 3), r(1, 1)).unwrap();
        let h = PullbackHandle::new(f.clone(), u.clone(), v.clone()).unwrap();
        let a = FieldElement::lift(f.clone(), StepFn::constant_on(u.region(), Fin(1))).unwrap();
        let b = FieldElement::lift(f.clone(), StepFn::constant_on(v.region(), Fin(2))).unwrap();
        assert!(h.pair(a.clone(), b).is_err());
        let b = FieldElement::lift(f, StepFn::constant_on(v.region(), Fin(1))).unwrap();
        let x = h.pair(a, b).unwrap();
        assert!(h.waybelow(&x, &x));
        assert!(!h.enumerate(2, 3, 100_000).unwrap().is_empty());
    }
}
