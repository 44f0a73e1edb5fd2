//! Sections of the bundle of stalks: raw input form, continuity, order and
//! compact containment.

use std::fmt;
use std::sync::Arc;

use crate::cellmap::{CellMap, Loc, Region};
use crate::complex::{same_complex, Point};
use crate::error::{CuError, Result};
use crate::extnat::ExtNat;
use crate::field::{FieldElement, ModelField, StalkValue};
use crate::metric::closed_ball;
use crate::patch::ClosedPatch;
use crate::scalar::{midpoint, Scalar};
use crate::step::{LscMode, StepFn};

fn loc_point<T: Scalar>(loc: &Loc<'_, T>) -> Option<Point<T>> {
    match loc {
        Loc::Vertex(v) => Some(Point::Vertex(*v)),
        Loc::Knot(e, t) => Some(Point::Interior(*e, (*t).clone())),
        Loc::Cell(..) => None,
    }
}

/// Knots of all maps on each edge, merged.
pub(crate) fn merged_knots<T: Scalar>(n: usize, lists: impl IntoIterator<Item = Vec<Vec<T>>>) -> Vec<Vec<T>> {
    let mut out = vec![vec![]; n];
    for l in lists {
        for (e, ks) in l.into_iter().enumerate() {
            out[e].extend(ks);
        }
    }
    for ks in &mut out {
        ks.sort();
        ks.dedup();
    }
    out
}

/// A stalk value at every vertex, knot and open cell of a subdivision;
/// `None` outside the domain. Only an input and validation format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawSection<T: Scalar> {
    field: Arc<ModelField<T>>,
    map: CellMap<T, Option<StalkValue>>,
}

impl<T: Scalar> RawSection<T> {
    pub fn new(field: Arc<ModelField<T>>, map: CellMap<T, Option<StalkValue>>) -> Result<Self> {
        if !same_complex(field.base(), map.complex()) {
            return Err(CuError::ComplexMismatch);
        }
        let mut extra = vec![vec![]; field.base().edges().len()];
        for x in field.exceptional() {
            if let Point::Interior(e, t) = &x.point {
                extra[*e].push(t.clone());
            }
        }
        Ok(RawSection { map: map.refine(&extra), field })
    }

    pub fn map(&self) -> &CellMap<T, Option<StalkValue>> {
        &self.map
    }

    pub fn field(&self) -> &Arc<ModelField<T>> {
        &self.field
    }

    /// Value at a point; tuples at exceptional points, scalars elsewhere.
    pub fn eval(&self, p: &Point<T>) -> Option<StalkValue> {
        self.map.eval(p).clone()
    }

    /// The first place where continuity fails: a value of the wrong kind,
    /// or a point whose rank exceeds the value on an adjacent cell.
    pub fn continuity_witness(&self) -> Option<CuError> {
        let cx = self.field.base();
        let dom = self.map.domain();
        if !dom.is_closed() {
            return Some(CuError::InvalidPatch(format!("domain {} is not closed", dom.render())));
        }
        for s in self.map.sites() {
            if let (true, Some(StalkValue::Tuple(_))) = (s.is_cell(), s.value()) {
                return Some(CuError::Discontinuous {
                    at: crate::step::site_name(cx, &s),
                    detail: "tuple on an open cell".into(),
                });
            }
        }
        for (p, v) in self.map.point_sites() {
            let Some(v) = v else { continue };
            let at = cx.render(&p);
            let rank = match (self.field.exceptional_at(&p), v) {
                (None, StalkValue::Scalar(a)) => *a,
                (Some(i), StalkValue::Tuple(t)) if t.len() == self.field.exceptional()[i].arity() => {
                    self.field.exceptional()[i].rank(t)
                }
                (None, _) => return Some(CuError::Discontinuous { at, detail: "tuple at a generic point".into() }),
                (Some(i), _) => {
                    return Some(CuError::Discontinuous {
                        at,
                        detail: format!("expected a tuple of arity {}", self.field.exceptional()[i].arity()),
                    })
                }
            };
            for c in self.map.adjacent_cells(&p).into_iter().flatten() {
                if let StalkValue::Scalar(c) = c {
                    if rank > *c {
                        return Some(CuError::Discontinuous {
                            at,
                            detail: format!("value of rank {rank} exceeds the nearby value {c}"),
                        });
                    }
                }
            }
        }
        None
    }

    pub fn is_continuous(&self) -> bool {
        self.continuity_witness().is_none()
    }
}

/// A continuous section, stored as the field element it is induced by.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section<T: Scalar> {
    elem: FieldElement<T>,
}

impl<T: Scalar> Section<T> {
    /// Validates a raw section.
    pub fn from_raw(raw: &RawSection<T>) -> Result<Self> {
        if let Some(e) = raw.continuity_witness() {
            return Err(e);
        }
        let field = raw.field.clone();
        let knots = raw.map.all_knots();
        let profile = CellMap::build(field.base().clone(), knots, |loc| {
            let v = match &loc {
                Loc::Vertex(v) => raw.map.vertex_value(*v).clone(),
                Loc::Knot(e, t) => raw.map.value_on_edge(*e, t).clone(),
                Loc::Cell(e, lo, hi) => raw.map.value_on_edge(*e, &midpoint(lo, hi)).clone(),
            };
            v.map(|v| match v {
                StalkValue::Scalar(a) => a,
                StalkValue::Tuple(t) => {
                    let p = loc_point(&loc).expect("tuples sit at points");
                    field.exceptional()[field.exceptional_at(&p).expect("exceptional")].rank(&t)
                }
            })
        });
        let mut tuples = std::collections::BTreeMap::new();
        for (i, x) in field.exceptional().iter().enumerate() {
            if let Some(StalkValue::Tuple(t)) = raw.eval(&x.point) {
                tuples.insert(i, t);
            }
        }
        let profile = StepFn::from_map(profile, LscMode::Strict)?;
        Ok(Section { elem: FieldElement::new(field, profile, tuples)? })
    }

    /// The section `x ↦ germ of s at x`.
    pub fn induced(s: &FieldElement<T>) -> Self {
        Section { elem: s.clone() }
    }

    pub fn to_raw(&self) -> RawSection<T> {
        let field = self.elem.field().clone();
        let map = self.elem.profile().map().map_sites(|loc, v| match loc_point(&loc) {
            Some(p) => self.elem.stalk_value(&p),
            None => v.map(StalkValue::Scalar),
        });
        let raw = RawSection::new(field, map).expect("same complex");
        let map = raw.map.map_sites(|loc, v| match loc_point(&loc) {
            Some(p) => self.elem.stalk_value(&p),
            None => v.clone(),
        });
        RawSection { field: raw.field, map }
    }

    /// The field element realizing this section exactly.
    pub fn element(&self) -> &FieldElement<T> {
        &self.elem
    }

    pub fn field(&self) -> &Arc<ModelField<T>> {
        self.elem.field()
    }

    pub fn domain(&self) -> Region<T> {
        self.elem.domain()
    }

    pub fn eval(&self, p: &Point<T>) -> Option<StalkValue> {
        self.elem.stalk_value(p)
    }

    /// Value at `x` and the value along each direction leaving it.
    pub fn local(&self, x: &Point<T>) -> (Option<StalkValue>, Vec<Option<ExtNat>>) {
        let lims = self.elem.profile().map().adjacent_cells(x).into_iter().copied().collect();
        (self.eval(x), lims)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Section { elem: self.elem.add(&other.elem)? })
    }

    pub fn approx(&self, k: u64) -> Self {
        Section { elem: self.elem.approx(k) }
    }

    pub fn is_bounded(&self) -> bool {
        self.elem.is_bounded()
    }

    pub fn restrict(&self, p: &Region<T>) -> Result<Self> {
        Ok(Section { elem: self.elem.restrict(p)? })
    }

    pub fn render(&self) -> String {
        self.elem.render()
    }
}

impl<T: Scalar> fmt::Display for Section<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn check_pair<T: Scalar>(f: &Section<T>, g: &Section<T>) -> Result<()> {
    if f.field() != g.field() {
        return Err(CuError::FieldMismatch);
    }
    if f.domain() != g.domain() {
        return Err(CuError::DomainMismatch);
    }
    Ok(())
}

/// Pointwise comparison of stalk values on the common refinement.
pub fn section_leq<T: Scalar>(f: &Section<T>, g: &Section<T>) -> Result<bool> {
    Ok(section_leq_witness(f, g)?.is_none())
}

pub fn section_leq_witness<T: Scalar>(f: &Section<T>, g: &Section<T>) -> Result<Option<String>> {
    check_pair(f, g)?;
    let (a, b) = (f.to_raw(), g.to_raw());
    let z = a.map.zip(&b.map, |x, y| (x.clone(), y.clone()))?;
    let cx = f.field().base();
    for s in z.sites() {
        if let (Some(x), Some(y)) = s.value() {
            if !x.leq(y) {
                return Ok(Some(crate::step::site_name(cx, &s)));
            }
        }
    }
    Ok(None)
}

/// `f ≪ g` in the section semigroup, decided by the shrink strategy:
/// `f ≤ approx_k(g)` at the horizon of the pair.
pub fn section_waybelow<T: Scalar>(f: &Section<T>, g: &Section<T>) -> Result<bool> {
    check_pair(f, g)?;
    let k = f.elem.horizon(&g.elem);
    section_leq(f, &g.approx(k))
}

/// Points at which local criteria are evaluated: vertices, knots of both
/// sections, and midpoints of the cells between them.
pub fn sample_points<T: Scalar>(maps: &[&Section<T>]) -> Vec<Point<T>> {
    let Some(first) = maps.first() else { return vec![] };
    let cx = first.field().base().clone();
    let knots = merged_knots(cx.edges().len(), maps.iter().map(|s| s.to_raw().map.all_knots()));
    let grid: CellMap<T, ()> = CellMap::build(cx.clone(), knots, |_| ());
    let mut out: Vec<Point<T>> = grid.point_sites().into_iter().map(|(p, _)| p).collect();
    for e in 0..cx.edges().len() {
        for w in grid.knots(e).windows(2) {
            out.push(Point::Interior(e, midpoint(&w[0], &w[1])));
        }
    }
    out
}

/// `g_{V,f}`: `f` on the closed set `V`, `g` off it. Requires `f(y) ≪ g(y)`
/// on `V`.
pub fn patch_with<T: Scalar>(g: &Section<T>, v: &Region<T>, f: &Section<T>) -> Result<Section<T>> {
    check_pair(f, g)?;
    if !v.is_closed() {
        return Err(CuError::InvalidPatch(format!("{} is not closed", v.render())));
    }
    let (rf, rg) = (f.to_raw(), g.to_raw());
    let z = rf.map.zip(&rg.map, |a, b| (a.clone(), b.clone()))?.zip(v, |ab, inside| (ab.0.clone(), ab.1.clone(), *inside))?;
    let cx = g.field().base();
    for s in z.sites() {
        if let (Some(a), Some(b), true) = s.value() {
            if !a.waybelow(b) {
                return Err(CuError::Precondition(format!(
                    "{a} is not compactly contained in {b} at {}",
                    crate::step::site_name(cx, &s)
                )));
            }
        }
    }
    let map = z.map(|(a, b, inside)| if *inside { a.clone() } else { b.clone() });
    Section::from_raw(&RawSection::new(g.field().clone(), map)?)
}

/// The chain oracle: for every sample point `x`, some `g_{V_n, s_n}` with
/// `V_n` the closed `1/n`-ball at `x` and `s_n = approx_n(g)` lies above `f`.
pub fn waybelow_by_suprema<T: Scalar>(f: &Section<T>, g: &Section<T>, nmax: u64) -> Result<bool> {
    check_pair(f, g)?;
    let dom = g.domain();
    let chain: Vec<Section<T>> = (1..=nmax).map(|n| g.approx(n)).collect();
    'points: for x in sample_points(&[f, g]) {
        if !dom.contains(&x) {
            continue;
        }
        for (n, s) in (1..=nmax).zip(&chain) {
            let v = closed_ball(&dom, &x, &T::recip_int(n))?;
            let gv = patch_with(g, &v, s)?;
            if section_leq(f, &gv)? {
                continue 'points;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// The interpolation criterion: at every sample point `x` there is a stalk
/// value `a` with `f(x) ≪ a ≪ g(x)` such that every basis section `s` with
/// `a ≪ ŝ(x)` and `ŝ ≪ g` near `x` satisfies `f ≤ ŝ ≤ g` near `x`.
/// Nearness is decided on germs: point values and directional limits.
pub fn waybelow_by_interpolation<T: Scalar>(f: &Section<T>, g: &Section<T>, basis: &[Section<T>], nmax: u64) -> Result<bool> {
    check_pair(f, g)?;
    let dom = g.domain();
    let chain: Vec<Section<T>> = (1..=nmax).map(|n| g.approx(n)).collect();
    for x in sample_points(&[f, g]) {
        if !dom.contains(&x) {
            continue;
        }
        let (fx, fl) = f.local(&x);
        let (gx, gl) = g.local(&x);
        let (fx, gx) = (fx.expect("in domain"), gx.expect("in domain"));
        let mut cands: Vec<StalkValue> = chain.iter().filter_map(|s| s.eval(&x)).collect();
        cands.sort();
        cands.dedup();
        let locals: Vec<(StalkValue, Vec<Option<ExtNat>>)> =
            basis.iter().map(|s| { let (v, l) = s.local(&x); (v.expect("in domain"), l) }).collect();
        let good = cands.iter().filter(|a| fx.waybelow(a) && a.waybelow(&gx)).any(|a| {
            locals.iter().all(|(sx, sl)| {
                let below_g = sx.waybelow(&gx)
                    && sl.iter().zip(&gl).all(|(s, g)| match (s, g) {
                        (Some(s), Some(g)) => s.waybelow(*g),
                        _ => true,
                    });
                if !a.waybelow(sx) || !below_g {
                    return true;
                }
                fx.leq(sx)
                    && sx.leq(&gx)
                    && fl.iter().zip(sl).zip(&gl).all(|((f, s), g)| match (f, s, g) {
                        (Some(f), Some(s), Some(g)) => f <= s && s <= g,
                        _ => true,
                    })
            })
        });
        if !good {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A closed patch `W ⊇ V` (with `V` inside its interior) on which `s'` is
/// compactly contained in `f`, found by halving a dyadic enlargement.
pub fn extend_nbhd<T: Scalar>(
    s: &FieldElement<T>,
    s_prime: &FieldElement<T>,
    v: &ClosedPatch<T>,
    f: &Section<T>,
) -> Result<ClosedPatch<T>> {
    let sv = Section::induced(&s.restrict_patch(v)?);
    if !section_leq(&sv, &f.restrict(v.region())?)? {
        return Err(CuError::Precondition(format!("the section of s exceeds f on {}", v.render())));
    }
    if !s_prime.waybelow(s)? {
        return Err(CuError::Precondition("s' is not compactly contained in s".into()));
    }
    let cx = v.complex();
    let total = cx.edges().iter().fold(T::zero(), |acc, e| acc + e.length.clone());
    let floor = [s.profile().map().min_gap(), s_prime.profile().map().min_gap(), f.element().profile().map().min_gap(), v.region().min_gap()]
        .into_iter()
        .min()
        .expect("nonempty")
        / T::from_int(4);
    let mut eps = T::one();
    while eps < total {
        eps = eps.clone() + eps;
    }
    while eps >= floor {
        let w = v.enlarge(&eps)?;
        if s_prime.restrict_patch(&w)?.waybelow(f.restrict(w.region())?.element())? {
            return Ok(w);
        }
        eps = eps.half();
    }
    Err(CuError::NoEnlargement(format!("no neighbourhood of {} down to radius {}", v.render(), floor)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::OneComplex;
    use crate::extnat::{Fin, Inf};
    use crate::patch::OpenSet;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn unit() -> Arc<OneComplex<Rational>> {
        Arc::new(OneComplex::unit_interval())
    }

    fn triv() -> Arc<ModelField<Rational>> {
        Arc::new(ModelField::trivial(unit()))
    }

    fn sec(f: StepFn<Rational>) -> Section<Rational> {
        Section::induced(&FieldElement::lift(triv(), f).unwrap())
    }

    fn ind(a: Rational, b: Rational, v: u64) -> StepFn<Rational> {
        StepFn::indicator(&OpenSet::interval(&unit(), 0, a, b).unwrap(), Fin(v))
    }

    fn raw(knots: Vec<Rational>, f: impl Fn(Loc<'_, Rational>) -> u64) -> RawSection<Rational> {
        let map = CellMap::build(unit(), vec![knots], |l| Some(StalkValue::Scalar(Fin(f(l)))));
        RawSection::new(triv(), map).unwrap()
    }

    #[test]
    fn continuity_examples() {
        assert!(sec(ind(r(0, 1), r(1, 1), 1)).to_raw().is_continuous());
        let half = r(1, 2);
        let spike = raw(vec![half], |l| u64::from(matches!(l, Loc::Knot(..))));
        assert!(matches!(spike.continuity_witness(), Some(CuError::Discontinuous { .. })));
        let dip = raw(vec![half], |l| u64::from(!matches!(l, Loc::Knot(..))));
        let s = Section::from_raw(&dip).unwrap();
        assert_eq!(s.eval(&Point::Interior(0, r(1, 2))), Some(StalkValue::Scalar(Fin(0))));
        assert_eq!(s.eval(&Point::Vertex(0)), Some(StalkValue::Scalar(Fin(1))));
    }

    #[test]
    fn induced_sections() {
        let one = sec(StepFn::constant(unit(), Fin(1)));
        assert!(one.to_raw().map().values().all(|v| *v == Some(StalkValue::Scalar(Fin(1)))));
        let open = sec(ind(r(0, 1), r(1, 1), 1));
        assert_eq!(open.eval(&Point::Vertex(1)), Some(StalkValue::Scalar(Fin(0))));
        assert_eq!(open.eval(&Point::Interior(0, r(1, 9))), Some(StalkValue::Scalar(Fin(1))));
        assert!(!section_leq(&one, &open).unwrap());
        assert!(section_leq(&open, &one).unwrap());
        assert!(section_leq(&open, &open).unwrap());
        let drop = Arc::new(ModelField::drop_at(unit(), 0, r(1, 3), vec![1, 1]).unwrap());
        let x = FieldElement::new(drop, StepFn::constant(unit(), Fin(3)), [(0, vec![Fin(1), Fin(2)])].into()).unwrap();
        let s = Section::induced(&x);
        assert_eq!(s.eval(&Point::Interior(0, r(1, 3))), Some(StalkValue::Tuple(vec![Fin(1), Fin(2)])));
        assert_eq!(Section::from_raw(&s.to_raw()).unwrap(), s);
    }

    #[test]
    fn waybelow_examples() {
        let open = sec(ind(r(0, 1), r(1, 1), 1));
        let inner = sec(ind(r(1, 4), r(3, 4), 1));
        let one = sec(StepFn::constant(unit(), Fin(1)));
        let two = sec(StepFn::constant(unit(), Fin(2)));
        for (f, g, want) in [(&inner, &open, true), (&open, &open, false), (&one, &two, true), (&two, &one, false)] {
            assert_eq!(section_waybelow(f, g).unwrap(), want, "{f} vs {g}");
            assert_eq!(waybelow_by_suprema(f, g, 24).unwrap(), want, "{f} vs {g}");
        }
    }

    #[test]
    fn patch_with_examples() {
        let one = sec(StepFn::constant(unit(), Fin(1)));
        let two = sec(StepFn::constant(unit(), Fin(2)));
        let v = ClosedPatch::interval(&unit(), 0, r(1, 4), r(3, 4)).unwrap();
        let p = patch_with(&two, v.region(), &one).unwrap();
        assert_eq!(p.eval(&Point::Interior(0, r(1, 4))), Some(StalkValue::Scalar(Fin(1))));
        assert_eq!(p.eval(&Point::Interior(0, r(1, 8))), Some(StalkValue::Scalar(Fin(2))));
        assert_eq!(patch_with(&two, &Region::full(unit()), &one).unwrap(), one);
        let inf = sec(StepFn::constant(unit(), Inf));
        assert!(matches!(patch_with(&inf, v.region(), &inf), Err(CuError::Precondition(_))));
    }

    #[test]
    fn extend_examples() {
        let cx = unit();
        let f0 = triv();
        let lift = |s: StepFn<Rational>| FieldElement::lift(f0.clone(), s).unwrap();
        let v = ClosedPatch::interval(&cx, 0, r(1, 4), r(3, 4)).unwrap();
        let zero = lift(StepFn::zero(cx.clone()));
        assert!(extend_nbhd(&zero, &zero, &v, &Section::induced(&zero)).unwrap().is_whole());
        let two = lift(StepFn::constant(cx.clone(), Fin(2)));
        let one = lift(StepFn::constant(cx.clone(), Fin(1)));
        assert!(extend_nbhd(&two, &one, &v, &Section::induced(&two)).unwrap().is_whole());
        let f = Section::induced(&lift(ind(r(1, 8), r(7, 8), 2)));
        let w = extend_nbhd(&two, &one, &v, &f).unwrap();
        assert_eq!(w.render(), "e[3/16,13/16]");
    }
}
