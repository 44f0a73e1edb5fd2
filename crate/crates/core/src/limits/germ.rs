//! Germs at a point and the two sequential limits of section semigroups
//! over shrinking balls: the plain algebraic one and the one in Cu.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::cellmap::{Loc, Region};
use crate::complex::{End, OneComplex, Point};
use crate::error::{CuError, Result};
use crate::extnat::{ExtNat, Fin, Inf};
use crate::field::{FieldElement, ModelField, StalkValue};
use crate::metric::closed_ball;
use crate::order::CuSemigroup;
use crate::patch::ClosedPatch;
use crate::scalar::Scalar;
use crate::step::{LscMode, StepFn};

/// Point value (or tuple) together with the limit along each direction
/// leaving the point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GermSignature {
    pub value: StalkValue,
    pub limits: Vec<ExtNat>,
}

impl GermSignature {
    pub fn add(&self, other: &Self) -> Self {
        GermSignature {
            value: self.value.add(&other.value),
            limits: self.limits.iter().zip(&other.limits).map(|(a, b)| *a + *b).collect(),
        }
    }

    pub fn cap(&self, k: u64) -> Self {
        let value = match &self.value {
            StalkValue::Scalar(a) => StalkValue::Scalar(a.cap(k)),
            StalkValue::Tuple(t) => StalkValue::Tuple(t.iter().map(|x| x.cap(k)).collect()),
        };
        GermSignature { value, limits: self.limits.iter().map(|x| x.cap(k)).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.limits.iter().all(|x| x.is_finite())
    }

    fn max_finite(&self) -> u64 {
        let v = match &self.value {
            StalkValue::Scalar(a) => a.finite().unwrap_or(0),
            StalkValue::Tuple(t) => t.iter().filter_map(|x| x.finite()).max().unwrap_or(0),
        };
        self.limits.iter().filter_map(|x| x.finite()).max().unwrap_or(0).max(v)
    }
}

impl fmt::Display for GermSignature {
    /// `(a,b,c)` with `b` the point value when there are two directions,
    /// `(b; c1,…)` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.limits.len() == 2 {
            write!(f, "({},{},{})", self.limits[0], self.value, self.limits[1])
        } else {
            let ls: Vec<String> = self.limits.iter().map(|x| x.to_string()).collect();
            write!(f, "({}; {})", self.value, ls.join(","))
        }
    }
}

/// Names of the directions leaving `x`, in the order used by signatures.
pub fn directions<T: Scalar>(cx: &OneComplex<T>, x: &Point<T>) -> Vec<String> {
    match x {
        Point::Interior(..) => vec!["left".into(), "right".into()],
        Point::Vertex(v) => cx
            .incident(*v)
            .into_iter()
            .map(|(e, end)| {
                let edge = cx.edge(e);
                if edge.from == edge.to {
                    format!("{}{}", edge.id, if end == End::Start { "+" } else { "-" })
                } else {
                    edge.id.clone()
                }
            })
            .collect(),
    }
}

/// Radius below which the closed ball around `x` is a star of segments.
fn star_radius<T: Scalar>(cx: &OneComplex<T>, x: &Point<T>) -> T {
    match x {
        Point::Interior(e, t) => {
            let rest = cx.edge(*e).length.clone() - t.clone();
            if *t < rest {
                t.clone()
            } else {
                rest
            }
        }
        Point::Vertex(v) => cx
            .incident(*v)
            .into_iter()
            .map(|(e, _)| cx.edge(e).length.half())
            .min()
            .unwrap_or_else(T::one),
    }
}

/// Smallest `m ≥ 2` whose ball of radius `1/m` around `x` is a star.
pub fn first_stage<T: Scalar>(cx: &OneComplex<T>, x: &Point<T>) -> u64 {
    let r = star_radius(cx, x);
    let mut m = 2;
    while T::recip_int(m) >= r {
        m += 1;
    }
    m
}

/// The stage patch `U_m`: the closed ball of radius `1/m` around `x`.
pub fn stage<T: Scalar>(cx: &Arc<OneComplex<T>>, x: &Point<T>, m: u64) -> Result<ClosedPatch<T>> {
    ClosedPatch::new(closed_ball(&Region::full(cx.clone()), x, &T::recip_int(m))?)
}

/// Index of the direction from `x` that the offset `t` of edge `e` lies
/// along, for offsets inside a star ball around `x`.
fn direction_of<T: Scalar>(cx: &OneComplex<T>, x: &Point<T>, e: usize, t: &T) -> usize {
    match x {
        Point::Interior(_, t0) => usize::from(t > t0),
        Point::Vertex(v) => {
            let edge = cx.edge(e);
            let end = if edge.from == edge.to {
                if t.clone() + t.clone() < edge.length {
                    End::Start
                } else {
                    End::Finish
                }
            } else if edge.from == *v {
                End::Start
            } else {
                End::Finish
            };
            cx.incident(*v).iter().position(|(f, en)| *f == e && *en == end).expect("incident edge")
        }
    }
}

/// The germ of `sig` realized on `U_m`, or the constructor's rejection.
pub fn germ_rep<T: Scalar>(field: &Arc<ModelField<T>>, x: &Point<T>, sig: &GermSignature, m: u64) -> Result<FieldElement<T>> {
    let cx = field.base();
    let dirs = directions(cx, x).len();
    if sig.limits.len() != dirs {
        return Err(CuError::Precondition(format!("expected {dirs} directional limits, found {}", sig.limits.len())));
    }
    let exc = field.exceptional_at(x);
    let (here, tuples) = match (&sig.value, exc) {
        (StalkValue::Scalar(a), None) => (*a, BTreeMap::new()),
        (StalkValue::Tuple(t), Some(i)) => {
            let x = &field.exceptional()[i];
            if t.len() != x.arity() {
                return Err(CuError::TupleArity { at: cx.render(&x.point), expected: x.arity(), found: t.len() });
            }
            (x.rank(t), BTreeMap::from([(i, t.clone())]))
        }
        (_, Some(i)) => {
            let a = field.exceptional()[i].arity();
            return Err(CuError::TupleArity { at: cx.render(x), expected: a, found: 1 });
        }
        (_, None) => return Err(CuError::TupleArity { at: cx.render(x), expected: 1, found: 0 }),
    };
    let u = stage(cx, x, m)?;
    let mut extra = vec![vec![]; cx.edges().len()];
    if let Point::Interior(e, t) = x {
        extra[*e].push(t.clone());
    }
    let map = u.region().refine(&extra).map_sites(|loc, inside| {
        if !*inside {
            return None;
        }
        let (e, t) = match loc {
            Loc::Vertex(v) if Point::Vertex(v) == *x => return Some(here),
            Loc::Knot(e, t) if Point::Interior(e, t.clone()) == *x => return Some(here),
            Loc::Vertex(v) => {
                let (e, end) = cx.incident(v)[0];
                let t = if end == End::Start { T::zero() } else { cx.edge(e).length.clone() };
                (e, t)
            }
            Loc::Knot(e, t) => (e, t.clone()),
            Loc::Cell(e, lo, hi) => (e, crate::scalar::midpoint(lo, hi)),
        };
        Some(sig.limits[direction_of(cx, x, e, &t)])
    });
    let profile = StepFn::from_map(map, LscMode::Strict)?;
    FieldElement::new(field.clone(), profile, tuples)
}

/// A germ at `point`: an element over a stage patch whose interior contains the point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GermElement<T: Scalar> {
    point: Point<T>,
    rep: FieldElement<T>,
}

impl<T: Scalar> GermElement<T> {
    pub fn new(point: Point<T>, stage: &ClosedPatch<T>, rep: &FieldElement<T>) -> Result<Self> {
        if !stage.interior().contains(&point) {
            return Err(CuError::Precondition(format!(
                "{} is not interior to {}",
                stage.complex().render(&point),
                stage.render()
            )));
        }
        Ok(GermElement { point, rep: rep.restrict_patch(stage)? })
    }

    pub fn from_signature(field: &Arc<ModelField<T>>, point: Point<T>, sig: &GermSignature) -> Result<Self> {
        let m = first_stage(field.base(), &point);
        let rep = germ_rep(field, &point, sig, m)?;
        Ok(GermElement { point, rep })
    }

    pub fn point(&self) -> &Point<T> {
        &self.point
    }

    pub fn rep(&self) -> &FieldElement<T> {
        &self.rep
    }

    pub fn signature(&self) -> GermSignature {
        let value = self.rep.stalk_value(&self.point).expect("point in stage");
        let limits = self
            .rep
            .profile()
            .map()
            .adjacent_cells(&self.point)
            .into_iter()
            .map(|v| v.expect("point interior to stage"))
            .collect();
        GermSignature { value, limits }
    }
}

fn same_point<T: Scalar>(g1: &GermElement<T>, g2: &GermElement<T>) -> Result<()> {
    if g1.point != g2.point {
        return Err(CuError::DifferentBasePoints);
    }
    Ok(())
}

/// The order of the stalk in Cu: comparison of point values.
pub fn germ_leq<T: Scalar>(g1: &GermElement<T>, g2: &GermElement<T>) -> Result<bool> {
    same_point(g1, g2)?;
    Ok(g1.signature().value.leq(&g2.signature().value))
}

pub fn germ_waybelow<T: Scalar>(g1: &GermElement<T>, g2: &GermElement<T>) -> Result<bool> {
    same_point(g1, g2)?;
    Ok(g1.signature().value.waybelow(&g2.signature().value))
}

/// Eventual domination: every approximant `approx_k(rep₁)`, `k ≤ kmax`,
/// lies below `rep₂` on some ball `U_m ∩ stages`, `m ≤ mmax`.
pub fn germ_leq_oracle<T: Scalar>(g1: &GermElement<T>, g2: &GermElement<T>, kmax: u64, mmax: u64) -> Result<bool> {
    same_point(g1, g2)?;
    let cx = g1.rep.complex();
    let common = g1.rep.domain().intersect(&g2.rep.domain())?;
    let balls: Vec<Region<T>> = (first_stage(cx, &g1.point)..=mmax.max(first_stage(cx, &g1.point)))
        .map(|m| Ok(stage(cx, &g1.point, m)?.region().intersect(&common)?))
        .collect::<Result<_>>()?;
    let small2: Vec<FieldElement<T>> = balls.iter().map(|b| g2.rep.restrict(b)).collect::<Result<_>>()?;
    for k in 1..=kmax {
        let s = g1.rep.approx(k);
        let mut found = false;
        for (b, t) in balls.iter().zip(&small2) {
            if s.restrict(b)?.leq(t)? {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

fn candidate_values<T: Scalar>(field: &ModelField<T>, x: &Point<T>, bound: u64) -> Vec<StalkValue> {
    match field.exceptional_at(x) {
        None => (0..=bound).map(|v| StalkValue::Scalar(Fin(v))).collect(),
        Some(i) => product(field.exceptional()[i].arity(), bound).into_iter().map(StalkValue::Tuple).collect(),
    }
}

fn product(n: usize, bound: u64) -> Vec<Vec<ExtNat>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t: Vec<ExtNat>| {
                (0..=bound).map(move |v| {
                    let mut t = t.clone();
                    t.push(Fin(v));
                    t
                })
            })
            .collect();
    }
    out
}

/// The algebraic colimit of `S(U_m)` at finite depth: germs up to eventual
/// equality, listed by signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SgPresentation {
    pub point: String,
    pub directions: Vec<String>,
    pub bound: u64,
    pub stages: Vec<u64>,
    pub signatures: Vec<GermSignature>,
    /// The signature set did not change across the computed stages.
    pub stabilized: bool,
}

impl fmt::Display for SgPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "algebraic colimit at {} (directions {}), stages m = {:?}: {} germ signatures with values ≤ {}{}",
            self.point,
            self.directions.join(", "),
            self.stages,
            self.signatures.len(),
            self.bound,
            if self.stabilized { "" } else { " (not stabilized)" }
        )?;
        let s: Vec<String> = self.signatures.iter().map(|g| g.to_string()).collect();
        write!(f, "  {}", s.join(" "))
    }
}

/// Every signature with finite values `≤ bound` that the lsc constructor
/// accepts on the stages `U_m`, `m = m₀ … m₀ + depth − 1`.
pub fn colimit_sg<T: Scalar>(field: &Arc<ModelField<T>>, x: &Point<T>, bound: u64, depth: u64) -> Result<SgPresentation> {
    let cx = field.base();
    let dirs = directions(cx, x);
    let values = candidate_values(field, x, bound);
    // directional limits must reach the largest rank of a bounded tuple
    let top = match field.exceptional_at(x) {
        Some(i) => bound * field.exceptional()[i].weight_sum(),
        None => bound,
    };
    let limits = product(dirs.len(), top);
    let m0 = first_stage(cx, x);
    let stages: Vec<u64> = (m0..m0 + depth.max(1)).collect();
    let mut sets: Vec<BTreeSet<GermSignature>> = vec![];
    for &m in &stages {
        let mut set = BTreeSet::new();
        for v in &values {
            for l in &limits {
                let sig = GermSignature { value: v.clone(), limits: l.clone() };
                match germ_rep(field, x, &sig, m) {
                    Ok(rep) => {
                        let g = GermElement { point: x.clone(), rep };
                        debug_assert_eq!(g.signature(), sig);
                        set.insert(sig);
                    }
                    Err(CuError::NotLsc { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        sets.push(set);
    }
    let stabilized = sets.windows(2).all(|w| w[0] == w[1]);
    Ok(SgPresentation {
        point: cx.render(x),
        directions: dirs,
        bound,
        stages,
        signatures: sets.pop().unwrap_or_default().into_iter().collect(),
        stabilized,
    })
}

/// The stalk in Cu: germ signatures ordered by their point values.
#[derive(Clone, Debug)]
pub struct GermHandle<T: Scalar> {
    field: Arc<ModelField<T>>,
    point: Point<T>,
    depth: u64,
}

impl<T: Scalar> GermHandle<T> {
    pub fn new(field: Arc<ModelField<T>>, point: Point<T>, depth: u64) -> Self {
        GermHandle { field, point, depth }
    }

    pub fn point(&self) -> &Point<T> {
        &self.point
    }

    /// Point evaluation onto `N̄` or `N̄^k`.
    pub fn evaluate(&self, x: &GermSignature) -> StalkValue {
        x.value.clone()
    }

    pub fn target(&self) -> String {
        match self.field.exceptional_at(&self.point) {
            None => "N̄".to_string(),
            Some(i) => format!("N̄^{}", self.field.exceptional()[i].arity()),
        }
    }
}

impl<T: Scalar> CuSemigroup for GermHandle<T> {
    type Elem = GermSignature;

    fn describe(&self) -> String {
        format!("Cu colimit at {}", self.field.base().render(&self.point))
    }

    fn zero(&self) -> GermSignature {
        let n = directions(self.field.base(), &self.point).len();
        let value = match self.field.exceptional_at(&self.point) {
            None => StalkValue::Scalar(ExtNat::ZERO),
            Some(i) => StalkValue::Tuple(vec![ExtNat::ZERO; self.field.exceptional()[i].arity()]),
        };
        GermSignature { value, limits: vec![ExtNat::ZERO; n] }
    }

    fn add(&self, a: &GermSignature, b: &GermSignature) -> GermSignature {
        a.add(b)
    }

    fn leq(&self, a: &GermSignature, b: &GermSignature) -> bool {
        a.value.leq(&b.value)
    }

    fn waybelow(&self, a: &GermSignature, b: &GermSignature) -> bool {
        a.value.waybelow(&b.value)
    }

    fn same(&self, a: &GermSignature, b: &GermSignature) -> bool {
        a.value == b.value
    }

    fn approximant(&self, x: &GermSignature, k: u64) -> GermSignature {
        x.cap(k)
    }

    fn horizon(&self, x: &GermSignature, y: &GermSignature) -> u64 {
        x.max_finite().max(y.max_finite()) + 1
    }

    fn is_basis(&self, x: &GermSignature) -> bool {
        x.is_finite()
    }

    fn enumerate(&self, bound: u64, _resolution: u64, cap: usize) -> Result<Vec<GermSignature>> {
        let mut out = colimit_sg(&self.field, &self.point, bound, self.depth)?.signatures;
        let top = self.zero();
        let n = top.limits.len();
        let inf_value = top.value.scale(Inf);
        let inf_value = match inf_value {
            StalkValue::Scalar(_) => StalkValue::Scalar(Inf),
            StalkValue::Tuple(t) => StalkValue::Tuple(vec![Inf; t.len()]),
        };
        out.push(GermSignature { value: inf_value, limits: vec![Inf; n] });
        out.push(GermSignature { value: top.value, limits: vec![Inf; n] });
        if out.len() > cap {
            return Err(CuError::EnumerationOverflow { cap });
        }
        Ok(out)
    }

    fn render(&self, x: &GermSignature) -> String {
        x.to_string()
    }
}

/// Evidence that point evaluation is an isomorphism of the Cu colimit onto
/// its target, checked on the enumerated classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoWitness {
    pub target: String,
    pub classes: usize,
    pub pairs_checked: usize,
    pub failure: Option<String>,
}

impl IsoWitness {
    pub fn holds(&self) -> bool {
        self.failure.is_none()
    }
}

/// The Cu colimit at a point together with its evaluation witness.
#[derive(Clone, Debug)]
pub struct CuColimit<T: Scalar> {
    pub handle: GermHandle<T>,
    pub witness: IsoWitness,
}

impl<T: Scalar> fmt::Display for CuColimit<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = &self.witness;
        write!(
            f,
            "Cu colimit at {}: isomorphic to {} via point evaluation ({} classes, {} pairs checked){}",
            self.handle.field.base().render(&self.handle.point),
            w.target,
            w.classes,
            w.pairs_checked,
            match &w.failure {
                None => String::new(),
                Some(s) => format!("; FAILED: {s}"),
            }
        )
    }
}

fn target_values(arity: Option<usize>, bound: u64) -> BTreeSet<StalkValue> {
    match arity {
        None => (0..=bound).map(|v| StalkValue::Scalar(Fin(v))).collect(),
        Some(k) => product(k, bound).into_iter().map(StalkValue::Tuple).collect(),
    }
}

/// Checks that evaluation is bijective on classes, additive, and an order
/// and `≪` isomorphism onto the target on all enumerated germs.
pub fn evaluation_witness<T: Scalar>(h: &GermHandle<T>, bound: u64) -> Result<IsoWitness> {
    let elems = h.enumerate(bound, 1, usize::MAX)?;
    let arity = h.field.exceptional_at(&h.point).map(|i| h.field.exceptional()[i].arity());
    let mut w = IsoWitness { target: h.target(), classes: 0, pairs_checked: 0, failure: None };
    let images: BTreeSet<StalkValue> = elems.iter().map(|x| h.evaluate(x)).collect();
    w.classes = images.len();
    let want = target_values(arity, bound);
    if let Some(v) = want.iter().find(|v| !images.contains(v)) {
        w.failure = Some(format!("{v} is not hit"));
        return Ok(w);
    }
    for a in &elems {
        for b in &elems {
            w.pairs_checked += 1;
            let (ea, eb) = (h.evaluate(a), h.evaluate(b));
            let bad = if h.same(a, b) != (ea == eb) {
                Some("class identification")
            } else if h.leq(a, b) != ea.leq(&eb) {
                Some("order")
            } else if h.waybelow(a, b) != ea.waybelow(&eb) {
                Some("compact containment")
            } else if h.evaluate(&h.add(a, b)) != ea.add(&eb) {
                Some("addition")
            } else {
                None
            };
            if let Some(what) = bad {
                w.failure = Some(format!("{what} differs on {a} and {b}"));
                return Ok(w);
            }
        }
    }
    Ok(w)
}

pub fn colimit_cu<T: Scalar>(field: &Arc<ModelField<T>>, x: &Point<T>, bound: u64, depth: u64) -> Result<CuColimit<T>> {
    let handle = GermHandle::new(field.clone(), x.clone(), depth);
    let witness = evaluation_witness(&handle, bound)?;
    Ok(CuColimit { handle, witness })
}

/// The stalk of a field at `x`.
pub fn stalk<T: Scalar>(field: &Arc<ModelField<T>>, x: &Point<T>, bound: u64) -> Result<CuColimit<T>> {
    colimit_cu(field, x, bound, 3)
}

/// Checks that the map from the algebraic colimit onto the Cu colimit is
/// an additive surjection identifying exactly the germs with equal value.
pub fn canonical_surjection<T: Scalar>(sg: &SgPresentation, cu: &CuColimit<T>) -> Option<String> {
    let h = &cu.handle;
    let images: BTreeSet<StalkValue> = sg.signatures.iter().map(|s| h.evaluate(s)).collect();
    let arity = h.field.exceptional_at(&h.point).map(|i| h.field.exceptional()[i].arity());
    if images != target_values(arity, sg.bound) {
        return Some("evaluation is not onto the finite values".into());
    }
    let all: BTreeSet<&GermSignature> = sg.signatures.iter().collect();
    for a in &sg.signatures {
        for b in &sg.signatures {
            let merged = h.same(a, b);
            if merged != (a.value == b.value) {
                return Some(format!("{a} and {b} are identified incorrectly"));
            }
            let s = a.add(b);
            if all.contains(&s) && h.evaluate(&s) != h.evaluate(a).add(&h.evaluate(b)) {
                return Some(format!("evaluation is not additive on {a} + {b}"));
            }
        }
    }
    None
}

/// The worked example: the trivial field on `[0,1]` at `1/2`.
#[derive(Clone, Debug)]
pub struct WorkedExample<T: Scalar> {
    pub sg: SgPresentation,
    pub cu: CuColimit<T>,
    pub surjection: Option<String>,
}

impl<T: Scalar> WorkedExample<T> {
    pub fn holds(&self) -> bool {
        self.cu.witness.holds() && self.surjection.is_none() && self.sg.stabilized
    }
}

impl<T: Scalar> fmt::Display for WorkedExample<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "A = C([0,1], M_n), stages U_m = [1/2-1/m, 1/2+1/m]")?;
        writeln!(f, "{}", self.cu)?;
        writeln!(f, "{}", self.sg)?;
        writeln!(f, "algebraic colimit = {{(a,b,c) : b ≤ a, b ≤ c}}, Cu colimit = N̄ via (a,b,c) ↦ b")?;
        match &self.surjection {
            None => write!(f, "canonical surjection identifies (a,b,c) with (a',b,c'): ok"),
            Some(s) => write!(f, "canonical surjection: FAILED: {s}"),
        }
    }
}

pub fn worked_example<T: Scalar>(bound: u64) -> Result<WorkedExample<T>> {
    let cx = Arc::new(OneComplex::<T>::unit_interval());
    let field = Arc::new(ModelField::trivial(cx));
    let x = Point::Interior(0, T::ratio(1, 2));
    let sg = colimit_sg(&field, &x, bound, 3)?;
    let cu = colimit_cu(&field, &x, bound, 3)?;
    let surjection = canonical_surjection(&sg, &cu);
    Ok(WorkedExample { sg, cu, surjection })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn sig(a: u64, b: u64, c: u64) -> GermSignature {
        GermSignature { value: StalkValue::Scalar(Fin(b)), limits: vec![Fin(a), Fin(c)] }
    }

    #[test]
    fn example_at_one_half() {
        let ex = worked_example::<Rational>(4).unwrap();
        assert!(ex.holds(), "{ex}");
        assert_eq!(ex.sg.stages, vec![3, 4, 5]);
        assert_eq!(ex.sg.signatures.len(), 55);
        assert_eq!(ex.cu.witness.target, "N̄");
        assert_eq!(ex.cu.witness.classes, 6);
    }

    #[test]
    fn germ_order_examples() {
        let cx = Arc::new(OneComplex::<Rational>::unit_interval());
        let f = Arc::new(ModelField::trivial(cx));
        let x = Point::Interior(0, r(1, 2));
        let g = |s| GermElement::from_signature(&f, x.clone(), &s).unwrap();
        assert!(germ_leq(&g(sig(3, 1, 2)), &g(sig(2, 2, 2))).unwrap());
        assert!(germ_leq_oracle(&g(sig(3, 1, 2)), &g(sig(2, 2, 2)), 12, 25).unwrap());
        assert!(!germ_leq(&g(sig(1, 1, 1)), &g(sig(1, 0, 1))).unwrap());
        assert!(!germ_leq_oracle(&g(sig(1, 1, 1)), &g(sig(1, 0, 1)), 12, 25).unwrap());
        assert!(germ_leq(&g(sig(2, 1, 3)), &g(sig(2, 1, 3))).unwrap());
        let y = GermElement::from_signature(&f, Point::Vertex(0), &GermSignature { value: StalkValue::Scalar(Fin(0)), limits: vec![Fin(1)] }).unwrap();
        assert_eq!(germ_leq(&g(sig(1, 1, 1)), &y), Err(CuError::DifferentBasePoints));
    }

    #[test]
    fn boundary_and_exceptional_stalks() {
        let cx = Arc::new(OneComplex::<Rational>::unit_interval());
        let triv = Arc::new(ModelField::trivial(cx.clone()));
        let sg = colimit_sg(&triv, &Point::Vertex(0), 3, 2).unwrap();
        assert_eq!(sg.directions, vec!["e"]);
        assert!(sg.signatures.iter().all(|s| s.value.leq(&StalkValue::Scalar(s.limits[0]))));
        assert_eq!(sg.signatures.len(), 10);
        assert!(stalk(&triv, &Point::Vertex(0), 3).unwrap().witness.holds());

        let drop = Arc::new(ModelField::drop_at(cx, 0, r(1, 3), vec![1, 1]).unwrap());
        let st = stalk(&drop, &Point::Interior(0, r(1, 3)), 3).unwrap();
        assert!(st.witness.holds(), "{st}");
        assert_eq!(st.witness.target, "N̄^2");
        let h = &st.handle;
        let a = GermSignature { value: StalkValue::Tuple(vec![Fin(1), Fin(0)]), limits: vec![Fin(1), Fin(1)] };
        let b = GermSignature { value: StalkValue::Tuple(vec![Fin(0), Fin(1)]), limits: vec![Fin(1), Fin(1)] };
        assert!(!h.leq(&a, &b) && !h.leq(&b, &a));
    }

    #[test]
    fn triangle_vertex_collapses_to_extnat() {
        let cx = Arc::new(OneComplex::<Rational>::triangle());
        let f = Arc::new(ModelField::trivial(cx));
        let x = Point::Vertex(0);
        let sg = colimit_sg(&f, &x, 2, 2).unwrap();
        assert!(stalk(&f, &x, 2).unwrap().witness.holds());
        let germs: Vec<GermElement<Rational>> =
            sg.signatures.iter().map(|s| GermElement::from_signature(&f, x.clone(), s).unwrap()).collect();
        for a in germs.iter().step_by(3) {
            for b in germs.iter().step_by(2) {
                assert_eq!(germ_leq(a, b).unwrap(), germ_leq_oracle(a, b, 8, 17).unwrap(), "{} {}", a.signature(), b.signature());
            }
        }
    }
}
