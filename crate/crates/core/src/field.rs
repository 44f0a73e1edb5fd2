//! Model continuous fields: generic `N̄` fibres plus finitely many
//! exceptional fibres `N̄^k` fused into the rank by positive weights.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::cellmap::Region;
use crate::complex::{same_complex, OneComplex, Point};
use crate::error::{CuError, Result};
use crate::extnat::{fmt_tuple, tuple_add, tuple_leq, weighted_rank, ExtNat, Fin, Inf};
use crate::order::CuSemigroup;
use crate::patch::{ClosedPatch, OpenSet};
use crate::scalar::Scalar;
use crate::step::{horizon_bound, LscMode, StepFn, WaybelowFailure};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exceptional<T> {
    pub point: Point<T>,
    pub weights: Vec<u64>,
}

impl<T> Exceptional<T> {
    pub fn arity(&self) -> usize {
        self.weights.len()
    }

    pub fn rank(&self, t: &[ExtNat]) -> ExtNat {
        weighted_rank(&self.weights, t)
    }

    pub fn weight_sum(&self) -> u64 {
        self.weights.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelField<T> {
    base: Arc<OneComplex<T>>,
    exceptional: Vec<Exceptional<T>>,
}

impl<T: Scalar> ModelField<T> {
    /// `exceptional` lists `(edge, offset, arity, weights)`.
    pub fn new(base: Arc<OneComplex<T>>, exceptional: Vec<(usize, T, usize, Vec<u64>)>) -> Result<Self> {
        let mut out: Vec<Exceptional<T>> = vec![];
        for (e, pos, arity, weights) in exceptional {
            let point = base.point(e, pos)?;
            let at = base.render(&point);
            if matches!(point, Point::Vertex(_)) {
                return Err(CuError::ExceptionalOnVertex { at });
            }
            if arity < 2 || weights.len() != arity || weights.contains(&0) {
                return Err(CuError::BadWeights { at });
            }
            if out.iter().any(|x| x.point == point) {
                return Err(CuError::CoincidentExceptional { at });
            }
            out.push(Exceptional { point, weights });
        }
        out.sort_by(|a, b| a.point.cmp(&b.point));
        Ok(ModelField { base, exceptional: out })
    }

    pub fn trivial(base: Arc<OneComplex<T>>) -> Self {
        ModelField { base, exceptional: vec![] }
    }

    /// One exceptional point at offset `pos` of edge `e`.
    pub fn drop_at(base: Arc<OneComplex<T>>, e: usize, pos: T, weights: Vec<u64>) -> Result<Self> {
        let k = weights.len();
        Self::new(base, vec![(e, pos, k, weights)])
    }

    pub fn base(&self) -> &Arc<OneComplex<T>> {
        &self.base
    }

    pub fn exceptional(&self) -> &[Exceptional<T>] {
        &self.exceptional
    }

    pub fn is_trivial(&self) -> bool {
        self.exceptional.is_empty()
    }

    pub fn exceptional_at(&self, p: &Point<T>) -> Option<usize> {
        self.exceptional.iter().position(|x| x.point == *p)
    }

    pub fn max_weight_sum(&self) -> u64 {
        self.exceptional.iter().map(|x| x.weight_sum()).max().unwrap_or(0)
    }

    pub fn describe(&self) -> String {
        if self.exceptional.is_empty() {
            return "trivial field".to_string();
        }
        let parts: Vec<String> = self
            .exceptional
            .iter()
            .map(|x| format!("N̄^{} at {} with weights {:?}", x.arity(), self.base.render(&x.point), x.weights))
            .collect();
        format!("field with {}", parts.join(", "))
    }
}

/// A value in a stalk: `N̄` at generic points, `N̄^k` at exceptional ones.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StalkValue {
    Scalar(ExtNat),
    Tuple(Vec<ExtNat>),
}

impl StalkValue {
    pub fn leq(&self, other: &Self) -> bool {
        match (self, other) {
            (StalkValue::Scalar(a), StalkValue::Scalar(b)) => a <= b,
            (StalkValue::Tuple(a), StalkValue::Tuple(b)) => tuple_leq(a, b),
            _ => false,
        }
    }

    pub fn waybelow(&self, other: &Self) -> bool {
        match (self, other) {
            (StalkValue::Scalar(a), StalkValue::Scalar(b)) => a.waybelow(*b),
            (StalkValue::Tuple(a), StalkValue::Tuple(b)) => crate::extnat::tuple_waybelow(a, b),
            _ => false,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (StalkValue::Scalar(a), StalkValue::Scalar(b)) => StalkValue::Scalar(*a + *b),
            (StalkValue::Tuple(a), StalkValue::Tuple(b)) => StalkValue::Tuple(tuple_add(a, b)),
            _ => panic!("stalk values of different kinds"),
        }
    }

    /// Least upper bound of two values of the same kind.
    pub fn join(&self, other: &Self) -> Self {
        match (self, other) {
            (StalkValue::Scalar(a), StalkValue::Scalar(b)) => StalkValue::Scalar(*a.max(b)),
            (StalkValue::Tuple(a), StalkValue::Tuple(b)) => StalkValue::Tuple(a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()),
            _ => panic!("stalk values of different kinds"),
        }
    }

    pub fn scale(&self, n: ExtNat) -> Self {
        match self {
            StalkValue::Scalar(a) => StalkValue::Scalar(n * *a),
            StalkValue::Tuple(t) => StalkValue::Tuple(t.iter().map(|x| n * *x).collect()),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            StalkValue::Scalar(a) => a.is_finite(),
            StalkValue::Tuple(t) => t.iter().all(|x| x.is_finite()),
        }
    }
}

impl fmt::Display for StalkValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StalkValue::Scalar(a) => write!(f, "{a}"),
            StalkValue::Tuple(t) => f.write_str(&fmt_tuple(t)),
        }
    }
}

pub(crate) fn cap_tuple(t: &[ExtNat], m: u64) -> Vec<ExtNat> {
    t.iter().map(|x| x.cap(m)).collect()
}

/// An element of the section semigroup over a closed patch: a rank profile
/// whose value at each exceptional point is the weighted rank of the tuple
/// stored there. Ordinary lsc of the profile is the fusion condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement<T: Scalar> {
    field: Arc<ModelField<T>>,
    profile: StepFn<T>,
    tuples: BTreeMap<usize, Vec<ExtNat>>,
}

impl<T: Scalar> FieldElement<T> {
    /// `profile` gives the generic values; at each exceptional point of its
    /// domain the value is replaced by the rank of the given tuple.
    pub fn new(field: Arc<ModelField<T>>, profile: StepFn<T>, tuples: BTreeMap<usize, Vec<ExtNat>>) -> Result<Self> {
        if !same_complex(field.base(), profile.complex()) {
            return Err(CuError::ComplexMismatch);
        }
        let dom = profile.domain();
        let mut map = profile.map().clone();
        let mut kept = BTreeMap::new();
        for (i, x) in field.exceptional().iter().enumerate() {
            let at = field.base().render(&x.point);
            if !dom.contains(&x.point) {
                continue;
            }
            let t = tuples.get(&i).ok_or_else(|| CuError::MissingPointValue { at: at.clone() })?;
            if t.len() != x.arity() {
                return Err(CuError::TupleArity { at, expected: x.arity(), found: t.len() });
            }
            map = map.with_point(&x.point, Some(x.rank(t)));
            kept.insert(i, t.clone());
        }
        let profile = StepFn::from_map(map, LscMode::Strict)?;
        Ok(FieldElement { field, profile, tuples: kept })
    }

    /// Lifts a step function, choosing the tuple at each exceptional point
    /// from the function's value there.
    pub fn lift_with(
        field: Arc<ModelField<T>>,
        f: StepFn<T>,
        mut choose: impl FnMut(usize, ExtNat) -> Vec<ExtNat>,
    ) -> Result<Self> {
        let mut tuples = BTreeMap::new();
        for (i, x) in field.exceptional().iter().enumerate() {
            if let Some(v) = f.eval(&x.point) {
                tuples.insert(i, choose(i, v));
            }
        }
        Self::new(field, f, tuples)
    }

    /// Lifts a function on a trivial field, or one that vanishes at every
    /// exceptional point.
    pub fn lift(field: Arc<ModelField<T>>, f: StepFn<T>) -> Result<Self> {
        let arity: Vec<usize> = field.exceptional().iter().map(|x| x.arity()).collect();
        Self::lift_with(field, f, |i, _| vec![ExtNat::ZERO; arity[i]])
    }

    pub fn zero_on(field: Arc<ModelField<T>>, domain: &Region<T>) -> Self {
        Self::lift(field, StepFn::constant_on(domain, ExtNat::ZERO)).expect("zero is valid")
    }

    pub fn field(&self) -> &Arc<ModelField<T>> {
        &self.field
    }

    pub fn profile(&self) -> &StepFn<T> {
        &self.profile
    }

    pub fn tuples(&self) -> &BTreeMap<usize, Vec<ExtNat>> {
        &self.tuples
    }

    pub fn tuple(&self, i: usize) -> Option<&Vec<ExtNat>> {
        self.tuples.get(&i)
    }

    pub fn domain(&self) -> Region<T> {
        self.profile.domain()
    }

    pub fn complex(&self) -> &Arc<OneComplex<T>> {
        self.profile.complex()
    }

    /// Stalk value at `p`, or `None` outside the domain.
    pub fn stalk_value(&self, p: &Point<T>) -> Option<StalkValue> {
        match self.field.exceptional_at(p) {
            Some(i) => self.tuples.get(&i).map(|t| StalkValue::Tuple(t.clone())),
            None => self.profile.eval(p).map(StalkValue::Scalar),
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.field, &other.field) && self.field != other.field {
            return Err(CuError::FieldMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let profile = self.profile.add(&other.profile)?;
        let tuples = self.tuples.iter().map(|(i, t)| (*i, tuple_add(t, &other.tuples[i]))).collect();
        Ok(FieldElement { field: self.field.clone(), profile, tuples })
    }

    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.check(other)?;
        Ok(self.profile.leq(&other.profile)? && self.tuples.iter().all(|(i, t)| tuple_leq(t, &other.tuples[i])))
    }

    pub fn waybelow(&self, other: &Self) -> Result<bool> {
        Ok(self.waybelow_witness(other)?.is_none())
    }

    /// The profile criterion plus compact containment of every tuple.
    pub fn waybelow_witness(&self, other: &Self) -> Result<Option<WaybelowFailure>> {
        self.check(other)?;
        if let Some(w) = self.profile.waybelow_witness(&other.profile)? {
            return Ok(Some(w));
        }
        for (i, t) in &self.tuples {
            if !crate::extnat::tuple_waybelow(t, &other.tuples[i]) {
                let at = self.field.base().render(&self.field.exceptional()[*i].point);
                return Ok(Some(WaybelowFailure::Tuple { at }));
            }
        }
        Ok(None)
    }

    pub fn is_bounded(&self) -> bool {
        self.profile.is_bounded()
    }

    pub fn max_finite(&self) -> u64 {
        let t = self.tuples.values().flatten().filter_map(|x| x.finite()).max().unwrap_or(0);
        self.profile.max_finite().max(t)
    }

    pub fn restrict(&self, p: &Region<T>) -> Result<Self> {
        let profile = self.profile.restrict(p)?;
        let tuples = self
            .tuples
            .iter()
            .filter(|(i, _)| p.contains(&self.field.exceptional()[**i].point))
            .map(|(i, t)| (*i, t.clone()))
            .collect();
        Ok(FieldElement { field: self.field.clone(), profile, tuples })
    }

    pub fn restrict_patch(&self, p: &ClosedPatch<T>) -> Result<Self> {
        self.restrict(p.region())
    }

    pub fn glue(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let profile = self.profile.glue(&other.profile)?;
        let mut tuples = self.tuples.clone();
        for (i, t) in &other.tuples {
            if let Some(s) = tuples.get(i) {
                if s != t {
                    let at = self.field.base().render(&self.field.exceptional()[*i].point);
                    return Err(CuError::OverlapMismatch { at });
                }
            }
            tuples.insert(*i, t.clone());
        }
        Ok(FieldElement { field: self.field.clone(), profile, tuples })
    }

    /// The `k`-th canonical approximant: shrink and cap the profile, cap
    /// each tuple so that its rank fits under the shrunk profile, and repeat
    /// until the lowered exceptional values are stable.
    pub fn approx(&self, k: u64) -> Self {
        let k = k.max(1);
        let r = T::recip_int(k);
        let mut prof = self.profile.clone();
        loop {
            let s = prof.shrink_radius(&r).cap(k);
            let mut changed = false;
            let mut taus = BTreeMap::new();
            for (i, u) in &self.tuples {
                let x = &self.field.exceptional()[*i];
                let sp = s.eval(&x.point).expect("in domain");
                let mut m = k;
                while m > 0 && x.rank(&cap_tuple(u, m)) > sp {
                    m -= 1;
                }
                let tau = cap_tuple(u, m);
                let val = x.rank(&tau);
                if prof.eval(&x.point) != Some(val) {
                    prof = prof.with_point_unchecked(&x.point, val);
                    changed = true;
                }
                taus.insert(*i, tau);
            }
            if !changed {
                return FieldElement { field: self.field.clone(), profile: s, tuples: taus };
            }
        }
    }

    pub fn horizon(&self, other: &Self) -> u64 {
        let mut extra = vec![vec![]; self.complex().edges().len()];
        for x in self.field.exceptional() {
            if let Point::Interior(e, t) = &x.point {
                extra[*e].push(t.clone());
            }
        }
        let (a, b) = (self.profile.map().refine(&extra), other.profile.map().refine(&extra));
        let gap = a.zip(&b, |x, y| (*x, *y)).map(|z| z.min_gap()).unwrap_or_else(|_| a.min_gap());
        horizon_bound(&gap, self.max_finite().max(other.max_finite()), self.field.max_weight_sum())
    }

    /// Pointwise `n · self`.
    pub fn scale(&self, n: ExtNat) -> Self {
        FieldElement {
            field: self.field.clone(),
            profile: self.profile.scale(n),
            tuples: self.tuples.iter().map(|(i, t)| (*i, t.iter().map(|x| n * *x).collect())).collect(),
        }
    }

    /// Pointwise action of an `N̄`-valued lsc function on the whole complex.
    pub fn act(&self, f: &StepFn<T>) -> Result<Self> {
        let f = f.restrict(&self.domain())?;
        let profile = f.mul(&self.profile)?;
        let tuples = self
            .tuples
            .iter()
            .map(|(i, t)| {
                let n = f.eval(&self.field.exceptional()[*i].point).expect("in domain");
                (*i, t.iter().map(|x| n * *x).collect())
            })
            .collect();
        Ok(FieldElement { field: self.field.clone(), profile, tuples })
    }

    pub fn render(&self) -> String {
        let mut s = self.profile.render();
        for (i, t) in &self.tuples {
            let p = &self.field.exceptional()[*i].point;
            s.push_str(&format!("; {}→{}", self.field.base().render(p), fmt_tuple(t)));
        }
        s
    }
}

impl<T: Scalar> fmt::Display for FieldElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// The section semigroup `S(P)` of a field over a closed set `P`.
#[derive(Clone, Debug)]
pub struct FieldHandle<T: Scalar> {
    field: Arc<ModelField<T>>,
    domain: Region<T>,
}

/// Step functions on `domain`: constants, grid bumps `v·1_(i/d, j/d)`,
/// open stars around vertices, and `∞`-valued samples.
pub fn step_family<T: Scalar>(cx: &Arc<OneComplex<T>>, domain: &Region<T>, bound: u64, resolution: u64) -> Vec<StepFn<T>> {
    let d = resolution.max(1);
    let mut opens: Vec<OpenSet<T>> = vec![];
    for (e, edge) in cx.edges().iter().enumerate() {
        let steps = (edge.length.clone() * T::from_int(d as i64)).ceil_u64().unwrap_or(0);
        let grid: Vec<T> = (0..=steps)
            .map(|i| T::ratio(i as i64, d as i64))
            .map(|t| if t > edge.length { edge.length.clone() } else { t })
            .collect();
        for i in 0..grid.len() {
            for j in i + 1..grid.len() {
                if grid[i] < grid[j] {
                    if let Ok(u) = OpenSet::interval(cx, e, grid[i].clone(), grid[j].clone()) {
                        opens.push(u);
                    }
                }
            }
        }
    }
    let full = Region::full(cx.clone());
    for v in 0..cx.vertices().len() {
        if cx.degree(v) == 0 {
            continue;
        }
        for i in 1..=d {
            let r = T::ratio(i as i64, d as i64);
            if let Ok(ball) = crate::metric::open_ball(&full, &Point::Vertex(v), &r) {
                if let Ok(u) = OpenSet::new(ball) {
                    opens.push(u);
                }
            }
        }
    }
    let mut out: Vec<StepFn<T>> = (0..=bound).map(|c| StepFn::constant_on(domain, Fin(c))).collect();
    out.push(StepFn::constant_on(domain, Inf));
    for u in &opens {
        for v in (1..=bound).map(Fin).chain(std::iter::once(Inf)) {
            if let Ok(f) = StepFn::indicator_on(domain, u.region(), v) {
                out.push(f);
            }
        }
    }
    let mut seen = BTreeSet::new();
    out.retain(|f| seen.insert(f.render()));
    out
}

/// All tuples with entries in `0..=bound` and rank at most `limit`.
fn tuples_upto(x: &Exceptional<impl Scalar>, bound: u64, limit: ExtNat) -> Vec<Vec<ExtNat>> {
    let mut out = vec![vec![]];
    for _ in 0..x.arity() {
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
    out.retain(|t| x.rank(t) <= limit);
    out
}

impl<T: Scalar> FieldHandle<T> {
    pub fn new(field: Arc<ModelField<T>>, patch: &ClosedPatch<T>) -> Result<Self> {
        if !same_complex(field.base(), patch.complex()) {
            return Err(CuError::ComplexMismatch);
        }
        Ok(FieldHandle { field, domain: patch.region().clone() })
    }

    /// `Lsc(P, N̄)`: the trivial field over `P`.
    pub fn lsc(patch: &ClosedPatch<T>) -> Self {
        FieldHandle { field: Arc::new(ModelField::trivial(patch.complex().clone())), domain: patch.region().clone() }
    }

    /// A handle over an arbitrary closed domain (possibly without interior).
    pub fn on_region(field: Arc<ModelField<T>>, domain: Region<T>) -> Self {
        FieldHandle { field, domain }
    }

    pub fn field(&self) -> &Arc<ModelField<T>> {
        &self.field
    }

    pub fn domain(&self) -> &Region<T> {
        &self.domain
    }

    /// Lifts every sample step function, varying tuples at exceptional points.
    pub fn lift_family(&self, family: Vec<StepFn<T>>, bound: u64) -> Vec<FieldElement<T>> {
        let mut out = vec![];
        let exc: Vec<(usize, &Exceptional<T>)> = self
            .field
            .exceptional()
            .iter()
            .enumerate()
            .filter(|(_, x)| self.domain.contains(&x.point))
            .collect();
        for f in family {
            // tuple choices per exceptional point, limited by the lsc bound
            let mut choices: Vec<Vec<(usize, Vec<ExtNat>)>> = vec![vec![]];
            for (i, x) in &exc {
                let limit = f
                    .map()
                    .adjacent_cells(&x.point)
                    .into_iter()
                    .flatten()
                    .min()
                    .copied()
                    .unwrap_or(ExtNat::ZERO);
                let here = f.eval(&x.point).unwrap_or(ExtNat::ZERO);
                let constant = f.map().adjacent_cells(&x.point).into_iter().flatten().all(|c| Some(*c) == Some(here));
                let opts: Vec<Vec<ExtNat>> = if limit == Inf {
                    let mut v = vec![vec![ExtNat::ZERO; x.arity()], vec![Inf; x.arity()]];
                    let mut first = vec![ExtNat::ZERO; x.arity()];
                    first[0] = Inf;
                    v.push(first);
                    v
                } else if constant {
                    tuples_upto(x, bound, limit)
                } else {
                    let mut v = vec![vec![ExtNat::ZERO; x.arity()]];
                    v.extend(tuples_upto(x, bound, limit).into_iter().filter(|t| x.rank(t) == limit));
                    v
                };
                choices = choices
                    .into_iter()
                    .flat_map(|c| {
                        opts.iter().map(move |t| {
                            let mut c = c.clone();
                            c.push((*i, t.clone()));
                            c
                        })
                    })
                    .collect();
            }
            for c in choices {
                let tuples: BTreeMap<usize, Vec<ExtNat>> = c.into_iter().collect();
                if let Ok(x) = FieldElement::new(self.field.clone(), f.clone(), tuples) {
                    out.push(x);
                }
            }
        }
        let mut seen = BTreeSet::new();
        out.retain(|x| seen.insert(x.render()));
        out
    }
}

impl<T: Scalar> CuSemigroup for FieldHandle<T> {
    type Elem = FieldElement<T>;

    fn describe(&self) -> String {
        let dom = if self.domain.values().all(|b| *b) { "X".to_string() } else { self.domain.render() };
        if self.field.is_trivial() {
            format!("Lsc({dom}, N̄)")
        } else {
            format!("S({dom}) of the {}", self.field.describe())
        }
    }

    fn zero(&self) -> Self::Elem {
        FieldElement::zero_on(self.field.clone(), &self.domain)
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.add(b).expect("same handle")
    }

    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        a.leq(b).expect("same handle")
    }

    fn waybelow(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        a.waybelow(b).expect("same handle")
    }

    fn same(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        a == b
    }

    fn approximant(&self, x: &Self::Elem, k: u64) -> Self::Elem {
        x.approx(k)
    }

    fn horizon(&self, x: &Self::Elem, y: &Self::Elem) -> u64 {
        x.horizon(y)
    }

    fn is_basis(&self, x: &Self::Elem) -> bool {
        x.is_bounded()
    }

    fn enumerate(&self, bound: u64, resolution: u64, cap: usize) -> Result<Vec<Self::Elem>> {
        let family = step_family(self.field.base(), &self.domain, bound, resolution);
        let out = self.lift_family(family, bound);
        if out.len() > cap {
            return Err(CuError::EnumerationOverflow { cap });
        }
        Ok(out)
    }

    fn render(&self, x: &Self::Elem) -> String {
        x.render()
    }
}

/// Result of [`check_sheaf`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafReport {
    /// Elements of `S(U ∪ V)` restricted and glued back.
    pub restrict_glue: usize,
    /// Compatible pairs of `S(U) × S(V)` glued and restricted back.
    pub glue_restrict: usize,
    pub failure: Option<String>,
}

impl SheafReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Checks that `S(U ∪ V) → S(U) ×_{S(U∩V)} S(V)` is bijective on enumerated bases.
pub fn check_sheaf<T: Scalar>(
    field: &Arc<ModelField<T>>,
    u: &ClosedPatch<T>,
    v: &ClosedPatch<T>,
    bound: u64,
    resolution: u64,
    cap: usize,
) -> Result<SheafReport> {
    let uv = u.intersect(v).map_err(|_| {
        CuError::Precondition(format!("{} ∩ {} has empty interior", u.render(), v.render()))
    })?;
    let whole = u.union(v)?;
    let mut report = SheafReport { restrict_glue: 0, glue_restrict: 0, failure: None };
    let hw = FieldHandle::new(field.clone(), &whole)?;
    for s in hw.enumerate(bound, resolution, cap)? {
        let a = s.restrict_patch(u)?;
        let b = v_restrict(&s, v)?;
        report.restrict_glue += 1;
        match a.glue(&b) {
            Ok(g) if g == s => {}
            Ok(g) => {
                report.failure = Some(format!("restrict then glue changed {} into {}", s.render(), g.render()));
                return Ok(report);
            }
            Err(e) => {
                report.failure = Some(format!("restrictions of {} do not glue: {e}", s.render()));
                return Ok(report);
            }
        }
    }
    let su = FieldHandle::new(field.clone(), u)?.enumerate(bound, resolution, cap)?;
    let sv = FieldHandle::new(field.clone(), v)?.enumerate(bound, resolution, cap)?;
    let mut by_overlap: BTreeMap<String, Vec<&FieldElement<T>>> = BTreeMap::new();
    for b in &sv {
        by_overlap.entry(b.restrict_patch(&uv)?.render()).or_default().push(b);
    }
    let mut glued = BTreeSet::new();
    for a in &su {
        let key = a.restrict_patch(&uv)?.render();
        for b in by_overlap.get(&key).into_iter().flatten() {
            report.glue_restrict += 1;
            let g = match a.glue(b) {
                Ok(g) => g,
                Err(e) => {
                    report.failure = Some(format!("{} and {} agree on the overlap but do not glue: {e}", a.render(), b.render()));
                    return Ok(report);
                }
            };
            if g.restrict_patch(u)? != *a || g.restrict_patch(v)? != **b {
                report.failure = Some(format!("glue then restrict is not the identity on ({}, {})", a.render(), b.render()));
                return Ok(report);
            }
            if !glued.insert(g.render()) {
                report.failure = Some(format!("two pairs glue to {}", g.render()));
                return Ok(report);
            }
        }
    }
    Ok(report)
}

fn v_restrict<T: Scalar>(s: &FieldElement<T>, v: &ClosedPatch<T>) -> Result<FieldElement<T>> {
    s.restrict_patch(v)
}
