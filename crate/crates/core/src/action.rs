//! The action of `Lsc(X, N̄)` on sections, compact elements, and
//! reconstruction of isomorphisms from their values on compacts.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::cellmap::{CellMap, Loc, Region};
use crate::complex::same_complex;
use crate::error::{CuError, Result};
use crate::extnat::{ExtNat, Fin, Inf};
use crate::field::{FieldElement, FieldHandle, ModelField, StalkValue};
use crate::patch::{ClosedPatch, OpenSet};
use crate::scalar::{midpoint, Scalar};
use crate::sections::{sample_points, section_leq, section_waybelow, RawSection, Section};
use crate::step::{LscMode, StepFn};

/// `f·s`: the stalk value of `s` scaled by `f(x)` at every point.
pub fn act<T: Scalar>(f: &StepFn<T>, s: &Section<T>) -> Result<Section<T>> {
    if !same_complex(f.complex(), s.field().base()) {
        return Err(CuError::ComplexMismatch);
    }
    let f = f.restrict(&s.domain())?;
    let raw = s.to_raw();
    let map = raw.map().zip(f.map(), |v, n| v.as_ref().map(|v| v.scale(n.expect("same domain"))))?;
    Section::from_raw(&RawSection::new(s.field().clone(), map)?)
}

/// Superlevel sets `U_i = {f ≥ i}` for `i = 1..=max`, plus `{f = ∞}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndicatorDecomposition<T: Scalar> {
    pub sets: Vec<OpenSet<T>>,
    /// Where `f` is infinite; `f = Σ 1_{U_i} + ∞·1_tail`.
    pub infinite_tail: Option<OpenSet<T>>,
}

impl<T: Scalar> IndicatorDecomposition<T> {
    /// `Σ 1_{U_i} + ∞·1_tail` over the whole complex.
    pub fn reassemble(&self, cx: &Arc<crate::complex::OneComplex<T>>) -> Result<StepFn<T>> {
        let mut sum = StepFn::zero(cx.clone());
        for u in &self.sets {
            sum = sum.add(&StepFn::indicator(u, Fin(1)))?;
        }
        if let Some(t) = &self.infinite_tail {
            sum = sum.add(&StepFn::indicator(t, Inf))?;
        }
        Ok(sum)
    }
}

/// Splits an lsc function on the whole complex into indicators of open sets
/// and checks that they add back up to `f`.
pub fn indicator_decompose<T: Scalar>(f: &StepFn<T>) -> Result<IndicatorDecomposition<T>> {
    let cx = f.complex().clone();
    if f.domain() != Region::full(cx.clone()) {
        return Err(CuError::DomainMismatch);
    }
    let sets = (1..=f.max_finite())
        .map(|i| OpenSet::new(f.superlevel(Fin(i))))
        .collect::<Result<Vec<_>>>()?;
    let tail = f.superlevel(Inf);
    let infinite_tail = if tail.is_empty() { None } else { Some(OpenSet::new(tail)?) };
    let out = IndicatorDecomposition { sets, infinite_tail };
    let back = out.reassemble(&cx)?;
    if let Some(at) = back.leq_witness(f)?.or(f.leq_witness(&back)?) {
        return Err(CuError::Precondition(format!("indicators do not add back up at {at}")));
    }
    Ok(out)
}

/// How an [`IsoCandidate`] acts on elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsoMap {
    /// Same profile; the tuple at source exceptional point `i` is sent to
    /// target point `j` with coordinate `k` moved to `perm[k]`.
    Pointwise(BTreeMap<usize, (usize, Vec<usize>)>),
    /// Turns a circle `steps` edges forward.
    Rotation(usize),
}

/// A map between section semigroups given on generators and extended
/// by suprema.
#[derive(Clone, Debug)]
pub struct IsoCandidate<T: Scalar> {
    pub source: Arc<ModelField<T>>,
    pub target: Arc<ModelField<T>>,
    pub generators: Vec<(FieldElement<T>, FieldElement<T>)>,
    pub map: IsoMap,
}

impl<T: Scalar> IsoCandidate<T> {
    pub fn identity(field: Arc<ModelField<T>>) -> Self {
        let perms = field.exceptional().iter().enumerate().map(|(i, x)| (i, (i, (0..x.arity()).collect()))).collect();
        IsoCandidate { source: field.clone(), target: field, generators: vec![], map: IsoMap::Pointwise(perms) }
    }

    /// A rotation of a trivial field over a cycle of equal edges.
    pub fn rotation(field: Arc<ModelField<T>>, steps: usize) -> Result<Self> {
        let cx = field.base();
        let n = cx.edges().len();
        let cyclic = (0..n).all(|i| {
            let e = cx.edge(i);
            e.from == i && e.to == (i + 1) % n && e.length == cx.edge(0).length
        });
        if !field.is_trivial() || !cyclic || n != cx.vertices().len() {
            return Err(CuError::Precondition("rotations need a trivial field over a cycle of equal edges".into()));
        }
        Ok(IsoCandidate { source: field.clone(), target: field, generators: vec![], map: IsoMap::Rotation(steps % n) })
    }

    pub fn apply(&self, x: &FieldElement<T>) -> Result<FieldElement<T>> {
        if x.field() != &self.source {
            return Err(CuError::FieldMismatch);
        }
        match &self.map {
            IsoMap::Pointwise(perms) => {
                let mut tuples = BTreeMap::new();
                for (i, t) in x.tuples() {
                    let (j, perm) = &perms[i];
                    let mut out = vec![ExtNat::ZERO; t.len()];
                    for (k, v) in t.iter().enumerate() {
                        out[perm[k]] = *v;
                    }
                    tuples.insert(*j, out);
                }
                FieldElement::new(self.target.clone(), x.profile().clone(), tuples)
            }
            IsoMap::Rotation(steps) => {
                let cx = self.source.base();
                let n = cx.edges().len();
                let back = |i: usize| (i + n - steps) % n;
                let map = x.profile().map();
                let knots = (0..n).map(|e| map.knots(back(e)).to_vec()).collect();
                let rotated = CellMap::build(cx.clone(), knots, |loc| match loc {
                    Loc::Vertex(v) => *map.vertex_value(back(v)),
                    Loc::Knot(e, t) => *map.value_on_edge(back(e), t),
                    Loc::Cell(e, lo, hi) => *map.value_on_edge(back(e), &midpoint(lo, hi)),
                });
                FieldElement::new(self.target.clone(), StepFn::from_map(rotated, LscMode::Strict)?, BTreeMap::new())
            }
        }
    }

    /// The image of every generator is the declared one.
    pub fn agrees_on_generators(&self) -> Result<Option<String>> {
        for (a, b) in &self.generators {
            if self.apply(a)? != *b {
                return Ok(Some(format!("{} is sent to {}, not {}", a.render(), self.apply(a)?.render(), b.render())));
            }
        }
        Ok(None)
    }
}

impl fmt::Display for IsoMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IsoMap::Pointwise(perms) if perms.iter().all(|(i, (j, p))| i == j && p.iter().enumerate().all(|(k, q)| k == *q)) => {
                f.write_str("identity")
            }
            IsoMap::Pointwise(perms) => {
                let parts: Vec<String> = perms.iter().map(|(i, (j, p))| format!("{i}→{j} {p:?}")).collect();
                write!(f, "pointwise [{}]", parts.join(", "))
            }
            IsoMap::Rotation(s) => write!(f, "rotation by {s} edges"),
        }
    }
}

fn unit_tuple(arity: usize, k: usize) -> Vec<ExtNat> {
    (0..arity).map(|i| if i == k { Fin(1) } else { Fin(0) }).collect()
}

/// Extends a map given on compact elements to the full section semigroups.
/// The image of each generator must be compact, the generators must separate
/// the coordinates of every exceptional stalk, and images must be compatible
/// with restriction to the sample patches.
pub fn v_reconstruct<T: Scalar>(
    fa: &Arc<ModelField<T>>,
    fb: &Arc<ModelField<T>>,
    pairs: &[(FieldElement<T>, FieldElement<T>)],
    patches: &[ClosedPatch<T>],
) -> Result<IsoCandidate<T>> {
    if !same_complex(fa.base(), fb.base()) {
        return Err(CuError::ComplexMismatch);
    }
    let cx = fa.base();
    for (a, b) in pairs {
        if a.field() != fa || b.field() != fb {
            return Err(CuError::FieldMismatch);
        }
        for x in [a, b] {
            if !x.waybelow(x)? {
                return Err(CuError::Precondition(format!("{} is not compact", x.render())));
            }
        }
    }
    for (i, x) in fa.exceptional().iter().enumerate() {
        let at = cx.render(&x.point);
        if fb.exceptional_at(&x.point).is_none() {
            let witness = pairs
                .iter()
                .find(|(a, _)| a.tuples().contains_key(&i))
                .map(|(a, b)| format!(" ({} has image {})", a.render(), b.render()))
                .unwrap_or_default();
            return Err(CuError::NotCompatible(format!(
                "the stalk at {at} is N̄^{} in the source but N̄ in the target{witness}",
                x.arity()
            )));
        }
    }
    for (j, y) in fb.exceptional().iter().enumerate() {
        if fa.exceptional_at(&y.point).is_none() {
            return Err(CuError::NotCompatible(format!(
                "the stalk at {} is N̄ in the source but N̄^{} in the target (exceptional point {j})",
                cx.render(&y.point),
                y.arity()
            )));
        }
    }
    let mut perms = BTreeMap::new();
    for (i, x) in fa.exceptional().iter().enumerate() {
        let j = fb.exceptional_at(&x.point).expect("checked");
        let y = &fb.exceptional()[j];
        let at = cx.render(&x.point);
        if y.arity() != x.arity() {
            return Err(CuError::NotCompatible(format!("stalks at {at} have ranks {} and {}", x.arity(), y.arity())));
        }
        let mut perm = vec![usize::MAX; x.arity()];
        for (k, slot) in perm.iter_mut().enumerate() {
            let e = unit_tuple(x.arity(), k);
            let Some((_, b)) = pairs.iter().find(|(a, _)| a.tuple(i) == Some(&e)) else {
                return Err(CuError::NotDense { at: format!("{at}, coordinate {k}") });
            };
            let img = b.tuple(j).cloned().unwrap_or_default();
            let Some(q) = (0..y.arity()).find(|q| img == unit_tuple(y.arity(), *q)) else {
                return Err(CuError::NotCompatible(format!("a unit at {at} is sent to {}", StalkValue::Tuple(img))));
            };
            if y.weights[q] != x.weights[k] {
                return Err(CuError::NotCompatible(format!("coordinate {k} at {at} changes weight")));
            }
            *slot = q;
        }
        let mut seen = perm.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != perm.len() {
            return Err(CuError::NotCompatible(format!("two units at {at} share an image")));
        }
        perms.insert(i, (j, perm));
    }
    for p in patches {
        for (a1, b1) in pairs {
            for (a2, b2) in pairs {
                if a1.restrict_patch(p)? == a2.restrict_patch(p)? && b1.restrict_patch(p)? != b2.restrict_patch(p)? {
                    return Err(CuError::NotCompatible(format!(
                        "{} and {} agree on {} but their images do not",
                        a1.render(),
                        a2.render(),
                        p.render()
                    )));
                }
            }
        }
    }
    let iso = IsoCandidate { source: fa.clone(), target: fb.clone(), generators: pairs.to_vec(), map: IsoMap::Pointwise(perms) };
    if let Some(w) = iso.agrees_on_generators()? {
        return Err(CuError::NotCompatible(w));
    }
    Ok(iso)
}

/// Checks `φ(1_U·a) = 1_U·φ(a)` for every sampled open `U` and element `a`.
/// Returns a witness on failure.
pub fn preserves_action_check<T: Scalar>(iso: &IsoCandidate<T>, opens: &[OpenSet<T>], basis: &[FieldElement<T>]) -> Result<Option<String>> {
    for u in opens {
        let ind = StepFn::indicator(u, Fin(1));
        for a in basis {
            let left = iso.apply(&a.act(&ind)?)?;
            let right = iso.apply(a)?.act(&ind)?;
            if left != right {
                return Ok(Some(format!(
                    "U = {}, a = {}: φ(1_U·a) = {} but 1_U·φ(a) = {}",
                    u.render(),
                    a.render(),
                    left.render(),
                    right.render()
                )));
            }
        }
    }
    Ok(None)
}

/// Checks the clauses of a `≪`-bimorphism for the action on all pairs of
/// the given samples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BimorphismReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl BimorphismReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for BimorphismReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} checks", self.checked)?;
        for x in &self.failures {
            write!(f, "\n  {x}")?;
        }
        Ok(())
    }
}

/// `approx ≤ limit`, with equality at the sample points of `limit` except
/// where `limit` is infinite and `approx` has already reached `k` (for a
/// tuple coordinate, `k` divided by the weight sum, since the approximant
/// caps the rank).
fn reaches<T: Scalar>(limit: &Section<T>, approx: &Section<T>, k: u64) -> Result<bool> {
    let kt = k / limit.field().max_weight_sum().max(1);
    let near = |a: &StalkValue, b: &StalkValue| match (a, b) {
        (StalkValue::Scalar(Inf), StalkValue::Scalar(v)) => *v >= Fin(k),
        (StalkValue::Tuple(t), StalkValue::Tuple(u)) => t.iter().zip(u).all(|(x, y)| x == y || (*x == Inf && *y >= Fin(kt))),
        _ => a == b,
    };
    Ok(section_leq(approx, limit)?
        && sample_points(&[limit]).iter().all(|p| match (limit.eval(p), approx.eval(p)) {
            (Some(a), Some(b)) => near(&a, &b),
            _ => true,
        }))
}

pub fn bimorphism_laws<T: Scalar>(fs: &[StepFn<T>], ss: &[Section<T>]) -> Result<BimorphismReport> {
    let mut rep = BimorphismReport::default();
    let fail = |rep: &mut BimorphismReport, ok: bool, what: String| {
        rep.checked += 1;
        if !ok {
            rep.failures.push(what);
        }
    };
    let products: Vec<Vec<Section<T>>> = fs.iter().map(|f| ss.iter().map(|s| act(f, s)).collect()).collect::<Result<_>>()?;
    let one = StepFn::constant(fs.first().map_or_else(|| ss[0].field().base().clone(), |f| f.complex().clone()), Fin(1));
    for s in ss {
        fail(&mut rep, act(&one, s)? == *s, format!("1·{s} differs from {s}"));
    }
    for (i, f) in fs.iter().enumerate() {
        for (j, s) in ss.iter().enumerate() {
            let fs_ = &products[i][j];
            for (k, g) in fs.iter().enumerate() {
                let gs = &products[k][j];
                if f.leq(g)? {
                    fail(&mut rep, section_leq(fs_, gs)?, format!("not monotone in the function: {} ≤ {} on {s}", f.render(), g.render()));
                }
                let sum = act(&f.add(g)?, s)?;
                fail(&mut rep, sum == fs_.add(gs)?, format!("not additive in the function: {}, {} on {s}", f.render(), g.render()));
                if f.waybelow(g)? {
                    for (l, t) in ss.iter().enumerate() {
                        if section_waybelow(s, t)? {
                            fail(
                                &mut rep,
                                section_waybelow(fs_, &products[k][l])?,
                                format!("joint ≪ fails for ({}, {s}) ≪ ({}, {t})", f.render(), g.render()),
                            );
                        }
                    }
                }
            }
            for (l, t) in ss.iter().enumerate() {
                let ft = &products[i][l];
                if section_leq(s, t)? {
                    fail(&mut rep, section_leq(fs_, ft)?, format!("not monotone in the section: {s} ≤ {t} under {}", f.render()));
                }
                let sum = act(f, &s.add(t)?)?;
                fail(&mut rep, sum == fs_.add(ft)?, format!("not additive in the section: {s}, {t} under {}", f.render()));
            }
            let k = s.element().horizon(s.element()).max(crate::step::horizon(f, f)).max(fs_.element().horizon(fs_.element()));
            let by_s = act(f, &s.approx(k))?;
            let by_f = act(&f.approx(k), s)?;
            fail(&mut rep, reaches(fs_, &by_s, k)?, format!("not continuous in the section at {}, {s}", f.render()));
            fail(&mut rep, reaches(fs_, &by_f, k)?, format!("not continuous in the function at {}, {s}", f.render()));
        }
    }
    Ok(rep)
}

/// The compact elements of a handle, i.e. the model of its `V`-semigroup.
pub fn v_semigroup<T: Scalar>(field: Arc<ModelField<T>>, patch: &ClosedPatch<T>, bound: u64, resolution: u64, cap: usize) -> Result<Vec<FieldElement<T>>> {
    crate::order::compacts(&FieldHandle::new(field, patch)?, bound, resolution, cap)
}

/// Whether `h` has only elements with `x ≪ x` that are locally constant.
pub fn compacts_are_locally_constant<T: Scalar>(xs: &[FieldElement<T>]) -> bool {
    xs.iter().all(|x| x.profile().map().normalize().values().collect::<std::collections::BTreeSet<_>>().len() <= 1 || !x.complex().is_connected())
}
