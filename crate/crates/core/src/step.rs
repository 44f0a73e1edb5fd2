//! Lower semicontinuous step functions with values in `N ∪ {∞}`.

use std::fmt;
use std::sync::Arc;

use crate::cellmap::{CellMap, Loc, Region, Site};
use crate::complex::{OneComplex, Point};
use crate::error::{CuError, Result};
use crate::extnat::{ExtNat, Inf};
#[cfg(test)]
use crate::extnat::Fin;
use crate::metric::{distance_level, Cmp};
use crate::patch::{ClosedPatch, OpenSet};
use crate::scalar::{midpoint, Scalar};

/// How [`StepFn::make`] treats point values above a neighbouring cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LscMode {
    /// Reject with the offending point.
    Strict,
    /// Lower point values to the smallest adjacent cell value.
    Floor,
}

/// An lsc step function on a closed domain. Outside the domain the
/// underlying map holds `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepFn<T: Scalar> {
    map: CellMap<T, Option<ExtNat>>,
}

/// Why `f ≪ g` fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WaybelowFailure {
    /// `f` takes the value `∞` at `at`.
    Unbounded { at: String },
    /// `closure({f ≥ level})` meets the complement of `{g ≥ level}` at `at`.
    Closure { level: u64, at: String },
    /// Tuples at an exceptional point are not compactly contained.
    Tuple { at: String },
}

impl WaybelowFailure {
    /// Human-readable witness using the given operand names.
    pub fn describe(&self, f: &str, g: &str) -> String {
        match self {
            WaybelowFailure::Unbounded { at } => format!("{f} takes the value inf at {at}"),
            WaybelowFailure::Closure { level, at } => {
                format!("closure({{{f}≥{level}}}) ⊄ {{{g}≥{level}}} at {at}")
            }
            WaybelowFailure::Tuple { at } => format!("tuple of {f} is not way below the tuple of {g} at {at}"),
        }
    }
}

impl fmt::Display for WaybelowFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe("f", "g"))
    }
}

pub(crate) fn loc_name<T: Scalar>(cx: &OneComplex<T>, e: usize, t: &T) -> String {
    cx.render(&cx.point(e, t.clone()).expect("offset on edge"))
}

/// Sites in a fixed order with rendered locations.
pub(crate) fn site_point<T: Scalar, V>(site: &Site<'_, T, V>) -> Option<Point<T>> {
    match site {
        Site::Vertex { v, .. } => Some(Point::Vertex(*v)),
        Site::Knot { e, at, .. } => Some(Point::Interior(*e, (*at).clone())),
        Site::Cell { .. } => None,
    }
}

pub(crate) fn site_name<T: Scalar, V>(cx: &OneComplex<T>, site: &Site<'_, T, V>) -> String {
    match site {
        Site::Vertex { v, .. } => cx.vertices()[*v].clone(),
        Site::Knot { e, at, .. } => loc_name(cx, *e, at),
        Site::Cell { e, lo, hi, .. } => format!("{}({},{})", cx.edge(*e).id, lo, hi),
    }
}

fn check_same<T: Scalar>(a: &StepFn<T>, b: &StepFn<T>) -> Result<()> {
    if !crate::complex::same_complex(a.map.complex(), b.map.complex()) {
        return Err(CuError::ComplexMismatch);
    }
    if a.domain() != b.domain() {
        return Err(CuError::DomainMismatch);
    }
    Ok(())
}

impl<T: Scalar> StepFn<T> {
    /// Validates an arbitrary partial map: closed domain, lsc.
    pub fn from_map(map: CellMap<T, Option<ExtNat>>, mode: LscMode) -> Result<Self> {
        let map = map.normalize();
        let dom = map.domain();
        if !dom.is_closed() {
            return Err(CuError::InvalidPatch(format!("domain {} is not closed", dom.render())));
        }
        let map = match mode {
            LscMode::Strict => {
                if let Some((at, value, limit)) = lsc_violation(&map) {
                    return Err(CuError::NotLsc { at, value: value.to_string(), limit: limit.to_string() });
                }
                map
            }
            LscMode::Floor => lsc_floor(&map),
        };
        Ok(StepFn { map: map.normalize() })
    }

    pub fn constant(cx: Arc<OneComplex<T>>, v: ExtNat) -> Self {
        StepFn { map: CellMap::constant(cx, Some(v)) }
    }

    pub fn zero(cx: Arc<OneComplex<T>>) -> Self {
        Self::constant(cx, ExtNat::ZERO)
    }

    /// Constant `v` on the closed set `domain`.
    pub fn constant_on(domain: &Region<T>, v: ExtNat) -> Self {
        StepFn { map: domain.map(|b| if *b { Some(v) } else { None }).normalize() }
    }

    /// `v · 1_U` on the whole complex.
    pub fn indicator(u: &OpenSet<T>, v: ExtNat) -> Self {
        StepFn { map: u.region().map(|b| Some(if *b { v } else { ExtNat::ZERO })).normalize() }
    }

    /// `v · 1_U` restricted to `domain`.
    pub fn indicator_on(domain: &Region<T>, u: &Region<T>, v: ExtNat) -> Result<Self> {
        let map = domain.zip(u, |d, b| d.then_some(if *b { v } else { ExtNat::ZERO }))?;
        Self::from_map(map, LscMode::Strict)
    }

    /// Builds from open pieces `(edge, lo, hi, value)` and explicit point values.
    /// Unlisted knots take the smallest adjacent cell value. Pieces must
    /// cover every cell of the domain exactly once.
    pub fn make(
        cx: Arc<OneComplex<T>>,
        domain: Option<&Region<T>>,
        pieces: &[(usize, T, T, ExtNat)],
        points: &[(Point<T>, ExtNat)],
        mode: LscMode,
    ) -> Result<Self> {
        let full = Region::full(cx.clone());
        let domain = domain.unwrap_or(&full);
        let mut knots = domain.inner_knots();
        for (e, lo, hi, _) in pieces {
            let len = &cx.edge(*e).length;
            if lo >= hi || *lo < T::zero() || hi > len {
                return Err(CuError::InvalidPatch(format!("bad piece {}..{} on edge {}", lo, hi, cx.edge(*e).id)));
            }
            knots[*e].push(lo.clone());
            knots[*e].push(hi.clone());
        }
        for (p, _) in points {
            if let Point::Interior(e, t) = p {
                knots[*e].push(t.clone());
            }
        }
        // First pass: cell values, with coverage errors.
        let mut err = None;
        let cells: CellMap<T, Option<ExtNat>> = CellMap::build(cx.clone(), knots, |loc| match loc {
            Loc::Cell(e, lo, hi) => {
                let m = midpoint(lo, hi);
                if !*domain.value_on_edge(e, &m) {
                    return None;
                }
                let hits: Vec<ExtNat> = pieces
                    .iter()
                    .filter(|(f, a, b, _)| *f == e && *a < m && m < *b)
                    .map(|p| p.3)
                    .collect();
                match hits.len() {
                    1 => Some(hits[0]),
                    0 => {
                        err.get_or_insert(CuError::CoverGap { at: format!("{}({},{})", cx.edge(e).id, lo, hi) });
                        None
                    }
                    _ => {
                        err.get_or_insert(CuError::PieceOverlap { at: format!("{}({},{})", cx.edge(e).id, lo, hi) });
                        None
                    }
                }
            }
            _ => None,
        });
        if let Some(e) = err {
            return Err(e);
        }
        let mut err = None;
        let map = cells.map_sites(|loc, _| {
            let p = match loc {
                Loc::Vertex(v) => Point::Vertex(v),
                Loc::Knot(e, t) => Point::Interior(e, t.clone()),
                Loc::Cell(e, lo, hi) => return cells.value_on_edge(e, &midpoint(lo, hi)).to_owned(),
            };
            if !domain.contains(&p) {
                return None;
            }
            if let Some((_, v)) = points.iter().find(|(q, _)| *q == p) {
                return Some(*v);
            }
            let adj: Vec<ExtNat> = cells.adjacent_cells(&p).into_iter().flatten().copied().collect();
            match adj.iter().min() {
                Some(m) => Some(*m),
                None => {
                    err.get_or_insert(CuError::MissingPointValue { at: cx.render(&p) });
                    None
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        Self::from_map(map, mode)
    }

    pub fn map(&self) -> &CellMap<T, Option<ExtNat>> {
        &self.map
    }

    pub fn complex(&self) -> &Arc<OneComplex<T>> {
        self.map.complex()
    }

    pub fn domain(&self) -> Region<T> {
        self.map.domain()
    }

    pub fn eval(&self, p: &Point<T>) -> Option<ExtNat> {
        *self.map.eval(p)
    }

    pub fn is_bounded(&self) -> bool {
        self.map.values().flatten().all(|v| v.is_finite())
    }

    /// Largest finite value taken.
    pub fn max_finite(&self) -> u64 {
        self.map.values().flatten().filter_map(|v| v.finite()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.map.values().flatten().all(|v| v.is_zero())
    }

    pub fn add(&self, g: &Self) -> Result<Self> {
        check_same(self, g)?;
        let map = self.map.zip(&g.map, |a, b| a.zip(*b).map(|(a, b)| a + b))?;
        Ok(StepFn { map: map.normalize() })
    }

    pub fn leq(&self, g: &Self) -> Result<bool> {
        check_same(self, g)?;
        Ok(self.map.zip(&g.map, |a, b| a <= b)?.values().all(|b| *b))
    }

    /// First location where `f ≤ g` fails.
    pub fn leq_witness(&self, g: &Self) -> Result<Option<String>> {
        check_same(self, g)?;
        let z = self.map.zip(&g.map, |a, b| (*a, *b))?;
        let cx = self.complex().clone();
        Ok(z.sites().into_iter().find(|s| s.value().0 > s.value().1).map(|s| {
            let (a, b) = s.value();
            format!("{} > {} at {}", a.unwrap_or_default(), b.unwrap_or_default(), site_name(&cx, &s))
        }))
    }

    /// `f ≪ g`: `f` bounded and `closure({f ≥ n}) ⊆ {g ≥ n}` for all `n ≥ 1`.
    pub fn waybelow(&self, g: &Self) -> Result<bool> {
        Ok(self.waybelow_witness(g)?.is_none())
    }

    pub fn waybelow_witness(&self, g: &Self) -> Result<Option<WaybelowFailure>> {
        check_same(self, g)?;
        let cx = self.complex().clone();
        let z = self.map.zip(&g.map, |a, b| (*a, *b))?;
        let sites = z.sites();
        for s in &sites {
            if s.value().0 == Some(Inf) {
                return Ok(Some(WaybelowFailure::Unbounded { at: site_name(&cx, s) }));
            }
        }
        for s in &sites {
            let (Some(a), Some(b)) = *s.value() else { continue };
            let hull = match site_point(s) {
                None => a,
                Some(p) => z.adjacent_cells(&p).into_iter().filter_map(|c| c.0).fold(a, ExtNat::max),
            };
            if hull > b {
                let level = hull.finite().expect("bounded");
                return Ok(Some(WaybelowFailure::Closure { level, at: site_name(&cx, s) }));
            }
        }
        Ok(None)
    }

    /// The open set `{f ≥ n}` (relative to the domain).
    pub fn superlevel(&self, n: ExtNat) -> Region<T> {
        self.map.map(|v| v.is_some_and(|v| v >= n)).normalize()
    }

    /// `shrink_k(f)(x)`: the largest `n` such that the closed `1/k`-ball
    /// around `x` (inside the domain) lies in `{f ≥ n}`.
    pub fn shrink(&self, k: u64) -> Self {
        let r = T::recip_int(k.max(1));
        self.shrink_radius(&r)
    }

    pub(crate) fn shrink_radius(&self, r: &T) -> Self {
        let dom = self.domain();
        let mut levels: Vec<ExtNat> = self.map.values().flatten().copied().filter(|v| !v.is_zero()).collect();
        levels.sort();
        levels.dedup();
        let mut out = self.map.map(|v| v.map(|_| ExtNat::ZERO));
        for v in levels {
            let below = self.map.map(|x| x.is_some_and(|x| x < v));
            let far = distance_level(&dom, &below, r, Cmp::Greater).expect("same complex");
            out = out.zip(&far, |o, b| if *b { o.map(|_| v) } else { *o }).expect("same complex");
        }
        StepFn { map: out.normalize() }
    }

    /// Pointwise `min(f, k)`.
    pub fn cap(&self, k: u64) -> Self {
        StepFn { map: self.map.map(|v| v.map(|v| v.cap(k))).normalize() }
    }

    /// The canonical rapid chain: `min(shrink_k(f), k)`.
    pub fn approx(&self, k: u64) -> Self {
        self.shrink(k).cap(k)
    }

    /// Restriction to a closed subset of the domain.
    pub fn restrict(&self, p: &Region<T>) -> Result<Self> {
        if !p.subset_of(&self.domain())? {
            return Err(CuError::InvalidPatch(format!("{} is not inside the domain", p.render())));
        }
        if !p.is_closed() {
            return Err(CuError::InvalidPatch(format!("{} is not closed", p.render())));
        }
        let map = self.map.zip(p, |v, b| if *b { *v } else { None })?;
        Ok(StepFn { map: map.normalize() })
    }

    pub fn restrict_patch(&self, p: &ClosedPatch<T>) -> Result<Self> {
        self.restrict(p.region())
    }

    /// Glues two functions that agree on the overlap of their domains.
    pub fn glue(&self, other: &Self) -> Result<Self> {
        let cx = self.complex().clone();
        let z = self.map.zip(&other.map, |a, b| (*a, *b))?;
        for s in z.sites() {
            if let (Some(a), Some(b)) = s.value() {
                if a != b {
                    return Err(CuError::OverlapMismatch { at: site_name(&cx, &s) });
                }
            }
        }
        let map = z.map(|(a, b)| a.or(*b));
        Self::from_map(map, LscMode::Strict)
    }

    /// Pointwise `n · f`.
    pub fn scale(&self, n: ExtNat) -> Self {
        StepFn { map: self.map.map(|v| v.map(|v| n * v)).normalize() }
    }

    /// Pointwise product, the action of `Lsc(X, N̄)` on itself.
    pub fn mul(&self, g: &Self) -> Result<Self> {
        check_same(self, g)?;
        let map = self.map.zip(&g.map, |a, b| a.zip(*b).map(|(a, b)| a * b))?;
        Ok(StepFn { map: map.normalize() })
    }

    /// Replaces the value at a point of the domain; the result must stay lsc.
    pub fn with_point(&self, p: &Point<T>, v: ExtNat) -> Result<Self> {
        Self::from_map(self.map.with_point(p, Some(v)), LscMode::Strict)
    }

    pub(crate) fn with_point_unchecked(&self, p: &Point<T>, v: ExtNat) -> Self {
        StepFn { map: self.map.with_point(p, Some(v)).normalize() }
    }

    /// Smallest cell length of the common refinement with `g`.
    pub fn joint_gap(&self, g: &Self) -> T {
        self.map.zip(&g.map, |a, b| (*a, *b)).map(|z| z.min_gap()).unwrap_or_else(|_| self.map.min_gap())
    }

    /// Renders as `edge: {point}=v (lo,hi)=v ...` lines.
    pub fn render(&self) -> String {
        let cx = self.complex();
        let mut parts = vec![];
        for (v, name) in cx.vertices().iter().enumerate() {
            if let Some(x) = self.map.vertex_value(v) {
                parts.push(format!("{name}={x}"));
            }
        }
        for (e, edge) in cx.edges().iter().enumerate() {
            let ks = self.map.knots(e);
            let pts = self.map.point_values(e);
            let cells = self.map.cell_values(e);
            let mut items = vec![];
            for i in 0..cells.len() {
                if i > 0 {
                    if let Some(x) = pts[i] {
                        items.push(format!("{{{}}}={x}", ks[i]));
                    }
                }
                if let Some(x) = cells[i] {
                    items.push(format!("({},{})={x}", ks[i], ks[i + 1]));
                }
            }
            if !items.is_empty() {
                parts.push(format!("{}: {}", edge.id, items.join(" ")));
            }
        }
        parts.join("; ")
    }
}

impl<T: Scalar> fmt::Display for StepFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn lsc_violation<T: Scalar>(map: &CellMap<T, Option<ExtNat>>) -> Option<(String, ExtNat, ExtNat)> {
    let cx = map.complex();
    for (p, v) in map.point_sites() {
        let Some(v) = v else { continue };
        for c in map.adjacent_cells(&p).into_iter().flatten() {
            if v > c {
                return Some((cx.render(&p), *v, *c));
            }
        }
    }
    None
}

fn lsc_floor<T: Scalar>(map: &CellMap<T, Option<ExtNat>>) -> CellMap<T, Option<ExtNat>> {
    map.map_sites(|loc, v| {
        let p = match loc {
            Loc::Vertex(v) => Point::Vertex(v),
            Loc::Knot(e, t) => Point::Interior(e, t.clone()),
            Loc::Cell(..) => return *v,
        };
        let v = (*v)?;
        Some(map.adjacent_cells(&p).into_iter().flatten().fold(v, |a, b| a.min(*b)))
    })
}

/// Search bound for the chain characterization of `≪`: if `f ≪ g` then
/// `f ≤ approx_k(g)` for some `k` at most this value.
pub fn horizon_bound<T: Scalar>(gap: &T, max_value: u64, weight_sum: u64) -> u64 {
    let two = T::from_int(2);
    let dist = (two / gap.clone()).ceil_u64().unwrap_or(u64::MAX / 4);
    dist + 1 + (1 + weight_sum) * (max_value + 1)
}

pub fn horizon<T: Scalar>(f: &StepFn<T>, g: &StepFn<T>) -> u64 {
    horizon_bound(&f.joint_gap(g), f.max_finite().max(g.max_finite()), 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn unit() -> Arc<OneComplex<Rational>> {
        Arc::new(OneComplex::unit_interval())
    }

    /// `v · 1_(a,b)` on the unit interval.
    fn bump(cx: &Arc<OneComplex<Rational>>, a: Rational, b: Rational, v: u64) -> StepFn<Rational> {
        StepFn::indicator(&OpenSet::interval(cx, 0, a, b).unwrap(), Fin(v))
    }

    #[test]
    fn make_examples() {
        let cx = unit();
        let f = StepFn::make(cx.clone(), None, &[(0, r(0, 1), r(1, 1), Fin(1))], &[(Point::Vertex(0), Fin(0)), (Point::Vertex(1), Fin(0))], LscMode::Strict)
            .unwrap();
        assert_eq!(f, bump(&cx, r(0, 1), r(1, 1), 1));
        let spike = StepFn::make(cx.clone(), None, &[(0, r(0, 1), r(1, 1), Fin(0))], &[(Point::Interior(0, r(1, 2)), Fin(1))], LscMode::Strict);
        match spike {
            Err(CuError::NotLsc { at, .. }) => assert_eq!(at, "e:1/2"),
            other => panic!("unexpected {other:?}"),
        }
        let floored = StepFn::make(cx.clone(), None, &[(0, r(0, 1), r(1, 1), Fin(0))], &[(Point::Interior(0, r(1, 2)), Fin(1))], LscMode::Floor)
            .unwrap();
        assert_eq!(floored, StepFn::zero(cx.clone()));
        let gap = StepFn::make(cx.clone(), None, &[(0, r(0, 1), r(1, 2), Fin(0))], &[], LscMode::Strict);
        assert!(matches!(gap, Err(CuError::CoverGap { .. })));
    }

    #[test]
    fn add_and_leq() {
        let cx = unit();
        let a = bump(&cx, r(0, 1), r(1, 2), 1);
        let b = bump(&cx, r(1, 4), r(1, 1), 1);
        let s = a.add(&b).unwrap();
        assert_eq!(s.eval(&Point::Interior(0, r(3, 8))), Some(Fin(2)));
        assert_eq!(s.eval(&Point::Interior(0, r(1, 4))), Some(Fin(1)));
        assert_eq!(s.eval(&Point::Interior(0, r(1, 2))), Some(Fin(1)));
        assert_eq!(s.eval(&Point::Vertex(0)), Some(Fin(0)));
        let one = StepFn::constant(cx.clone(), Fin(1));
        let open = bump(&cx, r(0, 1), r(1, 1), 1);
        assert!(open.leq(&one).unwrap());
        assert!(!one.leq(&open).unwrap());
        assert!(bump(&cx, r(1, 4), r(3, 4), 1).leq(&bump(&cx, r(0, 1), r(1, 1), 2)).unwrap());
    }

    #[test]
    fn waybelow_examples() {
        let cx = unit();
        let open = bump(&cx, r(0, 1), r(1, 1), 1);
        assert!(bump(&cx, r(1, 4), r(3, 4), 1).waybelow(&open).unwrap());
        let w = open.waybelow_witness(&open).unwrap().unwrap();
        assert_eq!(w.describe("f", "f"), "closure({f≥1}) ⊄ {f≥1} at v0");
        let two = StepFn::constant(cx.clone(), Fin(2));
        assert!(two.waybelow(&two).unwrap());
        assert!(StepFn::zero(cx.clone()).waybelow(&open).unwrap());
        let inf = StepFn::constant(cx, Inf);
        assert!(!inf.waybelow(&inf).unwrap());
    }

    #[test]
    fn shrink_examples() {
        let cx = unit();
        let open = bump(&cx, r(0, 1), r(1, 1), 1);
        assert_eq!(open.shrink(4), bump(&cx, r(1, 4), r(3, 4), 1));
        let c = StepFn::constant(cx.clone(), Fin(3));
        assert_eq!(c.shrink(7), c);
        assert_eq!(StepFn::zero(cx.clone()).shrink(2), StepFn::zero(cx));
    }

    #[test]
    fn restrict_examples() {
        let cx = unit();
        let open = bump(&cx, r(0, 1), r(1, 1), 1);
        let p = ClosedPatch::interval(&cx, 0, r(1, 4), r(3, 4)).unwrap();
        let res = open.restrict_patch(&p).unwrap();
        assert_eq!(res, StepFn::constant_on(p.region(), Fin(1)));
        assert_eq!(open.restrict(&Region::full(cx.clone())).unwrap(), open);
        let inf = StepFn::constant(cx, Inf);
        assert_eq!(inf.restrict_patch(&p).unwrap(), StepFn::constant_on(p.region(), Inf));
    }

    #[test]
    fn glue_examples() {
        let cx = unit();
        let u = ClosedPatch::interval(&cx, 0, r(0, 1), r(1, 2)).unwrap();
        let v = ClosedPatch::interval(&cx, 0, r(1, 2), r(1, 1)).unwrap();
        let a = StepFn::constant_on(u.region(), Fin(1));
        let b = StepFn::constant_on(v.region(), Fin(1));
        assert_eq!(a.glue(&b).unwrap(), StepFn::constant(cx.clone(), Fin(1)));
        let b2 = StepFn::constant_on(v.region(), Fin(2));
        assert!(matches!(a.glue(&b2), Err(CuError::OverlapMismatch { .. })));
        let a0 = a.with_point(&Point::Interior(0, r(1, 2)), Fin(0)).unwrap();
        let b0 = b.with_point(&Point::Interior(0, r(1, 2)), Fin(0)).unwrap();
        let glued = a0.glue(&b0).unwrap();
        assert_eq!(glued.eval(&Point::Interior(0, r(1, 2))), Some(Fin(0)));
        assert_eq!(glued.eval(&Point::Interior(0, r(1, 3))), Some(Fin(1)));
        assert_eq!(glued.eval(&Point::Vertex(0)), Some(Fin(1)));
    }

    #[test]
    fn approx_chain_is_rapid() {
        let cx = unit();
        let f = bump(&cx, r(0, 1), r(1, 2), 2).add(&StepFn::indicator(&OpenSet::interval(&cx, 0, r(1, 4), r(1, 1)).unwrap(), Inf)).unwrap();
        for k in 1..20 {
            let a = f.approx(k);
            let b = f.approx(k + 1);
            assert!(a.waybelow(&b).unwrap(), "k = {k}");
            assert!(b.leq(&f).unwrap());
        }
    }
}
