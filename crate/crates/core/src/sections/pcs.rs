//! Piecewise characteristic sections, directed joins and realization.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::section::{merged_knots, section_leq, section_waybelow, RawSection, Section};
use crate::cellmap::{CellMap, Loc};
use crate::complex::Point;
use crate::error::{CuError, Result};
use crate::extnat::Fin;
use crate::field::{FieldElement, ModelField};
use crate::metric::open_ball;
use crate::patch::OpenSet;
use crate::scalar::{midpoint, Scalar};
use crate::cellmap::Region;
use crate::step::StepFn;

/// Data `({U_i}, s_i, s_ij)` together with the continuous section it assembles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PCSection<T: Scalar> {
    cover: Vec<OpenSet<T>>,
    singles: Vec<FieldElement<T>>,
    pairs: BTreeMap<(usize, usize), FieldElement<T>>,
    section: Section<T>,
}

fn loc_point<T: Scalar>(loc: &Loc<'_, T>) -> Point<T> {
    match loc {
        Loc::Vertex(v) => Point::Vertex(*v),
        Loc::Knot(e, t) => Point::Interior(*e, (*t).clone()),
        Loc::Cell(e, lo, hi) => Point::Interior(*e, midpoint(lo, hi)),
    }
}

/// Validates cover data and assembles `ŝ_i` on `U_i` minus the other sets
/// and `ŝ_ij` on `U_i ∩ U_j`.
pub fn pcs_make<T: Scalar>(
    field: &Arc<ModelField<T>>,
    cover: Vec<OpenSet<T>>,
    singles: Vec<FieldElement<T>>,
    pairs: BTreeMap<(usize, usize), FieldElement<T>>,
) -> Result<PCSection<T>> {
    let cx = field.base().clone();
    if cover.len() != singles.len() {
        return Err(CuError::Precondition(format!("{} sets but {} elements", cover.len(), singles.len())));
    }
    let full = Region::full(cx.clone());
    for s in singles.iter().chain(pairs.values()) {
        if s.field() != field {
            return Err(CuError::FieldMismatch);
        }
        if s.domain() != full {
            return Err(CuError::DomainMismatch);
        }
    }
    let n = cover.len();
    let closures: Vec<Region<T>> = cover.iter().map(|u| u.closure()).collect();
    let mut knots = merged_knots(cx.edges().len(), cover.iter().map(|u| u.region().all_knots()));
    for x in field.exceptional() {
        if let Point::Interior(e, t) = &x.point {
            knots[*e].push(t.clone());
        }
    }
    let grid: CellMap<T, ()> = CellMap::build(cx.clone(), knots.clone(), |_| ());
    let mut probe: Vec<Point<T>> = grid.point_sites().into_iter().map(|(p, _)| p).collect();
    for e in 0..cx.edges().len() {
        for w in grid.knots(e).windows(2) {
            probe.push(Point::Interior(e, midpoint(&w[0], &w[1])));
        }
    }
    for p in &probe {
        let inside = cover.iter().filter(|u| u.contains(p)).count();
        if inside == 0 {
            return Err(CuError::CoverGap { at: cx.render(p) });
        }
        let near = closures.iter().filter(|c| c.contains(p)).count();
        if inside.max(near) > 2 {
            return Err(CuError::Multiplicity { at: cx.render(p), count: inside.max(near) });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let meet = cover[i].region().intersect(cover[j].region())?;
            if meet.is_empty() {
                continue;
            }
            let Some(sij) = pairs.get(&(i, j)) else {
                return Err(CuError::Precondition(format!("no element given for the overlap of sets {i} and {j}")));
            };
            let edge = meet.boundary();
            for (k, sk) in [(i, &singles[i]), (j, &singles[j])] {
                let trace = edge.intersect(cover[k].region())?.closure();
                for (p, inside) in trace.point_sites() {
                    if !*inside {
                        continue;
                    }
                    let (a, b) = (sk.stalk_value(&p).expect("full"), sij.stalk_value(&p).expect("full"));
                    if !a.leq(&b) {
                        return Err(CuError::Compatibility {
                            at: cx.render(&p),
                            detail: format!("value {a} of set {k} exceeds the overlap value {b}"),
                        });
                    }
                }
            }
        }
    }
    let all = merged_knots(
        cx.edges().len(),
        std::iter::once(knots).chain(singles.iter().chain(pairs.values()).map(|s| s.profile().map().all_knots())),
    );
    let map = CellMap::build(cx.clone(), all, |loc| {
        let p = loc_point(&loc);
        let mut hit = (0..n).filter(|i| cover[*i].contains(&p));
        let s = match (hit.next(), hit.next()) {
            (Some(i), None) => &singles[i],
            (Some(i), Some(j)) => &pairs[&(i, j)],
            _ => unreachable!("multiplicity checked"),
        };
        s.stalk_value(&p)
    });
    let section = Section::from_raw(&RawSection::new(field.clone(), map)?)?;
    Ok(PCSection { cover, singles, pairs, section })
}

impl<T: Scalar> PCSection<T> {
    pub fn cover(&self) -> &[OpenSet<T>] {
        &self.cover
    }

    pub fn singles(&self) -> &[FieldElement<T>] {
        &self.singles
    }

    pub fn pairs(&self) -> &BTreeMap<(usize, usize), FieldElement<T>> {
        &self.pairs
    }

    /// The assembled continuous section.
    pub fn section(&self) -> &Section<T> {
        &self.section
    }

    pub fn field(&self) -> &Arc<ModelField<T>> {
        self.section.field()
    }
}

impl<T: Scalar> fmt::Display for PCSection<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (u, s)) in self.cover.iter().zip(&self.singles).enumerate() {
            writeln!(f, "U{i} = {}: {}", u.render(), s.render())?;
        }
        for ((i, j), s) in &self.pairs {
            writeln!(f, "U{i} ∩ U{j}: {}", s.render())?;
        }
        write!(f, "section: {}", self.section)
    }
}

/// The largest `2^-n` strictly below `bound`.
pub(crate) fn dyadic_below<T: Scalar>(bound: &T) -> T {
    let mut eps = T::one();
    while eps >= *bound {
        eps = eps.half();
    }
    eps
}

/// A piecewise characteristic presentation of the section induced by `h`:
/// small open balls around the breakpoints and shrunken open cells between
/// them, with `s_i = h·1_{U_i}` and `s_ij = h·1_{U_i ∪ U_j}`.
pub fn pcs_from_element<T: Scalar>(h: &FieldElement<T>) -> Result<PCSection<T>> {
    let field = h.field().clone();
    let cx = field.base().clone();
    let full = Region::full(cx.clone());
    if h.domain() != full {
        return Err(CuError::DomainMismatch);
    }
    let mut knots = h.profile().map().all_knots();
    for x in field.exceptional() {
        if let Point::Interior(e, t) = &x.point {
            knots[*e].push(t.clone());
        }
    }
    let grid: CellMap<T, ()> = CellMap::build(cx.clone(), knots, |_| ());
    let eps = dyadic_below(&grid.min_gap().half());
    let mut cover = vec![];
    for (p, _) in grid.point_sites() {
        cover.push(OpenSet::new(open_ball(&full, &p, &eps)?)?);
    }
    let q = eps.half();
    for e in 0..cx.edges().len() {
        for w in grid.knots(e).windows(2) {
            cover.push(OpenSet::interval(&cx, e, w[0].clone() + q.clone(), w[1].clone() - q.clone())?);
        }
    }
    let on = |u: &Region<T>| -> Result<FieldElement<T>> { h.act(&StepFn::indicator(&OpenSet::new(u.clone())?, Fin(1))) };
    let singles = cover.iter().map(|u| on(u.region())).collect::<Result<Vec<_>>>()?;
    let mut pairs = BTreeMap::new();
    for i in 0..cover.len() {
        for j in i + 1..cover.len() {
            if !cover[i].region().intersect(cover[j].region())?.is_empty() {
                pairs.insert((i, j), on(&cover[i].region().union(cover[j].region())?)?);
            }
        }
    }
    pcs_make(&field, cover, singles, pairs)
}

/// Some `g` with `h1, h2 ≪ g ≪ f`, taken from the approximating chain of `f`
/// and checked against both postconditions.
pub fn directed_join<T: Scalar>(h1: &Section<T>, h2: &Section<T>, f: &Section<T>) -> Result<PCSection<T>> {
    for h in [h1, h2] {
        if !section_waybelow(h, f)? {
            return Err(CuError::Precondition(format!("{h} is not compactly contained in {f}")));
        }
    }
    let top = f.element().horizon(h1.element()).max(f.element().horizon(h2.element())) + 1;
    let mut k = 1;
    while k < top && !(section_leq(h1, &f.approx(k))? && section_leq(h2, &f.approx(k))?) {
        k += 1;
    }
    for m in k..=top {
        let g = f.approx(m);
        if section_waybelow(h1, &g)? && section_waybelow(h2, &g)? && section_waybelow(&g, f)? {
            return pcs_from_element(g.element());
        }
    }
    Err(CuError::Precondition(format!("no interpolant below {f} up to stage {top}")))
}

/// A field element `h` with `f ≤ ĥ ≤ ĝ`: the earliest approximant of the
/// assembled element of `g` that lies above `f`.
pub fn realize<T: Scalar>(f: &Section<T>, g: &PCSection<T>) -> Result<FieldElement<T>> {
    let gs = g.section();
    if !section_waybelow(f, gs)? {
        return Err(CuError::Precondition(format!("{f} is not compactly contained in {gs}")));
    }
    let top = gs.element().horizon(f.element());
    let h = (1..=top).map(|k| gs.approx(k)).find(|h| section_leq(f, h).unwrap_or(false)).unwrap_or_else(|| gs.clone());
    debug_assert!(section_leq(f, &h)? && section_leq(&h, gs)?);
    Ok(h.element().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::OneComplex;
    use crate::extnat::{ExtNat, Inf};
    use crate::field::StalkValue;
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

    fn constant(v: ExtNat) -> FieldElement<Rational> {
        FieldElement::lift(triv(), StepFn::constant(unit(), v)).unwrap()
    }

    fn two_sets() -> Vec<OpenSet<Rational>> {
        let cx = unit();
        vec![
            OpenSet::from_pieces(&cx, &[(0, r(0, 1), r(3, 5))], &[0]).unwrap(),
            OpenSet::from_pieces(&cx, &[(0, r(2, 5), r(1, 1))], &[1]).unwrap(),
        ]
    }

    #[test]
    fn make_examples() {
        let ok = pcs_make(&triv(), two_sets(), vec![constant(Fin(1)), constant(Fin(1))], [((0, 1), constant(Fin(2)))].into()).unwrap();
        let s = ok.section();
        assert_eq!(s.eval(&Point::Interior(0, r(1, 2))), Some(StalkValue::Scalar(Fin(2))));
        assert_eq!(s.eval(&Point::Interior(0, r(2, 5))), Some(StalkValue::Scalar(Fin(1))));
        assert_eq!(s.eval(&Point::Interior(0, r(3, 5))), Some(StalkValue::Scalar(Fin(1))));
        let bad = pcs_make(&triv(), two_sets(), vec![constant(Fin(2)), constant(Fin(1))], [((0, 1), constant(Fin(1)))].into());
        match bad {
            Err(CuError::Compatibility { at, .. }) => assert!(at == "e:2/5" || at == "e:3/5", "{at}"),
            other => panic!("{other:?}"),
        }
        let x = FieldElement::lift(triv(), StepFn::indicator(&OpenSet::interval(&unit(), 0, r(1, 3), r(1, 2)).unwrap(), Fin(3))).unwrap();
        let one = pcs_make(&triv(), vec![OpenSet::whole(unit())], vec![x.clone()], BTreeMap::new()).unwrap();
        assert_eq!(one.section(), &Section::induced(&x));
    }

    #[test]
    fn make_rejections() {
        let cx = unit();
        let three = vec![
            OpenSet::from_pieces(&cx, &[(0, r(0, 1), r(3, 5))], &[0]).unwrap(),
            OpenSet::interval(&cx, 0, r(1, 5), r(4, 5)).unwrap(),
            OpenSet::from_pieces(&cx, &[(0, r(2, 5), r(1, 1))], &[1]).unwrap(),
        ];
        let c = constant(Fin(1));
        let all = [((0, 1), c.clone()), ((0, 2), c.clone()), ((1, 2), c.clone())].into();
        assert!(matches!(pcs_make(&triv(), three, vec![c.clone(); 3], all), Err(CuError::Multiplicity { count: 3, .. })));
        let gap = vec![OpenSet::interval(&cx, 0, r(0, 1), r(1, 1)).unwrap()];
        assert!(matches!(pcs_make(&triv(), gap, vec![c], BTreeMap::new()), Err(CuError::CoverGap { .. })));
    }

    #[test]
    fn presentations_reassemble() {
        let cx = unit();
        let f = StepFn::indicator(&OpenSet::interval(&cx, 0, r(1, 4), r(3, 4)).unwrap(), Fin(2))
            .add(&StepFn::constant(cx.clone(), Fin(1)))
            .unwrap();
        let x = FieldElement::lift(triv(), f).unwrap();
        assert_eq!(pcs_from_element(&x).unwrap().section(), &Section::induced(&x));
        let drop = Arc::new(ModelField::drop_at(cx.clone(), 0, r(1, 3), vec![1, 2]).unwrap());
        let y = FieldElement::new(drop, StepFn::constant(cx, Fin(5)), [(0, vec![Fin(1), Fin(2)])].into()).unwrap();
        let p = pcs_from_element(&y).unwrap();
        assert_eq!(p.section(), &Section::induced(&y));
        assert_eq!(realize(&Section::induced(&y.approx(2)), &p).unwrap().stalk_value(&Point::Interior(0, r(1, 3))).map(|v| v.is_finite()), Some(true));
    }

    #[test]
    fn joins_and_realizations() {
        let (one, two, four) = (Section::induced(&constant(Fin(1))), Section::induced(&constant(Fin(2))), Section::induced(&constant(Fin(4))));
        let g = directed_join(&one, &two, &four).unwrap();
        assert!(section_waybelow(&two, g.section()).unwrap());
        assert!(section_waybelow(g.section(), &four).unwrap());
        let same = directed_join(&one, &one, &two).unwrap();
        assert!(section_waybelow(&one, same.section()).unwrap());
        assert!(matches!(directed_join(&four, &one, &two), Err(CuError::Precondition(_))));
        let inf = Section::induced(&constant(Inf));
        assert!(directed_join(&four, &two, &inf).is_ok());
        let p = pcs_make(&triv(), two_sets(), vec![constant(Fin(1)), constant(Fin(1))], [((0, 1), constant(Fin(2)))].into()).unwrap();
        let f = p.section().approx(3);
        let h = realize(&f, &p).unwrap();
        let hs = Section::induced(&h);
        assert!(section_leq(&f, &hs).unwrap() && section_leq(&hs, p.section()).unwrap());
    }
}
