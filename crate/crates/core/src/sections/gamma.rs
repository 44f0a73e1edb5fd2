//! Rapidly increasing chains of piecewise characteristic sections and the
//! isomorphism between field elements and continuous sections.

use std::fmt;
use std::sync::Arc;

use super::pcs::{pcs_from_element, realize, PCSection};
use super::section::{merged_knots, section_leq, section_waybelow, RawSection, Section};
use crate::cellmap::{CellMap, Loc, Region};
use crate::complex::Point;
use crate::error::{CuError, Result};
use crate::field::{FieldElement, FieldHandle, ModelField, StalkValue};
use crate::order::CuSemigroup;
use crate::scalar::{midpoint, Scalar};

/// A finite rapidly increasing chain standing for its pointwise supremum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaElement<T: Scalar> {
    chain: Vec<PCSection<T>>,
}

impl<T: Scalar> GammaElement<T> {
    pub fn new(chain: Vec<PCSection<T>>) -> Result<Self> {
        if chain.is_empty() {
            return Err(CuError::Precondition("empty chain".into()));
        }
        for (i, w) in chain.windows(2).enumerate() {
            if !section_waybelow(w[0].section(), w[1].section())? {
                return Err(CuError::Precondition(format!("entry {i} is not compactly contained in entry {}", i + 1)));
            }
        }
        Ok(GammaElement { chain })
    }

    pub fn chain(&self) -> &[PCSection<T>] {
        &self.chain
    }

    pub fn field(&self) -> &Arc<ModelField<T>> {
        self.chain[0].field()
    }

    /// Pointwise supremum of the chain, sampled at the given knots and the
    /// cells between them.
    pub fn sup_on(&self, knots: Vec<Vec<T>>) -> Result<Section<T>> {
        pointwise_sup_on(&self.chain.iter().map(|p| p.section().clone()).collect::<Vec<_>>(), knots)
    }

    /// Pointwise supremum on the common refinement of all entries.
    pub fn sup(&self) -> Result<Section<T>> {
        let n = self.field().base().edges().len();
        let knots = merged_knots(n, self.chain.iter().map(|p| p.section().to_raw().map().all_knots()));
        self.sup_on(knots)
    }
}

impl<T: Scalar> fmt::Display for GammaElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.chain.iter().map(|p| p.section().render()).collect();
        write!(f, "sup [{}]", parts.join(" ≪ "))
    }
}

/// Pointwise join of sections, sampled on `knots` (plus exceptional points).
pub fn pointwise_sup_on<T: Scalar>(sections: &[Section<T>], mut knots: Vec<Vec<T>>) -> Result<Section<T>> {
    let Some(first) = sections.first() else {
        return Err(CuError::Precondition("no sections".into()));
    };
    let field = first.field().clone();
    let dom = first.domain();
    for s in sections {
        if s.field() != &field {
            return Err(CuError::FieldMismatch);
        }
        if s.domain() != dom {
            return Err(CuError::DomainMismatch);
        }
    }
    for x in field.exceptional() {
        if let Point::Interior(e, t) = &x.point {
            knots[*e].push(t.clone());
        }
    }
    let map = CellMap::build(field.base().clone(), knots, |loc| {
        let p = match loc {
            Loc::Vertex(v) => Point::Vertex(v),
            Loc::Knot(e, t) => Point::Interior(e, t.clone()),
            Loc::Cell(e, lo, hi) => Point::Interior(e, midpoint(lo, hi)),
        };
        sections.iter().filter_map(|s| s.eval(&p)).reduce(|a, b| a.join(&b))
    });
    Section::from_raw(&RawSection::new(field, map)?)
}

/// The chain `approx_{2^j}(f)`, `j = 1..=depth`, in piecewise characteristic form.
pub fn decompose<T: Scalar>(f: &Section<T>, depth: u32) -> Result<GammaElement<T>> {
    let chain = (1..=depth.max(1))
        .map(|j| pcs_from_element(f.approx(1u64 << j.min(62)).element()))
        .collect::<Result<Vec<_>>>()?;
    GammaElement::new(chain)
}

/// Depth at which `decompose` is exact for a bounded section, with one
/// spare entry so that the realized chain reaches the input.
pub fn exact_depth<T: Scalar>(f: &Section<T>) -> u32 {
    let k = f.element().horizon(f.element()).max(2);
    64 - (k - 1).leading_zeros() + 1
}

/// `S(X) → Γ(X, F_S)` and its inverse.
#[derive(Clone, Debug)]
pub struct AlphaIso<T: Scalar> {
    field: Arc<ModelField<T>>,
}

/// Outcome of [`AlphaIso::check`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AlphaReport {
    pub elements: usize,
    pub sections: usize,
    pub pairs: usize,
    pub failures: Vec<String>,
}

impl AlphaReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for AlphaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} elements, {} sections, {} ordered pairs", self.elements, self.sections, self.pairs)?;
        for x in &self.failures {
            write!(f, "\n  {x}")?;
        }
        Ok(())
    }
}

impl<T: Scalar> AlphaIso<T> {
    pub fn new(field: Arc<ModelField<T>>) -> Self {
        AlphaIso { field }
    }

    pub fn forward(&self, s: &FieldElement<T>) -> Section<T> {
        Section::induced(s)
    }

    /// Decomposes, realizes consecutive entries and takes the supremum on
    /// the knots of the input.
    pub fn inverse(&self, f: &Section<T>) -> Result<FieldElement<T>> {
        if f.field() != &self.field {
            return Err(CuError::FieldMismatch);
        }
        let chain = decompose(f, exact_depth(f))?;
        let mut hs = vec![];
        for w in chain.chain().windows(2) {
            hs.push(Section::induced(&realize(w[0].section(), &w[1])?));
        }
        if hs.is_empty() {
            hs.push(chain.chain()[0].section().clone());
        }
        let sup = pointwise_sup_on(&hs, f.to_raw().map().all_knots())?;
        Ok(sup.element().clone())
    }

    /// Round trips on the enumerated basis of `S(X)` and of `Γ`, and the
    /// order embedding on up to `max_pairs` pairs.
    pub fn check(&self, bound: u64, resolution: u64, cap: usize, max_pairs: usize) -> Result<AlphaReport> {
        let h = FieldHandle::on_region(self.field.clone(), Region::full(self.field.base().clone()));
        let xs: Vec<FieldElement<T>> = h.enumerate(bound, resolution, cap)?.into_iter().filter(|x| x.is_bounded()).collect();
        let mut rep = AlphaReport { elements: xs.len(), ..Default::default() };
        let mut sections = vec![];
        for x in &xs {
            let s = self.forward(x);
            if self.inverse(&s)? != *x {
                rep.failures.push(format!("α⁻¹(α({})) differs", x.render()));
            }
            let gamma = Section::from_raw(&s.to_raw())?;
            if self.forward(&self.inverse(&gamma)?) != gamma {
                rep.failures.push(format!("α(α⁻¹({gamma})) differs"));
            }
            sections.push(s);
        }
        rep.sections = sections.len();
        'outer: for (i, x) in xs.iter().enumerate() {
            for (j, y) in xs.iter().enumerate() {
                if rep.pairs >= max_pairs {
                    break 'outer;
                }
                rep.pairs += 1;
                if x.leq(y)? != section_leq(&sections[i], &sections[j])? {
                    rep.failures.push(format!("order differs on ({}, {})", x.render(), y.render()));
                }
            }
        }
        Ok(rep)
    }
}

/// `Γ(P, F_S)` over a closed domain, enumerated through `S(P)`.
#[derive(Clone, Debug)]
pub struct SectionsHandle<T: Scalar> {
    inner: FieldHandle<T>,
}

impl<T: Scalar> SectionsHandle<T> {
    pub fn new(field: Arc<ModelField<T>>, domain: Region<T>) -> Self {
        SectionsHandle { inner: FieldHandle::on_region(field, domain) }
    }
}

impl<T: Scalar> CuSemigroup for SectionsHandle<T> {
    type Elem = Section<T>;

    fn describe(&self) -> String {
        let dom = self.inner.domain();
        let dom = if dom.values().all(|b| *b) { "X".to_string() } else { dom.render() };
        format!("Γ({dom}) of the {}", self.inner.field().describe())
    }

    fn zero(&self) -> Section<T> {
        Section::induced(&self.inner.zero())
    }

    fn add(&self, a: &Section<T>, b: &Section<T>) -> Section<T> {
        a.add(b).expect("same handle")
    }

    fn leq(&self, a: &Section<T>, b: &Section<T>) -> bool {
        section_leq(a, b).expect("same handle")
    }

    fn waybelow(&self, a: &Section<T>, b: &Section<T>) -> bool {
        section_waybelow(a, b).expect("same handle")
    }

    fn same(&self, a: &Section<T>, b: &Section<T>) -> bool {
        a == b
    }

    fn approximant(&self, x: &Section<T>, k: u64) -> Section<T> {
        x.approx(k)
    }

    fn horizon(&self, x: &Section<T>, y: &Section<T>) -> u64 {
        x.element().horizon(y.element())
    }

    fn is_basis(&self, x: &Section<T>) -> bool {
        x.is_bounded()
    }

    fn enumerate(&self, bound: u64, resolution: u64, cap: usize) -> Result<Vec<Section<T>>> {
        self.inner
            .enumerate(bound, resolution, cap)?
            .iter()
            .map(|x| Section::from_raw(&Section::induced(x).to_raw()))
            .collect()
    }

    fn render(&self, x: &Section<T>) -> String {
        x.render()
    }
}

/// Values of a section at the given points, for reproduction checks.
pub fn values_at<T: Scalar>(f: &Section<T>, points: &[Point<T>]) -> Vec<Option<StalkValue>> {
    points.iter().map(|p| f.eval(p)).collect()
}
