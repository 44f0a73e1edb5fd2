//! Closed patches (closed sets with nonempty interior) and open sets.

use std::sync::Arc;

use crate::cellmap::{Loc, Region};
use crate::complex::{End, OneComplex, Point};
use crate::error::{CuError, Result};
use crate::metric::enlarge;
use crate::scalar::{midpoint, Scalar};

/// A closed subset with nonempty interior.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedPatch<T: Scalar> {
    region: Region<T>,
}

/// An open subset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenSet<T: Scalar> {
    region: Region<T>,
}

/// Builds the union of the given closed (`closed = true`) or open intervals
/// together with the listed points.
pub fn region_from_pieces<T: Scalar>(
    cx: &Arc<OneComplex<T>>,
    pieces: &[(usize, T, T)],
    points: &[Point<T>],
    closed: bool,
) -> Result<Region<T>> {
    let mut knots = vec![vec![]; cx.edges().len()];
    for (e, lo, hi) in pieces {
        let len = &cx.edges()[*e].length;
        if lo >= hi || *lo < T::zero() || hi > len {
            return Err(CuError::InvalidPatch(format!(
                "bad interval {}..{} on edge {}",
                lo,
                hi,
                cx.edge(*e).id
            )));
        }
        knots[*e].push(lo.clone());
        knots[*e].push(hi.clone());
    }
    for p in points {
        if let Point::Interior(e, t) = p {
            knots[*e].push(t.clone());
        }
    }
    let inside = |e: usize, t: &T, strict: bool| {
        pieces
            .iter()
            .any(|(f, lo, hi)| *f == e && if strict { lo < t && t < hi } else { lo <= t && t <= hi })
    };
    let region = Region::build(cx.clone(), knots, |loc| match loc {
        Loc::Vertex(v) => {
            points.contains(&Point::Vertex(v))
                || (closed
                    && cx.incident(v).iter().any(|(e, end)| {
                        let t = match end {
                            End::Start => T::zero(),
                            End::Finish => cx.edge(*e).length.clone(),
                        };
                        inside(*e, &t, false)
                    }))
        }
        Loc::Knot(e, t) => points.contains(&Point::Interior(e, t.clone())) || inside(e, t, !closed),
        Loc::Cell(e, lo, hi) => inside(e, &midpoint(lo, hi), true),
    });
    Ok(region.normalize())
}

impl<T: Scalar> ClosedPatch<T> {
    pub fn new(region: Region<T>) -> Result<Self> {
        let region = region.normalize();
        if !region.is_closed() {
            return Err(CuError::InvalidPatch(format!("{} is not closed", region.render())));
        }
        if !region.has_interior() {
            return Err(CuError::InvalidPatch(format!("{} has empty interior", region.render())));
        }
        Ok(ClosedPatch { region })
    }

    pub fn whole(cx: Arc<OneComplex<T>>) -> Self {
        ClosedPatch { region: Region::full(cx) }
    }

    /// Union of closed intervals `[lo, hi]` on the given edges plus extra points.
    pub fn from_pieces(cx: &Arc<OneComplex<T>>, pieces: &[(usize, T, T)], points: &[Point<T>]) -> Result<Self> {
        Self::new(region_from_pieces(cx, pieces, points, true)?)
    }

    /// `[lo, hi]` on edge `e`.
    pub fn interval(cx: &Arc<OneComplex<T>>, e: usize, lo: T, hi: T) -> Result<Self> {
        Self::from_pieces(cx, &[(e, lo, hi)], &[])
    }

    pub fn region(&self) -> &Region<T> {
        &self.region
    }

    pub fn complex(&self) -> &Arc<OneComplex<T>> {
        self.region.complex()
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        self.region.contains(p)
    }

    pub fn is_whole(&self) -> bool {
        self.region.values().all(|b| *b)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        Self::new(self.region.intersect(&other.region)?)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        Self::new(self.region.union(&other.region)?)
    }

    /// Closed `eps`-neighbourhood.
    pub fn enlarge(&self, eps: &T) -> Result<Self> {
        let whole = Region::full(self.complex().clone());
        Self::new(enlarge(&whole, &self.region, eps)?)
    }

    /// Topological interior in the ambient complex.
    pub fn interior(&self) -> Region<T> {
        self.region.interior()
    }

    pub fn render(&self) -> String {
        self.region.render()
    }
}

impl<T: Scalar> OpenSet<T> {
    pub fn new(region: Region<T>) -> Result<Self> {
        let region = region.normalize();
        if !region.is_open() {
            return Err(CuError::InvalidPatch(format!("{} is not open", region.render())));
        }
        Ok(OpenSet { region })
    }

    pub fn whole(cx: Arc<OneComplex<T>>) -> Self {
        OpenSet { region: Region::full(cx) }
    }

    pub fn empty(cx: Arc<OneComplex<T>>) -> Self {
        OpenSet { region: Region::empty(cx) }
    }

    /// Union of open intervals `(lo, hi)` plus listed vertices. A listed
    /// vertex must have all its incident edge ends covered.
    pub fn from_pieces(cx: &Arc<OneComplex<T>>, pieces: &[(usize, T, T)], vertices: &[usize]) -> Result<Self> {
        let pts: Vec<Point<T>> = vertices.iter().map(|v| Point::Vertex(*v)).collect();
        let region = region_from_pieces(cx, pieces, &[], false)?;
        let with_vertices = region.union(&region_from_pieces(cx, &[], &pts, true)?)?;
        Self::new(with_vertices)
    }

    pub fn interval(cx: &Arc<OneComplex<T>>, e: usize, lo: T, hi: T) -> Result<Self> {
        Self::from_pieces(cx, &[(e, lo, hi)], &[])
    }

    pub fn region(&self) -> &Region<T> {
        &self.region
    }

    pub fn complex(&self) -> &Arc<OneComplex<T>> {
        self.region.complex()
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        self.region.contains(p)
    }

    pub fn closure(&self) -> Region<T> {
        self.region.closure()
    }

    /// Closed complement, used as the domain of a quotient.
    pub fn complement(&self) -> Region<T> {
        self.region.complement()
    }

    pub fn render(&self) -> String {
        self.region.render()
    }
}
