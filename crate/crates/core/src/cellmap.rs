//! Piecewise constant data on a subdivided complex.
//!
//! A [`CellMap`] assigns a value to every vertex, every interior knot and
//! every open cell of a finite rational subdivision of each edge. Sets,
//! step functions and sections are all cell maps with different value types.

use std::fmt::Debug;
use std::sync::Arc;

use crate::complex::{same_complex, End, OneComplex, Point};
use crate::error::{CuError, Result};
use crate::scalar::{midpoint, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Line<T, V> {
    /// Strictly increasing, starting at `0` and ending at the edge length.
    pub(crate) knots: Vec<T>,
    /// One value per knot; the two ends mirror the vertex values.
    pub(crate) points: Vec<V>,
    /// One value per open cell between consecutive knots.
    pub(crate) cells: Vec<V>,
}

#[derive(Clone, Debug)]
pub struct CellMap<T, V> {
    cx: Arc<OneComplex<T>>,
    verts: Vec<V>,
    lines: Vec<Line<T, V>>,
}

/// A location handed to builders.
#[derive(Clone, Copy, Debug)]
pub enum Loc<'a, T> {
    Vertex(usize),
    Knot(usize, &'a T),
    Cell(usize, &'a T, &'a T),
}

/// A location together with its value, as produced by [`CellMap::sites`].
#[derive(Clone, Copy, Debug)]
pub enum Site<'a, T, V> {
    Vertex { v: usize, value: &'a V },
    Knot { e: usize, i: usize, at: &'a T, value: &'a V },
    Cell { e: usize, i: usize, lo: &'a T, hi: &'a T, value: &'a V },
}

impl<'a, T, V> Site<'a, T, V> {
    pub fn value(&self) -> &'a V {
        match self {
            Site::Vertex { value, .. } | Site::Knot { value, .. } | Site::Cell { value, .. } => value,
        }
    }

    pub fn is_cell(&self) -> bool {
        matches!(self, Site::Cell { .. })
    }
}

/// Where an offset falls on a line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Knot(usize),
    Cell(usize),
}

impl<T: Scalar, V: PartialEq> PartialEq for CellMap<T, V> {
    fn eq(&self, other: &Self) -> bool {
        same_complex(&self.cx, &other.cx) && self.verts == other.verts && self.lines == other.lines
    }
}

impl<T: Scalar, V: Eq> Eq for CellMap<T, V> {}

fn locate<T: Ord>(knots: &[T], t: &T) -> Slot {
    match knots.binary_search(t) {
        Ok(i) => Slot::Knot(i),
        Err(i) => Slot::Cell(i - 1),
    }
}

impl<T: Scalar, V: Clone + PartialEq + Debug> CellMap<T, V> {
    pub fn constant(cx: Arc<OneComplex<T>>, value: V) -> Self {
        let n = cx.edges().len();
        Self::build(cx, vec![vec![]; n], |_| value.clone())
    }

    /// Builds a map whose knots on edge `e` are `knots[e]` (plus both ends).
    /// Offsets outside `(0, length)` are ignored.
    pub fn build(cx: Arc<OneComplex<T>>, knots: Vec<Vec<T>>, mut f: impl FnMut(Loc<'_, T>) -> V) -> Self {
        let verts: Vec<V> = (0..cx.vertices().len()).map(|v| f(Loc::Vertex(v))).collect();
        let mut lines = Vec::with_capacity(cx.edges().len());
        for (e, edge) in cx.edges().iter().enumerate() {
            let mut ks: Vec<T> = knots
                .get(e)
                .map(|k| k.iter().filter(|t| **t > T::zero() && **t < edge.length).cloned().collect())
                .unwrap_or_default();
            ks.push(T::zero());
            ks.push(edge.length.clone());
            ks.sort();
            ks.dedup();
            let mut points = Vec::with_capacity(ks.len());
            points.push(verts[edge.from].clone());
            for t in &ks[1..ks.len() - 1] {
                points.push(f(Loc::Knot(e, t)));
            }
            points.push(verts[edge.to].clone());
            let cells = ks.windows(2).map(|w| f(Loc::Cell(e, &w[0], &w[1]))).collect();
            lines.push(Line { knots: ks, points, cells });
        }
        CellMap { cx, verts, lines }
    }

    pub fn complex(&self) -> &Arc<OneComplex<T>> {
        &self.cx
    }

    pub fn knots(&self, e: usize) -> &[T] {
        &self.lines[e].knots
    }

    pub fn point_values(&self, e: usize) -> &[V] {
        &self.lines[e].points
    }

    pub fn cell_values(&self, e: usize) -> &[V] {
        &self.lines[e].cells
    }

    pub fn vertex_value(&self, v: usize) -> &V {
        &self.verts[v]
    }

    /// Value at offset `t` of edge `e`.
    pub fn value_on_edge(&self, e: usize, t: &T) -> &V {
        let line = &self.lines[e];
        match locate(&line.knots, t) {
            Slot::Knot(i) => &line.points[i],
            Slot::Cell(i) => &line.cells[i],
        }
    }

    pub fn eval(&self, p: &Point<T>) -> &V {
        match p {
            Point::Vertex(v) => &self.verts[*v],
            Point::Interior(e, t) => self.value_on_edge(*e, t),
        }
    }

    /// Values of the open cells adjacent to `p`.
    pub fn adjacent_cells(&self, p: &Point<T>) -> Vec<&V> {
        match p {
            Point::Vertex(v) => self
                .cx
                .incident(*v)
                .into_iter()
                .map(|(e, end)| {
                    let cells = &self.lines[e].cells;
                    match end {
                        End::Start => &cells[0],
                        End::Finish => &cells[cells.len() - 1],
                    }
                })
                .collect(),
            Point::Interior(e, t) => {
                let line = &self.lines[*e];
                match locate(&line.knots, t) {
                    Slot::Knot(i) => vec![&line.cells[i - 1], &line.cells[i]],
                    Slot::Cell(i) => vec![&line.cells[i], &line.cells[i]],
                }
            }
        }
    }

    /// All vertices, interior knots and open cells, in a fixed order.
    pub fn sites(&self) -> Vec<Site<'_, T, V>> {
        let mut out: Vec<Site<'_, T, V>> =
            self.verts.iter().enumerate().map(|(v, value)| Site::Vertex { v, value }).collect();
        for (e, line) in self.lines.iter().enumerate() {
            for i in 1..line.knots.len() - 1 {
                out.push(Site::Knot { e, i, at: &line.knots[i], value: &line.points[i] });
            }
            for (i, value) in line.cells.iter().enumerate() {
                out.push(Site::Cell { e, i, lo: &line.knots[i], hi: &line.knots[i + 1], value });
            }
        }
        out
    }

    /// Points that are vertices or interior knots, paired with their value.
    pub fn point_sites(&self) -> Vec<(Point<T>, &V)> {
        let mut out: Vec<(Point<T>, &V)> =
            self.verts.iter().enumerate().map(|(v, val)| (Point::Vertex(v), val)).collect();
        for (e, line) in self.lines.iter().enumerate() {
            for i in 1..line.knots.len() - 1 {
                out.push((Point::Interior(e, line.knots[i].clone()), &line.points[i]));
            }
        }
        out
    }

    pub fn values(&self) -> impl Iterator<Item = &V> {
        self.verts
            .iter()
            .chain(self.lines.iter().flat_map(|l| l.points[1..l.points.len() - 1].iter().chain(l.cells.iter())))
    }

    pub fn map<U: Clone + PartialEq + Debug>(&self, mut f: impl FnMut(&V) -> U) -> CellMap<T, U> {
        CellMap {
            cx: self.cx.clone(),
            verts: self.verts.iter().map(&mut f).collect(),
            lines: self
                .lines
                .iter()
                .map(|l| Line {
                    knots: l.knots.clone(),
                    points: l.points.iter().map(&mut f).collect(),
                    cells: l.cells.iter().map(&mut f).collect(),
                })
                .collect(),
        }
    }

    /// Like [`map`](Self::map) but the closure also sees the location.
    pub fn map_sites<U: Clone + PartialEq + Debug>(&self, mut f: impl FnMut(Loc<'_, T>, &V) -> U) -> CellMap<T, U> {
        let knots = self.inner_knots();
        CellMap::build(self.cx.clone(), knots, |loc| {
            let v = match loc {
                Loc::Vertex(v) => &self.verts[v],
                Loc::Knot(e, t) => self.value_on_edge(e, t),
                Loc::Cell(e, lo, hi) => self.value_on_edge(e, &midpoint(lo, hi)),
            };
            f(loc, v)
        })
    }

    pub(crate) fn inner_knots(&self) -> Vec<Vec<T>> {
        self.lines.iter().map(|l| l.knots[1..l.knots.len() - 1].to_vec()).collect()
    }

    /// Combines two maps on their common refinement.
    pub fn zip<W: Clone + PartialEq + Debug, U: Clone + PartialEq + Debug>(
        &self,
        other: &CellMap<T, W>,
        mut f: impl FnMut(&V, &W) -> U,
    ) -> Result<CellMap<T, U>> {
        if !same_complex(&self.cx, &other.cx) {
            return Err(CuError::ComplexMismatch);
        }
        let knots: Vec<Vec<T>> = self
            .inner_knots()
            .into_iter()
            .zip(other.inner_knots())
            .map(|(mut a, b)| {
                a.extend(b);
                a
            })
            .collect();
        Ok(CellMap::build(self.cx.clone(), knots, |loc| match loc {
            Loc::Vertex(v) => f(&self.verts[v], &other.verts[v]),
            Loc::Knot(e, t) => f(self.value_on_edge(e, t), other.value_on_edge(e, t)),
            Loc::Cell(e, lo, hi) => {
                let m = midpoint(lo, hi);
                f(self.value_on_edge(e, &m), other.value_on_edge(e, &m))
            }
        }))
    }

    /// Adds knots without changing the function.
    pub fn refine(&self, extra: &[Vec<T>]) -> Self {
        let knots: Vec<Vec<T>> = self
            .inner_knots()
            .into_iter()
            .enumerate()
            .map(|(e, mut k)| {
                if let Some(x) = extra.get(e) {
                    k.extend(x.iter().cloned());
                }
                k
            })
            .collect();
        CellMap::build(self.cx.clone(), knots, |loc| match loc {
            Loc::Vertex(v) => self.verts[v].clone(),
            Loc::Knot(e, t) => self.value_on_edge(e, t).clone(),
            Loc::Cell(e, lo, hi) => self.value_on_edge(e, &midpoint(lo, hi)).clone(),
        })
    }

    /// Drops interior knots across which nothing changes.
    pub fn normalize(&self) -> Self {
        let mut out = self.clone();
        for line in &mut out.lines {
            let n = line.knots.len();
            let mut knots = vec![line.knots[0].clone()];
            let mut points = vec![line.points[0].clone()];
            let mut cells: Vec<V> = vec![];
            let mut current = line.cells[0].clone();
            for i in 1..n - 1 {
                if line.points[i] == current && line.cells[i] == current {
                    continue;
                }
                cells.push(current);
                knots.push(line.knots[i].clone());
                points.push(line.points[i].clone());
                current = line.cells[i].clone();
            }
            cells.push(current);
            knots.push(line.knots[n - 1].clone());
            points.push(line.points[n - 1].clone());
            *line = Line { knots, points, cells };
        }
        out
    }

    /// Replaces the value at `p`, inserting a knot if needed.
    pub fn with_point(&self, p: &Point<T>, value: V) -> Self {
        let mut out = match p {
            Point::Interior(e, t) => {
                let mut extra = vec![vec![]; self.lines.len()];
                extra[*e].push(t.clone());
                self.refine(&extra)
            }
            Point::Vertex(_) => self.clone(),
        };
        match p {
            Point::Vertex(v) => {
                out.verts[*v] = value.clone();
                for (e, end) in self.cx.incident(*v) {
                    let line = &mut out.lines[e];
                    let i = match end {
                        End::Start => 0,
                        End::Finish => line.points.len() - 1,
                    };
                    line.points[i] = value.clone();
                }
            }
            Point::Interior(e, t) => {
                let line = &mut out.lines[*e];
                if let Slot::Knot(i) = locate(&line.knots, t) {
                    line.points[i] = value;
                }
            }
        }
        out
    }

    /// Smallest open-cell length.
    pub fn min_gap(&self) -> T {
        self.lines
            .iter()
            .flat_map(|l| l.knots.windows(2).map(|w| w[1].clone() - w[0].clone()))
            .min()
            .unwrap_or_else(T::one)
    }

    /// Every knot offset, including both ends, per edge.
    pub fn all_knots(&self) -> Vec<Vec<T>> {
        self.lines.iter().map(|l| l.knots.clone()).collect()
    }
}

/// A subset of the complex that is a finite union of cells and points.
pub type Region<T> = CellMap<T, bool>;

impl<T: Scalar> CellMap<T, bool> {
    pub fn empty(cx: Arc<OneComplex<T>>) -> Self {
        Self::constant(cx, false)
    }

    pub fn full(cx: Arc<OneComplex<T>>) -> Self {
        Self::constant(cx, true)
    }

    /// `{p}` for a single point.
    pub fn singleton(cx: Arc<OneComplex<T>>, p: &Point<T>) -> Self {
        Self::empty(cx).with_point(p, true)
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        *self.eval(p)
    }

    pub fn is_empty(&self) -> bool {
        !self.values().any(|b| *b)
    }

    /// `true` when some open cell lies in the set.
    pub fn has_interior(&self) -> bool {
        self.lines.iter().any(|l| l.cells.iter().any(|c| *c))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        Ok(self.zip(other, |a, b| *a || *b)?.normalize())
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        Ok(self.zip(other, |a, b| *a && *b)?.normalize())
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        Ok(self.zip(other, |a, b| *a && !*b)?.normalize())
    }

    pub fn complement(&self) -> Self {
        self.map(|b| !*b)
    }

    pub fn subset_of(&self, other: &Self) -> Result<bool> {
        Ok(self.zip(other, |a, b| !*a || *b)?.values().all(|b| *b))
    }

    pub fn closure(&self) -> Self {
        self.map_points(|own, adj| own || adj.iter().any(|c| **c)).normalize()
    }

    pub fn interior(&self) -> Self {
        self.map_points(|own, adj| own && adj.iter().all(|c| **c)).normalize()
    }

    /// Interior relative to the closed set `within`.
    pub fn interior_within(&self, within: &Self) -> Result<Self> {
        let pair = self.zip(within, |a, b| (*a, *b))?;
        let out = pair.map_points_pair(|own, adj| own.0 && adj.iter().all(|c| !c.1 || c.0));
        Ok(out.normalize())
    }

    pub fn is_open(&self) -> bool {
        self.interior() == self.normalize()
    }

    pub fn is_closed(&self) -> bool {
        self.closure() == self.normalize()
    }

    /// `closure \ interior`.
    pub fn boundary(&self) -> Self {
        self.closure().minus(&self.interior()).expect("same complex")
    }

    /// The finitely many points of a set without interior.
    pub fn isolated_points(&self) -> Vec<Point<T>> {
        self.point_sites().into_iter().filter(|(_, b)| **b).map(|(p, _)| p).collect()
    }

    fn map_points(&self, f: impl Fn(bool, Vec<&bool>) -> bool) -> Self {
        let mut out = self.clone();
        for (v, val) in out.verts.iter_mut().enumerate() {
            let p = Point::Vertex(v);
            *val = f(self.verts[v], self.adjacent_cells(&p));
        }
        for (e, line) in out.lines.iter_mut().enumerate() {
            let n = line.knots.len();
            let edge = self.cx.edge(e);
            line.points[0] = out.verts[edge.from];
            line.points[n - 1] = out.verts[edge.to];
            for i in 1..n - 1 {
                let src = &self.lines[e];
                line.points[i] = f(src.points[i], vec![&src.cells[i - 1], &src.cells[i]]);
            }
        }
        out
    }

    /// Interval pieces `(edge, lo, hi)` of the open cells in the set, merged
    /// across interior knots that also belong to the set.
    pub fn open_pieces(&self) -> Vec<(usize, T, T)> {
        let mut out = vec![];
        for (e, line) in self.lines.iter().enumerate() {
            let mut start: Option<T> = None;
            for (i, c) in line.cells.iter().enumerate() {
                if *c {
                    if start.is_none() {
                        start = Some(line.knots[i].clone());
                    }
                    let last = i + 1 == line.cells.len();
                    if last || !line.points[i + 1] || !line.cells[i + 1] {
                        out.push((e, start.take().unwrap(), line.knots[i + 1].clone()));
                    }
                }
            }
        }
        out
    }

    /// Renders the set as a union of intervals and points.
    pub fn render(&self) -> String {
        let n = self.normalize();
        let mut parts = vec![];
        for (v, b) in n.verts.iter().enumerate() {
            if *b && n.adjacent_cells(&Point::Vertex(v)).iter().all(|c| !**c) {
                parts.push(format!("{{{}}}", n.cx.vertices()[v]));
            }
        }
        for (e, line) in n.lines.iter().enumerate() {
            let id = &n.cx.edge(e).id;
            let mut i = 0;
            while i < line.cells.len() {
                if line.cells[i] {
                    let lo = i;
                    while i + 1 < line.cells.len() && line.points[i + 1] && line.cells[i + 1] {
                        i += 1;
                    }
                    let l = if line.points[lo] { "[" } else { "(" };
                    let r = if line.points[i + 1] { "]" } else { ")" };
                    parts.push(format!("{id}{l}{},{}{r}", line.knots[lo], line.knots[i + 1]));
                } else if i > 0 && line.points[i] && !line.cells[i - 1] {
                    parts.push(format!("{{{id}:{}}}", line.knots[i]));
                }
                i += 1;
            }
        }
        if parts.is_empty() {
            "∅".to_string()
        } else {
            parts.join(" ∪ ")
        }
    }
}

impl<T: Scalar> CellMap<T, (bool, bool)> {
    fn map_points_pair(&self, f: impl Fn((bool, bool), Vec<&(bool, bool)>) -> bool) -> Region<T> {
        let base = self.map(|p| p.0);
        let mut out = base.clone();
        for v in 0..out.verts.len() {
            let p = Point::Vertex(v);
            out.verts[v] = f(self.verts[v], self.adjacent_cells(&p));
        }
        for (e, line) in out.lines.iter_mut().enumerate() {
            let n = line.knots.len();
            let edge = self.cx.edge(e);
            line.points[0] = out.verts[edge.from];
            line.points[n - 1] = out.verts[edge.to];
            let src = &self.lines[e];
            for i in 1..n - 1 {
                line.points[i] = f(src.points[i], vec![&src.cells[i - 1], &src.cells[i]]);
            }
        }
        out
    }
}

impl<T: Scalar, V: Clone + PartialEq + Debug> CellMap<T, Option<V>> {
    /// Where the partial map is defined.
    pub fn domain(&self) -> Region<T> {
        self.map(|v| v.is_some()).normalize()
    }
}

impl<T: Scalar, V: Clone + PartialEq + Debug> CellMap<T, V> {
    /// Partial map defined on `region`.
    pub fn restrict_to(&self, region: &Region<T>) -> Result<CellMap<T, Option<V>>> {
        Ok(self.zip(region, |v, b| if *b { Some(v.clone()) } else { None })?.normalize())
    }
}
