//! Intrinsic distances inside a closed subset of a complex.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::cellmap::{CellMap, Loc, Region};
use crate::complex::Point;
use crate::error::Result;
use crate::scalar::{midpoint, Scalar};

/// Which sublevel or superlevel set of the distance to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Less,
    AtMost,
    Greater,
    AtLeast,
}

/// Path distance, measured inside a closed domain `D`, to a closed source set `C ⊆ D`.
/// Unreachable points have distance `None` (infinite).
pub struct DistanceField<T> {
    /// `.0` is the domain flag, `.1` the source flag.
    grid: CellMap<T, (bool, bool)>,
    vertex: Vec<Option<T>>,
    knot: Vec<Vec<Option<T>>>,
}

fn add_opt<T: Scalar>(a: &Option<T>, b: T) -> Option<T> {
    a.as_ref().map(|a| a.clone() + b)
}

fn min_opt<T: Scalar>(a: Option<T>, b: Option<T>) -> Option<T> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(if a <= b { a } else { b }),
    }
}

impl<T: Scalar> DistanceField<T> {
    pub fn new(domain: &Region<T>, sources: &Region<T>) -> Result<Self> {
        let grid = domain.zip(sources, |d, s| (*d, *d && *s))?;
        let cx = grid.complex().clone();
        let nv = cx.vertices().len();
        // node ids: vertices first, then the knots of every edge in order
        let mut offset = vec![0usize; cx.edges().len()];
        let mut total = nv;
        for e in 0..cx.edges().len() {
            offset[e] = total;
            total += grid.knots(e).len();
        }
        let node = |e: usize, i: usize, len: usize| -> usize {
            let edge = cx.edge(e);
            if i == 0 {
                edge.from
            } else if i + 1 == len {
                edge.to
            } else {
                offset[e] + i
            }
        };
        let mut adj: Vec<Vec<(usize, T)>> = vec![vec![]; total];
        let mut dist: Vec<Option<T>> = vec![None; total];
        let mut heap = BinaryHeap::new();
        for v in 0..nv {
            if grid.vertex_value(v).1 {
                dist[v] = Some(T::zero());
            }
        }
        for e in 0..cx.edges().len() {
            let ks = grid.knots(e);
            let pts = grid.point_values(e);
            let cells = grid.cell_values(e);
            for i in 0..ks.len() {
                if pts[i].1 {
                    dist[node(e, i, ks.len())] = Some(T::zero());
                }
            }
            for i in 0..cells.len() {
                let (a, b) = (node(e, i, ks.len()), node(e, i + 1, ks.len()));
                if cells[i].1 {
                    dist[a] = Some(T::zero());
                    dist[b] = Some(T::zero());
                }
                if cells[i].0 {
                    let w = ks[i + 1].clone() - ks[i].clone();
                    adj[a].push((b, w.clone()));
                    adj[b].push((a, w));
                }
            }
        }
        for (n, d) in dist.iter().enumerate() {
            if let Some(d) = d {
                heap.push(Reverse((d.clone(), n)));
            }
        }
        while let Some(Reverse((d, n))) = heap.pop() {
            if dist[n].as_ref().is_some_and(|cur| *cur < d) {
                continue;
            }
            for (m, w) in &adj[n] {
                let nd = d.clone() + w.clone();
                if dist[*m].as_ref().map_or(true, |cur| nd < *cur) {
                    dist[*m] = Some(nd.clone());
                    heap.push(Reverse((nd, *m)));
                }
            }
        }
        let vertex = dist[..nv].to_vec();
        let knot = (0..cx.edges().len())
            .map(|e| {
                let len = grid.knots(e).len();
                (0..len).map(|i| dist[node(e, i, len)].clone()).collect()
            })
            .collect();
        Ok(DistanceField { grid, vertex, knot })
    }

    /// Distance at offset `t` of edge `e`; `None` means unreachable or outside the domain.
    pub fn at_offset(&self, e: usize, t: &T) -> Option<T> {
        let ks = self.grid.knots(e);
        match ks.binary_search(t) {
            Ok(i) => {
                if self.grid.point_values(e)[i].0 {
                    self.knot[e][i].clone()
                } else {
                    None
                }
            }
            Err(i) => {
                let c = i - 1;
                let (inside, src) = self.grid.cell_values(e)[c];
                if !inside {
                    return None;
                }
                if src {
                    return Some(T::zero());
                }
                let left = add_opt(&self.knot[e][c], t.clone() - ks[c].clone());
                let right = add_opt(&self.knot[e][c + 1], ks[c + 1].clone() - t.clone());
                min_opt(left, right)
            }
        }
    }

    pub fn at(&self, p: &Point<T>) -> Option<T> {
        match p {
            Point::Vertex(v) => {
                if self.grid.vertex_value(*v).0 {
                    self.vertex[*v].clone()
                } else {
                    None
                }
            }
            Point::Interior(e, t) => self.at_offset(*e, t),
        }
    }

    /// `{x ∈ D : dist(x) ◇ r}` where `◇` is `cmp`.
    pub fn level_set(&self, r: &T, cmp: Cmp) -> Region<T> {
        let test = |d: Option<T>| match (cmp, d) {
            (Cmp::Less, Some(d)) => d < *r,
            (Cmp::AtMost, Some(d)) => d <= *r,
            (Cmp::Greater, Some(d)) => d > *r,
            (Cmp::AtLeast, Some(d)) => d >= *r,
            (Cmp::Less | Cmp::AtMost, None) => false,
            (Cmp::Greater | Cmp::AtLeast, None) => true,
        };
        let cx = self.grid.complex().clone();
        let mut knots: Vec<Vec<T>> = vec![];
        for e in 0..cx.edges().len() {
            let ks = self.grid.knots(e);
            let mut extra: Vec<T> = ks.to_vec();
            for c in 0..ks.len() - 1 {
                if let Some(da) = &self.knot[e][c] {
                    extra.push(ks[c].clone() + r.clone() - da.clone());
                }
                if let Some(db) = &self.knot[e][c + 1] {
                    extra.push(ks[c + 1].clone() - r.clone() + db.clone());
                }
            }
            knots.push(extra);
        }
        let inside = |e: usize, t: &T| self.grid.value_on_edge(e, t).0;
        CellMap::build(cx.clone(), knots, |loc| match loc {
            Loc::Vertex(v) => self.grid.vertex_value(v).0 && test(self.at(&Point::Vertex(v))),
            Loc::Knot(e, t) => inside(e, t) && test(self.at_offset(e, t)),
            Loc::Cell(e, lo, hi) => {
                let m = midpoint(lo, hi);
                inside(e, &m) && test(self.at_offset(e, &m))
            }
        })
        .normalize()
    }
}

/// `{x ∈ D : dist_D(x, C) ◇ r}`.
pub fn distance_level<T: Scalar>(domain: &Region<T>, sources: &Region<T>, r: &T, cmp: Cmp) -> Result<Region<T>> {
    Ok(DistanceField::new(domain, sources)?.level_set(r, cmp))
}

/// The closed `r`-neighbourhood of `set` inside `domain`.
pub fn enlarge<T: Scalar>(domain: &Region<T>, set: &Region<T>, r: &T) -> Result<Region<T>> {
    distance_level(domain, &set.closure(), r, Cmp::AtMost)
}

/// Closed ball of radius `r` around `p` inside `domain`.
pub fn closed_ball<T: Scalar>(domain: &Region<T>, p: &Point<T>, r: &T) -> Result<Region<T>> {
    let c = Region::singleton(domain.complex().clone(), p);
    distance_level(domain, &c, r, Cmp::AtMost)
}

/// Open ball of radius `r` around `p` inside `domain`.
pub fn open_ball<T: Scalar>(domain: &Region<T>, p: &Point<T>, r: &T) -> Result<Region<T>> {
    let c = Region::singleton(domain.complex().clone(), p);
    distance_level(domain, &c, r, Cmp::Less)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::OneComplex;
    use crate::Rational;
    use std::sync::Arc;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn erosion_of_open_interval() {
        let cx = Arc::new(OneComplex::<Rational>::unit_interval());
        let full = Region::full(cx.clone());
        let ends = Region::singleton(cx.clone(), &Point::Vertex(0)).union(&Region::singleton(cx.clone(), &Point::Vertex(1))).unwrap();
        let far = distance_level(&full, &ends, &r(1, 4), Cmp::Greater).unwrap();
        assert_eq!(far.render(), "e(1/4,3/4)");
        let near = distance_level(&full, &ends, &r(1, 4), Cmp::AtMost).unwrap();
        assert_eq!(near.render(), "e[0,1/4] ∪ e[3/4,1]");
    }

    #[test]
    fn triangle_goes_around() {
        let cx = Arc::new(OneComplex::<Rational>::triangle());
        let full = Region::full(cx.clone());
        let df = DistanceField::new(&full, &Region::singleton(cx.clone(), &Point::Interior(0, r(1, 2)))).unwrap();
        // the far side of the triangle is 3/2 away
        assert_eq!(df.at(&Point::Interior(1, r(1, 2))), Some(r(1, 1)));
        assert_eq!(df.at(&Point::Interior(2, r(1, 2))), Some(r(1, 1)));
        assert_eq!(df.at(&Point::Vertex(2)), Some(r(3, 2)));
        let ball = closed_ball(&full, &Point::Vertex(0), &r(1, 4)).unwrap();
        assert_eq!(ball.render(), "ab[0,1/4] ∪ ca[3/4,1]");
    }

    #[test]
    fn domain_blocks_paths() {
        let cx = Arc::new(OneComplex::<Rational>::unit_interval());
        let dom = Region::build(cx.clone(), vec![vec![r(1, 4), r(3, 4)]], |loc| match loc {
            Loc::Cell(_, lo, _) => *lo != r(1, 4),
            Loc::Knot(..) | Loc::Vertex(_) => true,
        });
        let df = DistanceField::new(&dom, &Region::singleton(cx, &Point::Vertex(0))).unwrap();
        assert_eq!(df.at(&Point::Interior(0, r(1, 4))), Some(r(1, 4)));
        assert_eq!(df.at(&Point::Interior(0, r(3, 4))), None);
        assert_eq!(df.at(&Point::Interior(0, r(1, 2))), None);
    }
}
