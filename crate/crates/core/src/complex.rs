//! Finite metric graphs with rational edge lengths.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{CuError, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge<T> {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub length: T,
}

/// A one-dimensional complex: vertices joined by edges of positive length.
/// Positions are `(edge, offset)` with `0 <= offset <= length`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneComplex<T> {
    vertices: Vec<String>,
    edges: Vec<Edge<T>>,
}

/// A normalized location: offsets `0` and `length` are folded into vertices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point<T> {
    Vertex(usize),
    Interior(usize, T),
}

/// Which end of an edge meets a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    Start,
    Finish,
}

impl<T: Scalar> OneComplex<T> {
    /// Builds a complex from vertex ids and `(edge id, from, to, length)` records.
    pub fn new<S: AsRef<str>>(vertices: &[S], edges: Vec<(String, String, String, T)>) -> Result<Self> {
        let vertices: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !seen.insert(v.clone()) {
                return Err(CuError::DuplicateName(v.clone()));
            }
        }
        let lookup = |edge: &str, name: &str| {
            vertices.iter().position(|v| v == name).ok_or_else(|| CuError::DanglingEdge {
                edge: edge.to_string(),
                vertex: name.to_string(),
            })
        };
        let mut out = Vec::with_capacity(edges.len());
        for (id, from, to, length) in edges {
            if !seen.insert(id.clone()) {
                return Err(CuError::DuplicateName(id));
            }
            if length <= T::zero() {
                return Err(CuError::NonPositiveLength { edge: id });
            }
            let from = lookup(&id, &from)?;
            let to = lookup(&id, &to)?;
            out.push(Edge { id, from, to, length });
        }
        Ok(OneComplex { vertices, edges: out })
    }

    /// `[0, len]` with vertices `v0`, `v1` and edge `e`.
    pub fn interval(len: T) -> Self {
        Self::new(&["v0", "v1"], vec![("e".into(), "v0".into(), "v1".into(), len)]).expect("valid interval")
    }

    pub fn unit_interval() -> Self {
        Self::interval(T::one())
    }

    /// Three vertices `a`, `b`, `c` joined in a cycle by unit edges `ab`, `bc`, `ca`.
    pub fn triangle() -> Self {
        let e = |id: &str, f: &str, t: &str| (id.to_string(), f.to_string(), t.to_string(), T::one());
        Self::new(&["a", "b", "c"], vec![e("ab", "a", "b"), e("bc", "b", "c"), e("ca", "c", "a")])
            .expect("valid triangle")
    }

    /// A cycle of `n` edges `c0..c{n-1}`, each of length `len`.
    pub fn circle(n: usize, len: T) -> Self {
        let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let edges = (0..n)
            .map(|i| (format!("c{i}"), names[i].clone(), names[(i + 1) % n].clone(), len.clone()))
            .collect();
        Self::new(&names, edges).expect("valid circle")
    }

    /// A star with centre `o` and `n` unit legs `l0..l{n-1}` ending at `t0..t{n-1}`.
    pub fn star(n: usize) -> Self {
        let mut names = vec!["o".to_string()];
        names.extend((0..n).map(|i| format!("t{i}")));
        let edges = (0..n)
            .map(|i| (format!("l{i}"), "o".to_string(), format!("t{i}"), T::one()))
            .collect();
        Self::new(&names, edges).expect("valid star")
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge<T> {
        &self.edges[e]
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| CuError::UnknownVertex(name.to_string()))
    }

    pub fn edge_index(&self, name: &str) -> Result<usize> {
        self.edges
            .iter()
            .position(|e| e.id == name)
            .ok_or_else(|| CuError::UnknownEdge(name.to_string()))
    }

    /// Normalized point at `offset` along edge `e`.
    pub fn point(&self, e: usize, offset: T) -> Result<Point<T>> {
        let edge = &self.edges[e];
        if offset < T::zero() || offset > edge.length {
            return Err(CuError::BadPosition { edge: edge.id.clone(), pos: offset.to_string() });
        }
        Ok(if offset.is_zero() {
            Point::Vertex(edge.from)
        } else if offset == edge.length {
            Point::Vertex(edge.to)
        } else {
            Point::Interior(e, offset)
        })
    }

    pub fn point_named(&self, edge: &str, offset: T) -> Result<Point<T>> {
        self.point(self.edge_index(edge)?, offset)
    }

    /// Edge ends meeting `v`; a loop contributes both of its ends.
    pub fn incident(&self, v: usize) -> Vec<(usize, End)> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.from == v {
                out.push((i, End::Start));
            }
            if e.to == v {
                out.push((i, End::Finish));
            }
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident(v).len()
    }

    /// Number of connected components of the realization.
    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
            parent[a] = b;
        }
        (0..self.vertices.len()).filter(|&v| find(&mut parent, v) == v).count()
    }

    pub fn is_connected(&self) -> bool {
        self.components() <= 1
    }

    pub fn render(&self, p: &Point<T>) -> String {
        match p {
            Point::Vertex(v) => self.vertices[*v].clone(),
            Point::Interior(e, t) => format!("{}:{}", self.edges[*e].id, t),
        }
    }

    /// Parses `edge:p/q`.
    pub fn parse_point(&self, s: &str) -> Result<Point<T>> {
        let (edge, pos) = s
            .split_once(':')
            .ok_or_else(|| CuError::Parse(format!("expected <edge>:<p/q>, found {s:?}")))?;
        let pos = T::parse_exact(pos).ok_or_else(|| CuError::Parse(format!("bad rational {pos:?}")))?;
        self.point_named(edge, pos)
    }

    /// Offset of `p` along edge `e`, if `p` lies on that edge.
    pub fn offsets_on(&self, e: usize, p: &Point<T>) -> Vec<T> {
        let edge = &self.edges[e];
        match p {
            Point::Interior(f, t) if *f == e => vec![t.clone()],
            Point::Interior(..) => vec![],
            Point::Vertex(v) => {
                let mut out = vec![];
                if edge.from == *v {
                    out.push(T::zero());
                }
                if edge.to == *v {
                    out.push(edge.length.clone());
                }
                out
            }
        }
    }
}

impl<T: Scalar> fmt::Display for OneComplex<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "complex with {} vertices and {} edges", self.vertices.len(), self.edges.len())
    }
}

/// `true` when both handles denote the same complex.
pub fn same_complex<T: Scalar>(a: &Arc<OneComplex<T>>, b: &Arc<OneComplex<T>>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn builds_examples() {
        let i = OneComplex::<Rational>::unit_interval();
        assert_eq!(i.edges().len(), 1);
        assert!(i.is_connected());
        let t = OneComplex::<Rational>::triangle();
        assert_eq!(t.degree(0), 2);
        assert_eq!(t.edges().len(), t.vertices().len());
        let p = OneComplex::<Rational>::new(&["v"], vec![]).unwrap();
        assert_eq!(p.components(), 1);
    }

    #[test]
    fn rejects_bad_input() {
        let r = OneComplex::<Rational>::new(&["a"], vec![("e".into(), "a".into(), "b".into(), Rational::from_int(1))]);
        assert!(matches!(r, Err(CuError::DanglingEdge { .. })));
        let r = OneComplex::<Rational>::new(&["a", "b"], vec![("e".into(), "a".into(), "b".into(), Rational::from_int(0))]);
        assert!(matches!(r, Err(CuError::NonPositiveLength { .. })));
    }

    #[test]
    fn normalizes_points() {
        let i = OneComplex::<Rational>::unit_interval();
        assert_eq!(i.point(0, Rational::from_int(0)).unwrap(), Point::Vertex(0));
        assert_eq!(i.point(0, Rational::from_int(1)).unwrap(), Point::Vertex(1));
        assert!(i.point(0, Rational::from_int(2)).is_err());
        assert_eq!(i.parse_point("e:1/2").unwrap(), Point::Interior(0, Rational::ratio(1, 2)));
        assert_eq!(i.render(&Point::Interior(0, Rational::ratio(1, 2))), "e:1/2");
    }
}
