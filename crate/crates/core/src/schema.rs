//! JSON documents for complexes, fields, elements, patches, sections and
//! isomorphism candidates. Errors carry JSON pointer paths.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::complex::{OneComplex, Point};
use crate::error::{CuError, Result};
use crate::extnat::ExtNat;
use crate::field::{FieldElement, ModelField};
use crate::patch::{region_from_pieces, ClosedPatch, OpenSet};
use crate::scalar::Scalar;
use crate::sections::{pcs_make, PCSection};
use crate::step::{LscMode, StepFn};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: String,
}

/// A space given inline or by a built-in name: `interval`, `triangle`,
/// `circle<n>` (edges of length `1/n`) or `star<n>`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Named(String),
    Doc(SpaceDoc),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDoc {
    pub space: SpaceRef,
    #[serde(default)]
    pub exceptional: Vec<ExceptionalDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExceptionalDoc {
    pub edge: String,
    pub pos: String,
    pub arity: usize,
    pub weights: Vec<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDoc {
    #[serde(default)]
    pub domain: Option<PatchDoc>,
    #[serde(default)]
    pub pieces: Vec<PieceDoc>,
    #[serde(default)]
    pub points: Vec<PointValueDoc>,
    #[serde(default)]
    pub exceptional: Vec<TupleDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDoc {
    pub edge: String,
    pub from: String,
    pub to: String,
    pub value: ExtNat,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointValueDoc {
    #[serde(flatten)]
    pub at: PointDoc,
    pub value: ExtNat,
}

/// Either `{vertex}` or `{edge, pos}`.
#[derive(Debug, Deserialize)]
pub struct PointDoc {
    #[serde(default)]
    pub vertex: Option<String>,
    #[serde(default)]
    pub edge: Option<String>,
    #[serde(default)]
    pub pos: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleDoc {
    pub edge: String,
    pub pos: String,
    pub tuple: Vec<ExtNat>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalDoc {
    pub edge: String,
    pub from: String,
    pub to: String,
}

/// A closed patch: closed intervals plus isolated points, or the whole space.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchDoc {
    #[serde(default)]
    pub whole: bool,
    #[serde(default)]
    pub pieces: Vec<IntervalDoc>,
    #[serde(default)]
    pub points: Vec<PointDoc>,
}

/// An open set: open intervals plus vertices with their open stars.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenDoc {
    #[serde(default)]
    pub whole: bool,
    #[serde(default)]
    pub pieces: Vec<IntervalDoc>,
    #[serde(default)]
    pub vertices: Vec<String>,
}

/// Cover sets and the elements `s_i` (keys `"i"`) and `s_ij` (keys `"i,j"`).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionDoc {
    pub cover: Vec<OpenDoc>,
    pub values: BTreeMap<String, ElementDoc>,
}

/// An element given inline or as a path to a file.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ElementRef {
    Path(String),
    Inline(ElementDoc),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoDoc {
    pub pairs: Vec<(ElementRef, ElementRef)>,
    #[serde(default)]
    pub patches: Vec<PatchDoc>,
}

/// Deserializes with the failing location as a JSON pointer.
pub fn from_json<D: DeserializeOwned>(text: &str) -> Result<D> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let mut ptr = String::new();
        for seg in e.path().iter() {
            match seg {
                serde_path_to_error::Segment::Seq { index } => ptr.push_str(&format!("/{index}")),
                serde_path_to_error::Segment::Map { key } => ptr.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
                _ => {}
            }
        }
        let ptr = if ptr.is_empty() { "/".to_string() } else { ptr };
        CuError::Parse(format!("{ptr}: {}", e.inner()))
    })
}

fn at(ptr: &str, e: CuError) -> CuError {
    match e {
        CuError::Parse(m) if m.starts_with('/') => CuError::Parse(m),
        e => CuError::Parse(format!("{ptr}: {e}")),
    }
}

fn num<T: Scalar>(ptr: &str, s: &str) -> Result<T> {
    T::parse_exact(s).ok_or_else(|| CuError::Parse(format!("{ptr}: expected a rational \"p/q\", found {s:?}")))
}

pub fn named_space<T: Scalar>(name: &str) -> Result<OneComplex<T>> {
    let count = |prefix: &str| name.strip_prefix(prefix).and_then(|n| n.parse::<usize>().ok()).filter(|n| *n >= 1);
    match name {
        "interval" => Ok(OneComplex::unit_interval()),
        "triangle" => Ok(OneComplex::triangle()),
        _ => {
            if let Some(n) = count("circle") {
                Ok(OneComplex::circle(n, T::recip_int(n as u64)))
            } else if let Some(n) = count("star") {
                Ok(OneComplex::star(n))
            } else {
                Err(CuError::Parse(format!("unknown space {name:?}")))
            }
        }
    }
}

pub fn build_space<T: Scalar>(doc: &SpaceDoc) -> Result<OneComplex<T>> {
    let mut edges = vec![];
    for (i, e) in doc.edges.iter().enumerate() {
        let len = num(&format!("/edges/{i}/length"), &e.length)?;
        edges.push((e.id.clone(), e.from.clone(), e.to.clone(), len));
    }
    OneComplex::new(&doc.vertices, edges).map_err(|e| at("/edges", e))
}

pub fn parse_space<T: Scalar>(text: &str) -> Result<Arc<OneComplex<T>>> {
    Ok(Arc::new(build_space(&from_json::<SpaceDoc>(text)?)?))
}

pub fn build_field<T: Scalar>(doc: &FieldDoc) -> Result<ModelField<T>> {
    let cx = Arc::new(match &doc.space {
        SpaceRef::Named(n) => named_space(n).map_err(|e| at("/space", e))?,
        SpaceRef::Doc(d) => build_space(d).map_err(|e| match e {
            CuError::Parse(m) if m.starts_with('/') => CuError::Parse(format!("/space{m}")),
            e => at("/space", e),
        })?,
    });
    let mut exc = vec![];
    for (i, x) in doc.exceptional.iter().enumerate() {
        let ptr = format!("/exceptional/{i}");
        let e = cx.edge_index(&x.edge).map_err(|e| at(&format!("{ptr}/edge"), e))?;
        if x.weights.len() != x.arity {
            return Err(CuError::Parse(format!("{ptr}/weights: {} weights for arity {}", x.weights.len(), x.arity)));
        }
        exc.push((e, num(&format!("{ptr}/pos"), &x.pos)?, x.arity, x.weights.clone()));
    }
    ModelField::new(cx, exc).map_err(|e| at("/exceptional", e))
}

pub fn parse_field<T: Scalar>(text: &str) -> Result<Arc<ModelField<T>>> {
    Ok(Arc::new(build_field(&from_json::<FieldDoc>(text)?)?))
}

fn build_point<T: Scalar>(cx: &OneComplex<T>, ptr: &str, p: &PointDoc) -> Result<Point<T>> {
    match (&p.vertex, &p.edge, &p.pos) {
        (Some(v), None, None) => Ok(Point::Vertex(cx.vertex_index(v).map_err(|e| at(&format!("{ptr}/vertex"), e))?)),
        (None, Some(e), Some(t)) => {
            let t = num(&format!("{ptr}/pos"), t)?;
            cx.point_named(e, t).map_err(|e| at(ptr, e))
        }
        _ => Err(CuError::Parse(format!("{ptr}: give either \"vertex\" or both \"edge\" and \"pos\""))),
    }
}

fn build_intervals<T: Scalar>(cx: &OneComplex<T>, ptr: &str, pieces: &[IntervalDoc]) -> Result<Vec<(usize, T, T)>> {
    pieces
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let ptr = format!("{ptr}/{i}");
            let e = cx.edge_index(&p.edge).map_err(|e| at(&format!("{ptr}/edge"), e))?;
            Ok((e, num(&format!("{ptr}/from"), &p.from)?, num(&format!("{ptr}/to"), &p.to)?))
        })
        .collect()
}

pub fn build_patch<T: Scalar>(cx: &Arc<OneComplex<T>>, ptr: &str, doc: &PatchDoc) -> Result<ClosedPatch<T>> {
    if doc.whole {
        return Ok(ClosedPatch::whole(cx.clone()));
    }
    let pieces = build_intervals(cx, &format!("{ptr}/pieces"), &doc.pieces)?;
    let points = doc
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| build_point(cx, &format!("{ptr}/points/{i}"), p))
        .collect::<Result<Vec<_>>>()?;
    ClosedPatch::new(region_from_pieces(cx, &pieces, &points, true).map_err(|e| at(ptr, e))?).map_err(|e| at(ptr, e))
}

pub fn parse_patch<T: Scalar>(cx: &Arc<OneComplex<T>>, text: &str) -> Result<ClosedPatch<T>> {
    build_patch(cx, "", &from_json::<PatchDoc>(text)?)
}

pub fn build_open<T: Scalar>(cx: &Arc<OneComplex<T>>, ptr: &str, doc: &OpenDoc) -> Result<OpenSet<T>> {
    if doc.whole {
        return Ok(OpenSet::whole(cx.clone()));
    }
    let pieces = build_intervals(cx, &format!("{ptr}/pieces"), &doc.pieces)?;
    let vertices = doc
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| cx.vertex_index(v).map_err(|e| at(&format!("{ptr}/vertices/{i}"), e)))
        .collect::<Result<Vec<_>>>()?;
    OpenSet::from_pieces(cx, &pieces, &vertices).map_err(|e| at(ptr, e))
}

pub fn parse_open<T: Scalar>(cx: &Arc<OneComplex<T>>, text: &str) -> Result<OpenSet<T>> {
    build_open(cx, "", &from_json::<OpenDoc>(text)?)
}

/// An lsc function given by the pieces and points of an element document.
pub fn build_stepfn<T: Scalar>(cx: &Arc<OneComplex<T>>, ptr: &str, doc: &ElementDoc) -> Result<StepFn<T>> {
    let domain = match &doc.domain {
        Some(d) => Some(build_patch(cx, &format!("{ptr}/domain"), d)?),
        None => None,
    };
    let mut pieces = vec![];
    for (i, p) in doc.pieces.iter().enumerate() {
        let q = format!("{ptr}/pieces/{i}");
        let e = cx.edge_index(&p.edge).map_err(|e| at(&format!("{q}/edge"), e))?;
        pieces.push((e, num(&format!("{q}/from"), &p.from)?, num(&format!("{q}/to"), &p.to)?, p.value));
    }
    let points = doc
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| Ok((build_point(cx, &format!("{ptr}/points/{i}"), &p.at)?, p.value)))
        .collect::<Result<Vec<_>>>()?;
    StepFn::make(cx.clone(), domain.as_ref().map(|d| d.region()), &pieces, &points, LscMode::Strict).map_err(|e| at(ptr, e))
}

pub fn build_element<T: Scalar>(field: &Arc<ModelField<T>>, ptr: &str, doc: &ElementDoc) -> Result<FieldElement<T>> {
    let cx = field.base();
    let profile = build_stepfn(cx, ptr, doc)?;
    let mut tuples = BTreeMap::new();
    for (i, t) in doc.exceptional.iter().enumerate() {
        let q = format!("{ptr}/exceptional/{i}");
        let p = cx.point_named(&t.edge, num(&format!("{q}/pos"), &t.pos)?).map_err(|e| at(&q, e))?;
        let Some(idx) = field.exceptional_at(&p) else {
            return Err(CuError::Parse(format!("{q}: {} is not an exceptional point of the field", cx.render(&p))));
        };
        tuples.insert(idx, t.tuple.clone());
    }
    FieldElement::new(field.clone(), profile, tuples).map_err(|e| at(ptr, e))
}

pub fn parse_element<T: Scalar>(field: &Arc<ModelField<T>>, text: &str) -> Result<FieldElement<T>> {
    build_element(field, "", &from_json::<ElementDoc>(text)?)
}

pub fn parse_stepfn<T: Scalar>(cx: &Arc<OneComplex<T>>, text: &str) -> Result<StepFn<T>> {
    build_stepfn(cx, "", &from_json::<ElementDoc>(text)?)
}

pub fn build_section<T: Scalar>(field: &Arc<ModelField<T>>, doc: &SectionDoc) -> Result<PCSection<T>> {
    let cx = field.base();
    let cover = doc
        .cover
        .iter()
        .enumerate()
        .map(|(i, u)| build_open(cx, &format!("/cover/{i}"), u))
        .collect::<Result<Vec<_>>>()?;
    let mut singles: Vec<Option<FieldElement<T>>> = vec![None; cover.len()];
    let mut pairs = BTreeMap::new();
    for (key, v) in &doc.values {
        let ptr = format!("/values/{key}");
        let idx: Vec<usize> = key
            .split(',')
            .map(|s| s.trim().parse::<usize>().ok().filter(|i| *i < cover.len()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| CuError::Parse(format!("{ptr}: keys are \"i\" or \"i,j\" with indices into the cover")))?;
        let el = build_element(field, &ptr, v)?;
        match idx[..] {
            [i] => singles[i] = Some(el),
            [i, j] if i < j => {
                pairs.insert((i, j), el);
            }
            _ => return Err(CuError::Parse(format!("{ptr}: keys are \"i\" or \"i,j\" with i < j"))),
        }
    }
    let singles = singles
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| CuError::Parse(format!("/values: no element for cover set {i}"))))
        .collect::<Result<Vec<_>>>()?;
    pcs_make(field, cover, singles, pairs)
}

/// A section document, or an element document standing for its induced
/// section over a one-set cover.
pub fn parse_section<T: Scalar>(field: &Arc<ModelField<T>>, text: &str) -> Result<PCSection<T>> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| CuError::Parse(format!("/: {e}")))?;
    if v.get("cover").is_some() {
        build_section(field, &from_json::<SectionDoc>(text)?)
    } else {
        let el = parse_element(field, text)?;
        pcs_make(field, vec![OpenSet::whole(field.base().clone())], vec![el], BTreeMap::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extnat::Fin;
    use crate::Rational;

    #[test]
    fn space_and_field() {
        let cx: Arc<OneComplex<Rational>> =
            parse_space(r#"{"vertices":["a","b"],"edges":[{"id":"e","from":"a","to":"b","length":"1/2"}]}"#).unwrap();
        assert_eq!(cx.edge(0).length, Rational::ratio(1, 2));
        let f: Arc<ModelField<Rational>> =
            parse_field(r#"{"space":"interval","exceptional":[{"edge":"e","pos":"1/3","arity":2,"weights":[1,1]}]}"#).unwrap();
        assert_eq!(f.exceptional().len(), 1);
    }

    #[test]
    fn pointer_paths() {
        let e = parse_space::<Rational>(r#"{"vertices":["a","b"],"edges":[{"id":"e","from":"a","to":"b","length":3}]}"#).unwrap_err();
        assert!(e.to_string().starts_with("/edges/0/length"), "{e}");
        let e = parse_space::<Rational>(r#"{"vertices":["a","b"],"edges":[{"id":"e","from":"a","to":"b","length":"x"}]}"#).unwrap_err();
        assert!(e.to_string().starts_with("/edges/0/length"), "{e}");
        let f: Arc<ModelField<Rational>> = parse_field(r#"{"space":"interval"}"#).unwrap();
        let e = parse_element(&f, r#"{"pieces":[{"edge":"q","from":"0","to":"1","value":1}]}"#).unwrap_err();
        assert!(e.to_string().starts_with("/pieces/0/edge"), "{e}");
        let e = parse_element(&f, r#"{"pieces":[{"edge":"e","from":"0","to":"1","value":-1}]}"#).unwrap_err();
        assert!(e.to_string().starts_with("/pieces/0/value"), "{e}");
    }

    #[test]
    fn elements_and_sections() {
        let f: Arc<ModelField<Rational>> =
            parse_field(r#"{"space":"interval","exceptional":[{"edge":"e","pos":"1/3","arity":2,"weights":[1,1]}]}"#).unwrap();
        let x = parse_element(
            &f,
            r#"{"pieces":[{"edge":"e","from":"0","to":"1","value":2}],"points":[{"vertex":"v0","value":2},{"vertex":"v1","value":2}],
               "exceptional":[{"edge":"e","pos":"1/3","tuple":[1,1]}]}"#,
        )
        .unwrap();
        assert_eq!(x.tuple(0), Some(&vec![Fin(1), Fin(1)]));
        let t: Arc<ModelField<Rational>> = parse_field(r#"{"space":"interval"}"#).unwrap();
        let s = parse_section(
            &t,
            r#"{"cover":[{"pieces":[{"edge":"e","from":"0","to":"3/5"}],"vertices":["v0"]},
                         {"pieces":[{"edge":"e","from":"2/5","to":"1"}],"vertices":["v1"]}],
                "values":{"0":{"pieces":[{"edge":"e","from":"0","to":"1","value":1}]},
                          "1":{"pieces":[{"edge":"e","from":"0","to":"1","value":1}]},
                          "0,1":{"pieces":[{"edge":"e","from":"0","to":"1","value":2}]}}}"#,
        )
        .unwrap();
        assert_eq!(s.cover().len(), 2);
        let e = parse_section(&t, r#"{"cover":[{"whole":true}],"values":{"3":{"pieces":[]}}}"#).unwrap_err();
        assert!(e.to_string().starts_with("/values/3"), "{e}");
    }
}
