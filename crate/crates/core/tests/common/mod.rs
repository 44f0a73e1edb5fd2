#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use cuntz_core::complex::{OneComplex, Point};
use cuntz_core::extnat::{ExtNat, Fin, Inf};
use cuntz_core::field::{FieldElement, ModelField};
use cuntz_core::step::{LscMode, StepFn};
use cuntz_core::Rational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit() -> Arc<OneComplex<Rational>> {
    Arc::new(OneComplex::unit_interval())
}

pub fn triangle() -> Arc<OneComplex<Rational>> {
    Arc::new(OneComplex::triangle())
}

pub fn trivial(cx: &Arc<OneComplex<Rational>>) -> Arc<ModelField<Rational>> {
    Arc::new(ModelField::trivial(cx.clone()))
}

pub fn drop_field(pos: Rational) -> Arc<ModelField<Rational>> {
    Arc::new(ModelField::drop_at(unit(), 0, pos, vec![1, 1]).unwrap())
}

fn value(rng: &mut ChaCha8Rng, vmax: u64, inf: f64) -> ExtNat {
    if rng.gen_bool(inf) {
        Inf
    } else {
        Fin(rng.gen_range(0..=vmax))
    }
}

/// A random lsc step function with breakpoints on the grid `1/den` (scaled
/// by edge length), values up to `vmax` and infinite cells with probability `inf`.
pub fn stepfn(rng: &mut ChaCha8Rng, cx: &Arc<OneComplex<Rational>>, den: i64, vmax: u64, inf: f64) -> StepFn<Rational> {
    let mut pieces = vec![];
    let mut points = vec![];
    let mut ends: BTreeMap<usize, ExtNat> = BTreeMap::new();
    for (e, edge) in cx.edges().iter().enumerate() {
        let mut ks: Vec<i64> = (1..den).filter(|_| rng.gen_bool(0.3)).collect();
        ks.insert(0, 0);
        ks.push(den);
        let len = edge.length;
        let mut cells = vec![];
        for w in ks.windows(2) {
            let v = value(rng, vmax, inf);
            pieces.push((e, len * r(w[0], den), len * r(w[1], den), v));
            cells.push(v);
        }
        for (i, k) in ks[1..ks.len() - 1].iter().enumerate() {
            let lim = cells[i].min(cells[i + 1]);
            if rng.gen_bool(0.3) {
                let v = match lim {
                    Fin(n) => Fin(rng.gen_range(0..=n)),
                    Inf => value(rng, vmax, 0.5),
                };
                points.push((Point::Interior(e, len * r(*k, den)), v));
            }
        }
        for (v, c) in [(edge.from, cells[0]), (edge.to, *cells.last().unwrap())] {
            let m = ends.entry(v).or_insert(c);
            *m = (*m).min(c);
        }
    }
    for (v, lim) in ends {
        if rng.gen_bool(0.3) {
            let val = match lim {
                Fin(n) => Fin(rng.gen_range(0..=n)),
                Inf => Fin(rng.gen_range(0..=vmax)),
            };
            points.push((Point::Vertex(v), val));
        }
    }
    StepFn::make(cx.clone(), None, &pieces, &points, LscMode::Strict).expect("valid by construction")
}

/// A random element of a field: a random profile and random admissible tuples.
pub fn element(rng: &mut ChaCha8Rng, field: &Arc<ModelField<Rational>>, den: i64, vmax: u64, inf: f64) -> FieldElement<Rational> {
    let f = stepfn(rng, field.base(), den, vmax, inf);
    for _ in 0..20 {
        let tuples = field
            .exceptional()
            .iter()
            .enumerate()
            .map(|(i, x)| (i, (0..x.arity()).map(|_| value(rng, vmax, inf / 2.0)).collect()))
            .collect();
        if let Ok(x) = FieldElement::new(field.clone(), f.clone(), tuples) {
            return x;
        }
    }
    FieldElement::lift(field.clone(), f).unwrap()
}

fn at(f: &StepFn<Rational>, e: usize, t: Rational) -> ExtNat {
    let p = f.complex().point(e, t).unwrap();
    f.eval(&p).expect("full domain")
}

/// `f ≪ g` decided on a grid fine enough to contain every breakpoint of both
/// (multiples of `length/den` on each edge): `f` must be finite and, at
/// every grid point, the largest value of `f` on the point and its two
/// adjacent half-cells must not exceed `g` there.
pub fn grid_waybelow(f: &StepFn<Rational>, g: &StepFn<Rational>, den: i64) -> bool {
    let cx = f.complex();
    let mut vertex_max: BTreeMap<usize, ExtNat> = BTreeMap::new();
    for (e, edge) in cx.edges().iter().enumerate() {
        let len = edge.length;
        let mid = |j: i64| len * r(2 * j + 1, 2 * den);
        for j in 0..den {
            let (fv, gv) = (at(f, e, mid(j)), at(g, e, mid(j)));
            if fv == Inf || fv > gv {
                return false;
            }
        }
        for j in 1..den {
            let t = len * r(j, den);
            let near = at(f, e, t).max(at(f, e, mid(j - 1))).max(at(f, e, mid(j)));
            if near == Inf || near > at(g, e, t) {
                return false;
            }
        }
        for (v, m) in [(edge.from, mid(0)), (edge.to, mid(den - 1))] {
            let x = vertex_max.entry(v).or_insert(Fin(0));
            *x = (*x).max(at(f, e, m));
        }
    }
    vertex_max.into_iter().all(|(v, m)| {
        let p = Point::Vertex(v);
        let near = m.max(f.eval(&p).unwrap());
        near != Inf && near <= g.eval(&p).unwrap()
    })
}

/// `f` bounded and `f ≤ shrink_k(g)` for some `k ≤ kmax`. The shrinks
/// increase with `k`, so `k` runs through powers of two and then `kmax`.
pub fn chain_waybelow(f: &StepFn<Rational>, g: &StepFn<Rational>, kmax: u64) -> bool {
    if !f.is_bounded() {
        return false;
    }
    let mut k = 1;
    loop {
        if f.leq(&g.shrink(k)).unwrap() {
            return true;
        }
        if k >= kmax {
            return false;
        }
        k = (2 * k).min(kmax);
    }
}

/// Twice the inverse of the finest breakpoint gap of `f` and `g` together.
pub fn kmax(f: &StepFn<Rational>, g: &StepFn<Rational>) -> u64 {
    let inv = Rational::from_integer(1) / f.joint_gap(g);
    2 * inv.ceil().to_integer() as u64
}
