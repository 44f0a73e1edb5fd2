//! The Cu-semigroup contract, the base instance `N̄`, and a law checker.

use std::collections::HashMap;
use std::fmt::{self, Debug};

use crate::error::{CuError, Result};
use crate::extnat::{ExtNat, Fin, Inf};

/// Environment variable capping enumerations.
pub const MAX_ELEMENTS_VAR: &str = "CU_SECTIONS_MAX_ELEMENTS";
pub const DEFAULT_MAX_ELEMENTS: usize = 100_000;

/// Element cap from `CU_SECTIONS_MAX_ELEMENTS`, defaulting to 100000.
pub fn element_cap() -> usize {
    std::env::var(MAX_ELEMENTS_VAR)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_ELEMENTS)
}

/// An ordered semigroup with compact containment, rapid approximating
/// chains and a bounded enumeration of sample elements.
pub trait CuSemigroup {
    type Elem: Clone + Debug;

    fn describe(&self) -> String;
    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    fn waybelow(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    /// Equality of classes.
    fn same(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    /// The `k`-th entry of a rapidly increasing chain with supremum `x`.
    fn approximant(&self, x: &Self::Elem, k: u64) -> Self::Elem;
    /// A `k` such that `y ≪ x` iff `y ≤ approximant(x, k)`.
    fn horizon(&self, x: &Self::Elem, y: &Self::Elem) -> u64;
    /// Membership in the countable dense subset.
    fn is_basis(&self, x: &Self::Elem) -> bool;
    /// Sample elements with values up to `bound` and breakpoints on the
    /// grid of spacing `1/resolution`. Fails when more than `cap` are produced.
    fn enumerate(&self, bound: u64, resolution: u64, cap: usize) -> Result<Vec<Self::Elem>>;
    fn render(&self, x: &Self::Elem) -> String;
}

/// `N̄` itself.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExtNatHandle;

impl CuSemigroup for ExtNatHandle {
    type Elem = ExtNat;

    fn describe(&self) -> String {
        "N̄".to_string()
    }

    fn zero(&self) -> ExtNat {
        ExtNat::ZERO
    }

    fn add(&self, a: &ExtNat, b: &ExtNat) -> ExtNat {
        *a + *b
    }

    fn leq(&self, a: &ExtNat, b: &ExtNat) -> bool {
        a <= b
    }

    fn waybelow(&self, a: &ExtNat, b: &ExtNat) -> bool {
        a.waybelow(*b)
    }

    fn same(&self, a: &ExtNat, b: &ExtNat) -> bool {
        a == b
    }

    fn approximant(&self, x: &ExtNat, k: u64) -> ExtNat {
        x.cap(k)
    }

    fn horizon(&self, x: &ExtNat, y: &ExtNat) -> u64 {
        x.finite().unwrap_or(0).max(y.finite().unwrap_or(0)) + 1
    }

    fn is_basis(&self, x: &ExtNat) -> bool {
        x.is_finite()
    }

    fn enumerate(&self, bound: u64, _resolution: u64, cap: usize) -> Result<Vec<ExtNat>> {
        let out: Vec<ExtNat> = (0..=bound).map(Fin).chain(std::iter::once(Inf)).collect();
        if out.len() > cap {
            return Err(CuError::EnumerationOverflow { cap });
        }
        Ok(out)
    }

    fn render(&self, x: &ExtNat) -> String {
        x.to_string()
    }
}

/// Componentwise product of two semigroups.
#[derive(Clone, Debug)]
pub struct ProductHandle<A, B>(pub A, pub B);

impl<A: CuSemigroup, B: CuSemigroup> CuSemigroup for ProductHandle<A, B> {
    type Elem = (A::Elem, B::Elem);

    fn describe(&self) -> String {
        format!("{} × {}", self.0.describe(), self.1.describe())
    }

    fn zero(&self) -> Self::Elem {
        (self.0.zero(), self.1.zero())
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        (self.0.add(&a.0, &b.0), self.1.add(&a.1, &b.1))
    }

    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.0.leq(&a.0, &b.0) && self.1.leq(&a.1, &b.1)
    }

    fn waybelow(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.0.waybelow(&a.0, &b.0) && self.1.waybelow(&a.1, &b.1)
    }

    fn same(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.0.same(&a.0, &b.0) && self.1.same(&a.1, &b.1)
    }

    fn approximant(&self, x: &Self::Elem, k: u64) -> Self::Elem {
        (self.0.approximant(&x.0, k), self.1.approximant(&x.1, k))
    }

    fn horizon(&self, x: &Self::Elem, y: &Self::Elem) -> u64 {
        self.0.horizon(&x.0, &y.0).max(self.1.horizon(&x.1, &y.1))
    }

    fn is_basis(&self, x: &Self::Elem) -> bool {
        self.0.is_basis(&x.0) && self.1.is_basis(&x.1)
    }

    fn enumerate(&self, bound: u64, resolution: u64, cap: usize) -> Result<Vec<Self::Elem>> {
        let a = self.0.enumerate(bound, resolution, cap)?;
        let b = self.1.enumerate(bound, resolution, cap)?;
        if a.len().saturating_mul(b.len()) > cap {
            return Err(CuError::EnumerationOverflow { cap });
        }
        Ok(a.iter().flat_map(|x| b.iter().map(move |y| (x.clone(), y.clone()))).collect())
    }

    fn render(&self, x: &Self::Elem) -> String {
        format!("({}, {})", self.0.render(&x.0), self.1.render(&x.1))
    }
}

/// Outcome of one law.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawOutcome {
    pub name: &'static str,
    pub checked: usize,
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawReport {
    pub handle: String,
    pub elements: usize,
    pub laws: Vec<LawOutcome>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.laws.iter().all(|l| l.counterexample.is_none())
    }

    pub fn failures(&self) -> Vec<&LawOutcome> {
        self.laws.iter().filter(|l| l.counterexample.is_some()).collect()
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "laws for {} ({} elements)", self.handle, self.elements)?;
        for l in &self.laws {
            match &l.counterexample {
                None => writeln!(f, "  pass  {:<28} {} cases", l.name, l.checked)?,
                Some(c) => writeln!(f, "  FAIL  {:<28} {}", l.name, c)?,
            }
        }
        Ok(())
    }
}

/// Tuning knobs for [`axioms_suite_with`].
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub bound: u64,
    pub resolution: u64,
    pub cap: usize,
    /// Number of sampled triples (and quadruples) per higher-arity law.
    pub sample_budget: usize,
    /// Chain entries checked per element.
    pub chain_depth: u64,
}

impl SuiteConfig {
    pub fn new(bound: u64, resolution: u64) -> Self {
        SuiteConfig { bound, resolution, cap: element_cap(), sample_budget: 20_000, chain_depth: 6 }
    }
}

/// Runs every law at the given bounds.
pub fn axioms_suite<H: CuSemigroup>(h: &H, bound: u64, resolution: u64) -> Result<LawReport> {
    axioms_suite_with(h, &SuiteConfig::new(bound, resolution))
}

/// Deterministic sample of `budget` index tuples from `n^arity`, or all of them if fewer.
pub fn sample_tuples(n: usize, arity: u32, budget: usize) -> Vec<Vec<usize>> {
    let total = (n as u128).pow(arity);
    if total == 0 {
        return vec![];
    }
    let decode = |mut t: u128| -> Vec<usize> {
        (0..arity)
            .map(|_| {
                let i = (t % n as u128) as usize;
                t /= n as u128;
                i
            })
            .collect()
    };
    if total <= budget as u128 {
        return (0..total).map(decode).collect();
    }
    // a stride coprime to n^arity visits distinct tuples
    let mut stride: u128 = 1_000_003;
    while num_integer::gcd(stride, n as u128) != 1 {
        stride += 2;
    }
    (0..budget as u128).map(|t| decode((t * stride) % total)).collect()
}

struct Law {
    name: &'static str,
    checked: usize,
    counterexample: Option<String>,
}

impl Law {
    fn new(name: &'static str) -> Self {
        Law { name, checked: 0, counterexample: None }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(msg());
        }
    }

    fn done(self) -> LawOutcome {
        LawOutcome { name: self.name, checked: self.checked, counterexample: self.counterexample }
    }
}

/// Approximants memoized by element index.
struct Chains<'a, H: CuSemigroup> {
    h: &'a H,
    memo: HashMap<(usize, u64), H::Elem>,
}

impl<'a, H: CuSemigroup> Chains<'a, H> {
    fn get(&mut self, i: usize, x: &H::Elem, k: u64) -> &H::Elem {
        let h = self.h;
        self.memo.entry((i, k)).or_insert_with(|| h.approximant(x, k))
    }
}

pub fn axioms_suite_with<H: CuSemigroup>(h: &H, cfg: &SuiteConfig) -> Result<LawReport> {
    let xs = h.enumerate(cfg.bound, cfg.resolution, cfg.cap)?;
    let n = xs.len();
    let r = |x: &H::Elem| h.render(x);
    let zero = h.zero();
    let mut laws = vec![];

    let mut refl = Law::new("order reflexive");
    let mut zero_least = Law::new("zero is least");
    let mut zero_id = Law::new("zero is additive identity");
    for x in &xs {
        refl.check(h.leq(x, x), || r(x));
        zero_least.check(h.leq(&zero, x), || r(x));
        zero_id.check(h.same(&h.add(x, &zero), x), || r(x));
    }

    let mut antisym = Law::new("order antisymmetric");
    let mut comm = Law::new("addition commutative");
    let mut wb_leq = Law::new("waybelow implies order");
    let mut matches = Law::new("waybelow matches chains");
    let mut interp = Law::new("interpolation");
    let mut chains = Chains { h, memo: HashMap::new() };
    let mut leq = vec![vec![false; n]; n];
    let mut wb = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            leq[i][j] = h.leq(&xs[i], &xs[j]);
            wb[i][j] = h.waybelow(&xs[i], &xs[j]);
        }
    }
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (&xs[i], &xs[j]);
            if leq[i][j] && leq[j][i] {
                antisym.check(h.same(a, b), || format!("{} and {}", r(a), r(b)));
            }
            if i < j {
                comm.check(h.same(&h.add(a, b), &h.add(b, a)), || format!("{} and {}", r(a), r(b)));
            }
            if wb[i][j] {
                wb_leq.check(leq[i][j], || format!("{} ≪ {}", r(a), r(b)));
            }
            // a ≪ b iff a ≤ approx_H(b)
            let k = h.horizon(b, a);
            let below = h.leq(a, chains.get(j, b, k));
            matches.check(below == wb[i][j], || {
                format!("{} vs {} at horizon {}: waybelow {}, chain {}", r(a), r(b), k, wb[i][j], below)
            });
            if wb[i][j] {
                let c = chains.get(j, b, k + 1).clone();
                interp.check(h.waybelow(a, &c) && h.waybelow(&c, b), || {
                    format!("{} ≪ {} via {}", r(a), r(b), r(&c))
                });
            }
        }
    }

    let mut trans = Law::new("order transitive");
    let mut assoc = Law::new("addition associative");
    let mut mono = Law::new("addition monotone");
    let mut wb_trans = Law::new("waybelow transitive");
    let mut absorb = Law::new("waybelow absorbs order");
    let mut sup_add = Law::new("sup additive");
    for t in sample_tuples(n, 3, cfg.sample_budget) {
        let (i, j, k) = (t[0], t[1], t[2]);
        let (a, b, c) = (&xs[i], &xs[j], &xs[k]);
        let msg = || format!("{}, {}, {}", r(a), r(b), r(c));
        if leq[i][j] && leq[j][k] {
            trans.check(leq[i][k], msg);
        }
        assoc.check(h.same(&h.add(&h.add(a, b), c), &h.add(a, &h.add(b, c))), msg);
        if leq[i][j] {
            mono.check(h.leq(&h.add(a, c), &h.add(b, c)), msg);
        }
        if wb[i][j] && wb[j][k] {
            wb_trans.check(wb[i][k], msg);
        }
        if (leq[i][j] && wb[j][k]) || (wb[i][j] && leq[j][k]) {
            absorb.check(wb[i][k], msg);
        }
        // c ≪ a + b is reached by approx(a) + approx(b)
        let ab = h.add(a, b);
        if h.waybelow(c, &ab) {
            let kk = h.horizon(a, b).max(h.horizon(a, c)).max(h.horizon(b, c)).max(h.horizon(&ab, c));
            let ca = chains.get(i, a, kk).clone();
            let cb = chains.get(j, b, kk).clone();
            sup_add.check(h.leq(c, &h.add(&ca, &cb)), || format!("{} ≪ {} + {} at {}", r(c), r(a), r(b), kk));
        }
    }

    let mut wb_add = Law::new("waybelow additive");
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| wb[i][j]).collect();
    for t in sample_tuples(pairs.len(), 2, cfg.sample_budget) {
        let ((i, j), (k, l)) = (pairs[t[0]], pairs[t[1]]);
        let lhs = h.add(&xs[i], &xs[k]);
        let rhs = h.add(&xs[j], &xs[l]);
        wb_add.check(h.waybelow(&lhs, &rhs), || format!("{} + {} vs {} + {}", r(&xs[i]), r(&xs[k]), r(&xs[j]), r(&xs[l])));
    }

    let mut rapid = Law::new("chains rapid");
    let mut density = Law::new("approximants in basis");
    for (i, x) in xs.iter().enumerate() {
        for k in 1..=cfg.chain_depth {
            let a = chains.get(i, x, k).clone();
            let b = chains.get(i, x, k + 1).clone();
            rapid.check(h.waybelow(&a, &b) && h.leq(&a, x), || format!("{} at k = {}", r(x), k));
            density.check(h.is_basis(&a), || format!("{} at k = {}", r(x), k));
        }
    }

    for l in [
        refl, antisym, trans, zero_least, zero_id, comm, assoc, mono, wb_leq, wb_trans, absorb, wb_add, rapid,
        matches, interp, sup_add, density,
    ] {
        laws.push(l.done());
    }
    Ok(LawReport { handle: h.describe(), elements: n, laws })
}

/// Enumerated elements with `x ≪ x`, one per class.
pub fn compacts<H: CuSemigroup>(h: &H, bound: u64, resolution: u64, cap: usize) -> Result<Vec<H::Elem>> {
    let mut out: Vec<H::Elem> = vec![];
    for x in h.enumerate(bound, resolution, cap)? {
        if h.waybelow(&x, &x) && !out.iter().any(|y| h.same(y, &x)) {
            out.push(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extnat_suite_passes() {
        let rep = axioms_suite(&ExtNatHandle, 4, 1).unwrap();
        assert!(rep.passed(), "{rep}");
        assert_eq!(rep.elements, 6);
    }

    #[test]
    fn extnat_compacts_are_finite() {
        let c = compacts(&ExtNatHandle, 4, 1, 100).unwrap();
        assert_eq!(c, (0..=4).map(Fin).collect::<Vec<_>>());
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(ExtNatHandle.enumerate(10, 1, 5), Err(CuError::EnumerationOverflow { cap: 5 })));
    }

    #[test]
    fn product_suite_passes() {
        let rep = axioms_suite(&ProductHandle(ExtNatHandle, ExtNatHandle), 2, 1).unwrap();
        assert!(rep.passed(), "{rep}");
    }

    /// A deliberately broken handle: the waybelow relation of `N̄` replaced by `≤`.
    struct Broken;

    impl CuSemigroup for Broken {
        type Elem = ExtNat;
        fn describe(&self) -> String {
            "broken".into()
        }
        fn zero(&self) -> ExtNat {
            ExtNat::ZERO
        }
        fn add(&self, a: &ExtNat, b: &ExtNat) -> ExtNat {
            *a + *b
        }
        fn leq(&self, a: &ExtNat, b: &ExtNat) -> bool {
            a <= b
        }
        fn waybelow(&self, a: &ExtNat, b: &ExtNat) -> bool {
            a <= b
        }
        fn same(&self, a: &ExtNat, b: &ExtNat) -> bool {
            a == b
        }
        fn approximant(&self, x: &ExtNat, k: u64) -> ExtNat {
            x.cap(k)
        }
        fn horizon(&self, _: &ExtNat, _: &ExtNat) -> u64 {
            10
        }
        fn is_basis(&self, x: &ExtNat) -> bool {
            x.is_finite()
        }
        fn enumerate(&self, bound: u64, r: u64, cap: usize) -> Result<Vec<ExtNat>> {
            ExtNatHandle.enumerate(bound, r, cap)
        }
        fn render(&self, x: &ExtNat) -> String {
            x.to_string()
        }
    }

    #[test]
    fn broken_handle_is_caught() {
        let rep = axioms_suite(&Broken, 3, 1).unwrap();
        assert!(!rep.passed());
        let names: Vec<&str> = rep.failures().iter().map(|l| l.name).collect();
        assert!(names.contains(&"waybelow matches chains"), "{names:?}");
    }

    #[test]
    fn sampling_is_deterministic_and_distinct() {
        let a = sample_tuples(50, 3, 1000);
        assert_eq!(a, sample_tuples(50, 3, 1000));
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 1000);
        assert_eq!(sample_tuples(3, 2, 100).len(), 9);
    }
}
