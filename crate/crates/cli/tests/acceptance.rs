//! Acceptance suite: one PASS/FAIL line per criterion.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use common::*;
use cuntz_core::action::{act, bimorphism_laws, indicator_decompose, preserves_action_check, v_reconstruct};
use cuntz_core::cellmap::Region;
use cuntz_core::complex::OneComplex;
use cuntz_core::extnat::Fin;
use cuntz_core::field::{check_sheaf, step_family, FieldElement, FieldHandle, ModelField, StalkValue};
use cuntz_core::limits::germ::{worked_example, GermSignature};
use cuntz_core::limits::pullback::PullbackHandle;
use cuntz_core::limits::quotient::QuotientHandle;
use cuntz_core::order::{axioms_suite, compacts, element_cap, CuSemigroup, ExtNatHandle};
use cuntz_core::patch::{ClosedPatch, OpenSet};
use cuntz_core::sections::{
    decompose, directed_join, exact_depth, sample_points, section_leq, section_waybelow, values_at, AlphaIso,
    GammaElement, Section, SectionsHandle,
};
use cuntz_core::step::StepFn;
use cuntz_core::{CuError, Rational};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sig(a: u64, b: u64, c: u64) -> GermSignature {
    GermSignature { value: StalkValue::Scalar(Fin(b)), limits: vec![Fin(a), Fin(c)] }
}

fn worked_example_reproduced() -> Outcome {
    let t = Instant::now();
    let ex = worked_example::<Rational>(4).map_err(|e| e.to_string())?;
    let lib = t.elapsed();
    ensure(ex.holds(), || format!("witness failed:\n{ex}"))?;
    ensure(ex.cu.witness.target == "N̄", || format!("Cu colimit is {}", ex.cu.witness.target))?;
    let got: BTreeSet<GermSignature> = ex.sg.signatures.iter().cloned().collect();
    let want: BTreeSet<GermSignature> = (0..=4)
        .flat_map(|a| (0..=4).flat_map(move |b| (0..=4).map(move |c| (a, b, c))))
        .filter(|&(a, b, c)| b <= a && b <= c)
        .map(|(a, b, c)| sig(a, b, c))
        .collect();
    ensure(got == want, || format!("algebraic colimit has {} signatures, want {}", got.len(), want.len()))?;
    let t = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_cuntz")).arg("paper-example").output().map_err(|e| e.to_string())?;
    let cli = t.elapsed();
    let text = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.success() && text.contains("isomorphic to N̄"), || format!("cli output:\n{text}"))?;
    ensure(lib.as_secs_f64() < 1.0 && cli.as_secs_f64() < 1.0, || format!("too slow: {lib:?} library, {cli:?} cli"))?;
    Ok(format!("{} signatures, Cu ≅ N̄; {:.3}s library, {:.3}s cli", got.len(), lib.as_secs_f64(), cli.as_secs_f64()))
}

fn lcm(a: i64, b: i64) -> i64 {
    let gcd = |mut a: i64, mut b: i64| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    a / gcd(a, b) * b
}

fn waybelow_oracle() -> Outcome {
    let t = Instant::now();
    let mut g = rng(2);
    let (mut pairs, mut holds, mut grid_checked) = (0, 0, 0);
    for (cx, n) in [(unit(), 1100), (triangle(), 1100)] {
        for i in 0..n {
            let (df, dg) = (g.gen_range(1..=16), g.gen_range(1..=16));
            let b = stepfn(&mut g, &cx, dg, 5, 0.1);
            // Mix independent pairs with pairs built to be close to ≪.
            let (a, grid) = match i % 4 {
                0 | 1 => (stepfn(&mut g, &cx, df, 5, 0.1), Some(lcm(df, dg))),
                2 => {
                    let k = g.gen_range(1..=16);
                    (b.approx(k), Some(lcm(dg, k as i64)))
                }
                _ => (b.clone(), Some(dg)),
            };
            let got = a.waybelow(&b).map_err(|e| e.to_string())?;
            let want = chain_waybelow(&a, &b, kmax(&a, &b));
            ensure(got == want, || format!("mismatch: waybelow {got}, chain {want}\n{}\n{}", a.render(), b.render()))?;
            if let Some(d) = grid {
                grid_checked += 1;
                ensure(got == grid_waybelow(&a, &b, d), || format!("grid mismatch\n{}\n{}", a.render(), b.render()))?;
            }
            pairs += 1;
            holds += usize::from(got);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("{pairs} pairs took {secs:.1}s"))?;
    Ok(format!("{pairs} pairs ({holds} with ≪), 0 mismatches, {grid_checked} also on the grid; {secs:.1}s"))
}

fn suite<H: CuSemigroup>(h: &H, names: &mut Vec<String>) -> Result<(), String> {
    let rep = axioms_suite(h, 3, 8).map_err(|e| e.to_string())?;
    ensure(rep.passed(), || rep.to_string())?;
    names.push(format!("{} ({} elements)", h.describe(), rep.elements));
    Ok(())
}

fn axiom_suites() -> Outcome {
    let mut names = vec![];
    suite(&ExtNatHandle, &mut names)?;
    for (label, cx) in [("interval", unit()), ("triangle", triangle()), ("star", Arc::new(OneComplex::star(3)))] {
        suite(&FieldHandle::lsc(&ClosedPatch::whole(cx)), &mut names)?;
        names.last_mut().unwrap().insert_str(0, &format!("{label} "));
    }
    let cx = unit();
    let u = ClosedPatch::interval(&cx, 0, r(0, 1), r(2, 3)).unwrap();
    let v = ClosedPatch::interval(&cx, 0, r(1, 3), r(1, 1)).unwrap();
    suite(&PullbackHandle::new(trivial(&cx), u, v).unwrap(), &mut names)?;
    let w = OpenSet::interval(&cx, 0, r(0, 1), r(1, 2)).unwrap();
    suite(&QuotientHandle::new(trivial(&cx), w), &mut names)?;
    for f in [trivial(&cx), drop_field(r(1, 3))] {
        suite(&SectionsHandle::new(f, Region::full(cx.clone())), &mut names)?;
    }
    Ok(format!("{} handles: {}", names.len(), names.join("; ")))
}

fn sheaf_condition() -> Outcome {
    let cx = unit();
    let fields = [trivial(&cx), drop_field(r(1, 3)), drop_field(r(1, 2))];
    let mut intervals = vec![];
    for a in 0..6 {
        for b in a + 1..=6 {
            intervals.push((r(a, 6), r(b, 6)));
        }
    }
    let mut pairs = vec![];
    for (i, &(a, b)) in intervals.iter().enumerate() {
        for &(c, d) in &intervals[i + 1..] {
            if a.max(c) < b.min(d) {
                pairs.push((a, b, c, d));
            }
        }
    }
    let (mut checked, mut glued) = (0, 0);
    for f in &fields {
        for &(a, b, c, d) in &pairs {
            let u = ClosedPatch::interval(&cx, 0, a, b).unwrap();
            let v = ClosedPatch::interval(&cx, 0, c, d).unwrap();
            let rep = check_sheaf(f, &u, &v, 2, 6, element_cap()).map_err(|e| e.to_string())?;
            ensure(rep.passed(), || format!("{} over {} and {}: {:?}", f.describe(), u.render(), v.render(), rep.failure))?;
            checked += 1;
            glued += rep.restrict_glue + rep.glue_restrict;
        }
    }
    ensure(checked >= 100, || format!("only {checked} patch pairs"))?;
    Ok(format!("{checked} patch pairs over {} fields, {glued} identities checked", fields.len()))
}

fn alpha_isomorphism() -> Outcome {
    let cx = unit();
    let fields = [
        trivial(&cx),
        drop_field(r(1, 3)),
        Arc::new(ModelField::drop_at(cx.clone(), 0, r(1, 2), vec![1, 2]).unwrap()),
    ];
    let mut out = vec![];
    let mut g = rng(5);
    let mut random_pairs = 0;
    for f in &fields {
        let rep = AlphaIso::new(f.clone()).check(3, 8, element_cap(), 3_000).map_err(|e| e.to_string())?;
        ensure(rep.passed(), || format!("{}: {rep}", f.describe()))?;
        for _ in 0..400 {
            let a = element(&mut g, f, 8, 4, 0.1);
            let b = element(&mut g, f, 8, 4, 0.1);
            let b = if random_pairs % 2 == 0 { b.add(&a).unwrap() } else { b };
            let want = a.leq(&b).unwrap();
            let got = section_leq(&Section::induced(&a), &Section::induced(&b)).unwrap();
            ensure(got == want, || format!("order differs on {} and {}", a.render(), b.render()))?;
            random_pairs += 1;
        }
        out.push(format!("{} elements/{} pairs", rep.elements, rep.pairs));
    }
    Ok(format!("round trips {}; {random_pairs} random pairs agree", out.join(", ")))
}

fn density_and_directedness() -> Outcome {
    let mut g = rng(6);
    let cx = unit();
    let fields = [trivial(&cx), drop_field(r(1, 3)), trivial(&triangle())];
    let (mut elements, mut joins, mut longest) = (0, 0, 0);
    for i in 0..210 {
        let f = &fields[i % fields.len()];
        let s = Section::induced(&element(&mut g, f, 8, 4, 0.0));
        let depth = exact_depth(&s);
        let chain: GammaElement<Rational> = decompose(&s, depth).map_err(|e| e.to_string())?;
        for w in chain.chain().windows(2) {
            ensure(section_waybelow(w[0].section(), w[1].section()).unwrap(), || format!("chain of {s} is not rapid"))?;
        }
        let pts = sample_points(&[&s]);
        let sup = chain.sup_on(s.to_raw().map().all_knots()).map_err(|e| e.to_string())?;
        ensure(values_at(&sup, &pts) == values_at(&s, &pts), || format!("decompose does not reproduce {s}"))?;
        longest = longest.max(chain.chain().len());
        elements += 1;

        let top = Section::induced(&element(&mut g, f, 8, 4, 0.1));
        let (k1, k2) = (g.gen_range(1..=12), g.gen_range(1..=12));
        let (h1, h2) = (top.approx(k1), top.approx(k2));
        let j = directed_join(&h1, &h2, &top).map_err(|e| e.to_string())?;
        for h in [&h1, &h2] {
            ensure(section_waybelow(h, j.section()).unwrap(), || format!("{h} is not ≪ join under {top}"))?;
        }
        ensure(section_waybelow(j.section(), &top).unwrap(), || format!("join is not ≪ {top}"))?;
        joins += 1;
    }
    Ok(format!("{elements} elements decomposed exactly (longest chain {longest}), {joins} joins checked"))
}

fn action_laws() -> Outcome {
    let cx = unit();
    let full = Region::full(cx.clone());
    let fs = step_family(&cx, &full, 3, 1);
    let mut ss: Vec<Section<Rational>> = vec![];
    for f in [trivial(&cx), drop_field(r(1, 3))] {
        let xs = FieldHandle::on_region(f, full.clone()).enumerate(3, 1, element_cap()).map_err(|e| e.to_string())?;
        ss.extend(xs.iter().map(Section::induced));
    }
    let (triv_ss, drop_ss): (Vec<_>, Vec<_>) = ss.into_iter().partition(|s| s.field().is_trivial());
    let mut checked = 0;
    for group in [&triv_ss, &drop_ss] {
        let rep = bimorphism_laws(&fs, group).map_err(|e| e.to_string())?;
        ensure(rep.passed(), || rep.to_string())?;
        checked += rep.checked;
    }
    let mut g = rng(7);
    let mut sums = 0;
    for i in 0..300 {
        let f = stepfn(&mut g, &cx, 8, 4, 0.0);
        let field = if i % 2 == 0 { trivial(&cx) } else { drop_field(r(1, 3)) };
        let s = Section::induced(&element(&mut g, &field, 8, 3, 0.1));
        let d = indicator_decompose(&f).map_err(|e| e.to_string())?;
        let whole = act(&f, &s).map_err(|e| e.to_string())?;
        let pts = sample_points(&[&whole, &s]);
        let mut total: Vec<Option<StalkValue>> = values_at(&s, &pts).into_iter().map(|v| v.map(|v| v.scale(Fin(0)))).collect();
        for u in &d.sets {
            let part = act(&StepFn::indicator(u, Fin(1)), &s).map_err(|e| e.to_string())?;
            for (t, v) in total.iter_mut().zip(values_at(&part, &pts)) {
                *t = t.as_ref().zip(v).map(|(a, b)| a.add(&b));
            }
        }
        ensure(total == values_at(&whole, &pts), || format!("{} · {s} is not the sum over indicators", f.render()))?;
        sums += 1;
    }
    Ok(format!(
        "{} functions × {} sections: {checked} clauses; {sums} indicator sums",
        fs.len(),
        triv_ss.len() + drop_ss.len()
    ))
}

fn v_reconstruction() -> Outcome {
    let cx = unit();
    let (a, b) = (drop_field(r(1, 3)), drop_field(r(2, 3)));
    let el = |f: &Arc<ModelField<Rational>>, t: [u64; 2]| {
        FieldElement::new(f.clone(), StepFn::constant(cx.clone(), Fin(1)), [(0, t.map(Fin).to_vec())].into()).unwrap()
    };
    let patches = vec![
        ClosedPatch::interval(&cx, 0, r(0, 1), r(1, 2)).unwrap(),
        ClosedPatch::interval(&cx, 0, r(1, 4), r(1, 1)).unwrap(),
        ClosedPatch::whole(cx.clone()),
    ];
    let basis = FieldHandle::new(a.clone(), &ClosedPatch::whole(cx.clone()))
        .unwrap()
        .enumerate(2, 4, element_cap())
        .map_err(|e| e.to_string())?;
    let opens: Vec<OpenSet<Rational>> = [(0, 1, 1, 1), (1, 3, 1, 1), (0, 1, 1, 2), (1, 4, 3, 4)]
        .iter()
        .map(|&(p, q, s, t)| OpenSet::interval(&cx, 0, r(p, q), r(s, t)).unwrap())
        .collect();
    let mut maps = vec![];
    for pairs in [
        vec![(el(&a, [1, 0]), el(&a, [1, 0])), (el(&a, [0, 1]), el(&a, [0, 1]))],
        vec![(el(&a, [1, 0]), el(&a, [0, 1])), (el(&a, [0, 1]), el(&a, [1, 0]))],
    ] {
        let iso = v_reconstruct(&a, &a, &pairs, &patches).map_err(|e| e.to_string())?;
        let bad = preserves_action_check(&iso, &opens, &basis).map_err(|e| e.to_string())?;
        ensure(bad.is_none(), || format!("{}: {}", iso.map, bad.unwrap_or_default()))?;
        maps.push(iso.map.to_string());
    }
    let cross = vec![(el(&a, [1, 0]), el(&b, [1, 0])), (el(&a, [0, 1]), el(&b, [0, 1]))];
    match v_reconstruct(&a, &b, &cross, &patches) {
        Err(CuError::NotCompatible(_)) => {}
        other => return Err(format!("mismatched locations gave {other:?}")),
    }
    let mut spaces = vec![];
    for cx in [unit(), triangle(), Arc::new(OneComplex::star(3)), Arc::new(OneComplex::circle(4, r(1, 4)))] {
        let h = FieldHandle::lsc(&ClosedPatch::whole(cx.clone()));
        let xs = compacts(&h, 5, 4, element_cap()).map_err(|e| e.to_string())?;
        let got: BTreeSet<String> = xs.iter().map(|x| x.render()).collect();
        let want: BTreeSet<String> = (0..=5)
            .map(|n| FieldElement::lift(trivial(&cx), StepFn::constant(cx.clone(), Fin(n))).unwrap().render())
            .collect();
        ensure(got == want, || format!("compacts on {} are {got:?}", h.describe()))?;
        spaces.push(cx.vertices().len());
    }
    Ok(format!(
        "{} ({} basis elements, {} open sets); cross-location pair not compatible; compacts are the 6 constants on {} complexes",
        maps.join(" and "),
        basis.len(),
        opens.len(),
        spaces.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("worked example at 1/2", worked_example_reproduced),
        ("≪ criterion vs shrink-chain oracle", waybelow_oracle),
        ("Cu axioms suites", axiom_suites),
        ("sheaf condition", sheaf_condition),
        ("order embedding and α round trips", alpha_isomorphism),
        ("PCS density and directedness", density_and_directedness),
        ("action laws", action_laws),
        ("V-reconstruction and compacts", v_reconstruction),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("PASS {n} {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {n} {name}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
