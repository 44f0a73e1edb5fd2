//! `cuntz`: command-line access to the model Cuntz semigroups.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use cuntz_core::action::{act, preserves_action_check, v_reconstruct};
use cuntz_core::cellmap::Region;
use cuntz_core::complex::OneComplex;
use cuntz_core::field::{check_sheaf, step_family, FieldElement, FieldHandle, ModelField};
use cuntz_core::limits::{colimit_cu, colimit_sg, worked_example, GermHandle, PullbackHandle, QuotientHandle};
use cuntz_core::order::{axioms_suite, compacts, element_cap, CuSemigroup, ExtNatHandle};
use cuntz_core::patch::{ClosedPatch, OpenSet};
use cuntz_core::schema::{self, ElementRef, IsoDoc};
use cuntz_core::sections::{decompose, section_leq_witness, section_waybelow, Section, SectionsHandle};
use cuntz_core::{CuError, Rational};

type Q = Rational;

#[derive(Parser)]
#[command(name = "cuntz", version, about = "Cuntz semigroups of model continuous fields over graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the sheaf gluing condition for two closed patches.
    CheckSheaf {
        field: String,
        u: PathBuf,
        v: PathBuf,
        #[arg(long, default_value_t = 2)]
        bound: u64,
        #[arg(long, default_value_t = 6)]
        den: u64,
    },
    /// Decide a ≤ b for two elements or two sections.
    Leq { field: String, a: PathBuf, b: PathBuf },
    /// Decide a ≪ b for two elements or two sections.
    Waybelow { field: String, a: PathBuf, b: PathBuf },
    /// Compute the stalk at a point both as a Cu colimit and as an algebraic colimit.
    Stalk {
        field: String,
        #[arg(long)]
        at: String,
        #[arg(long, default_value_t = 3)]
        bound: u64,
    },
    /// Decompose a section into a rapidly increasing chain.
    Decompose {
        field: String,
        section: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: u32,
    },
    /// Apply an lsc function to a section.
    Act {
        f: PathBuf,
        section: PathBuf,
        #[arg(long, default_value = "trivial")]
        field: String,
    },
    /// List compact elements over a closed patch.
    Compacts {
        field: String,
        patch: PathBuf,
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value_t = 1)]
        den: u64,
    },
    /// Extend an isomorphism of compact elements and test it against the action.
    Compare {
        field_a: String,
        field_b: String,
        #[arg(long)]
        via: PathBuf,
    },
    /// Run the Cu axiom suite on a handle: extnat, lsc:<space>, field:<field>,
    /// sections:<field>, pullback:<field>, quotient:<field> or germ:<field>@<point>.
    Axioms {
        handle: String,
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value_t = 4)]
        den: u64,
    },
    /// Reproduce the worked example of a stalk at an interior point of [0,1].
    PaperExample {
        #[arg(long, default_value_t = 4)]
        bound: u64,
    },
}

/// Failure modes: input problems exit with 2, failed properties with 1.
enum Failure {
    Input(String),
    Fails(String),
}

impl From<CuError> for Failure {
    fn from(e: CuError) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn name_of(path: &Path) -> String {
    path.file_stem().map_or_else(|| "x".into(), |s| s.to_string_lossy().into_owned())
}

fn load_field(spec: &str) -> Result<Arc<ModelField<Q>>, Failure> {
    let interval = || Arc::new(OneComplex::<Q>::unit_interval());
    let field = match spec {
        "trivial" => ModelField::trivial(interval()),
        "drop" => ModelField::drop_at(interval(), 0, Q::new(1, 3), vec![1, 1])?,
        _ => match spec.strip_prefix("trivial:") {
            Some(space) => ModelField::trivial(Arc::new(schema::named_space(space)?)),
            None => return Ok(schema::parse_field(&read(Path::new(spec))?)?),
        },
    };
    Ok(Arc::new(field))
}

fn is_section(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text).is_ok_and(|v| v.get("cover").is_some())
}

fn load_section(field: &Arc<ModelField<Q>>, path: &Path) -> Result<Section<Q>, Failure> {
    Ok(schema::parse_section(field, &read(path)?)?.section().clone())
}

fn compare(field: &str, a: &Path, b: &Path, strict: bool) -> Outcome {
    let f = load_field(field)?;
    let (ta, tb) = (read(a)?, read(b)?);
    let (na, nb) = (name_of(a), name_of(b));
    let rel = if strict { "≪" } else { "≤" };
    if is_section(&ta) || is_section(&tb) {
        let (x, y) = (load_section(&f, a)?, load_section(&f, b)?);
        let holds = if strict { section_waybelow(&x, &y)? } else { section_leq_witness(&x, &y)?.is_none() };
        if holds {
            return Ok(format!("{na} {rel} {nb}: holds"));
        }
        let why = if strict {
            x.element().waybelow_witness(y.element())?.map(|w| w.describe(&na, &nb))
        } else {
            section_leq_witness(&x, &y)?.map(|at| format!("{na} > {nb} at {at}"))
        };
        return Err(Failure::Fails(format!("{na} {rel} {nb}: fails\nwitness: {}", why.unwrap_or_default())));
    }
    let (x, y) = (schema::parse_element(&f, &ta)?, schema::parse_element(&f, &tb)?);
    if strict {
        match x.waybelow_witness(&y)? {
            None => Ok(format!("{na} {rel} {nb}: holds")),
            Some(w) => Err(Failure::Fails(format!("{na} {rel} {nb}: fails\nwitness: {}", w.describe(&na, &nb)))),
        }
    } else {
        match section_leq_witness(&Section::induced(&x), &Section::induced(&y))? {
            None => Ok(format!("{na} {rel} {nb}: holds")),
            Some(at) => Err(Failure::Fails(format!("{na} {rel} {nb}: fails\nwitness: {na} > {nb} at {at}"))),
        }
    }
}

fn run_suite<H: CuSemigroup>(h: &H, bound: u64, den: u64) -> Outcome {
    let rep = axioms_suite(h, bound, den)?;
    let text = rep.to_string().trim_end().to_string();
    if rep.passed() {
        Ok(text)
    } else {
        Err(Failure::Fails(text))
    }
}

fn default_halves(cx: &Arc<OneComplex<Q>>) -> Result<(ClosedPatch<Q>, ClosedPatch<Q>), Failure> {
    let len = cx.edge(0).length;
    let u = ClosedPatch::interval(cx, 0, Q::from(0), len * Q::new(2, 3))?;
    let v = ClosedPatch::interval(cx, 0, len * Q::new(1, 3), len)?;
    Ok((u, v))
}

fn axioms(spec: &str, bound: u64, den: u64) -> Outcome {
    if spec == "extnat" {
        return run_suite(&ExtNatHandle, bound, den);
    }
    let Some((kind, arg)) = spec.split_once(':') else {
        return Err(Failure::Input(format!("unknown handle {spec:?}")));
    };
    match kind {
        "lsc" => {
            let cx = Arc::new(schema::named_space::<Q>(arg)?);
            run_suite(&FieldHandle::lsc(&ClosedPatch::whole(cx)), bound, den)
        }
        "field" => {
            let f = load_field(arg)?;
            let whole = ClosedPatch::whole(f.base().clone());
            run_suite(&FieldHandle::new(f, &whole)?, bound, den)
        }
        "sections" => {
            let f = load_field(arg)?;
            let full = Region::full(f.base().clone());
            run_suite(&SectionsHandle::new(f, full), bound, den)
        }
        "pullback" => {
            let f = load_field(arg)?;
            let (u, v) = default_halves(f.base())?;
            run_suite(&PullbackHandle::new(f, u, v)?, bound, den)
        }
        "quotient" => {
            let f = load_field(arg)?;
            let len = f.base().edge(0).length;
            let w = OpenSet::interval(f.base(), 0, Q::from(0), len * Q::new(1, 2))?;
            run_suite(&QuotientHandle::new(f, w), bound, den)
        }
        "germ" => {
            let Some((field, at)) = arg.rsplit_once('@') else {
                return Err(Failure::Input("germ handles are written germ:<field>@<edge>:<offset>".into()));
            };
            let f = load_field(field)?;
            let p = f.base().parse_point(at)?;
            run_suite(&GermHandle::new(f, p, 3), bound, den)
        }
        _ => Err(Failure::Input(format!("unknown handle kind {kind:?}"))),
    }
}

fn element_ref(field: &Arc<ModelField<Q>>, base: &Path, r: &ElementRef, ptr: &str) -> Result<FieldElement<Q>, Failure> {
    match r {
        ElementRef::Path(p) => Ok(schema::parse_element(field, &read(&base.join(p))?)?),
        ElementRef::Inline(doc) => Ok(schema::build_element(field, ptr, doc)?),
    }
}

fn compare_fields(a: &str, b: &str, via: &Path) -> Outcome {
    let (fa, fb) = (load_field(a)?, load_field(b)?);
    let doc: IsoDoc = schema::from_json(&read(via)?)?;
    let base = via.parent().unwrap_or(Path::new("."));
    let mut pairs = vec![];
    for (i, (x, y)) in doc.pairs.iter().enumerate() {
        pairs.push((element_ref(&fa, base, x, &format!("/pairs/{i}/0"))?, element_ref(&fb, base, y, &format!("/pairs/{i}/1"))?));
    }
    let cx = fa.base();
    let mut patches = doc
        .patches
        .iter()
        .enumerate()
        .map(|(i, p)| schema::build_patch(cx, &format!("/patches/{i}"), p))
        .collect::<Result<Vec<_>, _>>()?;
    if patches.is_empty() {
        let (u, v) = default_halves(cx)?;
        patches = vec![ClosedPatch::whole(cx.clone()), u, v];
    }
    let iso = match v_reconstruct(&fa, &fb, &pairs, &patches) {
        Ok(iso) => iso,
        Err(e @ (CuError::NotCompatible(_) | CuError::NotDense { .. })) => {
            return Err(Failure::Fails(format!("no isomorphism extends the given pairs\nwitness: {e}")))
        }
        Err(e) => return Err(e.into()),
    };
    let full = Region::full(cx.clone());
    let opens: Vec<OpenSet<Q>> = step_family(cx, &full, 1, 4)
        .iter()
        .map(|f| OpenSet::new(f.superlevel(cuntz_core::ExtNat::ONE)))
        .collect::<Result<_, _>>()?;
    let basis = FieldHandle::new(fa.clone(), &ClosedPatch::whole(cx.clone()))?.enumerate(2, 4, element_cap())?;
    let head = format!("extended isomorphism: {} ({} generators)", iso.map, pairs.len());
    match preserves_action_check(&iso, &opens, &basis)? {
        None => Ok(format!("{head}\npreserves the action on {} open sets × {} elements", opens.len(), basis.len())),
        Some(w) => Err(Failure::Fails(format!("{head}\ndoes not preserve the action\nwitness: {w}"))),
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.cmd {
        Cmd::CheckSheaf { field, u, v, bound, den } => {
            let f = load_field(&field)?;
            let pu = schema::parse_patch(f.base(), &read(&u)?)?;
            let pv = schema::parse_patch(f.base(), &read(&v)?)?;
            let rep = check_sheaf(&f, &pu, &pv, bound, den, element_cap())?;
            let text = format!(
                "sheaf condition on {} and {}: {} restrict-glue, {} glue-restrict checks",
                pu.render(),
                pv.render(),
                rep.restrict_glue,
                rep.glue_restrict
            );
            match rep.failure {
                None => Ok(format!("{text}: holds")),
                Some(w) => Err(Failure::Fails(format!("{text}: fails\nwitness: {w}"))),
            }
        }
        Cmd::Leq { field, a, b } => compare(&field, &a, &b, false),
        Cmd::Waybelow { field, a, b } => compare(&field, &a, &b, true),
        Cmd::Stalk { field, at, bound } => {
            let f = load_field(&field)?;
            let p = f.base().parse_point(&at)?;
            let cu = colimit_cu(&f, &p, bound, 3)?;
            let sg = colimit_sg(&f, &p, bound, 3)?;
            let text = format!("{cu}\n{sg}");
            if cu.witness.failure.is_some() {
                Err(Failure::Fails(text))
            } else {
                Ok(text)
            }
        }
        Cmd::Decompose { field, section, depth } => {
            let f = load_field(&field)?;
            let s = load_section(&f, &section)?;
            let g = decompose(&s, depth)?;
            let mut out = vec![format!("input: {s}")];
            for (j, p) in g.chain().iter().enumerate() {
                out.push(format!("entry {}: {} ({} cover sets)", j + 1, p.section(), p.cover().len()));
            }
            out.push(format!("supremum: {}", g.sup()?));
            Ok(out.join("\n"))
        }
        Cmd::Act { f, section, field } => {
            let fld = load_field(&field)?;
            let func = schema::parse_stepfn(fld.base(), &read(&f)?)?;
            let s = load_section(&fld, &section)?;
            Ok(act(&func, &s)?.to_string())
        }
        Cmd::Compacts { field, patch, bound, den } => {
            let f = load_field(&field)?;
            let p = schema::parse_patch(f.base(), &read(&patch)?)?;
            let h = FieldHandle::new(f, &p)?;
            let xs = compacts(&h, bound, den, element_cap())?;
            let mut out = vec![format!("{} compact elements of {}", xs.len(), h.describe())];
            out.extend(xs.iter().map(|x| format!("  {}", x.render())));
            Ok(out.join("\n"))
        }
        Cmd::Compare { field_a, field_b, via } => compare_fields(&field_a, &field_b, &via),
        Cmd::Axioms { handle, bound, den } => axioms(&handle, bound, den),
        Cmd::PaperExample { bound } => {
            let ex = worked_example::<Q>(bound)?;
            if ex.holds() {
                Ok(ex.to_string())
            } else {
                Err(Failure::Fails(ex.to_string()))
            }
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            emit(&text);
            ExitCode::SUCCESS
        }
        Err(Failure::Fails(text)) => {
            emit(&text);
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
