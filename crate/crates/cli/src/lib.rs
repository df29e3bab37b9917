//! Command implementations behind the `smlab` binary.
//!
//! Every command returns the text to print on stdout; the binary only parses
//! arguments, prints, and maps errors to exit codes.

use std::path::Path;

use serde_json::{json, Map, Value};
use smlab::finmod::{ModuleTable, Submodule};
use smlab::instance::{Caps, InstanceFile};
use smlab::laws::{self, generate_corpus, LawId, Report, Suite, SuiteConfig};
use smlab::par::Parallelism;
use smlab::predicates::{self as pr, ModuleContext, PropertyVerdict, Witness};
use smlab::zlattice::{self as z, ZModule, ZSubmodule};
use smlab::{Error, Result};

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_instance(path: &Path) -> Result<InstanceFile> {
    InstanceFile::from_json(&read_file(path)?)
}

/// A file that may hold only part of an instance; see [`merge_files`].
pub fn read_partial(path: &Path) -> Result<InstanceFile> {
    Ok(serde_json::from_str(&read_file(path)?)?)
}

fn to_json(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize")
}

fn big_value(s: String) -> Value {
    match s.parse::<i64>() {
        Ok(v) => json!(v),
        Err(_) => json!(s),
    }
}

// ---------------------------------------------------------------------------
// finite helpers

struct Finite {
    ctx: ModuleContext,
    sub: Option<Submodule>,
}

fn load_finite(file: &InstanceFile, caps: &Caps) -> Result<Finite> {
    let m = file.build_finite(caps)?;
    let sub = file.submodule.as_ref().map(|s| s.build(&m)).transpose()?;
    let ctx = ModuleContext::with_cap(m, caps.lattice)?;
    Ok(Finite { ctx, sub })
}

fn names(m: &ModuleTable, xs: &[usize]) -> Value {
    json!(xs.iter().map(|&x| m.name(x)).collect::<Vec<_>>())
}

fn ring_names(m: &ModuleTable, xs: &[usize]) -> Value {
    json!(xs.iter().map(|&x| m.ring().name(x)).collect::<Vec<_>>())
}

/// Labelled rendering of a witness: module elements and ring elements by name.
fn pretty_witness(m: &ModuleTable, w: &Witness) -> Value {
    match w {
        Witness::SubmodulePair { k, l } => json!({"k": names(m, k), "l": names(m, l)}),
        Witness::ElementPair { r, x } => json!({"r": m.ring().name(*r), "x": m.name(*x)}),
        Witness::AssociatedPrime { prime } | Witness::AdjointPrime { prime } => {
            json!({"prime": ring_names(m, prime)})
        }
        Witness::ZeroDivisorSum { a, b } => json!({"a": m.ring().name(*a), "b": m.ring().name(*b)}),
        Witness::Shelter { shelter } => json!({"shelter": names(m, shelter)}),
        Witness::DistributiveTriple { condition, n, k, l } => json!({
            "condition": condition, "n": names(m, n), "k": names(m, k), "l": names(m, l)
        }),
        Witness::NotMultiplication { k, j } => json!({
            "k": names(m, k), "j": j.as_ref().map(|j| names(m, j))
        }),
        Witness::LocalPair { prime, k, l } => json!({
            "prime": ring_names(m, prime), "k": names(m, k), "l": names(m, l)
        }),
        Witness::ColonTriple { identity, k, l, n } => json!({
            "identity": identity, "k": names(m, k), "l": names(m, l), "n": names(m, n)
        }),
    }
}

fn verdict_value(m: &ModuleTable, v: &PropertyVerdict, pretty: bool) -> Value {
    let mut out = serde_json::to_value(v).expect("verdicts serialize");
    if pretty {
        if let (Some(w), Value::Object(map)) = (&v.witness, &mut out) {
            map.insert("labels".into(), pretty_witness(m, w));
        }
    }
    out
}

fn module_header(ctx: &ModuleContext) -> Map<String, Value> {
    let mut h = Map::new();
    h.insert("backend".into(), json!("finite"));
    h.insert("ring".into(), json!(ctx.ring().label()));
    h.insert("ring_size".into(), json!(ctx.ring().size()));
    h.insert("module".into(), json!(ctx.module().label()));
    h.insert("module_size".into(), json!(ctx.module().size()));
    h.insert("submodules".into(), json!(ctx.lattice().len()));
    h
}

// ---------------------------------------------------------------------------
// analyze

/// Property verdicts for the instance in `file`. `props` is a list of names
/// or the single entry `all`.
pub fn cmd_analyze(file: &InstanceFile, props: &[String], caps: &Caps, pretty: bool) -> Result<String> {
    if file.zmodule.is_some() {
        return analyze_z(file);
    }
    let f = load_finite(file, caps)?;
    let all = props.is_empty() || props.iter().any(|p| p == "all");
    let wanted: Vec<String> = if all {
        let subs = if f.sub.is_some() { pr::SUBMODULE_PROPERTIES } else { &[] };
        subs.iter().chain(pr::MODULE_PROPERTIES).map(|s| s.to_string()).collect()
    } else {
        props.to_vec()
    };
    let m = f.ctx.module();
    if let Some(n) = &f.sub {
        if n.is_whole() {
            return Err(Error::Precondition("N = M: submodule properties need a proper submodule".into()));
        }
    }
    let mut verdicts = Vec::new();
    for name in &wanted {
        let v = if pr::SUBMODULE_PROPERTIES.contains(&name.as_str()) {
            let n = f
                .sub
                .as_ref()
                .ok_or_else(|| Error::Parse(format!("property `{name}` needs a \"submodule\" entry")))?;
            pr::evaluate_submodule_property(&f.ctx, n, name)?
        } else {
            pr::evaluate_module_property(&f.ctx, name)?
        };
        verdicts.push(verdict_value(m, &v, pretty));
    }
    let mut out = module_header(&f.ctx);
    if let Some(n) = &f.sub {
        out.insert("submodule".into(), json!(n.to_vec()));
        if pretty {
            out.insert("submodule_labels".into(), names(m, &n.to_vec()));
        }
    }
    out.insert("verdicts".into(), Value::Array(verdicts));
    Ok(to_json(&Value::Object(out)))
}

fn load_z(file: &InstanceFile) -> Result<(ZModule, Option<ZSubmodule>)> {
    let m = file.build_z()?;
    let n = file.zsub.as_ref().map(|s| s.build(&m)).transpose()?;
    Ok((m, n))
}

fn analyze_z(file: &InstanceFile) -> Result<String> {
    let (m, n) = load_z(file)?;
    let mut out = Map::new();
    out.insert("backend".into(), json!("zlattice"));
    out.insert("module_invariants".into(), serde_json::to_value(m.invariants())?);
    if let Some(n) = n {
        let inv = z::z_quotient_invariants(&m, &n)?;
        if inv.is_trivial() {
            return Err(Error::Precondition("N = M: submodule properties need a proper submodule".into()));
        }
        out.insert("quotient_invariants".into(), serde_json::to_value(&inv)?);
        out.insert("colon".into(), big_value(z::z_colon(&m, &n)?.to_string()));
        out.insert("primary".into(), serde_json::to_value(z::z_is_primary(&m, &n)?)?);
        out.insert("prime".into(), json!(z::z_is_prime_submodule(&m, &n)?));
        out.insert(
            "strongly_irreducible".into(),
            serde_json::to_value(z::z_decide_strongly_irreducible(&m, &n, z::DEFAULT_WITNESS_BOUND)?)?,
        );
    }
    Ok(to_json(&Value::Object(out)))
}

// ---------------------------------------------------------------------------
// lattice

/// All submodules in canonical order with generators and upper covers.
pub fn cmd_lattice(file: &InstanceFile, caps: &Caps, pretty: bool) -> Result<String> {
    if file.zmodule.is_some() {
        return Err(Error::Precondition("lattice dumps need a finite instance".into()));
    }
    let f = load_finite(file, caps)?;
    let lat = f.ctx.lattice();
    let m = f.ctx.module();
    let nodes: Vec<Value> = (0..lat.len())
        .map(|i| {
            let members = lat.get(i).to_vec();
            let mut node = json!({
                "index": i,
                "members": members,
                "generators": lat.generators(i),
                "cyclic_generator": lat.cyclic_generator(i),
                "covers": lat.upper_covers(i),
            });
            if pretty {
                node["labels"] = names(m, &members);
            }
            node
        })
        .collect();
    let mut out = module_header(&f.ctx);
    out.insert("nodes".into(), Value::Array(nodes));
    Ok(to_json(&Value::Object(out)))
}

// ---------------------------------------------------------------------------
// laws

pub struct LawsArgs {
    pub suite: Suite,
    pub seed: u64,
    pub caps: Caps,
    pub jobs: Option<usize>,
    pub laws: Option<Vec<LawId>>,
}

/// Generates the corpus, runs the suite, returns the report.
pub fn cmd_laws(args: &LawsArgs) -> Result<Report> {
    let corpus = args.suite.select(&generate_corpus(args.seed, &args.caps));
    let cfg = SuiteConfig {
        caps: args.caps,
        ..SuiteConfig::new(args.seed)
    };
    let selection = args.laws.clone().unwrap_or_else(|| LawId::ALL.to_vec());
    laws::run_suite(&selection, &corpus, &cfg, Parallelism::from_jobs(args.jobs))
}

pub fn parse_law_list(s: &str) -> Result<Vec<LawId>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(str::parse)
        .collect()
}

// ---------------------------------------------------------------------------
// integer decisions and witnesses

/// Merges instance files, e.g. one holding `zmodule` and one holding `zsub`.
pub fn merge_files(files: &[InstanceFile]) -> Result<InstanceFile> {
    let mut out = InstanceFile::default();
    for f in files {
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = &f.$field {
                    if out.$field.is_some() {
                        return Err(Error::Parse(concat!("`", stringify!($field), "` given twice").into()));
                    }
                    out.$field = Some(v.clone());
                }
            };
        }
        take!(name);
        take!(ring);
        take!(module);
        take!(submodule);
        take!(zmodule);
        take!(zsub);
    }
    InstanceFile::from_json(&out.to_json())
}

pub fn cmd_decide_z(file: &InstanceFile, bound: u32) -> Result<String> {
    let (m, n) = load_z(file)?;
    let n = n.ok_or_else(|| Error::Parse("decide-z needs a \"zsub\" entry".into()))?;
    let v = z::z_decide_strongly_irreducible(&m, &n, bound)?;
    Ok(to_json(&serde_json::to_value(v)?))
}

/// A pair `K, L` with `K ∩ L ⊆ N` and neither inside `N`, if one exists
/// (for integer modules: among cyclic pairs of height at most `bound`).
pub fn cmd_witness(file: &InstanceFile, caps: &Caps, bound: u32, pretty: bool) -> Result<String> {
    if file.zmodule.is_some() {
        let (m, n) = load_z(file)?;
        let n = n.ok_or_else(|| Error::Parse("witness needs a \"zsub\" entry".into()))?;
        if z::z_quotient_invariants(&m, &n)?.is_trivial() {
            return Err(Error::Precondition("N = M: a witness needs a proper submodule".into()));
        }
        let w = z::z_witness_search(&m, &n, bound)?;
        return Ok(to_json(&json!({
            "backend": "zlattice",
            "bound": bound,
            "found": w.is_some(),
            "witness": w.map(|(x, y)| json!({"x": x, "y": y})),
        })));
    }
    let f = load_finite(file, caps)?;
    let n = f
        .sub
        .as_ref()
        .ok_or_else(|| Error::Parse("witness needs a \"submodule\" entry".into()))?;
    let v = pr::is_strongly_irreducible_cyclic(&f.ctx, n)?;
    let mut out = module_header(&f.ctx);
    out.insert("found".into(), json!(!v.verdict));
    out.insert("witness".into(), serde_json::to_value(&v.witness)?);
    if pretty {
        if let Some(w) = &v.witness {
            out.insert("labels".into(), pretty_witness(f.ctx.module(), w));
        }
    }
    Ok(to_json(&Value::Object(out)))
}
