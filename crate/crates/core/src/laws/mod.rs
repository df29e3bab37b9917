//! Algebraic facts about strongly irreducible submodules as executable,
//! universally quantified checks.
//!
//! Each law enumerates the tuples its statement quantifies over (submodules,
//! pairs, primes) and judges every tuple separately: a tuple whose hypothesis
//! fails is skipped, a tuple whose hypothesis holds passes or fails on the
//! conclusion. A law fails on an instance iff some tuple fails; it is
//! reported as skipped iff no tuple satisfied the hypothesis.
//!
//! Counterexamples carry the instance descriptor and the tuple, so
//! [`revalidate_failure`] can rebuild everything from scratch and re-check.

mod corpus;
mod finite;
mod integer;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Caps, Instance, InstanceBody};
use crate::par::{self, Parallelism};
use crate::predicates::Mutation;

pub use corpus::{generate_corpus, Suite};

/// The law registry. Names double as stable identifiers in reports.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LawId {
    L2_2,
    L2_3,
    L2_5,
    P2_6,
    L2_7,
    L2_9,
    P2_10,
    T2_11,
    C2_12,
    T3_1,
    T3_2,
    P4_1,
    T4_2,
    C4_3,
    P4_4,
    P4_6,
    T4_7,
    C4_8,
    P4_9,
    Q2_9_CONVERSE,
}

impl LawId {
    pub const ALL: [LawId; 20] = [
        LawId::L2_2,
        LawId::L2_3,
        LawId::L2_5,
        LawId::P2_6,
        LawId::L2_7,
        LawId::L2_9,
        LawId::P2_10,
        LawId::T2_11,
        LawId::C2_12,
        LawId::T3_1,
        LawId::T3_2,
        LawId::P4_1,
        LawId::T4_2,
        LawId::C4_3,
        LawId::P4_4,
        LawId::P4_6,
        LawId::T4_7,
        LawId::C4_8,
        LawId::P4_9,
        LawId::Q2_9_CONVERSE,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LawId::L2_2 => "L2_2",
            LawId::L2_3 => "L2_3",
            LawId::L2_5 => "L2_5",
            LawId::P2_6 => "P2_6",
            LawId::L2_7 => "L2_7",
            LawId::L2_9 => "L2_9",
            LawId::P2_10 => "P2_10",
            LawId::T2_11 => "T2_11",
            LawId::C2_12 => "C2_12",
            LawId::T3_1 => "T3_1",
            LawId::T3_2 => "T3_2",
            LawId::P4_1 => "P4_1",
            LawId::T4_2 => "T4_2",
            LawId::C4_3 => "C4_3",
            LawId::P4_4 => "P4_4",
            LawId::P4_6 => "P4_6",
            LawId::T4_7 => "T4_7",
            LawId::C4_8 => "C4_8",
            LawId::P4_9 => "P4_9",
            LawId::Q2_9_CONVERSE => "Q2_9_CONVERSE",
        }
    }

    /// One-line statement of what the law asserts.
    pub fn statement(self) -> &'static str {
        match self {
            LawId::L2_2 => "strongly irreducible ⇒ irreducible ⇒ primary",
            LawId::L2_3 => "M multiplication, N prime ⇒ N strongly irreducible",
            LawId::L2_5 => "S⁻¹N strongly irreducible in S⁻¹M ⇒ S(N) strongly irreducible",
            LawId::P2_6 => "N strongly irreducible and primary, Rad(N:M) ∩ S = ∅ ⇒ S⁻¹N strongly irreducible",
            LawId::L2_7 => "N 𝔭-primary, N_𝔭 strongly irreducible ⇒ N strongly irreducible",
            LawId::L2_9 => "U ⊆ N, N strongly irreducible ⇒ N/U strongly irreducible in M/U",
            LawId::P2_10 => "cyclic-pair and exhaustive strong irreducibility scans agree",
            LawId::T2_11 => "quasi-local, N ≠ N:_M 𝔪 ⇒ N:_M 𝔪 cyclic, N = 𝔪(N:_M 𝔪), K ⊆ N or N:_M 𝔪 ⊆ K",
            LawId::C2_12 => "local, Rad(N:M) = 𝔪 ⇒ N sheltered with shelter N:_M 𝔪",
            LawId::T3_1 => "distributive ⇔ arithmetical ⇔ both colon identities ⇔ all submodules multiplication",
            LawId::T3_2 => "on arithmetical M: irreducible ⇔ strongly irreducible ⇔ primal",
            LawId::P4_1 => "𝔭M_𝔭 ≠ N_𝔭 ⇒ localized colon cyclic, N_𝔭 = 𝔭(N_𝔭 : 𝔭R_𝔭), comparability",
            LawId::T4_2 => "local, 𝔪M ≠ N, Rad(N:M) = 𝔪 ⇒ comparability, union and intersection formulas",
            LawId::C4_3 => "dim 1, regular element in (N:M) ⇒ N distributive submodule",
            LawId::P4_4 => "multiplication M, non-prime colon: strongly irreducible ⇔ (L, 𝔭) structure",
            LawId::P4_6 => "faithful M, 𝔭M ⊄ N ⇒ (N_𝔭 : M_𝔭) has a regular element on M_𝔭",
            LawId::T4_7 => "strongly irreducible ⇔ primary, M_𝔭 arithmetical, N = (𝔭M)^(n), n > 1",
            LawId::C4_8 => "torsion-free M: non-prime-colon strongly irreducible N exists ⇔ some M_𝔭 arithmetical",
            LawId::P4_9 => "strongly irreducible and rad_M(N) = N ⇒ N prime",
            LawId::Q2_9_CONVERSE => "probe: N/U strongly irreducible in M/U ⇒ N strongly irreducible",
        }
    }

    pub fn supports_finite(self) -> bool {
        !matches!(self, LawId::C4_3 | LawId::P4_6 | LawId::C4_8)
    }

    pub fn supports_z(self) -> bool {
        matches!(self, LawId::L2_2 | LawId::C4_3 | LawId::P4_6 | LawId::T4_7 | LawId::C4_8)
    }

    pub fn is_probe(self) -> bool {
        self == LawId::Q2_9_CONVERSE
    }

    pub fn supports(self, inst: &Instance) -> bool {
        if inst.is_finite() {
            self.supports_finite()
        } else {
            self.supports_z()
        }
    }
}

impl fmt::Display for LawId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LawId {
    type Err = Error;
    fn from_str(s: &str) -> Result<LawId> {
        LawId::ALL
            .iter()
            .copied()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown law `{s}`")))
    }
}

/// The quantified objects of one check. Submodules and ideals are member
/// lists, integer submodules are indices into the instance's `zsubs`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tuple {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zsub: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Skip,
    Fail,
}

/// The judgement on a single tuple.
#[derive(Debug, Clone)]
struct Checked {
    status: Status,
    detail: Option<String>,
    note: Option<String>,
}

impl Checked {
    fn pass() -> Self {
        Checked {
            status: Status::Pass,
            detail: None,
            note: None,
        }
    }
    fn skip(reason: impl Into<String>) -> Self {
        Checked {
            status: Status::Skip,
            detail: Some(reason.into()),
            note: None,
        }
    }
    fn fail(detail: impl Into<String>) -> Self {
        Checked {
            status: Status::Fail,
            detail: Some(detail.into()),
            note: None,
        }
    }
    fn noted(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
    fn check(ok: bool, detail: impl FnOnce() -> String) -> Self {
        if ok {
            Checked::pass()
        } else {
            Checked::fail(detail())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub tuple: Tuple,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Note {
    pub tuple: Tuple,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawResult {
    pub law: LawId,
    pub instance: Instance,
    /// Tuples whose hypothesis held and whose conclusion was checked.
    pub quantified: usize,
    /// Tuples whose hypothesis failed.
    pub skipped: usize,
    pub failures: usize,
    pub verdict: Verdict,
    /// Most common skip reason when nothing was quantified.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<Note>,
}

/// Settings shared by every check in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub caps: Caps,
    pub mutation: Mutation,
}

impl SuiteConfig {
    pub fn new(seed: u64) -> Self {
        SuiteConfig {
            seed,
            caps: Caps::default(),
            mutation: Mutation::None,
        }
    }
}

/// Everything a law needs about one instance, built once and shared.
enum Env {
    Finite(Box<finite::FiniteEnv>),
    Z(Box<integer::ZEnv>),
}

impl Env {
    fn build(inst: &Instance, cfg: &SuiteConfig) -> Result<Env> {
        Ok(match &inst.body {
            InstanceBody::Finite { .. } => Env::Finite(Box::new(finite::FiniteEnv::build(inst, cfg)?)),
            InstanceBody::Zlattice { .. } => Env::Z(Box::new(integer::ZEnv::build(inst, cfg)?)),
        })
    }

    fn tuples(&self, law: LawId) -> Result<Vec<Tuple>> {
        match self {
            Env::Finite(e) => e.tuples(law),
            Env::Z(e) => Ok(e.tuples(law)),
        }
    }

    fn check(&self, law: LawId, t: &Tuple) -> Result<Checked> {
        match self {
            Env::Finite(e) => e.check(law, t),
            Env::Z(e) => e.check(law, t),
        }
    }
}

fn unsupported(law: LawId, inst: &Instance) -> LawResult {
    LawResult {
        law,
        instance: inst.clone(),
        quantified: 0,
        skipped: 0,
        failures: 0,
        verdict: Verdict::Skipped,
        reason: Some("law not supported on this backend".into()),
        counterexample: None,
        notes: Vec::new(),
    }
}

fn run_law(env: &Env, law: LawId, inst: &Instance) -> Result<LawResult> {
    let mut res = LawResult {
        law,
        instance: inst.clone(),
        quantified: 0,
        skipped: 0,
        failures: 0,
        verdict: Verdict::Skipped,
        reason: None,
        counterexample: None,
        notes: Vec::new(),
    };
    let mut reasons: BTreeMap<String, usize> = BTreeMap::new();
    for t in env.tuples(law)? {
        let c = env.check(law, &t)?;
        if let Some(note) = c.note {
            res.notes.push(Note {
                tuple: t.clone(),
                detail: note,
            });
        }
        match c.status {
            Status::Skip => {
                res.skipped += 1;
                *reasons.entry(c.detail.unwrap_or_default()).or_default() += 1;
            }
            Status::Pass => res.quantified += 1,
            Status::Fail => {
                res.quantified += 1;
                res.failures += 1;
                if res.counterexample.is_none() {
                    res.counterexample = Some(Counterexample {
                        tuple: t,
                        detail: c.detail.unwrap_or_default(),
                    });
                }
            }
        }
    }
    res.verdict = if res.failures > 0 {
        Verdict::Fail
    } else if res.quantified > 0 {
        Verdict::Pass
    } else {
        Verdict::Skipped
    };
    if res.quantified == 0 {
        // most frequent reason; ties go to the alphabetically first
        res.reason = Some(
            reasons
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(r, _)| r.clone())
                .unwrap_or_else(|| "no tuples to quantify over".into()),
        );
    }
    Ok(res)
}

/// Runs one law on one instance.
pub fn check_law(law: LawId, inst: &Instance, cfg: &SuiteConfig) -> Result<LawResult> {
    if !law.supports(inst) {
        return Ok(unsupported(law, inst));
    }
    let env = Env::build(inst, cfg)?;
    run_law(&env, law, inst)
}

/// Rebuilds the instance of a failed result from its descriptor and re-checks
/// the recorded tuple. Returns whether the tuple still fails.
pub fn revalidate_failure(res: &LawResult, cfg: &SuiteConfig) -> Result<bool> {
    let cx = res
        .counterexample
        .as_ref()
        .ok_or_else(|| Error::Precondition("result carries no counterexample".into()))?;
    let env = Env::build(&res.instance, cfg)?;
    Ok(env.check(res.law, &cx.tuple)?.status == Status::Fail)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub results: usize,
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    pub quantified: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anomaly {
    pub law: LawId,
    pub instance: String,
    pub tuple: Tuple,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub caps: Caps,
    pub laws: Vec<LawId>,
    pub instances: usize,
    pub summary: Summary,
    pub results: Vec<LawResult>,
    pub anomalies: Vec<Anomaly>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// Per-law totals as a markdown table.
    pub fn markdown(&self) -> String {
        let mut rows: BTreeMap<LawId, [usize; 4]> = BTreeMap::new();
        for r in &self.results {
            let row = rows.entry(r.law).or_default();
            match r.verdict {
                Verdict::Pass => row[0] += 1,
                Verdict::Fail => row[1] += 1,
                Verdict::Skipped => row[2] += 1,
            }
            row[3] += r.quantified;
        }
        let mut out = String::from("| law | statement | pass | fail | skipped | tuples |\n");
        out.push_str("|---|---|---:|---:|---:|---:|\n");
        for (law, [p, f, s, q]) in &rows {
            out.push_str(&format!("| {law} | {} | {p} | {f} | {s} | {q} |\n", law.statement()));
        }
        out.push_str(&format!(
            "\n{} results: {} pass, {} fail, {} skipped; {} tuples checked; {} anomalies\n",
            self.summary.results,
            self.summary.pass,
            self.summary.fail,
            self.summary.skipped,
            self.summary.quantified,
            self.anomalies.len()
        ));
        out
    }
}

/// Runs every selected law on every instance that supports it.
///
/// Instances are processed in parallel according to `parallelism`; results
/// are ordered by law, then by corpus position, so the report does not depend
/// on the degree of parallelism.
pub fn run_suite(laws: &[LawId], corpus: &[Instance], cfg: &SuiteConfig, parallelism: Parallelism) -> Result<Report> {
    let mut laws: Vec<LawId> = laws.to_vec();
    laws.sort();
    laws.dedup();
    let per_instance: Vec<Result<Vec<LawResult>>> = if laws.is_empty() {
        Vec::new()
    } else {
        parallelism.install(|| {
            par::map(corpus, |inst| {
                let wanted: Vec<LawId> = laws.iter().copied().filter(|l| l.supports(inst)).collect();
                if wanted.is_empty() {
                    return Ok(Vec::new());
                }
                let env = Env::build(inst, cfg)?;
                wanted.into_iter().map(|l| run_law(&env, l, inst)).collect()
            })
        })
    };
    let mut indexed: Vec<(LawId, usize, LawResult)> = Vec::new();
    for (i, r) in per_instance.into_iter().enumerate() {
        for res in r? {
            indexed.push((res.law, i, res));
        }
    }
    indexed.sort_by_key(|(law, i, _)| (*law, *i));
    let results: Vec<LawResult> = indexed.into_iter().map(|(_, _, r)| r).collect();

    let mut summary = Summary {
        results: results.len(),
        ..Summary::default()
    };
    let mut anomalies = Vec::new();
    for r in &results {
        match r.verdict {
            Verdict::Pass => summary.pass += 1,
            Verdict::Fail => summary.fail += 1,
            Verdict::Skipped => summary.skipped += 1,
        }
        summary.quantified += r.quantified;
        for n in &r.notes {
            anomalies.push(Anomaly {
                law: r.law,
                instance: r.instance.name.clone(),
                tuple: n.tuple.clone(),
                detail: n.detail.clone(),
            });
        }
    }
    Ok(Report {
        seed: cfg.seed,
        caps: cfg.caps,
        laws,
        instances: corpus.len(),
        summary,
        results,
        anomalies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{ModuleDesc, Provenance, RingDesc, ZModuleDesc, ZSubDesc};

    fn finite(name: &str, ring: RingDesc, module: ModuleDesc) -> Instance {
        Instance {
            name: name.into(),
            provenance: Provenance::Curated,
            body: InstanceBody::Finite { ring, module },
        }
    }

    fn zmod(n: usize) -> Instance {
        finite(&format!("Z/{n}"), RingDesc::Zmod { n }, ModuleDesc::Regular)
    }

    #[test]
    fn registry_round_trips() {
        for l in LawId::ALL {
            assert_eq!(l.as_str().parse::<LawId>().unwrap(), l);
            assert!(l.supports_finite() || l.supports_z());
        }
        assert!("L9_9".parse::<LawId>().is_err());
    }

    #[test]
    fn t3_2_on_z12_quantifies_every_proper_submodule() {
        let cfg = SuiteConfig::new(1);
        let r = check_law(LawId::T3_2, &zmod(12), &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.quantified, 5);
    }

    #[test]
    fn t3_2_probe_on_truncated_ring() {
        let cfg = SuiteConfig::new(1);
        let inst = finite(
            "F2[x,y]/(x,y)^2",
            RingDesc::Truncpoly { p: 2, vars: 2, order: 2 },
            ModuleDesc::Regular,
        );
        let r = check_law(LawId::T3_2, &inst, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Skipped);
        // x has index 2 in the truncated encoding
        assert!(r.notes.iter().any(|n| n.tuple.n.as_deref() == Some(&[0, 2][..])));
    }

    #[test]
    fn finite_t4_7_is_vacuous() {
        let cfg = SuiteConfig::new(1);
        let r = check_law(LawId::T4_7, &zmod(8), &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Skipped);
        assert_eq!(r.quantified, 0);
        assert_eq!(r.reason.as_deref(), Some(finite::T4_7_VACUOUS));
    }

    #[test]
    fn local_laws_fire_on_z8() {
        let cfg = SuiteConfig::new(1);
        for law in [LawId::T2_11, LawId::C2_12, LawId::T4_2, LawId::P4_1] {
            let r = check_law(law, &zmod(8), &cfg).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{law}");
            assert!(r.quantified > 0, "{law}");
        }
    }

    #[test]
    fn t4_7_on_four_z() {
        let cfg = SuiteConfig::new(1);
        let inst = Instance {
            name: "Z".into(),
            provenance: Provenance::Curated,
            body: InstanceBody::Zlattice {
                zmodule: ZModuleDesc { rank: 1, relations: vec![] },
                zsubs: vec![ZSubDesc { gens: vec![vec![4]] }],
            },
        };
        let r = check_law(LawId::T4_7, &inst, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.quantified, 1);
    }

    #[test]
    fn mutation_is_detected_and_revalidates() {
        let cfg = SuiteConfig {
            mutation: Mutation::PrimaryWithoutRadical,
            ..SuiteConfig::new(1)
        };
        let r = check_law(LawId::L2_2, &zmod(4), &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(revalidate_failure(&r, &cfg).unwrap());
        assert!(!revalidate_failure(&r, &SuiteConfig::new(1)).unwrap());
    }

    #[test]
    fn empty_selection_gives_empty_report() {
        let rep = run_suite(&[], &[zmod(6)], &SuiteConfig::new(3), Parallelism::Sequential).unwrap();
        assert!(rep.results.is_empty());
        assert!(rep.passed());
    }

    #[test]
    fn unsupported_backend_is_skipped() {
        let r = check_law(LawId::C4_8, &zmod(6), &SuiteConfig::new(0)).unwrap();
        assert_eq!(r.verdict, Verdict::Skipped);
        assert_eq!(r.quantified, 0);
    }
}
