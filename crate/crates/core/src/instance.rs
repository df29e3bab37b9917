//! Serializable descriptors for rings, modules and submodules.
//!
//! A descriptor is a small JSON value that rebuilds the same table structure
//! every time. Element references inside descriptors (ideal generators,
//! submodule generators) are canonical element indices of the structure the
//! descriptor is built on:
//!
//! * `Z/n`: the residue `a` has index `a`.
//! * `F_p[x]/(f)`: the polynomial `c_0 + c_1 x + ..` has index `c_0 + c_1 p + ..`.
//! * `F_p[x_1..x_v]/(x_1..x_v)^k`: the coefficient vector over monomials of
//!   total degree `< k` (graded, then lexicographic) read as a base-`p` number.
//! * products: `(a, b)` has index `a |B| + b`.
//! * quotients: cosets numbered by their smallest representative.
//! * direct sums: `(x, y)` has index `x |N| + y`.
//!
//! Integer-lattice modules are given by the ambient rank and relation
//! columns, submodules by generator columns.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finmod::{self, ModuleTable, Submodule};
use crate::finring::{self, RingTable};
use crate::zlattice::{ZModule, ZSubmodule};

/// Size caps applied when building instances and enumerating lattices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub ring: usize,
    pub module: usize,
    pub lattice: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            ring: 64,
            module: 200,
            lattice: finmod::DEFAULT_LATTICE_CAP,
        }
    }
}

impl Caps {
    /// Parses `"ring=64,module=200,lattice=512"`; missing keys keep their defaults.
    pub fn parse(s: &str) -> Result<Caps> {
        let mut caps = Caps::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("cap entry `{part}` is not key=value")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("cap value `{value}` is not a number")))?;
            match key.trim() {
                "ring" => caps.ring = value,
                "module" => caps.module = value,
                "lattice" => caps.lattice = value,
                other => return Err(Error::Parse(format!("unknown cap `{other}`"))),
            }
        }
        Ok(caps)
    }

    /// Defaults overridden by the `SMLAB_CAPS` environment variable, if set.
    pub fn from_env() -> Result<Caps> {
        match std::env::var("SMLAB_CAPS") {
            Ok(s) => Caps::parse(&s),
            Err(_) => Ok(Caps::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RingDesc {
    Zmod { n: usize },
    Gfpoly { p: usize, modulus: Vec<usize> },
    Truncpoly { p: usize, vars: usize, order: usize },
    Product { factors: Vec<RingDesc> },
    Quotient { base: Box<RingDesc>, ideal_gens: Vec<usize> },
}

impl RingDesc {
    pub fn build(&self, caps: &Caps) -> Result<RingTable> {
        let r = match self {
            RingDesc::Zmod { n } => {
                if *n > caps.ring {
                    return Err(Error::cap("ring", *n, caps.ring));
                }
                finring::ring_zmod(*n)?
            }
            RingDesc::Gfpoly { p, modulus } => {
                let size = p.checked_pow(modulus.len().saturating_sub(1) as u32).unwrap_or(usize::MAX);
                if size > caps.ring {
                    return Err(Error::cap("ring", size, caps.ring));
                }
                finring::ring_polyquot(*p, modulus)?
            }
            RingDesc::Truncpoly { p, vars, order } => finring::ring_truncated(*p, *vars, *order)?,
            RingDesc::Product { factors } => {
                let mut it = factors.iter();
                let first = it
                    .next()
                    .ok_or_else(|| Error::Parse("product ring needs at least one factor".into()))?;
                let mut acc = first.build(caps)?;
                for f in it {
                    let next = f.build(caps)?;
                    if acc.size().saturating_mul(next.size()) > caps.ring {
                        return Err(Error::cap("ring", acc.size() * next.size(), caps.ring));
                    }
                    acc = finring::ring_product(&acc, &next)?;
                }
                acc
            }
            RingDesc::Quotient { base, ideal_gens } => {
                let b = base.build(caps)?;
                let i = finring::ideal_generated(&b, ideal_gens)?;
                finring::ring_quotient(&b, &i)?.0
            }
        };
        if r.size() > caps.ring {
            return Err(Error::cap("ring", r.size(), caps.ring));
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModuleDesc {
    Regular,
    Cyclic { ideal_gens: Vec<usize> },
    Dsum { parts: Vec<ModuleDesc> },
    Quotient { base: Box<ModuleDesc>, sub_gens: Vec<usize> },
}

impl ModuleDesc {
    pub fn build(&self, r: &Arc<RingTable>, caps: &Caps) -> Result<ModuleTable> {
        let m = match self {
            ModuleDesc::Regular => finmod::mod_regular(r)?,
            ModuleDesc::Cyclic { ideal_gens } => {
                let i = finring::ideal_generated(r, ideal_gens)?;
                finmod::mod_cyclic(r, &i)?
            }
            ModuleDesc::Dsum { parts } => {
                let mut it = parts.iter();
                let first = it
                    .next()
                    .ok_or_else(|| Error::Parse("direct sum needs at least one part".into()))?;
                let mut acc = first.build(r, caps)?;
                for p in it {
                    let next = p.build(r, caps)?;
                    if acc.size().saturating_mul(next.size()) > caps.module {
                        return Err(Error::cap("module", acc.size() * next.size(), caps.module));
                    }
                    acc = finmod::mod_direct_sum(&acc, &next)?;
                }
                acc
            }
            ModuleDesc::Quotient { base, sub_gens } => {
                let b = base.build(r, caps)?;
                let n = finmod::submodule_generated(&b, sub_gens)?;
                finmod::mod_quotient(&b, &n)?.0
            }
        };
        if m.size() > caps.module {
            return Err(Error::cap("module", m.size(), caps.module));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubDesc {
    pub gens: Vec<usize>,
}

impl SubDesc {
    pub fn build(&self, m: &ModuleTable) -> Result<Submodule> {
        finmod::submodule_generated(m, &self.gens)
    }
}

/// `Z^rank / span(relations)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZModuleDesc {
    pub rank: usize,
    #[serde(default)]
    pub relations: Vec<Vec<i64>>,
}

impl ZModuleDesc {
    pub fn build(&self) -> Result<ZModule> {
        check_columns(self.rank, &self.relations)?;
        ZModule::from_i64(self.rank, &self.relations)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZSubDesc {
    pub gens: Vec<Vec<i64>>,
}

impl ZSubDesc {
    pub fn build(&self, m: &ZModule) -> Result<ZSubmodule> {
        check_columns(m.rank(), &self.gens)?;
        m.sub_i64(&self.gens)
    }
}

fn check_columns(rank: usize, cols: &[Vec<i64>]) -> Result<()> {
    if let Some(c) = cols.iter().find(|c| c.len() != rank) {
        return Err(Error::Parse(format!(
            "column of length {} in an ambient lattice of rank {rank}",
            c.len()
        )));
    }
    Ok(())
}

/// The document read by the command-line front end.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring: Option<RingDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module: Option<ModuleDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submodule: Option<SubDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zmodule: Option<ZModuleDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zsub: Option<ZSubDesc>,
}

impl InstanceFile {
    pub fn from_json(s: &str) -> Result<InstanceFile> {
        let f: InstanceFile = serde_json::from_str(s)?;
        let finite = f.ring.is_some() || f.module.is_some() || f.submodule.is_some();
        let integer = f.zmodule.is_some() || f.zsub.is_some();
        if finite && integer {
            return Err(Error::Parse("a file describes either a finite or an integer instance".into()));
        }
        if f.submodule.is_some() && f.ring.is_none() {
            return Err(Error::Parse("submodule given without a ring".into()));
        }
        if f.zsub.is_some() && f.zmodule.is_none() {
            return Err(Error::Parse("zsub given without a zmodule".into()));
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptors always serialize")
    }

    /// The finite ring and module; a missing module means the regular one.
    pub fn build_finite(&self, caps: &Caps) -> Result<ModuleTable> {
        let ring = self
            .ring
            .as_ref()
            .ok_or_else(|| Error::Parse("the file has no \"ring\" descriptor".into()))?;
        let r = Arc::new(ring.build(caps)?);
        self.module.clone().unwrap_or(ModuleDesc::Regular).build(&r, caps)
    }

    pub fn build_z(&self) -> Result<ZModule> {
        self.zmodule
            .as_ref()
            .ok_or_else(|| Error::Parse("the file has no \"zmodule\" descriptor".into()))?
            .build()
    }
}

/// Where an instance came from: a curated name or a seeded draw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "from", rename_all = "lowercase")]
pub enum Provenance {
    Curated,
    Seed { seed: u64, draw: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
pub enum InstanceBody {
    Finite { ring: RingDesc, module: ModuleDesc },
    Zlattice { zmodule: ZModuleDesc, zsubs: Vec<ZSubDesc> },
}

/// One corpus entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub provenance: Provenance,
    #[serde(flatten)]
    pub body: InstanceBody,
}

impl Instance {
    pub fn is_finite(&self) -> bool {
        matches!(self.body, InstanceBody::Finite { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caps_parse_and_reject() {
        let c = Caps::parse("ring=16, lattice=40").unwrap();
        assert_eq!(c, Caps { ring: 16, module: 200, lattice: 40 });
        assert!(matches!(Caps::parse("ring"), Err(Error::Parse(_))));
        assert!(matches!(Caps::parse("size=3"), Err(Error::Parse(_))));
        assert!(matches!(Caps::parse("ring=x"), Err(Error::Parse(_))));
    }

    #[test]
    fn descriptors_build() {
        let caps = Caps::default();
        let f: InstanceFile = InstanceFile::from_json(
            r#"{"ring":{"kind":"product","factors":[{"kind":"zmod","n":2},{"kind":"gfpoly","p":2,"modulus":[1,1,1]}]},
                "module":{"kind":"dsum","parts":[{"kind":"regular"},{"kind":"cyclic","ideal_gens":[1]}]}}"#,
        )
        .unwrap();
        let m = f.build_finite(&caps).unwrap();
        assert_eq!(m.ring().size(), 8);
        // R ⊕ R/(0,1) with R = Z/2 × F4: 8 · 2
        assert_eq!(m.size(), 16);

        let q = RingDesc::Quotient {
            base: Box::new(RingDesc::Zmod { n: 12 }),
            ideal_gens: vec![8],
        };
        assert_eq!(q.build(&caps).unwrap().size(), 4);

        let t = RingDesc::Truncpoly { p: 2, vars: 2, order: 2 };
        assert_eq!(t.build(&caps).unwrap().size(), 8);
    }

    #[test]
    fn caps_are_enforced() {
        let caps = Caps { ring: 10, module: 20, lattice: 512 };
        assert!(matches!(RingDesc::Zmod { n: 11 }.build(&caps), Err(Error::CapExceeded { .. })));
        let r = Arc::new(RingDesc::Zmod { n: 5 }.build(&caps).unwrap());
        let d = ModuleDesc::Dsum { parts: vec![ModuleDesc::Regular; 2] };
        assert!(matches!(d.build(&r, &caps), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn file_round_trip_and_errors() {
        let src = r#"{"zmodule":{"rank":2,"relations":[[0,3]]},"zsub":{"gens":[[2,0]]}}"#;
        let f = InstanceFile::from_json(src).unwrap();
        let again = InstanceFile::from_json(&f.to_json()).unwrap();
        assert_eq!(f, again);
        assert_eq!(f.to_json(), again.to_json());
        assert!(matches!(InstanceFile::from_json("{\"ring\":"), Err(Error::Parse(_))));
        assert!(matches!(
            InstanceFile::from_json(r#"{"ring":{"kind":"zmod","n":4},"zmodule":{"rank":1}}"#),
            Err(Error::Parse(_))
        ));
        let bad = InstanceFile::from_json(r#"{"zmodule":{"rank":2,"relations":[[1]]}}"#).unwrap();
        assert!(matches!(bad.build_z(), Err(Error::Parse(_))));
    }

    #[test]
    fn instance_round_trip() {
        let inst = Instance {
            name: "Z/6 + Z/2".into(),
            provenance: Provenance::Seed { seed: 42, draw: 3 },
            body: InstanceBody::Finite {
                ring: RingDesc::Zmod { n: 6 },
                module: ModuleDesc::Dsum {
                    parts: vec![ModuleDesc::Regular, ModuleDesc::Cyclic { ideal_gens: vec![2] }],
                },
            },
        };
        let s = serde_json::to_string(&inst).unwrap();
        let back: Instance = serde_json::from_str(&s).unwrap();
        assert_eq!(inst, back);
        assert_eq!(s, serde_json::to_string(&back).unwrap());
    }
}
