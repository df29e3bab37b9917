//! Deterministic instance corpora.

use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{Caps, Instance, InstanceBody, ModuleDesc, Provenance, RingDesc, ZModuleDesc, ZSubDesc};

/// Number of seeded random quotient modules added to the curated list.
const RANDOM_DRAWS: usize = 12;

/// Which part of the corpus a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Finite table modules.
    Core,
    /// Integer lattices.
    Z,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        match s {
            "core" => Ok(Suite::Core),
            "z" => Ok(Suite::Z),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!("unknown suite `{other}` (expected core, z or all)"))),
        }
    }
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Core => "core",
            Suite::Z => "z",
            Suite::All => "all",
        }
    }

    pub fn select(self, corpus: &[Instance]) -> Vec<Instance> {
        corpus
            .iter()
            .filter(|i| match self {
                Suite::Core => i.is_finite(),
                Suite::Z => !i.is_finite(),
                Suite::All => true,
            })
            .cloned()
            .collect()
    }
}

fn zmod(n: usize) -> RingDesc {
    RingDesc::Zmod { n }
}

fn gf(p: usize, modulus: &[usize]) -> RingDesc {
    RingDesc::Gfpoly {
        p,
        modulus: modulus.to_vec(),
    }
}

fn prod(factors: Vec<RingDesc>) -> RingDesc {
    RingDesc::Product { factors }
}

fn cyclic(gens: &[usize]) -> ModuleDesc {
    ModuleDesc::Cyclic {
        ideal_gens: gens.to_vec(),
    }
}

fn dsum(parts: Vec<ModuleDesc>) -> ModuleDesc {
    ModuleDesc::Dsum { parts }
}

fn regular_power(k: usize) -> ModuleDesc {
    dsum(vec![ModuleDesc::Regular; k])
}

fn ring_name(r: &RingDesc) -> String {
    match r {
        RingDesc::Zmod { n } => format!("Z/{n}"),
        RingDesc::Gfpoly { p, modulus } => {
            let terms: Vec<String> = modulus
                .iter()
                .enumerate()
                .rev()
                .filter(|(_, c)| **c != 0)
                .map(|(i, c)| {
                    let mono = match i {
                        0 => String::new(),
                        1 => "x".into(),
                        _ => format!("x^{i}"),
                    };
                    match (*c, mono.is_empty()) {
                        (1, false) => mono,
                        (c, _) => format!("{c}{mono}"),
                    }
                })
                .collect();
            format!("F{p}[x]/({})", terms.join("+"))
        }
        RingDesc::Truncpoly { p, vars, order } => format!("F{p}[{vars} vars]/m^{order}"),
        RingDesc::Product { factors } => factors.iter().map(ring_name).collect::<Vec<_>>().join(" x "),
        RingDesc::Quotient { base, ideal_gens } => format!("({})/{ideal_gens:?}", ring_name(base)),
    }
}

fn module_name(m: &ModuleDesc) -> String {
    match m {
        ModuleDesc::Regular => "R".into(),
        ModuleDesc::Cyclic { ideal_gens } => format!("R/{ideal_gens:?}"),
        ModuleDesc::Dsum { parts } => parts.iter().map(module_name).collect::<Vec<_>>().join(" + "),
        ModuleDesc::Quotient { base, sub_gens } => format!("({})/{sub_gens:?}", module_name(base)),
    }
}

fn finite_curated() -> Vec<(RingDesc, ModuleDesc)> {
    use ModuleDesc::Regular;
    let mut out = Vec::new();
    for n in 2..=30 {
        out.push((zmod(n), Regular));
    }
    // every monic modulus over F2 up to degree 3
    for d in 1..=3usize {
        for low in 0..(1usize << d) {
            let mut f: Vec<usize> = (0..d).map(|i| (low >> i) & 1).collect();
            f.push(1);
            out.push((gf(2, &f), Regular));
        }
    }
    // every monic modulus over F3 up to degree 2, a few cubics
    for d in 1..=2usize {
        for low in 0..3usize.pow(d as u32) {
            let mut f: Vec<usize> = (0..d).map(|i| (low / 3usize.pow(i as u32)) % 3).collect();
            f.push(1);
            out.push((gf(3, &f), Regular));
        }
    }
    for f in [[0, 0, 0, 1], [1, 2, 0, 1], [0, 2, 0, 1], [2, 0, 1, 1], [0, 0, 1, 1]] {
        out.push((gf(3, &f), Regular));
    }

    let plane = RingDesc::Truncpoly { p: 2, vars: 2, order: 2 };
    out.push((plane.clone(), Regular));
    // the same ring as F2[x,y]/(x,y)^3 modulo x^2, xy, y^2
    out.push((
        RingDesc::Quotient {
            base: Box::new(RingDesc::Truncpoly { p: 2, vars: 2, order: 3 }),
            ideal_gens: vec![8, 16, 32],
        },
        Regular,
    ));
    out.push((RingDesc::Truncpoly { p: 3, vars: 2, order: 2 }, Regular));
    out.push((RingDesc::Truncpoly { p: 2, vars: 3, order: 2 }, Regular));
    out.push((plane.clone(), cyclic(&[2])));
    out.push((plane.clone(), dsum(vec![Regular, cyclic(&[2, 4])])));
    out.push((
        RingDesc::Quotient {
            base: Box::new(zmod(24)),
            ideal_gens: vec![8],
        },
        Regular,
    ));

    let f4 = gf(2, &[1, 1, 1]);
    let dual = gf(2, &[0, 0, 1]);
    out.push((prod(vec![zmod(2), zmod(2)]), Regular));
    out.push((prod(vec![zmod(2), zmod(2), zmod(2)]), Regular));
    out.push((prod(vec![zmod(2), zmod(4)]), Regular));
    out.push((prod(vec![zmod(4), zmod(4)]), Regular));
    out.push((prod(vec![zmod(3), zmod(3)]), Regular));
    out.push((prod(vec![zmod(3), zmod(9)]), Regular));
    out.push((prod(vec![zmod(8), zmod(8)]), Regular));
    out.push((prod(vec![zmod(2), f4.clone()]), Regular));
    out.push((prod(vec![f4.clone(), f4.clone()]), Regular));
    out.push((prod(vec![zmod(4), dual.clone()]), Regular));
    out.push((prod(vec![zmod(2), plane.clone()]), Regular));
    out.push((prod(vec![zmod(2), zmod(2)]), regular_power(2)));

    for (n, gens) in [(12, 4), (12, 6), (8, 4), (30, 6), (36, 4)] {
        out.push((zmod(n), cyclic(&[gens])));
    }
    out.push((zmod(2), regular_power(2)));
    out.push((zmod(2), regular_power(3)));
    out.push((zmod(2), regular_power(4)));
    out.push((zmod(3), regular_power(2)));
    out.push((zmod(3), regular_power(3)));
    out.push((zmod(5), regular_power(2)));
    out.push((zmod(4), regular_power(2)));
    out.push((zmod(4), dsum(vec![Regular, cyclic(&[2])])));
    out.push((zmod(8), dsum(vec![Regular, cyclic(&[4])])));
    out.push((zmod(8), dsum(vec![Regular, cyclic(&[2])])));
    out.push((zmod(9), dsum(vec![Regular, cyclic(&[3])])));
    out.push((zmod(6), regular_power(2)));
    out.push((zmod(6), dsum(vec![Regular, cyclic(&[2])])));
    out.push((zmod(12), dsum(vec![Regular, cyclic(&[6])])));
    out.push((zmod(4), dsum(vec![cyclic(&[2]), cyclic(&[2]), Regular])));
    out.push((f4.clone(), regular_power(2)));
    out.push((dual.clone(), regular_power(2)));
    out.push((dual.clone(), dsum(vec![Regular, cyclic(&[2])])));
    out.push((
        zmod(4),
        ModuleDesc::Quotient {
            base: Box::new(regular_power(2)),
            sub_gens: vec![6],
        },
    ));
    out
}

/// Bases for seeded random quotients.
fn random_bases() -> Vec<(RingDesc, ModuleDesc)> {
    use ModuleDesc::Regular;
    vec![
        (zmod(4), regular_power(2)),
        (zmod(2), regular_power(3)),
        (zmod(6), regular_power(2)),
        (zmod(8), dsum(vec![Regular, cyclic(&[2])])),
        (zmod(9), dsum(vec![Regular, cyclic(&[3])])),
        (gf(2, &[0, 0, 1]), regular_power(2)),
        (RingDesc::Truncpoly { p: 2, vars: 2, order: 2 }, regular_power(2)),
        (zmod(12), dsum(vec![Regular, cyclic(&[6])])),
    ]
}

/// A named integer module with the generator lists of its submodules.
type ZCase = (&'static str, ZModuleDesc, Vec<Vec<Vec<i64>>>);

fn z_curated() -> Vec<ZCase> {
    let m = |rank: usize, relations: Vec<Vec<i64>>| ZModuleDesc { rank, relations };
    let line = |a: i64| vec![vec![a, 0], vec![0, 1]];
    vec![
        (
            "Z",
            m(1, vec![]),
            [2, 3, 4, 5, 6, 8, 9, 12, 16, 25, 27, 30]
                .iter()
                .map(|&a| vec![vec![a]])
                .chain(std::iter::once(vec![]))
                .collect(),
        ),
        (
            "Z^2",
            m(2, vec![]),
            vec![
                vec![vec![4, 0], vec![0, 4]],
                line(4),
                line(8),
                vec![vec![9, 0], vec![0, 9]],
                vec![vec![2, 0], vec![1, 3]],
                vec![vec![4, 0], vec![0, 2]],
                vec![vec![6, 0], vec![0, 6]],
                vec![vec![1, 0]],
                vec![],
                vec![vec![2, 0], vec![0, 2]],
            ],
        ),
        (
            "Z+Z/2",
            m(2, vec![vec![0, 2]]),
            vec![
                line(9),
                line(4),
                line(8),
                line(25),
                line(27),
                vec![vec![0, 1]],
                line(6),
                vec![],
                vec![vec![4, 0]],
                vec![vec![9, 0]],
            ],
        ),
        (
            "Z+Z/3",
            m(2, vec![vec![0, 3]]),
            vec![line(4), line(8), line(9), line(16), vec![], line(12), line(25)],
        ),
        (
            "Z+Z/4",
            m(2, vec![vec![0, 4]]),
            vec![line(9), line(4), vec![vec![8, 0], vec![0, 2]], line(49), line(27)],
        ),
        ("Z+Z/6", m(2, vec![vec![0, 6]]), vec![line(4), line(25), line(9)]),
        ("Z/8", m(1, vec![vec![8]]), vec![vec![vec![4]], vec![vec![2]], vec![]]),
        (
            "Z/12",
            m(1, vec![vec![12]]),
            vec![vec![vec![6]], vec![vec![4]], vec![vec![3]], vec![vec![2]], vec![]],
        ),
        (
            "Z/2+Z/4",
            m(2, vec![vec![2, 0], vec![0, 4]]),
            vec![vec![], vec![vec![1, 0]], vec![vec![0, 2]], vec![vec![1, 2]], vec![vec![0, 1]]],
        ),
        (
            "Z/3+Z/9",
            m(2, vec![vec![3, 0], vec![0, 9]]),
            vec![vec![vec![0, 3]], vec![vec![1, 0]], vec![]],
        ),
        (
            "Z^2/<(2,0),(1,3)>",
            m(2, vec![vec![2, 0], vec![1, 3]]),
            vec![vec![], vec![vec![2, 0]]],
        ),
        (
            "Z/5+Z/25",
            m(2, vec![vec![5, 0], vec![0, 25]]),
            vec![vec![vec![0, 5]], vec![]],
        ),
    ]
}

fn fits(ring: &RingDesc, module: &ModuleDesc, caps: &Caps) -> Option<usize> {
    let r = ring.build(caps).ok()?;
    let m = module.build(&Arc::new(r), caps).ok()?;
    Some(m.size())
}

/// The default corpus: curated finite modules, seeded random quotients of
/// small direct sums, and the curated integer-lattice family. Finite entries
/// that exceed `caps` are left out. The result depends only on `seed` and
/// `caps`.
pub fn generate_corpus(seed: u64, caps: &Caps) -> Vec<Instance> {
    let mut out: Vec<Instance> = Vec::new();
    let mut seen: Vec<(RingDesc, ModuleDesc)> = Vec::new();
    for (ring, module) in finite_curated() {
        if fits(&ring, &module, caps).is_some() && !seen.contains(&(ring.clone(), module.clone())) {
            out.push(Instance {
                name: format!("{} over {}", module_name(&module), ring_name(&ring)),
                provenance: Provenance::Curated,
                body: InstanceBody::Finite {
                    ring: ring.clone(),
                    module: module.clone(),
                },
            });
            seen.push((ring, module));
        }
    }

    let bases: Vec<(RingDesc, ModuleDesc, usize)> = random_bases()
        .into_iter()
        .filter_map(|(r, m)| fits(&r, &m, caps).map(|size| (r, m, size)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = 0;
    let mut attempts = 0;
    while draws < RANDOM_DRAWS && !bases.is_empty() && attempts < 20 * RANDOM_DRAWS {
        attempts += 1;
        let (ring, base, size) = &bases[rng.random_range(0..bases.len())];
        let x = rng.random_range(1..*size);
        let module = ModuleDesc::Quotient {
            base: Box::new(base.clone()),
            sub_gens: vec![x],
        };
        let key = (ring.clone(), module.clone());
        if seen.contains(&key) || fits(ring, &module, caps).is_none_or(|s| s < 2) {
            continue;
        }
        out.push(Instance {
            name: format!("{} over {}", module_name(&module), ring_name(ring)),
            provenance: Provenance::Seed { seed, draw: draws },
            body: InstanceBody::Finite {
                ring: ring.clone(),
                module,
            },
        });
        seen.push(key);
        draws += 1;
    }

    for (name, zmodule, subs) in z_curated() {
        out.push(Instance {
            name: name.into(),
            provenance: Provenance::Curated,
            body: InstanceBody::Zlattice {
                zmodule,
                zsubs: subs.into_iter().map(|gens| ZSubDesc { gens }).collect(),
            },
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic_and_sized() {
        let caps = Caps::default();
        let a = generate_corpus(42, &caps);
        let b = generate_corpus(42, &caps);
        assert_eq!(a, b);
        let finite = Suite::Core.select(&a);
        assert!(finite.len() >= 60, "{}", finite.len());
        let cases: usize = Suite::Z
            .select(&a)
            .iter()
            .map(|i| match &i.body {
                InstanceBody::Zlattice { zsubs, .. } => zsubs.len(),
                _ => 0,
            })
            .sum();
        assert!(cases >= 50, "{cases}");
        assert!(a.iter().any(|i| matches!(
            &i.body,
            InstanceBody::Finite { ring: RingDesc::Truncpoly { p: 2, vars: 2, order: 2 }, module: ModuleDesc::Regular }
        )));
    }

    #[test]
    fn seeds_change_only_random_draws() {
        let caps = Caps::default();
        let a = generate_corpus(1, &caps);
        let b = generate_corpus(2, &caps);
        let curated = |v: &[Instance]| -> Vec<Instance> {
            v.iter().filter(|i| i.provenance == Provenance::Curated).cloned().collect()
        };
        assert_eq!(curated(&a), curated(&b));
    }

    #[test]
    fn suite_names() {
        assert_eq!("core".parse::<Suite>().unwrap(), Suite::Core);
        assert!(matches!("bogus".parse::<Suite>(), Err(Error::Parse(_))));
    }
}
