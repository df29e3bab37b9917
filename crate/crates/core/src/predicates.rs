//! Submodule-property checkers over finite modules.
//!
//! Every predicate works on a [`ModuleContext`], which owns the module, its
//! submodule lattice and lazily computed helpers (ideal lattice of the ring,
//! localizations at maximal ideals, meet/join tables). False verdicts carry a
//! witness that [`revalidate`] can re-check from raw membership vectors.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::bits::ElemSet;
use crate::error::{Error, Result};
use crate::finmod::{
    self, colon_ideal_by_gens, ideal_times_by_gens, Localization, ModuleTable, Submodule,
    SubmoduleLattice,
};
use crate::finring::{self, IdealSet, PrimeWitness, RingTable};
use crate::par;

/// Above this many submodules the quadratic meet/join tables are refused.
pub const MAX_TABLE_LATTICE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Path {
    Definition,
    Fast,
}

/// Deliberate defects used to show the law suite can detect a broken checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// The primary check compares against `(N :_R M)` instead of its radical.
    PrimaryWithoutRadical,
}

/// Evidence attached to a verdict. Submodules and ideals are member lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Two submodules: for irreducibility `K ∩ L = N` with both strictly above
    /// `N`; for strong irreducibility `K ∩ L ⊆ N` with neither inside `N`;
    /// for sheltered / uniserial two incomparable submodules.
    SubmodulePair { k: Vec<usize>, l: Vec<usize> },
    /// `r x ∈ N`, `x ∉ N`, and `r` outside the relevant ideal.
    ElementPair { r: usize, x: usize },
    AssociatedPrime { prime: Vec<usize> },
    AdjointPrime { prime: Vec<usize> },
    /// `a, b ∈ Z_R(M/N)` with `a + b ∉ Z_R(M/N)`.
    ZeroDivisorSum { a: usize, b: usize },
    Shelter { shelter: Vec<usize> },
    /// `(K + L) ∩ N ≠ (K ∩ N) + (L ∩ N)` (condition `i`) or
    /// `(K ∩ L) + N ≠ (K + N) ∩ (L + N)` (condition `ii`).
    DistributiveTriple {
        condition: String,
        n: Vec<usize>,
        k: Vec<usize>,
        l: Vec<usize>,
    },
    /// `K ≠ (K :_R M) M`, or `J ≠ (J :_R K) K` when `j` is present.
    NotMultiplication { k: Vec<usize>, j: Option<Vec<usize>> },
    /// Two incomparable submodules of `M` whose images in `M_𝔭` are incomparable.
    LocalPair {
        prime: Vec<usize>,
        k: Vec<usize>,
        l: Vec<usize>,
    },
    /// A triple breaking `(K+L):N = (K:N)+(L:N)` (`iii`) or
    /// `K:(L∩N) = (K:L)+(K:N)` (`iv`).
    ColonTriple {
        identity: String,
        k: Vec<usize>,
        l: Vec<usize>,
        n: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyVerdict {
    pub property: String,
    pub verdict: bool,
    pub witness: Option<Witness>,
    pub path: Path,
}

impl PropertyVerdict {
    fn new(property: &str, verdict: bool, witness: Option<Witness>, path: Path) -> Self {
        PropertyVerdict {
            property: property.to_string(),
            verdict,
            witness,
            path,
        }
    }
}

struct IdealIndex {
    list: Vec<IdealSet>,
    index: HashMap<ElemSet, usize>,
    sum: Vec<u32>,
}

/// One localization `M_𝔭` together with its own submodule lattice.
pub struct LocalPiece {
    pub prime: IdealSet,
    pub loc: Localization,
    pub lattice: SubmoduleLattice,
}

/// A module plus everything predicates need about it.
pub struct ModuleContext {
    module: Arc<ModuleTable>,
    lattice: SubmoduleLattice,
    whole_gens: Vec<usize>,
    mutation: Mutation,
    ideals: OnceLock<Result<IdealIndex>>,
    maximal: OnceLock<Result<Vec<PrimeWitness>>>,
    locals: OnceLock<Result<Vec<LocalPiece>>>,
}

impl std::fmt::Debug for ModuleContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModuleContext")
            .field("module", &self.module.label())
            .field("submodules", &self.lattice.len())
            .finish()
    }
}

impl ModuleContext {
    pub fn new(module: ModuleTable) -> Result<Self> {
        Self::with_cap(module, finmod::DEFAULT_LATTICE_CAP)
    }

    pub fn with_cap(module: ModuleTable, cap: usize) -> Result<Self> {
        let lattice = finmod::enumerate_submodules_with_cap(&module, cap)?;
        let module = lattice.module().clone();
        let whole_gens = lattice.generators(lattice.top()).to_vec();
        Ok(ModuleContext {
            module,
            lattice,
            whole_gens,
            mutation: Mutation::None,
            ideals: OnceLock::new(),
            maximal: OnceLock::new(),
            locals: OnceLock::new(),
        })
    }

    pub fn with_mutation(mut self, mutation: Mutation) -> Self {
        self.mutation = mutation;
        self
    }

    pub fn module(&self) -> &Arc<ModuleTable> {
        &self.module
    }
    pub fn ring(&self) -> &Arc<RingTable> {
        self.module.ring()
    }
    pub fn lattice(&self) -> &SubmoduleLattice {
        &self.lattice
    }
    pub fn mutation(&self) -> Mutation {
        self.mutation
    }

    /// Proper submodules in canonical order.
    pub fn proper_submodules(&self) -> impl Iterator<Item = &Submodule> {
        self.lattice.iter().filter(|s| !s.is_whole())
    }

    /// `(N :_R M)`.
    pub fn colon_m(&self, n: &Submodule) -> IdealSet {
        colon_ideal_by_gens(&self.module, n, &self.whole_gens)
    }

    /// `𝔞 M`.
    pub fn ideal_times_m(&self, a: &IdealSet) -> Submodule {
        ideal_times_by_gens(&self.module, a, &self.whole_gens)
    }

    pub fn maximal_ideals(&self) -> Result<&[PrimeWitness]> {
        self.maximal
            .get_or_init(|| finring::maximal_ideals(self.ring()))
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(Clone::clone)
    }

    /// `M_𝔪` with lattice for every maximal ideal `𝔪` of `R`.
    pub fn localizations(&self) -> Result<&[LocalPiece]> {
        self.locals
            .get_or_init(|| {
                let mut out = Vec::new();
                for p in self.maximal_ideals()? {
                    let loc = finmod::localize(&self.module, p)?;
                    let lattice = finmod::enumerate_submodules_with_cap(&loc.module, usize::MAX)?;
                    out.push(LocalPiece {
                        prime: p.ideal.clone(),
                        loc,
                        lattice,
                    });
                }
                Ok(out)
            })
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(Clone::clone)
    }

    fn ideal_index(&self) -> Result<&IdealIndex> {
        self.ideals
            .get_or_init(|| {
                let r = self.ring();
                let list = finring::enumerate_ideals(r)?;
                let index: HashMap<ElemSet, usize> =
                    list.iter().enumerate().map(|(i, s)| (s.members().clone(), i)).collect();
                let t = list.len();
                let mut sum = Vec::with_capacity(t * t);
                for a in &list {
                    for b in &list {
                        let s = finring::ideal_sum(r, a, b)?;
                        sum.push(index[s.members()] as u32);
                    }
                }
                Ok(IdealIndex { list, index, sum })
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Lattice index of `n`, rejecting foreign sets.
    pub fn index_of(&self, n: &Submodule) -> Result<usize> {
        if n.members().universe() != self.module.size() {
            return Err(Error::Mismatch("submodule belongs to a different module".into()));
        }
        self.lattice
            .index_of(n)
            .ok_or_else(|| Error::Mismatch("set is not a submodule of this module".into()))
    }

    fn proper_index(&self, n: &Submodule) -> Result<usize> {
        let i = self.index_of(n)?;
        if n.is_whole() {
            return Err(Error::Precondition("N = M: the predicate needs a proper submodule".into()));
        }
        Ok(i)
    }

    fn require_tables(&self) -> Result<()> {
        if self.lattice.len() > MAX_TABLE_LATTICE {
            return Err(Error::cap("submodule lattice (meet/join tables)", self.lattice.len(), MAX_TABLE_LATTICE));
        }
        Ok(())
    }

    fn members(&self, i: usize) -> Vec<usize> {
        self.lattice.get(i).to_vec()
    }
}

/// First pair `(i, j)`, `i ≤ j` in list order, accepted by `hit`.
fn first_pair(items: &[usize], hit: impl Fn(usize, usize) -> bool + Sync + Send) -> Option<(usize, usize)> {
    let positions: Vec<usize> = (0..items.len()).collect();
    par::find_first_map(&positions, |&a| {
        items[a..]
            .iter()
            .find(|&&b| hit(items[a], b))
            .map(|&b| (items[a], b))
    })
}

// ---------------------------------------------------------------------------
// irreducible

/// Pair scan over submodules strictly above `N`.
pub fn is_irreducible_definition(ctx: &ModuleContext, n: &Submodule) -> Result<PropertyVerdict> {
    let ni = ctx.proper_index(n)?;
    let lat = ctx.lattice();
    let above: Vec<usize> = (ni + 1..lat.len())
        .filter(|&i| n.is_proper_subset(lat.get(i)))
        .collect();
    let hit = first_pair(&above, |a, b| a != b && lat.get(a).members().meet_equals(lat.get(b).members(), n.members()));
    Ok(PropertyVerdict::new(
        "irreducible",
        hit.is_none(),
        hit.map(|(a, b)| Witness::SubmodulePair {
            k: ctx.members(a),
            l: ctx.members(b),
        }),
        Path::Definition,
    ))
}

/// Unique upper cover in the lattice.
pub fn is_irreducible_fast(ctx: &ModuleContext, n: &Submodule) -> Result<PropertyVerdict> {
    let ni = ctx.proper_index(n)?;
    let covers = ctx.lattice().upper_covers(ni);
    let witness = (covers.len() > 1).then(|| Witness::SubmodulePair {
        k: ctx.members(covers[0]),
        l: ctx.members(covers[1]),
    });
    Ok(PropertyVerdict::new("irreducible", covers.len() == 1, witness, Path::Fast))
}

/// Fast path; debug builds also run the definition and compare.
pub fn is_irreducible(ctx: &ModuleContext, n: &Submodule) -> Result<PropertyVerdict> {
    let fast = is_irreducible_fast(ctx, n)?;
    if cfg!(debug_assertions) {
        let def = is_irreducible_definition(ctx, n)?;
        if def.verdict != fast.verdict {
            return Err(Error::Invariant("irreducible: cover test disagrees with pair scan".into()));
        }
    }
    Ok(fast)
}

// ---------------------------------------------------------------------------
// strongly irreducible

fn si_scan(ctx: &ModuleContext, n: &Submodule, pool: &[usize], path: Path) -> PropertyVerdict {
    let lat = ctx.lattice();
    let outside: Vec<usize> = pool
        .iter()
        .copied()
        .filter(|&i| !lat.get(i).is_subset(n))
        .collect();
    let hit = first_pair(&outside, |a, b| lat.get(a).members().meet_within(lat.get(b).members(), n.members()));
    PropertyVerdict::new(
        "strongly_irreducible",
        hit.is_none(),
        hit.map(|(a, b)| Witness::SubmodulePair {
            k: ctx.members(a),
            l: ctx.members(b),
        }),
        path,
    )
}

/// Scan all lattice pairs.
pub fn is_strongly_irreducible_exhaustive(ctx: &ModuleContext, n: &Submodule) -> Result<PropertyVerdict> {
    ctx.proper_index(n)?;
    let all: Vec<usize> = (0..ctx.lattice().len()).collect();
    Ok(si_scan(ctx, n, &all, Path::Definition))
}

/// Scan pairs of cyclic submodules only.
pub fn is_strongly_irreducible_cyclic(ctx: &ModuleContext, n: &Submodule) -> Result<PropertyVerdict> {
    ctx.proper_index(n)?;
    Ok(si_scan(ctx, n, ctx.lattice().cyclic(), Path::Fast))
}

pub fn is_strongly_irreducible(ctx: &ModuleContext, n: &Submodule) -> Result<PropertyVerdict> {
    let fast = is_strongly_irreducible_cyclic(ctx, n)?;
    if cfg!(debug_assertions) {
        let full = is_strongly_irreducible_exhaustive(ctx, n)?;
        if full.verdict != fast.verdict {
            return Err(Error::Invariant("strongly irreducible: cyclic scan disagrees with full scan".into()));
        }
    }
    Ok(fast)
}

// ---------------------------------------------------------------------------
// prime, primary, primal

fn element_scan(ctx: &ModuleContext, n: &Submodule, allowed: &IdealSet) -> Option<(usize, usize)> {
    let m = ctx.module();
    let outside: Vec<usize> = m.elements().filter(|&x| !n.contains(x)).collect();
    let rs: Vec<usize> = ctx.ring().elements().filter(|&r| !allowed.contains(r)).collect();
    par::find_first_map(&rs, |&r| {
        outside
            .iter()
            .find(|&&x| n.contains(m.act(r, x)))
            .map(|&x| (r, x))
    })
}

pub fn is_prime_submodule(ctx: &ModuleContext, n: &Submodule) -> Result<PropertyVerdict> {
    ctx.proper_index(n)?;
    let hit = element_scan(ctx, n, &ctx.colon_m(n));
    Ok(PropertyVerdict::new(
        "prime",
        hit.is_none(),
        hit.map(|(r, x)| Witness::ElementPair { r, x }),
        Path::Definition,
    ))
}

/// On success the witness is the associated prime `Rad(N :_R M)`.
pub fn is_primary_submodule(ctx: &ModuleContext, n: &Submodule) -> Result<PropertyVerdict> {
    ctx.proper_index(n)?;
    let colon = ctx.colon_m(n);
    let allowed = match ctx.mutation() {
        Mutation::None => finring::radical_ideal(ctx.ring(), &colon)?,
        Mutation::PrimaryWithoutRadical => colon,
    };
    if let Some((r, x)) = element_scan(ctx, n, &allowed) {
        return Ok(PropertyVerdict::new(
            "primary",
            false,
            Some(Witness::ElementPair { r, x }),
            Path::Definition,
        ));
    }
    if ctx.mutation() == Mutation::None && !finring::is_prime_ideal(ctx.ring(), &allowed)? {
        return Err(Error::Invariant("primary submodule with non-prime Rad(N:M)".into()));
    }
    Ok(PropertyVerdict::new(
        "primary",
        true,
        Some(Witness::AssociatedPrime { prime: allowed.to_vec() }),
        Path::Definition,
    ))
}

/// `Z_R(M/N) = { r : r x ∈ N for some x ∉ N }`.
pub fn zero_divisors(ctx: &ModuleContext, n: &Submodule) -> ElemSet {
    let m = ctx.module();
    let outside: Vec<usize> = m.elements().filter(|&x| !n.contains(x)).collect();
    ElemSet::from_indices(
        ctx.ring().size(),
        ctx.ring()
            .elements()
            .filter(|&r| outside.iter().any(|&x| n.contains(m.act(r, x)))),
    )
}

/// On success the witness is the adjoint prime `Z_R(M/N)`.
pub fn is_primal(ctx: &ModuleContext, n: &Submodule) -> Result<PropertyVerdict> {
    ctx.proper_index(n)?;
    let r = ctx.ring();
    let z = zero_divisors(ctx, n);
    let zs = z.to_vec();
    for &a in &zs {
        if let Some(&b) = zs.iter().find(|&&b| b >= a && !z.contains(r.add(a, b))) {
            return Ok(PropertyVerdict::new(
                "primal",
                false,
                Some(Witness::ZeroDivisorSum { a, b }),
                Path::Definition,
            ));
        }
    }
    let ideal = IdealSet::from_members(r, z)?;
    if !finring::is_prime_ideal(r, &ideal)? {
        return Err(Error::Invariant("zero-divisor ideal of M/N is not prime".into()));
    }
    Ok(PropertyVerdict::new(
        "primal",
        true,
        Some(Witness::AdjointPrime { prime: ideal.to_vec() }),
        Path::Definition,
    ))
}

// ---------------------------------------------------------------------------
// sheltered, distributive, uniserial, arithmetical, multiplication

/// True iff the submodules strictly above `N` have a least element.
pub fn is_sheltered(ctx: &ModuleContext, n: &Submodule) -> Result<PropertyVerdict> {
    let ni = ctx.proper_index(n)?;
    let lat = ctx.lattice();
    let mut meet = ElemSet::full(ctx.module().size());
    for i in ni + 1..lat.len() {
        if n.is_proper_subset(lat.get(i)) {
            meet = meet.intersect(lat.get(i).members());
        }
    }
    if meet != *n.members() {
        return Ok(PropertyVerdict::new(
            "sheltered",
            true,
            Some(Witness::Shelter { shelter: meet.to_vec() }),
            Path::Definition,
        ));
    }
    let covers = lat.upper_covers(ni);
    Ok(PropertyVerdict::new(
        "sheltered",
        false,
        (covers.len() > 1).then(|| Witness::SubmodulePair {
            k: ctx.members(covers[0]),
            l: ctx.members(covers[1]),
        }),
        Path::Definition,
    ))
}

fn distributive_at(ctx: &ModuleContext, ni: usize) -> Result<Option<Witness>> {
    let lat = ctx.lattice();
    let s = lat.len();
    let scan = |cond_i: bool| -> Option<(usize, usize)> {
        let ks: Vec<usize> = (0..s).collect();
        par::find_first_map(&ks, |&k| {
            (k..s)
                .find(|&l| {
                    if cond_i {
                        lat.meet(lat.join(k, l), ni) != lat.join(lat.meet(k, ni), lat.meet(l, ni))
                    } else {
                        lat.join(lat.meet(k, l), ni) != lat.meet(lat.join(k, ni), lat.join(l, ni))
                    }
                })
                .map(|l| (k, l))
        })
    };
    let first = scan(true);
    let second = scan(false);
    if first.is_some() != second.is_some() {
        return Err(Error::Invariant("distributive conditions (i) and (ii) disagree".into()));
    }
    Ok(first.map(|(k, l)| Witness::DistributiveTriple {
        condition: "i".into(),
        n: ctx.members(ni),
        k: ctx.members(k),
        l: ctx.members(l),
    }))
}

/// Both distributive conditions for `N` over all pairs `K, L`.
pub fn is_distributive_submodule(ctx: &ModuleContext, n: &Submodule) -> Result<PropertyVerdict> {
    let ni = ctx.index_of(n)?;
    ctx.require_tables()?;
    let w = distributive_at(ctx, ni)?;
    Ok(PropertyVerdict::new("distributive_submodule", w.is_none(), w, Path::Definition))
}

pub fn is_distributive_module(ctx: &ModuleContext) -> Result<PropertyVerdict> {
    ctx.require_tables()?;
    for ni in 0..ctx.lattice().len() {
        if let Some(w) = distributive_at(ctx, ni)? {
            return Ok(PropertyVerdict::new("distributive_module", false, Some(w), Path::Definition));
        }
    }
    Ok(PropertyVerdict::new("distributive_module", true, None, Path::Definition))
}

/// Incomparable pair in a lattice, found as two upper covers of one element.
fn chain_break(lat: &SubmoduleLattice) -> Option<(usize, usize)> {
    (0..lat.len()).find_map(|i| {
        let c = lat.upper_covers(i);
        (c.len() > 1).then(|| (c[0], c[1]))
    })
}

pub fn is_uniserial(ctx: &ModuleContext) -> Result<PropertyVerdict> {
    let hit = chain_break(ctx.lattice());
    Ok(PropertyVerdict::new(
        "uniserial",
        hit.is_none(),
        hit.map(|(a, b)| Witness::SubmodulePair {
            k: ctx.members(a),
            l: ctx.members(b),
        }),
        Path::Definition,
    ))
}

/// Uniserial localization at every maximal ideal.
pub fn is_arithmetical(ctx: &ModuleContext) -> Result<PropertyVerdict> {
    for piece in ctx.localizations()? {
        if let Some((a, b)) = chain_break(&piece.lattice) {
            let k = piece.loc.preimage(piece.lattice.get(a));
            let l = piece.loc.preimage(piece.lattice.get(b));
            return Ok(PropertyVerdict::new(
                "arithmetical",
                false,
                Some(Witness::LocalPair {
                    prime: piece.prime.to_vec(),
                    k: k.to_vec(),
                    l: l.to_vec(),
                }),
                Path::Definition,
            ));
        }
    }
    Ok(PropertyVerdict::new("arithmetical", true, None, Path::Definition))
}

/// Every `K` satisfies `K = (K :_R M) M`.
pub fn is_multiplication_module(ctx: &ModuleContext) -> Result<PropertyVerdict> {
    let hit = ctx
        .lattice()
        .iter()
        .find(|k| ctx.ideal_times_m(&ctx.colon_m(k)) != **k);
    Ok(PropertyVerdict::new(
        "multiplication",
        hit.is_none(),
        hit.map(|k| Witness::NotMultiplication { k: k.to_vec(), j: None }),
        Path::Definition,
    ))
}

/// Every submodule `K` is a multiplication module: `J = (J :_R K) K` for all `J ⊆ K`.
pub fn all_submodules_multiplication(ctx: &ModuleContext) -> Result<PropertyVerdict> {
    let lat = ctx.lattice();
    let m = ctx.module();
    let ks: Vec<usize> = (0..lat.len()).collect();
    let hit = par::find_first_map(&ks, |&k| {
        let gens = lat.generators(k);
        (0..=k)
            .filter(|&j| lat.le(j, k))
            .find(|&j| {
                let colon = colon_ideal_by_gens(m, lat.get(j), gens);
                ideal_times_by_gens(m, &colon, gens) != *lat.get(j)
            })
            .map(|j| (k, j))
    });
    Ok(PropertyVerdict::new(
        "all_submodules_multiplication",
        hit.is_none(),
        hit.map(|(k, j)| Witness::NotMultiplication {
            k: ctx.members(k),
            j: Some(ctx.members(j)),
        }),
        Path::Definition,
    ))
}

/// Intersection of the prime submodules containing `N`, or `M` if none.
pub fn radical_submodule(ctx: &ModuleContext, n: &Submodule) -> Result<Submodule> {
    ctx.index_of(n)?;
    let mut acc = ElemSet::full(ctx.module().size());
    for k in ctx.proper_submodules() {
        if n.is_subset(k) && is_prime_submodule(ctx, k)?.verdict {
            acc = acc.intersect(k.members());
        }
    }
    Ok(Submodule::from_set_unchecked(acc))
}

/// The two colon identities checked over all triples of submodules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColonIdentity {
    /// `(K+L):N = (K:N)+(L:N)`.
    Sum,
    /// `K:(L∩N) = (K:L)+(K:N)`.
    Meet,
}

impl ColonIdentity {
    fn tag(self) -> &'static str {
        match self {
            ColonIdentity::Sum => "iii",
            ColonIdentity::Meet => "iv",
        }
    }
}

/// First triple `(K, L, N)` in canonical order breaking one identity.
pub fn colon_identity(ctx: &ModuleContext, which: ColonIdentity) -> Result<PropertyVerdict> {
    ctx.require_tables()?;
    let ideals = ctx.ideal_index()?;
    let lat = ctx.lattice();
    let m = ctx.module();
    let s = lat.len();
    let t = ideals.list.len();
    let colon: Vec<Vec<u32>> = par::map_range(s, |k| {
        (0..s)
            .map(|n| {
                let c = colon_ideal_by_gens(m, lat.get(k), lat.generators(n));
                ideals.index[c.members()] as u32
            })
            .collect()
    });
    let isum = |a: u32, b: u32| ideals.sum[a as usize * t + b as usize];
    let ks: Vec<usize> = (0..s).collect();
    let hit = par::find_first_map(&ks, |&k| {
        for l in 0..s {
            for n in 0..s {
                let bad = match which {
                    ColonIdentity::Sum => colon[lat.join(k, l)][n] != isum(colon[k][n], colon[l][n]),
                    ColonIdentity::Meet => colon[k][lat.meet(l, n)] != isum(colon[k][l], colon[k][n]),
                };
                if bad {
                    return Some((k, l, n));
                }
            }
        }
        None
    });
    Ok(PropertyVerdict::new(
        "colon_identities",
        hit.is_none(),
        hit.map(|(k, l, n)| Witness::ColonTriple {
            identity: which.tag().into(),
            k: ctx.members(k),
            l: ctx.members(l),
            n: ctx.members(n),
        }),
        Path::Definition,
    ))
}

/// Both colon identities; the first failure is reported.
pub fn colon_identities(ctx: &ModuleContext) -> Result<PropertyVerdict> {
    let sum = colon_identity(ctx, ColonIdentity::Sum)?;
    if !sum.verdict {
        return Ok(sum);
    }
    colon_identity(ctx, ColonIdentity::Meet)
}

// ---------------------------------------------------------------------------
// evaluation by name and witness re-checking

pub const SUBMODULE_PROPERTIES: &[&str] = &[
    "irreducible",
    "strongly_irreducible",
    "prime",
    "primary",
    "primal",
    "sheltered",
    "distributive_submodule",
];

pub const MODULE_PROPERTIES: &[&str] = &[
    "uniserial",
    "arithmetical",
    "distributive_module",
    "multiplication",
    "all_submodules_multiplication",
    "colon_identities",
];

pub fn evaluate_submodule_property(ctx: &ModuleContext, n: &Submodule, name: &str) -> Result<PropertyVerdict> {
    match name {
        "irreducible" => is_irreducible(ctx, n),
        "strongly_irreducible" => is_strongly_irreducible(ctx, n),
        "prime" => is_prime_submodule(ctx, n),
        "primary" => is_primary_submodule(ctx, n),
        "primal" => is_primal(ctx, n),
        "sheltered" => is_sheltered(ctx, n),
        "distributive_submodule" => is_distributive_submodule(ctx, n),
        other => Err(Error::Parse(format!("unknown submodule property `{other}`"))),
    }
}

pub fn evaluate_module_property(ctx: &ModuleContext, name: &str) -> Result<PropertyVerdict> {
    match name {
        "uniserial" => is_uniserial(ctx),
        "arithmetical" => is_arithmetical(ctx),
        "distributive_module" => is_distributive_module(ctx),
        "multiplication" => is_multiplication_module(ctx),
        "all_submodules_multiplication" => all_submodules_multiplication(ctx),
        "colon_identities" => colon_identities(ctx),
        other => Err(Error::Parse(format!("unknown module property `{other}`"))),
    }
}

fn set_of(universe: usize, xs: &[usize]) -> Option<ElemSet> {
    xs.iter()
        .all(|&x| x < universe)
        .then(|| ElemSet::from_indices(universe, xs.iter().copied()))
}

/// Re-checks a verdict's witness from raw membership data, independently of
/// the lattice. `n` is ignored for module-level properties.
pub fn revalidate(ctx: &ModuleContext, n: Option<&Submodule>, v: &PropertyVerdict) -> Result<bool> {
    let m = ctx.module();
    let r = ctx.ring();
    let size = m.size();
    let sub = |xs: &[usize]| -> Option<Submodule> {
        set_of(size, xs).and_then(|s| Submodule::from_members(m, s).ok())
    };
    let need_n = || n.ok_or_else(|| Error::Precondition("witness check needs N".into()));
    let ok = match (&v.property[..], v.verdict, &v.witness) {
        ("irreducible", false, Some(Witness::SubmodulePair { k, l })) => {
            let n = need_n()?;
            match (sub(k), sub(l)) {
                (Some(k), Some(l)) => {
                    n.is_proper_subset(&k) && n.is_proper_subset(&l) && k.intersect(&l) == *n
                }
                _ => false,
            }
        }
        ("strongly_irreducible", false, Some(Witness::SubmodulePair { k, l })) => {
            let n = need_n()?;
            match (sub(k), sub(l)) {
                (Some(k), Some(l)) => k.intersect(&l).is_subset(n) && !k.is_subset(n) && !l.is_subset(n),
                _ => false,
            }
        }
        ("prime" | "primary", false, Some(Witness::ElementPair { r: a, x })) => {
            let n = need_n()?;
            if *a >= r.size() || *x >= size {
                return Ok(false);
            }
            let colon = finmod::colon_ideal(m, n, &m.whole())?;
            let allowed = if v.property == "prime" || ctx.mutation() != Mutation::None {
                colon
            } else {
                finring::radical_ideal(r, &colon)?
            };
            n.contains(m.act(*a, *x)) && !n.contains(*x) && !allowed.contains(*a)
        }
        ("primary", true, Some(Witness::AssociatedPrime { prime })) => {
            let n = need_n()?;
            let colon = finmod::colon_ideal(m, n, &m.whole())?;
            let rad = finring::radical_ideal(r, &colon)?;
            rad.to_vec() == *prime || ctx.mutation() != Mutation::None
        }
        ("primal", false, Some(Witness::ZeroDivisorSum { a, b })) => {
            let n = need_n()?;
            let z = zero_divisors(ctx, n);
            *a < r.size() && *b < r.size() && z.contains(*a) && z.contains(*b) && !z.contains(r.add(*a, *b))
        }
        ("primal", true, Some(Witness::AdjointPrime { prime })) => {
            let ideal = set_of(r.size(), prime).and_then(|s| IdealSet::from_members(r, s).ok());
            match ideal {
                Some(p) => finring::is_prime_ideal(r, &p)?,
                None => false,
            }
        }
        ("sheltered", true, Some(Witness::Shelter { shelter })) => {
            let n = need_n()?;
            match sub(shelter) {
                Some(s) => {
                    n.is_proper_subset(&s)
                        && ctx
                            .lattice()
                            .iter()
                            .filter(|k| n.is_proper_subset(k))
                            .all(|k| s.is_subset(k))
                }
                None => false,
            }
        }
        ("sheltered" | "uniserial", false, Some(Witness::SubmodulePair { k, l })) => match (sub(k), sub(l)) {
            (Some(k), Some(l)) => {
                let base = if v.property == "sheltered" {
                    let n = need_n()?;
                    n.is_proper_subset(&k) && n.is_proper_subset(&l)
                } else {
                    true
                };
                base && !k.is_subset(&l) && !l.is_subset(&k)
            }
            _ => false,
        },
        (
            "distributive_submodule" | "distributive_module",
            false,
            Some(Witness::DistributiveTriple { condition, n: nn, k, l }),
        ) => match (sub(nn), sub(k), sub(l)) {
            (Some(nn), Some(k), Some(l)) => {
                let sum = |a: &Submodule, b: &Submodule| finmod::sub_sum(m, a, b);
                if condition == "i" {
                    sum(&k, &l)?.intersect(&nn) != sum(&k.intersect(&nn), &l.intersect(&nn))?
                } else {
                    sum(&k.intersect(&l), &nn)? != sum(&k, &nn)?.intersect(&sum(&l, &nn)?)
                }
            }
            _ => false,
        },
        ("multiplication" | "all_submodules_multiplication", false, Some(Witness::NotMultiplication { k, j })) => {
            match sub(k) {
                Some(k) => match j {
                    None => finmod::ideal_times(m, &finmod::colon_ideal(m, &k, &m.whole())?, &m.whole())? != k,
                    Some(j) => match sub(j) {
                        Some(j) => {
                            j.is_subset(&k) && finmod::ideal_times(m, &finmod::colon_ideal(m, &j, &k)?, &k)? != j
                        }
                        None => false,
                    },
                },
                None => false,
            }
        }
        ("arithmetical", false, Some(Witness::LocalPair { prime, k, l })) => {
            let p = set_of(r.size(), prime).and_then(|s| IdealSet::from_members(r, s).ok());
            match (p, sub(k), sub(l)) {
                (Some(p), Some(k), Some(l)) => {
                    let loc = finmod::localize(
                        m,
                        &PrimeWitness {
                            ideal: p,
                            is_maximal: true,
                        },
                    )?;
                    let (a, b) = (loc.image(&k), loc.image(&l));
                    !a.is_subset(&b) && !b.is_subset(&a)
                }
                _ => false,
            }
        }
        ("colon_identities", false, Some(Witness::ColonTriple { identity, k, l, n: nn })) => {
            match (sub(k), sub(l), sub(nn)) {
                (Some(k), Some(l), Some(nn)) => {
                    let c = |a: &Submodule, b: &Submodule| finmod::colon_ideal(m, a, b);
                    if identity == "iii" {
                        c(&finmod::sub_sum(m, &k, &l)?, &nn)? != finring::ideal_sum(r, &c(&k, &nn)?, &c(&l, &nn)?)?
                    } else {
                        c(&k, &l.intersect(&nn))? != finring::ideal_sum(r, &c(&k, &l)?, &c(&k, &nn)?)?
                    }
                }
                _ => false,
            }
        }
        (_, true, _) => true,
        _ => false,
    };
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finmod::{mod_direct_sum, mod_regular};
    use crate::finring::{ring_truncated, ring_zmod};

    fn ctx_zmod(n: usize) -> ModuleContext {
        let r = Arc::new(ring_zmod(n).unwrap());
        ModuleContext::new(mod_regular(&r).unwrap()).unwrap()
    }

    fn ctx_trunc() -> ModuleContext {
        let r = Arc::new(ring_truncated(2, 2, 2).unwrap());
        ModuleContext::new(mod_regular(&r).unwrap()).unwrap()
    }

    fn ctx_f2_squared() -> ModuleContext {
        let r = Arc::new(ring_zmod(2).unwrap());
        let v = mod_regular(&r).unwrap();
        ModuleContext::new(mod_direct_sum(&v, &v).unwrap()).unwrap()
    }

    fn gen(ctx: &ModuleContext, gens: &[usize]) -> Submodule {
        finmod::submodule_generated(ctx.module(), gens).unwrap()
    }

    fn pair(w: &Option<Witness>) -> (Vec<usize>, Vec<usize>) {
        match w {
            Some(Witness::SubmodulePair { k, l }) => (k.clone(), l.clone()),
            other => panic!("expected a pair, got {other:?}"),
        }
    }

    #[test]
    fn irreducible_examples() {
        let z12 = ctx_zmod(12);
        let max = gen(&z12, &[2]);
        assert!(is_irreducible(&z12, &max).unwrap().verdict);
        let six = gen(&z12, &[6]);
        let v = is_irreducible(&z12, &six).unwrap();
        assert!(!v.verdict);
        let (k, l) = pair(&v.witness);
        let mut got = vec![k, l];
        got.sort();
        let mut want = vec![gen(&z12, &[2]).to_vec(), gen(&z12, &[3]).to_vec()];
        want.sort();
        assert_eq!(got, want);
        assert!(revalidate(&z12, Some(&six), &v).unwrap());
        let d = is_irreducible_definition(&z12, &six).unwrap();
        assert!(revalidate(&z12, Some(&six), &d).unwrap());

        let t = ctx_trunc();
        assert!(is_irreducible(&t, &gen(&t, &[2])).unwrap().verdict);
        assert!(matches!(
            is_irreducible(&z12, &z12.module().whole()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn strongly_irreducible_examples() {
        let z12 = ctx_zmod(12);
        assert!(is_strongly_irreducible(&z12, &gen(&z12, &[4])).unwrap().verdict);
        let six = gen(&z12, &[6]);
        let v = is_strongly_irreducible_exhaustive(&z12, &six).unwrap();
        assert!(!v.verdict);
        assert_eq!(pair(&v.witness), (gen(&z12, &[4]).to_vec(), gen(&z12, &[3]).to_vec()));
        assert!(revalidate(&z12, Some(&six), &v).unwrap());

        let t = ctx_trunc();
        let x = gen(&t, &[2]);
        let v = is_strongly_irreducible_exhaustive(&t, &x).unwrap();
        assert!(!v.verdict);
        assert_eq!(pair(&v.witness), (vec![0, 4], vec![0, 6]));
        let c = is_strongly_irreducible_cyclic(&t, &x).unwrap();
        assert_eq!(c.verdict, v.verdict);
        assert_eq!(c.path, Path::Fast);
    }

    #[test]
    fn prime_examples() {
        let f2 = ctx_f2_squared();
        assert!(is_prime_submodule(&f2, &f2.module().zero_submodule()).unwrap().verdict);
        let z12 = ctx_zmod(12);
        assert!(is_prime_submodule(&z12, &gen(&z12, &[2])).unwrap().verdict);
        let four = gen(&z12, &[4]);
        let v = is_prime_submodule(&z12, &four).unwrap();
        assert!(!v.verdict);
        assert_eq!(v.witness, Some(Witness::ElementPair { r: 2, x: 2 }));
        assert!(revalidate(&z12, Some(&four), &v).unwrap());
    }

    #[test]
    fn primary_examples() {
        let z12 = ctx_zmod(12);
        let v = is_primary_submodule(&z12, &gen(&z12, &[4])).unwrap();
        assert!(v.verdict);
        assert_eq!(v.witness, Some(Witness::AssociatedPrime { prime: gen(&z12, &[2]).to_vec() }));
        let six = gen(&z12, &[6]);
        let v = is_primary_submodule(&z12, &six).unwrap();
        assert!(!v.verdict);
        assert!(revalidate(&z12, Some(&six), &v).unwrap());
        for n in z12.proper_submodules() {
            if is_prime_submodule(&z12, n).unwrap().verdict {
                assert!(is_primary_submodule(&z12, n).unwrap().verdict);
            }
        }
    }

    #[test]
    fn mutation_breaks_primary() {
        let z4 = ctx_zmod(4).with_mutation(Mutation::PrimaryWithoutRadical);
        let zero = z4.module().zero_submodule();
        assert!(!is_primary_submodule(&z4, &zero).unwrap().verdict);
        assert!(is_strongly_irreducible(&z4, &zero).unwrap().verdict);
    }

    #[test]
    fn primal_examples() {
        let z12 = ctx_zmod(12);
        let v = is_primal(&z12, &gen(&z12, &[4])).unwrap();
        assert!(v.verdict);
        assert_eq!(v.witness, Some(Witness::AdjointPrime { prime: gen(&z12, &[2]).to_vec() }));
        let six = gen(&z12, &[6]);
        let v = is_primal(&z12, &six).unwrap();
        assert!(!v.verdict);
        assert!(revalidate(&z12, Some(&six), &v).unwrap());
        // a maximal ideal annihilating M/N is the adjoint prime
        let z8 = ctx_zmod(8);
        let v = is_primal(&z8, &gen(&z8, &[2])).unwrap();
        assert_eq!(v.witness, Some(Witness::AdjointPrime { prime: vec![0, 2, 4, 6] }));
    }

    #[test]
    fn sheltered_examples() {
        let z8 = ctx_zmod(8);
        let v = is_sheltered(&z8, &gen(&z8, &[4])).unwrap();
        assert_eq!(v.witness, Some(Witness::Shelter { shelter: vec![0, 2, 4, 6] }));
        let v = is_sheltered(&z8, &gen(&z8, &[2])).unwrap();
        assert_eq!(v.witness, Some(Witness::Shelter { shelter: (0..8).collect() }));
        let f2 = ctx_f2_squared();
        let zero = f2.module().zero_submodule();
        let v = is_sheltered(&f2, &zero).unwrap();
        assert!(!v.verdict);
        assert!(revalidate(&f2, Some(&zero), &v).unwrap());
    }

    #[test]
    fn distributive_examples() {
        assert!(is_distributive_module(&ctx_zmod(8)).unwrap().verdict);
        assert!(is_distributive_module(&ctx_zmod(12)).unwrap().verdict);
        let t = ctx_trunc();
        let v = is_distributive_module(&t).unwrap();
        assert!(!v.verdict);
        assert!(revalidate(&t, None, &v).unwrap());
        let mut lines = vec![vec![0, 2], vec![0, 4], vec![0, 6]];
        if let Some(Witness::DistributiveTriple { n, k, l, .. }) = &v.witness {
            let mut got = vec![n.clone(), k.clone(), l.clone()];
            got.sort();
            lines.sort();
            assert_eq!(got, lines);
        } else {
            panic!("expected a triple");
        }
    }

    #[test]
    fn uniserial_and_arithmetical() {
        let z8 = ctx_zmod(8);
        assert!(is_uniserial(&z8).unwrap().verdict);
        assert!(is_arithmetical(&z8).unwrap().verdict);
        let z12 = ctx_zmod(12);
        assert!(!is_uniserial(&z12).unwrap().verdict);
        assert!(is_arithmetical(&z12).unwrap().verdict);
        let t = ctx_trunc();
        let v = is_arithmetical(&t).unwrap();
        assert!(!v.verdict);
        assert!(revalidate(&t, None, &v).unwrap());
    }

    #[test]
    fn multiplication_examples() {
        for n in [2, 8, 12] {
            assert!(is_multiplication_module(&ctx_zmod(n)).unwrap().verdict);
        }
        assert!(is_multiplication_module(&ctx_trunc()).unwrap().verdict);
        let f2 = ctx_f2_squared();
        let v = is_multiplication_module(&f2).unwrap();
        assert!(!v.verdict);
        assert!(revalidate(&f2, None, &v).unwrap());
    }

    #[test]
    fn radical_examples() {
        let z12 = ctx_zmod(12);
        let four = gen(&z12, &[4]);
        assert_eq!(radical_submodule(&z12, &four).unwrap(), gen(&z12, &[2]));
        let two = gen(&z12, &[2]);
        assert_eq!(radical_submodule(&z12, &two).unwrap(), two);
        for n in z12.lattice().iter() {
            let rad = radical_submodule(&z12, n).unwrap();
            assert_eq!(radical_submodule(&z12, &rad).unwrap(), rad);
        }
    }

    #[test]
    fn colon_identity_examples() {
        assert!(colon_identities(&ctx_zmod(8)).unwrap().verdict);
        assert!(colon_identities(&ctx_zmod(12)).unwrap().verdict);
        let t = ctx_trunc();
        let v = colon_identities(&t).unwrap();
        assert!(!v.verdict);
        assert!(matches!(&v.witness, Some(Witness::ColonTriple { identity, .. }) if identity == "iii"));
        assert!(revalidate(&t, None, &v).unwrap());
    }

    #[test]
    fn five_way_agreement_small_modules() {
        let z4 = Arc::new(ring_zmod(4).unwrap());
        let reg = mod_regular(&z4).unwrap();
        let half = finmod::mod_cyclic(&z4, &finring::ideal_generated(&z4, &[2]).unwrap()).unwrap();
        let sum = mod_direct_sum(&reg, &half).unwrap();
        for ctx in [ctx_zmod(6), ctx_zmod(9), ctx_trunc(), ctx_f2_squared(), ModuleContext::new(sum).unwrap()] {
            let a = is_distributive_module(&ctx).unwrap().verdict;
            assert_eq!(a, is_arithmetical(&ctx).unwrap().verdict, "{ctx:?}");
            assert_eq!(a, colon_identities(&ctx).unwrap().verdict, "{ctx:?}");
            assert_eq!(a, all_submodules_multiplication(&ctx).unwrap().verdict, "{ctx:?}");
        }
    }

    #[test]
    fn foreign_submodule_rejected() {
        let z12 = ctx_zmod(12);
        let z8 = ctx_zmod(8);
        let n = z8.module().zero_submodule();
        assert!(matches!(is_prime_submodule(&z12, &n), Err(Error::Mismatch(_))));
    }
}
