//! Finite modules over table rings: action tables, submodule lattices and
//! the colon / saturation / symbolic-power / localization operators.
//!
//! Encodings: the regular module uses ring indices; `R/I` and `M/N` number
//! cosets by increasing minimal representative; `M1 + M2` puts `(x, y)` at
//! `x * |M2| + y`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::ElemSet;
use crate::error::{Error, Result};
use crate::finring::{
    self, coset_projection, ideal_power, subgroup_sum, IdealSet, PrimeWitness, RingTable,
};
use crate::par;

/// Largest module any constructor will build.
pub const MAX_MODULE_SIZE: usize = 4096;
/// Default cap on module size for lattice enumeration.
pub const DEFAULT_LATTICE_CAP: usize = 512;
/// Hard limit on the number of submodules a lattice may hold.
pub const MAX_LATTICE_NODES: usize = 20_000;

#[derive(Clone)]
pub struct ModuleTable {
    ring: Arc<RingTable>,
    size: usize,
    add: Vec<u16>,
    act: Vec<u16>,
    neg: Vec<u16>,
    zero: usize,
    label: String,
    names: Vec<String>,
}

impl std::fmt::Debug for ModuleTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ModuleTable({} over {}, size {})", self.label, self.ring.label(), self.size)
    }
}

impl ModuleTable {
    pub fn from_tables(
        ring: Arc<RingTable>,
        size: usize,
        add: Vec<usize>,
        act: Vec<usize>,
        zero: usize,
        label: impl Into<String>,
        names: Vec<String>,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::Parse("module must have at least one element".into()));
        }
        if size > MAX_MODULE_SIZE {
            return Err(Error::cap("module", size, MAX_MODULE_SIZE));
        }
        let q = ring.size();
        if add.len() != size * size || act.len() != q * size || names.len() != size {
            return Err(Error::Parse("module table dimensions do not match".into()));
        }
        if add.iter().chain(&act).any(|&x| x >= size) || zero >= size {
            return Err(Error::Parse("module table entry out of range".into()));
        }
        let add: Vec<u16> = add.into_iter().map(|x| x as u16).collect();
        let act: Vec<u16> = act.into_iter().map(|x| x as u16).collect();
        let mut neg = vec![u16::MAX; size];
        for a in 0..size {
            if let Some(b) = (0..size).find(|&b| add[a * size + b] as usize == zero) {
                neg[a] = b as u16;
            }
        }
        if neg.contains(&u16::MAX) {
            return Err(Error::Invariant("module addition lacks inverses".into()));
        }
        let m = ModuleTable {
            ring,
            size,
            add,
            act,
            neg,
            zero,
            label: label.into(),
            names,
        };
        m.validate()?;
        Ok(m)
    }

    #[inline]
    pub fn ring(&self) -> &Arc<RingTable> {
        &self.ring
    }
    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }
    #[inline]
    pub fn zero(&self) -> usize {
        self.zero
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }
    #[inline]
    pub fn add(&self, x: usize, y: usize) -> usize {
        self.add[x * self.size + y] as usize
    }
    #[inline]
    pub fn act(&self, r: usize, x: usize) -> usize {
        self.act[r * self.size + x] as usize
    }
    #[inline]
    pub fn neg(&self, x: usize) -> usize {
        self.neg[x] as usize
    }
    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    /// Group and module axioms; full loops when ring and module both have at
    /// most 64 elements, seeded samples otherwise.
    pub fn validate(&self) -> Result<()> {
        let r = &self.ring;
        let m = self.size;
        for x in 0..m {
            if self.add(x, self.zero) != x || self.add(x, self.neg(x)) != self.zero {
                return Err(Error::Invariant(format!("additive identity/inverse fails at {x}")));
            }
            if self.act(r.one(), x) != x {
                return Err(Error::Invariant(format!("1*x != x at {x}")));
            }
            for y in 0..m {
                if self.add(x, y) != self.add(y, x) {
                    return Err(Error::Invariant("module addition not commutative".into()));
                }
            }
        }
        let triple = |x: usize, y: usize, z: usize| self.add(self.add(x, y), z) == self.add(x, self.add(y, z));
        let lin = |a: usize, b: usize, x: usize, y: usize| {
            self.act(a, self.add(x, y)) == self.add(self.act(a, x), self.act(a, y))
                && self.act(r.add(a, b), x) == self.add(self.act(a, x), self.act(b, x))
                && self.act(r.mul(a, b), x) == self.act(a, self.act(b, x))
        };
        let q = r.size();
        if m <= 64 && q <= 64 {
            for x in 0..m {
                for y in 0..m {
                    for z in 0..m {
                        if !triple(x, y, z) {
                            return Err(Error::Invariant("module addition not associative".into()));
                        }
                    }
                    for a in 0..q {
                        if !lin(a, a, x, y) {
                            return Err(Error::Invariant("module action not linear".into()));
                        }
                    }
                }
                for a in 0..q {
                    for b in 0..q {
                        if !lin(a, b, x, x) {
                            return Err(Error::Invariant("module action axioms fail".into()));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..100_000 {
                let (x, y, z) = (rng.random_range(0..m), rng.random_range(0..m), rng.random_range(0..m));
                let (a, b) = (rng.random_range(0..q), rng.random_range(0..q));
                if !triple(x, y, z) || !lin(a, b, x, y) {
                    return Err(Error::Invariant("module axioms fail on sampled tuple".into()));
                }
            }
        }
        Ok(())
    }

    pub fn zero_submodule(&self) -> Submodule {
        Submodule(ElemSet::from_indices(self.size, [self.zero]))
    }

    pub fn whole(&self) -> Submodule {
        Submodule(ElemSet::full(self.size))
    }

    /// Cyclic submodule `Rx`.
    pub fn cyclic(&self, x: usize) -> Submodule {
        Submodule(ElemSet::from_indices(self.size, self.ring.elements().map(|r| self.act(r, x))))
    }

    /// The same module viewed over a quotient ring `R -> R'` (given by the
    /// projection) through which the action factors.
    pub fn over_quotient_ring(&self, ring: Arc<RingTable>, proj: &[usize]) -> Result<ModuleTable> {
        let q = ring.size();
        let mut act = vec![usize::MAX; q * self.size];
        for r in self.ring.elements() {
            let rr = proj[r];
            for x in self.elements() {
                let v = self.act(r, x);
                let slot = &mut act[rr * self.size + x];
                if *slot == usize::MAX {
                    *slot = v;
                } else if *slot != v {
                    return Err(Error::Invariant("action does not factor through the quotient ring".into()));
                }
            }
        }
        ModuleTable::from_tables(
            ring,
            self.size,
            self.add.iter().map(|&v| v as usize).collect(),
            act,
            self.zero,
            self.label.clone(),
            self.names.clone(),
        )
    }
}

/// A submodule as a membership vector over module elements.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Submodule(pub(crate) ElemSet);

impl std::fmt::Debug for Submodule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Sub{:?}", self.0)
    }
}

impl Submodule {
    /// Wraps a membership vector after checking it is a submodule of `m`.
    pub fn from_members(m: &ModuleTable, members: ElemSet) -> Result<Self> {
        check_len(m, &members)?;
        if !members.contains(m.zero) {
            return Err(Error::Invariant("submodule must contain zero".into()));
        }
        for x in members.iter() {
            for y in members.iter() {
                if !members.contains(m.add(x, y)) {
                    return Err(Error::Invariant("not closed under addition".into()));
                }
            }
            for r in m.ring.elements() {
                if !members.contains(m.act(r, x)) {
                    return Err(Error::Invariant("not closed under the ring action".into()));
                }
            }
        }
        Ok(Submodule(members))
    }

    pub(crate) fn from_set_unchecked(members: ElemSet) -> Self {
        Submodule(members)
    }

    pub fn members(&self) -> &ElemSet {
        &self.0
    }
    pub fn contains(&self, x: usize) -> bool {
        self.0.contains(x)
    }
    pub fn count(&self) -> usize {
        self.0.count()
    }
    pub fn is_subset(&self, other: &Submodule) -> bool {
        self.0.is_subset(&other.0)
    }
    pub fn is_proper_subset(&self, other: &Submodule) -> bool {
        self.0.is_proper_subset(&other.0)
    }
    pub fn is_whole(&self) -> bool {
        self.0.is_full()
    }
    pub fn to_vec(&self) -> Vec<usize> {
        self.0.to_vec()
    }
    pub fn intersect(&self, other: &Submodule) -> Submodule {
        Submodule(self.0.intersect(&other.0))
    }
}

fn check_len(m: &ModuleTable, s: &ElemSet) -> Result<()> {
    if s.universe() != m.size {
        return Err(Error::Mismatch(format!(
            "set over {} elements used with module of size {}",
            s.universe(),
            m.size
        )));
    }
    Ok(())
}

fn check_ideal(m: &ModuleTable, i: &IdealSet) -> Result<()> {
    if i.members().universe() != m.ring.size() {
        return Err(Error::Mismatch("ideal belongs to a different ring".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// constructors

/// `R` as a module over itself.
pub fn mod_regular(r: &Arc<RingTable>) -> Result<ModuleTable> {
    let q = r.size();
    let mut add = Vec::with_capacity(q * q);
    let mut act = Vec::with_capacity(q * q);
    for a in 0..q {
        for b in 0..q {
            add.push(r.add(a, b));
            act.push(r.mul(a, b));
        }
    }
    let names = (0..q).map(|a| r.name(a).to_string()).collect();
    ModuleTable::from_tables(r.clone(), q, add, act, r.zero(), "R", names)
}

/// `R / I`.
pub fn mod_cyclic(r: &Arc<RingTable>, i: &IdealSet) -> Result<ModuleTable> {
    let regular = mod_regular(r)?;
    let (m, _) = mod_quotient(&regular, &Submodule(i.members().clone()))?;
    let gens: Vec<String> = finring::ideal_generators(r, i)
        .iter()
        .map(|&g| r.name(g).to_string())
        .collect();
    Ok(ModuleTable {
        label: format!("R/({})", gens.join(",")),
        ..m
    })
}

pub fn mod_direct_sum(a: &ModuleTable, b: &ModuleTable) -> Result<ModuleTable> {
    if !Arc::ptr_eq(&a.ring, &b.ring) && *a.ring != *b.ring {
        return Err(Error::Mismatch("direct sum of modules over different rings".into()));
    }
    let size = a.size * b.size;
    if size > MAX_MODULE_SIZE {
        return Err(Error::cap("direct sum", size, MAX_MODULE_SIZE));
    }
    let split = |i: usize| (i / b.size, i % b.size);
    let mut add = Vec::with_capacity(size * size);
    for i in 0..size {
        let (x1, y1) = split(i);
        for j in 0..size {
            let (x2, y2) = split(j);
            add.push(a.add(x1, x2) * b.size + b.add(y1, y2));
        }
    }
    let mut act = Vec::with_capacity(a.ring.size() * size);
    for r in a.ring.elements() {
        for i in 0..size {
            let (x, y) = split(i);
            act.push(a.act(r, x) * b.size + b.act(r, y));
        }
    }
    let names = (0..size)
        .map(|i| {
            let (x, y) = split(i);
            format!("({},{})", a.name(x), b.name(y))
        })
        .collect();
    ModuleTable::from_tables(
        a.ring.clone(),
        size,
        add,
        act,
        a.zero * b.size + b.zero,
        format!("{} + {}", a.label, b.label),
        names,
    )
}

/// `M / N` with the projection `M -> M/N`.
pub fn mod_quotient(m: &ModuleTable, n: &Submodule) -> Result<(ModuleTable, Vec<usize>)> {
    check_len(m, &n.0)?;
    let (proj, reps) = coset_projection(m.size, |a, b| m.add(a, b), &n.0);
    let k = reps.len();
    let mut add = Vec::with_capacity(k * k);
    for &x in &reps {
        for &y in &reps {
            add.push(proj[m.add(x, y)]);
        }
    }
    let mut act = Vec::with_capacity(m.ring.size() * k);
    for r in m.ring.elements() {
        for &x in &reps {
            act.push(proj[m.act(r, x)]);
        }
    }
    let names = reps.iter().map(|&x| format!("[{}]", m.name(x))).collect();
    let q = ModuleTable::from_tables(
        m.ring.clone(),
        k,
        add,
        act,
        proj[m.zero],
        format!("({})/N", m.label),
        names,
    )?;
    Ok((q, proj))
}

// ---------------------------------------------------------------------------
// submodule arithmetic

/// Closure of `gens` under addition and the ring action.
pub fn submodule_generated(m: &ModuleTable, gens: &[usize]) -> Result<Submodule> {
    if let Some(&g) = gens.iter().find(|&&g| g >= m.size) {
        return Err(Error::Parse(format!("element {g} out of range for module of size {}", m.size)));
    }
    let mut acc = m.zero_submodule().0;
    for &g in gens {
        if !acc.contains(g) {
            acc = subgroup_sum(|a, b| m.add(a, b), &acc, &m.cyclic(g).0);
        }
    }
    Ok(Submodule(acc))
}

/// Greedy small generating set of a submodule, in index order.
pub fn submodule_generators(m: &ModuleTable, n: &Submodule) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut acc = m.zero_submodule().0;
    for x in n.0.iter() {
        if !acc.contains(x) {
            gens.push(x);
            acc = subgroup_sum(|a, b| m.add(a, b), &acc, &m.cyclic(x).0);
        }
    }
    gens
}

pub fn sub_sum(m: &ModuleTable, a: &Submodule, b: &Submodule) -> Result<Submodule> {
    check_len(m, &a.0)?;
    check_len(m, &b.0)?;
    Ok(Submodule(subgroup_sum(|x, y| m.add(x, y), &a.0, &b.0)))
}

pub fn sub_intersect(m: &ModuleTable, a: &Submodule, b: &Submodule) -> Result<Submodule> {
    check_len(m, &a.0)?;
    check_len(m, &b.0)?;
    Ok(Submodule(a.0.intersect(&b.0)))
}

/// `(N :_R K) = { r : r K ⊆ N }`.
pub fn colon_ideal(m: &ModuleTable, n: &Submodule, k: &Submodule) -> Result<IdealSet> {
    check_len(m, &n.0)?;
    check_len(m, &k.0)?;
    Ok(colon_ideal_by_gens(m, n, &submodule_generators(m, k)))
}

pub(crate) fn colon_ideal_by_gens(m: &ModuleTable, n: &Submodule, gens: &[usize]) -> IdealSet {
    IdealSet::from_set_unchecked(ElemSet::from_indices(
        m.ring.size(),
        m.ring
            .elements()
            .filter(|&r| gens.iter().all(|&g| n.0.contains(m.act(r, g)))),
    ))
}

/// `(N :_M 𝔞) = { x : 𝔞 x ⊆ N }`.
pub fn colon_into_module(m: &ModuleTable, n: &Submodule, a: &IdealSet) -> Result<Submodule> {
    check_len(m, &n.0)?;
    check_ideal(m, a)?;
    let gens = finring::ideal_generators(&m.ring, a);
    let out = ElemSet::from_indices(
        m.size,
        m.elements().filter(|&x| gens.iter().all(|&g| n.0.contains(m.act(g, x)))),
    );
    Submodule::from_members(m, out)
}

/// `𝔞 K`, the submodule generated by products `r x` with `r ∈ 𝔞`, `x ∈ K`.
pub fn ideal_times(m: &ModuleTable, a: &IdealSet, k: &Submodule) -> Result<Submodule> {
    check_len(m, &k.0)?;
    check_ideal(m, a)?;
    Ok(ideal_times_by_gens(m, a, &submodule_generators(m, k)))
}

pub(crate) fn ideal_times_by_gens(m: &ModuleTable, a: &IdealSet, gens: &[usize]) -> Submodule {
    let mut acc = m.zero_submodule().0;
    for &g in gens {
        // 𝔞g is already an additive subgroup closed under R
        let ag = ElemSet::from_indices(m.size, a.members().iter().map(|r| m.act(r, g)));
        if !ag.is_subset(&acc) {
            acc = subgroup_sum(|x, y| m.add(x, y), &acc, &ag);
        }
    }
    Submodule(acc)
}

/// `Ann(x) = { r : r x = 0 }`.
pub fn element_annihilator(m: &ModuleTable, x: usize) -> IdealSet {
    IdealSet::from_set_unchecked(ElemSet::from_indices(
        m.ring.size(),
        m.ring.elements().filter(|&r| m.act(r, x) == m.zero),
    ))
}

/// `Ann_R(M) = (0 :_R M)`.
pub fn annihilator(m: &ModuleTable) -> IdealSet {
    let gens = submodule_generators(m, &m.whole());
    colon_ideal_by_gens(m, &m.zero_submodule(), &gens)
}

fn minimal_ideals(list: &[IdealSet]) -> Vec<IdealSet> {
    list.iter()
        .filter(|p| !list.iter().any(|q| q.members().is_proper_subset(p.members())))
        .cloned()
        .collect()
}

/// `Ass_R(M)`: the prime ideals of the form `Ann(x)`, canonically ordered.
pub fn ass_module(m: &ModuleTable) -> Result<Vec<IdealSet>> {
    let mut out: Vec<IdealSet> = Vec::new();
    for x in m.elements().filter(|&x| x != m.zero) {
        let ann = element_annihilator(m, x);
        if !out.contains(&ann) && finring::is_prime_ideal(&m.ring, &ann)? {
            out.push(ann);
        }
    }
    out.sort();
    Ok(out)
}

/// Inclusion-minimal members of `Ass_R(M)`.
pub fn mass_module(m: &ModuleTable) -> Result<Vec<IdealSet>> {
    Ok(minimal_ideals(&ass_module(m)?))
}

/// The complement of a union of ideals, as a membership vector.
pub fn complement_of_union(r: &RingTable, primes: &[IdealSet]) -> ElemSet {
    ElemSet::from_indices(r.size(), r.elements().filter(|&s| primes.iter().all(|p| !p.contains(s))))
}

/// `S(N) = ⋃_{s ∈ S} (N :_M s)` for the multiplicative set `S = R \ ⋃ primes`.
pub fn saturate(m: &ModuleTable, n: &Submodule, primes: &[IdealSet]) -> Result<Submodule> {
    for p in primes {
        check_ideal(m, p)?;
    }
    let s = complement_of_union(&m.ring, primes);
    if s.count() == 0 {
        return Err(Error::Precondition("multiplicative set is empty".into()));
    }
    saturate_by(m, n, &s)
}

/// `S(N)` for an explicit multiplicative set given by membership.
pub fn saturate_by(m: &ModuleTable, n: &Submodule, s: &ElemSet) -> Result<Submodule> {
    check_len(m, &n.0)?;
    let out = ElemSet::from_indices(
        m.size,
        m.elements().filter(|&x| s.iter().any(|r| n.0.contains(m.act(r, x)))),
    );
    Submodule::from_members(m, out)
}

/// `(𝔞M)^(n) = S(𝔞ⁿM)` with `S = R \ ⋃ mAss(M/𝔞M)`.
pub fn symbolic_power(m: &ModuleTable, a: &IdealSet, n: usize) -> Result<Submodule> {
    check_ideal(m, a)?;
    if n == 0 {
        return Err(Error::Precondition("symbolic power needs n >= 1".into()));
    }
    let whole_gens = submodule_generators(m, &m.whole());
    let am = ideal_times_by_gens(m, a, &whole_gens);
    if am.is_whole() {
        return Err(Error::Precondition("aM = M, so the multiplicative set is undefined".into()));
    }
    let (quot, _) = mod_quotient(m, &am)?;
    let primes = mass_module(&quot)?;
    let an = ideal_power(&m.ring, a, n)?;
    let anm = ideal_times_by_gens(m, &an, &whole_gens);
    saturate(m, &anm, &primes)
}

/// `Γ_𝔞(M) = ⋃_t (0 :_M 𝔞^t)`.
pub fn gamma(m: &ModuleTable, a: &IdealSet) -> Result<Submodule> {
    check_ideal(m, a)?;
    let zero = m.zero_submodule();
    let mut power = m.ring.unit_ideal();
    let mut acc = zero.clone();
    loop {
        let next = finring::ideal_product(&m.ring, &power, a)?;
        let killed = colon_into_module(m, &zero, &next)?;
        acc = Submodule(acc.0.union(&killed.0));
        if next == power {
            break;
        }
        power = next;
    }
    Ok(acc)
}

/// `R_𝔭` and `M_𝔭` with their projections from `R` and `M`.
#[derive(Debug, Clone)]
pub struct Localization {
    pub ring: Arc<RingTable>,
    pub ring_proj: Vec<usize>,
    pub module: Arc<ModuleTable>,
    pub module_proj: Vec<usize>,
}

impl Localization {
    /// Image `N_𝔭` of a submodule of `M`.
    pub fn image(&self, n: &Submodule) -> Submodule {
        Submodule(ElemSet::from_indices(
            self.module.size(),
            n.0.iter().map(|x| self.module_proj[x]),
        ))
    }

    /// Image `I R_𝔭` of an ideal of `R`.
    pub fn ideal_image(&self, i: &IdealSet) -> IdealSet {
        IdealSet::from_set_unchecked(ElemSet::from_indices(
            self.ring.size(),
            i.members().iter().map(|r| self.ring_proj[r]),
        ))
    }

    /// Preimage in `M` of a submodule of `M_𝔭`.
    pub fn preimage(&self, k: &Submodule) -> Submodule {
        Submodule(ElemSet::from_indices(
            self.module_proj.len(),
            (0..self.module_proj.len()).filter(|&x| k.contains(self.module_proj[x])),
        ))
    }
}

/// Localization at a prime, computed as the quotient by `S`-torsion with
/// `S = R \ 𝔭`. In a finite structure every `s ∈ S` then acts bijectively,
/// which is checked.
pub fn localize(m: &ModuleTable, p: &PrimeWitness) -> Result<Localization> {
    check_ideal(m, &p.ideal)?;
    let r = &m.ring;
    if !finring::is_prime_ideal(r, &p.ideal)? {
        return Err(Error::Precondition("localization needs a prime ideal".into()));
    }
    let s: Vec<usize> = r.elements().filter(|&a| !p.ideal.contains(a)).collect();
    let ring_kernel = ElemSet::from_indices(
        r.size(),
        r.elements().filter(|&a| s.iter().any(|&t| r.mul(t, a) == r.zero())),
    );
    let ring_kernel = IdealSet::from_members(r, ring_kernel)?;
    let (rp, ring_proj) = finring::ring_quotient(r, &ring_kernel)?;
    let rp = Arc::new(rp);
    let mod_kernel = ElemSet::from_indices(
        m.size,
        m.elements().filter(|&x| s.iter().any(|&t| m.act(t, x) == m.zero)),
    );
    let mod_kernel = Submodule::from_members(m, mod_kernel)?;
    let (mq, module_proj) = mod_quotient(m, &mod_kernel)?;
    let mp = mq.over_quotient_ring(rp.clone(), &ring_proj)?;
    for &t in &s {
        let tt = ring_proj[t];
        let image = ElemSet::from_indices(mp.size, mp.elements().map(|x| mp.act(tt, x)));
        if !image.is_full() {
            return Err(Error::Invariant("an element outside the prime is not invertible on M_p".into()));
        }
        let rimage = ElemSet::from_indices(rp.size(), rp.elements().map(|a| rp.mul(tt, a)));
        if !rimage.is_full() {
            return Err(Error::Invariant("an element outside the prime is not a unit in R_p".into()));
        }
    }
    let label = format!("({})_p", m.label);
    Ok(Localization {
        ring: rp,
        ring_proj,
        module: Arc::new(ModuleTable { label, ..mp }),
        module_proj,
    })
}

// ---------------------------------------------------------------------------
// lattice

/// All submodules of a module in canonical order, with upper covers,
/// the distinct cyclic submodules and small generating sets.
pub struct SubmoduleLattice {
    subs: Vec<Submodule>,
    index: HashMap<ElemSet, usize>,
    cyclic: Vec<usize>,
    cyclic_gen: Vec<Option<usize>>,
    elem_cyclic: Vec<usize>,
    covers: Vec<Vec<usize>>,
    gens: Vec<Vec<usize>>,
    tables: OnceLock<(Vec<u32>, Vec<u32>)>,
    module: Arc<ModuleTable>,
}

impl std::fmt::Debug for SubmoduleLattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubmoduleLattice")
            .field("module", &self.module.label())
            .field("len", &self.subs.len())
            .finish()
    }
}

impl SubmoduleLattice {
    pub fn module(&self) -> &Arc<ModuleTable> {
        &self.module
    }
    pub fn len(&self) -> usize {
        self.subs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.subs.is_empty()
    }
    pub fn get(&self, i: usize) -> &Submodule {
        &self.subs[i]
    }
    pub fn iter(&self) -> std::slice::Iter<'_, Submodule> {
        self.subs.iter()
    }
    pub fn index_of(&self, s: &Submodule) -> Option<usize> {
        self.index.get(&s.0).copied()
    }
    /// Index of `{0}`.
    pub fn bottom(&self) -> usize {
        0
    }
    /// Index of `M`.
    pub fn top(&self) -> usize {
        self.subs.len() - 1
    }
    /// Lattice indices of the distinct cyclic submodules, canonical order.
    pub fn cyclic(&self) -> &[usize] {
        &self.cyclic
    }
    /// Smallest generator of lattice element `i` when it is cyclic.
    pub fn cyclic_generator(&self, i: usize) -> Option<usize> {
        self.cyclic_gen[i]
    }
    /// Lattice index of `Rx`.
    pub fn cyclic_of(&self, x: usize) -> usize {
        self.elem_cyclic[x]
    }
    pub fn upper_covers(&self, i: usize) -> &[usize] {
        &self.covers[i]
    }
    pub fn generators(&self, i: usize) -> &[usize] {
        &self.gens[i]
    }
    pub fn le(&self, i: usize, j: usize) -> bool {
        self.subs[i].is_subset(&self.subs[j])
    }

    fn tables(&self) -> &(Vec<u32>, Vec<u32>) {
        self.tables.get_or_init(|| {
            let n = self.subs.len();
            let m = &self.module;
            let rows: Vec<(Vec<u32>, Vec<u32>)> = par::map_range(n, |i| {
                let mut meet = Vec::with_capacity(n);
                let mut join = Vec::with_capacity(n);
                for j in 0..n {
                    let a = &self.subs[i].0;
                    let b = &self.subs[j].0;
                    meet.push(self.index[&a.intersect(b)] as u32);
                    let s = if a.is_subset(b) {
                        j
                    } else if b.is_subset(a) {
                        i
                    } else {
                        self.index[&subgroup_sum(|x, y| m.add(x, y), a, b)]
                    };
                    join.push(s as u32);
                }
                (meet, join)
            });
            let mut meet = Vec::with_capacity(n * n);
            let mut join = Vec::with_capacity(n * n);
            for (a, b) in rows {
                meet.extend(a);
                join.extend(b);
            }
            (meet, join)
        })
    }

    /// Index of `K ∩ L`.
    pub fn meet(&self, i: usize, j: usize) -> usize {
        self.tables().0[i * self.subs.len() + j] as usize
    }

    /// Index of `K + L`.
    pub fn join(&self, i: usize, j: usize) -> usize {
        self.tables().1[i * self.subs.len() + j] as usize
    }
}

pub fn enumerate_submodules(m: &Arc<ModuleTable>) -> Result<SubmoduleLattice> {
    enumerate_submodules_with_cap(m, DEFAULT_LATTICE_CAP)
}

/// Worklist closure: starting from `{0}`, repeatedly adjoin one cyclic
/// submodule to every known submodule, deduplicating by membership.
/// Every submodule is a finite sum of cyclic ones, so this reaches all of them.
pub fn enumerate_submodules_with_cap(m: &ModuleTable, cap: usize) -> Result<SubmoduleLattice> {
    if m.size > cap {
        return Err(Error::cap("module (lattice enumeration)", m.size, cap));
    }
    let module = Arc::new(m.clone());
    let add = |a: usize, b: usize| m.add(a, b);

    // distinct cyclic submodules, first generator wins
    let mut cyc_index: HashMap<ElemSet, usize> = HashMap::new();
    let mut cyc_sets: Vec<(ElemSet, usize)> = Vec::new();
    let mut elem_cyc = Vec::with_capacity(m.size);
    for x in m.elements() {
        let c = m.cyclic(x).0;
        let k = *cyc_index.entry(c.clone()).or_insert_with(|| {
            cyc_sets.push((c, x));
            cyc_sets.len() - 1
        });
        elem_cyc.push(k);
    }

    let mut known: HashMap<ElemSet, usize> = HashMap::new();
    let mut all: Vec<ElemSet> = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let zero = m.zero_submodule().0;
    known.insert(zero.clone(), 0);
    all.push(zero);
    succ.push(Vec::new());
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let sums: Vec<Vec<ElemSet>> = par::map(&frontier, |&k| {
            let base = &all[k];
            cyc_sets
                .iter()
                .filter(|(c, _)| !c.is_subset(base))
                .map(|(c, _)| subgroup_sum(add, base, c))
                .collect()
        });
        let mut next = Vec::new();
        for (&k, list) in frontier.iter().zip(sums) {
            for s in list {
                let idx = match known.get(&s) {
                    Some(&i) => i,
                    None => {
                        let i = all.len();
                        if i >= MAX_LATTICE_NODES {
                            return Err(Error::cap("submodule lattice nodes", i + 1, MAX_LATTICE_NODES));
                        }
                        known.insert(s.clone(), i);
                        all.push(s);
                        succ.push(Vec::new());
                        next.push(i);
                        i
                    }
                };
                succ[k].push(idx);
            }
        }
        frontier = next;
    }

    // canonical renumbering
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by(|&a, &b| all[a].cmp(&all[b]));
    let mut rank = vec![0usize; all.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let subs: Vec<Submodule> = order.iter().map(|&o| Submodule(all[o].clone())).collect();
    let index: HashMap<ElemSet, usize> = subs.iter().enumerate().map(|(i, s)| (s.0.clone(), i)).collect();

    let covers: Vec<Vec<usize>> = order
        .iter()
        .map(|&old| {
            let mut cands: Vec<usize> = succ[old].iter().map(|&s| rank[s]).collect();
            cands.sort_unstable();
            cands.dedup();
            let minimal: Vec<usize> = cands
                .iter()
                .copied()
                .filter(|&c| !cands.iter().any(|&d| d != c && subs[d].0.is_proper_subset(&subs[c].0)))
                .collect();
            minimal
        })
        .collect();

    let mut cyclic_gen = vec![None; subs.len()];
    let mut cyclic: Vec<usize> = cyc_sets
        .iter()
        .map(|(c, g)| {
            let i = index[c];
            cyclic_gen[i] = Some(*g);
            i
        })
        .collect();
    cyclic.sort_unstable();
    let elem_cyclic: Vec<usize> = elem_cyc.iter().map(|&k| index[&cyc_sets[k].0]).collect();

    let gens: Vec<Vec<usize>> = subs
        .iter()
        .map(|s| {
            let mut g = Vec::new();
            let mut acc = m.zero_submodule().0;
            for x in s.0.iter() {
                if !acc.contains(x) {
                    g.push(x);
                    acc = subgroup_sum(add, &acc, &subs[elem_cyclic[x]].0);
                }
            }
            g
        })
        .collect();

    let lat = SubmoduleLattice {
        subs,
        index,
        cyclic,
        cyclic_gen,
        elem_cyclic,
        covers,
        gens,
        tables: OnceLock::new(),
        module,
    };
    if lat.subs[0].count() != 1 || !lat.subs[lat.top()].is_whole() {
        return Err(Error::Invariant("lattice must run from {0} to M".into()));
    }
    Ok(lat)
}

/// Cyclic submodules `Rx` as a canonically sorted, deduplicated list.
pub fn cyclic_submodules(m: &ModuleTable) -> Vec<Submodule> {
    let mut v: Vec<Submodule> = m.elements().map(|x| m.cyclic(x)).collect();
    v.sort();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finring::{ideal_generated, ring_truncated, ring_zmod};
    use std::collections::HashSet;

    fn zmod(n: usize) -> Arc<RingTable> {
        Arc::new(ring_zmod(n).unwrap())
    }

    fn sub(m: &ModuleTable, xs: &[usize]) -> Submodule {
        Submodule::from_members(m, ElemSet::from_indices(m.size(), xs.iter().copied())).unwrap()
    }

    fn prime(r: &RingTable, gens: &[usize]) -> PrimeWitness {
        PrimeWitness {
            ideal: ideal_generated(r, gens).unwrap(),
            is_maximal: true,
        }
    }

    /// Independent oracle: every subset closed under addition and the action,
    /// found by closing all pairs of elements and then all pairwise sums.
    fn brute_submodule_count(m: &ModuleTable) -> usize {
        let close = |seed: &[usize]| -> Vec<bool> {
            let mut s = vec![false; m.size()];
            s[m.zero()] = true;
            for &x in seed {
                s[x] = true;
            }
            loop {
                let mut changed = false;
                for x in 0..m.size() {
                    if !s[x] {
                        continue;
                    }
                    for r in m.ring().elements() {
                        let y = m.act(r, x);
                        if !s[y] {
                            s[y] = true;
                            changed = true;
                        }
                    }
                    for y in 0..m.size() {
                        if s[y] && !s[m.add(x, y)] {
                            s[m.add(x, y)] = true;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    return s;
                }
            }
        };
        let mut found: HashSet<Vec<bool>> = HashSet::new();
        let mut frontier: Vec<Vec<bool>> = vec![close(&[])];
        found.insert(frontier[0].clone());
        while let Some(s) = frontier.pop() {
            for x in 0..m.size() {
                if !s[x] {
                    let mut seed: Vec<usize> = (0..m.size()).filter(|&i| s[i]).collect();
                    seed.push(x);
                    let t = close(&seed);
                    if found.insert(t.clone()) {
                        frontier.push(t);
                    }
                }
            }
        }
        found.len()
    }

    #[test]
    fn constructors() {
        let r = zmod(12);
        let reg = mod_regular(&r).unwrap();
        let cyc0 = mod_cyclic(&r, &r.zero_ideal()).unwrap();
        assert_eq!(cyc0.size(), reg.size());
        assert_eq!(cyc0.add, reg.add);
        assert_eq!(cyc0.act, reg.act);

        let four = ideal_generated(&r, &[4]).unwrap();
        let (q, _) = mod_quotient(&reg, &Submodule(four.members().clone())).unwrap();
        assert_eq!(q.size(), 4);

        let f2 = zmod(2);
        let v = mod_regular(&f2).unwrap();
        let v2 = Arc::new(mod_direct_sum(&v, &v).unwrap());
        assert_eq!(enumerate_submodules(&v2).unwrap().len(), 5);
        assert_eq!(brute_submodule_count(&v2), 5);

        let other = mod_regular(&zmod(3)).unwrap();
        assert!(mod_direct_sum(&v, &other).is_err());
    }

    #[test]
    fn generated_submodules() {
        let r = zmod(12);
        let m = mod_regular(&r).unwrap();
        assert_eq!(submodule_generated(&m, &[]).unwrap().to_vec(), vec![0]);
        assert_eq!(submodule_generated(&m, &[3]).unwrap().to_vec(), vec![0, 3, 6, 9]);
        let f2 = zmod(2);
        let v = mod_regular(&f2).unwrap();
        let v2 = mod_direct_sum(&v, &v).unwrap();
        // (1,1) has index 3
        assert_eq!(submodule_generated(&v2, &[3]).unwrap().to_vec(), vec![0, 3]);
    }

    #[test]
    fn sums_and_intersections() {
        let r = zmod(12);
        let m = mod_regular(&r).unwrap();
        let a = sub(&m, &[0, 4, 8]);
        let b = sub(&m, &[0, 6]);
        let c = sub(&m, &[0, 3, 6, 9]);
        assert_eq!(sub_sum(&m, &a, &m.zero_submodule()).unwrap(), a);
        assert_eq!(sub_intersect(&m, &a, &m.whole()).unwrap(), a);
        assert_eq!(sub_sum(&m, &a, &b).unwrap().to_vec(), vec![0, 2, 4, 6, 8, 10]);
        assert_eq!(sub_intersect(&m, &a, &c).unwrap(), m.zero_submodule());
        let small = mod_regular(&zmod(4)).unwrap();
        assert!(sub_sum(&small, &a, &b).is_err());
    }

    #[test]
    fn colon_ideals() {
        let r = zmod(12);
        let m = mod_regular(&r).unwrap();
        let n = sub(&m, &[0, 4, 8]);
        assert_eq!(colon_ideal(&m, &n, &m.zero_submodule()).unwrap(), r.unit_ideal());
        assert_eq!(colon_ideal(&m, &n, &m.whole()).unwrap().to_vec(), vec![0, 4, 8]);
        let f2 = zmod(2);
        let v = mod_regular(&f2).unwrap();
        let v2 = mod_direct_sum(&v, &v).unwrap();
        assert_eq!(
            colon_ideal(&v2, &v2.zero_submodule(), &v2.whole()).unwrap().to_vec(),
            vec![0]
        );
    }

    #[test]
    fn colon_into_modules() {
        let r = zmod(8);
        let m = mod_regular(&r).unwrap();
        let n = sub(&m, &[0, 4]);
        assert_eq!(colon_into_module(&m, &n, &r.unit_ideal()).unwrap(), n);
        let max = ideal_generated(&r, &[2]).unwrap();
        assert_eq!(colon_into_module(&m, &n, &max).unwrap().to_vec(), vec![0, 2, 4, 6]);
        assert_eq!(
            colon_into_module(&m, &m.zero_submodule(), &r.zero_ideal()).unwrap(),
            m.whole()
        );
    }

    #[test]
    fn lattice_counts_against_brute_force() {
        let f2 = Arc::new(mod_regular(&zmod(2)).unwrap());
        assert_eq!(enumerate_submodules(&f2).unwrap().len(), 2);
        let z12 = Arc::new(mod_regular(&zmod(12)).unwrap());
        assert_eq!(enumerate_submodules(&z12).unwrap().len(), 6);
        assert_eq!(brute_submodule_count(&z12), 6);

        let z4 = zmod(4);
        let a = mod_regular(&z4).unwrap();
        let b = mod_cyclic(&z4, &ideal_generated(&z4, &[2]).unwrap()).unwrap();
        let s = Arc::new(mod_direct_sum(&b, &a).unwrap());
        assert_eq!(enumerate_submodules(&s).unwrap().len(), brute_submodule_count(&s));

        let t = Arc::new(ring_truncated(2, 2, 2).unwrap());
        let reg = Arc::new(mod_regular(&t).unwrap());
        assert_eq!(enumerate_submodules(&reg).unwrap().len(), brute_submodule_count(&reg));
    }

    #[test]
    fn lattice_structure() {
        let z12 = Arc::new(mod_regular(&zmod(12)).unwrap());
        let lat = enumerate_submodules(&z12).unwrap();
        let sizes: Vec<usize> = lat.iter().map(|s| s.count()).collect();
        assert_eq!(sizes, vec![1, 2, 3, 4, 6, 12]);
        for i in 0..lat.len() {
            for j in 0..lat.len() {
                let meet = lat.get(i).intersect(lat.get(j));
                assert_eq!(lat.get(lat.meet(i, j)), &meet);
                let join = sub_sum(&z12, lat.get(i), lat.get(j)).unwrap();
                assert_eq!(lat.get(lat.join(i, j)), &join);
            }
        }
        // covers of {0}: (6) and (4)
        assert_eq!(lat.upper_covers(0), &[1, 2]);
        assert_eq!(lat.cyclic().len(), 6);
        let cap = Arc::new(mod_regular(&zmod(12)).unwrap());
        assert!(enumerate_submodules_with_cap(&cap, 8).is_err());
    }

    #[test]
    fn associated_primes() {
        let f5 = zmod(5);
        let reg = mod_regular(&f5).unwrap();
        assert_eq!(ass_module(&reg).unwrap(), vec![f5.zero_ideal()]);

        let r = zmod(12);
        let m = mod_regular(&r).unwrap();
        let ass: Vec<Vec<usize>> = ass_module(&m).unwrap().iter().map(|p| p.to_vec()).collect();
        assert_eq!(ass, vec![vec![0, 3, 6, 9], vec![0, 2, 4, 6, 8, 10]]);
        assert_eq!(mass_module(&m).unwrap().len(), 2);

        let r8 = zmod(8);
        let m8 = mod_regular(&r8).unwrap();
        let ass8: Vec<Vec<usize>> = ass_module(&m8).unwrap().iter().map(|p| p.to_vec()).collect();
        assert_eq!(ass8, vec![vec![0, 2, 4, 6]]);
    }

    #[test]
    fn saturation() {
        let r = zmod(12);
        let m = mod_regular(&r).unwrap();
        let two = ideal_generated(&r, &[2]).unwrap();
        let n = sub(&m, &[0, 4, 8]);
        let sat = saturate(&m, &n, std::slice::from_ref(&two)).unwrap();
        assert!(n.is_subset(&sat));
        assert_eq!(sat, n);
        // element scan oracle: x with s x = 0 for some odd s
        let oracle: Vec<usize> = (0..12usize)
            .filter(|x| [1usize, 3, 5, 7, 9, 11].iter().any(|s| s * x % 12 == 0))
            .collect();
        assert_eq!(saturate(&m, &m.zero_submodule(), &[two]).unwrap().to_vec(), oracle);
        assert_eq!(oracle, vec![0, 4, 8]);
        assert!(saturate(&m, &n, &[r.unit_ideal()]).is_err());
    }

    #[test]
    fn symbolic_powers() {
        let r8 = zmod(8);
        let m8 = mod_regular(&r8).unwrap();
        let max = ideal_generated(&r8, &[2]).unwrap();
        assert_eq!(symbolic_power(&m8, &max, 2).unwrap().to_vec(), vec![0, 4]);
        assert!(symbolic_power(&m8, &r8.unit_ideal(), 1).is_err());

        let r = zmod(12);
        let m = mod_regular(&r).unwrap();
        let two = ideal_generated(&r, &[2]).unwrap();
        assert_eq!(symbolic_power(&m, &two, 2).unwrap().to_vec(), vec![0, 4, 8]);
    }

    #[test]
    fn localizations() {
        let r = zmod(12);
        let m = mod_regular(&r).unwrap();
        let at2 = localize(&m, &prime(&r, &[2])).unwrap();
        assert_eq!(*at2.ring, ring_zmod(4).unwrap());
        assert_eq!(at2.module.size(), 4);
        let at3 = localize(&m, &prime(&r, &[3])).unwrap();
        assert_eq!(*at3.ring, ring_zmod(3).unwrap());

        let r8 = zmod(8);
        let m8 = mod_regular(&r8).unwrap();
        let loc = localize(&m8, &prime(&r8, &[2])).unwrap();
        assert_eq!(*loc.ring, *r8);
        assert_eq!(loc.module.size(), 8);

        let not_prime = PrimeWitness {
            ideal: ideal_generated(&r, &[4]).unwrap(),
            is_maximal: false,
        };
        assert!(localize(&m, &not_prime).is_err());
    }

    #[test]
    fn gamma_examples() {
        let r = zmod(12);
        let m = mod_regular(&r).unwrap();
        assert_eq!(gamma(&m, &r.unit_ideal()).unwrap(), m.zero_submodule());
        let two = ideal_generated(&r, &[2]).unwrap();
        let oracle: Vec<usize> = (0..12usize)
            .filter(|x| (1..6u32).any(|t| 2usize.pow(t) * x % 12 == 0))
            .collect();
        assert_eq!(gamma(&m, &two).unwrap().to_vec(), oracle);
        assert_eq!(gamma(&m, &r.zero_ideal()).unwrap(), m.whole());
    }
}
