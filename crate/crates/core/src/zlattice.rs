//! Finitely generated modules over the integers.
//!
//! `M = Z^k / Rel` is given by a relation lattice; a submodule `N` of `M` is
//! stored as the lattice `N ⊇ Rel` in `Z^k`. Lattices are kept in a canonical
//! column Hermite form:
//!
//! * each column's pivot is its bottom-most nonzero entry, and pivots are positive;
//! * pivot rows strictly increase with the column index;
//! * in each pivot row, the entries of all later columns lie in `[0, pivot)`.
//!
//! Equal lattices therefore have identical matrices.

use std::cmp::Reverse;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::finmod::{ModuleTable, Submodule, DEFAULT_LATTICE_CAP, MAX_MODULE_SIZE};
use crate::finring::ring_zmod;
use crate::par;
use crate::predicates::{self, ModuleContext};

pub const DEFAULT_WITNESS_BOUND: u32 = 8;

pub type Col = Vec<BigInt>;

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

/// Serializes as a JSON number when it fits in `i64`, else as a decimal string.
fn ser_big<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x.to_i64() {
        Some(v) => s.serialize_i64(v),
        None => s.serialize_str(&x.to_string()),
    }
}

fn ser_big_opt<S: Serializer>(x: &Option<BigInt>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser_big(v, s),
        None => s.serialize_none(),
    }
}

fn ser_big_vec<S: Serializer>(xs: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        match x.to_i64() {
            Some(v) => seq.serialize_element(&v)?,
            None => seq.serialize_element(&x.to_string())?,
        }
    }
    seq.end()
}

// ---------------------------------------------------------------------------
// lattices

/// A sublattice of `Z^dim` in canonical column Hermite form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Lattice {
    dim: usize,
    cols: Vec<Col>,
    pivots: Vec<usize>,
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols: Vec<String> = self
            .cols
            .iter()
            .map(|c| format!("({})", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "span[{}]", cols.join(" "))
    }
}

/// Column echelon on the top `top` rows. Returns the pivot columns (bottom
/// row first) and the columns whose top part became zero.
fn echelon(cols: Vec<Col>, top: usize) -> (Vec<(usize, Col)>, Vec<Col>) {
    let mut active = cols;
    let mut pivots = Vec::new();
    for row in (0..top).rev() {
        loop {
            let nz: Vec<usize> = (0..active.len()).filter(|&c| !active[c][row].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            if nz.len() == 1 {
                let mut col = active.swap_remove(nz[0]);
                if col[row].is_negative() {
                    for x in col.iter_mut() {
                        *x = -&*x;
                    }
                }
                pivots.push((row, col));
                break;
            }
            let m = *nz
                .iter()
                .min_by(|&&a, &&b| active[a][row].abs().cmp(&active[b][row].abs()))
                .expect("nonempty");
            let pivot_col = active[m].clone();
            for &c in &nz {
                if c == m {
                    continue;
                }
                let q = &active[c][row] / &pivot_col[row];
                if !q.is_zero() {
                    for (x, p) in active[c].iter_mut().zip(&pivot_col) {
                        *x -= &q * p;
                    }
                }
            }
        }
    }
    (pivots, active)
}

impl Lattice {
    /// Canonical form of the span of `gens` (each of length `dim`).
    pub fn span(dim: usize, gens: &[Col]) -> Result<Self> {
        if let Some(c) = gens.iter().find(|c| c.len() != dim) {
            return Err(Error::Mismatch(format!("column of length {} in ambient rank {dim}", c.len())));
        }
        let nonzero: Vec<Col> = gens.iter().filter(|c| c.iter().any(|x| !x.is_zero())).cloned().collect();
        let (mut piv, _) = echelon(nonzero, dim);
        piv.reverse();
        let pivots: Vec<usize> = piv.iter().map(|(r, _)| *r).collect();
        let mut cols: Vec<Col> = piv.into_iter().map(|(_, c)| c).collect();
        for j2 in 0..cols.len() {
            for j in (0..j2).rev() {
                let row = pivots[j];
                let q = cols[j2][row].div_floor(&cols[j][row]);
                if !q.is_zero() {
                    let cj = cols[j].clone();
                    for (x, p) in cols[j2].iter_mut().zip(&cj) {
                        *x -= &q * p;
                    }
                }
            }
        }
        Ok(Lattice { dim, cols, pivots })
    }

    pub fn from_i64(dim: usize, gens: &[Vec<i64>]) -> Result<Self> {
        let cols: Vec<Col> = gens.iter().map(|c| c.iter().map(|&x| big(x)).collect()).collect();
        Self::span(dim, &cols)
    }

    pub fn zero(dim: usize) -> Self {
        Lattice {
            dim,
            cols: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(dim: usize) -> Self {
        Self::scaled(dim, &BigInt::one())
    }

    /// `a Z^dim`.
    pub fn scaled(dim: usize, a: &BigInt) -> Self {
        if a.is_zero() {
            return Self::zero(dim);
        }
        let cols = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { a.abs() } else { BigInt::zero() }).collect())
            .collect();
        Lattice {
            dim,
            cols,
            pivots: (0..dim).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn rank(&self) -> usize {
        self.cols.len()
    }
    pub fn columns(&self) -> &[Col] {
        &self.cols
    }
    pub fn pivot_rows(&self) -> &[usize] {
        &self.pivots
    }

    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        self.cols.iter().map(|c| c.iter().map(|x| x.to_i64()).collect()).collect()
    }

    /// Back-substitution from the bottom row.
    pub fn contains(&self, x: &[BigInt]) -> bool {
        if x.len() != self.dim {
            return false;
        }
        let mut v: Col = x.to_vec();
        let mut j = self.cols.len();
        for row in (0..self.dim).rev() {
            if j > 0 && self.pivots[j - 1] == row {
                j -= 1;
                let (q, r) = v[row].div_rem(&self.cols[j][row]);
                if !r.is_zero() {
                    return false;
                }
                if !q.is_zero() {
                    for (a, p) in v.iter_mut().zip(&self.cols[j]) {
                        *a -= &q * p;
                    }
                }
            } else if !v[row].is_zero() {
                return false;
            }
        }
        true
    }

    pub fn is_subset(&self, other: &Lattice) -> bool {
        self.cols.iter().all(|c| other.contains(c))
    }

    pub fn sum(&self, other: &Lattice) -> Result<Lattice> {
        self.same_dim(other)?;
        let all: Vec<Col> = self.cols.iter().chain(&other.cols).cloned().collect();
        Lattice::span(self.dim, &all)
    }

    /// Kernel of `[A | -B]`, mapped through `A`.
    pub fn intersect(&self, other: &Lattice) -> Result<Lattice> {
        self.same_dim(other)?;
        let (a, b) = (self.cols.len(), other.cols.len());
        let n = a + b;
        let aug: Vec<Col> = self
            .cols
            .iter()
            .cloned()
            .chain(other.cols.iter().map(|c| c.iter().map(|x| -x).collect()))
            .enumerate()
            .map(|(i, mut c)| {
                c.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
                c
            })
            .collect();
        let (_, kernel) = echelon(aug, self.dim);
        let gens: Vec<Col> = kernel
            .iter()
            .map(|v| {
                let mut out = vec![BigInt::zero(); self.dim];
                for (u, col) in v[self.dim..self.dim + a].iter().zip(&self.cols) {
                    if !u.is_zero() {
                        for (o, x) in out.iter_mut().zip(col) {
                            *o += u * x;
                        }
                    }
                }
                out
            })
            .collect();
        Lattice::span(self.dim, &gens)
    }

    /// `{ x : s x ∈ self }` for `s ≠ 0`.
    pub fn colon_by(&self, s: &BigInt) -> Result<Lattice> {
        if s.is_zero() {
            return Err(Error::Precondition("colon by zero".into()));
        }
        let meet = self.intersect(&Lattice::scaled(self.dim, s))?;
        let cols: Vec<Col> = meet.cols.iter().map(|c| c.iter().map(|x| x / s).collect()).collect();
        Lattice::span(self.dim, &cols)
    }

    fn same_dim(&self, other: &Lattice) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Mismatch(format!("ambient ranks {} and {} differ", self.dim, other.dim)));
        }
        Ok(())
    }

    /// Smith diagonal of `Z^dim / self`: the nonzero diagonal entries, in
    /// divisibility order, length equal to the rank.
    pub fn smith_diagonal(&self) -> Vec<BigInt> {
        let rows = self.dim;
        let ncols = self.cols.len();
        let mut a: Vec<Vec<BigInt>> = (0..rows).map(|i| self.cols.iter().map(|c| c[i].clone()).collect()).collect();
        let mut diag = Vec::new();
        let mut t = 0;
        while t < rows.min(ncols) {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..ncols {
                    if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            a.swap(t, bi);
            for row in a.iter_mut() {
                row.swap(t, bj);
            }
            loop {
                let mut dirty = false;
                for i in t + 1..rows {
                    if !a[i][t].is_zero() {
                        let q = a[i][t].div_floor(&a[t][t]);
                        for j in t..ncols {
                            let v = &q * &a[t][j];
                            a[i][j] -= v;
                        }
                        if !a[i][t].is_zero() {
                            a.swap(t, i);
                            dirty = true;
                        }
                    }
                }
                for j in t + 1..ncols {
                    if !a[t][j].is_zero() {
                        let q = a[t][j].div_floor(&a[t][t]);
                        for row in a.iter_mut().skip(t) {
                            let v = &q * &row[t];
                            row[j] -= v;
                        }
                        if !a[t][j].is_zero() {
                            for row in a.iter_mut() {
                                row.swap(t, j);
                            }
                            dirty = true;
                        }
                    }
                }
                if dirty {
                    continue;
                }
                // the pivot must divide the rest of the block
                let bad = (t + 1..rows).find(|&i| (t + 1..ncols).any(|j| !(&a[i][j] % &a[t][t]).is_zero()));
                match bad {
                    Some(i) => {
                        for j in t..ncols {
                            let v = a[i][j].clone();
                            a[t][j] += v;
                        }
                    }
                    None => break,
                }
            }
            diag.push(a[t][t].abs());
            t += 1;
        }
        diag
    }
}

// ---------------------------------------------------------------------------
// modules and submodules

/// `Z^r ⊕ ⊕ Z/d_i` data of a quotient `Z^k / L`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZInvariants {
    pub free_rank: usize,
    /// Full Smith diagonal, including unit entries.
    #[serde(serialize_with = "ser_big_vec")]
    pub diagonal: Vec<BigInt>,
}

impl ZInvariants {
    fn of(l: &Lattice) -> Self {
        let diagonal = l.smith_diagonal();
        ZInvariants {
            free_rank: l.dim() - diagonal.len(),
            diagonal,
        }
    }

    /// Invariant factors `d_i > 1`.
    pub fn factors(&self) -> Vec<BigInt> {
        self.diagonal.iter().filter(|d| !d.is_one()).cloned().collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.factors().is_empty()
    }

    /// Exponent of the torsion part (1 when torsion-free).
    pub fn torsion_exponent(&self) -> BigInt {
        self.diagonal.iter().fold(BigInt::one(), |acc, d| acc.lcm(d))
    }

    /// `e` with `Ann = (e)`: 0 with a free part, else the torsion exponent.
    pub fn annihilator(&self) -> BigInt {
        if self.free_rank > 0 {
            BigInt::zero()
        } else {
            self.torsion_exponent()
        }
    }

    pub fn divisible_by(&self, p: &BigInt) -> usize {
        self.factors().iter().filter(|d| (*d % p).is_zero()).count()
    }

    /// Cyclic module: at most one summand.
    pub fn is_cyclic(&self) -> bool {
        self.free_rank + self.factors().len() <= 1
    }

    pub fn order(&self) -> Option<BigInt> {
        (self.free_rank == 0).then(|| self.diagonal.iter().product())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZModule {
    rank: usize,
    relations: Lattice,
    invariants: ZInvariants,
}

impl ZModule {
    pub fn new(rank: usize, relations: &[Col]) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Parse("ambient rank must be at least 1".into()));
        }
        let relations = Lattice::span(rank, relations)?;
        let invariants = ZInvariants::of(&relations);
        Ok(ZModule {
            rank,
            relations,
            invariants,
        })
    }

    pub fn from_i64(rank: usize, relations: &[Vec<i64>]) -> Result<Self> {
        let cols: Vec<Col> = relations.iter().map(|c| c.iter().map(|&x| big(x)).collect()).collect();
        Self::new(rank, &cols)
    }

    pub fn free(rank: usize) -> Result<Self> {
        Self::new(rank, &[])
    }

    /// `Z^free ⊕ Z/d_1 ⊕ … ⊕ Z/d_t` with diagonal relations.
    pub fn standard(free: usize, torsion: &[i64]) -> Result<Self> {
        let k = free + torsion.len();
        let rels: Vec<Vec<i64>> = torsion
            .iter()
            .enumerate()
            .map(|(i, &d)| (0..k).map(|j| if j == free + i { d } else { 0 }).collect())
            .collect();
        Self::from_i64(k, &rels)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn relations(&self) -> &Lattice {
        &self.relations
    }
    pub fn invariants(&self) -> &ZInvariants {
        &self.invariants
    }
    pub fn is_torsion(&self) -> bool {
        self.invariants.free_rank == 0
    }
    pub fn is_zero(&self) -> bool {
        self.invariants.is_trivial()
    }

    pub fn zero_sub(&self) -> ZSubmodule {
        ZSubmodule {
            lattice: self.relations.clone(),
        }
    }
    pub fn whole(&self) -> ZSubmodule {
        ZSubmodule {
            lattice: Lattice::full(self.rank),
        }
    }

    /// `a M`.
    pub fn multiple(&self, a: &BigInt) -> ZSubmodule {
        let l = Lattice::scaled(self.rank, a)
            .sum(&self.relations)
            .expect("same ambient rank");
        ZSubmodule { lattice: l }
    }

    /// The submodule generated by `gens` (ambient coordinates).
    pub fn sub(&self, gens: &[Col]) -> Result<ZSubmodule> {
        let l = Lattice::span(self.rank, gens)?.sum(&self.relations)?;
        Ok(ZSubmodule { lattice: l })
    }

    pub fn sub_i64(&self, gens: &[Vec<i64>]) -> Result<ZSubmodule> {
        let cols: Vec<Col> = gens.iter().map(|c| c.iter().map(|&x| big(x)).collect()).collect();
        self.sub(&cols)
    }

    pub fn cyclic(&self, x: &[BigInt]) -> Result<ZSubmodule> {
        self.sub(&[x.to_vec()])
    }

    fn check(&self, n: &ZSubmodule) -> Result<()> {
        if n.lattice.dim() != self.rank || !self.relations.is_subset(&n.lattice) {
            return Err(Error::Mismatch("submodule does not belong to this module".into()));
        }
        Ok(())
    }
}

/// A submodule `N` of `M = Z^k/Rel`, stored as its preimage lattice in `Z^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZSubmodule {
    lattice: Lattice,
}

impl ZSubmodule {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.lattice.contains(x)
    }
    pub fn is_subset(&self, other: &ZSubmodule) -> bool {
        self.lattice.is_subset(&other.lattice)
    }
}

pub fn z_canonicalize(dim: usize, gens: &[Col]) -> Result<Lattice> {
    Lattice::span(dim, gens)
}

pub fn z_membership(n: &ZSubmodule, x: &[BigInt]) -> bool {
    n.contains(x)
}

pub fn z_sum(m: &ZModule, a: &ZSubmodule, b: &ZSubmodule) -> Result<ZSubmodule> {
    m.check(a)?;
    m.check(b)?;
    Ok(ZSubmodule {
        lattice: a.lattice.sum(&b.lattice)?,
    })
}

pub fn z_intersect(m: &ZModule, a: &ZSubmodule, b: &ZSubmodule) -> Result<ZSubmodule> {
    m.check(a)?;
    m.check(b)?;
    Ok(ZSubmodule {
        lattice: a.lattice.intersect(&b.lattice)?,
    })
}

/// Invariants of `M / N`.
pub fn z_quotient_invariants(m: &ZModule, n: &ZSubmodule) -> Result<ZInvariants> {
    m.check(n)?;
    Ok(ZInvariants::of(&n.lattice))
}

/// `e` with `(N :_Z M) = (e)`.
pub fn z_colon(m: &ZModule, n: &ZSubmodule) -> Result<BigInt> {
    Ok(z_quotient_invariants(m, n)?.annihilator())
}

/// `e` with `Ann_Z(M) = (e)`.
pub fn z_ann(m: &ZModule) -> BigInt {
    m.invariants.annihilator()
}

/// Prime divisors by trial division, ascending.
pub fn prime_divisors(e: &BigInt) -> Vec<BigInt> {
    let mut n = e.abs();
    let mut out = Vec::new();
    let mut d = big(2);
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            while (&n % &d).is_zero() {
                n /= &d;
            }
        }
        d += 1;
    }
    if n > BigInt::one() {
        out.push(n);
    }
    out
}

/// Square-free kernel; `0 ↦ 0`.
pub fn z_radical(e: &BigInt) -> BigInt {
    if e.is_zero() {
        return BigInt::zero();
    }
    prime_divisors(e).iter().product()
}

pub fn is_prime_int(p: &BigInt) -> bool {
    p > &BigInt::one() && prime_divisors(p) == vec![p.clone()]
}

/// `v_p(e)` for `e ≠ 0`.
pub fn valuation(e: &BigInt, p: &BigInt) -> u32 {
    let mut n = e.abs();
    let mut v = 0;
    while !n.is_zero() && (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

fn require_proper(m: &ZModule, n: &ZSubmodule) -> Result<ZInvariants> {
    let inv = z_quotient_invariants(m, n)?;
    if inv.is_trivial() {
        return Err(Error::Precondition("N = M: the predicate needs a proper submodule".into()));
    }
    Ok(inv)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZPrimary {
    pub verdict: bool,
    /// The prime `p` of a `p`-primary submodule, 0 for torsion-free quotients.
    #[serde(serialize_with = "ser_big_opt")]
    pub prime: Option<BigInt>,
}

pub fn z_is_primary(m: &ZModule, n: &ZSubmodule) -> Result<ZPrimary> {
    let inv = require_proper(m, n)?;
    let factors = inv.factors();
    if inv.free_rank > 0 {
        let ok = factors.is_empty();
        return Ok(ZPrimary {
            verdict: ok,
            prime: ok.then(BigInt::zero),
        });
    }
    let primes = prime_divisors(&inv.torsion_exponent());
    Ok(if primes.len() == 1 {
        ZPrimary {
            verdict: true,
            prime: primes.into_iter().next(),
        }
    } else {
        ZPrimary {
            verdict: false,
            prime: None,
        }
    })
}

pub fn z_is_prime_submodule(m: &ZModule, n: &ZSubmodule) -> Result<bool> {
    let inv = require_proper(m, n)?;
    if inv.free_rank > 0 {
        return Ok(inv.factors().is_empty());
    }
    Ok(is_prime_int(&inv.torsion_exponent()))
}

/// `M_p` uniserial over `Z_(p)`: `r + #{i : p | d_i} ≤ 1`.
pub fn z_arithmetical_at(m: &ZModule, p: &BigInt) -> Result<bool> {
    if !is_prime_int(p) {
        return Err(Error::Precondition(format!("{p} is not a prime")));
    }
    let inv = m.invariants();
    Ok(inv.free_rank + inv.divisible_by(p) <= 1)
}

/// `{ x : s x ∈ N for some s coprime to p }`.
pub fn z_saturate(m: &ZModule, n: &ZSubmodule, p: &BigInt) -> Result<ZSubmodule> {
    let inv = z_quotient_invariants(m, n)?;
    let mut s = inv.torsion_exponent();
    while (&s % p).is_zero() {
        s /= p;
    }
    Ok(ZSubmodule {
        lattice: n.lattice.colon_by(&s)?,
    })
}

/// `(pM)^(n) = S(p^n M)` with `S = Z \ pZ`.
pub fn z_symbolic_power(m: &ZModule, p: &BigInt, n: u32) -> Result<ZSubmodule> {
    if !is_prime_int(p) {
        return Err(Error::Precondition(format!("{p} is not a prime")));
    }
    if n == 0 {
        return Err(Error::Precondition("symbolic power needs n >= 1".into()));
    }
    if m.multiple(p) == m.whole() {
        return Err(Error::Precondition("pM = M".into()));
    }
    z_saturate(m, &m.multiple(&num_traits::pow(p.clone(), n as usize)), p)
}

/// Some multiple of `e` acts injectively on `M`.
pub fn z_regular_element_in(e: &BigInt, m: &ZModule) -> bool {
    !e.is_zero() && e.gcd(&m.invariants().torsion_exponent()).is_one()
}

/// Some element of `(e) Z_(p)` acts injectively on `M_p`.
pub fn z_regular_element_localized(e: &BigInt, m: &ZModule, p: &BigInt) -> bool {
    !e.is_zero() && (!(e % p).is_zero() || m.invariants().divisible_by(p) == 0)
}

// ---------------------------------------------------------------------------
// witness search and the decision procedure

/// `Zx ∩ Zy ⊆ N` in `M` with `x, y ∉ N`.
pub fn z_witness_check(m: &ZModule, n: &ZSubmodule, x: &[BigInt], y: &[BigInt]) -> Result<bool> {
    m.check(n)?;
    if n.contains(x) || n.contains(y) {
        return Ok(false);
    }
    let meet = m.cyclic(x)?.lattice.intersect(&m.cyclic(y)?.lattice)?;
    Ok(meet.is_subset(&n.lattice))
}

/// Candidate vectors of height ≤ bound, first nonzero coordinate positive,
/// ordered by (height, support size, reverse lexicographic).
pub fn z_candidates(k: usize, bound: u32) -> Vec<Vec<i64>> {
    let b = bound as i64;
    let mut out = Vec::new();
    let mut v = vec![-b; k];
    loop {
        if let Some(first) = v.iter().find(|x| **x != 0) {
            if *first > 0 {
                out.push(v.clone());
            }
        }
        let mut i = 0;
        while i < k {
            if v[i] < b {
                v[i] += 1;
                break;
            }
            v[i] = -b;
            i += 1;
        }
        if i == k {
            break;
        }
    }
    out.sort_by_key(|v| {
        (
            v.iter().map(|x| x.abs()).max().unwrap_or(0),
            v.iter().filter(|x| **x != 0).count(),
            Reverse(v.clone()),
        )
    });
    out
}

/// First candidate pair `(x, y)` in canonical order with `Zx ∩ Zy ⊆ N`.
pub fn z_witness_search(m: &ZModule, n: &ZSubmodule, bound: u32) -> Result<Option<(Vec<i64>, Vec<i64>)>> {
    m.check(n)?;
    if bound == 0 {
        return Err(Error::Precondition("witness bound must be at least 1".into()));
    }
    let cands: Vec<(Vec<i64>, Lattice)> = z_candidates(m.rank(), bound)
        .into_iter()
        .filter_map(|v| {
            let col: Col = v.iter().map(|&x| big(x)).collect();
            if n.contains(&col) {
                None
            } else {
                Some(m.cyclic(&col).map(|s| (v, s.lattice)))
            }
        })
        .collect::<Result<_>>()?;
    let idx: Vec<usize> = (0..cands.len()).collect();
    let hit = par::find_first_map(&idx, |&i| {
        (i + 1..cands.len())
            .find(|&j| {
                cands[i]
                    .1
                    .intersect(&cands[j].1)
                    .map(|meet| meet.is_subset(&n.lattice))
                    .unwrap_or(false)
            })
            .map(|j| (cands[i].0.clone(), cands[j].0.clone()))
    });
    Ok(hit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    True,
    False,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZPath {
    #[serde(rename = "prime-colon")]
    PrimeColon,
    #[serde(rename = "thm47")]
    SymbolicPower,
    #[serde(rename = "torsion-reduction")]
    TorsionReduction,
    #[serde(rename = "witness-only")]
    WitnessOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZVerdict {
    pub verdict: Decision,
    pub path: ZPath,
    #[serde(serialize_with = "ser_big_opt", skip_serializing_if = "Option::is_none")]
    pub prime: Option<BigInt>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(Vec<i64>, Vec<i64>)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anomaly: Option<String>,
}

impl ZVerdict {
    fn new(verdict: Decision, path: ZPath) -> Self {
        ZVerdict {
            verdict,
            path,
            prime: None,
            n: None,
            witness: None,
            reason: None,
            anomaly: None,
        }
    }
}

/// Decides strong irreducibility of `N` in `M`.
///
/// Torsion modules are finite and go through [`z_to_finite`]. Otherwise
/// `Ann M = 0`: a non-primary `N` is not strongly irreducible; a prime
/// colon gives a positive answer when `M` is cyclic and is left undecided
/// otherwise; a non-prime `p`-primary colon is decided by local
/// arithmeticity at `p` together with `N = (pM)^(n)`, `n = v_p(e)`.
pub fn z_decide_strongly_irreducible(m: &ZModule, n: &ZSubmodule, bound: u32) -> Result<ZVerdict> {
    let inv = require_proper(m, n)?;

    if m.is_torsion() {
        let fin = z_to_finite(m)?;
        let ctx = ModuleContext::with_cap(fin.module.clone(), DEFAULT_LATTICE_CAP)?;
        let fn_ = fin.to_finite_sub(n)?;
        let full = predicates::is_strongly_irreducible_exhaustive(&ctx, &fn_)?;
        let cyc = predicates::is_strongly_irreducible_cyclic(&ctx, &fn_)?;
        if full.verdict != cyc.verdict {
            return Err(Error::Invariant("cyclic and full scans disagree".into()));
        }
        let mut v = ZVerdict::new(
            if full.verdict { Decision::True } else { Decision::False },
            ZPath::TorsionReduction,
        );
        if let Some(predicates::Witness::SubmodulePair { k, l }) = cyc.witness {
            let lat = ctx.lattice();
            let gen = |xs: &[usize]| -> Result<Vec<i64>> {
                let s = Submodule::from_members(ctx.module(), crate::bits::ElemSet::from_indices(ctx.module().size(), xs.iter().copied()))?;
                let i = ctx.index_of(&s)?;
                let g = lat
                    .cyclic_generator(i)
                    .ok_or_else(|| Error::Invariant("cyclic witness without generator".into()))?;
                Ok(fin.reps[g].clone())
            };
            v.witness = Some((gen(&k)?, gen(&l)?));
        }
        return Ok(v);
    }

    let primary = z_is_primary(m, n)?;
    if !primary.verdict {
        let mut v = ZVerdict::new(Decision::False, ZPath::WitnessOnly);
        v.reason = Some("not primary".into());
        v.witness = z_witness_search(m, n, bound)?;
        return Ok(v);
    }

    let e = inv.annihilator();
    if e.is_zero() || is_prime_int(&e) {
        let mut v;
        if m.invariants().is_cyclic() {
            v = ZVerdict::new(Decision::True, ZPath::PrimeColon);
            v.reason = Some("prime submodule of a cyclic (multiplication) module".into());
        } else {
            v = ZVerdict::new(Decision::Undecided, ZPath::PrimeColon);
            v.reason = Some("prime colon over a non-multiplication module; bounded search evidence attached".into());
            v.witness = z_witness_search(m, n, bound)?;
        }
        v.prime = Some(e);
        return Ok(v);
    }

    let p = primary.prime.expect("primary with a torsion quotient has a prime");
    let k = valuation(&e, &p);
    let arithmetical = z_arithmetical_at(m, &p)?;
    let sym = z_symbolic_power(m, &p, k)?;
    let holds = arithmetical && sym == *n;
    let mut v = ZVerdict::new(if holds { Decision::True } else { Decision::False }, ZPath::SymbolicPower);
    v.prime = Some(p);
    v.n = Some(k);
    if k == 1 {
        v.anomaly = Some("exponent n = 1 in the non-prime colon branch".into());
    }
    if !holds {
        v.reason = Some(if arithmetical {
            "N differs from the symbolic power".into()
        } else {
            "M is not arithmetical at p".into()
        });
        v.witness = z_witness_search(m, n, bound)?;
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// bridge to the finite backend

/// A torsion `Z`-module as a table module over `Z/e`, `e` the exponent.
/// Elements are canonical coset representatives `0 ≤ x_i < h_i` (the
/// Hermite pivots), indexed little-endian in mixed radix.
#[derive(Debug, Clone)]
pub struct FiniteImage {
    pub module: ModuleTable,
    pub reps: Vec<Vec<i64>>,
    radix: Vec<i64>,
    source: ZModule,
}

impl FiniteImage {
    /// Index of the element represented by an ambient vector.
    pub fn element(&self, v: &[i64]) -> usize {
        let mut w = v.to_vec();
        reduce_mod(self.source.relations(), &mut w);
        mixed_index(&self.radix, &w)
    }

    pub fn to_finite_sub(&self, n: &ZSubmodule) -> Result<Submodule> {
        self.source.check(n)?;
        let members = crate::bits::ElemSet::from_indices(
            self.module.size(),
            self.reps
                .iter()
                .enumerate()
                .filter(|(_, r)| n.contains(&r.iter().map(|&x| big(x)).collect::<Vec<_>>()))
                .map(|(i, _)| i),
        );
        Submodule::from_members(&self.module, members)
    }

    pub fn from_finite_sub(&self, s: &Submodule) -> Result<ZSubmodule> {
        let gens: Vec<Col> = crate::finmod::submodule_generators(&self.module, s)
            .iter()
            .map(|&g| self.reps[g].iter().map(|&x| big(x)).collect())
            .collect();
        self.source.sub(&gens)
    }
}

fn mixed_index(radix: &[i64], v: &[i64]) -> usize {
    let mut idx = 0usize;
    let mut scale = 1usize;
    for (x, h) in v.iter().zip(radix) {
        idx += *x as usize * scale;
        scale *= *h as usize;
    }
    idx
}

fn reduce_mod(rel: &Lattice, v: &mut [i64]) {
    for (j, col) in rel.columns().iter().enumerate().rev() {
        let row = rel.pivot_rows()[j];
        let h = col[row].to_i64().expect("small pivot");
        let q = v[row].div_euclid(h);
        if q != 0 {
            for (a, c) in v.iter_mut().zip(col) {
                *a -= q * c.to_i64().expect("small entry");
            }
        }
    }
}

pub fn z_to_finite(m: &ZModule) -> Result<FiniteImage> {
    if !m.is_torsion() {
        return Err(Error::Precondition("module has a free part".into()));
    }
    if m.is_zero() {
        return Err(Error::Precondition("zero module".into()));
    }
    let rel = m.relations();
    let radix: Vec<i64> = (0..m.rank())
        .map(|j| rel.columns()[j][j].to_i64().unwrap_or(i64::MAX))
        .collect();
    let size = radix.iter().try_fold(1i64, |acc, &h| acc.checked_mul(h)).unwrap_or(i64::MAX);
    if size > MAX_MODULE_SIZE as i64 {
        return Err(Error::cap("finite image of torsion module", size.max(0) as usize, MAX_MODULE_SIZE));
    }
    let size = size as usize;
    let exp = z_ann(m).to_usize().expect("small exponent");
    let reps: Vec<Vec<i64>> = (0..size)
        .map(|mut i| {
            radix
                .iter()
                .map(|&h| {
                    let x = (i % h as usize) as i64;
                    i /= h as usize;
                    x
                })
                .collect()
        })
        .collect();
    let combine = |a: &[i64], b: &[i64], s: i64| -> usize {
        let mut v: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + s * y).collect();
        reduce_mod(rel, &mut v);
        mixed_index(&radix, &v)
    };
    let zero = vec![0i64; m.rank()];
    let mut add = Vec::with_capacity(size * size);
    for a in &reps {
        for b in &reps {
            add.push(combine(a, b, 1));
        }
    }
    let mut act = Vec::with_capacity(exp * size);
    for r in 0..exp as i64 {
        for a in &reps {
            act.push(combine(&zero, a, r));
        }
    }
    let names = reps
        .iter()
        .map(|r| format!("({})", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    let ring = std::sync::Arc::new(ring_zmod(exp)?);
    let module = ModuleTable::from_tables(ring, size, add, act, 0, "Z-module", names)?;
    Ok(FiniteImage {
        module,
        reps,
        radix,
        source: m.clone(),
    })
}
