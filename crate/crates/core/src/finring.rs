//! Finite commutative rings given by explicit addition and multiplication
//! tables, with ideal arithmetic.
//!
//! Element encodings are fixed per constructor so reports are bit-stable:
//!
//! * `Z/n`: element `i` is the residue `i`.
//! * `F_p[x]/(f)`: little-endian base-`p` digits of the coefficient vector
//!   (constant term is the least significant digit).
//! * truncated `F_p[x_1..x_k]/(x_1..x_k)^t`: little-endian base-`p` digits
//!   over the monomials of degree `< t`, sorted by degree and then with
//!   earlier variables first (`1, x, y, x^2, xy, y^2, ...`).
//! * `A x B`: `(a, b)` is `a * |B| + b`.
//! * `R / I`: cosets numbered by increasing minimal representative.

use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::ElemSet;
use crate::error::{Error, Result};

/// Largest ring any constructor will build.
pub const MAX_RING_SIZE: usize = 4096;
/// Largest ring for which whole ideal lattices are enumerated.
pub const MAX_LATTICE_RING_SIZE: usize = 256;
/// Up to this size validation runs full triple loops; above it, sampled triples.
pub const FULL_VALIDATION_LIMIT: usize = 64;
const VALIDATION_SAMPLES: usize = 100_000;

#[derive(Clone)]
pub struct RingTable {
    size: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    zero: usize,
    one: usize,
    label: String,
    names: Vec<String>,
}

impl std::fmt::Debug for RingTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RingTable({}, size {})", self.label, self.size)
    }
}

impl PartialEq for RingTable {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
            && self.zero == other.zero
            && self.one == other.one
            && self.add == other.add
            && self.mul == other.mul
    }
}

impl Eq for RingTable {}

impl RingTable {
    /// Build from raw tables. Validates the ring axioms.
    pub fn from_tables(
        size: usize,
        add: Vec<usize>,
        mul: Vec<usize>,
        zero: usize,
        one: usize,
        label: impl Into<String>,
        names: Vec<String>,
    ) -> Result<Self> {
        if size < 2 {
            return Err(Error::Precondition(
                "ring must be nontrivial (at least two elements)".into(),
            ));
        }
        if size > MAX_RING_SIZE {
            return Err(Error::cap("ring", size, MAX_RING_SIZE));
        }
        if add.len() != size * size || mul.len() != size * size || names.len() != size {
            return Err(Error::Parse("ring table dimensions do not match size".into()));
        }
        if add.iter().chain(&mul).any(|&x| x >= size) || zero >= size || one >= size {
            return Err(Error::Parse("ring table entry out of range".into()));
        }
        let add: Vec<u16> = add.into_iter().map(|x| x as u16).collect();
        let mul: Vec<u16> = mul.into_iter().map(|x| x as u16).collect();
        let mut neg = vec![u16::MAX; size];
        for a in 0..size {
            for b in 0..size {
                if add[a * size + b] as usize == zero {
                    neg[a] = b as u16;
                    break;
                }
            }
        }
        if neg.contains(&u16::MAX) {
            return Err(Error::Invariant("addition table lacks inverses".into()));
        }
        let ring = RingTable {
            size,
            add,
            mul,
            neg,
            zero,
            one,
            label: label.into(),
            names,
        };
        ring.validate()?;
        Ok(ring)
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }
    #[inline]
    pub fn zero(&self) -> usize {
        self.zero
    }
    #[inline]
    pub fn one(&self) -> usize {
        self.one
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    /// Human-readable name of element `a`.
    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }
    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.size + b] as usize
    }
    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.size + b] as usize
    }
    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        self.neg[a] as usize
    }
    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    /// Units of the ring.
    pub fn is_unit(&self, a: usize) -> bool {
        self.elements().any(|b| self.mul(a, b) == self.one)
    }

    /// Checks the commutative-ring axioms. Full triple loops up to
    /// [`FULL_VALIDATION_LIMIT`] elements, seeded random triples above.
    pub fn validate(&self) -> Result<()> {
        let q = self.size;
        if self.zero == self.one {
            return Err(Error::Invariant("one equals zero".into()));
        }
        for a in 0..q {
            if self.add(a, self.zero) != a {
                return Err(Error::Invariant(format!("zero is not additive identity at {a}")));
            }
            if self.mul(a, self.one) != a {
                return Err(Error::Invariant(format!("one is not multiplicative identity at {a}")));
            }
            if self.add(a, self.neg(a)) != self.zero {
                return Err(Error::Invariant(format!("no additive inverse for {a}")));
            }
            for b in 0..q {
                if self.add(a, b) != self.add(b, a) || self.mul(a, b) != self.mul(b, a) {
                    return Err(Error::Invariant(format!("not commutative at ({a},{b})")));
                }
            }
        }
        let check = |a: usize, b: usize, c: usize| -> Result<()> {
            if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)) {
                return Err(Error::Invariant(format!("addition not associative at ({a},{b},{c})")));
            }
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                return Err(Error::Invariant(format!(
                    "multiplication not associative at ({a},{b},{c})"
                )));
            }
            if self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c)) {
                return Err(Error::Invariant(format!("not distributive at ({a},{b},{c})")));
            }
            Ok(())
        };
        if q <= FULL_VALIDATION_LIMIT {
            for a in 0..q {
                for b in 0..q {
                    for c in 0..q {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..VALIDATION_SAMPLES {
                check(rng.random_range(0..q), rng.random_range(0..q), rng.random_range(0..q))?;
            }
        }
        Ok(())
    }

    /// Full ideal, as an ideal set.
    pub fn unit_ideal(&self) -> IdealSet {
        IdealSet(ElemSet::full(self.size))
    }

    pub fn zero_ideal(&self) -> IdealSet {
        IdealSet(ElemSet::from_indices(self.size, [self.zero]))
    }
}

fn is_prime_number(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Residue ring `Z/n`.
pub fn ring_zmod(n: usize) -> Result<RingTable> {
    if n < 2 {
        return Err(Error::Precondition(format!("Z/n needs n >= 2, got {n}")));
    }
    if n > MAX_RING_SIZE {
        return Err(Error::cap("ring", n, MAX_RING_SIZE));
    }
    let mut add = Vec::with_capacity(n * n);
    let mut mul = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            add.push((a + b) % n);
            mul.push(a * b % n);
        }
    }
    let names = (0..n).map(|i| i.to_string()).collect();
    RingTable::from_tables(n, add, mul, 0, 1 % n, format!("Z/{n}"), names)
}

fn digits(mut x: usize, p: usize, len: usize) -> Vec<usize> {
    let mut v = Vec::with_capacity(len);
    for _ in 0..len {
        v.push(x % p);
        x /= p;
    }
    v
}

fn undigits(v: &[usize], p: usize) -> usize {
    v.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Renders a polynomial, listing terms in `order` (indices into `coeffs`).
fn poly_name(coeffs: &[usize], monomials: &[String], order: &[usize]) -> String {
    let mut terms = Vec::new();
    for &k in order {
        match (coeffs[k], monomials[k].as_str()) {
            (0, _) => {}
            (c, "1") => terms.push(c.to_string()),
            (1, m) => terms.push(m.to_string()),
            (c, m) => terms.push(format!("{c}{m}")),
        }
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

/// `F_p[x]/(modulus)`, where `modulus` lists coefficients from the constant
/// term upward and must be monic of degree at least one.
pub fn ring_polyquot(p: usize, modulus: &[usize]) -> Result<RingTable> {
    if !is_prime_number(p as u64) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    if modulus.len() < 2 {
        return Err(Error::Precondition("modulus must have degree >= 1".into()));
    }
    let d = modulus.len() - 1;
    if modulus[d] % p != 1 {
        return Err(Error::Precondition("modulus must be monic".into()));
    }
    let size = p
        .checked_pow(d as u32)
        .filter(|&s| s <= MAX_RING_SIZE)
        .ok_or_else(|| Error::cap("ring", usize::MAX, MAX_RING_SIZE))?;
    let f: Vec<usize> = modulus.iter().map(|c| c % p).collect();
    let elems: Vec<Vec<usize>> = (0..size).map(|i| digits(i, p, d)).collect();
    let mulpoly = |a: &[usize], b: &[usize]| -> Vec<usize> {
        let mut prod = vec![0usize; 2 * d];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        // reduce by the monic modulus from the top degree down
        for k in (d..2 * d).rev() {
            let c = prod[k];
            if c != 0 {
                for (i, &fi) in f.iter().enumerate().take(d) {
                    let idx = k - d + i;
                    prod[idx] = (prod[idx] + (p - c) * fi) % p;
                }
                prod[k] = 0;
            }
        }
        prod.truncate(d);
        prod
    };
    let mut add = Vec::with_capacity(size * size);
    let mut mul = Vec::with_capacity(size * size);
    for a in &elems {
        for b in &elems {
            let s: Vec<usize> = a.iter().zip(b).map(|(x, y)| (x + y) % p).collect();
            add.push(undigits(&s, p));
            mul.push(undigits(&mulpoly(a, b), p));
        }
    }
    let monomials: Vec<String> = (0..d)
        .map(|i| match i {
            0 => "1".to_string(),
            1 => "x".to_string(),
            i => format!("x^{i}"),
        })
        .collect();
    let desc: Vec<usize> = (0..d).rev().collect();
    let names = elems.iter().map(|e| poly_name(e, &monomials, &desc)).collect();
    let mut fmonos = monomials.clone();
    fmonos.push(if d == 1 { "x".into() } else { format!("x^{d}") });
    let fname = poly_name(&f, &fmonos, &(0..=d).rev().collect::<Vec<_>>());
    let one = if d == 0 { 0 } else { 1 };
    RingTable::from_tables(size, add, mul, 0, one, format!("F{p}[x]/({fname})"), names)
}

/// `F_p[x_1, .., x_vars] / (x_1, .., x_vars)^order`.
pub fn ring_truncated(p: usize, vars: usize, order: usize) -> Result<RingTable> {
    if !is_prime_number(p as u64) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    if vars == 0 || order == 0 {
        return Err(Error::Precondition("need at least one variable and order >= 1".into()));
    }
    // monomials of total degree < order, by degree then earlier variables first
    let mut monos: Vec<Vec<usize>> = Vec::new();
    for deg in 0..order {
        let mut layer = Vec::new();
        compositions(deg, vars, &mut Vec::new(), &mut layer);
        layer.sort_by(|a, b| b.cmp(a));
        monos.extend(layer);
    }
    let d = monos.len();
    let size = p
        .checked_pow(d as u32)
        .filter(|&s| s <= MAX_RING_SIZE)
        .ok_or_else(|| Error::cap("ring", usize::MAX, MAX_RING_SIZE))?;
    let index_of = |e: &[usize]| monos.iter().position(|m| m == e);
    let mut mono_mul = vec![None; d * d];
    for i in 0..d {
        for j in 0..d {
            let e: Vec<usize> = monos[i].iter().zip(&monos[j]).map(|(a, b)| a + b).collect();
            mono_mul[i * d + j] = index_of(&e);
        }
    }
    let elems: Vec<Vec<usize>> = (0..size).map(|i| digits(i, p, d)).collect();
    let mut add = Vec::with_capacity(size * size);
    let mut mul = Vec::with_capacity(size * size);
    for a in &elems {
        for b in &elems {
            let s: Vec<usize> = a.iter().zip(b).map(|(x, y)| (x + y) % p).collect();
            add.push(undigits(&s, p));
            let mut prod = vec![0usize; d];
            for (i, &x) in a.iter().enumerate().filter(|(_, x)| **x != 0) {
                for (j, &y) in b.iter().enumerate().filter(|(_, y)| **y != 0) {
                    if let Some(k) = mono_mul[i * d + j] {
                        prod[k] = (prod[k] + x * y) % p;
                    }
                }
            }
            mul.push(undigits(&prod, p));
        }
    }
    let var_names: Vec<String> = if vars <= 4 {
        ["x", "y", "z", "w"][..vars].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=vars).map(|i| format!("x{i}")).collect()
    };
    let mono_names: Vec<String> = monos
        .iter()
        .map(|e| {
            let parts: Vec<String> = e
                .iter()
                .zip(&var_names)
                .filter(|(k, _)| **k > 0)
                .map(|(k, v)| if *k == 1 { v.clone() } else { format!("{v}^{k}") })
                .collect();
            if parts.is_empty() {
                "1".into()
            } else {
                parts.join("")
            }
        })
        .collect();
    // higher degree first, earlier variables first within a degree
    let mut term_order: Vec<usize> = (0..d).collect();
    term_order.sort_by_key(|&k| (std::cmp::Reverse(monos[k].iter().sum::<usize>()), k));
    let names = elems.iter().map(|e| poly_name(e, &mono_names, &term_order)).collect();
    let label = format!("F{p}[{}]/({})^{order}", var_names.join(","), var_names.join(","));
    let one = if order == 1 { 0 } else { 1 };
    RingTable::from_tables(size, add, mul, 0, one, label, names)
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        let mut v = prefix.clone();
        v.push(total);
        out.push(v);
        return;
    }
    for k in 0..=total {
        prefix.push(k);
        compositions(total - k, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// Componentwise product ring; `(x, y)` has index `x * |b| + y`.
pub fn ring_product(a: &RingTable, b: &RingTable) -> Result<RingTable> {
    let size = a.size * b.size;
    if size > MAX_RING_SIZE {
        return Err(Error::cap("product ring", size, MAX_RING_SIZE));
    }
    let split = |i: usize| (i / b.size, i % b.size);
    let mut add = Vec::with_capacity(size * size);
    let mut mul = Vec::with_capacity(size * size);
    for i in 0..size {
        let (x1, y1) = split(i);
        for j in 0..size {
            let (x2, y2) = split(j);
            add.push(a.add(x1, x2) * b.size + b.add(y1, y2));
            mul.push(a.mul(x1, x2) * b.size + b.mul(y1, y2));
        }
    }
    let names = (0..size)
        .map(|i| {
            let (x, y) = split(i);
            format!("({},{})", a.name(x), b.name(y))
        })
        .collect();
    RingTable::from_tables(
        size,
        add,
        mul,
        a.zero * b.size + b.zero,
        a.one * b.size + b.one,
        format!("{} x {}", a.label, b.label),
        names,
    )
}

/// Cosets `x + I` numbered by increasing minimal representative.
pub(crate) fn coset_projection(
    len: usize,
    add: impl Fn(usize, usize) -> usize,
    sub: &ElemSet,
) -> (Vec<usize>, Vec<usize>) {
    let mut proj = vec![usize::MAX; len];
    let mut reps = Vec::new();
    for a in 0..len {
        if proj[a] == usize::MAX {
            let c = reps.len();
            reps.push(a);
            for i in sub.iter() {
                proj[add(a, i)] = c;
            }
        }
    }
    (proj, reps)
}

/// `R / I` together with the projection `R -> R/I`.
pub fn ring_quotient(r: &RingTable, i: &IdealSet) -> Result<(RingTable, Vec<usize>)> {
    check_same(r, i)?;
    if i.0.is_full() {
        return Err(Error::Precondition("cannot take the quotient by the unit ideal".into()));
    }
    let (proj, reps) = coset_projection(r.size, |a, b| r.add(a, b), &i.0);
    let q = reps.len();
    let mut add = Vec::with_capacity(q * q);
    let mut mul = Vec::with_capacity(q * q);
    for &x in &reps {
        for &y in &reps {
            add.push(proj[r.add(x, y)]);
            mul.push(proj[r.mul(x, y)]);
        }
    }
    let names = reps.iter().map(|&x| format!("[{}]", r.name(x))).collect();
    let gens = ideal_generators(r, i)
        .iter()
        .map(|&g| r.name(g).to_string())
        .collect::<Vec<_>>()
        .join(",");
    let ring = RingTable::from_tables(
        q,
        add,
        mul,
        proj[r.zero],
        proj[r.one],
        format!("({})/({})", r.label, gens),
        names,
    )?;
    Ok((ring, proj))
}

/// An ideal as a membership vector over ring elements.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdealSet(pub(crate) ElemSet);

impl std::fmt::Debug for IdealSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Ideal{:?}", self.0)
    }
}

impl IdealSet {
    /// Wraps a membership vector, checking the ideal axioms.
    pub fn from_members(r: &RingTable, members: ElemSet) -> Result<Self> {
        if members.universe() != r.size {
            return Err(Error::Mismatch("membership vector length differs from ring size".into()));
        }
        if !members.contains(r.zero) {
            return Err(Error::Invariant("ideal must contain zero".into()));
        }
        for a in members.iter() {
            for b in members.iter() {
                if !members.contains(r.add(a, b)) {
                    return Err(Error::Invariant("ideal not closed under addition".into()));
                }
            }
            for s in r.elements() {
                if !members.contains(r.mul(s, a)) {
                    return Err(Error::Invariant("ideal not closed under multiplication".into()));
                }
            }
        }
        Ok(IdealSet(members))
    }

    pub(crate) fn from_set_unchecked(members: ElemSet) -> Self {
        IdealSet(members)
    }

    pub fn members(&self) -> &ElemSet {
        &self.0
    }
    pub fn contains(&self, a: usize) -> bool {
        self.0.contains(a)
    }
    pub fn count(&self) -> usize {
        self.0.count()
    }
    pub fn is_proper(&self) -> bool {
        !self.0.is_full()
    }
    pub fn is_subset(&self, other: &IdealSet) -> bool {
        self.0.is_subset(&other.0)
    }
    pub fn to_vec(&self) -> Vec<usize> {
        self.0.to_vec()
    }
}

fn check_same(r: &RingTable, i: &IdealSet) -> Result<()> {
    if i.0.universe() != r.size {
        return Err(Error::Mismatch(format!(
            "ideal over {} elements used with ring of size {}",
            i.0.universe(),
            r.size
        )));
    }
    Ok(())
}

/// `A + B` for additive subgroups `A`, `B` given by membership.
pub(crate) fn subgroup_sum(add: impl Fn(usize, usize) -> usize, a: &ElemSet, b: &ElemSet) -> ElemSet {
    let mut out = a.clone();
    for y in b.iter() {
        // y already covered means its whole coset a + y is too
        if !out.contains(y) {
            for x in a.iter() {
                out.insert(add(x, y));
            }
        }
    }
    out
}

/// Principal ideal `(g) = { r g }`.
pub fn principal_ideal(r: &RingTable, g: usize) -> IdealSet {
    IdealSet(ElemSet::from_indices(r.size, r.elements().map(|s| r.mul(s, g))))
}

/// Smallest ideal containing `gens`.
pub fn ideal_generated(r: &RingTable, gens: &[usize]) -> Result<IdealSet> {
    if let Some(&g) = gens.iter().find(|&&g| g >= r.size) {
        return Err(Error::Parse(format!("element {g} out of range for ring of size {}", r.size)));
    }
    let mut acc = r.zero_ideal().0;
    for &g in gens {
        if !acc.contains(g) {
            acc = subgroup_sum(|a, b| r.add(a, b), &acc, &principal_ideal(r, g).0);
        }
    }
    Ok(IdealSet(acc))
}

/// A small generating set, chosen greedily in index order.
pub fn ideal_generators(r: &RingTable, i: &IdealSet) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut acc = r.zero_ideal().0;
    for a in i.0.iter() {
        if !acc.contains(a) {
            gens.push(a);
            acc = subgroup_sum(|x, y| r.add(x, y), &acc, &principal_ideal(r, a).0);
        }
    }
    gens
}

pub fn ideal_sum(r: &RingTable, i: &IdealSet, j: &IdealSet) -> Result<IdealSet> {
    check_same(r, i)?;
    check_same(r, j)?;
    Ok(IdealSet(subgroup_sum(|a, b| r.add(a, b), &i.0, &j.0)))
}

pub fn ideal_intersect(r: &RingTable, i: &IdealSet, j: &IdealSet) -> Result<IdealSet> {
    check_same(r, i)?;
    check_same(r, j)?;
    Ok(IdealSet(i.0.intersect(&j.0)))
}

pub fn ideal_product(r: &RingTable, i: &IdealSet, j: &IdealSet) -> Result<IdealSet> {
    check_same(r, i)?;
    check_same(r, j)?;
    let mut acc = r.zero_ideal().0;
    for a in i.0.iter() {
        // a*J is an additive subgroup closed under R because J is an ideal
        let aj = ElemSet::from_indices(r.size, j.0.iter().map(|b| r.mul(a, b)));
        if !aj.is_subset(&acc) {
            acc = subgroup_sum(|x, y| r.add(x, y), &acc, &aj);
        }
    }
    Ok(IdealSet(acc))
}

/// `I^n`, with `I^0 = R`.
pub fn ideal_power(r: &RingTable, i: &IdealSet, n: usize) -> Result<IdealSet> {
    let mut acc = r.unit_ideal();
    for _ in 0..n {
        acc = ideal_product(r, &acc, i)?;
    }
    Ok(acc)
}

/// `(I : J) = { r : r J ⊆ I }`.
pub fn ideal_colon(r: &RingTable, i: &IdealSet, j: &IdealSet) -> Result<IdealSet> {
    check_same(r, i)?;
    check_same(r, j)?;
    let gens = ideal_generators(r, j);
    Ok(IdealSet(ElemSet::from_indices(
        r.size,
        r.elements().filter(|&s| gens.iter().all(|&g| i.0.contains(r.mul(s, g)))),
    )))
}

/// All four basic ideal operations at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealOps {
    pub sum: IdealSet,
    pub product: IdealSet,
    pub intersection: IdealSet,
    pub colon: IdealSet,
}

pub fn ideal_ops(r: &RingTable, i: &IdealSet, j: &IdealSet) -> Result<IdealOps> {
    Ok(IdealOps {
        sum: ideal_sum(r, i, j)?,
        product: ideal_product(r, i, j)?,
        intersection: ideal_intersect(r, i, j)?,
        colon: ideal_colon(r, i, j)?,
    })
}

/// `Rad(I) = { r : r^t ∈ I for some t }`.
pub fn radical_ideal(r: &RingTable, i: &IdealSet) -> Result<IdealSet> {
    check_same(r, i)?;
    let mut out = ElemSet::empty(r.size);
    let mut seen = HashSet::new();
    for a in r.elements() {
        seen.clear();
        let mut x = a;
        // powers of a are eventually periodic; stop at the first repeat
        loop {
            if i.0.contains(x) {
                out.insert(a);
                break;
            }
            if !seen.insert(x) {
                break;
            }
            x = r.mul(x, a);
        }
    }
    Ok(IdealSet(out))
}

/// Prime test by a full scan over element pairs.
pub fn is_prime_ideal(r: &RingTable, i: &IdealSet) -> Result<bool> {
    check_same(r, i)?;
    if !i.is_proper() {
        return Err(Error::Precondition("the unit ideal is not a prime candidate".into()));
    }
    for a in r.elements().filter(|&a| !i.contains(a)) {
        for b in r.elements().filter(|&b| !i.contains(b)) {
            if i.contains(r.mul(a, b)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeWitness {
    pub ideal: IdealSet,
    pub is_maximal: bool,
}

/// All ideals of `r`, canonically ordered. Delegates to submodule enumeration
/// of the ring as a module over itself.
pub fn enumerate_ideals(r: &Arc<RingTable>) -> Result<Vec<IdealSet>> {
    if r.size > MAX_LATTICE_RING_SIZE {
        return Err(Error::cap("ring (ideal lattice)", r.size, MAX_LATTICE_RING_SIZE));
    }
    let m = crate::finmod::mod_regular(r)?;
    let lat = crate::finmod::enumerate_submodules_with_cap(&m, MAX_LATTICE_RING_SIZE)?;
    Ok(lat.iter().map(|s| IdealSet(s.members().clone())).collect())
}

/// Maximal ideals, each verified prime; in a finite ring the primes are
/// exactly the maximal ideals.
pub fn maximal_ideals(r: &Arc<RingTable>) -> Result<Vec<PrimeWitness>> {
    let ideals = enumerate_ideals(r)?;
    let proper: Vec<&IdealSet> = ideals.iter().filter(|i| i.is_proper()).collect();
    let mut out = Vec::new();
    for i in &proper {
        let maximal = !proper.iter().any(|j| i.0.is_proper_subset(&j.0));
        if maximal {
            if !is_prime_ideal(r, i)? {
                return Err(Error::Invariant("maximal ideal failed the prime test".into()));
            }
            out.push(PrimeWitness {
                ideal: (*i).clone(),
                is_maximal: true,
            });
        }
    }
    Ok(out)
}

/// Every prime ideal found by pair scan over the ideal lattice.
pub fn prime_ideals(r: &Arc<RingTable>) -> Result<Vec<PrimeWitness>> {
    let ideals = enumerate_ideals(r)?;
    let proper: Vec<&IdealSet> = ideals.iter().filter(|i| i.is_proper()).collect();
    let mut out = Vec::new();
    for i in &proper {
        if is_prime_ideal(r, i)? {
            let is_maximal = !proper.iter().any(|j| i.0.is_proper_subset(&j.0));
            if !is_maximal {
                return Err(Error::Invariant("non-maximal prime in a finite ring".into()));
            }
            out.push(PrimeWitness {
                ideal: (*i).clone(),
                is_maximal,
            });
        }
    }
    Ok(out)
}

/// The maximal ideal if `r` is local.
pub fn is_local(r: &Arc<RingTable>) -> Result<Option<IdealSet>> {
    let mut max = maximal_ideals(r)?;
    Ok(if max.len() == 1 {
        Some(max.pop().expect("one element").ideal)
    } else {
        None
    })
}
