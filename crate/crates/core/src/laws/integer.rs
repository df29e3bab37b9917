//! Law checkers over finitely generated `Z`-modules.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Checked, LawId, SuiteConfig, Tuple};
use crate::error::{Error, Result};
use crate::instance::{Instance, InstanceBody};
use crate::zlattice::{
    self as z, Decision, ZModule, ZSubmodule, ZVerdict, DEFAULT_WITNESS_BOUND,
};

/// Sampled pairs per distributivity check.
pub(crate) const DISTRIBUTIVE_SAMPLES: usize = 1000;
/// Entry bound of sampled generators.
pub(crate) const SAMPLE_HEIGHT: i64 = 6;
/// Primes tried when looking for a non-prime-colon strongly irreducible submodule.
const SMALL_PRIMES: [i64; 4] = [2, 3, 5, 7];

type Pair = (Vec<i64>, Vec<i64>);

pub(super) struct ZEnv {
    name: String,
    seed: u64,
    m: ZModule,
    subs: Vec<ZSubmodule>,
    decisions: Vec<OnceLock<Result<ZVerdict>>>,
    searches: Vec<OnceLock<Result<Option<Pair>>>>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl ZEnv {
    pub(super) fn build(inst: &Instance, cfg: &SuiteConfig) -> Result<ZEnv> {
        let InstanceBody::Zlattice { zmodule, zsubs } = &inst.body else {
            return Err(Error::Mismatch("integer environment for a finite instance".into()));
        };
        let m = zmodule.build()?;
        let subs = zsubs.iter().map(|s| s.build(&m)).collect::<Result<Vec<_>>>()?;
        Ok(ZEnv {
            name: inst.name.clone(),
            seed: cfg.seed,
            decisions: subs.iter().map(|_| OnceLock::new()).collect(),
            searches: subs.iter().map(|_| OnceLock::new()).collect(),
            m,
            subs,
        })
    }

    fn decision(&self, k: usize) -> Result<&ZVerdict> {
        self.decisions[k]
            .get_or_init(|| z::z_decide_strongly_irreducible(&self.m, &self.subs[k], DEFAULT_WITNESS_BOUND))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn search(&self, k: usize) -> Result<&Option<Pair>> {
        self.searches[k]
            .get_or_init(|| z::z_witness_search(&self.m, &self.subs[k], DEFAULT_WITNESS_BOUND))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub(super) fn tuples(&self, law: LawId) -> Vec<Tuple> {
        match law {
            LawId::C4_8 => vec![Tuple::default()],
            _ => (0..self.subs.len())
                .map(|k| Tuple {
                    zsub: Some(k),
                    ..Tuple::default()
                })
                .collect(),
        }
    }

    pub(super) fn check(&self, law: LawId, t: &Tuple) -> Result<Checked> {
        if law == LawId::C4_8 {
            return self.c4_8();
        }
        let k = t
            .zsub
            .filter(|&k| k < self.subs.len())
            .ok_or_else(|| Error::Parse("tuple lacks a valid zsub index".into()))?;
        match law {
            LawId::L2_2 => self.l2_2(k),
            LawId::C4_3 => self.c4_3(k),
            LawId::P4_6 => self.p4_6(k),
            LawId::T4_7 => self.t4_7(k),
            _ => Err(Error::Precondition(format!("{law} has no integer checker"))),
        }
    }

    fn l2_2(&self, k: usize) -> Result<Checked> {
        if self.decision(k)?.verdict != Decision::True {
            return Ok(Checked::skip("N is not decided strongly irreducible"));
        }
        let p = z::z_is_primary(&self.m, &self.subs[k])?;
        Ok(Checked::check(p.verdict, || "strongly irreducible but not primary".into()))
    }

    fn c4_3(&self, k: usize) -> Result<Checked> {
        if self.m.is_torsion() {
            return Ok(Checked::skip("dim M = 0"));
        }
        if self.decision(k)?.verdict != Decision::True {
            return Ok(Checked::skip("N is not decided strongly irreducible"));
        }
        let n = &self.subs[k];
        let e = z::z_colon(&self.m, n)?;
        if !z::z_regular_element_in(&e, &self.m) {
            return Ok(Checked::skip("(N:M) has no regular element on M"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(self.name.as_bytes()) ^ (k as u64).rotate_left(32));
        let rank = self.m.rank();
        let draw = |rng: &mut ChaCha8Rng| -> Vec<Vec<i64>> {
            let gens = rng.random_range(1..=2);
            (0..gens)
                .map(|_| (0..rank).map(|_| rng.random_range(-SAMPLE_HEIGHT..=SAMPLE_HEIGHT)).collect())
                .collect()
        };
        for _ in 0..DISTRIBUTIVE_SAMPLES {
            let kg = draw(&mut rng);
            let lg = draw(&mut rng);
            let ks = self.m.sub_i64(&kg)?;
            let ls = self.m.sub_i64(&lg)?;
            let left = z::z_sum(&self.m, &z::z_intersect(&self.m, &ks, &ls)?, n)?;
            let right = z::z_intersect(
                &self.m,
                &z::z_sum(&self.m, &ks, n)?,
                &z::z_sum(&self.m, &ls, n)?,
            )?;
            if left != right {
                return Ok(Checked::fail(format!(
                    "(K∩L)+N ≠ (K+N)∩(L+N) for K = span {kg:?}, L = span {lg:?}"
                )));
            }
        }
        Ok(Checked::pass())
    }

    /// `(e, p)` for a non-zero, non-prime colon `(e)` over a faithful module.
    fn faithful_nonprime_colon(&self, k: usize) -> Result<std::result::Result<(BigInt, BigInt), Checked>> {
        if self.m.is_torsion() {
            return Ok(Err(Checked::skip("M is not faithful, so 𝔭 ∈ Ass(R/Ann M)")));
        }
        let e = z::z_colon(&self.m, &self.subs[k])?;
        if e.is_zero() {
            return Ok(Err(Checked::skip("𝔭 = 0 ∈ Ass(R/Ann M)")));
        }
        if z::is_prime_int(&e) {
            return Ok(Err(Checked::skip("𝔭M ⊆ N")));
        }
        let p = z::z_radical(&e);
        Ok(Ok((e, p)))
    }

    fn p4_6(&self, k: usize) -> Result<Checked> {
        if self.decision(k)?.verdict != Decision::True {
            return Ok(Checked::skip("N is not decided strongly irreducible"));
        }
        let (e, p) = match self.faithful_nonprime_colon(k)? {
            Ok(x) => x,
            Err(skip) => return Ok(skip),
        };
        if !z::is_prime_int(&p) {
            return Ok(Checked::fail("strongly irreducible N with a non-primary colon"));
        }
        Ok(Checked::check(z::z_regular_element_localized(&e, &self.m, &p), || {
            format!("(N:M)_𝔭 = ({e}) has no regular element on M_𝔭, 𝔭 = ({p})")
        }))
    }

    /// Primary, `M_𝔭` arithmetical and `N = (𝔭M)^(n)` for some `n > 1`,
    /// computed without the decision procedure.
    fn symbolic_side(&self, k: usize, e: &BigInt) -> Result<bool> {
        let n = &self.subs[k];
        let prim = z::z_is_primary(&self.m, n)?;
        let Some(p) = prim.prime.filter(|_| prim.verdict) else {
            return Ok(false);
        };
        if !z::z_arithmetical_at(&self.m, &p)? {
            return Ok(false);
        }
        for exp in 2..=z::valuation(e, &p) + 1 {
            if z::z_symbolic_power(&self.m, &p, exp)? == *n {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn t4_7(&self, k: usize) -> Result<Checked> {
        let (e, _) = match self.faithful_nonprime_colon(k)? {
            Ok(x) => x,
            Err(skip) => return Ok(skip),
        };
        let d = self.decision(k)?;
        let mut out = match d.verdict {
            Decision::Undecided => Checked::fail("undecided on a non-prime colon"),
            v => {
                let decided = v == Decision::True;
                let rhs = self.symbolic_side(k, &e)?;
                if decided != rhs {
                    Checked::fail(format!("decision {decided} but the symbolic-power side says {rhs}"))
                } else {
                    match (decided, self.search(k)?) {
                        (true, Some(w)) => Checked::fail(format!("decided true but search found {w:?}")),
                        (false, None) => Checked::fail("decided false but no witness at the search bound"),
                        (false, Some((x, y))) => {
                            let xb: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
                            let yb: Vec<BigInt> = y.iter().map(|&v| BigInt::from(v)).collect();
                            Checked::check(z::z_witness_check(&self.m, &self.subs[k], &xb, &yb)?, || {
                                "search witness does not re-validate".into()
                            })
                        }
                        (true, None) => Checked::pass(),
                    }
                }
            }
        };
        if let Some(a) = &d.anomaly {
            out = out.noted(a.clone());
        }
        Ok(out)
    }

    fn c4_8(&self) -> Result<Checked> {
        let m = &self.m;
        if m.is_zero() || !m.invariants().factors().is_empty() {
            return Ok(Checked::skip("M is not torsion-free"));
        }
        let mut rhs = false;
        let mut lhs = false;
        for p in SMALL_PRIMES {
            let p = BigInt::from(p);
            let arithmetical = z::z_arithmetical_at(m, &p)?;
            rhs |= arithmetical;
            let cand = z::z_symbolic_power(m, &p, 2)?;
            let v = z::z_decide_strongly_irreducible(m, &cand, DEFAULT_WITNESS_BOUND)?;
            let si = match v.verdict {
                Decision::True => true,
                Decision::False => false,
                Decision::Undecided => return Ok(Checked::fail("candidate (𝔭M)^(2) left undecided")),
            };
            if arithmetical && !si {
                return Ok(Checked::fail(format!("M_{p} arithmetical but (𝔭M)^(2) is not strongly irreducible")));
            }
            if si && z::z_witness_search(m, &cand, DEFAULT_WITNESS_BOUND)?.is_some() {
                return Ok(Checked::fail(format!("(𝔭M)^(2) for 𝔭 = ({p}) decided true but a witness exists")));
            }
            lhs |= si;
        }
        for k in 0..self.subs.len() {
            let e = z::z_colon(m, &self.subs[k])?;
            if !e.is_zero() && !z::is_prime_int(&e) && self.decision(k)?.verdict == Decision::True {
                lhs = true;
            }
        }
        Ok(Checked::check(lhs == rhs, || {
            format!("non-prime-colon strongly irreducible submodule found: {lhs}; arithmetical localization: {rhs}")
        }))
    }
}
