//! Law checkers over table modules.

use std::sync::{Arc, OnceLock};

use super::{Checked, LawId, SuiteConfig, Tuple};
use crate::bits::ElemSet;
use crate::error::{Error, Result};
use crate::finmod::{self, Localization, ModuleTable, Submodule};
use crate::finring::{self, IdealSet, PrimeWitness};
use crate::instance::{Instance, InstanceBody};
use crate::par;
use crate::predicates::{self as pr, ColonIdentity, ModuleContext, PropertyVerdict, Witness};

pub(crate) const T4_7_VACUOUS: &str = "𝔭 ∈ Ass(R/Ann M) always";

/// Per-submodule facts shared by most laws.
struct Facts {
    si: bool,
    si_exhaustive: PropertyVerdict,
    si_cyclic: PropertyVerdict,
    irreducible: PropertyVerdict,
    primary: bool,
    primal: bool,
    prime: bool,
    colon: IdealSet,
    radical: IdealSet,
}

struct LocalEnv {
    prime: PrimeWitness,
    loc: Localization,
    ctx: ModuleContext,
}

struct QuotientEnv {
    ctx: ModuleContext,
    proj: Vec<usize>,
}

struct ModuleFacts {
    multiplication: bool,
    arithmetical: bool,
}

pub(super) struct FiniteEnv {
    ctx: ModuleContext,
    lattice_cap: usize,
    local_max: Option<IdealSet>,
    facts: OnceLock<Result<Vec<Option<Facts>>>>,
    module_facts: OnceLock<Result<ModuleFacts>>,
    locals: OnceLock<Result<Vec<LocalEnv>>>,
    quotients: Vec<OnceLock<Result<QuotientEnv>>>,
    ass_quotient: OnceLock<Result<Vec<IdealSet>>>,
}

fn members(s: &Submodule) -> Vec<usize> {
    s.to_vec()
}

impl FiniteEnv {
    pub(super) fn build(inst: &Instance, cfg: &SuiteConfig) -> Result<FiniteEnv> {
        let InstanceBody::Finite { ring, module } = &inst.body else {
            return Err(Error::Mismatch("finite environment for an integer instance".into()));
        };
        let r = Arc::new(ring.build(&cfg.caps)?);
        let m = module.build(&r, &cfg.caps)?;
        let ctx = ModuleContext::with_cap(m, cfg.caps.lattice)?.with_mutation(cfg.mutation);
        let local_max = finring::is_local(ctx.ring())?;
        let quotients = (0..ctx.lattice().len()).map(|_| OnceLock::new()).collect();
        Ok(FiniteEnv {
            ctx,
            lattice_cap: cfg.caps.lattice,
            local_max,
            facts: OnceLock::new(),
            module_facts: OnceLock::new(),
            locals: OnceLock::new(),
            quotients,
            ass_quotient: OnceLock::new(),
        })
    }

    fn module(&self) -> &Arc<ModuleTable> {
        self.ctx.module()
    }

    fn sub(&self, i: usize) -> &Submodule {
        self.ctx.lattice().get(i)
    }

    fn facts(&self, i: usize) -> Result<&Facts> {
        let all = self
            .facts
            .get_or_init(|| {
                let lat = self.ctx.lattice();
                par::map_range(lat.len(), |i| -> Result<Option<Facts>> {
                    let n = lat.get(i);
                    if n.is_whole() {
                        return Ok(None);
                    }
                    let si_exhaustive = pr::is_strongly_irreducible_exhaustive(&self.ctx, n)?;
                    let si_cyclic = pr::is_strongly_irreducible_cyclic(&self.ctx, n)?;
                    let colon = self.ctx.colon_m(n);
                    Ok(Some(Facts {
                        si: si_exhaustive.verdict,
                        si_exhaustive,
                        si_cyclic,
                        irreducible: pr::is_irreducible(&self.ctx, n)?,
                        primary: pr::is_primary_submodule(&self.ctx, n)?.verdict,
                        primal: pr::is_primal(&self.ctx, n)?.verdict,
                        prime: pr::is_prime_submodule(&self.ctx, n)?.verdict,
                        radical: finring::radical_ideal(self.ctx.ring(), &colon)?,
                        colon,
                    }))
                })
                .into_iter()
                .collect()
            })
            .as_ref()
            .map_err(Clone::clone)?;
        all[i]
            .as_ref()
            .ok_or_else(|| Error::Precondition("N = M: the law needs a proper submodule".into()))
    }

    fn module_facts(&self) -> Result<&ModuleFacts> {
        self.module_facts
            .get_or_init(|| {
                Ok(ModuleFacts {
                    multiplication: pr::is_multiplication_module(&self.ctx)?.verdict,
                    arithmetical: pr::is_arithmetical(&self.ctx)?.verdict,
                })
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn locals(&self) -> Result<&[LocalEnv]> {
        self.locals
            .get_or_init(|| {
                let mut out = Vec::new();
                for p in self.ctx.maximal_ideals()? {
                    let loc = finmod::localize(self.module(), p)?;
                    let ctx = ModuleContext::with_cap((*loc.module).clone(), self.lattice_cap)?
                        .with_mutation(self.ctx.mutation());
                    out.push(LocalEnv {
                        prime: p.clone(),
                        loc,
                        ctx,
                    });
                }
                Ok(out)
            })
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(Clone::clone)
    }

    fn local_at(&self, p: &IdealSet) -> Result<&LocalEnv> {
        self.locals()?
            .iter()
            .find(|l| l.prime.ideal == *p)
            .ok_or_else(|| Error::Invariant("prime without a localization".into()))
    }

    fn quotient(&self, u: usize) -> Result<&QuotientEnv> {
        self.quotients[u]
            .get_or_init(|| {
                let (q, proj) = finmod::mod_quotient(self.module(), self.sub(u))?;
                let ctx = ModuleContext::with_cap(q, self.lattice_cap)?.with_mutation(self.ctx.mutation());
                Ok(QuotientEnv { ctx, proj })
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn ass_quotient(&self) -> Result<&[IdealSet]> {
        self.ass_quotient
            .get_or_init(|| {
                let ann = finmod::annihilator(self.module());
                let r_mod_ann = finmod::mod_cyclic(self.ctx.ring(), &ann)?;
                finmod::ass_module(&r_mod_ann)
            })
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(Clone::clone)
    }

    // -----------------------------------------------------------------------
    // tuples

    fn proper_indices(&self) -> Vec<usize> {
        let lat = self.ctx.lattice();
        (0..lat.len()).filter(|&i| !lat.get(i).is_whole()).collect()
    }

    fn n_tuple(&self, i: usize) -> Tuple {
        Tuple {
            n: Some(members(self.sub(i))),
            ..Tuple::default()
        }
    }

    pub(super) fn tuples(&self, law: LawId) -> Result<Vec<Tuple>> {
        let proper = self.proper_indices();
        Ok(match law {
            LawId::T3_1 => vec![Tuple::default()],
            LawId::L2_5 | LawId::P2_6 | LawId::L2_7 => {
                let mut out = Vec::new();
                for &i in &proper {
                    for p in self.ctx.maximal_ideals()? {
                        out.push(Tuple {
                            prime: Some(p.ideal.to_vec()),
                            ..self.n_tuple(i)
                        });
                    }
                }
                out
            }
            LawId::L2_9 | LawId::Q2_9_CONVERSE => {
                let lat = self.ctx.lattice();
                let mut out = Vec::new();
                for &i in &proper {
                    for u in 0..=i {
                        if lat.le(u, i) {
                            out.push(Tuple {
                                aux: Some(members(lat.get(u))),
                                ..self.n_tuple(i)
                            });
                        }
                    }
                }
                out
            }
            _ => proper.iter().map(|&i| self.n_tuple(i)).collect(),
        })
    }

    fn decode_sub(&self, xs: &Option<Vec<usize>>) -> Result<usize> {
        let xs = xs
            .as_ref()
            .ok_or_else(|| Error::Parse("tuple lacks a submodule".into()))?;
        let set = ElemSet::from_indices(self.module().size(), xs.iter().copied());
        self.ctx.index_of(&Submodule::from_members(self.module(), set)?)
    }

    fn decode_prime(&self, t: &Tuple) -> Result<IdealSet> {
        let xs = t
            .prime
            .as_ref()
            .ok_or_else(|| Error::Parse("tuple lacks a prime".into()))?;
        let r = self.ctx.ring();
        IdealSet::from_members(r, ElemSet::from_indices(r.size(), xs.iter().copied()))
    }

    // -----------------------------------------------------------------------
    // checks

    pub(super) fn check(&self, law: LawId, t: &Tuple) -> Result<Checked> {
        if law == LawId::T3_1 {
            return self.t3_1();
        }
        let i = self.decode_sub(&t.n)?;
        if self.sub(i).is_whole() {
            return Err(Error::Precondition("N = M: the law needs a proper submodule".into()));
        }
        match law {
            LawId::L2_2 => self.l2_2(i),
            LawId::L2_3 => self.l2_3(i),
            LawId::L2_5 => self.l2_5(i, &self.decode_prime(t)?),
            LawId::P2_6 => self.p2_6(i, &self.decode_prime(t)?),
            LawId::L2_7 => self.l2_7(i, &self.decode_prime(t)?),
            LawId::L2_9 => self.l2_9(i, self.decode_sub(&t.aux)?, false),
            LawId::Q2_9_CONVERSE => self.l2_9(i, self.decode_sub(&t.aux)?, true),
            LawId::P2_10 => self.p2_10(i),
            LawId::T2_11 => self.t2_11(i),
            LawId::C2_12 => self.c2_12(i),
            LawId::T3_2 => self.t3_2(i),
            LawId::P4_1 => self.p4_1(i),
            LawId::T4_2 => self.t4_2(i),
            LawId::P4_4 => self.p4_4(i),
            LawId::T4_7 => self.t4_7(i),
            LawId::P4_9 => self.p4_9(i),
            LawId::C4_3 | LawId::P4_6 | LawId::C4_8 | LawId::T3_1 => {
                Err(Error::Precondition(format!("{law} has no finite checker")))
            }
        }
    }

    fn l2_2(&self, i: usize) -> Result<Checked> {
        let f = self.facts(i)?;
        let irr = f.irreducible.verdict;
        Ok(if !f.si && !irr {
            Checked::skip("N is neither strongly irreducible nor irreducible")
        } else if f.si && !irr {
            Checked::fail("strongly irreducible but not irreducible")
        } else if !f.primary {
            Checked::fail("irreducible but not primary")
        } else {
            Checked::pass()
        })
    }

    fn l2_3(&self, i: usize) -> Result<Checked> {
        if !self.module_facts()?.multiplication {
            return Ok(Checked::skip("M is not a multiplication module"));
        }
        let f = self.facts(i)?;
        if !f.prime {
            return Ok(Checked::skip("N is not prime"));
        }
        Ok(Checked::check(f.si, || "prime submodule of a multiplication module is not strongly irreducible".into()))
    }

    /// `N_𝔭` when proper, with its strong irreducibility in `M_𝔭`.
    fn local_si(&self, local: &LocalEnv, n: &Submodule) -> Result<Option<bool>> {
        let img = local.loc.image(n);
        if img.is_whole() {
            return Ok(None);
        }
        Ok(Some(pr::is_strongly_irreducible_exhaustive(&local.ctx, &img)?.verdict))
    }

    fn l2_5(&self, i: usize, p: &IdealSet) -> Result<Checked> {
        let local = self.local_at(p)?;
        match self.local_si(local, self.sub(i))? {
            None => return Ok(Checked::skip("S⁻¹N = S⁻¹M")),
            Some(false) => return Ok(Checked::skip("S⁻¹N is not strongly irreducible")),
            Some(true) => {}
        }
        let sat = finmod::saturate(self.module(), self.sub(i), std::slice::from_ref(p))?;
        if sat.is_whole() {
            return Ok(Checked::fail("S(N) = M although S⁻¹N is proper"));
        }
        let si = self.facts(self.ctx.index_of(&sat)?)?.si;
        Ok(Checked::check(si, || format!("S(N) = {:?} is not strongly irreducible", sat.to_vec())))
    }

    fn p2_6(&self, i: usize, p: &IdealSet) -> Result<Checked> {
        let f = self.facts(i)?;
        if !(f.si && f.primary) {
            return Ok(Checked::skip("N is not strongly irreducible and primary"));
        }
        if !f.radical.is_subset(p) {
            return Ok(Checked::skip("Rad(N:M) meets S"));
        }
        let local = self.local_at(p)?;
        Ok(match self.local_si(local, self.sub(i))? {
            None => Checked::fail("S⁻¹N = S⁻¹M"),
            Some(si) => Checked::check(si, || "S⁻¹N is not strongly irreducible".into()),
        })
    }

    fn l2_7(&self, i: usize, p: &IdealSet) -> Result<Checked> {
        let f = self.facts(i)?;
        if !(f.primary && f.radical == *p) {
            return Ok(Checked::skip("N is not 𝔭-primary"));
        }
        let local = self.local_at(p)?;
        if self.local_si(local, self.sub(i))? != Some(true) {
            return Ok(Checked::skip("N_𝔭 is not strongly irreducible"));
        }
        Ok(Checked::check(f.si, || "N is not strongly irreducible".into()))
    }

    fn l2_9(&self, i: usize, u: usize, converse: bool) -> Result<Checked> {
        if !self.ctx.lattice().le(u, i) {
            return Err(Error::Precondition("U is not contained in N".into()));
        }
        let f = self.facts(i)?;
        if !converse && !f.si {
            return Ok(Checked::skip("N is not strongly irreducible"));
        }
        let q = self.quotient(u)?;
        let img = Submodule::from_members(
            q.ctx.module(),
            ElemSet::from_indices(q.ctx.module().size(), self.sub(i).members().iter().map(|x| q.proj[x])),
        )?;
        let quotient_si = pr::is_strongly_irreducible_exhaustive(&q.ctx, &img)?.verdict;
        if !converse {
            return Ok(Checked::check(quotient_si, || "N/U is not strongly irreducible in M/U".into()));
        }
        if !quotient_si {
            return Ok(Checked::skip("N/U is not strongly irreducible in M/U"));
        }
        Ok(if f.si {
            Checked::pass()
        } else {
            let pair = match &f.si_exhaustive.witness {
                Some(Witness::SubmodulePair { k, l }) => format!(" (K = {k:?}, L = {l:?})"),
                _ => String::new(),
            };
            Checked::pass().noted(format!(
                "converse fails: N/U strongly irreducible in M/U but N is not{pair}"
            ))
        })
    }

    fn p2_10(&self, i: usize) -> Result<Checked> {
        let f = self.facts(i)?;
        if f.si_exhaustive.verdict != f.si_cyclic.verdict {
            return Ok(Checked::fail(format!(
                "exhaustive says {}, cyclic says {}",
                f.si_exhaustive.verdict, f.si_cyclic.verdict
            )));
        }
        let n = self.sub(i);
        for v in [&f.si_exhaustive, &f.si_cyclic] {
            if !v.verdict && !pr::revalidate(&self.ctx, Some(n), v)? {
                return Ok(Checked::fail("witness does not re-validate"));
            }
        }
        Ok(Checked::pass())
    }

    /// `𝔪` and `N :_M 𝔪` for strongly irreducible `N` over a local ring.
    fn local_si_colon(&self, i: usize) -> Result<std::result::Result<(&IdealSet, Submodule), Checked>> {
        let Some(m) = self.local_max.as_ref() else {
            return Ok(Err(Checked::skip("R is not quasi-local")));
        };
        if !self.facts(i)?.si {
            return Ok(Err(Checked::skip("N is not strongly irreducible")));
        }
        let c = finmod::colon_into_module(self.module(), self.sub(i), m)?;
        Ok(Ok((m, c)))
    }

    fn t2_11(&self, i: usize) -> Result<Checked> {
        let (m, c) = match self.local_si_colon(i)? {
            Ok(x) => x,
            Err(skip) => return Ok(skip),
        };
        let n = self.sub(i);
        if c == *n {
            return Ok(Checked::skip("N = N :_M 𝔪"));
        }
        let lat = self.ctx.lattice();
        let ci = self.ctx.index_of(&c)?;
        if lat.cyclic_generator(ci).is_none() {
            return Ok(Checked::fail(format!("N :_M 𝔪 = {:?} is not cyclic", c.to_vec())));
        }
        let mc = finmod::ideal_times(self.module(), m, &c)?;
        if mc != *n {
            return Ok(Checked::fail(format!("𝔪(N :_M 𝔪) = {:?} differs from N", mc.to_vec())));
        }
        Ok(match lat.iter().find(|k| !k.is_subset(n) && !c.is_subset(k)) {
            Some(k) => Checked::fail(format!("K = {:?} is neither inside N nor above N :_M 𝔪", k.to_vec())),
            None => Checked::pass(),
        })
    }

    fn c2_12(&self, i: usize) -> Result<Checked> {
        let (m, c) = match self.local_si_colon(i)? {
            Ok(x) => x,
            Err(skip) => return Ok(skip),
        };
        if self.facts(i)?.radical != *m {
            return Ok(Checked::skip("Rad(N:M) ≠ 𝔪"));
        }
        let v = pr::is_sheltered(&self.ctx, self.sub(i))?;
        Ok(match (&v.verdict, &v.witness) {
            (true, Some(Witness::Shelter { shelter })) if *shelter == c.to_vec() => Checked::pass(),
            (true, Some(Witness::Shelter { shelter })) => {
                Checked::fail(format!("shelter {shelter:?} differs from N :_M 𝔪 = {:?}", c.to_vec()))
            }
            _ => Checked::fail("N is not sheltered"),
        })
    }

    fn t3_1(&self) -> Result<Checked> {
        let verdicts = [
            ("distributive", pr::is_distributive_module(&self.ctx)?.verdict),
            ("arithmetical", pr::is_arithmetical(&self.ctx)?.verdict),
            ("colon identity iii", pr::colon_identity(&self.ctx, ColonIdentity::Sum)?.verdict),
            ("colon identity iv", pr::colon_identity(&self.ctx, ColonIdentity::Meet)?.verdict),
            ("all submodules multiplication", pr::all_submodules_multiplication(&self.ctx)?.verdict),
        ];
        let agree = verdicts.iter().all(|(_, v)| *v == verdicts[0].1);
        Ok(Checked::check(agree, || {
            verdicts
                .iter()
                .map(|(name, v)| format!("{name}={v}"))
                .collect::<Vec<_>>()
                .join(", ")
        }))
    }

    fn t3_2(&self, i: usize) -> Result<Checked> {
        let f = self.facts(i)?;
        let irr = f.irreducible.verdict;
        if !self.module_facts()?.arithmetical {
            let skip = Checked::skip("M is not arithmetical");
            return Ok(match (&f.si_exhaustive.witness, irr && !f.si) {
                (Some(Witness::SubmodulePair { k, l }), true) => {
                    skip.noted(format!("irreducible but not strongly irreducible: K = {k:?}, L = {l:?}"))
                }
                _ => skip,
            });
        }
        Ok(Checked::check(irr == f.si && f.si == f.primal, || {
            format!("irreducible={irr}, strongly irreducible={}, primal={}", f.si, f.primal)
        }))
    }

    fn p4_1(&self, i: usize) -> Result<Checked> {
        let f = self.facts(i)?;
        if !f.si {
            return Ok(Checked::skip("N is not strongly irreducible"));
        }
        let p = &f.radical;
        let local = self.local_at(p)?;
        let n = self.sub(i);
        let np = local.loc.image(n);
        let pr_p = local.loc.ideal_image(p);
        if local.ctx.ideal_times_m(&pr_p) == np {
            return Ok(Checked::skip("𝔭M_𝔭 = N_𝔭"));
        }
        let colon_p = local.loc.image(&finmod::colon_into_module(self.module(), n, p)?);
        let ci = local.ctx.index_of(&colon_p)?;
        if local.ctx.lattice().cyclic_generator(ci).is_none() {
            return Ok(Checked::fail("(N :_M 𝔭)_𝔭 is not cyclic"));
        }
        let c = finmod::colon_into_module(local.ctx.module(), &np, &pr_p)?;
        if finmod::ideal_times(local.ctx.module(), &pr_p, &c)? != np {
            return Ok(Checked::fail("N_𝔭 ≠ 𝔭(N_𝔭 : 𝔭R_𝔭)"));
        }
        Ok(
            match self
                .ctx
                .lattice()
                .iter()
                .find(|k| !k.is_subset(n) && !c.is_subset(&local.loc.image(k)))
            {
                Some(k) => Checked::fail(format!(
                    "K = {:?} is not inside N and K_𝔭 does not contain (N_𝔭 : 𝔭R_𝔭)",
                    k.to_vec()
                )),
                None => Checked::pass(),
            },
        )
    }

    fn t4_2(&self, i: usize) -> Result<Checked> {
        let (m, c) = match self.local_si_colon(i)? {
            Ok(x) => x,
            Err(skip) => return Ok(skip),
        };
        let n = self.sub(i);
        if self.ctx.ideal_times_m(m) == *n {
            return Ok(Checked::skip("𝔪M = N"));
        }
        if self.facts(i)?.radical != *m {
            return Ok(Checked::skip("Rad(N:M) ≠ 𝔪"));
        }
        let lat = self.ctx.lattice();
        let comparable = |a: &Submodule, b: &Submodule| a.is_subset(b) || b.is_subset(a);
        if let Some(k) = lat.iter().find(|k| !comparable(k, n) || !comparable(k, &c)) {
            return Ok(Checked::fail(format!("K = {:?} is incomparable to N or N :_M 𝔪", k.to_vec())));
        }
        let size = self.module().size();
        let mut union = ElemSet::empty(size);
        let mut meet = ElemSet::full(size);
        for k in lat.iter() {
            if k.is_proper_subset(&c) {
                union.union_with(k.members());
            }
            if n.is_proper_subset(k) {
                meet = meet.intersect(k.members());
            }
        }
        if union != *n.members() {
            return Ok(Checked::fail("N is not the union of the submodules strictly below N :_M 𝔪"));
        }
        Ok(Checked::check(meet == *c.members(), || {
            "N :_M 𝔪 is not the intersection of the submodules strictly above N".into()
        }))
    }

    fn p4_4(&self, i: usize) -> Result<Checked> {
        if !self.module_facts()?.multiplication {
            return Ok(Checked::skip("M is not a multiplication module"));
        }
        let f = self.facts(i)?;
        if finring::is_prime_ideal(self.ctx.ring(), &f.colon)? {
            return Ok(Checked::skip("(N:M) is prime"));
        }
        let n = self.sub(i);
        let lat = self.ctx.lattice();
        let mut structure = None;
        if f.primary {
            let p = &f.radical;
            let local = self.local_at(p)?;
            let pm = self.ctx.ideal_times_m(p);
            structure = lat.iter().position(|l| {
                n.is_proper_subset(l)
                    && l.is_subset(&pm)
                    && lat
                        .iter()
                        .all(|k| k.is_subset(n) || local.loc.image(l).is_subset(&local.loc.image(k)))
            });
        }
        Ok(Checked::check(f.si == structure.is_some(), || {
            format!(
                "strongly irreducible={} but (L, 𝔭) structure {}",
                f.si,
                if structure.is_some() { "exists" } else { "is missing" }
            )
        }))
    }

    fn t4_7(&self, i: usize) -> Result<Checked> {
        let f = self.facts(i)?;
        let ass = self.ass_quotient()?;
        for p in self.ctx.maximal_ideals()? {
            if f.colon.is_subset(&p.ideal) && !ass.contains(&p.ideal) {
                return Ok(Checked::fail(format!(
                    "prime {:?} above (N:M) lies outside Ass(R/Ann M)",
                    p.ideal.to_vec()
                )));
            }
        }
        Ok(Checked::skip(T4_7_VACUOUS))
    }

    fn p4_9(&self, i: usize) -> Result<Checked> {
        let f = self.facts(i)?;
        if !f.si {
            return Ok(Checked::skip("N is not strongly irreducible"));
        }
        let n = self.sub(i);
        if pr::radical_submodule(&self.ctx, n)? != *n {
            return Ok(Checked::skip("rad_M(N) ≠ N"));
        }
        Ok(Checked::check(f.prime, || "N is not prime".into()))
    }
}
