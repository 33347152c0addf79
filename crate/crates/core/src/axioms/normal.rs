//! Normalizers built from the directed schemas: semi-head normal form,
//! head normal form under a state operator, elimination of maximal progress
//! over head normal forms, and full normalization.
//!
//! Every rewrite goes through [`apply_root`] at an explicit position, so a
//! normalizer with tracing enabled produces a replayable [`RewriteTrace`].

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::canon::{alt_canonical, is_hproc};
use super::{apply_root, replace_at, subterm, Ax, Path, RewriteStep, RewriteTrace};
use crate::comm::{CommState, SpeedConfig};
use crate::error::{Error, Result};
use crate::meadow::{ExtScalar, Scalar};
use crate::semantics::DEFAULT_UNFOLD_BUDGET;
use crate::terms::{ActionPattern, Name, Term};

/// Default bound on how many action prefixes deep full normalization goes.
pub const DEFAULT_TAIL_DEPTH: usize = 64;

const STATE_ATOM: &[Ax] = &[
    Ax::S1,
    Ax::S2,
    Ax::S3,
    Ax::S4,
    Ax::S5,
    Ax::S6,
    Ax::S7,
    Ax::S8,
    Ax::S9,
    Ax::S10,
    Ax::S11,
    Ax::S12,
    Ax::S13,
    Ax::S14,
    Ax::S15,
    Ax::S16,
];

const STATE_PREFIX: &[Ax] = &[
    Ax::S17,
    Ax::S18,
    Ax::S19,
    Ax::S20,
    Ax::S21,
    Ax::S22,
    Ax::S23,
    Ax::S24,
    Ax::S25,
    Ax::S26,
    Ax::S27,
    Ax::S28,
    Ax::S29,
];

const TIMEOUT_DEAD: &[Ax] = &[Ax::T1, Ax::T2, Ax::T3, Ax::T4, Ax::T11, Ax::T12, Ax::T13, Ax::T14];

type Step = fn(&mut Normalizer, &Term) -> Result<Term>;

/// Rewriting context: speed configuration, budgets, the current position
/// and the optional trace.
pub struct Normalizer {
    pub cfg: SpeedConfig,
    pub unfold_budget: usize,
    pub tail_depth: usize,
    trace: Option<RewriteTrace>,
    path: Path,
    unfolds: usize,
    memo: HashMap<Term, Term>,
}

impl Normalizer {
    pub fn new(cfg: SpeedConfig) -> Self {
        Normalizer {
            cfg,
            unfold_budget: DEFAULT_UNFOLD_BUDGET,
            tail_depth: DEFAULT_TAIL_DEPTH,
            trace: None,
            path: Vec::new(),
            unfolds: 0,
            memo: HashMap::new(),
        }
    }

    /// Record every rewrite from now on.
    pub fn traced(mut self) -> Self {
        self.trace = Some(RewriteTrace::default());
        self
    }

    /// The steps recorded since the last call.
    pub fn take_trace(&mut self) -> Option<RewriteTrace> {
        let t = self.trace.take();
        if t.is_some() {
            self.trace = Some(RewriteTrace::default());
        }
        t
    }

    fn begin(&mut self) {
        self.path.clear();
        self.unfolds = 0;
    }

    fn record(&mut self, axiom: Ax, redex: &Term, result: &Term) {
        if let Some(tr) = &mut self.trace {
            tr.steps.push(RewriteStep { axiom, path: self.path.clone(), redex: redex.clone(), result: result.clone() });
        }
    }

    fn try_rw(&mut self, ax: Ax, p: &Term) -> Result<Option<Term>> {
        let r = apply_root(ax, p, &self.cfg)?;
        if let Some(q) = &r {
            self.record(ax, p, q);
        }
        Ok(r)
    }

    fn rw(&mut self, ax: Ax, p: &Term) -> Result<Term> {
        self.try_rw(ax, p)?.ok_or_else(|| Error::Misuse(format!("{ax} does not apply to {p}")))
    }

    fn first(&mut self, axs: &[Ax], p: &Term) -> Result<Option<Term>> {
        for ax in axs {
            if let Some(q) = self.try_rw(*ax, p)? {
                return Ok(Some(q));
            }
        }
        Ok(None)
    }

    /// Rewrite child `i` of `p` with `f` and rebuild `p` around the result.
    fn on_child(&mut self, p: &Term, i: u8, f: Step) -> Result<Term> {
        let c = subterm(p, &[i]).expect("child exists").clone();
        self.path.push(i);
        let r = f(self, &c);
        self.path.pop();
        let n = r?;
        if n == c {
            return Ok(p.clone());
        }
        Ok(replace_at(p, &[i], n).expect("child exists"))
    }

    fn both(&mut self, p: &Term, f: Step) -> Result<Term> {
        let q = self.on_child(p, 0, f)?;
        self.on_child(&q, 1, f)
    }

    /// Semi-head normal form.
    pub fn shnf(&mut self, p: &Term) -> Result<Term> {
        self.begin();
        self.sh(p)
    }

    fn sh(&mut self, p: &Term) -> Result<Term> {
        let memo = self.trace.is_none();
        if memo {
            if let Some(r) = self.memo.get(p) {
                return Ok(r.clone());
            }
        }
        let r = self.sh_inner(p)?;
        if memo {
            self.memo.insert(p.clone(), r.clone());
        }
        Ok(r)
    }

    fn sh_inner(&mut self, p: &Term) -> Result<Term> {
        match p {
            Term::Delta => Ok(p.clone()),
            Term::ADead(_) | Term::RDead(_) | Term::Act(_) => Ok(p.clone()),
            Term::Alt(..) => self.both(p, Self::sh),
            Term::Seq(..) => {
                let q = self.on_child(p, 0, Self::sh)?;
                self.seq_dist(&q)
            }
            Term::Par(..) => {
                let q = self.rw(Ax::M1, p)?;
                self.both(&q, Self::lm)
            }
            Term::LeftMerge(..) => self.lm(p),
            Term::Timeout(..) => {
                let q = self.on_child(p, 0, Self::sh)?;
                self.tnorm(&q, false)
            }
            Term::State { .. } => self.push_state(p),
            Term::MaxProg(..) => {
                let q = self.rw(Ax::P1, p)?;
                self.aux(&q)
            }
            Term::AuxMaxProg(..) => self.aux(p),
            Term::Rec(..) => {
                if self.unfolds >= self.unfold_budget {
                    return Err(Error::UnfoldBudget(self.unfold_budget));
                }
                self.unfolds += 1;
                let q = self.rw(Ax::Rdp, p)?;
                self.sh(&q)
            }
            Term::Var(v) => Err(Error::OpenTerm(v.to_string())),
        }
    }

    /// `x'·y` with `x'` in semi-head normal form: distribute and reassociate.
    fn seq_dist(&mut self, p: &Term) -> Result<Term> {
        let Term::Seq(x, _) = p else { return Ok(p.clone()) };
        match &**x {
            Term::Alt(..) => {
                let q = self.rw(Ax::A4, p)?;
                self.both(&q, Self::seq_dist)
            }
            Term::Seq(..) => self.rw(Ax::A5, p),
            Term::Delta => self.rw(Ax::A7, p),
            Term::ADead(ExtScalar::Finite(_)) => self.rw(Ax::D4, p),
            Term::RDead(ExtScalar::Finite(_)) => self.rw(Ax::D8, p),
            Term::ADead(_) | Term::RDead(_) => self.rw(Ax::D4x, p),
            _ => Ok(p.clone()),
        }
    }

    fn lm(&mut self, p: &Term) -> Result<Term> {
        let q = self.on_child(p, 0, Self::sh)?;
        let Term::LeftMerge(x, _) = &q else { unreachable!() };
        match &**x {
            Term::Delta => self.rw(Ax::Dz, &q),
            Term::Alt(..) => {
                let r = self.rw(Ax::M4, &q)?;
                self.both(&r, Self::lm)
            }
            Term::Seq(..) => {
                let r = self.rw(Ax::M3, &q)?;
                let r = self.on_child(&r, 0, Self::tout_rhs_sh)?;
                self.seq_dist(&r)
            }
            _ => {
                let r = self.rw(Ax::M2, &q)?;
                let r = self.on_child(&r, 0, Self::tout_rhs_sh)?;
                self.seq_dist(&r)
            }
        }
    }

    fn tout_rhs_sh(&mut self, p: &Term) -> Result<Term> {
        self.tout_rhs(p, false)
    }

    fn tnorm_elim(&mut self, p: &Term) -> Result<Term> {
        self.tnorm(p, true)
    }

    fn tnorm_keep(&mut self, p: &Term) -> Result<Term> {
        self.tnorm(p, false)
    }

    /// `x' ▷ z` with `x'` in semi-head normal form. With `elim`, time-outs
    /// between atoms are resolved where a schema allows it.
    fn tnorm(&mut self, p: &Term, elim: bool) -> Result<Term> {
        let Term::Timeout(x, _) = p else { return Ok(p.clone()) };
        let f: Step = if elim { Self::tnorm_elim } else { Self::tnorm_keep };
        match &**x {
            Term::Alt(..) => {
                let q = self.rw(Ax::T15, p)?;
                self.both(&q, f)
            }
            Term::Seq(..) => {
                let q = self.rw(Ax::T16, p)?;
                let q = self.on_child(&q, 0, f)?;
                self.seq_dist(&q)
            }
            _ => self.tout_rhs(p, elim),
        }
    }

    /// `α ▷ y` with `α` an atom: bring `y` into atoms.
    fn tout_rhs(&mut self, p: &Term, elim: bool) -> Result<Term> {
        let q = self.on_child(p, 1, Self::sh)?;
        let Term::Timeout(_, y) = &q else { return Ok(q) };
        let f: Step = if elim { Self::tout_rhs_elim } else { Self::tout_rhs_sh };
        match &**y {
            Term::Alt(..) => {
                let r = self.rw(Ax::T8, &q)?;
                self.both(&r, f)
            }
            Term::Seq(..) => {
                let r = self.rw(Ax::T9, &q)?;
                f(self, &r)
            }
            _ if elim => self.tout_atoms(&q),
            _ => Ok(q),
        }
    }

    fn tout_rhs_elim(&mut self, p: &Term) -> Result<Term> {
        self.tout_rhs(p, true)
    }

    /// `α ▷ β` for atoms: resolve to one of them or to an inaction.
    fn tout_atoms(&mut self, p: &Term) -> Result<Term> {
        let Term::Timeout(_, y) = p else { return Ok(p.clone()) };
        if let Some(r) = self.first(&[Ax::Dz, Ax::Tx, Ax::T5], p)? {
            return Ok(r);
        }
        match &**y {
            Term::Timeout(..) => {
                let q = self.rw(Ax::T10, p)?;
                let q = self.on_child(&q, 0, Self::tout_atoms)?;
                match &q {
                    Term::Timeout(x, _) if matches!(&**x, Term::Timeout(..)) => Ok(q),
                    _ => self.tout_atoms(&q),
                }
            }
            Term::Act(_) => match self.first(&[Ax::T6, Ax::T7], p)? {
                Some(q) => self.tout_atoms(&q),
                None => Ok(p.clone()),
            },
            _ => Ok(self.first(TIMEOUT_DEAD, p)?.unwrap_or_else(|| p.clone())),
        }
    }

    fn push_state(&mut self, p: &Term) -> Result<Term> {
        let q = self.on_child(p, 0, Self::sh)?;
        self.state_norm(&q)
    }

    /// `Λ(x)` with `x` in semi-head normal form.
    fn state_norm(&mut self, p: &Term) -> Result<Term> {
        let Term::State { body, .. } = p else { return Ok(p.clone()) };
        match &**body {
            Term::Delta => self.rw(Ax::Dz, p),
            Term::Alt(..) => {
                let q = self.rw(Ax::S30, p)?;
                self.both(&q, Self::state_norm)
            }
            Term::Timeout(..) => {
                let q = self.rw(Ax::S31, p)?;
                let q = self.both(&q, Self::state_norm)?;
                self.tnorm(&q, true)
            }
            Term::Seq(h, _) => match &**h {
                Term::ADead(ExtScalar::Finite(_)) => {
                    let q = self.on_child(p, 0, |s, c| s.rw(Ax::D4, c))?;
                    self.state_norm(&q)
                }
                Term::RDead(ExtScalar::Finite(_)) => {
                    let q = self.on_child(p, 0, |s, c| s.rw(Ax::D8, c))?;
                    self.state_norm(&q)
                }
                Term::ADead(_) | Term::RDead(_) => {
                    let q = self.on_child(p, 0, |s, c| s.rw(Ax::D4x, c))?;
                    self.state_norm(&q)
                }
                Term::Timeout(..) => {
                    let q = self.on_child(p, 0, |s, c| s.rw(Ax::T16Inv, c))?;
                    self.state_norm(&q)
                }
                Term::Act(_) => Ok(self.first(STATE_PREFIX, p)?.unwrap_or_else(|| p.clone())),
                _ => Ok(p.clone()),
            },
            Term::ADead(_) | Term::RDead(_) | Term::Act(_) => {
                Ok(self.first(STATE_ATOM, p)?.unwrap_or_else(|| p.clone()))
            }
            _ => Ok(p.clone()),
        }
    }

    /// `x ⊴_H z`: distribute over the left operand.
    fn aux(&mut self, p: &Term) -> Result<Term> {
        let q = self.on_child(p, 0, Self::sh)?;
        let Term::AuxMaxProg(_, x, _) = &q else { return Ok(q) };
        match &**x {
            Term::Alt(..) => {
                let r = self.rw(Ax::P5, &q)?;
                self.both(&r, Self::aux)
            }
            Term::Seq(..) => {
                let r = self.rw(Ax::P4, &q)?;
                let r = self.on_child(&r, 0, Self::aux_atom)?;
                self.seq_dist(&r)
            }
            _ => self.aux_atom(&q),
        }
    }

    /// `α ⊴_H z` with `α` an atom: compare against every first atom of `z`.
    fn aux_atom(&mut self, p: &Term) -> Result<Term> {
        let q = self.on_child(p, 1, Self::sh)?;
        let Term::AuxMaxProg(_, _, z) = &q else { return Ok(q) };
        match &**z {
            Term::Alt(..) => {
                let r = self.rw(Ax::P7, &q)?;
                let r = self.on_child(&r, 0, Self::aux_atom)?;
                self.aux_atom(&r)
            }
            Term::Seq(..) => {
                let r = self.rw(Ax::P6, &q)?;
                self.aux_atom(&r)
            }
            _ => Ok(self.first(&[Ax::P2, Ax::P3], &q)?.unwrap_or(q)),
        }
    }

    /// Head normal form of `Λ^t_{C,σ}(p)`.
    pub fn hnf_state(&mut self, channels: &BTreeSet<Name>, t: &Scalar, sigma: &CommState, p: &Term) -> Result<Term> {
        if let Some(c) = p.channels().into_iter().find(|c| !channels.contains(c)) {
            return Err(Error::ChannelCoverage(c.to_string()));
        }
        let s = Term::state_with(Arc::new(channels.clone()), t.clone(), sigma.clone(), p.clone());
        self.begin();
        let r = self.sh(&s)?;
        if !is_hproc(&r) {
            return Err(Error::NotHeadNormal(r.to_string()));
        }
        Ok(r)
    }

    /// Head normal form of a term wrapped in a state operator, possibly
    /// under maximal progress operators.
    pub fn hnf(&mut self, p: &Term) -> Result<Term> {
        self.begin();
        let r = self.sh(p)?;
        if !is_hproc(&r) {
            return Err(Error::NotHeadNormal(r.to_string()));
        }
        Ok(r)
    }

    /// `ν_H(p)` for `p` in head normal form, without `ν_H` at the head.
    pub fn maxpr_eliminate(&mut self, h: &ActionPattern, p: &Term) -> Result<Term> {
        if !is_hproc(p) {
            return Err(Error::NotHeadNormal(p.to_string()));
        }
        self.begin();
        let q = self.rw(Ax::P1, &Term::max_prog(h.clone(), p.clone()))?;
        self.aux(&q)
    }

    /// Semi-head normal form, then the tails of action prefixes in turn,
    /// down to the tail depth; finally drop dominated inactions and
    /// canonicalize sums.
    pub fn normalize(&mut self, p: &Term) -> Result<Term> {
        self.begin();
        self.full(p, 0)
    }

    fn full(&mut self, p: &Term, depth: usize) -> Result<Term> {
        let q = self.sh(p)?;
        let q = self.tails(&q, depth)?;
        self.finish(&q)
    }

    fn tails(&mut self, p: &Term, depth: usize) -> Result<Term> {
        match p {
            Term::Alt(..) => {
                let q = self.on_child_depth(p, 0, depth, Self::tails)?;
                self.on_child_depth(&q, 1, depth, Self::tails)
            }
            Term::Seq(_, r) if depth < self.tail_depth && !matches!(&**r, Term::Rec(..) | Term::Var(_)) => {
                let q = self.on_child_depth(p, 1, depth + 1, Self::full)?;
                self.seq_dist(&q)
            }
            _ => Ok(p.clone()),
        }
    }

    fn on_child_depth(
        &mut self,
        p: &Term,
        i: u8,
        depth: usize,
        f: fn(&mut Self, &Term, usize) -> Result<Term>,
    ) -> Result<Term> {
        let c = subterm(p, &[i]).expect("child exists").clone();
        self.path.push(i);
        let r = f(self, &c, depth);
        self.path.pop();
        let n = r?;
        if n == c {
            return Ok(p.clone());
        }
        Ok(replace_at(p, &[i], n).expect("child exists"))
    }

    fn finish(&mut self, p: &Term) -> Result<Term> {
        let mut q = self.aci(p);
        if let Some(r) = self.try_rw(Ax::Dx, &q)? {
            q = self.aci(&r);
        }
        Ok(q)
    }

    fn aci(&mut self, p: &Term) -> Term {
        let c = alt_canonical(p);
        if &c != p {
            self.record(Ax::Aci, p, &c);
        }
        c
    }
}

/// Semi-head normal form with default settings.
pub fn shnf(p: &Term, cfg: &SpeedConfig) -> Result<Term> {
    Normalizer::new(cfg.clone()).shnf(p)
}

/// Head normal form of `Λ^t_{C,σ}(p)` with default settings.
pub fn hnf_state(
    channels: &BTreeSet<Name>,
    t: &Scalar,
    sigma: &CommState,
    p: &Term,
    cfg: &SpeedConfig,
) -> Result<Term> {
    Normalizer::new(cfg.clone()).hnf_state(channels, t, sigma, p)
}

/// `ν_H(p)` for `p` in head normal form, with default settings.
pub fn maxpr_eliminate(h: &ActionPattern, p: &Term, cfg: &SpeedConfig) -> Result<Term> {
    Normalizer::new(cfg.clone()).maxpr_eliminate(h, p)
}

/// Full normalization with default settings.
pub fn normalize(p: &Term, cfg: &SpeedConfig) -> Result<Term> {
    Normalizer::new(cfg.clone()).normalize(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::canon::{classify, NormalFormClass};
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn cfg() -> SpeedConfig {
        SpeedConfig::default()
    }

    fn check_trace(p: &Term, f: impl Fn(&mut Normalizer, &Term) -> Result<Term>) -> Term {
        let mut n = Normalizer::new(cfg()).traced();
        let r = f(&mut n, p).unwrap();
        let tr = n.take_trace().unwrap();
        assert_eq!(tr.replay(p, &cfg()).unwrap(), r);
        r
    }

    #[test]
    fn shnf_distributes() {
        let p = t("(es(c,d; 1; (0,0,0)) + es(c,d; 2; (0,0,0))) . es(c,d; 3; (0,0,0))");
        let r = check_trace(&p, |n, p| n.shnf(p));
        assert_eq!(r, t("es(c,d; 1; (0,0,0)) . es(c,d; 3; (0,0,0)) + es(c,d; 2; (0,0,0)) . es(c,d; 3; (0,0,0))"));
        assert_eq!(classify(&r), NormalFormClass::HProc);
    }

    #[test]
    fn shnf_unfolds_once() {
        let p = t("rec X { X = es(c,d; 1; (0,0,0)) . X; }");
        let r = check_trace(&p, |n, p| n.shnf(p));
        let Term::Seq(a, tail) = &r else { panic!("{r}") };
        assert_eq!(**a, t("es(c,d; 1; (0,0,0))"));
        assert_eq!(**tail, p);
    }

    #[test]
    fn shnf_merge_is_semi_head() {
        let p = t("ps(c,d; abs 2; (0,0,0)) || pr(c,d; abs 0..5; (0,0,0)) . es(k,e; 3; (0,0,0))");
        let r = check_trace(&p, |n, p| n.shnf(p));
        assert!(matches!(classify(&r), NormalFormClass::SHProc | NormalFormClass::HProc), "{r}");
    }

    #[test]
    fn unguarded_recursion_hits_budget() {
        let p = t("rec X { X = X; }");
        let mut n = Normalizer::new(cfg());
        n.unfold_budget = 50;
        assert_eq!(n.shnf(&p), Err(Error::UnfoldBudget(50)));
    }

    #[test]
    fn send_then_receive_at_same_point() {
        let p = t("L{c}@0:{}(ps(c,d; abs 2; (0,0,0)) || pr(c,d; abs 0..5; (0,0,0)))");
        let r = check_trace(&p, |n, p| n.normalize(p));
        assert_eq!(r, t("es(c,d; 2; (0,0,0)) . er(c,d; 2; (0,0,0))"));
    }

    #[test]
    fn hnf_examples() {
        let c: BTreeSet<Name> = [crate::terms::name("c")].into();
        let z = Scalar::zero();
        let e = CommState::empty();
        let r = hnf_state(&c, &z, &e, &t("pr(c,d; abs 0..5; (0,0,0))"), &cfg()).unwrap();
        assert_eq!(r, t("dd(abs 5)"));
        let r = hnf_state(&c, &z, &e, &t("dd(abs 3)"), &cfg()).unwrap();
        assert_eq!(r, t("dd(abs 3)"));
        let bad = hnf_state(&c, &z, &e, &t("es(k,d; 1; (0,0,0))"), &cfg());
        assert!(matches!(bad, Err(Error::ChannelCoverage(_))));
    }

    #[test]
    fn maximal_progress_prefers_early_receive() {
        let p = t("mp[recv(c)](er(c,d; 1; (0,0,0)) + er(c,d; 2; (0,0,0)) + es(c,d; 1; (0,0,0)))");
        let r = check_trace(&p, |n, p| n.normalize(p));
        assert_eq!(r, t("er(c,d; 1; (0,0,0))"));
        let h = crate::syntax::parse_pattern("[recv(c)]").unwrap();
        let r = maxpr_eliminate(&h, &t("es(c,d; 1; (0,0,0))"), &cfg()).unwrap();
        assert_eq!(r, t("es(c,d; 1; (0,0,0))"));
    }

    #[test]
    fn hnf_has_state_tails() {
        let c: BTreeSet<Name> = [crate::terms::name("c")].into();
        let p = t("ps(c,d; rel 1; (0,0,0)) . pr(c,d; rel 0..3; (0,0,0))");
        let r = hnf_state(&c, &Scalar::zero(), &CommState::empty(), &p, &cfg()).unwrap();
        let Term::Seq(_, tail) = &r else { panic!("{r}") };
        assert!(matches!(&**tail, Term::State { .. }));
    }
}
