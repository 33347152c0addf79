//! Cross-validation of the schemas against the operational semantics:
//! random closed instances of each left-hand side are rewritten at the root
//! and both sides are compared with the bounded bisimulation game.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{alt_canonical, apply_root, Ax};
use crate::analysis::{bisim_definitional, relevant_instants, OracleVerdict};
use crate::comm::{CommState, SendRecord, SpeedConfig};
use crate::meadow::{ExtScalar, Point, Scalar};
use crate::semantics::Sos;
use crate::terms::{name, Action, ActionPattern, PatternAtom, PatternKind, RecSpec, Term};

/// Rounds of the bisimulation game played per instance.
pub const GAME_DEPTH: usize = 2;

#[derive(Clone, Debug)]
pub struct Discrepancy {
    pub lhs: Term,
    pub rhs: Term,
    pub witness: String,
}

#[derive(Clone, Debug)]
pub struct SoundnessReport {
    pub axiom: Ax,
    pub instances: usize,
    pub attempts: usize,
    pub failures: Vec<Discrepancy>,
}

impl SoundnessReport {
    pub fn passed(&self, wanted: usize) -> bool {
        self.failures.is_empty() && self.instances >= wanted
    }
}

/// Random building blocks over a small alphabet of channels, data, times
/// and collinear points, so all distances stay rational.
pub struct TermGen {
    rng: ChaCha8Rng,
}

impl TermGen {
    pub fn new(seed: u64) -> Self {
        TermGen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn time(&mut self) -> Scalar {
        let n: i64 = self.rng.gen_range(0..=8);
        Scalar::frac(n, 2)
    }

    fn later(&mut self, lo: &Scalar) -> Scalar {
        let n: i64 = self.rng.gen_range(1..=6);
        lo + &Scalar::frac(n, 2)
    }

    pub fn point(&mut self) -> Point {
        Point::ints(self.rng.gen_range(0..=2), 0, 0)
    }

    fn chan(&mut self) -> &'static str {
        if self.chance(0.75) {
            "c"
        } else {
            "k"
        }
    }

    fn datum(&mut self) -> &'static str {
        if self.chance(0.6) {
            "d"
        } else {
            "e"
        }
    }

    fn window(&mut self) -> (Scalar, ExtScalar) {
        let lo = self.time();
        let hi = if self.chance(0.15) { ExtScalar::Infinity } else { ExtScalar::Finite(self.later(&lo)) };
        (lo, hi)
    }

    pub fn action(&mut self) -> Action {
        match self.rng.gen_range(0..6) {
            0 => self.ps_abs(),
            1 => self.ps_rel(),
            2 => self.pr_abs(),
            3 => self.pr_rel(),
            _ => self.actual(),
        }
    }

    fn ps_abs(&mut self) -> Action {
        let (c, d, t, p) = (self.chan(), self.datum(), self.time(), self.point());
        Action::ps_abs(c, d, t, p)
    }

    fn ps_rel(&mut self) -> Action {
        let (c, d, t, p) = (self.chan(), self.datum(), self.time(), self.point());
        Action::ps_rel(c, d, t, p)
    }

    fn pr_abs(&mut self) -> Action {
        let (c, d, (lo, hi), p) = (self.chan(), self.datum(), self.window(), self.point());
        Action::pr_abs(c, d, lo, hi, p).expect("nonempty window")
    }

    fn pr_rel(&mut self) -> Action {
        let (c, d, (lo, hi), p) = (self.chan(), self.datum(), self.window(), self.point());
        Action::pr_rel(c, d, lo, hi, p).expect("nonempty window")
    }

    pub fn actual(&mut self) -> Action {
        let (c, d, t, p) = (self.chan(), self.datum(), self.time(), self.point());
        if self.chance(0.5) {
            Action::es(c, d, t, p)
        } else {
            Action::er(c, d, t, p)
        }
    }

    /// Absolutely timed action that is not a potential receive.
    fn abs_single(&mut self) -> Action {
        if self.chance(0.4) {
            self.ps_abs()
        } else {
            self.actual()
        }
    }

    fn adead(&mut self) -> Term {
        Term::adead(self.time())
    }

    fn rdead(&mut self) -> Term {
        Term::rdead(self.time())
    }

    /// Atomic term: an action or a finitely timed inaction.
    pub fn atom(&mut self) -> Term {
        match self.rng.gen_range(0..10) {
            0 => self.adead(),
            1 => self.rdead(),
            _ => Term::Act(self.action()),
        }
    }

    /// A small closed term without state or priority operators.
    pub fn proc(&mut self, depth: usize) -> Term {
        if depth == 0 || self.chance(0.45) {
            return if self.chance(0.05) { Term::Delta } else { self.atom() };
        }
        let (a, b) = (self.proc(depth - 1), self.proc(depth - 1));
        match self.rng.gen_range(0..5) {
            0 => Term::alt(a, b),
            1 => Term::seq(a, b),
            2 => Term::par(a, b),
            3 => Term::left_merge(a, b),
            _ => Term::timeout(a, b),
        }
    }

    pub fn sigma(&mut self) -> CommState {
        let n = self.rng.gen_range(0..=2);
        CommState::from_records((0..n).map(|_| SendRecord {
            channel: name(self.chan()),
            datum: name(self.datum()),
            time: self.time(),
            point: self.point(),
        }))
    }

    fn channels(&mut self) -> Vec<&'static str> {
        match self.rng.gen_range(0..4) {
            0 => vec!["k"],
            1 => vec!["c", "k"],
            _ => vec!["c"],
        }
    }

    pub fn pattern(&mut self) -> ActionPattern {
        let kind =
            *[PatternKind::Recv, PatternKind::Recv, PatternKind::Send, PatternKind::Any].choose(&mut self.rng).unwrap();
        let channels: BTreeSet<_> = self.channels().into_iter().map(name).collect();
        ActionPattern { atoms: vec![PatternAtom { kind, channels, data: None }] }
    }

    fn state(&mut self, body: Term) -> Term {
        let chans = self.channels();
        let (t, s) = (self.time(), self.sigma());
        Term::state(chans, t, s, body)
    }

    /// A guarded recursion constant.
    fn rec(&mut self) -> Term {
        let a = Term::Act(self.actual());
        let b = Term::Act(self.action());
        let tail = self.atom();
        let spec = if self.chance(0.5) {
            RecSpec::from_pairs(vec![("X", Term::alt(Term::seq(a, Term::var("X")), tail))])
        } else {
            RecSpec::from_pairs(vec![
                ("X", Term::seq(a, Term::var("Y"))),
                ("Y", Term::alt(Term::seq(b, Term::var("X")), tail)),
            ])
        };
        Term::rec("X", spec.expect("closed"))
    }

    /// A candidate left-hand side for `ax`; the side condition is checked
    /// by the caller.
    pub fn lhs(&mut self, ax: Ax) -> Option<Term> {
        use Term as T;
        let x = self.proc(2);
        let y = self.proc(1);
        let z = self.proc(1);
        let t = Some(match ax {
            Ax::A2 => T::alt(T::alt(x, y), z),
            Ax::A3 => T::alt(x.clone(), x),
            Ax::A4 => T::seq(T::alt(x, y), z),
            Ax::A5 => T::seq(T::seq(x, y), z),
            Ax::A6 => T::alt(x, T::Delta),
            Ax::A7 => T::seq(T::Delta, x),
            Ax::M1 => T::par(x, y),
            Ax::M2 => T::left_merge(self.atom(), x),
            Ax::M3 => T::left_merge(T::seq(self.atom(), x), y),
            Ax::M4 => T::left_merge(T::alt(x, y), z),
            Ax::D1 | Ax::D2 => T::alt(self.adead(), self.adead()),
            Ax::D3 => {
                let a = self.abs_single();
                let d = if self.chance(0.8) { T::adead(a.time().clone()) } else { self.adead() };
                T::alt(T::Act(a), d)
            }
            Ax::D4 => T::seq(self.adead(), x),
            Ax::D5 | Ax::D6 => T::alt(self.rdead(), self.rdead()),
            Ax::D7 => {
                let a = self.ps_rel();
                let d = if self.chance(0.8) { T::rdead(a.time().clone()) } else { self.rdead() };
                T::alt(T::Act(a), d)
            }
            Ax::D8 => T::seq(self.rdead(), x),
            Ax::D9 => T::Delta,
            Ax::D4x => {
                T::seq(if self.chance(0.5) { T::adead(ExtScalar::Infinity) } else { T::rdead(ExtScalar::Infinity) }, x)
            }
            Ax::T1 | Ax::T2 => T::timeout(self.adead(), self.adead()),
            Ax::T3 | Ax::T4 => T::timeout(self.rdead(), self.rdead()),
            Ax::T5 => {
                let (a, b) =
                    if self.chance(0.5) { (self.abs_any(), self.abs_any()) } else { (self.rel_any(), self.rel_any()) };
                T::timeout(T::Act(a), T::Act(b))
            }
            Ax::T6 => T::timeout(x, T::Act(self.abs_single())),
            Ax::T7 => T::timeout(x, T::Act(self.ps_rel())),
            Ax::T8 => T::timeout(x, T::alt(y, z)),
            Ax::T9 => T::timeout(x, T::seq(y, z)),
            Ax::T10 => T::timeout(x, T::timeout(y, z)),
            Ax::T11 | Ax::T12 => T::timeout(T::Act(self.abs_any()), self.adead()),
            Ax::T13 | Ax::T14 => T::timeout(T::Act(self.rel_any()), self.rdead()),
            Ax::T15 => T::timeout(T::alt(x, y), z),
            Ax::T16 => T::timeout(T::seq(x, y), z),
            Ax::T17 => T::timeout(T::timeout(x, y), z),
            Ax::T16Inv => T::seq(T::timeout(x, z), y),
            Ax::Tx => {
                if self.chance(0.7) {
                    T::timeout(x, T::adead(ExtScalar::Infinity))
                } else {
                    T::timeout(T::adead(ExtScalar::Infinity), self.adead())
                }
            }
            Ax::Dz => match self.rng.gen_range(0..4) {
                0 => T::timeout(x, T::Delta),
                1 => T::timeout(T::Delta, x),
                2 => T::LeftMerge(Arc::new(T::Delta), Arc::new(x)),
                _ => self.state_of(T::Delta),
            },
            Ax::S1 | Ax::S2 => {
                let d = self.adead_or_inf();
                self.state_of(d)
            }
            Ax::S3 => {
                let d = self.rdead();
                self.state_of(d)
            }
            Ax::S4
            | Ax::S5
            | Ax::S6
            | Ax::S7
            | Ax::S8
            | Ax::S9
            | Ax::S10
            | Ax::S11
            | Ax::S12
            | Ax::S13
            | Ax::S14
            | Ax::S15
            | Ax::S16 => {
                let a = T::Act(self.action());
                self.state_of(a)
            }
            Ax::S17
            | Ax::S18
            | Ax::S19
            | Ax::S20
            | Ax::S21
            | Ax::S22
            | Ax::S23
            | Ax::S24
            | Ax::S25
            | Ax::S26
            | Ax::S27
            | Ax::S28
            | Ax::S29 => {
                let a = T::Act(self.action());
                self.state_of(T::seq(a, y))
            }
            Ax::S30 => self.state_of(T::alt(x, y)),
            Ax::S31 => self.state_of(T::timeout(x, y)),
            Ax::P1 => {
                let h = self.pattern();
                T::max_prog(h, x)
            }
            Ax::P2 | Ax::P3 => {
                let h = Arc::new(self.pattern());
                let a = self.prio_atom();
                let b = self.prio_atom();
                T::AuxMaxProg(h, Arc::new(a), Arc::new(b))
            }
            Ax::P4 => self.aux_of(T::seq(x, y), z),
            Ax::P5 => self.aux_of(T::alt(x, y), z),
            Ax::P6 => self.aux_of(x, T::seq(y, z)),
            Ax::P7 => self.aux_of(x, T::alt(y, z)),
            Ax::Rdp => self.rec(),
            Ax::Dx => {
                let mut items = vec![self.dominating(), self.dominating()];
                let r = items.iter().find_map(horizon_of).unwrap_or_else(|| self.time());
                let dead = if self.chance(0.7) { T::adead(r) } else { self.adead() };
                items.push(dead);
                items.shuffle(&mut self.rng);
                T::sum(items)
            }
            Ax::Aci => {
                let mut items: Vec<Term> = (0..self.rng.gen_range(2..=4)).map(|_| self.proc(1)).collect();
                let dup = items[0].clone();
                items.push(dup);
                items.shuffle(&mut self.rng);
                T::sum(items)
            }
        });
        t
    }

    fn abs_any(&mut self) -> Action {
        if self.chance(0.3) {
            self.pr_abs()
        } else {
            self.abs_single()
        }
    }

    fn rel_any(&mut self) -> Action {
        if self.chance(0.4) {
            self.pr_rel()
        } else {
            self.ps_rel()
        }
    }

    fn adead_or_inf(&mut self) -> Term {
        if self.chance(0.1) {
            Term::adead(ExtScalar::Infinity)
        } else {
            self.adead()
        }
    }

    fn state_of(&mut self, body: Term) -> Term {
        self.state(body)
    }

    fn aux_of(&mut self, x: Term, z: Term) -> Term {
        let h = Arc::new(self.pattern());
        Term::AuxMaxProg(h, Arc::new(x), Arc::new(z))
    }

    fn prio_atom(&mut self) -> Term {
        if self.chance(0.25) {
            self.adead_or_inf()
        } else {
            Term::Act(self.actual())
        }
    }

    fn dominating(&mut self) -> Term {
        match self.rng.gen_range(0..4) {
            0 => self.adead(),
            1 => Term::seq(Term::Act(self.abs_single()), self.proc(1)),
            2 => Term::Act(self.ps_rel()),
            _ => Term::Act(self.abs_single()),
        }
    }
}

fn horizon_of(s: &Term) -> Option<Scalar> {
    match s {
        Term::Act(a) if a.kind.is_absolute() && !a.kind.is_potential_receive() => Some(a.time().clone()),
        Term::Seq(h, _) => horizon_of(h),
        _ => None,
    }
}

/// The right-hand side of an instance, or `None` when the side condition fails.
fn contract(ax: Ax, lhs: &Term, cfg: &SpeedConfig) -> crate::error::Result<Option<Term>> {
    if ax == Ax::Aci {
        return Ok(Some(alt_canonical(lhs)));
    }
    apply_root(ax, lhs, cfg)
}

/// Priority atoms can only be compared where neither has passed yet.
fn ambients_for(ax: Ax, lhs: &Term, rhs: &Term) -> Vec<crate::semantics::Ambient> {
    let all = relevant_instants(lhs, rhs);
    match ax {
        Ax::P2 | Ax::P3 => {
            let first = lhs.time_literals().into_iter().next().unwrap_or_else(Scalar::zero);
            all.into_iter().filter(|a| a.time <= first).collect()
        }
        _ => all,
    }
}

/// Check `wanted` random instances of `ax` (giving up after a fixed
/// number of candidates whose side condition fails).
pub fn check_axiom(ax: Ax, wanted: usize, seed: u64, cfg: &SpeedConfig) -> SoundnessReport {
    let mut g = TermGen::new(seed ^ (ax as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let sos = Sos::new(cfg.clone());
    let mut report = SoundnessReport { axiom: ax, instances: 0, attempts: 0, failures: Vec::new() };
    let limit = wanted * 200;
    while report.instances < wanted && report.attempts < limit {
        report.attempts += 1;
        let Some(lhs) = g.lhs(ax) else { continue };
        let rhs = match contract(ax, &lhs, cfg) {
            Ok(Some(r)) => r,
            Ok(None) => continue,
            Err(e) => {
                report.failures.push(Discrepancy { lhs: lhs.clone(), rhs: Term::Delta, witness: e.to_string() });
                continue;
            }
        };
        report.instances += 1;
        let ambs = ambients_for(ax, &lhs, &rhs);
        match bisim_definitional(&lhs, &rhs, &ambs, GAME_DEPTH, &sos) {
            OracleVerdict::BisimilarUpToDepth(_) => {}
            OracleVerdict::Distinguished(w) => report.failures.push(Discrepancy { lhs, rhs, witness: w.to_string() }),
            OracleVerdict::Inconclusive(e) => report.failures.push(Discrepancy { lhs, rhs, witness: e }),
        }
    }
    report
}

/// [`check_axiom`] for every schema.
pub fn check_all(wanted: usize, seed: u64, cfg: &SpeedConfig) -> Vec<SoundnessReport> {
    Ax::ALL.iter().map(|ax| check_axiom(*ax, wanted, seed, cfg)).collect()
}
