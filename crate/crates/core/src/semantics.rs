//! Structural operational semantics: transitions and idling at an ambient
//! time and communication state.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::comm::{action_prio_lt, min_time, rcpt, CommState, SendRecord, SpeedConfig};
use crate::error::{Error, Result};
use crate::meadow::{ExtScalar, Scalar};
use crate::terms::{Action, ActionKind, ActionPattern, Term, Timing};

/// Default number of recursion unfoldings allowed while evaluating one term.
pub const DEFAULT_UNFOLD_BUDGET: usize = 10_000;

/// One end of an interval: `None` is unbounded, otherwise the value and
/// whether it is included.
type End = Option<(Scalar, bool)>;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Interval {
    lo: End,
    hi: End,
}

impl Interval {
    fn is_empty(&self) -> bool {
        match (&self.lo, &self.hi) {
            (Some((a, ca)), Some((b, cb))) => b < a || (a == b && !(*ca && *cb)),
            _ => false,
        }
    }

    fn contains(&self, s: &Scalar) -> bool {
        let lo_ok = match &self.lo {
            None => true,
            Some((a, closed)) => a < s || (*closed && a == s),
        };
        let hi_ok = match &self.hi {
            None => true,
            Some((b, closed)) => s < b || (*closed && b == s),
        };
        lo_ok && hi_ok
    }

    fn intersect(&self, other: &Interval) -> Interval {
        let lo = match (&self.lo, &other.lo) {
            (None, x) | (x, None) => x.clone(),
            (Some((a, ca)), Some((b, cb))) => {
                if a == b {
                    Some((a.clone(), *ca && *cb))
                } else if a < b {
                    Some((b.clone(), *cb))
                } else {
                    Some((a.clone(), *ca))
                }
            }
        };
        let hi = match (&self.hi, &other.hi) {
            (None, x) | (x, None) => x.clone(),
            (Some((a, ca)), Some((b, cb))) => {
                if a == b {
                    Some((a.clone(), *ca && *cb))
                } else if a < b {
                    Some((a.clone(), *ca))
                } else {
                    Some((b.clone(), *cb))
                }
            }
        };
        Interval { lo, hi }
    }
}

/// A finite union of disjoint, sorted, non-adjacent intervals of time:
/// the instants till which a process can idle.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct IdleSet {
    parts: Vec<Interval>,
}

fn lo_key(e: &End) -> (u8, Option<&Scalar>, bool) {
    match e {
        None => (0, None, false),
        Some((v, closed)) => (1, Some(v), !closed),
    }
}

impl IdleSet {
    pub fn empty() -> Self {
        IdleSet::default()
    }

    fn from_parts(mut parts: Vec<Interval>) -> Self {
        parts.retain(|p| !p.is_empty());
        parts.sort_by(|a, b| lo_key(&a.lo).cmp(&lo_key(&b.lo)));
        let mut out: Vec<Interval> = Vec::new();
        for p in parts {
            if let Some(last) = out.last_mut() {
                let touches = match (&last.hi, &p.lo) {
                    (None, _) | (_, None) => true,
                    (Some((h, ch)), Some((l, cl))) => l < h || (l == h && (*ch || *cl)),
                };
                if touches {
                    let hi = match (&last.hi, &p.hi) {
                        (None, _) | (_, None) => None,
                        (Some((a, ca)), Some((b, cb))) => {
                            if a == b {
                                Some((a.clone(), *ca || *cb))
                            } else if a < b {
                                Some((b.clone(), *cb))
                            } else {
                                Some((a.clone(), *ca))
                            }
                        }
                    };
                    last.hi = hi;
                    continue;
                }
            }
            out.push(p);
        }
        IdleSet { parts: out }
    }

    /// `[lo, hi]`, unbounded above when `hi = ∞`.
    pub fn closed(lo: &Scalar, hi: &ExtScalar) -> Self {
        IdleSet::from_parts(vec![Interval { lo: Some((lo.clone(), true)), hi: hi.finite().map(|h| (h.clone(), true)) }])
    }

    /// `(−∞, hi]`.
    pub fn at_most(hi: &Scalar) -> Self {
        IdleSet::from_parts(vec![Interval { lo: None, hi: Some((hi.clone(), true)) }])
    }

    /// `(lo, ∞)`.
    pub fn after(lo: &Scalar) -> Self {
        IdleSet::from_parts(vec![Interval { lo: Some((lo.clone(), false)), hi: None }])
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, s: &Scalar) -> bool {
        self.parts.iter().any(|p| p.contains(s))
    }

    pub fn union(&self, other: &IdleSet) -> IdleSet {
        IdleSet::from_parts(self.parts.iter().chain(other.parts.iter()).cloned().collect())
    }

    pub fn intersect(&self, other: &IdleSet) -> IdleSet {
        let mut parts = Vec::new();
        for a in &self.parts {
            for b in &other.parts {
                parts.push(a.intersect(b));
            }
        }
        IdleSet::from_parts(parts)
    }

    /// Keep only instants `≤ hi`.
    pub fn truncate_above(&self, hi: &Scalar) -> IdleSet {
        self.intersect(&IdleSet::at_most(hi))
    }

    /// Keep only instants strictly after `t`: what remains of idling once
    /// the ambient instant itself is discounted.
    pub fn future(&self, t: &Scalar) -> IdleSet {
        self.intersect(&IdleSet::after(t))
    }

    /// Supremum: the ultimate delay. `None` for the empty set.
    pub fn sup(&self) -> Option<ExtScalar> {
        self.parts.last().map(|p| match &p.hi {
            None => ExtScalar::Infinity,
            Some((h, _)) => ExtScalar::Finite(h.clone()),
        })
    }

    /// Least finite lower end point, if bounded below.
    pub fn inf(&self) -> Option<Scalar> {
        self.parts.first().and_then(|p| p.lo.as_ref().map(|(l, _)| l.clone()))
    }
}

impl fmt::Display for IdleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "empty");
        }
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " u ")?;
            }
            match &p.lo {
                None => write!(f, "(-inf")?,
                Some((l, true)) => write!(f, "[{l}")?,
                Some((l, false)) => write!(f, "({l}")?,
            }
            match &p.hi {
                None => write!(f, ", inf)")?,
                Some((h, true)) => write!(f, ", {h}]")?,
                Some((h, false)) => write!(f, ", {h})")?,
            }
        }
        Ok(())
    }
}

/// The ambient instant and communication state a term is evaluated in.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Ambient {
    pub time: Scalar,
    pub sigma: CommState,
}

impl Ambient {
    pub fn new(time: Scalar, sigma: CommState) -> Self {
        Ambient { time, sigma }
    }

    pub fn at(time: Scalar) -> Self {
        Ambient { time, sigma: CommState::empty() }
    }
}

/// What remains after a transition: a term, or successful termination.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Successor {
    Term(Term),
    Done,
}

impl fmt::Display for Successor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Successor::Term(t) => write!(f, "{t}"),
            Successor::Done => write!(f, "✓"),
        }
    }
}

/// An action transition labelled with an actual action.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Transition {
    pub action: Action,
    pub succ: Successor,
}

/// All transitions and the idle set of a term at one ambient.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Behaviour {
    pub steps: Vec<Transition>,
    pub idle: IdleSet,
}

impl Behaviour {
    fn finish(mut self) -> Self {
        self.steps.sort();
        self.steps.dedup();
        self
    }

    /// The transition labels, sorted and duplicate-free.
    pub fn labels(&self) -> Vec<&Action> {
        let mut v: Vec<&Action> = self.steps.iter().map(|s| &s.action).collect();
        v.dedup();
        v
    }
}

/// The point a term is necessarily evaluated at: terms headed by a state
/// operator (possibly under maximal progress) only have behaviour at the
/// operator's own initialization time and state.
pub fn anchor(p: &Term) -> Option<Ambient> {
    match p {
        Term::State { time, sigma, .. } => Some(Ambient::new(time.clone(), sigma.clone())),
        Term::MaxProg(_, b) => anchor(b),
        Term::AuxMaxProg(_, x, _) => anchor(x),
        Term::Alt(a, b) => {
            let x = anchor(a)?;
            (anchor(b)? == x).then_some(x)
        }
        _ => None,
    }
}

struct Unfolding {
    budget: usize,
    active: Vec<(crate::terms::Name, *const crate::terms::RecSpec)>,
}

/// Evaluator for the rule tables.
#[derive(Clone, Debug)]
pub struct Sos {
    pub cfg: SpeedConfig,
    pub unfold_budget: usize,
}

impl Default for Sos {
    fn default() -> Self {
        Sos { cfg: SpeedConfig::default(), unfold_budget: DEFAULT_UNFOLD_BUDGET }
    }
}

impl Sos {
    pub fn new(cfg: SpeedConfig) -> Self {
        Sos { cfg, unfold_budget: DEFAULT_UNFOLD_BUDGET }
    }

    pub fn eval(&self, p: &Term, amb: &Ambient) -> Result<Behaviour> {
        let mut ctx = Unfolding { budget: self.unfold_budget, active: Vec::new() };
        self.go(p, amb, &mut ctx).map(Behaviour::finish)
    }

    pub fn step_set(&self, p: &Term, amb: &Ambient) -> Result<Vec<Transition>> {
        Ok(self.eval(p, amb)?.steps)
    }

    pub fn idle_set(&self, p: &Term, amb: &Ambient) -> Result<IdleSet> {
        Ok(self.eval(p, amb)?.idle)
    }

    fn go(&self, p: &Term, amb: &Ambient, budget: &mut Unfolding) -> Result<Behaviour> {
        let t = &amb.time;
        Ok(match p {
            Term::Delta => Behaviour::default(),
            Term::ADead(x) => Behaviour { steps: vec![], idle: IdleSet::closed(t, x) },
            Term::RDead(x) => Behaviour { steps: vec![], idle: IdleSet::closed(t, &x.shift(t)) },
            Term::Act(a) => self.action(a, amb)?,
            Term::Alt(x, y) => {
                let (bx, by) = (self.go(x, amb, budget)?, self.go(y, amb, budget)?);
                let mut steps = bx.steps;
                steps.extend(by.steps);
                Behaviour { steps, idle: bx.idle.union(&by.idle) }
            }
            Term::Seq(x, y) => {
                let bx = self.go(x, amb, budget)?;
                let steps = bx
                    .steps
                    .into_iter()
                    .map(|s| Transition {
                        succ: Successor::Term(match s.succ {
                            Successor::Term(x2) => Term::Seq(Arc::new(x2), y.clone()),
                            Successor::Done => (**y).clone(),
                        }),
                        action: s.action,
                    })
                    .collect();
                Behaviour { steps, idle: bx.idle }
            }
            Term::Par(x, y) => {
                let (bx, by) = (self.go(x, amb, budget)?, self.go(y, amb, budget)?);
                let mut steps = Vec::new();
                for s in &bx.steps {
                    if by.idle.contains(s.action.time()) {
                        let succ = match &s.succ {
                            Successor::Term(x2) => Term::Par(Arc::new(x2.clone()), y.clone()),
                            Successor::Done => (**y).clone(),
                        };
                        steps.push(Transition { action: s.action.clone(), succ: Successor::Term(succ) });
                    }
                }
                for s in &by.steps {
                    if bx.idle.contains(s.action.time()) {
                        let succ = match &s.succ {
                            Successor::Term(y2) => Term::Par(x.clone(), Arc::new(y2.clone())),
                            Successor::Done => (**x).clone(),
                        };
                        steps.push(Transition { action: s.action.clone(), succ: Successor::Term(succ) });
                    }
                }
                Behaviour { steps, idle: bx.idle.intersect(&by.idle) }
            }
            Term::LeftMerge(x, y) => {
                let (bx, by) = (self.go(x, amb, budget)?, self.go(y, amb, budget)?);
                let steps = bx
                    .steps
                    .into_iter()
                    .filter(|s| by.idle.contains(s.action.time()))
                    .map(|s| Transition {
                        succ: Successor::Term(match s.succ {
                            Successor::Term(x2) => Term::Par(Arc::new(x2), y.clone()),
                            Successor::Done => (**y).clone(),
                        }),
                        action: s.action,
                    })
                    .collect();
                Behaviour { steps, idle: bx.idle.intersect(&by.idle) }
            }
            Term::Timeout(x, y) => {
                let (bx, by) = (self.go(x, amb, budget)?, self.go(y, amb, budget)?);
                let steps = bx.steps.into_iter().filter(|s| by.idle.contains(s.action.time())).collect();
                Behaviour { steps, idle: bx.idle.intersect(&by.idle) }
            }
            Term::State { channels, time, sigma, body } => {
                if time != t || sigma != &amb.sigma {
                    return Ok(Behaviour::default());
                }
                let b = self.go(body, amb, budget)?;
                let steps = b
                    .steps
                    .into_iter()
                    .map(|s| {
                        let succ = match s.succ {
                            Successor::Done => Successor::Done,
                            Successor::Term(x2) => {
                                let a = &s.action;
                                let (t2, s2) = if !channels.contains(&a.channel) {
                                    (time.clone(), sigma.clone())
                                } else if a.kind == ActionKind::AESend {
                                    let rec = SendRecord {
                                        channel: a.channel.clone(),
                                        datum: a.datum.clone(),
                                        time: a.time().clone(),
                                        point: a.point.clone(),
                                    };
                                    (a.time().clone(), sigma.with(rec))
                                } else {
                                    (a.time().clone(), sigma.clone())
                                };
                                Successor::Term(Term::state_with(channels.clone(), t2, s2, x2))
                            }
                        };
                        Transition { action: s.action, succ }
                    })
                    .collect();
                Behaviour { steps, idle: b.idle }
            }
            Term::MaxProg(h, x) => {
                let bx = self.go(x, amb, budget)?;
                let idle = truncate_by_priority(h, &bx.idle, &bx.steps);
                let steps = filter_by_priority(h, &bx.steps, &bx.steps);
                Behaviour { steps: wrap_max_prog(h, steps), idle }
            }
            Term::AuxMaxProg(h, x, y) => {
                let (bx, by) = (self.go(x, amb, budget)?, self.go(y, amb, budget)?);
                let idle = truncate_by_priority(h, &bx.idle, &by.steps);
                let steps = filter_by_priority(h, &bx.steps, &by.steps);
                Behaviour { steps: wrap_max_prog(h, steps), idle }
            }
            Term::Rec(v, spec) => {
                // Re-entering a constant before any action prefix means the
                // unfolding can never bottom out.
                let key = (v.clone(), Arc::as_ptr(spec));
                if budget.budget == 0 || budget.active.contains(&key) {
                    return Err(Error::UnfoldBudget(self.unfold_budget));
                }
                budget.budget -= 1;
                budget.active.push(key);
                let body = Term::unfold_rec(v, spec)?;
                let r = self.go(&body, amb, budget);
                budget.active.pop();
                r?
            }
            Term::Var(v) => return Err(Error::OpenTerm(v.to_string())),
        })
    }

    fn action(&self, a: &Action, amb: &Ambient) -> Result<Behaviour> {
        let t = &amb.time;
        let done = |act: Action| vec![Transition { action: act, succ: Successor::Done }];
        Ok(match (&a.kind, &a.timing) {
            (ActionKind::APSend | ActionKind::AESend | ActionKind::AERecv, Timing::At(t1)) => {
                let steps = if t.le(t1) { done(a.actualize(t1.clone())) } else { vec![] };
                Behaviour { steps, idle: IdleSet::closed(t, &t1.clone().into()) }
            }
            (ActionKind::RPSend, Timing::At(t1)) => {
                let at = t + t1;
                Behaviour { steps: done(a.actualize(at.clone())), idle: IdleSet::closed(t, &at.into()) }
            }
            (ActionKind::APRecv, Timing::Window(lo, hi)) => {
                if !ExtScalar::Finite(t.clone()).lt(hi) {
                    return Ok(Behaviour::default());
                }
                let v = rcpt(&amb.sigma, &a.channel, &a.datum, &t.max2(lo), hi, &a.point, &self.cfg)?;
                match min_time(&v) {
                    Some(m) => Behaviour { steps: done(a.actualize(m.clone())), idle: IdleSet::at_most(&m) },
                    None => Behaviour { steps: vec![], idle: IdleSet::closed(t, hi) },
                }
            }
            (ActionKind::RPRecv, Timing::Window(lo, hi)) => {
                let end = hi.shift(t);
                let v = rcpt(&amb.sigma, &a.channel, &a.datum, &(t + lo), &end, &a.point, &self.cfg)?;
                match min_time(&v) {
                    Some(m) => Behaviour { steps: done(a.actualize(m.clone())), idle: IdleSet::at_most(&m) },
                    None => Behaviour { steps: vec![], idle: IdleSet::closed(t, &end) },
                }
            }
            _ => return Err(Error::Misuse(format!("malformed action {a}"))),
        })
    }
}

fn filter_by_priority(h: &ActionPattern, steps: &[Transition], blockers: &[Transition]) -> Vec<Transition> {
    steps.iter().filter(|s| !blockers.iter().any(|b| action_prio_lt(h, &s.action, &b.action))).cloned().collect()
}

fn truncate_by_priority(h: &ActionPattern, idle: &IdleSet, blockers: &[Transition]) -> IdleSet {
    match blockers.iter().filter(|b| h.contains(&b.action)).map(|b| b.action.time()).min() {
        Some(m) => idle.truncate_above(m),
        None => idle.clone(),
    }
}

fn wrap_max_prog(h: &Arc<ActionPattern>, steps: Vec<Transition>) -> Vec<Transition> {
    steps
        .into_iter()
        .map(|s| Transition {
            succ: match s.succ {
                Successor::Term(x) => Successor::Term(Term::MaxProg(h.clone(), Arc::new(x))),
                Successor::Done => Successor::Done,
            },
            action: s.action,
        })
        .collect()
}

/// Transitions of a closed term at `(t, σ)` with default settings.
pub fn step_set(p: &Term, t: &Scalar, sigma: &CommState, cfg: &SpeedConfig) -> Result<Vec<Transition>> {
    Sos::new(cfg.clone()).step_set(p, &Ambient::new(t.clone(), sigma.clone()))
}

/// Idle set of a closed term at `(t, σ)` with default settings.
pub fn idle_set(p: &Term, t: &Scalar, sigma: &CommState, cfg: &SpeedConfig) -> Result<IdleSet> {
    Sos::new(cfg.clone()).idle_set(p, &Ambient::new(t.clone(), sigma.clone()))
}

/// The ambient a successor is evaluated at after performing `a` from `amb`.
pub fn next_ambient(succ: &Term, a: &Action, amb: &Ambient) -> Ambient {
    anchor(succ).unwrap_or_else(|| Ambient::new(a.time().clone(), amb.sigma.clone()))
}

/// Exploration strategy for [`run`].
#[derive(Clone, Debug)]
pub enum Policy {
    Exhaustive { depth: usize },
    Random { seed: u64, depth: usize },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TraceEnd {
    Terminated,
    Deadlock,
    DepthExhausted,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceStep {
    /// Ambient time before the step.
    pub time: Scalar,
    pub action: Action,
    /// The idle deadline of the state left behind, if any.
    pub deadline: Option<ExtScalar>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub end: TraceEnd,
}

/// Maximal transition sequences from `p` at `(t0, σ0)`. The ambient after a
/// step is the time of its action (or the successor's own state-operator
/// anchor). Exhaustive runs list traces in lexicographic action order.
pub fn run(sos: &Sos, p: &Term, t0: &Scalar, sigma0: &CommState, policy: &Policy) -> Result<Vec<Trace>> {
    let start = anchor(p).unwrap_or_else(|| Ambient::new(t0.clone(), sigma0.clone()));
    match policy {
        Policy::Exhaustive { depth } => {
            let mut out = Vec::new();
            let mut prefix = Vec::new();
            explore(sos, p, &start, *depth, &mut prefix, &mut out)?;
            Ok(out)
        }
        Policy::Random { seed, depth } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut steps = Vec::new();
            let mut cur = p.clone();
            let mut amb = start;
            loop {
                if steps.len() >= *depth {
                    return Ok(vec![Trace { steps, end: TraceEnd::DepthExhausted }]);
                }
                let b = sos.eval(&cur, &amb)?;
                let Some(tr) = b.steps.choose(&mut rng) else {
                    return Ok(vec![Trace { steps, end: TraceEnd::Deadlock }]);
                };
                let deadline = b.idle.sup();
                steps.push(TraceStep { time: amb.time.clone(), action: tr.action.clone(), deadline });
                match &tr.succ {
                    Successor::Done => return Ok(vec![Trace { steps, end: TraceEnd::Terminated }]),
                    Successor::Term(q) => {
                        amb = next_ambient(q, &tr.action, &amb);
                        cur = q.clone();
                    }
                }
            }
        }
    }
}

fn explore(
    sos: &Sos,
    p: &Term,
    amb: &Ambient,
    depth: usize,
    prefix: &mut Vec<TraceStep>,
    out: &mut Vec<Trace>,
) -> Result<()> {
    if depth == 0 {
        out.push(Trace { steps: prefix.clone(), end: TraceEnd::DepthExhausted });
        return Ok(());
    }
    let b = sos.eval(p, amb)?;
    if b.steps.is_empty() {
        out.push(Trace { steps: prefix.clone(), end: TraceEnd::Deadlock });
        return Ok(());
    }
    let deadline = b.idle.sup();
    for tr in &b.steps {
        prefix.push(TraceStep { time: amb.time.clone(), action: tr.action.clone(), deadline: deadline.clone() });
        match &tr.succ {
            Successor::Done => out.push(Trace { steps: prefix.clone(), end: TraceEnd::Terminated }),
            Successor::Term(q) => explore(sos, q, &next_ambient(q, &tr.action, amb), depth - 1, prefix, out)?,
        }
        prefix.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::record_send;
    use crate::meadow::Point;
    use crate::syntax::parse_term;

    fn s(n: i64) -> Scalar {
        Scalar::int(n)
    }

    fn term(src: &str) -> Term {
        parse_term(src).unwrap()
    }

    #[test]
    fn idle_set_algebra() {
        let a = IdleSet::closed(&s(0), &s(2).into());
        let b = IdleSet::closed(&s(1), &s(5).into());
        assert_eq!(a.union(&b), IdleSet::closed(&s(0), &s(5).into()));
        assert_eq!(a.intersect(&b), IdleSet::closed(&s(1), &s(2).into()));
        assert_eq!(a.future(&s(2)), IdleSet::empty());
        assert!(a.future(&s(1)).contains(&Scalar::frac(3, 2)));
        assert!(!a.future(&s(1)).contains(&s(1)));
        assert_eq!(IdleSet::at_most(&s(3)).sup(), Some(ExtScalar::Finite(s(3))));
        assert_eq!(IdleSet::closed(&s(0), &ExtScalar::Infinity).sup(), Some(ExtScalar::Infinity));
        let gap = IdleSet::closed(&s(0), &s(1).into()).union(&IdleSet::closed(&s(2), &s(3).into()));
        assert_eq!(gap.to_string(), "[0, 1] u [2, 3]");
        assert_eq!(IdleSet::after(&s(1)).union(&IdleSet::at_most(&s(1))).to_string(), "(-inf, inf)");
    }

    #[test]
    fn actual_send_fires_when_not_late() {
        let p = term("es(c,d; 3; (0,0,0))");
        let steps = step_set(&p, &s(1), &CommState::empty(), &SpeedConfig::default()).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].succ, Successor::Done);
        assert!(step_set(&p, &s(5), &CommState::empty(), &SpeedConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn potential_receive_at_min_reception() {
        let p = term("pr(c,d; abs 0..10; (0,0,0))");
        let sigma = record_send(&CommState::empty(), "c", "d", s(1), Point::origin());
        let b = Sos::default().eval(&p, &Ambient::new(s(0), sigma)).unwrap();
        assert_eq!(b.steps.len(), 1);
        assert_eq!(b.steps[0].action, Action::er("c", "d", s(1), Point::origin()));
        assert_eq!(b.idle, IdleSet::at_most(&s(1)));
    }

    #[test]
    fn dead_constants_idle() {
        let cfg = SpeedConfig::default();
        let e = CommState::empty();
        assert_eq!(idle_set(&term("dd(abs 5)"), &s(2), &e, &cfg).unwrap(), IdleSet::closed(&s(2), &s(5).into()));
        assert_eq!(idle_set(&term("dd(rel 3)"), &s(2), &e, &cfg).unwrap(), IdleSet::closed(&s(2), &s(5).into()));
        assert!(idle_set(&term("dd"), &s(2), &e, &cfg).unwrap().is_empty());
    }

    #[test]
    fn state_operator_send_then_receive() {
        let p = term("L{c}@0:{}(ps(c,d; abs 2; (0,0,0)) || pr(c,d; abs 0..5; (0,0,0)))");
        let sos = Sos::default();
        let b = sos.eval(&p, &Ambient::at(s(0))).unwrap();
        assert_eq!(b.steps.len(), 1);
        let tr = &b.steps[0];
        assert_eq!(tr.action, Action::es("c", "d", s(2), Point::origin()));
        let Successor::Term(q) = &tr.succ else { panic!() };
        let amb = next_ambient(q, &tr.action, &Ambient::at(s(0)));
        assert_eq!(amb.time, s(2));
        assert_eq!(amb.sigma.len(), 1);
        let b2 = sos.eval(q, &amb).unwrap();
        assert_eq!(b2.steps.len(), 1);
        assert_eq!(b2.steps[0].action, Action::er("c", "d", s(2), Point::origin()));
    }

    #[test]
    fn state_operator_needs_its_anchor() {
        let p = term("L{c}@1:{}(es(c,d; 2; (0,0,0)))");
        assert!(Sos::default().eval(&p, &Ambient::at(s(0))).unwrap().steps.is_empty());
    }

    #[test]
    fn max_progress_prefers_early_receive() {
        let p = term("mp[recv(c)](er(c,d; 1; (0,0,0)) + er(c,d; 2; (0,0,0)) + es(c,d; 1; (0,0,0)))");
        let b = Sos::default().eval(&p, &Ambient::at(s(0))).unwrap();
        assert_eq!(b.labels(), vec![&Action::er("c", "d", s(1), Point::origin())]);
        assert_eq!(b.idle, IdleSet::closed(&s(0), &s(1).into()));
    }

    #[test]
    fn recursion_unfolds_and_budget_stops_unguarded() {
        let p = term("rec X { X = es(c,d; 1; (0,0,0)) . X; }");
        let b = Sos::default().eval(&p, &Ambient::at(s(0))).unwrap();
        assert_eq!(b.steps.len(), 1);
        let bad = term("rec X { X = X; }");
        assert!(matches!(Sos::default().eval(&bad, &Ambient::at(s(0))), Err(Error::UnfoldBudget(_))));
    }

    #[test]
    fn run_examples() {
        let sos = Sos::default();
        let e = CommState::empty();
        let traces =
            run(&sos, &term("es(c,d; 1; (0,0,0)) . es(c,d; 2; (0,0,0))"), &s(0), &e, &Policy::Exhaustive { depth: 5 })
                .unwrap();
        assert_eq!(traces.len(), 1);
        assert_eq!(traces[0].steps.len(), 2);
        assert_eq!(traces[0].end, TraceEnd::Terminated);
        let traces = run(&sos, &Term::Delta, &s(0), &e, &Policy::Exhaustive { depth: 5 }).unwrap();
        assert_eq!(traces, vec![Trace { steps: vec![], end: TraceEnd::Deadlock }]);
        let traces =
            run(&sos, &term("es(c,d; 1; (0,0,0)) + es(c,d; 2; (0,0,0))"), &s(0), &e, &Policy::Exhaustive { depth: 5 })
                .unwrap();
        assert_eq!(traces.len(), 2);
        let r = run(
            &sos,
            &term("rec X { X = es(c,d; 1; (0,0,0)) . X; }"),
            &s(0),
            &e,
            &Policy::Random { seed: 7, depth: 4 },
        )
        .unwrap();
        assert_eq!(r[0].end, TraceEnd::DepthExhausted);
    }
}
