//! Process terms, recursive specifications and their static functions.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::comm::CommState;
use crate::error::{Error, Result};
use crate::meadow::{ExtScalar, Point, Scalar};

/// Interned identifier for channels, data and recursion variables.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ActionKind {
    /// Absolutely timed potential send.
    APSend,
    /// Relatively timed potential send.
    RPSend,
    /// Absolutely timed potential receive.
    APRecv,
    /// Relatively timed potential receive.
    RPRecv,
    /// Actual send.
    AESend,
    /// Actual receive.
    AERecv,
}

impl ActionKind {
    pub fn is_potential(self) -> bool {
        !self.is_actual()
    }

    pub fn is_actual(self) -> bool {
        matches!(self, ActionKind::AESend | ActionKind::AERecv)
    }

    pub fn is_relative(self) -> bool {
        matches!(self, ActionKind::RPSend | ActionKind::RPRecv)
    }

    pub fn is_absolute(self) -> bool {
        !self.is_relative()
    }

    pub fn is_potential_receive(self) -> bool {
        matches!(self, ActionKind::APRecv | ActionKind::RPRecv)
    }

    pub fn is_send(self) -> bool {
        matches!(self, ActionKind::APSend | ActionKind::RPSend | ActionKind::AESend)
    }
}

/// Time annotation of an action: a single instant (or period), or a
/// reception window `lower < upper`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Timing {
    At(Scalar),
    Window(Scalar, ExtScalar),
}

/// A send or receive action, potential or actual.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub kind: ActionKind,
    pub channel: Name,
    pub datum: Name,
    pub timing: Timing,
    pub point: Point,
}

impl Action {
    fn single(kind: ActionKind, c: &str, d: &str, t: Scalar, p: Point) -> Action {
        Action { kind, channel: name(c), datum: name(d), timing: Timing::At(t), point: p }
    }

    fn window(kind: ActionKind, c: &str, d: &str, lo: Scalar, hi: ExtScalar, p: Point) -> Result<Action> {
        if !ExtScalar::Finite(lo.clone()).lt(&hi) {
            return Err(Error::Misuse(format!("empty receive window [{lo}, {hi}]")));
        }
        Ok(Action { kind, channel: name(c), datum: name(d), timing: Timing::Window(lo, hi), point: p })
    }

    pub fn ps_abs(c: &str, d: &str, t: Scalar, p: Point) -> Action {
        Action::single(ActionKind::APSend, c, d, t, p)
    }

    pub fn ps_rel(c: &str, d: &str, t: Scalar, p: Point) -> Action {
        Action::single(ActionKind::RPSend, c, d, t, p)
    }

    pub fn pr_abs(c: &str, d: &str, lo: Scalar, hi: ExtScalar, p: Point) -> Result<Action> {
        Action::window(ActionKind::APRecv, c, d, lo, hi, p)
    }

    pub fn pr_rel(c: &str, d: &str, lo: Scalar, hi: ExtScalar, p: Point) -> Result<Action> {
        Action::window(ActionKind::RPRecv, c, d, lo, hi, p)
    }

    pub fn es(c: &str, d: &str, t: Scalar, p: Point) -> Action {
        Action::single(ActionKind::AESend, c, d, t, p)
    }

    pub fn er(c: &str, d: &str, t: Scalar, p: Point) -> Action {
        Action::single(ActionKind::AERecv, c, d, t, p)
    }

    /// Earliest time.
    pub fn lbt(&self) -> Scalar {
        match &self.timing {
            Timing::At(t) | Timing::Window(t, _) => t.clone(),
        }
    }

    /// Latest time.
    pub fn ubt(&self) -> ExtScalar {
        match &self.timing {
            Timing::At(t) => ExtScalar::Finite(t.clone()),
            Timing::Window(_, u) => u.clone(),
        }
    }

    /// The single time of an action that is not a potential receive.
    pub fn bt(&self) -> Result<Scalar> {
        match &self.timing {
            Timing::At(t) => Ok(t.clone()),
            Timing::Window(..) => Err(Error::Misuse(format!("bt of potential receive {self}"))),
        }
    }

    /// `bt` for actions known to carry a single time.
    pub fn time(&self) -> &Scalar {
        match &self.timing {
            Timing::At(t) | Timing::Window(t, _) => t,
        }
    }

    pub fn chan(&self) -> &Name {
        &self.channel
    }

    /// The actual counterpart of this action fired at `t`.
    pub fn actualize(&self, t: Scalar) -> Action {
        let kind = if self.kind.is_send() { ActionKind::AESend } else { ActionKind::AERecv };
        Action {
            kind,
            channel: self.channel.clone(),
            datum: self.datum.clone(),
            timing: Timing::At(t),
            point: self.point.clone(),
        }
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Kind filter of a pattern atom.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum PatternKind {
    Send,
    Recv,
    Any,
}

/// All actual actions of the given kind on the given channels (optionally
/// restricted to some data), at every time and point.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PatternAtom {
    pub kind: PatternKind,
    pub channels: BTreeSet<Name>,
    pub data: Option<BTreeSet<Name>>,
}

/// A finite union of pattern atoms, denoting a set of actual actions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct ActionPattern {
    pub atoms: Vec<PatternAtom>,
}

impl ActionPattern {
    pub fn nothing() -> Self {
        ActionPattern::default()
    }

    pub fn receives_on<'a>(channels: impl IntoIterator<Item = &'a str>) -> Self {
        ActionPattern {
            atoms: vec![PatternAtom {
                kind: PatternKind::Recv,
                channels: channels.into_iter().map(name).collect(),
                data: None,
            }],
        }
    }

    pub fn contains(&self, a: &Action) -> bool {
        if !a.kind.is_actual() {
            return false;
        }
        self.atoms.iter().any(|atom| {
            let kind_ok = match atom.kind {
                PatternKind::Send => a.kind == ActionKind::AESend,
                PatternKind::Recv => a.kind == ActionKind::AERecv,
                PatternKind::Any => true,
            };
            kind_ok && atom.channels.contains(&a.channel) && atom.data.as_ref().is_none_or(|d| d.contains(&a.datum))
        })
    }
}

/// A recursive specification: distinct variables mapped to right-hand sides.
///
/// Equality and hashing go through a fingerprint computed once at
/// construction, so terms holding recursion constants stay cheap to compare.
#[derive(Clone)]
pub struct RecSpec {
    pub equations: BTreeMap<Name, Term>,
    fingerprint: u64,
}

impl PartialEq for RecSpec {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other) || (self.fingerprint == other.fingerprint && self.equations == other.equations)
    }
}

impl Eq for RecSpec {}

impl Hash for RecSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.fingerprint.hash(state);
    }
}

impl PartialOrd for RecSpec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RecSpec {
    fn cmp(&self, other: &Self) -> Ordering {
        if std::ptr::eq(self, other) {
            return Ordering::Equal;
        }
        self.fingerprint.cmp(&other.fingerprint).then_with(|| self.equations.cmp(&other.equations))
    }
}

impl RecSpec {
    /// Build a specification, checking that right-hand sides only use its variables.
    pub fn new(equations: BTreeMap<Name, Term>) -> Result<Arc<RecSpec>> {
        for rhs in equations.values() {
            for v in rhs.free_vars() {
                if !equations.contains_key(&v) {
                    return Err(Error::OpenTerm(v.to_string()));
                }
            }
        }
        let mut h = DefaultHasher::new();
        equations.hash(&mut h);
        Ok(Arc::new(RecSpec { fingerprint: h.finish(), equations }))
    }

    pub fn from_pairs(pairs: Vec<(&str, Term)>) -> Result<Arc<RecSpec>> {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            if map.insert(name(k), v).is_some() {
                return Err(Error::Misuse(format!("duplicate equation for {k}")));
            }
        }
        RecSpec::new(map)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Name> {
        self.equations.keys()
    }

    pub fn rhs(&self, var: &str) -> Option<&Term> {
        self.equations.get(var)
    }
}

/// Process terms with maximal progress and recursion constants.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Immediate inaction.
    Delta,
    /// Absolutely timed inaction.
    ADead(ExtScalar),
    /// Relatively timed inaction.
    RDead(ExtScalar),
    Act(Action),
    Alt(Arc<Term>, Arc<Term>),
    Seq(Arc<Term>, Arc<Term>),
    Par(Arc<Term>, Arc<Term>),
    LeftMerge(Arc<Term>, Arc<Term>),
    Timeout(Arc<Term>, Arc<Term>),
    /// State operator: initialization at `time` from `sigma`, actualizing `channels`.
    State {
        channels: Arc<BTreeSet<Name>>,
        time: Scalar,
        sigma: CommState,
        body: Arc<Term>,
    },
    MaxProg(Arc<ActionPattern>, Arc<Term>),
    AuxMaxProg(Arc<ActionPattern>, Arc<Term>, Arc<Term>),
    Rec(Name, Arc<RecSpec>),
    Var(Name),
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<Action> for Term {
    fn from(a: Action) -> Term {
        Term::Act(a)
    }
}

impl Term {
    pub fn adead(t: impl Into<ExtScalar>) -> Term {
        Term::ADead(t.into())
    }

    pub fn rdead(t: impl Into<ExtScalar>) -> Term {
        Term::RDead(t.into())
    }

    pub fn alt(a: Term, b: Term) -> Term {
        Term::Alt(Arc::new(a), Arc::new(b))
    }

    pub fn seq(a: Term, b: Term) -> Term {
        Term::Seq(Arc::new(a), Arc::new(b))
    }

    pub fn par(a: Term, b: Term) -> Term {
        Term::Par(Arc::new(a), Arc::new(b))
    }

    pub fn left_merge(a: Term, b: Term) -> Term {
        Term::LeftMerge(Arc::new(a), Arc::new(b))
    }

    pub fn timeout(a: Term, b: Term) -> Term {
        Term::Timeout(Arc::new(a), Arc::new(b))
    }

    pub fn state<'a>(channels: impl IntoIterator<Item = &'a str>, time: Scalar, sigma: CommState, body: Term) -> Term {
        Term::State { channels: Arc::new(channels.into_iter().map(name).collect()), time, sigma, body: Arc::new(body) }
    }

    pub fn state_with(channels: Arc<BTreeSet<Name>>, time: Scalar, sigma: CommState, body: Term) -> Term {
        Term::State { channels, time, sigma, body: Arc::new(body) }
    }

    pub fn max_prog(h: ActionPattern, body: Term) -> Term {
        Term::MaxProg(Arc::new(h), Arc::new(body))
    }

    pub fn var(v: &str) -> Term {
        Term::Var(name(v))
    }

    pub fn rec(v: &str, spec: Arc<RecSpec>) -> Term {
        Term::Rec(name(v), spec)
    }

    /// Right-nested alternative composition; the empty sum is `δ`.
    pub fn sum(items: impl IntoIterator<Item = Term>) -> Term {
        let items: Vec<Term> = items.into_iter().collect();
        let mut iter = items.into_iter().rev();
        match iter.next() {
            None => Term::Delta,
            Some(last) => iter.fold(last, |acc, t| Term::alt(t, acc)),
        }
    }

    /// Right-nested sequential composition.
    pub fn seq_all(items: impl IntoIterator<Item = Term>) -> Term {
        let items: Vec<Term> = items.into_iter().collect();
        let mut iter = items.into_iter().rev();
        let last = iter.next().expect("nonempty sequence");
        iter.fold(last, |acc, t| Term::seq(t, acc))
    }

    /// The alternatives of a term, with nested `+` flattened.
    pub fn summands(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        fn go<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
            match t {
                Term::Alt(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn as_action(&self) -> Option<&Action> {
        match self {
            Term::Act(a) => Some(a),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut out);
        out
    }

    fn collect_free_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Alt(a, b) | Term::Seq(a, b) | Term::Par(a, b) | Term::LeftMerge(a, b) | Term::Timeout(a, b) => {
                a.collect_free_vars(out);
                b.collect_free_vars(out);
            }
            Term::AuxMaxProg(_, a, b) => {
                a.collect_free_vars(out);
                b.collect_free_vars(out);
            }
            Term::State { body, .. } | Term::MaxProg(_, body) => body.collect_free_vars(out),
            Term::Delta | Term::ADead(_) | Term::RDead(_) | Term::Act(_) | Term::Rec(..) => {}
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Replace free variables by the given terms.
    pub fn substitute(&self, map: &dyn Fn(&Name) -> Option<Term>) -> Term {
        let sub = |t: &Arc<Term>| Arc::new(t.substitute(map));
        match self {
            Term::Var(v) => map(v).unwrap_or_else(|| self.clone()),
            Term::Alt(a, b) => Term::Alt(sub(a), sub(b)),
            Term::Seq(a, b) => Term::Seq(sub(a), sub(b)),
            Term::Par(a, b) => Term::Par(sub(a), sub(b)),
            Term::LeftMerge(a, b) => Term::LeftMerge(sub(a), sub(b)),
            Term::Timeout(a, b) => Term::Timeout(sub(a), sub(b)),
            Term::State { channels, time, sigma, body } => {
                Term::State { channels: channels.clone(), time: time.clone(), sigma: sigma.clone(), body: sub(body) }
            }
            Term::MaxProg(h, b) => Term::MaxProg(h.clone(), sub(b)),
            Term::AuxMaxProg(h, a, b) => Term::AuxMaxProg(h.clone(), sub(a), sub(b)),
            Term::Delta | Term::ADead(_) | Term::RDead(_) | Term::Act(_) | Term::Rec(..) => self.clone(),
        }
    }

    /// The right-hand side of a recursion constant with its variables bound
    /// to the constants of the same specification.
    pub fn unfold_rec(var: &Name, spec: &Arc<RecSpec>) -> Result<Term> {
        let rhs = spec.rhs(var).ok_or_else(|| Error::OpenTerm(var.to_string()))?;
        Ok(rhs.substitute(&|v| spec.equations.contains_key(v).then(|| Term::Rec(v.clone(), spec.clone()))))
    }

    /// Channels of all actions occurring in the term, including inside recursion constants.
    pub fn channels(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut seen_specs: Vec<*const RecSpec> = Vec::new();
        self.collect_channels(&mut out, &mut seen_specs);
        out
    }

    fn collect_channels(&self, out: &mut BTreeSet<Name>, seen: &mut Vec<*const RecSpec>) {
        match self {
            Term::Act(a) => {
                out.insert(a.channel.clone());
            }
            Term::Alt(a, b) | Term::Seq(a, b) | Term::Par(a, b) | Term::LeftMerge(a, b) | Term::Timeout(a, b) => {
                a.collect_channels(out, seen);
                b.collect_channels(out, seen);
            }
            Term::AuxMaxProg(_, a, b) => {
                a.collect_channels(out, seen);
                b.collect_channels(out, seen);
            }
            Term::State { body, .. } | Term::MaxProg(_, body) => body.collect_channels(out, seen),
            Term::Rec(_, spec) => {
                let ptr = Arc::as_ptr(spec);
                if !seen.contains(&ptr) {
                    seen.push(ptr);
                    for rhs in spec.equations.values() {
                        rhs.collect_channels(out, seen);
                    }
                }
            }
            Term::Delta | Term::ADead(_) | Term::RDead(_) | Term::Var(_) => {}
        }
    }

    /// Every time value written in the term (action times, window bounds,
    /// inaction times, state-operator times and send times in states).
    pub fn time_literals(&self) -> BTreeSet<Scalar> {
        let mut out = BTreeSet::new();
        let mut seen: Vec<*const RecSpec> = Vec::new();
        self.collect_times(&mut out, &mut seen);
        out
    }

    fn collect_times(&self, out: &mut BTreeSet<Scalar>, seen: &mut Vec<*const RecSpec>) {
        let ext = |e: &ExtScalar, out: &mut BTreeSet<Scalar>| {
            if let ExtScalar::Finite(s) = e {
                out.insert(s.clone());
            }
        };
        match self {
            Term::ADead(t) | Term::RDead(t) => ext(t, out),
            Term::Act(a) => match &a.timing {
                Timing::At(t) => {
                    out.insert(t.clone());
                }
                Timing::Window(lo, hi) => {
                    out.insert(lo.clone());
                    ext(hi, out);
                }
            },
            Term::Alt(a, b) | Term::Seq(a, b) | Term::Par(a, b) | Term::LeftMerge(a, b) | Term::Timeout(a, b) => {
                a.collect_times(out, seen);
                b.collect_times(out, seen);
            }
            Term::AuxMaxProg(_, a, b) => {
                a.collect_times(out, seen);
                b.collect_times(out, seen);
            }
            Term::State { time, sigma, body, .. } => {
                out.insert(time.clone());
                for r in sigma.records() {
                    out.insert(r.time.clone());
                }
                body.collect_times(out, seen);
            }
            Term::MaxProg(_, body) => body.collect_times(out, seen),
            Term::Rec(_, spec) => {
                let ptr = Arc::as_ptr(spec);
                if !seen.contains(&ptr) {
                    seen.push(ptr);
                    for rhs in spec.equations.values() {
                        rhs.collect_times(out, seen);
                    }
                }
            }
            Term::Delta | Term::Var(_) => {}
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Alt(a, b) | Term::Seq(a, b) | Term::Par(a, b) | Term::LeftMerge(a, b) | Term::Timeout(a, b) => {
                1 + a.size() + b.size()
            }
            Term::AuxMaxProg(_, a, b) => 1 + a.size() + b.size(),
            Term::State { body, .. } | Term::MaxProg(_, body) => 1 + body.size(),
            _ => 1,
        }
    }
}

/// Membership in the atomic process terms: actions, finitely timed
/// inactions, and `α ▷ P` with `α` atomic.
pub fn is_atomic(p: &Term) -> bool {
    match p {
        Term::Act(_) => true,
        Term::ADead(t) | Term::RDead(t) => !t.is_infinite(),
        Term::Timeout(a, q) => is_atomic(a) && q.is_closed(),
        _ => false,
    }
}

/// Membership in the linear terms.
pub fn is_linear(t: &Term) -> bool {
    linear_with(t, false)
}

/// Linear terms, additionally admitting `dd(abs inf)` as a summand.
pub fn is_linear_ext(t: &Term) -> bool {
    linear_with(t, true)
}

fn linear_with(t: &Term, allow_inf: bool) -> bool {
    match t {
        Term::Delta => true,
        Term::ADead(x) => allow_inf || !x.is_infinite(),
        Term::Act(a) => a.kind.is_actual(),
        Term::Seq(a, x) => matches!(&**a, Term::Act(a) if a.kind.is_actual()) && matches!(&**x, Term::Var(_)),
        Term::Alt(a, b) => linear_with(a, allow_inf) && linear_with(b, allow_inf),
        _ => false,
    }
}

pub fn is_linear_spec(e: &RecSpec) -> bool {
    e.equations.values().all(is_linear)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Guardedness {
    Guarded,
    NotShownGuarded,
}

/// Does every first step of `t` start with an action, reading through
/// `(x·y)·z = x·(y·z)` and `(x+y)·z = x·z + y·z`?
fn starts_with_action(t: &Term) -> bool {
    match t {
        Term::Act(_) => true,
        Term::Seq(a, _) => starts_with_action(a),
        Term::Alt(a, b) => starts_with_action(a) && starts_with_action(b),
        _ => false,
    }
}

fn unguarded_vars(t: &Term, guarded: bool, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(v) => {
            if !guarded {
                out.insert(v.clone());
            }
        }
        Term::Seq(a, b) => {
            unguarded_vars(a, guarded, out);
            unguarded_vars(b, guarded || starts_with_action(a), out);
        }
        Term::Alt(a, b) | Term::Par(a, b) | Term::LeftMerge(a, b) | Term::Timeout(a, b) => {
            unguarded_vars(a, guarded, out);
            unguarded_vars(b, guarded, out);
        }
        Term::AuxMaxProg(_, a, b) => {
            unguarded_vars(a, guarded, out);
            unguarded_vars(b, guarded, out);
        }
        Term::State { body, .. } | Term::MaxProg(_, body) => unguarded_vars(body, guarded, out),
        Term::Delta | Term::ADead(_) | Term::RDead(_) | Term::Act(_) | Term::Rec(..) => {}
    }
}

/// Conservative guardedness check: each right-hand side must become
/// syntactically guarded after at most `budget` rounds of substituting the
/// right-hand sides of *other* equations for its unguarded variables.
pub fn is_guarded_spec(e: &RecSpec, budget: usize) -> Guardedness {
    for (x, rhs) in &e.equations {
        let mut body = rhs.clone();
        let mut rounds = 0;
        loop {
            let mut bad = BTreeSet::new();
            unguarded_vars(&body, false, &mut bad);
            if bad.is_empty() {
                break;
            }
            if bad.contains(x) || rounds >= budget {
                return Guardedness::NotShownGuarded;
            }
            rounds += 1;
            body = body.substitute(&|v| bad.contains(v).then(|| e.equations[v].clone()));
        }
    }
    Guardedness::Guarded
}

/// `p` is a summand of `q`: `p + r = q` or `p = q` modulo commutativity and
/// associativity of `+`, i.e. the summands of `p` form a sub-multiset of those of `q`.
pub fn is_summand(p: &Term, q: &Term) -> bool {
    let mut rest: Vec<&Term> = q.summands();
    for s in p.summands() {
        match rest.iter().position(|r| *r == s) {
            Some(i) => {
                rest.swap_remove(i);
            }
            None => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn es(t: i64) -> Term {
        Action::es("c", "d", Scalar::int(t), Point::origin()).into()
    }

    #[test]
    fn time_functions() {
        let pr = Action::pr_abs("c", "d", Scalar::int(2), Scalar::int(5).into(), Point::origin()).unwrap();
        assert_eq!(pr.lbt(), Scalar::int(2));
        assert_eq!(pr.ubt(), ExtScalar::Finite(Scalar::int(5)));
        assert!(pr.bt().is_err());
        let e = Action::es("c", "d", Scalar::int(3), Point::origin());
        assert_eq!(e.bt().unwrap(), Scalar::int(3));
        let open = Action::pr_abs("c", "d", Scalar::zero(), ExtScalar::Infinity, Point::origin()).unwrap();
        assert_eq!(open.ubt(), ExtScalar::Infinity);
    }

    #[test]
    fn empty_window_rejected() {
        assert!(Action::pr_abs("c", "d", Scalar::int(5), Scalar::int(2).into(), Point::origin()).is_err());
        assert!(Action::pr_rel("c", "d", Scalar::int(2), Scalar::int(2).into(), Point::origin()).is_err());
    }

    #[test]
    fn channel_projection() {
        assert_eq!(&**Action::ps_abs("c1", "d", Scalar::one(), Point::origin()).chan(), "c1");
        let pr = Action::pr_abs("c2", "d", Scalar::zero(), Scalar::one().into(), Point::origin()).unwrap();
        assert_eq!(&**pr.chan(), "c2");
        assert_eq!(&**Action::er("c3", "d", Scalar::int(5), Point::origin()).chan(), "c3");
    }

    #[test]
    fn atomicity() {
        assert!(is_atomic(&es(1)));
        assert!(is_atomic(&Term::timeout(es(1), Term::par(es(2), es(3)))));
        assert!(!is_atomic(&Term::seq(es(1), es(2))));
        assert!(!is_atomic(&Term::adead(ExtScalar::Infinity)));
    }

    #[test]
    fn linearity() {
        assert!(is_linear(&Term::alt(Term::seq(es(1), Term::var("X")), Term::adead(Scalar::int(2)))));
        let ps = Action::ps_abs("c", "d", Scalar::one(), Point::origin());
        assert!(!is_linear(&Term::seq(ps.into(), Term::var("X"))));
        assert!(!is_linear(&Term::rdead(Scalar::int(2))));
    }

    #[test]
    fn guardedness() {
        let e = RecSpec::from_pairs(vec![("X", Term::seq(es(1), Term::var("X")))]).unwrap();
        assert_eq!(is_guarded_spec(&e, 0), Guardedness::Guarded);
        let e = RecSpec::from_pairs(vec![("X", Term::var("X"))]).unwrap();
        assert_eq!(is_guarded_spec(&e, 5), Guardedness::NotShownGuarded);
        let e = RecSpec::from_pairs(vec![("X", Term::var("Y")), ("Y", Term::seq(es(1), Term::var("X")))]).unwrap();
        assert_eq!(is_guarded_spec(&e, 0), Guardedness::NotShownGuarded);
        assert_eq!(is_guarded_spec(&e, 1), Guardedness::Guarded);
    }

    #[test]
    fn summands() {
        assert!(is_summand(&es(1), &Term::alt(es(1), es(2))));
        assert!(is_summand(&Term::alt(es(1), es(2)), &Term::alt(es(2), es(1))));
        assert!(is_summand(&Term::alt(es(2), es(1)), &Term::alt(es(1), Term::alt(es(2), es(3)))));
        assert!(!is_summand(&es(3), &Term::alt(es(1), es(2))));
    }

    #[test]
    fn unfold_binds_siblings() {
        let e = RecSpec::from_pairs(vec![("X", Term::seq(es(1), Term::var("Y"))), ("Y", es(2))]).unwrap();
        let u = Term::unfold_rec(&name("X"), &e).unwrap();
        assert_eq!(u, Term::seq(es(1), Term::rec("Y", e.clone())));
        assert!(u.is_closed());
    }

    #[test]
    fn pattern_membership() {
        let h = ActionPattern::receives_on(["c"]);
        assert!(h.contains(&Action::er("c", "d", Scalar::one(), Point::origin())));
        assert!(!h.contains(&Action::es("c", "d", Scalar::one(), Point::origin())));
        assert!(!h.contains(&Action::er("k", "d", Scalar::one(), Point::origin())));
    }
}
