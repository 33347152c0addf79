//! Directed axiom schemas, rewrite traces, and the normalizers built on them.
//!
//! Every schema is applied left to right by [`apply_root`]. Commutativity of
//! `+` is not a rewrite rule; it is handled by [`canon::alt_canonical`], which
//! is recorded in traces as the pseudo-step `ACI`.

pub mod canon;
pub mod normal;
pub mod soundness;

use std::fmt;
use std::sync::Arc;

use crate::comm::{min_time, priority_lt, rcpt, CommState, SendRecord, SpeedConfig};
use crate::error::{Error, Result};
use crate::meadow::{ExtScalar, Scalar};
use crate::terms::{is_atomic, Action, ActionKind, Term, Timing};

pub use canon::{alt_canonical, classify, NormalFormClass};
pub use normal::{hnf_state, maxpr_eliminate, normalize, shnf, Normalizer};

macro_rules! axioms {
    ($($v:ident => $id:literal, $eq:literal;)*) => {
        /// Identifiers of the directed schemas.
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
        pub enum Ax { $($v,)* }

        impl Ax {
            pub const ALL: &'static [Ax] = &[$(Ax::$v,)*];

            pub fn id(self) -> &'static str {
                match self { $(Ax::$v => $id,)* }
            }

            /// The schema in text form (metavariables x, y, z; atoms α; actions a).
            pub fn equation(self) -> &'static str {
                match self { $(Ax::$v => $eq,)* }
            }
        }
    };
}

axioms! {
    A2 => "A2", "(x + y) + z = x + (y + z)";
    A3 => "A3", "x + x = x";
    A4 => "A4", "(x + y) . z = x . z + y . z";
    A5 => "A5", "(x . y) . z = x . (y . z)";
    A6 => "A6", "x + dd = x";
    A7 => "A7", "dd . x = dd";
    M1 => "M1", "x || y = x |_ y + y |_ x";
    M2 => "M2", "α |_ x = (α >> x) . x";
    M3 => "M3", "α . x |_ y = (α >> y) . (x || y)";
    M4 => "M4", "(x + y) |_ z = x |_ z + y |_ z";
    D1 => "D1", "dd(abs t) + dd(abs t') = dd(abs t)  if t' < t";
    D2 => "D2", "dd(abs t) + dd(abs t') = dd(abs t')  if t <= t'";
    D3 => "D3", "a + dd(abs t) = a  if a absolute, not a potential receive, bt(a) = t";
    D4 => "D4", "dd(abs t) . x = dd(abs t)";
    D5 => "D5", "dd(rel t) + dd(rel t') = dd(rel t)  if t' < t";
    D6 => "D6", "dd(rel t) + dd(rel t') = dd(rel t')  if t <= t'";
    D7 => "D7", "a + dd(rel t) = a  if a relative, not a potential receive, bt(a) = t";
    D8 => "D8", "dd(rel t) . x = dd(rel t)";
    D9 => "D9", "dd = dd(rel 0)";
    T1 => "T1", "dd(abs t) >> dd(abs t') = dd(abs t')  if t' < t";
    T2 => "T2", "dd(abs t) >> dd(abs t') = dd(abs t)  if t <= t'";
    T3 => "T3", "dd(rel t) >> dd(rel t') = dd(rel t')  if t' < t";
    T4 => "T4", "dd(rel t) >> dd(rel t') = dd(rel t)  if t <= t'";
    T5 => "T5", "a >> a' = a  if ubt(a) <= lbt(a'), same timing style";
    T6 => "T6", "x >> a = x >> dd(abs t)  if a absolute, not a potential receive, bt(a) = t";
    T7 => "T7", "x >> a = x >> dd(rel t)  if a relative, not a potential receive, bt(a) = t";
    T8 => "T8", "x >> (y + z) = x >> y + x >> z";
    T9 => "T9", "x >> y . z = x >> y";
    T10 => "T10", "x >> (y >> z) = (x >> y) >> z";
    T11 => "T11", "a >> dd(abs t) = dd(abs t)  if a absolute, t < lbt(a)";
    T12 => "T12", "a >> dd(abs t) = a  if a absolute, ubt(a) <= t";
    T13 => "T13", "a >> dd(rel t) = dd(rel t)  if a relative, t < lbt(a)";
    T14 => "T14", "a >> dd(rel t) = a  if a relative, ubt(a) <= t";
    T15 => "T15", "(x + y) >> z = x >> z + y >> z";
    T16 => "T16", "x . y >> z = (x >> z) . y";
    T17 => "T17", "(x >> y) >> z = (x >> z) >> y";
    T16Inv => "T16'", "(x >> z) . y = x . y >> z";
    S1 => "S1", "L[t,s](dd(abs t')) = dd  if t' < t";
    S2 => "S2", "L[t,s](dd(abs t')) = dd(abs t')  if t <= t'";
    S3 => "S3", "L[t,s](dd(rel t')) = dd(abs t+t')";
    S4 => "S4", "L[t,s](a) = a  if chan(a) not in C";
    S5 => "S5", "L[t,s](ps abs t') = dd  if t' < t";
    S6 => "S6", "L[t,s](ps abs t') = es t'  if t <= t'";
    S7 => "S7", "L[t,s](ps rel t') = es t+t'";
    S8 => "S8", "L[t,s](pr abs t'..t'') = dd  if t'' <= t";
    S9 => "S9", "L[t,s](pr abs t'..t'') = dd(abs t'')  if t < t'', no reception time";
    S10 => "S10", "L[t,s](pr abs t'..t'') = er min(V)  if t < t'', V = reception times";
    S11 => "S11", "L[t,s](pr rel t'..t'') = dd(abs t+t'')  if no reception time";
    S12 => "S12", "L[t,s](pr rel t'..t'') = er min(V)  if V = reception times nonempty";
    S13 => "S13", "L[t,s](es t') = dd  if t' < t";
    S14 => "S14", "L[t,s](es t') = es t'  if t <= t'";
    S15 => "S15", "L[t,s](er t') = dd  if t' < t";
    S16 => "S16", "L[t,s](er t') = er t'  if t <= t'";
    S17 => "S17", "L[t,s](a . x) = a . L[t,s](x)  if chan(a) not in C";
    S18 => "S18", "L[t,s](ps abs t' . x) = dd  if t' < t";
    S19 => "S19", "L[t,s](ps abs t' . x) = es t' . L[t',s+send](x)  if t <= t'";
    S20 => "S20", "L[t,s](ps rel t' . x) = es t+t' . L[t+t',s+send](x)";
    S21 => "S21", "L[t,s](pr abs t'..t'' . x) = dd  if t'' <= t";
    S22 => "S22", "L[t,s](pr abs t'..t'' . x) = dd(abs t'')  if t < t'', no reception time";
    S23 => "S23", "L[t,s](pr abs t'..t'' . x) = er m . L[m,s](x)  if t < t'', m = min(V)";
    S24 => "S24", "L[t,s](pr rel t'..t'' . x) = dd(abs t+t'')  if no reception time";
    S25 => "S25", "L[t,s](pr rel t'..t'' . x) = er m . L[m,s](x)  if m = min(V)";
    S26 => "S26", "L[t,s](es t' . x) = dd  if t' < t";
    S27 => "S27", "L[t,s](es t' . x) = es t' . L[t',s+send](x)  if t <= t'";
    S28 => "S28", "L[t,s](er t' . x) = dd  if t' < t";
    S29 => "S29", "L[t,s](er t' . x) = er t' . L[t',s](x)  if t <= t'";
    S30 => "S30", "L[t,s](x + y) = L[t,s](x) + L[t,s](y)";
    S31 => "S31", "L[t,s](x >> y) = L[t,s](x) >> L[t,s](y)";
    P1 => "P1", "mp[H](x) = amp[H](x, x)";
    P2 => "P2", "amp[H](α, α') = α  if not α <H α'";
    P3 => "P3", "amp[H](α, α') = dd(abs t)  if α <H α', α' an actual action at t";
    P4 => "P4", "amp[H](x . y, z) = amp[H](x, z) . mp[H](y)";
    P5 => "P5", "amp[H](x + y, z) = amp[H](x, z) + amp[H](y, z)";
    P6 => "P6", "amp[H](x, y . z) = amp[H](x, y)";
    P7 => "P7", "amp[H](x, y + z) = amp[H](amp[H](x, y), z)";
    Rdp => "RDP", "rec X E = rec T E  if X = T in E";
    Dx => "DX", "s + dd(abs r) = s  if another summand idles at least till r; s + dd = s (derived)";
    D4x => "D4X", "dd(abs inf) . x = dd(abs inf), dd(rel inf) . x = dd(rel inf)  (derived)";
    Tx => "TX", "x >> dd(abs inf) = x, dd(abs inf) >> dd(abs t) = dd(abs t)  (derived)";
    Dz => "DZ", "x >> dd = dd, dd >> x = dd, dd |_ x = dd, L[t,s](dd) = dd  (derived)";
    Aci => "ACI", "sums equal up to associativity, commutativity and idempotence of +";
}

impl fmt::Display for Ax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl Ax {
    pub fn from_id(id: &str) -> Option<Ax> {
        Ax::ALL.iter().copied().find(|a| a.id().eq_ignore_ascii_case(id))
    }
}

/// Atomic terms, also admitting inactions at `∞`.
pub fn is_atomic_ext(p: &Term) -> bool {
    match p {
        Term::ADead(_) | Term::RDead(_) => true,
        Term::Timeout(a, q) => is_atomic_ext(a) && q.is_closed(),
        other => is_atomic(other),
    }
}

fn alt(a: Term, b: Term) -> Term {
    Term::alt(a, b)
}

fn seq(a: Term, b: Term) -> Term {
    Term::seq(a, b)
}

fn tout(a: Term, b: Term) -> Term {
    Term::timeout(a, b)
}

fn non_pr_abs(a: &Action) -> bool {
    matches!(a.kind, ActionKind::APSend | ActionKind::AESend | ActionKind::AERecv)
}

fn non_pr_rel(a: &Action) -> bool {
    a.kind == ActionKind::RPSend
}

fn adead(t: Scalar) -> Term {
    Term::ADead(ExtScalar::Finite(t))
}

fn window(a: &Action) -> (Scalar, ExtScalar) {
    match &a.timing {
        Timing::Window(lo, hi) => (lo.clone(), hi.clone()),
        Timing::At(t) => (t.clone(), ExtScalar::Finite(t.clone())),
    }
}

/// Reception instant for a potential receive under `Λ^t_σ`: `Ok(None)` when
/// the reception-time set is empty.
fn reception(a: &Action, t: &Scalar, sigma: &CommState, cfg: &SpeedConfig) -> Result<Option<Scalar>> {
    let (lo, hi) = window(a);
    let v = if a.kind == ActionKind::APRecv {
        rcpt(sigma, &a.channel, &a.datum, &t.max2(&lo), &hi, &a.point, cfg)?
    } else {
        rcpt(sigma, &a.channel, &a.datum, &(t + &lo), &hi.shift(t), &a.point, cfg)?
    };
    Ok(min_time(&v))
}

fn state_like(p: &Term, t: Scalar, sigma: CommState, body: Term) -> Term {
    match p {
        Term::State { channels, .. } => Term::state_with(channels.clone(), t, sigma, body),
        _ => unreachable!(),
    }
}

/// Apply one schema at the root of `p`; `Ok(None)` if it does not match or
/// its side condition fails.
pub fn apply_root(ax: Ax, p: &Term, cfg: &SpeedConfig) -> Result<Option<Term>> {
    use Term::*;
    let r = match (ax, p) {
        (Ax::A2, Alt(xy, z)) => match &**xy {
            Alt(x, y) => Some(Alt(x.clone(), Arc::new(Alt(y.clone(), z.clone())))),
            _ => None,
        },
        (Ax::A3, Alt(x, y)) if x == y => Some((**x).clone()),
        (Ax::A4, Seq(xy, z)) => match &**xy {
            Alt(x, y) => Some(Alt(Arc::new(Seq(x.clone(), z.clone())), Arc::new(Seq(y.clone(), z.clone())))),
            _ => None,
        },
        (Ax::A5, Seq(xy, z)) => match &**xy {
            Seq(x, y) => Some(Seq(x.clone(), Arc::new(Seq(y.clone(), z.clone())))),
            _ => None,
        },
        (Ax::A6, Alt(x, d)) if **d == Delta => Some((**x).clone()),
        (Ax::A7, Seq(d, _)) if **d == Delta => Some(Delta),
        (Ax::M1, Par(x, y)) => {
            Some(Alt(Arc::new(LeftMerge(x.clone(), y.clone())), Arc::new(LeftMerge(y.clone(), x.clone()))))
        }
        (Ax::M2, LeftMerge(a, x)) if is_atomic_ext(a) => Some(Seq(Arc::new(Timeout(a.clone(), x.clone())), x.clone())),
        (Ax::M3, LeftMerge(ax_, y)) => match &**ax_ {
            Seq(a, x) if is_atomic_ext(a) => {
                Some(Seq(Arc::new(Timeout(a.clone(), y.clone())), Arc::new(Par(x.clone(), y.clone()))))
            }
            _ => None,
        },
        (Ax::M4, LeftMerge(xy, z)) => match &**xy {
            Alt(x, y) => {
                Some(Alt(Arc::new(LeftMerge(x.clone(), z.clone())), Arc::new(LeftMerge(y.clone(), z.clone()))))
            }
            _ => None,
        },
        (Ax::D1 | Ax::D2, Alt(x, y)) => match (&**x, &**y) {
            (ADead(ExtScalar::Finite(t)), ADead(ExtScalar::Finite(t2))) => {
                if ax == Ax::D1 && t2 < t {
                    Some((**x).clone())
                } else if ax == Ax::D2 && t <= t2 {
                    Some((**y).clone())
                } else {
                    None
                }
            }
            _ => None,
        },
        (Ax::D5 | Ax::D6, Alt(x, y)) => match (&**x, &**y) {
            (RDead(ExtScalar::Finite(t)), RDead(ExtScalar::Finite(t2))) => {
                if ax == Ax::D5 && t2 < t {
                    Some((**x).clone())
                } else if ax == Ax::D6 && t <= t2 {
                    Some((**y).clone())
                } else {
                    None
                }
            }
            _ => None,
        },
        (Ax::D3, Alt(x, y)) => match (&**x, &**y) {
            (Act(a), ADead(t)) if non_pr_abs(a) && t == a.time() => Some((**x).clone()),
            _ => None,
        },
        (Ax::D7, Alt(x, y)) => match (&**x, &**y) {
            (Act(a), RDead(t)) if non_pr_rel(a) && t == a.time() => Some((**x).clone()),
            _ => None,
        },
        (Ax::D4, Seq(d, _)) if matches!(&**d, ADead(ExtScalar::Finite(_))) => Some((**d).clone()),
        (Ax::D8, Seq(d, _)) if matches!(&**d, RDead(ExtScalar::Finite(_))) => Some((**d).clone()),
        (Ax::D4x, Seq(d, _)) if matches!(&**d, ADead(ExtScalar::Infinity) | RDead(ExtScalar::Infinity)) => {
            Some((**d).clone())
        }
        (Ax::Tx, Timeout(x, y)) => match (&**x, &**y) {
            (_, ADead(ExtScalar::Infinity)) => Some((**x).clone()),
            (ADead(ExtScalar::Infinity), ADead(ExtScalar::Finite(_))) => Some((**y).clone()),
            _ => None,
        },
        (Ax::Dz, Timeout(x, y)) if **x == Delta || **y == Delta => Some(Delta),
        (Ax::Dz, LeftMerge(x, _)) if **x == Delta => Some(Delta),
        (Ax::Dz, State { body, .. }) if **body == Delta => Some(Delta),
        (Ax::D9, Delta) => Some(RDead(ExtScalar::Finite(Scalar::zero()))),
        (Ax::T1 | Ax::T2, Timeout(x, y)) => match (&**x, &**y) {
            (ADead(ExtScalar::Finite(t)), ADead(ExtScalar::Finite(t2))) => {
                if ax == Ax::T1 && t2 < t {
                    Some((**y).clone())
                } else if ax == Ax::T2 && t <= t2 {
                    Some((**x).clone())
                } else {
                    None
                }
            }
            _ => None,
        },
        (Ax::T3 | Ax::T4, Timeout(x, y)) => match (&**x, &**y) {
            (RDead(ExtScalar::Finite(t)), RDead(ExtScalar::Finite(t2))) => {
                if ax == Ax::T3 && t2 < t {
                    Some((**y).clone())
                } else if ax == Ax::T4 && t <= t2 {
                    Some((**x).clone())
                } else {
                    None
                }
            }
            _ => None,
        },
        (Ax::T5, Timeout(x, y)) => match (&**x, &**y) {
            (Act(a), Act(a2))
                if a.kind.is_relative() == a2.kind.is_relative() && a.ubt().le(&ExtScalar::Finite(a2.lbt())) =>
            {
                Some((**x).clone())
            }
            _ => None,
        },
        (Ax::T6, Timeout(x, y)) => match &**y {
            Act(a) if non_pr_abs(a) => Some(Timeout(x.clone(), Arc::new(adead(a.time().clone())))),
            _ => None,
        },
        (Ax::T7, Timeout(x, y)) => match &**y {
            Act(a) if non_pr_rel(a) => Some(Timeout(x.clone(), Arc::new(RDead(a.time().clone().into())))),
            _ => None,
        },
        (Ax::T8, Timeout(x, yz)) => match &**yz {
            Alt(y, z) => Some(Alt(Arc::new(Timeout(x.clone(), y.clone())), Arc::new(Timeout(x.clone(), z.clone())))),
            _ => None,
        },
        (Ax::T9, Timeout(x, yz)) => match &**yz {
            Seq(y, _) => Some(Timeout(x.clone(), y.clone())),
            _ => None,
        },
        (Ax::T10, Timeout(x, yz)) => match &**yz {
            Timeout(y, z) => Some(Timeout(Arc::new(Timeout(x.clone(), y.clone())), z.clone())),
            _ => None,
        },
        (Ax::T11 | Ax::T12, Timeout(x, y)) => match (&**x, &**y) {
            (Act(a), ADead(ExtScalar::Finite(t))) if a.kind.is_absolute() => {
                if ax == Ax::T11 && t < &a.lbt() {
                    Some((**y).clone())
                } else if ax == Ax::T12 && a.ubt().le(&ExtScalar::Finite(t.clone())) {
                    Some((**x).clone())
                } else {
                    None
                }
            }
            _ => None,
        },
        (Ax::T13 | Ax::T14, Timeout(x, y)) => match (&**x, &**y) {
            (Act(a), RDead(ExtScalar::Finite(t))) if a.kind.is_relative() => {
                if ax == Ax::T13 && t < &a.lbt() {
                    Some((**y).clone())
                } else if ax == Ax::T14 && a.ubt().le(&ExtScalar::Finite(t.clone())) {
                    Some((**x).clone())
                } else {
                    None
                }
            }
            _ => None,
        },
        (Ax::T15, Timeout(xy, z)) => match &**xy {
            Alt(x, y) => Some(Alt(Arc::new(Timeout(x.clone(), z.clone())), Arc::new(Timeout(y.clone(), z.clone())))),
            _ => None,
        },
        (Ax::T16, Timeout(xy, z)) => match &**xy {
            Seq(x, y) => Some(Seq(Arc::new(Timeout(x.clone(), z.clone())), y.clone())),
            _ => None,
        },
        (Ax::T17, Timeout(xy, z)) => match &**xy {
            Timeout(x, y) => Some(Timeout(Arc::new(Timeout(x.clone(), z.clone())), y.clone())),
            _ => None,
        },
        (Ax::T16Inv, Seq(xz, y)) => match &**xz {
            Timeout(x, z) => Some(Timeout(Arc::new(Seq(x.clone(), y.clone())), z.clone())),
            _ => None,
        },
        (ax, State { channels, time: t, sigma, body }) if ax.id().starts_with('S') => {
            return state_axiom(ax, p, channels.as_ref(), t, sigma, body, cfg)
        }
        (Ax::P1, MaxProg(h, x)) => Some(AuxMaxProg(h.clone(), x.clone(), x.clone())),
        (Ax::P2 | Ax::P3, AuxMaxProg(h, a, b)) if is_atomic_ext(a) && is_atomic_ext(b) => {
            let lt = priority_lt(h, a, b);
            match (ax, lt) {
                (Ax::P2, false) => Some((**a).clone()),
                (Ax::P3, true) => b.as_action().map(|b| adead(b.time().clone())),
                _ => None,
            }
        }
        (Ax::P4, AuxMaxProg(h, xy, z)) => match &**xy {
            Seq(x, y) => Some(Seq(
                Arc::new(AuxMaxProg(h.clone(), x.clone(), z.clone())),
                Arc::new(MaxProg(h.clone(), y.clone())),
            )),
            _ => None,
        },
        (Ax::P5, AuxMaxProg(h, xy, z)) => match &**xy {
            Alt(x, y) => Some(Alt(
                Arc::new(AuxMaxProg(h.clone(), x.clone(), z.clone())),
                Arc::new(AuxMaxProg(h.clone(), y.clone(), z.clone())),
            )),
            _ => None,
        },
        (Ax::P6, AuxMaxProg(h, x, yz)) => match &**yz {
            Seq(y, _) => Some(AuxMaxProg(h.clone(), x.clone(), y.clone())),
            _ => None,
        },
        (Ax::P7, AuxMaxProg(h, x, yz)) => match &**yz {
            Alt(y, z) => Some(AuxMaxProg(h.clone(), Arc::new(AuxMaxProg(h.clone(), x.clone(), y.clone())), z.clone())),
            _ => None,
        },
        (Ax::Rdp, Rec(v, spec)) => Some(Term::unfold_rec(v, spec)?),
        (Ax::Dx, Alt(..)) => absorb_dead(p),
        _ => None,
    };
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn state_axiom(
    ax: Ax,
    p: &Term,
    channels: &std::collections::BTreeSet<crate::terms::Name>,
    t: &Scalar,
    sigma: &CommState,
    body: &Term,
    cfg: &SpeedConfig,
) -> Result<Option<Term>> {
    use Term::*;
    let wrap = |t2: Scalar, s2: CommState, x: Term| state_like(p, t2, s2, x);
    let sent = |a: &Action, at: &Scalar| {
        sigma.with(SendRecord {
            channel: a.channel.clone(),
            datum: a.datum.clone(),
            time: at.clone(),
            point: a.point.clone(),
        })
    };
    let r = match (ax, body) {
        (Ax::S1 | Ax::S2, ADead(t2)) => {
            let late = t2.lt(&ExtScalar::Finite(t.clone()));
            match (ax, late) {
                (Ax::S1, true) => Some(Delta),
                (Ax::S2, false) => Some(body.clone()),
                _ => None,
            }
        }
        (Ax::S3, RDead(t2)) => Some(ADead(t2.shift(t))),
        (Ax::S30, Alt(x, y)) => {
            Some(alt(wrap(t.clone(), sigma.clone(), (**x).clone()), wrap(t.clone(), sigma.clone(), (**y).clone())))
        }
        (Ax::S31, Timeout(x, y)) => {
            Some(tout(wrap(t.clone(), sigma.clone(), (**x).clone()), wrap(t.clone(), sigma.clone(), (**y).clone())))
        }
        (_, Act(a)) => {
            let covered = channels.contains(&a.channel);
            match (ax, a.kind) {
                (Ax::S4, _) if !covered => Some(body.clone()),
                _ if !covered => None,
                (Ax::S5, ActionKind::APSend) | (Ax::S13, ActionKind::AESend) | (Ax::S15, ActionKind::AERecv) => {
                    (a.time() < t).then_some(Delta)
                }
                (Ax::S6, ActionKind::APSend) | (Ax::S14, ActionKind::AESend) | (Ax::S16, ActionKind::AERecv) => {
                    (t <= a.time()).then(|| Act(a.actualize(a.time().clone())))
                }
                (Ax::S7, ActionKind::RPSend) => Some(Act(a.actualize(t + a.time()))),
                (Ax::S8 | Ax::S9 | Ax::S10, ActionKind::APRecv) => {
                    let (_, hi) = window(a);
                    if hi.le(&ExtScalar::Finite(t.clone())) {
                        (ax == Ax::S8).then_some(Delta)
                    } else {
                        match (ax, reception(a, t, sigma, cfg)?) {
                            (Ax::S9, None) => Some(ADead(hi)),
                            (Ax::S10, Some(m)) => Some(Act(a.actualize(m))),
                            _ => None,
                        }
                    }
                }
                (Ax::S11 | Ax::S12, ActionKind::RPRecv) => {
                    let (_, hi) = window(a);
                    match (ax, reception(a, t, sigma, cfg)?) {
                        (Ax::S11, None) => Some(ADead(hi.shift(t))),
                        (Ax::S12, Some(m)) => Some(Act(a.actualize(m))),
                        _ => None,
                    }
                }
                _ => None,
            }
        }
        (_, Seq(h, x)) => {
            let Act(a) = &**h else { return Ok(None) };
            let x = (**x).clone();
            let covered = channels.contains(&a.channel);
            match (ax, a.kind) {
                (Ax::S17, _) if !covered => Some(seq((**h).clone(), wrap(t.clone(), sigma.clone(), x))),
                _ if !covered => None,
                (Ax::S18, ActionKind::APSend) | (Ax::S26, ActionKind::AESend) | (Ax::S28, ActionKind::AERecv) => {
                    (a.time() < t).then_some(Delta)
                }
                (Ax::S19, ActionKind::APSend) | (Ax::S27, ActionKind::AESend) => (t <= a.time()).then(|| {
                    let at = a.time().clone();
                    seq(Act(a.actualize(at.clone())), wrap(at.clone(), sent(a, &at), x))
                }),
                (Ax::S29, ActionKind::AERecv) => (t <= a.time()).then(|| {
                    let at = a.time().clone();
                    seq(Act(a.clone()), wrap(at, sigma.clone(), x))
                }),
                (Ax::S20, ActionKind::RPSend) => {
                    let at = t + a.time();
                    Some(seq(Act(a.actualize(at.clone())), wrap(at.clone(), sent(a, &at), x)))
                }
                (Ax::S21 | Ax::S22 | Ax::S23, ActionKind::APRecv) => {
                    let (_, hi) = window(a);
                    if hi.le(&ExtScalar::Finite(t.clone())) {
                        (ax == Ax::S21).then_some(Delta)
                    } else {
                        match (ax, reception(a, t, sigma, cfg)?) {
                            (Ax::S22, None) => Some(ADead(hi)),
                            (Ax::S23, Some(m)) => Some(seq(Act(a.actualize(m.clone())), wrap(m, sigma.clone(), x))),
                            _ => None,
                        }
                    }
                }
                (Ax::S24 | Ax::S25, ActionKind::RPRecv) => {
                    let (_, hi) = window(a);
                    match (ax, reception(a, t, sigma, cfg)?) {
                        (Ax::S24, None) => Some(ADead(hi.shift(t))),
                        (Ax::S25, Some(m)) => Some(seq(Act(a.actualize(m.clone())), wrap(m, sigma.clone(), x))),
                        _ => None,
                    }
                }
                _ => None,
            }
        }
        _ => None,
    };
    Ok(r)
}

/// Idle horizon of a summand that makes `dd(abs r)` beside it redundant:
/// inactions idle till their own time, absolutely timed actions that are
/// not potential receives (possibly followed by more) idle till theirs.
fn abs_horizon(s: &Term) -> Option<ExtScalar> {
    match s {
        Term::ADead(t) => Some(t.clone()),
        Term::Act(a) if non_pr_abs(a) => Some(ExtScalar::Finite(a.time().clone())),
        Term::Seq(h, _) => match &**h {
            Term::Act(a) if non_pr_abs(a) => Some(ExtScalar::Finite(a.time().clone())),
            _ => None,
        },
        _ => None,
    }
}

fn rel_horizon(s: &Term) -> Option<ExtScalar> {
    match s {
        Term::RDead(t) => Some(t.clone()),
        Term::Act(a) if non_pr_rel(a) => Some(ExtScalar::Finite(a.time().clone())),
        Term::Seq(h, _) => match &**h {
            Term::Act(a) if non_pr_rel(a) => Some(ExtScalar::Finite(a.time().clone())),
            _ => None,
        },
        _ => None,
    }
}

/// Drop inaction summands dominated by another summand's idle horizon.
fn absorb_dead(p: &Term) -> Option<Term> {
    let items: Vec<Term> = p.summands().into_iter().cloned().collect();
    let mut keep = vec![true; items.len()];
    // x + dd = x
    for (i, s) in items.iter().enumerate() {
        if *s == Term::Delta && items.iter().enumerate().any(|(j, _)| j != i && keep[j]) {
            keep[i] = false;
        }
    }
    for (i, s) in items.iter().enumerate() {
        if !keep[i] {
            continue;
        }
        let (r, horizon): (&ExtScalar, fn(&Term) -> Option<ExtScalar>) = match s {
            Term::ADead(r) => (r, abs_horizon),
            Term::RDead(r) => (r, rel_horizon),
            _ => continue,
        };
        let dominated = items.iter().enumerate().any(|(j, o)| {
            j != i
                && keep[j]
                && horizon(o).is_some_and(|h| {
                    // Equal inactions: keep the first copy.
                    r.lt(&h) || (r == &h && (o != s || j < i))
                })
        });
        if dominated {
            keep[i] = false;
        }
    }
    if keep.iter().all(|k| *k) {
        return None;
    }
    Some(Term::sum(items.into_iter().zip(keep).filter(|(_, k)| *k).map(|(t, _)| t)))
}

/// Position of a subterm: child indices from the root.
pub type Path = Vec<u8>;

pub fn subterm<'a>(p: &'a Term, path: &[u8]) -> Option<&'a Term> {
    let Some((&i, rest)) = path.split_first() else { return Some(p) };
    let child: &Term = match (p, i) {
        (Term::Alt(a, _) | Term::Seq(a, _) | Term::Par(a, _) | Term::LeftMerge(a, _) | Term::Timeout(a, _), 0) => a,
        (Term::Alt(_, b) | Term::Seq(_, b) | Term::Par(_, b) | Term::LeftMerge(_, b) | Term::Timeout(_, b), 1) => b,
        (Term::AuxMaxProg(_, a, _), 0) => a,
        (Term::AuxMaxProg(_, _, b), 1) => b,
        (Term::State { body, .. } | Term::MaxProg(_, body), 0) => body,
        _ => return None,
    };
    subterm(child, rest)
}

/// Replace the subterm at `path`.
pub fn replace_at(p: &Term, path: &[u8], new: Term) -> Option<Term> {
    let Some((&i, rest)) = path.split_first() else { return Some(new) };
    let sub = |c: &Arc<Term>| replace_at(c, rest, new.clone()).map(Arc::new);
    Some(match (p, i) {
        (Term::Alt(a, b), 0) => Term::Alt(sub(a)?, b.clone()),
        (Term::Alt(a, b), 1) => Term::Alt(a.clone(), sub(b)?),
        (Term::Seq(a, b), 0) => Term::Seq(sub(a)?, b.clone()),
        (Term::Seq(a, b), 1) => Term::Seq(a.clone(), sub(b)?),
        (Term::Par(a, b), 0) => Term::Par(sub(a)?, b.clone()),
        (Term::Par(a, b), 1) => Term::Par(a.clone(), sub(b)?),
        (Term::LeftMerge(a, b), 0) => Term::LeftMerge(sub(a)?, b.clone()),
        (Term::LeftMerge(a, b), 1) => Term::LeftMerge(a.clone(), sub(b)?),
        (Term::Timeout(a, b), 0) => Term::Timeout(sub(a)?, b.clone()),
        (Term::Timeout(a, b), 1) => Term::Timeout(a.clone(), sub(b)?),
        (Term::AuxMaxProg(h, a, b), 0) => Term::AuxMaxProg(h.clone(), sub(a)?, b.clone()),
        (Term::AuxMaxProg(h, a, b), 1) => Term::AuxMaxProg(h.clone(), a.clone(), sub(b)?),
        (Term::State { channels, time, sigma, body }, 0) => {
            Term::State { channels: channels.clone(), time: time.clone(), sigma: sigma.clone(), body: sub(body)? }
        }
        (Term::MaxProg(h, b), 0) => Term::MaxProg(h.clone(), sub(b)?),
        _ => return None,
    })
}

fn children(p: &Term) -> Vec<&Term> {
    match p {
        Term::Alt(a, b) | Term::Seq(a, b) | Term::Par(a, b) | Term::LeftMerge(a, b) | Term::Timeout(a, b) => vec![a, b],
        Term::AuxMaxProg(_, a, b) => vec![a, b],
        Term::State { body, .. } | Term::MaxProg(_, body) => vec![body],
        _ => vec![],
    }
}

/// Apply a schema at the outermost, leftmost position where it matches.
pub fn apply_axiom(ax: Ax, p: &Term, cfg: &SpeedConfig) -> Result<Option<(Path, Term)>> {
    let mut queue: std::collections::VecDeque<Path> = std::collections::VecDeque::from([Vec::new()]);
    while let Some(path) = queue.pop_front() {
        let sub = subterm(p, &path).expect("valid path");
        if let Some(r) = apply_root(ax, sub, cfg)? {
            let whole = replace_at(p, &path, r).expect("valid path");
            return Ok(Some((path, whole)));
        }
        for (i, _) in children(sub).iter().enumerate() {
            let mut next = path.clone();
            next.push(i as u8);
            queue.push_back(next);
        }
    }
    Ok(None)
}

/// One recorded rewrite: schema, position, redex and contractum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub axiom: Ax,
    pub path: Path,
    pub redex: Term,
    pub result: Term,
}

/// The derivation of a normal form, replayable from the source term.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewriteTrace {
    pub steps: Vec<RewriteStep>,
}

impl RewriteTrace {
    /// Re-run the derivation from `source`, checking every step.
    pub fn replay(&self, source: &Term, cfg: &SpeedConfig) -> Result<Term> {
        let mut cur = source.clone();
        for (n, st) in self.steps.iter().enumerate() {
            let bad = |why: &str| Error::Misuse(format!("trace step {n} ({}) at {:?}: {why}", st.axiom, st.path));
            let sub = subterm(&cur, &st.path).ok_or_else(|| bad("no such position"))?;
            if sub != &st.redex {
                return Err(bad("redex differs"));
            }
            let ok = match st.axiom {
                Ax::Aci if canon::alt_canonical(sub) == canon::alt_canonical(&st.result) => true,
                ax => apply_root(ax, sub, cfg)?.as_ref() == Some(&st.result),
            };
            if !ok {
                return Err(bad("schema does not yield the recorded result"));
            }
            cur = replace_at(&cur, &st.path, st.result.clone()).ok_or_else(|| bad("no such position"))?;
        }
        Ok(cur)
    }
}

/// True iff `p` is unchanged by every schema at the root (used by tests).
pub fn is_root_normal(p: &Term, cfg: &SpeedConfig) -> Result<bool> {
    for ax in Ax::ALL {
        if *ax != Ax::D9 && *ax != Ax::Aci && apply_root(*ax, p, cfg)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn root(ax: Ax, s: &str) -> Option<Term> {
        apply_root(ax, &t(s), &SpeedConfig::default()).unwrap()
    }

    #[test]
    fn dead_merge() {
        assert_eq!(root(Ax::D2, "dd(abs 3) + dd(abs 5)"), Some(t("dd(abs 5)")));
        assert_eq!(root(Ax::D1, "dd(abs 3) + dd(abs 5)"), None);
        assert_eq!(root(Ax::D1, "dd(abs 5) + dd(abs 3)"), Some(t("dd(abs 5)")));
    }

    #[test]
    fn state_relative_send() {
        assert_eq!(root(Ax::S7, "L{c}@0:{}(ps(c,d; rel 2; (0,0,0)))"), Some(t("es(c,d; 2; (0,0,0))")));
        assert_eq!(root(Ax::S4, "L{k}@0:{}(ps(c,d; rel 2; (0,0,0)))"), Some(t("ps(c,d; rel 2; (0,0,0))")));
    }

    #[test]
    fn merge_expansion() {
        assert_eq!(
            root(Ax::M1, "es(c,d; 1; (0,0,0)) || es(c,d; 2; (0,0,0))"),
            Some(t("es(c,d; 1; (0,0,0)) |_ es(c,d; 2; (0,0,0)) + es(c,d; 2; (0,0,0)) |_ es(c,d; 1; (0,0,0))"))
        );
    }

    #[test]
    fn empty_reception_gives_window_end() {
        assert_eq!(root(Ax::S9, "L{c}@0:{}(pr(c,d; abs 0..5; (0,0,0)))"), Some(t("dd(abs 5)")));
        assert_eq!(root(Ax::S10, "L{c}@0:{}(pr(c,d; abs 0..5; (0,0,0)))"), None);
        assert_eq!(
            root(Ax::S10, "L{c}@0:{(c,d,1,(0,0,0))}(pr(c,d; abs 0..5; (2,0,0)))"),
            Some(t("er(c,d; 3; (2,0,0))"))
        );
    }

    #[test]
    fn priority_atoms() {
        assert_eq!(root(Ax::P3, "amp[recv(c)](es(c,d; 1; (0,0,0)), er(c,d; 1; (0,0,0)))"), Some(t("dd(abs 1)")));
        assert_eq!(
            root(Ax::P2, "amp[recv(c)](er(c,d; 1; (0,0,0)), er(c,d; 2; (0,0,0)))"),
            Some(t("er(c,d; 1; (0,0,0))"))
        );
    }

    #[test]
    fn dead_absorption() {
        assert_eq!(root(Ax::Dx, "es(c,d; 2; (0,0,0)) . X + dd(abs 1)"), Some(t("es(c,d; 2; (0,0,0)) . X")));
        assert_eq!(root(Ax::Dx, "er(c,d; 1; (0,0,0)) + dd(abs 3)"), None);
        assert_eq!(root(Ax::Dx, "dd(abs 3) + dd(abs inf)"), Some(t("dd(abs inf)")));
        assert_eq!(root(Ax::Dx, "dd(abs 3) + dd(abs 3)"), Some(t("dd(abs 3)")));
    }

    #[test]
    fn outermost_position() {
        let p = t("(es(c,d; 1; (0,0,0)) + dd) . (dd(abs 3) + dd(abs 5))");
        let (path, r) = apply_axiom(Ax::D2, &p, &SpeedConfig::default()).unwrap().unwrap();
        assert_eq!(path, vec![1]);
        assert_eq!(r, t("(es(c,d; 1; (0,0,0)) + dd) . dd(abs 5)"));
    }

    #[test]
    fn ids_round_trip() {
        for ax in Ax::ALL {
            assert_eq!(Ax::from_id(ax.id()), Some(*ax));
        }
    }
}
