//! Communication states, reception times and the priority ordering.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::meadow::{ExtScalar, Point, Scalar};
use crate::terms::{name, Action, ActionPattern, Name, Term};

/// One performed send: channel, datum, send time and point of origin.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SendRecord {
    pub channel: Name,
    pub datum: Name,
    pub time: Scalar,
    pub point: Point,
}

/// A finite set of send records.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CommState(BTreeSet<SendRecord>);

impl CommState {
    pub fn empty() -> Self {
        CommState::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = SendRecord>) -> Self {
        CommState(records.into_iter().collect())
    }

    pub fn records(&self) -> impl Iterator<Item = &SendRecord> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, r: &SendRecord) -> bool {
        self.0.contains(r)
    }

    pub fn with(&self, r: SendRecord) -> CommState {
        let mut next = self.0.clone();
        next.insert(r);
        CommState(next)
    }

    pub fn union(&self, other: &CommState) -> CommState {
        CommState(self.0.union(&other.0).cloned().collect())
    }
}

impl fmt::Debug for CommState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for CommState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({},{},{},{})", r.channel, r.datum, r.time, r.point)?;
        }
        write!(f, "}}")
    }
}

/// Transmission speed of data.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpeedConfig {
    pub v: Scalar,
}

impl SpeedConfig {
    pub fn new(v: Scalar) -> Result<Self> {
        if !Scalar::zero().lt(&v) {
            return Err(Error::InvalidParams(format!("speed must be positive, got {v}")));
        }
        Ok(SpeedConfig { v })
    }
}

impl Default for SpeedConfig {
    fn default() -> Self {
        SpeedConfig { v: Scalar::one() }
    }
}

/// `σ ∪ {(c, d, t, ξ)}`.
pub fn record_send(sigma: &CommState, c: &str, d: &str, t: Scalar, xi: Point) -> CommState {
    sigma.with(SendRecord { channel: name(c), datum: name(d), time: t, point: xi })
}

/// The instants `s` in `[t, t']` at which datum `d` sent on `c` can arrive at `ξ`.
pub fn rcpt(
    sigma: &CommState,
    c: &str,
    d: &str,
    t: &Scalar,
    t_end: &ExtScalar,
    xi: &Point,
    cfg: &SpeedConfig,
) -> Result<BTreeSet<Scalar>> {
    let mut out = BTreeSet::new();
    for r in sigma.records() {
        if &*r.channel != c || &*r.datum != d {
            continue;
        }
        let sent = ExtScalar::Finite(r.time.clone());
        if !sent.le(t_end) {
            continue;
        }
        let travel = xi.dist(&r.point)?.div(&cfg.v);
        let s = &r.time + &travel;
        if t.le(&s) && ExtScalar::Finite(s.clone()).le(t_end) {
            out.insert(s);
        }
    }
    Ok(out)
}

/// Least element of a reception-time set, folded with the meadow `min`.
pub fn min_time(v: &BTreeSet<Scalar>) -> Option<Scalar> {
    let mut iter = v.iter();
    let first = iter.next()?.clone();
    Some(iter.fold(first, |acc, s| acc.min2(s)))
}

/// `a ∈ AAct(t)`.
pub fn in_aact_at(a: &Action, t: &Scalar) -> bool {
    a.kind.is_actual() && a.time() == t
}

/// `a ≺_H b` restricted to actual actions: `b ∈ H`, and either `b` is
/// earlier, or both are simultaneous and `a ∉ H`.
pub fn action_prio_lt(h: &ActionPattern, a: &Action, b: &Action) -> bool {
    if !a.kind.is_actual() || !b.kind.is_actual() || !h.contains(b) {
        return false;
    }
    let (ta, tb) = (a.time(), b.time());
    tb.lt(ta) || (ta == tb && !h.contains(a))
}

/// The priority ordering `α ≺_H α'` on atomic process terms.
pub fn priority_lt(h: &ActionPattern, alpha: &Term, alpha2: &Term) -> bool {
    let Some(b) = alpha2.as_action().filter(|b| b.kind.is_actual() && h.contains(b)) else {
        return false;
    };
    let tb = b.time();
    match alpha {
        Term::Act(a) if a.kind.is_actual() => action_prio_lt(h, a, b),
        Term::ADead(t) => ExtScalar::Finite(tb.clone()).lt(t),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(u: i64) -> Point {
        Point::ints(u, 0, 0)
    }

    #[test]
    fn rcpt_examples() {
        let cfg = SpeedConfig::new(Scalar::int(2)).unwrap();
        let empty = CommState::empty();
        let ten = ExtScalar::Finite(Scalar::int(10));
        assert!(rcpt(&empty, "c", "d", &Scalar::zero(), &ten, &p(6), &cfg).unwrap().is_empty());
        let s = record_send(&empty, "c", "d", Scalar::one(), Point::origin());
        let v = rcpt(&s, "c", "d", &Scalar::zero(), &ten, &p(6), &cfg).unwrap();
        assert_eq!(v.into_iter().collect::<Vec<_>>(), vec![Scalar::int(4)]);
        assert!(rcpt(&s, "c", "d", &Scalar::int(5), &ten, &p(6), &cfg).unwrap().is_empty());
    }

    #[test]
    fn rcpt_same_point_is_immediate() {
        let s = record_send(&CommState::empty(), "c", "d", Scalar::int(3), Point::origin());
        let v = rcpt(&s, "c", "d", &Scalar::int(3), &ExtScalar::Infinity, &Point::origin(), &SpeedConfig::default())
            .unwrap();
        assert_eq!(v.into_iter().collect::<Vec<_>>(), vec![Scalar::int(3)]);
    }

    #[test]
    fn rcpt_unrepresentable_distance() {
        let s = record_send(&CommState::empty(), "c", "d", Scalar::zero(), Point::origin());
        let r =
            rcpt(&s, "c", "d", &Scalar::zero(), &ExtScalar::Infinity, &Point::ints(1, 1, 0), &SpeedConfig::default());
        assert!(matches!(r, Err(Error::NotRepresentable(_))));
    }

    #[test]
    fn record_send_is_a_set_insert() {
        let e = CommState::empty();
        let a = record_send(&e, "c", "d", Scalar::one(), Point::origin());
        assert_eq!(a.len(), 1);
        assert_eq!(record_send(&a, "c", "d", Scalar::one(), Point::origin()), a);
        let b = record_send(&a, "c", "e", Scalar::one(), Point::origin());
        assert_eq!(b.len(), 2);
        let b2 = record_send(
            &record_send(&e, "c", "e", Scalar::one(), Point::origin()),
            "c",
            "d",
            Scalar::one(),
            Point::origin(),
        );
        assert_eq!(b, b2);
    }

    #[test]
    fn speed_must_be_positive() {
        assert!(SpeedConfig::new(Scalar::zero()).is_err());
        assert!(SpeedConfig::new(Scalar::int(-1)).is_err());
    }

    #[test]
    fn aact_at() {
        let es = Action::es("c", "d", Scalar::int(3), Point::origin());
        assert!(in_aact_at(&es, &Scalar::int(3)));
        assert!(!in_aact_at(&es, &Scalar::int(2)));
        let ps = Action::ps_abs("c", "d", Scalar::int(3), Point::origin());
        assert!(!in_aact_at(&ps, &Scalar::int(3)));
    }

    #[test]
    fn priority_examples() {
        let h = ActionPattern::receives_on(["c"]);
        let er = |t| Term::Act(Action::er("c", "d", Scalar::int(t), Point::origin()));
        let es = |t| Term::Act(Action::es("c", "d", Scalar::int(t), Point::origin()));
        assert!(priority_lt(&h, &es(1), &er(1)));
        assert!(priority_lt(&h, &er(2), &er(1)));
        assert!(!priority_lt(&h, &er(1), &er(1)));
        assert!(priority_lt(&h, &Term::adead(Scalar::int(2)), &er(1)));
        assert!(!priority_lt(&h, &Term::adead(Scalar::int(1)), &er(1)));
        assert!(!priority_lt(&h, &er(1), &es(0)));
        assert!(priority_lt(&h, &Term::adead(ExtScalar::Infinity), &er(1)));
    }
}
