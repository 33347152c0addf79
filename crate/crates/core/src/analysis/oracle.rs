//! Bounded bisimulation game played directly on the operational semantics.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::comm::CommState;
use crate::error::Result;
use crate::meadow::Scalar;
use crate::semantics::{anchor, Ambient, Behaviour, Sos, Successor};
use crate::terms::{Action, Term};

/// Why two processes were told apart, and where.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Witness {
    /// Actions leading to the distinguishing configuration.
    pub path: Vec<Action>,
    pub ambient: Ambient,
    pub reason: String,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.path {
            write!(f, "{a} ; ")?;
        }
        write!(f, "at ({}, {}): {}", self.ambient.time, self.ambient.sigma, self.reason)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum OracleVerdict {
    BisimilarUpToDepth(usize),
    Distinguished(Witness),
    /// Evaluation failed (for instance an exhausted unfold budget).
    Inconclusive(String),
}

impl OracleVerdict {
    pub fn is_bisimilar(&self) -> bool {
        matches!(self, OracleVerdict::BisimilarUpToDepth(_))
    }
}

fn collect_states(p: &Term, out: &mut BTreeSet<(Scalar, CommState)>) {
    match p {
        Term::State { time, sigma, body, .. } => {
            out.insert((time.clone(), sigma.clone()));
            collect_states(body, out);
        }
        Term::Alt(a, b) | Term::Seq(a, b) | Term::Par(a, b) | Term::LeftMerge(a, b) | Term::Timeout(a, b) => {
            collect_states(a, out);
            collect_states(b, out);
        }
        Term::AuxMaxProg(_, a, b) => {
            collect_states(a, out);
            collect_states(b, out);
        }
        Term::MaxProg(_, b) => collect_states(b, out),
        _ => {}
    }
}

/// Sample ambients for comparing `p` and `q`: every time literal of either
/// term, midpoints between consecutive literals, one point past the largest,
/// and `0`, crossed with the empty state and every state-operator state;
/// plus the state operators' own `(t, σ)` pairs.
pub fn relevant_instants(p: &Term, q: &Term) -> Vec<Ambient> {
    let mut lits: BTreeSet<Scalar> = p.time_literals();
    lits.extend(q.time_literals());
    let sorted: Vec<Scalar> = lits.iter().cloned().collect();
    let mut times: BTreeSet<Scalar> = lits;
    for w in sorted.windows(2) {
        times.insert((&w[0] + &w[1]).div(&Scalar::int(2)));
    }
    if let Some(m) = sorted.last() {
        times.insert(m + &Scalar::one());
    }
    times.insert(Scalar::zero());
    let mut states = BTreeSet::new();
    collect_states(p, &mut states);
    collect_states(q, &mut states);
    let mut sigmas: BTreeSet<CommState> = states.iter().map(|(_, s)| s.clone()).collect();
    sigmas.insert(CommState::empty());
    let mut out: BTreeSet<Ambient> = BTreeSet::new();
    for t in &times {
        for s in &sigmas {
            out.insert(Ambient::new(t.clone(), s.clone()));
        }
    }
    for (t, s) in states {
        out.insert(Ambient::new(t, s));
    }
    out.into_iter().collect()
}

type Key = (Successor, Successor, Ambient, usize);

struct Game<'a> {
    sos: &'a Sos,
    memo: HashMap<Key, Option<Witness>>,
}

impl Game<'_> {
    fn ambients(&self, p: &Term, q: &Term, fallback: &[Ambient]) -> Vec<Ambient> {
        let mut anchors: Vec<Ambient> = anchor(p).into_iter().chain(anchor(q)).collect();
        anchors.dedup();
        if anchors.is_empty() {
            fallback.to_vec()
        } else {
            anchors
        }
    }

    fn pair(&mut self, p: &Successor, q: &Successor, ambs: &[Ambient], depth: usize) -> Result<Option<Witness>> {
        let (p, q) = match (p, q) {
            (Successor::Done, Successor::Done) => return Ok(None),
            (Successor::Term(p), Successor::Term(q)) => (p, q),
            _ => {
                return Ok(Some(Witness {
                    path: vec![],
                    ambient: ambs.first().cloned().unwrap_or_else(|| Ambient::at(Scalar::zero())),
                    reason: "one side terminated".into(),
                }))
            }
        };
        for amb in self.ambients(p, q, ambs) {
            if let Some(w) = self.at(p, q, &amb, depth)? {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }

    fn at(&mut self, p: &Term, q: &Term, amb: &Ambient, depth: usize) -> Result<Option<Witness>> {
        let key = (Successor::Term(p.clone()), Successor::Term(q.clone()), amb.clone(), depth);
        if let Some(r) = self.memo.get(&key) {
            return Ok(r.clone());
        }
        let bp = self.sos.eval(p, amb)?;
        let bq = self.sos.eval(q, amb)?;
        let r = self.compare(&bp, &bq, amb, depth)?;
        self.memo.insert(key, r.clone());
        Ok(r)
    }

    fn compare(&mut self, bp: &Behaviour, bq: &Behaviour, amb: &Ambient, depth: usize) -> Result<Option<Witness>> {
        for (x, y) in [(bp, bq), (bq, bp)] {
            for s in &x.steps {
                let mut sub: Option<Witness> = None;
                let mut matched = false;
                for s2 in y.steps.iter().filter(|s2| s2.action == s.action) {
                    let w = if depth == 0 {
                        match (&s.succ, &s2.succ) {
                            (Successor::Done, Successor::Done) | (Successor::Term(_), Successor::Term(_)) => None,
                            _ => Some(Witness {
                                path: vec![],
                                ambient: amb.clone(),
                                reason: "one side terminated".into(),
                            }),
                        }
                    } else {
                        let next = next_pair_ambient(&s.succ, &s2.succ, &s.action, amb);
                        self.pair(&s.succ, &s2.succ, &[next], depth - 1)?
                    };
                    match w {
                        None => {
                            matched = true;
                            break;
                        }
                        Some(w) => {
                            sub.get_or_insert(w);
                        }
                    }
                }
                if !matched {
                    let w = match sub {
                        Some(mut w) => {
                            w.path.insert(0, s.action.clone());
                            w
                        }
                        None => Witness {
                            path: vec![s.action.clone()],
                            ambient: amb.clone(),
                            reason: "step has no counterpart".into(),
                        },
                    };
                    return Ok(Some(w));
                }
            }
        }
        let (ip, iq) = (bp.idle.future(&amb.time), bq.idle.future(&amb.time));
        if ip != iq {
            return Ok(Some(Witness { path: vec![], ambient: amb.clone(), reason: format!("idle {ip} vs {iq}") }));
        }
        Ok(None)
    }
}

fn next_pair_ambient(p: &Successor, q: &Successor, a: &Action, amb: &Ambient) -> Ambient {
    for s in [p, q] {
        if let Successor::Term(t) = s {
            if let Some(x) = anchor(t) {
                return x;
            }
        }
    }
    Ambient::new(a.time().clone(), amb.sigma.clone())
}

/// Play the bisimulation game on `p` and `q` for `depth` rounds, starting at
/// each of `instants` (or only at the anchor of a state-operator term).
pub fn bisim_definitional(p: &Term, q: &Term, instants: &[Ambient], depth: usize, sos: &Sos) -> OracleVerdict {
    let mut g = Game { sos, memo: HashMap::new() };
    match g.pair(&Successor::Term(p.clone()), &Successor::Term(q.clone()), instants, depth) {
        Ok(None) => OracleVerdict::BisimilarUpToDepth(depth),
        Ok(Some(w)) => OracleVerdict::Distinguished(w),
        Err(e) => OracleVerdict::Inconclusive(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn instants_example() {
        let p = t("es(c,d; 1; (0,0,0))");
        let q = t("es(c,d; 2; (0,0,0))");
        let times: Vec<Scalar> = relevant_instants(&p, &q).into_iter().map(|a| a.time).collect();
        let want: Vec<Scalar> = ["0", "1", "3/2", "2", "3"].iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(times, want);
        let none = relevant_instants(&t("dd"), &t("dd"));
        assert_eq!(none, vec![Ambient::at(Scalar::zero())]);
    }

    #[test]
    fn oracle_examples() {
        let sos = Sos::default();
        let e1 = t("es(c,d; 1; (0,0,0))");
        let amb = [Ambient::at(Scalar::zero())];
        assert!(bisim_definitional(&e1, &e1, &amb, 3, &sos).is_bisimilar());
        let sum = t("es(c,d; 1; (0,0,0)) + es(c,d; 2; (0,0,0))");
        match bisim_definitional(&sum, &e1, &amb, 3, &sos) {
            OracleVerdict::Distinguished(w) => {
                assert_eq!(w.path, vec![t("es(c,d; 2; (0,0,0))").as_action().unwrap().clone()])
            }
            v => panic!("{v:?}"),
        }
        let r = t("rec X { X = es(c,d; 1; (0,0,0)) . X; }");
        let Term::Rec(v, spec) = &r else { unreachable!() };
        let unfolded = Term::unfold_rec(v, spec).unwrap();
        assert!(bisim_definitional(&r, &unfolded, &amb, 5, &sos).is_bisimilar());
    }
}
