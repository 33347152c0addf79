//! Linearization of state-operator terms into linear recursive specifications.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::axioms::{alt_canonical, apply_root, Ax, Normalizer};
use crate::comm::{CommState, SpeedConfig};
use crate::error::{Error, Result};
use crate::meadow::{ExtScalar, Scalar};
use crate::semantics::anchor;
use crate::terms::{name, Name, RecSpec, Term};

/// Equations `X_i = body` with linear bodies, in creation order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearSpec {
    pub equations: Vec<(Name, Term)>,
    pub root: Name,
    /// Variables whose body was cut off at the depth bound.
    pub truncated: BTreeSet<Name>,
}

impl LinearSpec {
    pub fn body(&self, v: &str) -> Option<&Term> {
        self.equations.iter().find(|(x, _)| &**x == v).map(|(_, b)| b)
    }

    pub fn is_truncated(&self) -> bool {
        !self.truncated.is_empty()
    }

    pub fn to_rec_spec(&self) -> Result<Arc<RecSpec>> {
        RecSpec::new(self.equations.iter().cloned().collect())
    }

    /// `rec X0 { ... }` as a term.
    pub fn to_term(&self) -> Result<Term> {
        Ok(Term::Rec(self.root.clone(), self.to_rec_spec()?))
    }
}

impl fmt::Display for LinearSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rec {} {{", self.root)?;
        for (x, b) in &self.equations {
            write!(f, " {x} = {b};")?;
        }
        write!(f, " }}")
    }
}

fn var(i: usize) -> Name {
    name(&format!("X{i}"))
}

/// Linearize `Λ^t_{C,σ}(p)`.
pub fn linearize(
    channels: &BTreeSet<Name>,
    t: &Scalar,
    sigma: &CommState,
    p: &Term,
    depth: usize,
    cfg: &SpeedConfig,
) -> Result<LinearSpec> {
    if let Some(c) = p.channels().into_iter().find(|c| !channels.contains(c)) {
        return Err(Error::ChannelCoverage(c.to_string()));
    }
    let s = Term::state_with(Arc::new(channels.clone()), t.clone(), sigma.clone(), p.clone());
    linearize_term(&s, depth, cfg)
}

/// Linearize a term whose head normal form can be computed: a state
/// operator term, possibly under maximal progress operators. Each tail is
/// brought into head normal form in turn; tails equal modulo ACI share a
/// variable.
pub fn linearize_term(p: &Term, depth: usize, cfg: &SpeedConfig) -> Result<LinearSpec> {
    let mut norm = Normalizer::new(cfg.clone());
    let mut names: HashMap<Term, Name> = HashMap::new();
    let mut queue: VecDeque<(Name, Term, usize)> = VecDeque::new();
    let mut bodies: Vec<(Name, Term)> = Vec::new();
    let mut truncated = BTreeSet::new();
    let root = var(0);
    names.insert(alt_canonical(p), root.clone());
    queue.push_back((root.clone(), p.clone(), 0));
    while let Some((x, tail, d)) = queue.pop_front() {
        if d >= depth {
            let at = anchor(&tail).map(|a| a.time).unwrap_or_else(Scalar::zero);
            truncated.insert(x.clone());
            bodies.push((x, Term::ADead(ExtScalar::Finite(at))));
            continue;
        }
        let h = norm.hnf(&tail)?;
        let mut summands = Vec::new();
        for s in h.summands() {
            match s {
                Term::Seq(a, rest) => {
                    let key = alt_canonical(rest);
                    let y = match names.get(&key) {
                        Some(y) => y.clone(),
                        None => {
                            let y = var(names.len());
                            names.insert(key, y.clone());
                            queue.push_back((y.clone(), (**rest).clone(), d + 1));
                            y
                        }
                    };
                    summands.push(Term::Seq(a.clone(), Arc::new(Term::Var(y))));
                }
                other => summands.push(other.clone()),
            }
        }
        let mut body = alt_canonical(&Term::sum(summands));
        if let Some(b) = apply_root(Ax::Dx, &body, cfg)? {
            body = alt_canonical(&b);
        }
        bodies.push((x, body));
    }
    let order = |v: &Name| v[1..].parse::<usize>().unwrap_or(usize::MAX);
    bodies.sort_by_key(|(x, _)| order(x));
    Ok(LinearSpec { equations: bodies, root, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use crate::terms::is_linear_ext;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn lin(p: &str) -> LinearSpec {
        let c: BTreeSet<Name> = [name("c")].into();
        linearize(&c, &Scalar::zero(), &CommState::empty(), &t(p), 10, &SpeedConfig::default()).unwrap()
    }

    #[test]
    fn send_receive_pair() {
        let e = lin("ps(c,d; abs 1; (0,0,0)) || pr(c,d; abs 0..3; (0,0,0))");
        assert_eq!(e.equations.len(), 2);
        assert_eq!(e.body("X0"), Some(&t("es(c,d; 1; (0,0,0)) . X1")));
        assert_eq!(e.body("X1"), Some(&t("er(c,d; 1; (0,0,0))")));
        assert!(e.equations.iter().all(|(_, b)| is_linear_ext(b)));
        assert!(!e.is_truncated());
    }

    #[test]
    fn trivial_specs() {
        assert_eq!(lin("dd(abs 2)").equations, vec![(name("X0"), t("dd(abs 2)"))]);
        assert_eq!(lin("pr(c,d; abs 0..5; (0,0,0))").equations, vec![(name("X0"), t("dd(abs 5)"))]);
    }

    #[test]
    fn depth_bound_truncates() {
        let c: BTreeSet<Name> = [name("c")].into();
        let p = t("rec X { X = ps(c,d; rel 1; (0,0,0)) . X; }");
        let e = linearize(&c, &Scalar::zero(), &CommState::empty(), &p, 3, &SpeedConfig::default()).unwrap();
        assert!(e.is_truncated());
        assert_eq!(e.equations.len(), 4);
        assert_eq!(e.body("X3"), Some(&t("dd(abs 3)")));
    }
}
