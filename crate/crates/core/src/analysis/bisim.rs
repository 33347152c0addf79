//! Partition refinement on linear specifications, and transition graphs
//! read off either the semantics or a linear specification.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::analysis::LinearSpec;
use crate::error::Result;
use crate::meadow::{ExtScalar, Scalar};
use crate::semantics::{next_ambient, Ambient, Sos, Successor};
use crate::terms::{Action, Name, Term};

/// Outgoing structure of one variable of a linear specification.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct StateSignature {
    pub steps: BTreeSet<(Action, Name)>,
    pub terminating: BTreeSet<Action>,
    /// Ultimate delay: the latest instant the variable can idle till.
    pub deadline: Option<ExtScalar>,
}

fn raise(d: &mut Option<ExtScalar>, t: ExtScalar) {
    *d = Some(match d.take() {
        None => t,
        Some(x) => {
            if x.lt(&t) {
                t
            } else {
                x
            }
        }
    });
}

pub fn signature(body: &Term) -> StateSignature {
    let mut s = StateSignature::default();
    for m in body.summands() {
        match m {
            Term::Seq(a, x) => {
                if let (Term::Act(a), Term::Var(v)) = (&**a, &**x) {
                    raise(&mut s.deadline, ExtScalar::Finite(a.time().clone()));
                    s.steps.insert((a.clone(), v.clone()));
                }
            }
            Term::Act(a) => {
                raise(&mut s.deadline, ExtScalar::Finite(a.time().clone()));
                s.terminating.insert(a.clone());
            }
            Term::ADead(t) => raise(&mut s.deadline, t.clone()),
            _ => {}
        }
    }
    s
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LinearVerdict {
    /// Bisimilar; `up_to_depth` when either specification was truncated.
    Bisimilar { up_to_depth: bool },
    /// Labels leading from the roots to states that differ, with the reason.
    Distinguished { path: Vec<Action>, reason: String },
}

impl LinearVerdict {
    pub fn is_bisimilar(&self) -> bool {
        matches!(self, LinearVerdict::Bisimilar { .. })
    }
}

impl fmt::Display for LinearVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinearVerdict::Bisimilar { up_to_depth: false } => write!(f, "bisimilar"),
            LinearVerdict::Bisimilar { up_to_depth: true } => write!(f, "bisimilar up to depth"),
            LinearVerdict::Distinguished { path, reason } => {
                write!(f, "distinguished:")?;
                for a in path {
                    write!(f, " {a} ;")?;
                }
                write!(f, " {reason}")
            }
        }
    }
}

/// State index `0` is the successful-termination state.
struct Lts {
    sigs: Vec<(Option<ExtScalar>, Vec<(Action, usize)>)>,
}

fn build(e1: &LinearSpec, e2: &LinearSpec) -> (Lts, usize, usize) {
    let mut index: HashMap<(u8, Name), usize> = HashMap::new();
    for (side, e) in [(1u8, e1), (2u8, e2)] {
        for (x, _) in &e.equations {
            let n = index.len() + 1;
            index.insert((side, x.clone()), n);
        }
    }
    let mut sigs = vec![(None, Vec::new()); index.len() + 1];
    for (side, e) in [(1u8, e1), (2u8, e2)] {
        for (x, body) in &e.equations {
            let s = signature(body);
            let mut out: Vec<(Action, usize)> =
                s.steps.iter().filter_map(|(a, y)| index.get(&(side, y.clone())).map(|j| (a.clone(), *j))).collect();
            out.extend(s.terminating.iter().map(|a| (a.clone(), 0)));
            sigs[index[&(side, x.clone())]] = (s.deadline, out);
        }
    }
    let r1 = index[&(1, e1.root.clone())];
    let r2 = index[&(2, e2.root.clone())];
    (Lts { sigs }, r1, r2)
}

type Key = (bool, Option<ExtScalar>, BTreeSet<(Action, usize)>);

/// Rounds of refinement: `rounds[k][s]` is the block of `s` after round `k`.
fn refine(lts: &Lts) -> Vec<Vec<usize>> {
    let n = lts.sigs.len();
    let mut block = vec![0usize; n];
    let mut rounds = Vec::new();
    let mut count = 0;
    loop {
        let mut keys: BTreeMap<Key, usize> = BTreeMap::new();
        let mut next = vec![0usize; n];
        for s in 0..n {
            let (dl, out) = &lts.sigs[s];
            let key: Key = (s == 0, dl.clone(), out.iter().map(|(a, j)| (a.clone(), block[*j])).collect());
            let k = keys.len();
            next[s] = *keys.entry(key).or_insert(k);
        }
        let c = keys.len();
        rounds.push(next.clone());
        block = next;
        if c == count {
            return rounds;
        }
        count = c;
    }
}

fn explain(lts: &Lts, rounds: &[Vec<usize>], mut x: usize, mut y: usize) -> (Vec<Action>, String) {
    let mut path = Vec::new();
    loop {
        // First round in which x and y are separated.
        let k = rounds.iter().position(|b| b[x] != b[y]).expect("states are separated");
        let (dx, ox) = &lts.sigs[x];
        let (dy, oy) = &lts.sigs[y];
        if (x == 0) != (y == 0) {
            return (path, "one side terminated".into());
        }
        if k == 0 {
            for (o1, o2) in [(ox, oy), (oy, ox)] {
                if let Some((a, _)) = o1.iter().find(|(a, _)| !o2.iter().any(|(b, _)| b == a)) {
                    path.push(a.clone());
                    return (path, "step has no counterpart".into());
                }
            }
            let show = |d: &Option<ExtScalar>| d.as_ref().map_or("none".to_string(), |d| d.to_string());
            return (path, format!("ultimate delay {} vs {}", show(dx), show(dy)));
        }
        let prev = &rounds[k - 1];
        let mut found = None;
        'outer: for (o1, o2, swap) in [(ox, oy, false), (oy, ox, true)] {
            for (a, j) in o1 {
                let partners: Vec<usize> = o2.iter().filter(|(b, _)| b == a).map(|(_, i)| *i).collect();
                if !partners.iter().any(|i| prev[*i] == prev[*j]) {
                    found = Some((a.clone(), *j, partners.first().copied(), swap));
                    break 'outer;
                }
            }
        }
        let Some((a, j, partner, swap)) = found else {
            return (path, "signatures differ".into());
        };
        path.push(a);
        match partner {
            None => return (path, "step has no counterpart".into()),
            Some(i) => {
                let (nx, ny) = if swap { (i, j) } else { (j, i) };
                x = nx;
                y = ny;
            }
        }
    }
}

/// Strong bisimilarity of the roots of two linear specifications.
pub fn bisim_linear(e1: &LinearSpec, e2: &LinearSpec) -> LinearVerdict {
    let (lts, r1, r2) = build(e1, e2);
    let rounds = refine(&lts);
    let last = rounds.last().expect("at least one round");
    if last[r1] == last[r2] {
        return LinearVerdict::Bisimilar { up_to_depth: e1.is_truncated() || e2.is_truncated() };
    }
    let (path, reason) = explain(&lts, &rounds, r1, r2);
    LinearVerdict::Distinguished { path, reason }
}

/// A finite transition graph with ultimate delays, compared up to
/// isomorphism of the unfolded structure (identical branches collapse).
/// A node's deadline is only recorded when it lies strictly after the time
/// the node is entered.
#[derive(Clone, Debug, Default)]
pub struct TransitionGraph {
    pub nodes: Vec<GraphNode>,
    pub root: usize,
}

#[derive(Clone, Debug, Default)]
pub struct GraphNode {
    pub deadline: Option<ExtScalar>,
    pub edges: Vec<(Action, usize)>,
    pub terminating: Vec<Action>,
    pub cut: bool,
}

impl TransitionGraph {
    /// Explore `p` from `amb` under the semantics, `depth` steps deep.
    pub fn from_sos(p: &Term, amb: &Ambient, depth: usize, sos: &Sos) -> Result<TransitionGraph> {
        let mut g = TransitionGraph::default();
        let mut seen: HashMap<(Term, Ambient), usize> = HashMap::new();
        g.root = g.explore(p, amb, depth, sos, &mut seen)?;
        Ok(g)
    }

    fn explore(
        &mut self,
        p: &Term,
        amb: &Ambient,
        depth: usize,
        sos: &Sos,
        seen: &mut HashMap<(Term, Ambient), usize>,
    ) -> Result<usize> {
        let key = (p.clone(), amb.clone());
        if let Some(i) = seen.get(&key) {
            return Ok(*i);
        }
        let i = self.nodes.len();
        self.nodes.push(GraphNode::default());
        seen.insert(key, i);
        let b = sos.eval(p, amb)?;
        let mut node = GraphNode { deadline: b.idle.future(&amb.time).sup(), cut: depth == 0, ..GraphNode::default() };
        if depth > 0 {
            for s in b.steps {
                match s.succ {
                    Successor::Done => node.terminating.push(s.action),
                    Successor::Term(q) => {
                        let next = next_ambient(&q, &s.action, amb);
                        let j = self.explore(&q, &next, depth - 1, sos, seen)?;
                        node.edges.push((s.action, j));
                    }
                }
            }
        }
        self.nodes[i] = node;
        Ok(i)
    }

    /// The graph of a linear specification whose root is entered at `start`.
    pub fn from_spec(e: &LinearSpec, start: &Scalar) -> TransitionGraph {
        let index: HashMap<&Name, usize> = e.equations.iter().enumerate().map(|(i, (x, _))| (x, i)).collect();
        let mut nodes: Vec<GraphNode> = e
            .equations
            .iter()
            .map(|(x, body)| {
                let s = signature(body);
                GraphNode {
                    deadline: s.deadline,
                    edges: s.steps.into_iter().filter_map(|(a, y)| index.get(&y).map(|j| (a, *j))).collect(),
                    terminating: s.terminating.into_iter().collect(),
                    cut: e.truncated.contains(x),
                }
            })
            .collect();
        let root = index[&e.root];
        let mut entered: Vec<Option<Scalar>> = vec![None; nodes.len()];
        entered[root] = Some(start.clone());
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            for (a, j) in nodes[i].edges.clone() {
                if entered[j].is_none() {
                    entered[j] = Some(a.time().clone());
                    stack.push(j);
                }
            }
        }
        for (n, t) in nodes.iter_mut().zip(entered) {
            if let (Some(d), Some(t)) = (&n.deadline, t) {
                if !ExtScalar::Finite(t).lt(d) {
                    n.deadline = None;
                }
            }
        }
        TransitionGraph { nodes, root }
    }

    /// Canonical shape of the graph below `root`: equal shapes mean the
    /// graphs are isomorphic once identical sibling branches are merged.
    pub fn shape(&self) -> String {
        let mut memo: HashMap<usize, String> = HashMap::new();
        self.shape_of(self.root, &mut memo, &mut Vec::new())
    }

    fn shape_of(&self, i: usize, memo: &mut HashMap<usize, String>, stack: &mut Vec<usize>) -> String {
        if let Some(s) = memo.get(&i) {
            return s.clone();
        }
        if let Some(pos) = stack.iter().position(|j| *j == i) {
            return format!("^{}", stack.len() - pos);
        }
        stack.push(i);
        let n = &self.nodes[i];
        let mut parts: BTreeSet<String> = n.terminating.iter().map(|a| format!("{a}!")).collect();
        for (a, j) in &n.edges {
            parts.insert(format!("{a}->{}", self.shape_of(*j, memo, stack)));
        }
        stack.pop();
        let dl = n.deadline.as_ref().map_or("-".to_string(), |d| d.to_string());
        let s = format!("[{dl}|{}]", parts.into_iter().collect::<Vec<_>>().join(","));
        memo.insert(i, s.clone());
        s
    }

    pub fn has_cut(&self) -> bool {
        self.nodes.iter().any(|n| n.cut)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use crate::terms::name;

    fn spec(eqs: &[(&str, &str)]) -> LinearSpec {
        LinearSpec {
            equations: eqs.iter().map(|(x, b)| (name(x), parse_term(b).unwrap())).collect(),
            root: name(eqs[0].0),
            truncated: BTreeSet::new(),
        }
    }

    #[test]
    fn reflexive() {
        let e = spec(&[("X", "es(c,d; 1; (0,0,0)) . Y + dd(abs 3)"), ("Y", "er(c,d; 2; (0,0,0))")]);
        assert_eq!(bisim_linear(&e, &e), LinearVerdict::Bisimilar { up_to_depth: false });
    }

    #[test]
    fn label_mismatch() {
        let a = spec(&[("X", "es(c,d; 1; (0,0,0))")]);
        let b = spec(&[("Y", "es(c,d; 2; (0,0,0))")]);
        match bisim_linear(&a, &b) {
            LinearVerdict::Distinguished { path, .. } => {
                assert_eq!(path, vec![parse_term("es(c,d; 1; (0,0,0))").unwrap().as_action().unwrap().clone()])
            }
            v => panic!("{v}"),
        }
    }

    #[test]
    fn unrolled_loop() {
        let a = spec(&[("X", "es(c,d; 1; (0,0,0)) . X")]);
        let b = spec(&[("Y", "es(c,d; 1; (0,0,0)) . Z"), ("Z", "es(c,d; 1; (0,0,0)) . Y")]);
        assert!(bisim_linear(&a, &b).is_bisimilar());
        let c = spec(&[("Y", "es(c,d; 1; (0,0,0)) . Z"), ("Z", "es(c,d; 1; (0,0,0))")]);
        assert!(!bisim_linear(&a, &c).is_bisimilar());
    }

    #[test]
    fn deep_difference_has_path() {
        let a = spec(&[("X", "es(c,d; 1; (0,0,0)) . Y"), ("Y", "es(c,d; 2; (0,0,0))")]);
        let b = spec(&[("X", "es(c,d; 1; (0,0,0)) . Y"), ("Y", "es(c,d; 3; (0,0,0))")]);
        match bisim_linear(&a, &b) {
            LinearVerdict::Distinguished { path, .. } => assert_eq!(path.len(), 2),
            v => panic!("{v}"),
        }
    }
}
