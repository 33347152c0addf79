//! The PAR protocol (positive acknowledgement with retransmission): a
//! sender, a receiver and two lossy repeaters communicating asynchronously
//! in space, plus bounded exhaustive checks of its delivery behaviour.

use std::collections::HashSet;
use std::fmt;

use crate::comm::{CommState, SpeedConfig};
use crate::error::{Error, Result};
use crate::meadow::{ExtScalar, Point, Scalar};
use crate::semantics::{next_ambient, Ambient, Sos, Successor};
use crate::terms::{Action, ActionKind, ActionPattern, RecSpec, Term};

pub const CH1: &str = "ch1";
pub const CH2: &str = "ch2";
pub const CH3: &str = "ch3";
pub const CH4: &str = "ch4";
pub const CH5: &str = "ch5";
pub const CH6: &str = "ch6";
pub const ACK: &str = "ack";
pub const ERR: &str = "err";

/// Channels whose actual receives take priority over idling.
pub const PRIORITY_CHANNELS: [&str; 4] = [CH3, CH4, CH5, CH6];

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParParams {
    /// The data set `D`; also the order in which the driver offers data.
    pub data: Vec<String>,
    pub xi_s: Point,
    pub xi_k: Point,
    pub xi_l: Point,
    pub xi_r: Point,
    pub t_s: Scalar,
    pub t_k: Scalar,
    pub t_l: Scalar,
    pub t_r: Scalar,
    /// Time the receiver takes to produce an acknowledgement (`t_R'`).
    pub t_r_ack: Scalar,
    /// Sender time-out (`t_S'`).
    pub timeout: Scalar,
    /// Delay before the driver offers a datum on `ch1`.
    pub t_env: Scalar,
    pub speed: Scalar,
    /// Maximal number of consecutive errors of each repeater.
    pub retransmission_bound: usize,
    pub depth: usize,
}

impl Default for ParParams {
    /// Collinear unit geometry, unit speed and delays, time-out 10.
    fn default() -> Self {
        ParParams {
            data: vec!["d1".into(), "d2".into()],
            xi_s: Point::ints(0, 0, 0),
            xi_k: Point::ints(1, 0, 0),
            xi_l: Point::ints(1, 0, 0),
            xi_r: Point::ints(2, 0, 0),
            t_s: Scalar::one(),
            t_k: Scalar::one(),
            t_l: Scalar::one(),
            t_r: Scalar::one(),
            t_r_ack: Scalar::one(),
            timeout: Scalar::int(10),
            t_env: Scalar::one(),
            speed: Scalar::one(),
            retransmission_bound: 3,
            depth: 40,
        }
    }
}

impl ParParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.data.is_empty() {
            return bad("data set is empty");
        }
        let mut seen = HashSet::new();
        for d in &self.data {
            if !seen.insert(d) || d == ACK || d == ERR || d.contains('#') {
                return bad(&format!("bad or duplicate datum `{d}`"));
            }
        }
        for (n, t) in [
            ("t_s", &self.t_s),
            ("t_k", &self.t_k),
            ("t_l", &self.t_l),
            ("t_r", &self.t_r),
            ("t_r_ack", &self.t_r_ack),
            ("t_env", &self.t_env),
        ] {
            if t.is_negative() {
                return bad(&format!("{n} is negative"));
            }
        }
        if !Scalar::zero().lt(&self.timeout) {
            return bad("time-out must be positive");
        }
        SpeedConfig::new(self.speed.clone())?;
        let pts = [&self.xi_s, &self.xi_k, &self.xi_l, &self.xi_r];
        for a in pts {
            for b in pts {
                a.dist(b)?;
            }
        }
        Ok(())
    }

    pub fn speed_config(&self) -> Result<SpeedConfig> {
        SpeedConfig::new(self.speed.clone())
    }

    fn travel(&self, a: &Point, b: &Point) -> Result<Scalar> {
        Ok(a.dist(b)?.div(&self.speed))
    }

    /// Length of one undisturbed protocol cycle: frame out, delivery,
    /// acknowledgement back.
    pub fn cycle_length(&self) -> Result<Scalar> {
        let legs = [
            self.travel(&self.xi_s, &self.xi_k)?,
            self.t_k.clone(),
            self.travel(&self.xi_k, &self.xi_r)?,
            self.t_r.clone(),
            self.t_r_ack.clone(),
            self.travel(&self.xi_r, &self.xi_l)?,
            self.t_l.clone(),
            self.travel(&self.xi_l, &self.xi_s)?,
        ];
        Ok(legs.iter().fold(Scalar::zero(), |acc, x| &acc + x))
    }
}

/// Whether the sender's time-out exceeds a complete protocol cycle.
pub fn cycle_condition(params: &ParParams) -> Result<bool> {
    Ok(params.cycle_length()?.lt(&params.timeout))
}

pub fn frame(d: &str, b: u8) -> String {
    format!("{d}#{b}")
}

fn inf() -> ExtScalar {
    ExtScalar::Infinity
}

fn rrecv(c: &str, d: &str, hi: ExtScalar, p: &Point) -> Term {
    Term::Act(Action::pr_rel(c, d, Scalar::zero(), hi, p.clone()).expect("window starts at 0"))
}

fn rsend(c: &str, d: &str, t: &Scalar, p: &Point) -> Term {
    Term::Act(Action::ps_rel(c, d, t.clone(), p.clone()))
}

fn pre(a: Term, x: &str) -> Term {
    Term::seq(a, Term::var(x))
}

fn sender(p: &ParParams) -> Result<Term> {
    let mut eqs = Vec::new();
    for b in [0u8, 1] {
        let sb = format!("S_{b}");
        eqs.push((sb, Term::sum(p.data.iter().map(|d| pre(rrecv(CH1, d, inf(), &p.xi_s), &format!("Sp_{d}_{b}"))))));
        for d in &p.data {
            let f = frame(d, b);
            let spp = format!("Spp_{d}_{b}");
            eqs.push((format!("Sp_{d}_{b}"), pre(rsend(CH3, &f, &p.t_s, &p.xi_s), &spp)));
            let ack = pre(rrecv(CH5, ACK, p.timeout.clone().into(), &p.xi_s), &format!("S_{}", 1 - b));
            let again = pre(rsend(CH3, &f, &p.timeout, &p.xi_s), &spp);
            eqs.push((spp, Term::alt(ack, again)));
        }
    }
    rec("S_0", eqs)
}

fn receiver(p: &ParParams) -> Result<Term> {
    let mut eqs = Vec::new();
    for b in [0u8, 1] {
        let fresh = p.data.iter().map(|d| pre(rrecv(CH4, &frame(d, b), inf(), &p.xi_r), &format!("Rp_{d}_{b}")));
        let stale = p.data.iter().map(|d| pre(rrecv(CH4, &frame(d, 1 - b), inf(), &p.xi_r), &format!("Rpp_{b}")));
        eqs.push((format!("R_{b}"), Term::sum(fresh.chain(stale))));
        for d in &p.data {
            eqs.push((format!("Rp_{d}_{b}"), pre(rsend(CH2, d, &p.t_r, &p.xi_r), &format!("Rpp_{}", 1 - b))));
        }
        eqs.push((format!("Rpp_{b}"), pre(rsend(CH6, ACK, &p.t_r_ack, &p.xi_r), &format!("R_{b}"))));
    }
    rec("R_0", eqs)
}

fn repeater_k(p: &ParParams) -> Result<Term> {
    let mut eqs = Vec::new();
    let mut entry = Vec::new();
    for d in &p.data {
        for b in [0u8, 1] {
            let f = frame(d, b);
            let kp = format!("Kp_{d}_{b}");
            entry.push(pre(rrecv(CH3, &f, inf(), &p.xi_k), &kp));
            let pass = pre(rsend(CH4, &f, &p.t_k, &p.xi_k), "K");
            let lose = pre(rsend(CH4, ERR, &p.t_k, &p.xi_k), "K");
            eqs.push((kp, Term::alt(pass, lose)));
        }
    }
    eqs.push(("K".into(), Term::sum(entry)));
    rec("K", eqs)
}

fn repeater_l(p: &ParParams) -> Result<Term> {
    let pass = pre(rsend(CH5, ACK, &p.t_l, &p.xi_l), "L");
    let lose = pre(rsend(CH5, ERR, &p.t_l, &p.xi_l), "L");
    rec("L", vec![("L".into(), pre(rrecv(CH6, ACK, inf(), &p.xi_l), "Lp")), ("Lp".into(), Term::alt(pass, lose))])
}

/// Offers the inputs one by one on `ch1` at the sender's location, moving
/// on when an acknowledgement reaches that location.
fn driver(p: &ParParams, inputs: &[String]) -> Term {
    let mut items = Vec::new();
    for d in inputs {
        items.push(rsend(CH1, d, &p.t_env, &p.xi_s));
        items.push(rrecv(CH5, ACK, inf(), &p.xi_s));
    }
    Term::seq_all(items)
}

fn rec(root: &str, eqs: Vec<(String, Term)>) -> Result<Term> {
    let spec = RecSpec::from_pairs(eqs.iter().map(|(x, t)| (x.as_str(), t.clone())).collect())?;
    Ok(Term::rec(root, spec))
}

/// `H`: all actual receives on `ch3`–`ch6`.
pub fn priority_set() -> ActionPattern {
    ActionPattern::receives_on(PRIORITY_CHANNELS)
}

/// `S ∥ K ∥ L ∥ R`.
pub fn components(p: &ParParams) -> Result<Term> {
    Ok(Term::par(Term::par(Term::par(sender(p)?, repeater_k(p)?), repeater_l(p)?), receiver(p)?))
}

/// `ν_H(Λ⁰_{ch3..ch6},∅(S ∥ K ∥ L ∥ R))`.
pub fn build_par(p: &ParParams) -> Result<Term> {
    p.validate()?;
    let body = Term::state(PRIORITY_CHANNELS, Scalar::zero(), CommState::empty(), components(p)?);
    Ok(Term::max_prog(priority_set(), body))
}

/// The protocol closed with a driver feeding `inputs`, all six channels
/// under the state operator; with or without maximal progress. With it, the
/// sender's receives on `ch1` are prioritized too, so a datum offered to the
/// sender cannot be passed over. Deliveries are the receiver's sends on
/// `ch2`; nothing consumes them, since a receiver without delay would take
/// the same broadcast again and again at one instant.
pub fn build_closed(p: &ParParams, inputs: &[String], priority: bool) -> Result<Term> {
    p.validate()?;
    if let Some(d) = inputs.iter().find(|d| !p.data.contains(d)) {
        return Err(Error::InvalidParams(format!("input `{d}` is not in the data set")));
    }
    let chans = [CH1, CH2, CH3, CH4, CH5, CH6];
    let body = Term::state(chans, Scalar::zero(), CommState::empty(), Term::par(components(p)?, driver(p, inputs)));
    Ok(if priority { Term::max_prog(ActionPattern::receives_on([CH1, CH3, CH4, CH5, CH6]), body) } else { body })
}

/// A finite run of the protocol.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ParTrace {
    pub actions: Vec<Action>,
}

impl ParTrace {
    /// Data sent on `ch2`, in order.
    pub fn deliveries(&self) -> Vec<&str> {
        self.actions.iter().filter(|a| is_delivery(a)).map(|a| &*a.datum).collect()
    }
}

impl fmt::Display for ParTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.actions {
            writeln!(f, "{a}")?;
        }
        Ok(())
    }
}

fn is_delivery(a: &Action) -> bool {
    a.kind == ActionKind::AESend && &*a.channel == CH2
}

fn is_k_error(a: &Action) -> bool {
    a.kind == ActionKind::AESend && &*a.channel == CH4 && &*a.datum == ERR
}

fn is_l_error(a: &Action) -> bool {
    a.kind == ActionKind::AESend && &*a.channel == CH5 && &*a.datum == ERR
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DeliveryVerdict {
    /// Every completed fair run delivered exactly the inputs, in order.
    Ok,
    Violation {
        trace: ParTrace,
        reason: String,
    },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DeliveryReport {
    pub verdict: DeliveryVerdict,
    /// Runs that reached a configuration without transitions.
    pub completed: usize,
    /// Runs cut off at the depth bound (no verdict on those).
    pub truncated: usize,
    /// Runs abandoned because a repeater exceeded its error bound.
    pub unfair: usize,
    pub configurations: usize,
    /// A run in which the sender retransmits a frame after `K` lost it.
    pub retransmission_after_k_error: Option<ParTrace>,
}

impl DeliveryReport {
    pub fn is_ok(&self) -> bool {
        self.verdict == DeliveryVerdict::Ok
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Config {
    term: Term,
    k_errors: usize,
    l_errors: usize,
    delivered: usize,
    last_frame: Option<String>,
    k_error_seen: bool,
}

struct Explorer<'a> {
    sos: Sos,
    inputs: &'a [String],
    bound: usize,
    depth: usize,
    seen: HashSet<Config>,
    prefix: Vec<Action>,
    report: DeliveryReport,
}

impl Explorer<'_> {
    fn violation(&mut self, reason: String) {
        if self.report.verdict == DeliveryVerdict::Ok {
            self.report.verdict =
                DeliveryVerdict::Violation { trace: ParTrace { actions: self.prefix.clone() }, reason };
        }
    }

    fn go(&mut self, c: Config, amb: &Ambient, depth: usize) -> Result<()> {
        if self.report.verdict != DeliveryVerdict::Ok || !self.seen.insert(c.clone()) {
            return Ok(());
        }
        self.report.configurations += 1;
        if depth == self.depth {
            self.report.truncated += 1;
            return Ok(());
        }
        let b = self.sos.eval(&c.term, amb)?;
        if b.steps.is_empty() {
            self.finish(c.delivered);
        }
        for tr in &b.steps {
            let a = &tr.action;
            let mut next = Config { term: Term::Delta, ..c.clone() };
            if is_k_error(a) {
                next.k_errors += 1;
                next.k_error_seen = true;
            } else if a.kind == ActionKind::AESend && &*a.channel == CH4 {
                next.k_errors = 0;
            }
            if is_l_error(a) {
                next.l_errors += 1;
            } else if a.kind == ActionKind::AESend && &*a.channel == CH5 {
                next.l_errors = 0;
            }
            if next.k_errors > self.bound || next.l_errors > self.bound {
                self.report.unfair += 1;
                continue;
            }
            self.prefix.push(a.clone());
            if a.kind == ActionKind::AESend && &*a.channel == CH3 {
                let f = a.datum.to_string();
                if c.last_frame.as_deref() == Some(&f)
                    && c.k_error_seen
                    && self.report.retransmission_after_k_error.is_none()
                {
                    self.report.retransmission_after_k_error = Some(ParTrace { actions: self.prefix.clone() });
                }
                next.last_frame = Some(f);
            }
            if is_delivery(a) {
                let ok = self.inputs.get(c.delivered).is_some_and(|d| **d == *a.datum);
                if !ok {
                    let what = if self.inputs[..c.delivered].iter().any(|d| **d == *a.datum) {
                        "duplicate"
                    } else {
                        "out-of-order"
                    };
                    self.violation(format!("{what} delivery of `{}`", a.datum));
                    self.prefix.pop();
                    return Ok(());
                }
                next.delivered += 1;
            }
            match &tr.succ {
                Successor::Done => {
                    next.term = Term::Delta;
                    self.finish(next.delivered);
                }
                Successor::Term(q) => {
                    let amb2 = next_ambient(q, a, amb);
                    next.term = q.clone();
                    self.go(next, &amb2, depth + 1)?;
                }
            }
            self.prefix.pop();
        }
        Ok(())
    }

    fn finish(&mut self, delivered: usize) {
        self.report.completed += 1;
        if delivered < self.inputs.len() {
            self.violation(format!("lost delivery: {} of {} data delivered", delivered, self.inputs.len()));
        }
    }
}

/// Explore every run of the closed protocol up to `params.depth` steps,
/// with at most `params.retransmission_bound` consecutive errors per
/// repeater, and check the `ch2` deliveries against `inputs`.
pub fn check_delivery(params: &ParParams, inputs: &[String]) -> Result<DeliveryReport> {
    let term = build_closed(params, inputs, true)?;
    let mut ex = Explorer {
        sos: Sos::new(params.speed_config()?),
        inputs,
        bound: params.retransmission_bound,
        depth: params.depth,
        seen: HashSet::new(),
        prefix: Vec::new(),
        report: DeliveryReport {
            verdict: DeliveryVerdict::Ok,
            completed: 0,
            truncated: 0,
            unfair: 0,
            configurations: 0,
            retransmission_after_k_error: None,
        },
    };
    let start = Config { term, k_errors: 0, l_errors: 0, delivered: 0, last_frame: None, k_error_seen: false };
    let amb = Ambient::at(Scalar::zero());
    ex.go(start, &amb, 0)?;
    Ok(ex.report)
}

/// A run in which an enabled receive on `ch3`–`ch6` at time `missed` was
/// passed over by a later step.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SkippedReception {
    pub trace: ParTrace,
    pub missed: Action,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AnomalyReport {
    pub witness: Option<SkippedReception>,
    pub configurations: usize,
}

/// Search the closed protocol, with or without maximal progress, for a run
/// that lets a reception instant pass unused.
pub fn find_skipped_reception(params: &ParParams, inputs: &[String], priority: bool) -> Result<AnomalyReport> {
    let term = build_closed(params, inputs, priority)?;
    let sos = Sos::new(params.speed_config()?);
    let h = priority_set();
    let mut seen: HashSet<Term> = HashSet::new();
    let mut prefix = Vec::new();
    let mut report = AnomalyReport { witness: None, configurations: 0 };
    skip_search(&sos, &h, &term, &Ambient::at(Scalar::zero()), params.depth, &mut seen, &mut prefix, &mut report)?;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn skip_search(
    sos: &Sos,
    h: &ActionPattern,
    p: &Term,
    amb: &Ambient,
    depth: usize,
    seen: &mut HashSet<Term>,
    prefix: &mut Vec<Action>,
    report: &mut AnomalyReport,
) -> Result<()> {
    if report.witness.is_some() || depth == 0 || !seen.insert(p.clone()) {
        return Ok(());
    }
    report.configurations += 1;
    let b = sos.eval(p, amb)?;
    let earliest = b.steps.iter().filter(|s| h.contains(&s.action)).min_by(|x, y| x.action.time().cmp(y.action.time()));
    for tr in &b.steps {
        prefix.push(tr.action.clone());
        if let Some(e) = earliest {
            if e.action.time().lt(tr.action.time()) {
                report.witness =
                    Some(SkippedReception { trace: ParTrace { actions: prefix.clone() }, missed: e.action.clone() });
                return Ok(());
            }
        }
        if let Successor::Term(q) = &tr.succ {
            skip_search(sos, h, q, &next_ambient(q, &tr.action, amb), depth - 1, seen, prefix, report)?;
            if report.witness.is_some() {
                return Ok(());
            }
        }
        prefix.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_condition_examples() {
        let mut p = ParParams::default();
        assert_eq!(p.cycle_length().unwrap(), Scalar::int(8));
        assert!(cycle_condition(&p).unwrap());
        p.timeout = Scalar::int(8);
        assert!(!cycle_condition(&p).unwrap());
        p.timeout = Scalar::int(7);
        assert!(!cycle_condition(&p).unwrap());
    }

    #[test]
    fn shape_of_the_model() {
        let p = ParParams { data: vec!["d".into()], ..ParParams::default() };
        let t = build_par(&p).unwrap();
        let Term::MaxProg(h, _) = &t else { panic!() };
        assert!(h.contains(&Action::er(CH4, "d#0", Scalar::one(), Point::origin())));
        assert!(!h.contains(&Action::er(CH2, "d", Scalar::one(), Point::origin())));
        assert!(!h.contains(&Action::es(CH4, "d#0", Scalar::one(), Point::origin())));
        let Term::Rec(_, spec) = sender(&p).unwrap() else { panic!() };
        assert_eq!(spec.rhs("S_0").unwrap().summands().len(), 1);
        let Term::Rec(_, spec) = repeater_k(&p).unwrap() else { panic!() };
        assert_eq!(spec.rhs("Kp_d_0").unwrap().summands().len(), 2);
    }

    #[test]
    fn invalid_params() {
        let p = ParParams { timeout: Scalar::zero(), ..ParParams::default() };
        assert!(matches!(build_par(&p), Err(Error::InvalidParams(_))));
        let p = ParParams { xi_k: Point::ints(1, 1, 0), ..ParParams::default() };
        assert!(matches!(p.validate(), Err(Error::NotRepresentable(_))));
    }
}
