//! Canonical forms modulo associativity, commutativity and idempotence of
//! `+`, and classification into the normal-form classes.

use std::fmt;
use std::sync::Arc;

use crate::terms::Term;

/// Flatten every sum, canonicalize its summands, sort them and drop
/// duplicates. Two terms equal modulo ACI of `+` get the same result.
pub fn alt_canonical(p: &Term) -> Term {
    match p {
        Term::Alt(..) => {
            let mut items: Vec<Term> = p.summands().into_iter().map(alt_canonical).collect();
            items.sort();
            items.dedup();
            Term::sum(items)
        }
        Term::Seq(a, b) => Term::Seq(canon_arc(a), canon_arc(b)),
        Term::Par(a, b) => Term::Par(canon_arc(a), canon_arc(b)),
        Term::LeftMerge(a, b) => Term::LeftMerge(canon_arc(a), canon_arc(b)),
        Term::Timeout(a, b) => Term::Timeout(canon_arc(a), canon_arc(b)),
        Term::State { channels, time, sigma, body } => {
            Term::State { channels: channels.clone(), time: time.clone(), sigma: sigma.clone(), body: canon_arc(body) }
        }
        Term::MaxProg(h, b) => Term::MaxProg(h.clone(), canon_arc(b)),
        Term::AuxMaxProg(h, a, b) => Term::AuxMaxProg(h.clone(), canon_arc(a), canon_arc(b)),
        _ => p.clone(),
    }
}

fn canon_arc(p: &Arc<Term>) -> Arc<Term> {
    let c = alt_canonical(p);
    if c == **p {
        p.clone()
    } else {
        Arc::new(c)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum NormalFormClass {
    /// Head normal form: sums of actual actions, possibly prefixing a
    /// tail, and absolutely timed inactions.
    HProc,
    /// Semi-head normal form but not head normal form.
    SHProc,
    Other,
}

impl fmt::Display for NormalFormClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalFormClass::HProc => "HProc",
            NormalFormClass::SHProc => "SHProc",
            NormalFormClass::Other => "Other",
        })
    }
}

/// The auxiliary atom class: inactions, actions, and time-outs of atoms.
pub fn is_shproc_atom(p: &Term) -> bool {
    match p {
        Term::Delta | Term::ADead(_) | Term::RDead(_) | Term::Act(_) => true,
        Term::Timeout(a, b) => is_shproc_atom(a) && is_shproc_atom(b),
        _ => false,
    }
}

pub fn is_shproc(p: &Term) -> bool {
    match p {
        Term::Alt(a, b) => is_shproc(a) && is_shproc(b),
        Term::Seq(a, _) => is_shproc_atom(a),
        other => is_shproc_atom(other),
    }
}

pub fn is_hproc(p: &Term) -> bool {
    let actual = |t: &Term| matches!(t, Term::Act(a) if a.kind.is_actual());
    match p {
        Term::Delta | Term::ADead(_) => true,
        Term::Alt(a, b) => is_hproc(a) && is_hproc(b),
        Term::Seq(a, _) => actual(a),
        other => actual(other),
    }
}

pub fn classify(p: &Term) -> NormalFormClass {
    if is_hproc(p) {
        NormalFormClass::HProc
    } else if is_shproc(p) {
        NormalFormClass::SHProc
    } else {
        NormalFormClass::Other
    }
}
