use stpa::protocols::*;
use stpa::semantics::{Ambient, Sos, Successor};
use stpa::{ActionKind, Scalar};

#[test]
fn one_datum_without_errors_is_delivered_once() {
    let p = ParParams { data: vec!["d".into()], retransmission_bound: 0, ..ParParams::default() };
    let r = check_delivery(&p, &p.data).unwrap();
    assert!(r.is_ok(), "{:?}", r.verdict);
    assert_eq!(r.truncated, 0);
    assert!(r.completed >= 1);
    assert!(r.retransmission_after_k_error.is_none());
}

#[test]
fn retransmission_follows_k_error() {
    let p = ParParams { data: vec!["d".into()], retransmission_bound: 1, ..ParParams::default() };
    let r = check_delivery(&p, &p.data).unwrap();
    assert!(r.is_ok(), "{:?}", r.verdict);
    let tr = r.retransmission_after_k_error.expect("a retransmission");
    let frames: Vec<_> = tr.actions.iter().filter(|a| a.kind == ActionKind::AESend && &*a.channel == CH3).collect();
    let n = frames.len();
    assert!(n >= 2);
    // the time-out runs from the last event before it, the K error
    let err = tr.actions.iter().rev().find(|a| &*a.datum == ERR).unwrap();
    assert_eq!(frames[n - 1].time(), &(err.time() + &p.timeout));
}

#[test]
fn reception_instants_are_send_time_plus_travel() {
    let p = ParParams::default();
    let r = check_delivery(&p, &p.data).unwrap();
    let tr = r.retransmission_after_k_error.unwrap();
    for (i, a) in tr.actions.iter().enumerate() {
        if a.kind != ActionKind::AERecv {
            continue;
        }
        let sent = tr.actions[..i]
            .iter()
            .rev()
            .find(|s| s.kind == ActionKind::AESend && s.channel == a.channel && s.datum == a.datum)
            .unwrap();
        let travel = sent.point.dist(&a.point).unwrap().div(&p.speed);
        assert!(a.time() >= &(sent.time() + &travel), "{a}");
    }
}

#[test]
fn premature_timeout_loses_a_datum_when_transit_is_slow() {
    // every leg takes 10; the sender gives up after 9
    let p = ParParams { speed: Scalar::frac(1, 10), timeout: Scalar::int(9), ..ParParams::default() };
    assert!(!cycle_condition(&p).unwrap());
    let r = check_delivery(&p, &p.data).unwrap();
    let DeliveryVerdict::Violation { trace, reason } = r.verdict else { panic!("no violation") };
    assert!(reason.contains("lost"), "{reason}");
    assert_eq!(trace.deliveries(), vec!["d1"]);
}

#[test]
fn undisturbed_run_has_the_cycle_length() {
    let p = ParParams { data: vec!["d".into()], ..ParParams::default() };
    let term = build_closed(&p, &p.data, true).unwrap();
    let sos = Sos::new(p.speed_config().unwrap());
    let mut amb = Ambient::at(Scalar::zero());
    let mut cur = term;
    let mut times = Vec::new();
    loop {
        let b = sos.eval(&cur, &amb).unwrap();
        let Some(s) = b.steps.iter().find(|s| &*s.action.datum != ERR) else { break };
        times.push((s.action.clone(), s.action.time().clone()));
        let Successor::Term(q) = &s.succ else { break };
        amb = stpa::semantics::next_ambient(q, &s.action, &amb);
        cur = q.clone();
    }
    let sent = times.iter().find(|(a, _)| &*a.channel == CH3).unwrap().1.clone();
    let acked = times.iter().find(|(a, _)| &*a.channel == CH5 && a.kind == ActionKind::AERecv).unwrap().1.clone();
    assert_eq!(&acked - &sent, p.cycle_length().unwrap());
}

#[test]
fn maximal_progress_removes_skipped_receptions() {
    let p = ParParams::default();
    let without = find_skipped_reception(&p, &p.data, false).unwrap();
    let w = without.witness.expect("anomaly without priority");
    assert!(PRIORITY_CHANNELS.contains(&&*w.missed.channel));
    assert!(w.trace.actions.last().unwrap().time() > w.missed.time());
    let with = find_skipped_reception(&p, &p.data, true).unwrap();
    assert!(with.witness.is_none());
    assert!(with.configurations > 100);
}
