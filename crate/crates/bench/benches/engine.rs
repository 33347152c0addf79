use criterion::{black_box, criterion_group, criterion_main, Criterion};

use stpa::analysis::{bisim_linear, linearize_term};
use stpa::axioms::normalize;
use stpa::protocols::{check_delivery, ParParams};
use stpa::semantics::{Ambient, Sos};
use stpa::syntax::parse_term;
use stpa::{Scalar, SpeedConfig};

const SYSTEM: &str = "L{c}@0:{}(ps(c,d; abs 1; (0,0,0)) . pr(c,e; rel 0..4; (0,0,0)) \
    || pr(c,d; abs 0..3; (1,0,0)) . ps(c,e; rel 1; (1,0,0)) \
    || pr(c,d; abs 0..5; (2,0,0)))";

fn engine(c: &mut Criterion) {
    let cfg = SpeedConfig::default();
    let p = parse_term(SYSTEM).unwrap();

    c.bench_function("normalize three components", |b| b.iter(|| normalize(black_box(&p), &cfg).unwrap()));

    let sos = Sos::new(cfg.clone());
    let amb = Ambient::at(Scalar::zero());
    c.bench_function("sos step three components", |b| b.iter(|| sos.eval(black_box(&p), &amb).unwrap()));

    c.bench_function("linearize three components", |b| b.iter(|| linearize_term(black_box(&p), 16, &cfg).unwrap()));

    let e = linearize_term(&p, 16, &cfg).unwrap();
    c.bench_function("bisim_linear self", |b| b.iter(|| bisim_linear(black_box(&e), &e)));

    let mut g = c.benchmark_group("par");
    g.sample_size(10);
    let params = ParParams { data: vec!["d".into()], ..ParParams::default() };
    g.bench_function("delivery check, one datum", |b| {
        b.iter(|| check_delivery(black_box(&params), &params.data).unwrap())
    });
    g.finish();
}

criterion_group!(benches, engine);
criterion_main!(benches);
