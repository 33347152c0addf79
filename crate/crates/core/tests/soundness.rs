use stpa::axioms::soundness::check_all;
use stpa::comm::SpeedConfig;

#[test]
fn every_schema_agrees_with_the_semantics() {
    let reports = check_all(100, 7, &SpeedConfig::default());
    let mut bad = Vec::new();
    for r in &reports {
        println!(
            "{:6} instances={:4} attempts={:6} discrepancies={}",
            r.axiom.to_string(),
            r.instances,
            r.attempts,
            r.failures.len()
        );
        for f in r.failures.iter().take(2) {
            println!("    {}  ~>  {}\n    {}", f.lhs, f.rhs, f.witness);
        }
        if !r.passed(100) {
            bad.push(r.axiom);
        }
    }
    assert!(bad.is_empty(), "{bad:?}");
}
