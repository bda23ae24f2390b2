use traceai::cegar::{progress_audit, verify, UnknownReason, Verdict, VerifyConfig};
use traceai::domains::DomainKind;
use traceai::frontend::compile;
use traceai::semantics::validate_execution;

const P1: &str = "var x, y;
x := 0; y := 42;
while (x < 100) {
  x := x + 1;
  while (y <= 0) { y := 42; }
}
assert(x == 100 && y == 42);";

#[test]
fn interval_run_needs_two_refinements() {
    let p = compile(P1).unwrap();
    let mut cfg = VerifyConfig::with_domain(Some(DomainKind::Interval));
    cfg.audit = true;
    let out = verify(&p, &cfg);
    assert_eq!(out.verdict, Verdict::Safe);
    assert_eq!(out.stats.total_refinements, 2);
    assert_eq!(out.stats.ai_refinements, 1);
    assert_eq!(out.stats.useful_ai_refinements, 1);
    assert!(progress_audit(&out.stats.iterations));
    assert!(out.stats.audit.ok(), "{:?}", out.stats.audit);
}

#[test]
fn every_domain_proves_it() {
    let p = compile(P1).unwrap();
    for d in DomainKind::ALL {
        let out = verify(&p, &VerifyConfig::with_domain(Some(d)));
        assert_eq!(out.verdict, Verdict::Safe, "{d}");
    }
}

#[test]
fn plain_trace_abstraction_unrolls_the_loop() {
    let p = compile(P1).unwrap();
    let out = verify(&p, &VerifyConfig::with_domain(None));
    assert_eq!(out.verdict, Verdict::Safe);
    assert_eq!(out.stats.ai_refinements, 0);
    // one refinement per value of x at the loop head
    assert!(
        out.stats.total_refinements > 100,
        "{}",
        out.stats.total_refinements
    );
    assert!(progress_audit(&out.stats.iterations));
}

#[test]
fn plain_trace_abstraction_respects_the_iteration_limit() {
    let p = compile(P1).unwrap();
    let mut cfg = VerifyConfig::with_domain(None);
    cfg.max_iter = 5;
    let out = verify(&p, &cfg);
    assert_eq!(out.verdict, Verdict::Unknown(UnknownReason::IterationLimit));
    assert_eq!(out.stats.total_refinements, 5);
}

#[test]
fn weaker_assertion_still_holds() {
    let p = compile(&P1.replace("x == 100 && y == 42", "x == 100")).unwrap();
    let out = verify(&p, &VerifyConfig::default());
    assert_eq!(out.verdict, Verdict::Safe);
}

#[test]
fn stronger_assertion_fails_with_a_replayable_execution() {
    let p = compile(&P1.replace("x == 100 && y == 42", "x == 99")).unwrap();
    let out = verify(&p, &VerifyConfig::default());
    let Verdict::Unsafe(cex) = out.verdict else {
        panic!("{:?}", out.verdict)
    };
    assert!(p.accepts(&cex.trace));
    assert!(validate_execution(&cex.trace, &cex.execution).unwrap());
}
