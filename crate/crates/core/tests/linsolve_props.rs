//! The solver against enumeration of a bounded box.

mod common;

use common::config;
use common::linsolve::*;
use proptest::prelude::*;
use traceai::linsolve::Predicate;

#[test]
fn oracle_sanity() {
    let p = |s: &str| Predicate::from_bool_expr(&traceai::frontend::parse_bool_expr(s).unwrap());
    assert!(brute_sat(&p("2*x + 3*y == 7 && x - y >= 3 && z == x"), 3));
    assert!(!brute_sat(&p("2*x + 4*y == 7"), 2));
    assert!(!brute_sat(&p("x >= 51"), 1));
    assert!(brute_sat(&p("x >= 3 && x <= 3 || y < -60"), 2));
}

proptest! {
    #![proptest_config(config(SAT_CASES))]

    #[test]
    fn satisfiability_matches_enumeration(case in sat_case()) {
        check_sat(case)?;
    }
}

proptest! {
    #![proptest_config(config(ENTAIL_CASES))]

    #[test]
    fn entailment_matches_enumeration(case in entail_case()) {
        check_entails(case)?;
    }
}
