//! Inclusion checking and union against explicit word enumeration.

mod common;

use common::automata::*;
use common::config;
use proptest::prelude::*;
use traceai::automata::{FloydHoareAutomaton, Justification};
use traceai::expr::{CmpOp, LinExpr, Statement, Var};
use traceai::linsolve::Predicate;

/// Like `floyd_hoare`, but state `q > 0` is annotated `x == tags[q]`, so
/// that states of different automata may share annotations.
fn annotated(r: &Raw, tags: &[i128]) -> FloydHoareAutomaton {
    let mut a = FloydHoareAutomaton::empty();
    for &tag in &tags[1..r.states] {
        let e = traceai::expr::BoolExpr::cmp(
            LinExpr::var(Var::new("x")),
            CmpOp::Eq,
            LinExpr::constant(tag),
        );
        a.add_state(Predicate::from_bool_expr(&e), None);
    }
    for &(s, l, d) in &r.edges {
        a.add_transition(s, letter(l), d, Justification::Exact);
    }
    for q in 0..r.states {
        if r.accepting[q] {
            a.set_accepting(q);
        }
    }
    a
}

proptest! {
    #![proptest_config(config(INCLUSION_CASES))]

    #[test]
    fn inclusion_matches_enumeration(case in inclusion_case()) {
        check_inclusion(case)?;
    }

    #[test]
    fn union_accepts_either((a, b, words) in (
        raw(4, 5),
        raw(4, 5),
        prop::collection::vec(prop::collection::vec(0usize..5, 0..=6), 30),
    )) {
        let (a, b) = (floyd_hoare(&a), floyd_hoare(&b));
        let u = a.union(&b);
        prop_assert_eq!(u.num_states(), a.num_states() + b.num_states() + 1);
        let mut absorbed = FloydHoareAutomaton::empty();
        absorbed.absorb(&a);
        absorbed.absorb(&b);
        for w in words {
            let w: Vec<Statement> = w.into_iter().map(letter).collect();
            let either = a.accepts(&w) || b.accepts(&w);
            prop_assert_eq!(u.accepts(&w), either);
            prop_assert_eq!(absorbed.accepts(&w), either);
        }
    }

    #[test]
    fn merge_contains_the_union((a, b, tags, words) in (
        raw(4, 5),
        raw(4, 5),
        prop::collection::vec(0i128..3, 8),
        prop::collection::vec(prop::collection::vec(0usize..5, 0..=6), 30),
    )) {
        let (a, b) = (annotated(&a, &tags[..4]), annotated(&b, &tags[4..]));
        let mut merged = FloydHoareAutomaton::empty();
        merged.merge(&a);
        merged.merge(&b);
        prop_assert!(merged.num_states() <= a.num_states() + b.num_states() + 1);
        for w in words {
            let w: Vec<Statement> = w.into_iter().map(letter).collect();
            if a.accepts(&w) || b.accepts(&w) {
                prop_assert!(merged.accepts(&w));
            }
        }
    }
}
