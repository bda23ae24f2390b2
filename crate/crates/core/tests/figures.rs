//! The running example: its infeasible traces, the path program of the
//! second trace, its interval annotation and the enhanced automaton.

mod common;

use common::running::*;
use traceai::frontend::compile;
use traceai::pathprog::has_loop;

#[test]
fn program_has_seven_locations() {
    let p = compile(P1).unwrap();
    assert_eq!(p.num_locations(), 7);
    assert_eq!(p.edges().len(), 8);
}

#[test]
fn both_traces_are_infeasible_where_the_proofs_say() {
    check_traces().unwrap();
}

#[test]
fn tau1_has_no_loop() {
    let p = compile(P1).unwrap();
    assert!(!has_loop(&run_of(&p, &TAU1), &p));
}

#[test]
fn path_program_of_tau2() {
    let (_, pp) = tau2_path_program();
    assert_eq!(pp.automaton.num_locations(), 6);
    assert_eq!(pp.automaton.edges().len(), 6);
}

#[test]
fn interval_annotation_of_the_path_program() {
    check_annotation().unwrap();
}

#[test]
fn enhanced_automaton_edges() {
    assert_eq!(compile(P1).unwrap().alphabet().len(), 8);
    check_enhanced_edges().unwrap();
}
