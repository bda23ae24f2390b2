//! The running example and the checks of its infeasibility proofs, path
//! program annotation and enhanced automaton.

use traceai::domains::DomainKind;
use traceai::expr::Statement;
use traceai::fixpoint::{analyze, is_inductive, is_safe, FixpointConfig};
use traceai::frontend::{compile, parse_bool_expr, parse_statement};
use traceai::linsolve::{Predicate, Solver};
use traceai::pathprog::{extract, has_loop, PathProgram};
use traceai::program::{Loc, ProgramAutomaton, Run};
use traceai::refine::{
    analyze_trace, audit_automaton, audit_sequence, automaton_from_pathprogram, PathProgramOptions,
    TraceAnalysis,
};

pub const P1: &str = "var x, y;
x := 0; y := 42;
while (x < 100) {
  x := x + 1;
  while (y <= 0) { y := 42; }
}
assert(x == 100 && y == 42);";

pub const TAU1: [&str; 3] = [
    "x := 0; y := 42",
    "assume(x >= 100)",
    "assume(x != 100 || y != 42)",
];
pub const TAU2: [&str; 6] = [
    "x := 0; y := 42",
    "assume(x < 100)",
    "x := x + 1",
    "assume(y > 0)",
    "assume(x >= 100)",
    "assume(x != 100 || y != 42)",
];

pub fn run_of(p: &ProgramAutomaton, word: &[&str]) -> Run {
    let mut run = Run::empty(p.initial());
    for w in word {
        let id = *p
            .out_edges(run.last())
            .iter()
            .find(|&&id| p.edge(id).stmt.to_string() == *w)
            .unwrap_or_else(|| panic!("no edge {w}"));
        run.push(id, p.edge(id));
    }
    run
}

pub fn stmts(word: &[&str]) -> Vec<Statement> {
    word.iter().map(|s| parse_statement(s).unwrap()).collect()
}

pub fn pred(s: &str) -> Predicate {
    Predicate::from_bool_expr(&parse_bool_expr(s).unwrap())
}

pub fn tau2_path_program() -> (ProgramAutomaton, PathProgram) {
    let p = compile(P1).unwrap();
    let run = run_of(&p, &TAU2);
    assert!(has_loop(&run, &p));
    let pp = extract(&run, &p, false);
    (p, pp)
}

pub fn local(p: &ProgramAutomaton, pp: &PathProgram, name: &str) -> Loc {
    let parent = p.locations().find(|l| p.name(*l) == name).unwrap();
    pp.local(parent).unwrap()
}

/// Both traces are refuted exactly where the hand proofs become false, and
/// the produced assertion sequences pass the audit.
pub fn check_traces() -> Result<(), String> {
    let solver = Solver::default();
    for (word, at) in [(&TAU1[..], 1), (&TAU2[..], 4)] {
        let trace = stmts(word);
        let TraceAnalysis::Infeasible(seq) = analyze_trace(&trace, &solver) else {
            return Err(format!("{word:?} not infeasible"));
        };
        if seq.infeasible_at != at || !seq.predicates[at + 1].is_false() {
            return Err(format!("{word:?} refuted at {}", seq.infeasible_at));
        }
        if seq.predicates.len() != trace.len() + 1 {
            return Err(format!("{word:?}: {} predicates", seq.predicates.len()));
        }
        let audit = audit_sequence(&trace, &seq, &solver);
        if !audit.ok() {
            return Err(format!("{audit:?}"));
        }
    }
    Ok(())
}

/// The interval annotation of the path program of the second trace, location
/// by location, as mutual entailment.
pub fn check_annotation() -> Result<(), String> {
    let (p, pp) = tau2_path_program();
    let ann = analyze(&pp.automaton, &FixpointConfig::new(DomainKind::Interval));
    if !is_inductive(&ann, &pp.automaton) || !is_safe(&ann, &pp.automaton) {
        return Err("annotation not an inductive safety proof".into());
    }
    let solver = Solver::default();
    let expected = [
        ("l1", "0 <= x && x <= 100 && y == 42"),
        ("l3", "0 <= x && x <= 99 && y == 42"),
        ("l4", "1 <= x && x <= 100 && y == 42"),
        ("l2", "x == 100 && y == 42"),
        ("l6", "false"),
    ];
    for (name, want) in expected {
        let got = ann.predicate(local(&p, &pp, name));
        let want = pred(want);
        if !solver.entails(&got, &want).is_yes() || !solver.entails(&want, &got).is_yes() {
            return Err(format!("{name}: {got}"));
        }
    }
    Ok(())
}

/// Edge membership in the enhanced automaton of that path program.
pub fn check_enhanced_edges() -> Result<(), String> {
    let (p, pp) = tau2_path_program();
    let ann = analyze(&pp.automaton, &FixpointConfig::new(DomainKind::Interval));
    let sigma = p.alphabet();
    let built = automaton_from_pathprogram(&pp, &ann, &sigma, &PathProgramOptions::default());
    if !built.enhanced {
        return Err("not enhanced".into());
    }
    let a = &built.automaton;
    let q = |name: &str| built.state_of[local(&p, &pp, name).0];
    let inc = parse_statement("x := x + 1").unwrap();
    // a triple with an empty post is only realized towards the false state
    let holds = |src: &str, s: &Statement, dst: &str| {
        let post = a.abstract_state(q(src)).unwrap().post(s);
        let dst = if post.is_bottom() { q("l6") } else { q(dst) };
        a.has_transition(q(src), s, dst)
    };
    let mut missing = Vec::new();
    for s in &sigma {
        let mut want = vec![
            (a.has_transition(q("l0"), s, q("l0")), "l0 -> l0"),
            (a.has_transition(q("l6"), s, q("l6")), "l6 -> l6"),
        ];
        want.push((holds("l3", s, "l1"), "l3 -> l1"));
        if *s != inc {
            want.push((holds("l1", s, "l1"), "l1 -> l1"));
            want.push((holds("l3", s, "l3"), "l3 -> l3"));
            want.push((holds("l4", s, "l1"), "l4 -> l1"));
            want.push((holds("l2", s, "l1"), "l2 -> l1"));
        }
        missing.extend(
            want.into_iter()
                .filter(|(ok, _)| !ok)
                .map(|(_, e)| format!("{e} on {s}")),
        );
    }
    if a.has_transition(q("l1"), &inc, q("l1")) || a.has_transition(q("l1"), &inc, q("l4")) {
        missing.push("unexpected x := x + 1 out of l1".into());
    }
    if !a.has_transition(q("l3"), &inc, q("l4")) {
        missing.push("l3 -> l4 on x := x + 1".into());
    }
    if !a.accepts(&stmts(&TAU2)) {
        missing.push("second trace rejected".into());
    }
    let audit = audit_automaton(a, &Solver::default());
    if !audit.ok() {
        missing.push(format!("{audit:?}"));
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(missing.join("; "))
    }
}
