//! Random automata and a word-enumeration oracle for inclusion.

use std::collections::BTreeSet;

use proptest::prelude::*;
use traceai::automata::{inclusion_counterexample, FloydHoareAutomaton, Justification};
use traceai::expr::{Statement, Var};
use traceai::frontend::parse_statement;
use traceai::linsolve::Predicate;
use traceai::program::{Edge, Loc, ProgramAutomaton};

pub const INCLUSION_CASES: u32 = 200;

pub const LETTERS: [&str; 5] = [
    "x := 0",
    "x := x + 1",
    "assume(x > 0)",
    "assume(x < 0)",
    "havoc x",
];
pub const MAX_LEN: usize = 8;

pub fn letter(i: usize) -> Statement {
    parse_statement(LETTERS[i]).unwrap()
}

#[derive(Clone, Debug)]
pub struct Raw {
    pub states: usize,
    pub edges: Vec<(usize, usize, usize)>,
    pub accepting: Vec<bool>,
}

pub fn raw(max_states: usize, letters: usize) -> impl Strategy<Value = Raw> {
    (1..=max_states).prop_flat_map(move |n| {
        (
            prop::collection::vec((0..n, 0..letters, 0..n), 0..=3 * n),
            prop::collection::vec(prop::bool::weighted(0.3), n),
        )
            .prop_map(move |(edges, accepting)| Raw {
                states: n,
                edges,
                accepting,
            })
    })
}

pub fn program(r: &Raw) -> ProgramAutomaton {
    let edges = r
        .edges
        .iter()
        .map(|&(s, a, d)| Edge {
            src: Loc(s),
            stmt: letter(a),
            dst: Loc(d),
        })
        .collect();
    let errors = (0..r.states).filter(|q| r.accepting[*q]).map(Loc).collect();
    let names = (0..r.states).map(|i| format!("l{i}")).collect();
    ProgramAutomaton::new(vec![Var::new("x")], names, edges, Loc(0), errors)
}

pub fn floyd_hoare(r: &Raw) -> FloydHoareAutomaton {
    let mut a = FloydHoareAutomaton::empty();
    for _ in 1..r.states {
        a.add_state(Predicate::tru(), None);
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

/// Shortest word accepted by `ap` and rejected by `ad`, least in alphabet
/// order among those, by exploring words of increasing length.
pub fn brute_counterexample(
    ap: &ProgramAutomaton,
    ad: &FloydHoareAutomaton,
) -> Option<Vec<Statement>> {
    let alphabet = ap.alphabet();
    type Node = (Vec<usize>, BTreeSet<Loc>, BTreeSet<usize>);
    let mut layer: Vec<Node> = vec![(
        Vec::new(),
        BTreeSet::from([ap.initial()]),
        BTreeSet::from([ad.initial()]),
    )];
    for _ in 0..=MAX_LEN {
        let hit = layer.iter().find(|(_, l, q)| {
            l.iter().any(|l| ap.is_error(*l)) && !q.iter().any(|q| ad.is_accepting(*q))
        });
        if let Some((w, _, _)) = hit {
            return Some(w.iter().map(|i| alphabet[*i].clone()).collect());
        }
        let mut next = Vec::new();
        for (w, locs, qs) in &layer {
            for (i, a) in alphabet.iter().enumerate() {
                let l2: BTreeSet<Loc> = locs
                    .iter()
                    .flat_map(|l| ap.out_edges(*l).iter().map(|id| ap.edge(*id)))
                    .filter(|e| &e.stmt == a)
                    .map(|e| e.dst)
                    .collect();
                if l2.is_empty() {
                    continue;
                }
                let q2: BTreeSet<usize> = qs.iter().flat_map(|q| ad.successors(*q, a)).collect();
                let mut v = w.clone();
                v.push(i);
                next.push((v, l2, q2));
            }
        }
        layer = next;
    }
    None
}

pub fn inclusion_case() -> impl Strategy<Value = (Raw, Raw)> {
    (raw(5, 4), raw(5, 5))
}

pub fn check_inclusion((p, d): (Raw, Raw)) -> Result<(), TestCaseError> {
    let ap = program(&p);
    let ad = floyd_hoare(&d);
    let brute = brute_counterexample(&ap, &ad);
    match inclusion_counterexample(&ap, &ad) {
        Some(run) => {
            prop_assert!(run.is_valid_in(&ap));
            prop_assert!(ap.accepts(&run.statements) && !ad.accepts(&run.statements));
            match brute {
                Some(w) => prop_assert_eq!(w, run.statements),
                None => prop_assert!(run.len() > MAX_LEN),
            }
        }
        None => prop_assert!(brute.is_none()),
    }
    Ok(())
}
