//! Program automata: the control-flow graph read as a finite automaton whose
//! accepting states are the error locations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::expr::{Statement, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Loc(pub usize);

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: Loc,
    pub stmt: Statement,
    pub dst: Loc,
}

#[derive(Clone, Debug)]
pub struct ProgramAutomaton {
    vars: Vec<Var>,
    names: Vec<String>,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    initial: Loc,
    errors: BTreeSet<Loc>,
}

impl ProgramAutomaton {
    /// Assembles an automaton; duplicate edges are dropped and out-edges are
    /// kept in canonical letter order.
    pub fn new(
        vars: Vec<Var>,
        names: Vec<String>,
        edges: Vec<Edge>,
        initial: Loc,
        errors: BTreeSet<Loc>,
    ) -> Self {
        let n = names.len();
        assert!(initial.0 < n, "initial location out of range");
        assert!(
            errors.iter().all(|l| l.0 < n),
            "error location out of range"
        );
        let mut seen = BTreeSet::new();
        let mut keyed: Vec<(String, Edge)> = Vec::new();
        for e in edges {
            assert!(e.src.0 < n && e.dst.0 < n, "edge endpoint out of range");
            let key = (e.src, e.stmt.to_string(), e.dst);
            if seen.insert(key.clone()) {
                keyed.push((key.1, e));
            }
        }
        keyed.sort_by(|a, b| (a.1.src, &a.0, a.1.dst).cmp(&(b.1.src, &b.0, b.1.dst)));
        let edges: Vec<Edge> = keyed.into_iter().map(|(_, e)| e).collect();
        let mut out = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            out[e.src.0].push(i);
        }
        ProgramAutomaton {
            vars,
            names,
            edges,
            out,
            initial,
            errors,
        }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn num_locations(&self) -> usize {
        self.names.len()
    }

    pub fn locations(&self) -> impl Iterator<Item = Loc> {
        (0..self.names.len()).map(Loc)
    }

    pub fn name(&self, l: Loc) -> &str {
        &self.names[l.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// Edge ids leaving `l`, sorted by (letter, target).
    pub fn out_edges(&self, l: Loc) -> &[usize] {
        &self.out[l.0]
    }

    pub fn initial(&self) -> Loc {
        self.initial
    }

    pub fn errors(&self) -> &BTreeSet<Loc> {
        &self.errors
    }

    pub fn is_error(&self, l: Loc) -> bool {
        self.errors.contains(&l)
    }

    /// Distinct edge labels, sorted by canonical serialization.
    pub fn alphabet(&self) -> Vec<Statement> {
        let mut by_text: BTreeMap<String, Statement> = BTreeMap::new();
        for e in &self.edges {
            by_text
                .entry(e.stmt.to_string())
                .or_insert_with(|| e.stmt.clone());
        }
        by_text.into_values().collect()
    }

    /// All runs from the initial location to an error location whose word is
    /// accepted (nondeterminism resolved by trying every matching edge).
    pub fn accepts(&self, word: &[Statement]) -> bool {
        let mut current: BTreeSet<Loc> = BTreeSet::from([self.initial]);
        for letter in word {
            let mut next = BTreeSet::new();
            for l in &current {
                for &id in self.out_edges(*l) {
                    if &self.edges[id].stmt == letter {
                        next.insert(self.edges[id].dst);
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            current = next;
        }
        current.iter().any(|l| self.is_error(*l))
    }

    /// Words of length at most `max_len` leading from the initial location to
    /// an error location, each paired with one of its runs. Used by audits and
    /// brute-force oracles.
    pub fn error_runs_up_to(&self, max_len: usize) -> Vec<Run> {
        let mut out = Vec::new();
        let mut stack = vec![Run::empty(self.initial)];
        while let Some(run) = stack.pop() {
            if self.is_error(run.last()) {
                out.push(run.clone());
            }
            if run.len() == max_len {
                continue;
            }
            for &id in self.out_edges(run.last()).iter().rev() {
                let mut next = run.clone();
                next.push(id, self.edge(id));
                stack.push(next);
            }
        }
        out
    }
}

/// A path through a [`ProgramAutomaton`]: `locations[i] --statements[i]--> locations[i+1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub locations: Vec<Loc>,
    pub statements: Vec<Statement>,
    pub edges: Vec<usize>,
}

impl Run {
    pub fn empty(start: Loc) -> Run {
        Run {
            locations: vec![start],
            statements: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn push(&mut self, id: usize, edge: &Edge) {
        debug_assert_eq!(edge.src, self.last());
        self.locations.push(edge.dst);
        self.statements.push(edge.stmt.clone());
        self.edges.push(id);
    }

    pub fn last(&self) -> Loc {
        *self.locations.last().expect("runs are never empty")
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Checks that consecutive triples are edges of `p`.
    pub fn is_valid_in(&self, p: &ProgramAutomaton) -> bool {
        self.locations.first() == Some(&p.initial())
            && self.locations.len() == self.statements.len() + 1
            && self.edges.len() == self.statements.len()
            && self.edges.iter().enumerate().all(|(i, &id)| {
                let e = p.edge(id);
                e.src == self.locations[i]
                    && e.dst == self.locations[i + 1]
                    && e.stmt == self.statements[i]
            })
    }
}
