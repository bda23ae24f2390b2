//! Path programs induced by counterexample runs.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::program::{Edge, Loc, ProgramAutomaton, Run};

/// Does the run revisit a location, or use a statement that labels an edge
/// on a cycle of `p`?
pub fn has_loop(run: &Run, p: &ProgramAutomaton) -> bool {
    let distinct: BTreeSet<Loc> = run.locations.iter().copied().collect();
    if distinct.len() < run.locations.len() {
        return true;
    }
    let cyclic = cyclic_edges(p);
    let labels: BTreeSet<String> = run.statements.iter().map(|s| s.to_string()).collect();
    p.edges()
        .iter()
        .enumerate()
        .any(|(id, e)| cyclic[id] && labels.contains(&e.stmt.to_string()))
}

/// Edges whose endpoints share a strongly connected component.
pub fn cyclic_edges(p: &ProgramAutomaton) -> Vec<bool> {
    let mut g: DiGraph<(), ()> = DiGraph::new();
    let nodes: Vec<_> = (0..p.num_locations()).map(|_| g.add_node(())).collect();
    for e in p.edges() {
        g.add_edge(nodes[e.src.0], nodes[e.dst.0], ());
    }
    let mut comp = vec![0usize; p.num_locations()];
    for (i, scc) in tarjan_scc(&g).iter().enumerate() {
        for n in scc {
            comp[n.index()] = i;
        }
    }
    p.edges()
        .iter()
        .map(|e| e.src == e.dst || comp[e.src.0] == comp[e.dst.0])
        .collect()
}

#[derive(Clone, Debug)]
pub struct PathProgram {
    pub automaton: ProgramAutomaton,
    /// Location of the parent program for each location of `automaton`.
    pub origin: Vec<Loc>,
    pub error: Loc,
    key: String,
}

impl PathProgram {
    /// Sorted serialization of the edge set and error location.
    pub fn key(&self) -> &str {
        &self.key
    }

    /// The location of `automaton` corresponding to a parent location.
    pub fn local(&self, parent: Loc) -> Option<Loc> {
        self.origin.iter().position(|l| *l == parent).map(Loc)
    }
}

/// The sub-automaton made of the edges the run traverses, or with
/// `by_label`, of every edge between visited locations whose label occurs
/// in the run.
pub fn extract(run: &Run, p: &ProgramAutomaton, by_label: bool) -> PathProgram {
    let visited: BTreeSet<Loc> = run.locations.iter().copied().collect();
    let ids: BTreeSet<usize> = if by_label {
        let labels: BTreeSet<String> = run.statements.iter().map(|s| s.to_string()).collect();
        p.edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                visited.contains(&e.src)
                    && visited.contains(&e.dst)
                    && labels.contains(&e.stmt.to_string())
            })
            .map(|(i, _)| i)
            .collect()
    } else {
        run.edges.iter().copied().collect()
    };
    let mut locs: BTreeSet<Loc> = ids
        .iter()
        .flat_map(|&i| [p.edge(i).src, p.edge(i).dst])
        .collect();
    locs.insert(p.initial());
    let origin: Vec<Loc> = locs.iter().copied().collect();
    let local: BTreeMap<Loc, Loc> = origin
        .iter()
        .enumerate()
        .map(|(i, l)| (*l, Loc(i)))
        .collect();
    let edges: Vec<Edge> = ids
        .iter()
        .map(|&i| {
            let e = p.edge(i);
            Edge {
                src: local[&e.src],
                stmt: e.stmt.clone(),
                dst: local[&e.dst],
            }
        })
        .collect();
    let error = run.last();
    let names = origin.iter().map(|l| p.name(*l).to_string()).collect();
    let automaton = ProgramAutomaton::new(
        p.vars().to_vec(),
        names,
        edges,
        local[&p.initial()],
        BTreeSet::from([local[&error]]),
    );
    let mut lines: Vec<String> = ids
        .iter()
        .map(|&i| {
            let e = p.edge(i);
            format!("{} -[{}]-> {}", e.src, e.stmt, e.dst)
        })
        .collect();
    lines.sort();
    lines.push(format!("error {error}"));
    PathProgram {
        automaton,
        origin,
        error,
        key: lines.join("\n"),
    }
}

/// Keys of the path programs analyzed so far.
#[derive(Clone, Debug, Default)]
pub struct PathProgramCache {
    keys: BTreeSet<String>,
}

impl PathProgramCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn seen_before(&self, pp: &PathProgram) -> bool {
        self.keys.contains(pp.key())
    }

    pub fn remember(&mut self, pp: &PathProgram) {
        self.keys.insert(pp.key().to_string());
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}
