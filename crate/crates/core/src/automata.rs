//! Floyd-Hoare automata and the inclusion check against program automata.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::domains::AbstractState;
use crate::expr::Statement;
use crate::linsolve::Predicate;
use crate::program::{Loc, ProgramAutomaton, Run};

/// How a transition was justified; the Hoare audit re-checks it accordingly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Justification {
    Exact,
    Abstract,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub src: usize,
    pub stmt: Arc<Statement>,
    /// Index of `stmt` in the automaton's letter table.
    pub letter: usize,
    pub dst: usize,
    pub why: Justification,
}

#[derive(Clone, Debug)]
pub struct FloydHoareAutomaton {
    annotations: Vec<Predicate>,
    abstracts: Vec<Option<AbstractState>>,
    labels: Vec<String>,
    transitions: Vec<Transition>,
    letters: Vec<Arc<Statement>>,
    letter_ids: HashMap<Arc<Statement>, usize>,
    /// Per state, letter to sorted targets.
    out: Vec<BTreeMap<usize, Vec<usize>>>,
    initial: usize,
    accepting: BTreeSet<usize>,
}

impl Default for FloydHoareAutomaton {
    fn default() -> Self {
        Self::empty()
    }
}

impl FloydHoareAutomaton {
    /// A single initial state annotated `true`; accepts nothing.
    pub fn empty() -> Self {
        let mut a = Self::blank();
        a.add_state(Predicate::tru(), None);
        a
    }

    /// An automaton without states; the first added state becomes initial.
    pub fn blank() -> Self {
        FloydHoareAutomaton {
            annotations: Vec::new(),
            abstracts: Vec::new(),
            labels: Vec::new(),
            transitions: Vec::new(),
            letters: Vec::new(),
            letter_ids: HashMap::new(),
            out: Vec::new(),
            initial: 0,
            accepting: BTreeSet::new(),
        }
    }

    pub fn add_state(&mut self, annotation: Predicate, abs: Option<AbstractState>) -> usize {
        let id = self.annotations.len();
        self.annotations.push(annotation);
        self.abstracts.push(abs);
        self.labels.push(format!("q{id}"));
        self.out.push(BTreeMap::new());
        id
    }

    pub fn set_label(&mut self, q: usize, label: impl Into<String>) {
        self.labels[q] = label.into();
    }

    pub fn set_initial(&mut self, q: usize) {
        self.initial = q;
    }

    pub fn set_accepting(&mut self, q: usize) {
        self.accepting.insert(q);
    }

    fn intern(&mut self, stmt: &Statement) -> usize {
        if let Some(&id) = self.letter_ids.get(stmt) {
            return id;
        }
        let rc = Arc::new(stmt.clone());
        self.letters.push(rc.clone());
        self.letter_ids.insert(rc, self.letters.len() - 1);
        self.letters.len() - 1
    }

    /// Adds a transition unless it is already present.
    pub fn add_transition(
        &mut self,
        src: usize,
        stmt: Statement,
        dst: usize,
        why: Justification,
    ) -> bool {
        let letter = self.intern(&stmt);
        self.add_by_letter(src, letter, dst, why)
    }

    fn add_by_letter(&mut self, src: usize, letter: usize, dst: usize, why: Justification) -> bool {
        let targets = self.out[src].entry(letter).or_default();
        match targets.binary_search(&dst) {
            Ok(_) => return false,
            Err(pos) => targets.insert(pos, dst),
        }
        self.transitions.push(Transition {
            src,
            stmt: self.letters[letter].clone(),
            letter,
            dst,
            why,
        });
        true
    }

    pub fn num_states(&self) -> usize {
        self.annotations.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.accepting
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting.contains(&q)
    }

    pub fn annotation(&self, q: usize) -> &Predicate {
        &self.annotations[q]
    }

    pub fn abstract_state(&self, q: usize) -> Option<&AbstractState> {
        self.abstracts[q].as_ref()
    }

    pub fn label(&self, q: usize) -> &str {
        &self.labels[q]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Statements occurring on transitions, indexed by letter.
    pub fn letters(&self) -> &[Arc<Statement>] {
        &self.letters
    }

    pub fn letter_of(&self, stmt: &Statement) -> Option<usize> {
        self.letter_ids.get(stmt).copied()
    }

    pub fn has_transition(&self, src: usize, stmt: &Statement, dst: usize) -> bool {
        self.successors(src, stmt).any(|d| d == dst)
    }

    pub fn successors(&self, q: usize, stmt: &Statement) -> impl Iterator<Item = usize> + '_ {
        self.letter_of(stmt)
            .and_then(|a| self.out[q].get(&a))
            .into_iter()
            .flatten()
            .copied()
    }

    pub fn state_with_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn accepts(&self, word: &[Statement]) -> bool {
        let mut cur: BTreeSet<usize> = BTreeSet::from([self.initial]);
        for st in word {
            let Some(a) = self.letter_of(st) else {
                return false;
            };
            cur = cur
                .iter()
                .filter_map(|q| self.out[*q].get(&a))
                .flatten()
                .copied()
                .collect();
            if cur.is_empty() {
                return false;
            }
        }
        cur.iter().any(|q| self.is_accepting(*q))
    }

    /// Disjoint union behind a fresh initial state annotated `true` that
    /// copies the out-transitions of both initial states.
    pub fn union(&self, other: &FloydHoareAutomaton) -> FloydHoareAutomaton {
        let mut u = FloydHoareAutomaton::empty();
        u.absorb(self);
        u.absorb(other);
        u
    }

    /// Adds a copy of `src` whose initial out-transitions are duplicated at
    /// this automaton's initial state.
    pub fn absorb(&mut self, src: &FloydHoareAutomaton) {
        let off = self.num_states();
        self.annotations.extend(src.annotations.iter().cloned());
        self.abstracts.extend(src.abstracts.iter().cloned());
        self.labels.extend(src.labels.iter().cloned());
        self.out.resize(off + src.num_states(), BTreeMap::new());
        self.accepting.extend(src.accepting.iter().map(|q| q + off));
        if src.is_accepting(src.initial) {
            self.accepting.insert(self.initial);
        }
        let map: Vec<usize> = src.letters.iter().map(|l| self.intern(l)).collect();
        for t in &src.transitions {
            self.add_by_letter(t.src + off, map[t.letter], t.dst + off, t.why);
            if t.src == src.initial {
                self.add_by_letter(self.initial, map[t.letter], t.dst + off, t.why);
            }
        }
    }

    /// Like [`absorb`](Self::absorb), but states of `src` are identified
    /// with existing states carrying the same annotation. Every transition
    /// stays a valid triple, so the result is again a Floyd-Hoare automaton
    /// and its language contains that of the union.
    pub fn merge(&mut self, src: &FloydHoareAutomaton) {
        let mut index: HashMap<&Predicate, usize> = HashMap::with_capacity(self.num_states() + 1);
        index.insert(&self.annotations[self.initial], self.initial);
        for (q, a) in self.annotations.iter().enumerate() {
            index.entry(a).or_insert(q);
        }
        let mut fresh = Vec::new();
        let map: Vec<usize> = src
            .annotations
            .iter()
            .enumerate()
            .map(|(q, a)| match index.get(a) {
                Some(&t) => t,
                None => {
                    fresh.push(q);
                    self.annotations.len() + fresh.len() - 1
                }
            })
            .collect();
        let mut conflicts = Vec::new();
        for (q, &t) in map.iter().enumerate() {
            if t < self.annotations.len() && self.abstracts[t] != src.abstracts[q] {
                conflicts.push(t);
            }
        }
        for q in fresh {
            let id = self.add_state(src.annotations[q].clone(), src.abstracts[q].clone());
            self.labels[id] = src.labels[q].clone();
        }
        // the same predicate from different domains: fall back to exact checks
        for t in conflicts {
            self.abstracts[t] = None;
        }
        for q in &src.accepting {
            self.accepting.insert(map[*q]);
        }
        if src.is_accepting(src.initial) {
            self.accepting.insert(self.initial);
        }
        let letters: Vec<usize> = src.letters.iter().map(|l| self.intern(l)).collect();
        for t in &src.transitions {
            let s = if t.src == src.initial {
                self.initial
            } else {
                map[t.src]
            };
            self.add_by_letter(s, letters[t.letter], map[t.dst], t.why);
        }
    }

    /// GraphViz rendering. With an alphabet, parallel transitions covering
    /// all or most of it are printed as `Σ` or `Σ∖{…}`.
    pub fn to_dot(&self, alphabet: Option<&[Statement]>) -> String {
        let mut out = String::from("digraph A {\n  rankdir=LR;\n");
        for q in 0..self.num_states() {
            let shape = if self.is_accepting(q) {
                "doublecircle"
            } else {
                "circle"
            };
            let init = if q == self.initial {
                ", penwidth=2"
            } else {
                ""
            };
            writeln!(
                out,
                "  q{q} [shape={shape}{init}, label=\"{}\\n{}\"];",
                escape(&self.labels[q]),
                escape(&self.annotations[q].to_string())
            )
            .unwrap();
        }
        let mut grouped: BTreeMap<(usize, usize), BTreeSet<String>> = BTreeMap::new();
        for t in &self.transitions {
            grouped
                .entry((t.src, t.dst))
                .or_default()
                .insert(t.stmt.to_string());
        }
        let sigma: Option<BTreeSet<String>> =
            alphabet.map(|a| a.iter().map(|s| s.to_string()).collect());
        for ((s, d), labels) in grouped {
            let text = match &sigma {
                Some(all) if labels.is_superset(all) => {
                    let extra: Vec<_> = labels.difference(all).cloned().collect();
                    if extra.is_empty() {
                        "Σ".to_string()
                    } else {
                        format!(
                            "Σ\\n{}",
                            extra
                                .iter()
                                .map(|e| escape(e))
                                .collect::<Vec<_>>()
                                .join("\\n")
                        )
                    }
                }
                Some(all)
                    if all.len() > 2
                        && all.difference(&labels).count() * 2 < all.len()
                        && labels.is_subset(all) =>
                {
                    let missing: Vec<_> = all.difference(&labels).map(|e| escape(e)).collect();
                    format!("Σ∖{{{}}}", missing.join(", "))
                }
                _ => labels
                    .iter()
                    .map(|e| escape(e))
                    .collect::<Vec<_>>()
                    .join("\\n"),
            };
            writeln!(out, "  q{s} -> q{d} [label=\"{text}\"];").unwrap();
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// `None` iff every word of `ap` is accepted by `ad`; otherwise a run of
/// `ap` whose word `ad` rejects, shortest first and then least by statement
/// serialization.
pub fn inclusion_counterexample(ap: &ProgramAutomaton, ad: &FloydHoareAutomaton) -> Option<Run> {
    // letters of ap, in canonical order
    let alphabet = ap.alphabet();
    let letter_of: HashMap<&Statement, usize> =
        alphabet.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let to_ap: Vec<Option<usize>> = ad
        .letters()
        .iter()
        .map(|l| letter_of.get(&**l).copied())
        .collect();
    let mut delta: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); alphabet.len()]; ad.num_states()];
    for t in ad.transitions() {
        if let Some(a) = to_ap[t.letter] {
            delta[t.src][a].push(t.dst);
        }
    }
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let mut subset_id: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut intern = |s: Vec<usize>, subsets: &mut Vec<Vec<usize>>| -> usize {
        *subset_id.entry(s.clone()).or_insert_with(|| {
            subsets.push(s);
            subsets.len() - 1
        })
    };
    let mut step_memo: HashMap<(usize, usize), usize> = HashMap::new();
    let accepting_subset = |s: &[usize]| s.iter().any(|q| ad.is_accepting(*q));

    // out-edges of each location with their letters, sorted by letter
    let out: Vec<Vec<(usize, usize)>> = ap
        .locations()
        .map(|l| {
            let mut v: Vec<(usize, usize)> = ap
                .out_edges(l)
                .iter()
                .map(|&id| (letter_of[&ap.edge(id).stmt], id))
                .collect();
            v.sort_by_key(|(a, id)| (*a, ap.edge(*id).dst));
            v
        })
        .collect();

    let start = (ap.initial(), intern(vec![ad.initial()], &mut subsets));
    // product node: program location and subset id
    type Node = (Loc, usize);
    let mut parent: HashMap<Node, Option<(Node, usize)>> = HashMap::new();
    parent.insert(start, None);
    let mut queue = VecDeque::from([start]);
    let is_cex = |node: &(Loc, usize), subsets: &Vec<Vec<usize>>| {
        ap.is_error(node.0) && !accepting_subset(&subsets[node.1])
    };
    let mut found = if is_cex(&start, &subsets) {
        Some(start)
    } else {
        None
    };
    while found.is_none() {
        let Some(node) = queue.pop_front() else { break };
        for &(a, id) in &out[node.0 .0] {
            let next_subset = match step_memo.get(&(node.1, a)) {
                Some(&s) => s,
                None => {
                    let mut succ: Vec<usize> = subsets[node.1]
                        .iter()
                        .flat_map(|q| delta[*q][a].iter().copied())
                        .collect();
                    succ.sort_unstable();
                    succ.dedup();
                    let s = intern(succ, &mut subsets);
                    step_memo.insert((node.1, a), s);
                    s
                }
            };
            let next = (ap.edge(id).dst, next_subset);
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next, Some((node, id)));
            if is_cex(&next, &subsets) {
                found = Some(next);
                break;
            }
            queue.push_back(next);
        }
    }
    let mut node = found?;
    let mut ids = Vec::new();
    while let Some((prev, id)) = parent[&node] {
        ids.push(id);
        node = prev;
    }
    ids.reverse();
    let mut run = Run::empty(ap.initial());
    for id in ids {
        run.push(id, ap.edge(id));
    }
    Some(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_statement;

    fn st(s: &str) -> Statement {
        parse_statement(s).unwrap()
    }

    fn word_automaton(word: &[Statement]) -> FloydHoareAutomaton {
        let mut a = FloydHoareAutomaton::empty();
        let mut q = 0;
        for s in word {
            let n = a.add_state(Predicate::tru(), None);
            a.add_transition(q, s.clone(), n, Justification::Exact);
            q = n;
        }
        a.set_accepting(q);
        a
    }

    #[test]
    fn empty_automaton_rejects_everything() {
        let a = FloydHoareAutomaton::empty();
        assert!(!a.accepts(&[]));
        assert!(!a.accepts(&[st("x := 1")]));
        assert!(a.to_dot(None).contains("q0"));
    }

    #[test]
    fn union_of_single_words() {
        let w1 = vec![st("x := 1"), st("assume(x > 1)")];
        let w2 = vec![st("assume(x < 0)")];
        let u = word_automaton(&w1).union(&word_automaton(&w2));
        assert!(u.accepts(&w1) && u.accepts(&w2));
        assert!(!u.accepts(&[st("x := 1")]));
        assert_eq!(u.num_states(), 3 + 2 + 1);
        let id = FloydHoareAutomaton::empty().union(&word_automaton(&w1));
        assert!(id.accepts(&w1) && !id.accepts(&w2));
    }

    #[test]
    fn dot_is_deterministic() {
        let a = word_automaton(&[st("x := 1"), st("assume(x > 1)")]);
        assert_eq!(a.to_dot(None), a.clone().to_dot(None));
        assert!(a.to_dot(None).contains("doublecircle"));
    }
}
