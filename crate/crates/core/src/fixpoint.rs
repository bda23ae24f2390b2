//! Worklist fixpoint engine over program automata.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::domains::{AbstractState, DomainKind, Env};
use crate::linsolve::Predicate;
use crate::program::{Loc, ProgramAutomaton};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixpointConfig {
    pub domain: DomainKind,
    /// Plain joins at a loop head before widening kicks in.
    pub widen_delay: usize,
    /// Maximal number of disjuncts per location.
    pub disjuncts: usize,
    pub narrowing: bool,
}

impl FixpointConfig {
    pub fn new(domain: DomainKind) -> Self {
        FixpointConfig {
            domain,
            widen_delay: 3,
            disjuncts: 1,
            narrowing: true,
        }
    }
}

/// Per-location disjunctive abstract states. An empty list is bottom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    kind: DomainKind,
    env: Arc<Env>,
    states: Vec<Vec<AbstractState>>,
    cap: usize,
    iterations: usize,
}

impl Annotation {
    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn env(&self) -> &Arc<Env> {
        &self.env
    }

    pub fn at(&self, l: Loc) -> &[AbstractState] {
        &self.states[l.0]
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Location updates performed while computing the annotation.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn joined(&self, l: Loc) -> AbstractState {
        join_all(self.kind, &self.env, &self.states[l.0])
    }

    pub fn is_bottom_at(&self, l: Loc) -> bool {
        self.states[l.0].iter().all(AbstractState::is_bottom)
    }

    /// Disjunction of the disjuncts' predicates.
    pub fn predicate(&self, l: Loc) -> Predicate {
        self.states[l.0]
            .iter()
            .fold(Predicate::fls(), |acc, s| acc.or(&s.to_predicate()))
    }
}

fn join_all(kind: DomainKind, env: &Arc<Env>, xs: &[AbstractState]) -> AbstractState {
    xs.iter()
        .fold(AbstractState::bottom(kind, env.clone()), |acc, s| {
            acc.join(s)
        })
}

/// Every disjunct of `a` lies below the join of `b`.
fn list_leq(kind: DomainKind, env: &Arc<Env>, a: &[AbstractState], b: &[AbstractState]) -> bool {
    if a.iter().all(|x| b.iter().any(|y| x.leq(y))) {
        return true;
    }
    let jb = join_all(kind, env, b);
    a.iter().all(|x| x.leq(&jb))
}

/// Drops bottoms and subsumed disjuncts; beyond the cap, the tail is joined
/// into the last kept disjunct.
fn merge(mut xs: Vec<AbstractState>, cap: usize) -> Vec<AbstractState> {
    xs.retain(|s| !s.is_bottom());
    let mut out: Vec<AbstractState> = Vec::new();
    for s in xs {
        if out.iter().any(|o| s.leq(o)) {
            continue;
        }
        out.retain(|o| !o.leq(&s));
        out.push(s);
    }
    if out.len() > cap {
        let tail = out.split_off(cap - 1);
        let mut it = tail.into_iter();
        let first = it.next().unwrap();
        out.push(it.fold(first, |acc, s| acc.join(&s)));
    }
    out
}

struct Graph {
    rpo: Vec<Loc>,
    order: Vec<usize>,
    heads: Vec<bool>,
    preds: Vec<Vec<usize>>,
}

fn graph(p: &ProgramAutomaton) -> Graph {
    let n = p.num_locations();
    let mut preds = vec![Vec::new(); n];
    for (id, e) in p.edges().iter().enumerate() {
        preds[e.dst.0].push(id);
    }
    // iterative DFS recording post-order and back-edge targets
    let mut heads = vec![false; n];
    let mut state = vec![0u8; n];
    let mut post = Vec::new();
    let mut stack: Vec<(usize, usize)> = vec![(p.initial().0, 0)];
    state[p.initial().0] = 1;
    while let Some(&mut (v, ref mut i)) = stack.last_mut() {
        let outs = p.out_edges(Loc(v));
        if *i < outs.len() {
            let w = p.edge(outs[*i]).dst.0;
            *i += 1;
            match state[w] {
                0 => {
                    state[w] = 1;
                    stack.push((w, 0));
                }
                1 => heads[w] = true,
                _ => {}
            }
        } else {
            state[v] = 2;
            post.push(Loc(v));
            stack.pop();
        }
    }
    post.reverse();
    let mut order = vec![usize::MAX; n];
    for (i, l) in post.iter().enumerate() {
        order[l.0] = i;
    }
    Graph {
        rpo: post,
        order,
        heads,
        preds,
    }
}

/// Computes an inductive annotation of `p`.
pub fn analyze(p: &ProgramAutomaton, cfg: &FixpointConfig) -> Annotation {
    let mut ann = ascend(p, cfg, None);
    if cfg.narrowing {
        narrow(p, &mut ann);
    }
    ann
}

/// Re-runs the ascending iteration from `seed`; a fixpoint is returned as is.
pub fn stabilize(p: &ProgramAutomaton, cfg: &FixpointConfig, seed: &Annotation) -> Annotation {
    ascend(p, cfg, Some(seed))
}

fn incoming(p: &ProgramAutomaton, g: &Graph, ann: &Annotation, v: usize) -> Vec<AbstractState> {
    let mut xs = Vec::new();
    if v == p.initial().0 {
        xs.push(AbstractState::top(ann.kind, ann.env.clone()));
    }
    for &id in &g.preds[v] {
        let e = p.edge(id);
        for s in &ann.states[e.src.0] {
            xs.push(s.post(&e.stmt));
        }
    }
    xs
}

fn ascend(p: &ProgramAutomaton, cfg: &FixpointConfig, seed: Option<&Annotation>) -> Annotation {
    let env = Arc::new(Env::new(p.vars().iter().cloned()));
    let cap = cfg.disjuncts.max(1);
    let g = graph(p);
    let n = p.num_locations();
    let mut ann = match seed {
        Some(s) => Annotation {
            iterations: 0,
            ..s.clone()
        },
        None => Annotation {
            kind: cfg.domain,
            env: env.clone(),
            states: vec![Vec::new(); n],
            cap,
            iterations: 0,
        },
    };
    let (kind, env) = (ann.kind, ann.env.clone());
    let mut visits = vec![0usize; n];
    // a location updated this often is widened even if it is no DFS head
    let force = 4 * (cfg.widen_delay + 2);
    let mut work: BTreeSet<usize> = g.rpo.iter().map(|l| g.order[l.0]).collect();
    while let Some(i) = work.pop_first() {
        let v = g.rpo[i].0;
        let old = ann.states[v].clone();
        let mut cand = old.clone();
        cand.extend(incoming(p, &g, &ann, v));
        let mut cand = merge(cand, cap);
        if list_leq(kind, &env, &cand, &old) {
            continue;
        }
        if (g.heads[v] && visits[v] >= cfg.widen_delay) || visits[v] >= force {
            let wide = join_all(kind, &env, &old).widen(&join_all(kind, &env, &cand));
            cand = merge(vec![wide], cap);
        }
        visits[v] += 1;
        ann.iterations += 1;
        ann.states[v] = cand;
        for &id in p.out_edges(Loc(v)) {
            work.insert(g.order[p.edge(id).dst.0]);
        }
    }
    ann
}

/// One descending pass in reverse post-order, kept only if it is inductive.
fn narrow(p: &ProgramAutomaton, ann: &mut Annotation) {
    let g = graph(p);
    let mut next = ann.clone();
    for l in &g.rpo {
        let xs = incoming(p, &g, &next, l.0);
        let m = merge(xs, next.cap);
        if list_leq(next.kind, &next.env, &m, &ann.states[l.0]) {
            next.states[l.0] = m;
            next.iterations += 1;
        }
    }
    if is_inductive(&next, p) {
        *ann = next;
    }
}

/// Every error location is bottom.
pub fn is_safe(ann: &Annotation, p: &ProgramAutomaton) -> bool {
    p.errors().iter().all(|l| ann.is_bottom_at(*l))
}

/// The initial location covers every state, and every edge maps each source
/// disjunct below the join of the target's disjuncts.
pub fn is_inductive(ann: &Annotation, p: &ProgramAutomaton) -> bool {
    let top = AbstractState::top(ann.kind, ann.env.clone());
    if !top.leq(&ann.joined(p.initial())) {
        return false;
    }
    p.edges().iter().all(|e| {
        let target = ann.joined(e.dst);
        ann.at(e.src).iter().all(|d| d.post(&e.stmt).leq(&target))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{compile, lower_with, parse_program, LowerOptions};

    #[test]
    fn unbounded_counter_widens_to_infinity() {
        let src = "var x; x := 0; while (true) { x := x + 1; } ";
        let p = lower_with(
            &parse_program(src).unwrap(),
            LowerOptions {
                trim: false,
                ..Default::default()
            },
        );
        let ann = analyze(&p, &FixpointConfig::new(DomainKind::Interval));
        let head = p
            .edges()
            .iter()
            .find(|e| e.stmt.to_string() == "x := x + 1")
            .unwrap()
            .src;
        let head = p.edges().iter().find(|e| e.dst == head).unwrap().src;
        assert_eq!(ann.predicate(head).to_string(), "x >= 0");
        assert!(is_inductive(&ann, &p));
    }

    #[test]
    fn havoc_reaches_error() {
        let p = compile("var x; havoc x; assert(x < 0);").unwrap();
        let ann = analyze(&p, &FixpointConfig::new(DomainKind::Interval));
        assert!(!is_safe(&ann, &p));
    }

    #[test]
    fn merge_respects_cap() {
        let env = Arc::new(Env::new([crate::expr::Var::new("x")]));
        let mk = |c: i128| {
            let mut s = AbstractState::top(DomainKind::Interval, env.clone());
            let st = crate::frontend::parse_statement(&format!("x := {c}")).unwrap();
            s = s.post(&st);
            s
        };
        let m = merge(vec![mk(0), mk(5), mk(9), mk(0)], 2);
        assert_eq!(m.len(), 2);
        assert_eq!(m[1].to_predicate().to_string(), "x >= 5 && x <= 9");
    }
}
