//! Refutation artifacts: strongest postconditions, trace feasibility with
//! assertion sequences, Hoare checks, and the data automata built from
//! infeasibility proofs and from path-program fixpoints.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use crate::automata::{FloydHoareAutomaton, Justification, Transition};
use crate::domains::{AbstractState, DomainKind, Env};
use crate::expr::{BoolExpr, CmpOp, Int, LinExpr, Statement, Var};
use crate::fixpoint::Annotation;
use crate::linsolve::{
    eliminate, model_on, simplify_cube, Answer, Atom, Cube, Lit, Predicate, SatResult, Solver,
};
use crate::par::par_map;
use crate::pathprog::PathProgram;
use crate::semantics::{execute_trace, validate_execution, ConcreteState, Execution, TraceOutcome};

fn equality(x: &Var, e: &LinExpr) -> Predicate {
    Predicate::from_bool_expr(&BoolExpr::cmp(
        LinExpr::var(x.clone()),
        CmpOp::Eq,
        e.clone(),
    ))
}

/// Strongest postcondition. Exact except where eliminating a variable has to
/// drop a congruence (the result is then weaker, still a valid postcondition).
pub fn sp(phi: &Predicate, s: &Statement, solver: &Solver) -> Predicate {
    if phi.is_false() {
        return Predicate::fls();
    }
    match s {
        Statement::Assume(b) => solver.prune(&phi.and(&Predicate::from_bool_expr(b))),
        Statement::Seq(parts) => parts.iter().fold(phi.clone(), |acc, p| sp(&acc, p, solver)),
        Statement::Havoc(x) => eliminate(phi, x).predicate,
        Statement::Assign(x, e) => {
            let a = e.coeff(x);
            if a == 0 {
                return eliminate(phi, x).predicate.and(&equality(x, e));
            }
            if a.abs() == 1 {
                // x_old = a * (x - rest)
                let inverse = e
                    .checked_sub(&LinExpr::term(x.clone(), a))
                    .and_then(|rest| LinExpr::var(x.clone()).checked_sub(&rest))
                    .and_then(|d| d.checked_scale(a));
                if let Some(p) = inverse.and_then(|inv| phi.substitute(x, &inv)) {
                    return p;
                }
            }
            let old = Var::new(&format!("{x}'"));
            let renamed = phi.rename(x, &old);
            let shifted = e.rename(x, &old);
            eliminate(&renamed.and(&equality(x, &shifted)), &old).predicate
        }
    }
}

/// Drops every atom implied by the rest of its cube.
pub fn simplify(p: &Predicate, solver: &Solver) -> Predicate {
    let cubes = p.cubes().map(|c| {
        let mut cube = c.clone();
        for a in c.iter() {
            let mut rest = cube.clone();
            rest.remove(a);
            if solver.entails(
                &Predicate::from_cube(rest.clone()),
                &Predicate::atom(a.clone()),
            ) == Answer::Yes
            {
                cube = rest;
            }
        }
        cube
    });
    Predicate::from_cubes(cubes.collect::<Vec<_>>())
}

/// `φ0 … φn` for a trace `s0 … s(n-1)`; `φ0` is true and `φ(at+1)` is the
/// first false one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssertionSequence {
    pub predicates: Vec<Predicate>,
    /// Index of the statement after which the assertion becomes false.
    pub infeasible_at: usize,
}

#[derive(Clone, Debug)]
pub enum TraceAnalysis {
    Feasible(Execution),
    Infeasible(AssertionSequence),
    Unknown(String),
}

impl TraceAnalysis {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, TraceAnalysis::Infeasible(_))
    }
}

pub fn analyze_trace(trace: &[Statement], solver: &Solver) -> TraceAnalysis {
    analyze_trace_with(trace, solver, &HoareMemo::new())
}

/// [`analyze_trace`] reusing the postconditions of earlier calls.
pub fn analyze_trace_with(trace: &[Statement], solver: &Solver, memo: &HoareMemo) -> TraceAnalysis {
    let mut preds = vec![Predicate::tru()];
    for (i, s) in trace.iter().enumerate() {
        let next = memo.sp(preds.last().unwrap(), s, solver);
        let dead = next.is_false();
        preds.push(next);
        if dead {
            let mut predicates: Vec<Predicate> =
                preds.iter().map(|p| memo.simplify(p, solver)).collect();
            predicates.resize(trace.len() + 1, Predicate::fls());
            return TraceAnalysis::Infeasible(AssertionSequence {
                predicates,
                infeasible_at: i,
            });
        }
    }
    match find_execution(trace, solver) {
        Ok(Some(exec)) => TraceAnalysis::Feasible(exec),
        Ok(None) => TraceAnalysis::Unknown("infeasible, but no assertion sequence found".into()),
        Err(reason) => TraceAnalysis::Unknown(reason),
    }
}

const SEARCH_NODES: usize = 10_000;

/// Searches a model of the trace in static single assignment form, one
/// assume disjunct at a time, and replays it.
fn find_execution(trace: &[Statement], solver: &Solver) -> Result<Option<Execution>, String> {
    let flat: Vec<&Statement> = trace.iter().flat_map(|s| s.parts()).collect();
    let vars: BTreeSet<Var> = trace.iter().flat_map(|s| s.vars()).collect();
    let mut search = Ssa {
        flat,
        solver,
        nodes: 0,
        unknown: None,
    };
    let versions: BTreeMap<Var, Var> = vars.iter().map(|v| (v.clone(), ssa_name(v, 0))).collect();
    let Some((model, havocs)) =
        search.dfs(0, versions, Cube::new(), Vec::new(), &mut BTreeMap::new())
    else {
        return match search.unknown {
            Some(r) => Err(r),
            None => Ok(None),
        };
    };
    let init = ConcreteState::from_pairs(
        vars.iter()
            .map(|v| (v.clone(), model.get(&ssa_name(v, 0)).unwrap_or(0))),
    );
    let mut queue: VecDeque<Int> = havocs.iter().map(|h| model.get(h).unwrap_or(0)).collect();
    match execute_trace(trace, &init, |_| queue.pop_front().unwrap_or(0)) {
        Ok(TraceOutcome::Executed(exec)) if validate_execution(trace, &exec) == Ok(true) => {
            Ok(Some(exec))
        }
        Ok(_) => Err("model replay failed".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn ssa_name(v: &Var, k: usize) -> Var {
    Var::new(&format!("{v}#{k}"))
}

struct Ssa<'a> {
    flat: Vec<&'a Statement>,
    solver: &'a Solver,
    nodes: usize,
    unknown: Option<String>,
}

impl Ssa<'_> {
    fn rename(p: &Predicate, versions: &BTreeMap<Var, Var>) -> Predicate {
        p.vars()
            .iter()
            .fold(p.clone(), |acc, v| acc.rename(v, &versions[v]))
    }

    fn dfs(
        &mut self,
        i: usize,
        mut versions: BTreeMap<Var, Var>,
        cube: Cube,
        mut havocs: Vec<Var>,
        counters: &mut BTreeMap<Var, usize>,
    ) -> Option<(ConcreteState, Vec<Var>)> {
        self.nodes += 1;
        if self.nodes > SEARCH_NODES {
            self.unknown
                .get_or_insert_with(|| "trace model search budget exhausted".into());
            return None;
        }
        if i == self.flat.len() {
            return match self.solver.check_cube(&cube) {
                SatResult::Sat(m) => Some((m, havocs)),
                SatResult::Unsat => None,
                SatResult::Unknown(r) => {
                    self.unknown.get_or_insert(r);
                    None
                }
            };
        }
        let fresh = |v: &Var, counters: &mut BTreeMap<Var, usize>| {
            let k = counters.entry(v.clone()).or_insert(0);
            *k += 1;
            ssa_name(v, *k)
        };
        match self.flat[i] {
            Statement::Assume(b) => {
                let p = Self::rename(&Predicate::from_bool_expr(b), &versions);
                for c in p.cubes() {
                    let Some(next) = simplify_cube(cube.iter().chain(c.iter()).cloned().collect())
                    else {
                        continue;
                    };
                    match self.solver.check_cube(&next) {
                        SatResult::Unsat => continue,
                        SatResult::Unknown(r) => {
                            self.unknown.get_or_insert(r);
                            continue;
                        }
                        SatResult::Sat(_) => {}
                    }
                    let mut local = counters.clone();
                    if let Some(found) =
                        self.dfs(i + 1, versions.clone(), next, havocs.clone(), &mut local)
                    {
                        return Some(found);
                    }
                }
                None
            }
            Statement::Assign(x, e) => {
                let rhs = e
                    .vars()
                    .fold(e.clone(), |acc, v| acc.rename(v, &versions[v]));
                let nx = fresh(x, counters);
                let def = LinExpr::var(nx.clone()).checked_sub(&rhs)?;
                let mut next = cube;
                match Atom::eq(&def)? {
                    Lit::Atom(a) => {
                        next.insert(a);
                    }
                    Lit::True => {}
                    Lit::False => return None,
                }
                versions.insert(x.clone(), nx);
                self.dfs(i + 1, versions, next, havocs, counters)
            }
            Statement::Havoc(x) => {
                let nx = fresh(x, counters);
                havocs.push(nx.clone());
                versions.insert(x.clone(), nx);
                self.dfs(i + 1, versions, cube, havocs, counters)
            }
            Statement::Seq(_) => unreachable!("flattened"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HoareMode {
    Exact,
    Abstract(DomainKind),
}

/// Is `{φ} s {ψ}` valid? Abstract mode falls back to exact when either
/// predicate is not representable in the domain.
pub fn check_hoare(
    phi: &Predicate,
    s: &Statement,
    psi: &Predicate,
    mode: HoareMode,
    solver: &Solver,
) -> Answer {
    if phi.is_false() || psi.is_true() {
        return Answer::Yes;
    }
    if let HoareMode::Abstract(kind) = mode {
        let vars = phi.vars().into_iter().chain(psi.vars()).chain(s.vars());
        let env = Arc::new(Env::new(vars));
        if let (Some(a), Some(b)) = (
            AbstractState::from_predicate(kind, env.clone(), phi),
            AbstractState::from_predicate(kind, env, psi),
        ) {
            return Answer::from_bool(a.post(s).leq(&b));
        }
    }
    solver.entails(&sp(phi, s, solver), psi)
}

/// A predicate over variable indices, for fast repeated evaluation.
#[derive(Debug)]
struct Compiled(Vec<Vec<(Terms, Atom)>>);

/// Coefficients by variable index.
type Terms = Vec<(usize, Int)>;

impl Compiled {
    fn new(p: &Predicate, index: &HashMap<Var, usize>) -> Compiled {
        Compiled(
            p.cubes()
                .map(|c| {
                    c.iter()
                        .map(|a| {
                            let terms =
                                a.lhs().terms().iter().map(|(v, k)| {
                                    (index.get(v).copied().unwrap_or(usize::MAX), *k)
                                });
                            (terms.collect(), a.clone())
                        })
                        .collect()
                })
                .collect(),
        )
    }

    fn holds(&self, values: &[Option<Int>]) -> Option<bool> {
        let eval = |terms: &[(usize, Int)]| -> Option<Int> {
            terms.iter().try_fold(0 as Int, |acc, (i, k)| {
                acc.checked_add(k.checked_mul((*values.get(*i)?)?)?)
            })
        };
        for cube in &self.0 {
            let mut all = true;
            for (terms, atom) in cube {
                let v = eval(terms)?;
                let ok = match atom {
                    Atom::Le(_, c) => v <= *c,
                    Atom::Eq(_, c) => v == *c,
                    Atom::Cong(_, m, r) => v.rem_euclid(*m) == *r,
                };
                if !ok {
                    all = false;
                    break;
                }
            }
            if all {
                return Some(true);
            }
        }
        Some(false)
    }
}

/// Every predicate seen so far, numbered in order of appearance, and per
/// (predicate, statement) the valid targets among the first `checked` ones.
#[derive(Debug, Default)]
struct TripleTable {
    preds: Vec<Predicate>,
    compiled: Vec<Compiled>,
    ids: HashMap<Predicate, usize>,
    vars: HashMap<Var, usize>,
    letters: HashMap<Statement, usize>,
    known: HashMap<(usize, usize), Known>,
}

#[derive(Clone, Debug, Default)]
struct Known {
    checked: usize,
    targets: Vec<usize>,
    /// The post and one model of it; `None` while unknown or once false.
    post: Option<Arc<PostAndModel>>,
    dead: bool,
}

impl TripleTable {
    fn register(&mut self, p: &Predicate) -> usize {
        if let Some(&id) = self.ids.get(p) {
            return id;
        }
        for v in p.vars() {
            let n = self.vars.len();
            self.vars.entry(v).or_insert(n);
        }
        self.preds.push(p.clone());
        self.compiled.push(Compiled::new(p, &self.vars));
        self.ids.insert(p.clone(), self.preds.len() - 1);
        self.preds.len() - 1
    }

    fn letter(&mut self, s: &Statement) -> usize {
        let n = self.letters.len();
        *self.letters.entry(s.clone()).or_insert(n)
    }
}

type PostAndModel = (Predicate, Option<ConcreteState>);

/// Postconditions and valid triples computed while generalizing sequences;
/// shared across the iterations of one verification run, so each triple is
/// decided at most once.
#[derive(Debug, Default)]
pub struct HoareMemo {
    sps: Mutex<HashMap<(Predicate, Statement), Predicate>>,
    simplified: Mutex<HashMap<Predicate, Predicate>>,
    posts: Mutex<HashMap<(Predicate, Statement), PostAndModel>>,
    table: Mutex<TripleTable>,
}

impl HoareMemo {
    pub fn new() -> Self {
        Self::default()
    }

    fn sp(&self, phi: &Predicate, s: &Statement, solver: &Solver) -> Predicate {
        let key = (phi.clone(), s.clone());
        if let Some(hit) = self.sps.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let post = sp(phi, s, solver);
        self.sps.lock().unwrap().insert(key, post.clone());
        post
    }

    fn simplify(&self, p: &Predicate, solver: &Solver) -> Predicate {
        if let Some(hit) = self.simplified.lock().unwrap().get(p) {
            return hit.clone();
        }
        let q = simplify(p, solver);
        self.simplified.lock().unwrap().insert(p.clone(), q.clone());
        q
    }

    /// `sp(φ, s)` with one model of it, if satisfiable.
    fn post(&self, phi: &Predicate, s: &Statement, solver: &Solver) -> PostAndModel {
        let key = (phi.clone(), s.clone());
        if let Some(hit) = self.posts.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let post = self.sp(phi, s, solver);
        let res = if post.is_false() {
            (Predicate::fls(), None)
        } else {
            match solver.check_sat(&post) {
                SatResult::Sat(m) => {
                    let m = model_on(&m, &post.vars());
                    (post, Some(m))
                }
                SatResult::Unsat => (Predicate::fls(), None),
                SatResult::Unknown(_) => (post, None),
            }
        };
        self.posts.lock().unwrap().insert(key, res.clone());
        res
    }
}

/// The linear automaton of a refuted trace, generalized by every
/// alphabet statement whose Hoare triple between two of its states holds.
pub fn automaton_from_sequence(
    trace: &[Statement],
    seq: &AssertionSequence,
    alphabet: &[Statement],
    solver: &Solver,
) -> FloydHoareAutomaton {
    automaton_from_sequence_with(trace, seq, alphabet, solver, &HoareMemo::new())
}

pub fn automaton_from_sequence_with(
    trace: &[Statement],
    seq: &AssertionSequence,
    alphabet: &[Statement],
    solver: &Solver,
    memo: &HoareMemo,
) -> FloydHoareAutomaton {
    let mut a = FloydHoareAutomaton::blank();
    let mut ids: Vec<usize> = Vec::new();
    let mut by_pred: HashMap<Predicate, usize> = HashMap::new();
    for p in &seq.predicates {
        let id = match by_pred.get(p) {
            Some(id) => *id,
            None => {
                let id = a.add_state(p.clone(), None);
                by_pred.insert(p.clone(), id);
                id
            }
        };
        ids.push(id);
    }
    a.set_initial(ids[0]);
    let fls = *ids.last().unwrap();
    a.set_accepting(fls);
    for (i, s) in trace.iter().enumerate() {
        if ids[i] != fls {
            a.add_transition(ids[i], s.clone(), ids[i + 1], Justification::Exact);
        }
    }
    for s in alphabet {
        a.add_transition(fls, s.clone(), fls, Justification::Exact);
    }
    let states: Vec<usize> = (0..a.num_states()).filter(|q| *q != fls).collect();
    let mut guard = memo.table.lock().unwrap();
    let gids: Vec<usize> = states
        .iter()
        .map(|q| guard.register(a.annotation(*q)))
        .collect();
    let lids: Vec<usize> = alphabet.iter().map(|s| guard.letter(s)).collect();
    let local: HashMap<usize, usize> = gids.iter().copied().zip(states.iter().copied()).collect();
    let table = &*guard;
    let n = table.preds.len();
    let jobs: Vec<(usize, usize)> = (0..states.len())
        .flat_map(|i| (0..alphabet.len()).map(move |j| (i, j)))
        .collect();
    let found: Vec<Known> = par_map(&jobs, |&(i, j)| {
        let mut known = table
            .known
            .get(&(gids[i], lids[j]))
            .cloned()
            .unwrap_or_default();
        if known.dead || known.checked == n {
            return known;
        }
        let cached = known
            .post
            .clone()
            .unwrap_or_else(|| Arc::new(memo.post(a.annotation(states[i]), &alphabet[j], solver)));
        let (post, model) = &*cached;
        if post.is_false() {
            known.dead = true;
            return known;
        }
        // one model rules out most targets without a full entailment check
        let values: Option<Vec<Option<Int>>> = model.as_ref().map(|m| {
            // variables the post does not mention can take any value
            let mut vals = vec![Some(0); table.vars.len()];
            for (v, k) in &table.vars {
                if let Some(x) = m.get(v) {
                    vals[*k] = Some(x);
                }
            }
            vals
        });
        for t in known.checked..n {
            let plausible = values
                .as_ref()
                .is_none_or(|m| table.compiled[t].holds(m) != Some(false));
            if plausible && solver.entails(post, &table.preds[t]) == Answer::Yes {
                known.targets.push(t);
            }
        }
        known.checked = n;
        known.post = Some(cached.clone());
        known
    });
    let mut updates = Vec::new();
    for (&(i, j), known) in jobs.iter().zip(found) {
        let (q, s) = (states[i], &alphabet[j]);
        if known.dead {
            a.add_transition(q, s.clone(), fls, Justification::Exact);
        }
        for t in &known.targets {
            if let Some(&dst) = local.get(t) {
                a.add_transition(q, s.clone(), dst, Justification::Exact);
            }
        }
        updates.push(((gids[i], lids[j]), known));
    }
    guard.known.extend(updates);
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathProgramOptions {
    pub enhance: bool,
    /// Enhancement is skipped when `|Σ|·|Q|²` exceeds this.
    pub enhance_budget: usize,
}

impl Default for PathProgramOptions {
    fn default() -> Self {
        PathProgramOptions {
            enhance: true,
            enhance_budget: 5000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PathProgramAutomaton {
    pub automaton: FloydHoareAutomaton,
    pub enhanced: bool,
    /// Automaton state of each path-program location.
    pub state_of: Vec<usize>,
}

/// Data automaton of a path program proven safe by `ann`: one state per
/// distinct location predicate, the initial state annotated `true`, the
/// error state `false`, transitions inherited from the path program and,
/// when enhancing, every alphabet statement the abstract post validates.
pub fn automaton_from_pathprogram(
    pp: &PathProgram,
    ann: &Annotation,
    alphabet: &[Statement],
    opts: &PathProgramOptions,
) -> PathProgramAutomaton {
    let p = &pp.automaton;
    assert!(
        crate::fixpoint::is_safe(ann, p),
        "path program not proven safe"
    );
    let mut a = FloydHoareAutomaton::blank();
    let mut reps: Vec<(Predicate, usize, Vec<String>)> = Vec::new();
    let mut state_of = Vec::new();
    for l in p.locations() {
        let pred = if ann.is_bottom_at(l) {
            Predicate::fls()
        } else {
            ann.predicate(l)
        };
        let pred = if l == p.initial() {
            Predicate::tru()
        } else {
            pred
        };
        match reps.iter_mut().find(|(q, _, _)| *q == pred) {
            Some((_, id, names)) => {
                names.push(p.name(l).to_string());
                state_of.push(*id);
            }
            None => {
                let abs = if ann.at(l).len() <= 1 || ann.is_bottom_at(l) {
                    Some(if l == p.initial() {
                        AbstractState::top(ann.kind(), ann.env().clone())
                    } else {
                        ann.joined(l)
                    })
                } else {
                    None
                };
                let id = a.add_state(pred.clone(), abs);
                reps.push((pred, id, vec![p.name(l).to_string()]));
                state_of.push(id);
            }
        }
    }
    for (_, id, names) in &reps {
        a.set_label(*id, names.join(","));
    }
    a.set_initial(state_of[p.initial().0]);
    let err = *pp
        .automaton
        .errors()
        .iter()
        .next()
        .expect("one error location");
    let fls = state_of[err.0];
    a.set_accepting(fls);
    for e in p.edges() {
        let (s, d) = (state_of[e.src.0], state_of[e.dst.0]);
        if s == fls && d != fls {
            continue;
        }
        let why = if a.abstract_state(s).is_some() && a.abstract_state(d).is_some() {
            Justification::Abstract
        } else {
            Justification::Exact
        };
        a.add_transition(s, e.stmt.clone(), d, why);
    }
    let n = a.num_states();
    let enhanced = opts.enhance && alphabet.len().saturating_mul(n * n) <= opts.enhance_budget;
    if enhanced {
        enhance(&mut a, fls, alphabet);
    }
    PathProgramAutomaton {
        automaton: a,
        enhanced,
        state_of,
    }
}

fn enhance(a: &mut FloydHoareAutomaton, fls: usize, alphabet: &[Statement]) {
    for s in alphabet {
        a.add_transition(fls, s.clone(), fls, Justification::Abstract);
    }
    let states: Vec<(usize, AbstractState)> = (0..a.num_states())
        .filter(|q| *q != fls)
        .filter_map(|q| a.abstract_state(q).map(|s| (q, s.clone())))
        .collect();
    let jobs: Vec<(usize, &AbstractState, &Statement)> = states
        .iter()
        .flat_map(|(q, st)| alphabet.iter().map(move |s| (*q, st, s)))
        .collect();
    let found = par_map(&jobs, |(_, st, s)| {
        let post = st.post(s);
        if post.is_bottom() {
            return vec![fls];
        }
        states
            .iter()
            .filter(|(_, t)| post.leq(t))
            .map(|(q, _)| *q)
            .collect::<Vec<_>>()
    });
    for ((q, _, s), targets) in jobs.iter().zip(found) {
        for t in targets {
            a.add_transition(*q, (*s).clone(), t, Justification::Abstract);
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub checked: usize,
    pub unknown: usize,
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, o: &AuditReport) {
        self.checked += o.checked;
        self.unknown += o.unknown;
        self.violations.extend(o.violations.iter().cloned());
    }
}

/// Re-checks the Floyd-Hoare conditions of an automaton: annotations of the
/// initial and accepting states and the validity of every transition.
pub fn audit_automaton(a: &FloydHoareAutomaton, solver: &Solver) -> AuditReport {
    audit_automaton_cached(a, solver, &mut AuditCache::default())
}

/// Answers of exact triple checks, so that auditing a sequence of related
/// automata checks each distinct triple once.
#[derive(Debug, Default)]
pub struct AuditCache {
    preds: HashMap<Predicate, usize>,
    stmts: HashMap<Statement, usize>,
    answers: HashMap<(usize, usize, usize), Answer>,
}

pub fn audit_automaton_cached(
    a: &FloydHoareAutomaton,
    solver: &Solver,
    cache: &mut AuditCache,
) -> AuditReport {
    let mut report = AuditReport::default();
    if !a.annotation(a.initial()).is_true() {
        report.violations.push(format!(
            "initial state annotated {}",
            a.annotation(a.initial())
        ));
    }
    for q in a.accepting() {
        if !a.annotation(*q).is_false() {
            report.violations.push(format!(
                "accepting state {} annotated {}",
                a.label(*q),
                a.annotation(*q)
            ));
        }
    }
    let pid: Vec<usize> = (0..a.num_states())
        .map(|q| {
            let n = cache.preds.len();
            *cache.preds.entry(a.annotation(q).clone()).or_insert(n)
        })
        .collect();
    let sid: Vec<usize> = a
        .letters()
        .iter()
        .map(|l| {
            let n = cache.stmts.len();
            *cache.stmts.entry((**l).clone()).or_insert(n)
        })
        .collect();
    let key = |t: &Transition| (pid[t.src], sid[t.letter], pid[t.dst]);
    let results = par_map(a.transitions(), |t| {
        if let (Justification::Abstract, Some(s), Some(d)) =
            (t.why, a.abstract_state(t.src), a.abstract_state(t.dst))
        {
            return Answer::from_bool(s.post(&t.stmt).leq(d));
        }
        if let Some(r) = cache.answers.get(&key(t)) {
            return *r;
        }
        check_hoare(
            a.annotation(t.src),
            &t.stmt,
            a.annotation(t.dst),
            HoareMode::Exact,
            solver,
        )
    });
    for (t, r) in a.transitions().iter().zip(results) {
        report.checked += 1;
        if t.why != Justification::Abstract
            || a.abstract_state(t.src).is_none()
            || a.abstract_state(t.dst).is_none()
        {
            cache.answers.insert(key(t), r);
        }
        match r {
            Answer::Yes => {}
            Answer::Unknown => report.unknown += 1,
            Answer::No => report.violations.push(format!(
                "{{{}}} {} {{{}}}",
                a.annotation(t.src),
                t.stmt,
                a.annotation(t.dst)
            )),
        }
    }
    report
}

/// Every consecutive triple of the sequence is a valid Hoare triple.
pub fn audit_sequence(
    trace: &[Statement],
    seq: &AssertionSequence,
    solver: &Solver,
) -> AuditReport {
    let mut report = AuditReport::default();
    if seq.predicates.len() != trace.len() + 1 || !seq.predicates[0].is_true() {
        report.violations.push("malformed sequence".into());
        return report;
    }
    for (i, s) in trace.iter().enumerate() {
        report.checked += 1;
        match check_hoare(
            &seq.predicates[i],
            s,
            &seq.predicates[i + 1],
            HoareMode::Exact,
            solver,
        ) {
            Answer::Yes => {}
            Answer::Unknown => report.unknown += 1,
            Answer::No => report.violations.push(format!("step {i}")),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_bool_expr, parse_statement};

    fn p(s: &str) -> Predicate {
        Predicate::from_bool_expr(&parse_bool_expr(s).unwrap())
    }

    fn st(s: &str) -> Statement {
        parse_statement(s).unwrap()
    }

    #[test]
    fn sp_examples() {
        let solver = Solver::default();
        assert_eq!(
            sp(&Predicate::tru(), &st("x := 0; y := 42"), &solver),
            p("x == 0 && y == 42")
        );
        assert_eq!(
            sp(&p("x == 0 && y == 42"), &st("x := x + 1"), &solver),
            p("x == 1 && y == 42")
        );
        assert!(sp(&p("x == 1 && y == 42"), &st("assume(x >= 100)"), &solver).is_false());
        assert_eq!(sp(&p("x >= 3"), &st("havoc x"), &solver), Predicate::tru());
        assert_eq!(
            sp(&p("x >= 3"), &st("x := 2*x"), &solver).to_string(),
            "x >= 6 && x mod 2 == 0"
        );
        assert_eq!(sp(&p("x <= 3"), &st("x := 5 - x"), &solver), p("x >= 2"));
    }

    #[test]
    fn feasible_trace_yields_validated_execution() {
        let solver = Solver::default();
        let trace = [st("havoc x"), st("assume(x == 7)")];
        match analyze_trace(&trace, &solver) {
            TraceAnalysis::Feasible(exec) => {
                assert_eq!(exec.states.last().unwrap().get(&Var::new("x")), Some(7));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hoare_examples() {
        let solver = Solver::default();
        let inv = p("0 <= x && x <= 100 && y == 42");
        let m = HoareMode::Abstract(DomainKind::Interval);
        assert_eq!(
            check_hoare(&inv, &st("y := 42"), &inv, m, &solver),
            Answer::Yes
        );
        assert_eq!(
            check_hoare(&inv, &st("x := x + 1"), &inv, m, &solver),
            Answer::No
        );
        assert_eq!(
            check_hoare(
                &Predicate::fls(),
                &st("x := 1"),
                &Predicate::fls(),
                HoareMode::Exact,
                &solver
            ),
            Answer::Yes
        );
    }

    #[test]
    fn contradictory_assume_gives_two_states() {
        let solver = Solver::default();
        let trace = [st("assume(false)")];
        let TraceAnalysis::Infeasible(seq) = analyze_trace(&trace, &solver) else {
            panic!()
        };
        let alphabet = [st("assume(false)"), st("x := 1")];
        let a = automaton_from_sequence(&trace, &seq, &alphabet, &solver);
        assert_eq!(a.num_states(), 2);
        assert!(a.accepts(&[st("assume(false)"), st("x := 1")]));
        assert!(!a.accepts(&[st("x := 1")]));
        assert!(audit_automaton(&a, &solver).ok());
    }

    #[test]
    fn equal_assertions_share_a_state() {
        let solver = Solver::default();
        let trace = [st("x := 1"), st("y := y"), st("assume(x < 0)")];
        let TraceAnalysis::Infeasible(seq) = analyze_trace(&trace, &solver) else {
            panic!()
        };
        assert_eq!(seq.predicates[1], seq.predicates[2]);
        let a = automaton_from_sequence(&trace, &seq, &trace, &solver);
        assert_eq!(a.num_states(), 3);
    }
}
