//! Concrete semantics: states, the successor relation of each statement, trace
//! execution, and an exhaustive feasibility oracle over a finite box.
//!
//! The oracle enumerates and is exponential in the number of variables. It is
//! meant for tests that cross-check the symbolic machinery.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{BoolExpr, Int, LinExpr, Statement, Var};

/// A valuation of program variables.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ConcreteState(BTreeMap<Var, Int>);

impl ConcreteState {
    pub fn new() -> Self {
        ConcreteState::default()
    }

    /// Every variable mapped to zero.
    pub fn zeros<'a, I: IntoIterator<Item = &'a Var>>(vars: I) -> Self {
        ConcreteState(vars.into_iter().map(|v| (v.clone(), 0)).collect())
    }

    pub fn from_pairs<I: IntoIterator<Item = (Var, Int)>>(pairs: I) -> Self {
        ConcreteState(pairs.into_iter().collect())
    }

    pub fn get(&self, v: &Var) -> Option<Int> {
        self.0.get(v).copied()
    }

    pub fn set(&mut self, v: Var, value: Int) {
        self.0.insert(v, value);
    }

    pub fn with(mut self, v: &Var, value: Int) -> Self {
        self.0.insert(v.clone(), value);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Int)> {
        self.0.iter()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    fn lookup(&self, v: &Var) -> Option<Int> {
        Some(
            self.get(v)
                .unwrap_or_else(|| panic!("variable `{v}` not in state")),
        )
    }
}

impl fmt::Display for ConcreteState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, x)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}={x}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for ConcreteState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub fn eval_lin(e: &LinExpr, s: &ConcreteState) -> Result<Int> {
    e.eval_with(|v| s.lookup(v)).ok_or(Error::Overflow)
}

pub fn eval_bool(b: &BoolExpr, s: &ConcreteState) -> Result<bool> {
    b.eval_with(|v| s.lookup(v)).ok_or(Error::Overflow)
}

/// Finite integer ranges used to enumerate initial and havoc values.
#[derive(Clone, Debug)]
pub struct ProbeBox {
    default: (Int, Int),
    ranges: BTreeMap<Var, (Int, Int)>,
}

impl ProbeBox {
    pub fn uniform(lo: Int, hi: Int) -> Self {
        assert!(lo <= hi, "empty box");
        ProbeBox {
            default: (lo, hi),
            ranges: BTreeMap::new(),
        }
    }

    pub fn with_range(mut self, v: &Var, lo: Int, hi: Int) -> Self {
        assert!(lo <= hi, "empty range");
        self.ranges.insert(v.clone(), (lo, hi));
        self
    }

    pub fn range(&self, v: &Var) -> (Int, Int) {
        self.ranges.get(v).copied().unwrap_or(self.default)
    }

    fn width(&self, v: &Var) -> u128 {
        let (lo, hi) = self.range(v);
        (hi - lo) as u128 + 1
    }
}

/// Successors of `s` under one statement. Havoc enumerates the box range of
/// its variable, or panics when no box is supplied.
pub fn step(
    stmt: &Statement,
    s: &ConcreteState,
    havoc_box: Option<&ProbeBox>,
) -> Result<Vec<ConcreteState>> {
    let mut current = vec![s.clone()];
    for part in stmt.parts() {
        let mut next = Vec::new();
        for st in &current {
            match part {
                Statement::Assume(b) => {
                    if eval_bool(b, st)? {
                        next.push(st.clone());
                    }
                }
                Statement::Assign(v, e) => {
                    let value = eval_lin(e, st)?;
                    next.push(st.clone().with(v, value));
                }
                Statement::Havoc(v) => {
                    let bx = havoc_box.expect("havoc needs a probe box");
                    let (lo, hi) = bx.range(v);
                    for value in lo..=hi {
                        next.push(st.clone().with(v, value));
                    }
                }
                Statement::Seq(_) => unreachable!("nested Seq"),
            }
        }
        next.sort();
        next.dedup();
        current = next;
    }
    Ok(current)
}

/// States σ0 σ1 … σn of one execution, `σ(i+1)` a successor of `σi` under statement `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Execution {
    pub states: Vec<ConcreteState>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceOutcome {
    Executed(Execution),
    /// No successor exists at statement `index`.
    Infeasible {
        index: usize,
    },
}

/// Runs a trace deterministically; `havoc` supplies the value of each havoc
/// in execution order.
pub fn execute_trace<F>(
    trace: &[Statement],
    init: &ConcreteState,
    mut havoc: F,
) -> Result<TraceOutcome>
where
    F: FnMut(&Var) -> Int,
{
    let mut states = vec![init.clone()];
    for (i, stmt) in trace.iter().enumerate() {
        let mut cur = states.last().unwrap().clone();
        for part in stmt.parts() {
            match part {
                Statement::Assume(b) => {
                    if !eval_bool(b, &cur)? {
                        return Ok(TraceOutcome::Infeasible { index: i });
                    }
                }
                Statement::Assign(v, e) => {
                    let value = eval_lin(e, &cur)?;
                    cur.set(v.clone(), value);
                }
                Statement::Havoc(v) => {
                    let value = havoc(v);
                    cur.set(v.clone(), value);
                }
                Statement::Seq(_) => unreachable!("nested Seq"),
            }
        }
        states.push(cur);
    }
    Ok(TraceOutcome::Executed(Execution { states }))
}

/// Checks that an execution is a witness for `trace`: aligned lengths and each
/// adjacent pair related by the statement.
pub fn validate_execution(trace: &[Statement], exec: &Execution) -> Result<bool> {
    if exec.states.len() != trace.len() + 1 {
        return Ok(false);
    }
    for (i, stmt) in trace.iter().enumerate() {
        let (pre, post) = (&exec.states[i], &exec.states[i + 1]);
        if !related(stmt, pre, post)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn related(stmt: &Statement, pre: &ConcreteState, post: &ConcreteState) -> Result<bool> {
    // Havoc may pick any value, so the targets of havoc parts are read off `post`.
    let mut cur = pre.clone();
    for part in stmt.parts() {
        match part {
            Statement::Assume(b) => {
                if !eval_bool(b, &cur)? {
                    return Ok(false);
                }
            }
            Statement::Assign(v, e) => {
                let value = eval_lin(e, &cur)?;
                cur.set(v.clone(), value);
            }
            Statement::Havoc(v) => match post.get(v) {
                Some(value) => cur.set(v.clone(), value),
                None => return Ok(false),
            },
            Statement::Seq(_) => unreachable!("nested Seq"),
        }
    }
    Ok(&cur == post)
}

/// Default cap on enumerated states for [`oracle_feasible`].
pub const DEFAULT_ORACLE_CAP: u128 = 5_000_000;

/// Exhaustive feasibility: is there an initial state and a choice of havoc
/// values, all inside `bx`, that executes the whole trace?
pub fn oracle_feasible(trace: &[Statement], bx: &ProbeBox, cap: u128) -> Result<bool> {
    let vars: BTreeSet<Var> = trace.iter().flat_map(|s| s.vars()).collect();
    let mut count: u128 = 1;
    for v in &vars {
        count = count.saturating_mul(bx.width(v));
    }
    if count > cap {
        return Err(Error::EnumerationTooLarge { count, cap });
    }
    let mut frontier: BTreeSet<ConcreteState> = BTreeSet::new();
    enumerate(
        &vars.iter().cloned().collect::<Vec<_>>(),
        bx,
        &mut ConcreteState::new(),
        &mut frontier,
    );
    for stmt in trace {
        let mut next = BTreeSet::new();
        for s in &frontier {
            next.extend(step(stmt, s, Some(bx))?);
            if next.len() as u128 > cap {
                return Err(Error::EnumerationTooLarge {
                    count: next.len() as u128,
                    cap,
                });
            }
        }
        if next.is_empty() {
            return Ok(false);
        }
        frontier = next;
    }
    Ok(!frontier.is_empty())
}

fn enumerate(
    vars: &[Var],
    bx: &ProbeBox,
    partial: &mut ConcreteState,
    out: &mut BTreeSet<ConcreteState>,
) {
    match vars.split_first() {
        None => {
            out.insert(partial.clone());
        }
        Some((v, rest)) => {
            let (lo, hi) = bx.range(v);
            for value in lo..=hi {
                partial.set(v.clone(), value);
                enumerate(rest, bx, partial, out);
            }
        }
    }
}
