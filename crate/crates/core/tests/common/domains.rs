//! Probes for the soundness of abstract transformers.

use std::sync::Arc;

use proptest::prelude::*;
use traceai::domains::{AbstractState, DomainKind, Env};
use traceai::expr::{BoolExpr, CmpOp, LinExpr, Statement, Var};
use traceai::linsolve::Predicate;
use traceai::semantics::{step, ConcreteState, ProbeBox};

use super::{bool_expr, state, statement, VARS};

pub const POST_CASES: u32 = 1000;

pub fn env() -> Arc<Env> {
    Arc::new(Env::new(VARS.map(Var::new)))
}

pub fn point(kind: DomainKind, s: &ConcreteState) -> AbstractState {
    let b = VARS.iter().fold(BoolExpr::True, |acc, v| {
        let x = Var::new(v);
        let val = s.get(&x).unwrap();
        BoolExpr::and(
            acc,
            BoolExpr::cmp(LinExpr::var(x), CmpOp::Eq, LinExpr::constant(val)),
        )
    });
    AbstractState::top(kind, env()).assume(&Predicate::from_bool_expr(&b))
}

/// An abstract state containing `s`: the join of its abstraction with other
/// points, optionally widened, then restricted by a guard `s` satisfies.
pub fn around(
    kind: DomainKind,
    s: &ConcreteState,
    others: &[ConcreteState],
    widen: bool,
    guard: &BoolExpr,
) -> AbstractState {
    let mut a = point(kind, s);
    for o in others {
        a = a.join(&point(kind, o));
    }
    if widen && !others.is_empty() {
        a = point(kind, &others[0]).widen(&a);
    }
    let g = Predicate::from_bool_expr(guard);
    if g.holds(s) == Some(true) {
        a = a.assume(&g);
    }
    a
}

pub fn check(
    kind: DomainKind,
    s: &ConcreteState,
    others: &[ConcreteState],
    widen: bool,
    guard: &BoolExpr,
    st: &Statement,
) -> Result<(), TestCaseError> {
    let a = around(kind, s, others, widen, guard);
    prop_assert!(a.contains(s), "{} does not contain {}", a, s);
    let post = a.post(st);
    let succ = step(st, s, Some(&ProbeBox::uniform(-4, 4))).unwrap();
    for t in succ {
        prop_assert!(
            post.contains(&t),
            "{} --[{}]--> {} escapes {}",
            s,
            st,
            t,
            post
        );
    }
    Ok(())
}

pub fn strategy(
) -> impl Strategy<Value = (ConcreteState, Vec<ConcreteState>, bool, BoolExpr, Statement)> {
    (
        state(3, -20, 20),
        prop::collection::vec(state(3, -20, 20), 0..3),
        any::<bool>(),
        bool_expr(3),
        statement(3),
    )
}
