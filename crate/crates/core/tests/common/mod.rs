#![allow(dead_code)]

pub mod automata;
pub mod domains;
pub mod linsolve;
pub mod running;

use proptest::prelude::*;
use traceai::expr::{BoolExpr, CmpOp, Int, LinExpr, Statement, Var};
use traceai::semantics::ConcreteState;

pub const VARS: [&str; 3] = ["x", "y", "z"];

pub fn var(n: usize) -> impl Strategy<Value = Var> {
    (0..n).prop_map(|i| Var::new(VARS[i]))
}

pub fn lin_expr(n: usize, coeff: Int, konst: Int) -> impl Strategy<Value = LinExpr> {
    (prop::collection::vec(-coeff..=coeff, n), -konst..=konst).prop_map(move |(cs, c)| {
        LinExpr::from_terms(
            cs.into_iter()
                .enumerate()
                .map(|(i, k)| (Var::new(VARS[i]), k)),
            c,
        )
        .unwrap()
    })
}

pub fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop::sample::select(vec![
        CmpOp::Lt,
        CmpOp::Le,
        CmpOp::Gt,
        CmpOp::Ge,
        CmpOp::Eq,
        CmpOp::Ne,
    ])
}

pub fn atom(n: usize) -> impl Strategy<Value = BoolExpr> {
    (lin_expr(n, 3, 10), cmp_op()).prop_map(|(e, op)| BoolExpr::cmp(e, op, LinExpr::zero()))
}

pub fn bool_expr(n: usize) -> impl Strategy<Value = BoolExpr> {
    atom(n).prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| BoolExpr::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| BoolExpr::or(a, b)),
            inner.prop_map(BoolExpr::not),
        ]
    })
}

/// Single statements with small coefficients.
pub fn simple_statement(n: usize) -> impl Strategy<Value = Statement> {
    prop_oneof![
        3 => (var(n), lin_expr(n, 2, 5)).prop_map(|(v, e)| Statement::assign(v, e)),
        2 => atom(n).prop_map(Statement::assume),
        1 => var(n).prop_map(Statement::Havoc),
    ]
}

pub fn statement(n: usize) -> impl Strategy<Value = Statement> {
    prop::collection::vec(simple_statement(n), 1..=3).prop_map(Statement::seq)
}

pub fn state(n: usize, lo: Int, hi: Int) -> impl Strategy<Value = ConcreteState> {
    prop::collection::vec(lo..=hi, n).prop_map(|vs| {
        ConcreteState::from_pairs(
            vs.into_iter()
                .enumerate()
                .map(|(i, v)| (Var::new(VARS[i]), v)),
        )
    })
}

/// Fixed seed, no regression files.
pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x7ace_ab57),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// Source text of a random structured program over `x` and `y`.
pub fn program_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        3 => (var(2), lin_expr(2, 2, 5)).prop_map(|(v, e)| format!("{v} := {e};")),
        1 => var(2).prop_map(|v| format!("havoc {v};")),
        1 => atom(2).prop_map(|b| format!("assume({b});")),
        2 => atom(2).prop_map(|b| format!("assert({b});")),
    ];
    let body = leaf.prop_recursive(2, 12, 3, |inner| {
        let block = prop::collection::vec(inner, 1..=3).prop_map(|v| v.join(" "));
        prop_oneof![
            (atom(2), block.clone(), block.clone())
                .prop_map(|(b, t, e)| format!("if ({b}) {{ {t} }} else {{ {e} }}")),
            (atom(2), block).prop_map(|(b, t)| format!("while ({b}) {{ {t} }}")),
        ]
    });
    prop::collection::vec(body, 1..=4).prop_map(|v| format!("var x, y;\n{}\n", v.join("\n")))
}
