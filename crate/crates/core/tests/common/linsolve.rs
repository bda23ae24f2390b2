//! Brute-force enumeration oracles for the solver.

use proptest::prelude::*;
use traceai::expr::{BoolExpr, CmpOp, Int, LinExpr, Var};
use traceai::linsolve::{Answer, Atom, Cube, Predicate, SatResult, Solver};

use super::{bool_expr, VARS};

pub const SAT_CASES: u32 = 500;
pub const ENTAIL_CASES: u32 = 150;

pub const BOUND: Int = 50;

pub fn boxed(n: usize, b: &BoolExpr) -> Predicate {
    let mut p = Predicate::from_bool_expr(b);
    for v in &VARS[..n] {
        let x = LinExpr::var(Var::new(v));
        p = p.and(&Predicate::from_bool_expr(&BoolExpr::and(
            BoolExpr::cmp(x.clone(), CmpOp::Ge, LinExpr::constant(-BOUND)),
            BoolExpr::cmp(x, CmpOp::Le, LinExpr::constant(BOUND)),
        )));
    }
    p
}

/// Values of the last variable satisfying a cube once the others are fixed.
fn last_var_has_solution(cube: &Cube, fixed: &[Int], last: &Var) -> bool {
    let (mut lo, mut hi) = (-BOUND, BOUND);
    let mut congs = Vec::new();
    for a in cube {
        let e = a.lhs();
        let k = e.coeff(last);
        let rest: Int = e
            .terms()
            .iter()
            .filter(|(v, _)| *v != last)
            .map(|(v, c)| c * fixed[VARS.iter().position(|n| *n == v.name()).unwrap()])
            .sum();
        match a {
            Atom::Le(_, c) | Atom::Eq(_, c) if k == 0 => {
                let ok = if matches!(a, Atom::Le(..)) {
                    rest <= *c
                } else {
                    rest == *c
                };
                if !ok {
                    return false;
                }
            }
            Atom::Le(_, c) => {
                // k*z <= c - rest
                let r = c - rest;
                if k > 0 {
                    hi = hi.min(r.div_euclid(k));
                } else {
                    lo = lo.max(-(r.div_euclid(-k)));
                }
            }
            Atom::Eq(_, c) => {
                let r = c - rest;
                if r % k != 0 {
                    return false;
                }
                lo = lo.max(r / k);
                hi = hi.min(r / k);
            }
            Atom::Cong(_, m, r) => congs.push((k, rest, *m, *r)),
        }
    }
    (lo..=hi).take(1000).any(|z| {
        congs
            .iter()
            .all(|(k, rest, m, r)| (k * z + rest).rem_euclid(*m) == *r)
    })
}

pub fn brute_sat(p: &Predicate, n: usize) -> bool {
    let last = Var::new(VARS[n - 1]);
    let mut fixed = vec![0; 3];
    let range = || -BOUND..=BOUND;
    let cubes: Vec<&Cube> = p.cubes().collect();
    let check = |fixed: &[Int]| cubes.iter().any(|c| last_var_has_solution(c, fixed, &last));
    match n {
        1 => check(&fixed),
        2 => range().any(|x| {
            fixed[0] = x;
            check(&fixed)
        }),
        _ => range().any(|x| {
            range().any(|y| {
                fixed[0] = x;
                fixed[1] = y;
                check(&fixed)
            })
        }),
    }
}

pub fn sat_case() -> impl Strategy<Value = (usize, BoolExpr)> {
    (1usize..=3).prop_flat_map(|n| (Just(n), bool_expr(n)))
}

pub fn entail_case() -> impl Strategy<Value = (usize, BoolExpr, BoolExpr)> {
    (1usize..=3).prop_flat_map(|n| (Just(n), bool_expr(n), bool_expr(n)))
}

pub fn check_sat((n, b): (usize, BoolExpr)) -> Result<(), TestCaseError> {
    let p = boxed(n, &b);
    let expected = brute_sat(&p, n);
    match Solver::default().check_sat(&p) {
        SatResult::Sat(m) => {
            prop_assert!(expected, "model {} for an empty set", m);
            prop_assert_eq!(p.holds(&m), Some(true));
        }
        SatResult::Unsat => prop_assert!(!expected),
        SatResult::Unknown(_) => {}
    }
    Ok(())
}

pub fn check_entails((n, a, b): (usize, BoolExpr, BoolExpr)) -> Result<(), TestCaseError> {
    let p = boxed(n, &a);
    let q = Predicate::from_bool_expr(&b);
    let counter = p.and(&q.negate());
    let expected = !brute_sat(&counter, n);
    match Solver::default().entails(&p, &q) {
        Answer::Yes => prop_assert!(expected),
        Answer::No => prop_assert!(!expected),
        Answer::Unknown => {}
    }
    Ok(())
}
