//! Decision procedure for linear integer arithmetic with congruences:
//! satisfiability with models, entailment and variable elimination.
//!
//! Verdicts are never wrong: an exhausted search budget yields
//! [`SatResult::Unknown`]. Infeasibility proofs come from exact equality
//! elimination and Fourier–Motzkin with gcd tightening, both sound over the
//! integers.

mod predicate;
pub mod smtlib;
mod solver;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

pub use predicate::{simplify_cube, Atom, AtomKind, Cube, Lit, Predicate};

use crate::expr::{Int, LinExpr, Var};
use crate::semantics::ConcreteState;
use solver::{solve_cube, CubeResult};

/// Default node budget of the integer model search.
pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(ConcreteState),
    Unsat,
    Unknown(String),
}

impl SatResult {
    pub fn is_unsat(&self) -> bool {
        matches!(self, SatResult::Unsat)
    }

    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
}

/// Three-valued answer of validity questions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

impl Answer {
    pub fn from_bool(b: bool) -> Answer {
        if b {
            Answer::Yes
        } else {
            Answer::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Answer::Yes
    }
}

static QUERIES: AtomicU64 = AtomicU64::new(0);

/// Number of cube-level solver calls made by this process.
pub fn query_count() -> u64 {
    QUERIES.load(Ordering::Relaxed)
}

/// Solver entry points with a fixed node budget.
#[derive(Clone, Copy, Debug)]
pub struct Solver {
    pub budget: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            budget: DEFAULT_BUDGET,
        }
    }
}

impl Solver {
    pub fn new(budget: usize) -> Self {
        Solver { budget }
    }

    pub fn check_cube(&self, cube: &Cube) -> SatResult {
        QUERIES.fetch_add(1, Ordering::Relaxed);
        match solve_cube(cube, self.budget) {
            CubeResult::Sat(m) => SatResult::Sat(ConcreteState::from_pairs(m)),
            CubeResult::Unsat => SatResult::Unsat,
            CubeResult::Unknown(r) => SatResult::Unknown(r),
        }
    }

    /// SAT if any cube is SAT; UNSAT only if every cube is.
    pub fn check_sat(&self, p: &Predicate) -> SatResult {
        let mut unknown = None;
        for c in p.cubes() {
            match self.check_cube(c) {
                SatResult::Sat(m) => return SatResult::Sat(m),
                SatResult::Unsat => {}
                SatResult::Unknown(r) => unknown = Some(r),
            }
        }
        match unknown {
            Some(r) => SatResult::Unknown(r),
            None => SatResult::Unsat,
        }
    }

    /// Removes cubes proven unsatisfiable.
    pub fn prune(&self, p: &Predicate) -> Predicate {
        let mut out = p.clone();
        out.retain_cubes(|c| !self.check_cube(c).is_unsat());
        out
    }

    /// Does `p` imply `q`?
    pub fn entails(&self, p: &Predicate, q: &Predicate) -> Answer {
        if p.is_false() || q.is_true() {
            return Answer::Yes;
        }
        let qcubes: Vec<&Cube> = q.cubes().collect();
        let mut unknown = false;
        for c in p.cubes() {
            match self.refute(c.clone(), &qcubes) {
                Answer::Yes => {}
                Answer::No => return Answer::No,
                Answer::Unknown => unknown = true,
            }
        }
        if unknown {
            Answer::Unknown
        } else {
            Answer::Yes
        }
    }

    /// `Yes` iff `c ∧ ¬(q1 ∨ … ∨ qn)` is unsatisfiable. One negated atom is
    /// chosen per cube of `q`; branches are pruned as soon as they become UNSAT.
    fn refute(&self, c: Cube, qcubes: &[&Cube]) -> Answer {
        let Some((first, rest)) = qcubes.split_first() else {
            return match self.check_cube(&c) {
                SatResult::Sat(_) => Answer::No,
                SatResult::Unsat => Answer::Yes,
                SatResult::Unknown(_) => Answer::Unknown,
            };
        };
        if first.is_subset(&c) {
            return Answer::Yes;
        }
        let mut unknown = false;
        for a in first.iter() {
            for lit in a.negate() {
                let mut next = c.clone();
                match lit {
                    Lit::False => continue,
                    Lit::True => {}
                    Lit::Atom(n) => {
                        next.insert(n);
                    }
                }
                let Some(next) = simplify_cube(next) else {
                    continue;
                };
                if !rest.is_empty() {
                    match self.check_cube(&next) {
                        SatResult::Unsat => continue,
                        SatResult::Unknown(_) => {
                            unknown = true;
                            continue;
                        }
                        SatResult::Sat(_) => {}
                    }
                }
                match self.refute(next, rest) {
                    Answer::Yes => {}
                    Answer::No => return Answer::No,
                    Answer::Unknown => unknown = true,
                }
            }
        }
        if unknown {
            Answer::Unknown
        } else {
            Answer::Yes
        }
    }

    pub fn equivalent(&self, p: &Predicate, q: &Predicate) -> Answer {
        match (self.entails(p, q), self.entails(q, p)) {
            (Answer::Yes, Answer::Yes) => Answer::Yes,
            (Answer::No, _) | (_, Answer::No) => Answer::No,
            _ => Answer::Unknown,
        }
    }
}

pub fn check_sat(p: &Predicate) -> SatResult {
    Solver::default().check_sat(p)
}

pub fn entails(p: &Predicate, q: &Predicate) -> Answer {
    Solver::default().entails(p, q)
}

/// Projection of a predicate onto all variables but `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elimination {
    pub predicate: Predicate,
    /// False when a congruence mentioning `x` had to be dropped.
    pub exact: bool,
}

/// Eliminates `x`: substitution through an equality when one mentions `x`
/// (exact, adding a divisibility side condition for non-unit coefficients),
/// otherwise Fourier–Motzkin on the inequalities. Congruences mentioning `x`
/// that cannot be rewritten are dropped and reported.
pub fn eliminate(p: &Predicate, x: &Var) -> Elimination {
    let mut exact = true;
    let mut cubes = Vec::new();
    for c in p.cubes() {
        match eliminate_cube(c, x) {
            Some((cube, ex)) => {
                exact &= ex;
                if let Some(cube) = cube {
                    cubes.push(cube);
                }
            }
            None => {
                // Overflow: dropping every atom on `x` is still an over-approximation.
                exact = false;
                cubes.push(c.iter().filter(|a| !a.mentions(x)).cloned().collect());
            }
        }
    }
    Elimination {
        predicate: Predicate::from_cubes(cubes),
        exact,
    }
}

/// `Some((None, _))` when the cube becomes false.
fn eliminate_cube(c: &Cube, x: &Var) -> Option<(Option<Cube>, bool)> {
    let (with, without): (Vec<&Atom>, Vec<&Atom>) = c.iter().partition(|a| a.mentions(x));
    if with.is_empty() {
        return Some((Some(c.clone()), true));
    }
    let mut out: Cube = without.into_iter().cloned().collect();
    let push = |l: Lit, out: &mut Cube| -> bool {
        match l {
            Lit::True => true,
            Lit::False => false,
            Lit::Atom(a) => {
                out.insert(a);
                true
            }
        }
    };
    let pivot = with
        .iter()
        .filter(|a| matches!(a, Atom::Eq(..)))
        .min_by_key(|a| a.lhs().coeff(x).unsigned_abs());
    if let Some(Atom::Eq(e, c0)) = pivot.copied() {
        let a = e.coeff(x);
        // a*x + rest == c0  ⇒  a*x == t  with t = c0 - rest
        let rest = e.checked_sub(&LinExpr::term(x.clone(), a))?;
        let t = LinExpr::constant(*c0).checked_sub(&rest)?;
        if a.abs() == 1 {
            let by = t.checked_scale(a)?;
            for at in &with {
                if std::ptr::eq(*at, *pivot.unwrap()) {
                    continue;
                }
                if !push(at.substitute(x, &by)?, &mut out) {
                    return Some((None, true));
                }
            }
            return Some((Some(out), true));
        }
        let k = a.abs();
        let signed_t = t.checked_scale(a.signum())?;
        for at in &with {
            if std::ptr::eq(*at, *pivot.unwrap()) {
                continue;
            }
            let b = at.lhs().coeff(x);
            let (scaled, kind) = at.scale(k)?;
            // k*b*x == b*sign(a)*t
            let replaced = scaled.substitute(x, &LinExpr::zero())?;
            let replaced = replaced.checked_add(&signed_t.checked_scale(b)?)?;
            match kind.build(&replaced)? {
                Lit::True => {}
                Lit::False => return Some((None, true)),
                Lit::Atom(a2) => {
                    out.insert(a2);
                }
            }
        }
        if !push(Atom::cong(&t, k)?, &mut out) {
            return Some((None, true));
        }
        return Some((Some(out), true));
    }
    let mut uppers = Vec::new();
    let mut lowers = Vec::new();
    let mut exact = true;
    for at in &with {
        match at {
            Atom::Le(e, _) => {
                if e.coeff(x) > 0 {
                    uppers.push(at.expr());
                } else {
                    lowers.push(at.expr());
                }
            }
            Atom::Cong(..) => exact = false,
            Atom::Eq(..) => unreachable!("handled above"),
        }
    }
    for u in &uppers {
        for l in &lowers {
            let (a, b) = (u.coeff(x), -l.coeff(x));
            // the real shadow may contain points without an integer witness
            if a != 1 && b != 1 {
                exact = false;
            }
            let g = crate::expr::gcd(a, b);
            let combined = u
                .checked_scale(b / g)?
                .checked_add(&l.checked_scale(a / g)?)?;
            if !push(Atom::le(&combined)?, &mut out) {
                return Some((None, exact));
            }
        }
    }
    Some((simplify_cube(out), exact))
}

/// Values of a model restricted to the given variables (missing ones are 0).
pub fn model_on<'a, I: IntoIterator<Item = &'a Var>>(
    model: &ConcreteState,
    vars: I,
) -> ConcreteState {
    ConcreteState::from_pairs(
        vars.into_iter()
            .map(|v| (v.clone(), model.get(v).unwrap_or(0))),
    )
}

/// Convenience for tests and callers holding plain maps.
pub fn state_of(pairs: &BTreeMap<Var, Int>) -> ConcreteState {
    ConcreteState::from_pairs(pairs.clone())
}
