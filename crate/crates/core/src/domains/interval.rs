use std::sync::Arc;

use crate::expr::{ceil_div, floor_div, Int, LinExpr, Var};
use crate::linsolve::{Atom, Cube, Lit};

use super::{lit_from, Env};

/// Closed integer interval; `None` bounds are infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Itv {
    pub lo: Option<Int>,
    pub hi: Option<Int>,
}

impl Itv {
    pub const TOP: Itv = Itv { lo: None, hi: None };

    pub fn new(lo: Option<Int>, hi: Option<Int>) -> Itv {
        Itv { lo, hi }
    }

    pub fn constant(c: Int) -> Itv {
        Itv::new(Some(c), Some(c))
    }

    pub fn is_empty(&self) -> bool {
        matches!((self.lo, self.hi), (Some(l), Some(h)) if l > h)
    }

    pub fn as_constant(&self) -> Option<Int> {
        match (self.lo, self.hi) {
            (Some(l), Some(h)) if l == h => Some(l),
            _ => None,
        }
    }

    pub fn contains(&self, v: Int) -> bool {
        self.lo.is_none_or(|l| l <= v) && self.hi.is_none_or(|h| v <= h)
    }

    pub fn leq(&self, o: &Itv) -> bool {
        let lo_ok = match (self.lo, o.lo) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a >= b,
        };
        let hi_ok = match (self.hi, o.hi) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a <= b,
        };
        lo_ok && hi_ok
    }

    pub fn join(&self, o: &Itv) -> Itv {
        Itv::new(
            self.lo.zip(o.lo).map(|(a, b)| a.min(b)),
            self.hi.zip(o.hi).map(|(a, b)| a.max(b)),
        )
    }

    pub fn meet(&self, o: &Itv) -> Itv {
        let lo = match (self.lo, o.lo) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let hi = match (self.hi, o.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Itv::new(lo, hi)
    }

    pub fn widen(&self, o: &Itv) -> Itv {
        let lo = match (self.lo, o.lo) {
            (Some(a), Some(b)) if b >= a => Some(a),
            _ => None,
        };
        let hi = match (self.hi, o.hi) {
            (Some(a), Some(b)) if b <= a => Some(a),
            _ => None,
        };
        Itv::new(lo, hi)
    }

    /// `k * self`; overflowing bounds become infinite.
    pub fn scale(&self, k: Int) -> Itv {
        let l = self.lo.and_then(|v| v.checked_mul(k));
        let h = self.hi.and_then(|v| v.checked_mul(k));
        if k >= 0 {
            Itv::new(l, h)
        } else {
            Itv::new(h, l)
        }
    }

    pub fn add(&self, o: &Itv) -> Itv {
        Itv::new(
            self.lo.zip(o.lo).and_then(|(a, b)| a.checked_add(b)),
            self.hi.zip(o.hi).and_then(|(a, b)| a.checked_add(b)),
        )
    }
}

/// Range of `e` when every variable ranges over `range(v)`.
pub fn expr_range<F: Fn(&Var) -> Itv>(e: &LinExpr, range: F) -> Itv {
    let mut acc = Itv::constant(e.constant_term());
    for (v, a) in e.terms() {
        acc = acc.add(&range(v).scale(*a));
    }
    acc
}

/// Bounds implied on each variable of `e <= c` by the ranges of the others.
pub fn propagate_le<F: Fn(&Var) -> Itv>(e: &LinExpr, c: Int, range: F) -> Vec<(Var, Itv)> {
    let mut out = Vec::new();
    for (x, a) in e.terms() {
        let rest = expr_range(
            &e.checked_sub(&LinExpr::term(x.clone(), *a))
                .expect("drop term"),
            &range,
        );
        // a*x <= c - rest.lo
        let Some(budget) = rest.lo.and_then(|l| c.checked_sub(l)) else {
            continue;
        };
        let b = if *a > 0 {
            Itv::new(None, Some(floor_div(budget, *a)))
        } else {
            Itv::new(Some(ceil_div(budget, *a)), None)
        };
        out.push((x.clone(), b));
    }
    out
}

/// Non-relational interval state; `None` is bottom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntervalState {
    env: Arc<Env>,
    itvs: Option<Vec<Itv>>,
}

impl IntervalState {
    pub fn top(env: Arc<Env>) -> Self {
        let n = env.len();
        IntervalState {
            env,
            itvs: Some(vec![Itv::TOP; n]),
        }
    }

    pub fn bottom(env: Arc<Env>) -> Self {
        IntervalState { env, itvs: None }
    }

    pub fn env(&self) -> &Arc<Env> {
        &self.env
    }

    pub fn is_bottom(&self) -> bool {
        self.itvs.is_none()
    }

    pub fn get(&self, v: &Var) -> Itv {
        match &self.itvs {
            None => Itv::new(Some(1), Some(0)),
            Some(it) => self.env.index(v).map_or(Itv::TOP, |i| it[i]),
        }
    }

    pub fn set(&mut self, v: &Var, itv: Itv) {
        let Some(i) = self.env.index(v) else { return };
        if let Some(it) = &mut self.itvs {
            if itv.is_empty() {
                self.itvs = None;
            } else {
                it[i] = itv;
            }
        }
    }

    pub fn leq(&self, o: &Self) -> bool {
        match (&self.itvs, &o.itvs) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a.iter().zip(b).all(|(x, y)| x.leq(y)),
        }
    }

    pub fn join(&self, o: &Self) -> Self {
        match (&self.itvs, &o.itvs) {
            (None, _) => o.clone(),
            (_, None) => self.clone(),
            (Some(a), Some(b)) => IntervalState {
                env: self.env.clone(),
                itvs: Some(a.iter().zip(b).map(|(x, y)| x.join(y)).collect()),
            },
        }
    }

    pub fn widen(&self, o: &Self) -> Self {
        match (&self.itvs, &o.itvs) {
            (None, _) => o.clone(),
            (_, None) => self.clone(),
            (Some(a), Some(b)) => IntervalState {
                env: self.env.clone(),
                itvs: Some(a.iter().zip(b).map(|(x, y)| x.widen(y)).collect()),
            },
        }
    }

    pub fn havoc(&mut self, x: &Var) {
        if !self.is_bottom() {
            self.set(x, Itv::TOP);
        }
    }

    pub fn assign(&mut self, x: &Var, e: &LinExpr) {
        if self.is_bottom() {
            return;
        }
        let r = expr_range(e, |v| self.get(v));
        self.set(x, r);
    }

    /// Meets with one atom by bound propagation. Atoms the domain cannot
    /// express are only used to detect emptiness.
    pub fn assume_atom(&mut self, a: &Atom) {
        if self.is_bottom() {
            return;
        }
        match a {
            Atom::Le(e, c) => self.assume_le(e, *c),
            Atom::Eq(e, c) => {
                self.assume_le(e, *c);
                if let Some(neg) = e.checked_scale(-1) {
                    self.assume_le(&neg, -*c);
                }
            }
            Atom::Cong(e, m, r) => {
                if e.terms().len() == 1 {
                    let (x, k) = e.terms().iter().next().unwrap();
                    match super::congruence::solve_linear(*k, *r, *m) {
                        Some((m2, r2)) => {
                            let t = tighten_to_congruence(self.get(x), m2, r2);
                            self.set(x, t);
                        }
                        None => self.itvs = None,
                    }
                }
            }
        }
        self.check_constant_atom(a);
    }

    fn assume_le(&mut self, e: &LinExpr, c: Int) {
        for (x, b) in propagate_le(e, c, |v| self.get(v)) {
            let m = self.get(&x).meet(&b);
            self.set(&x, m);
            if self.is_bottom() {
                return;
            }
        }
    }

    fn check_constant_atom(&mut self, a: &Atom) {
        if self.is_bottom() {
            return;
        }
        let vals: Option<Vec<(Var, Int)>> = a
            .lhs()
            .vars()
            .map(|v| self.get(v).as_constant().map(|c| (v.clone(), c)))
            .collect();
        if let Some(vals) = vals {
            let s = crate::semantics::ConcreteState::from_pairs(vals);
            if a.holds(&s) == Some(false) {
                self.itvs = None;
            }
        }
    }

    /// Meets with a cube; propagation is repeated a bounded number of times.
    pub fn assume_cube(&mut self, cube: &Cube) {
        for _ in 0..4 {
            let before = self.clone();
            for a in cube {
                self.assume_atom(a);
            }
            if *self == before || self.is_bottom() {
                break;
            }
        }
    }

    pub fn to_lits(&self) -> Option<Vec<Lit>> {
        let it = self.itvs.as_ref()?;
        let mut out = Vec::new();
        for (v, itv) in self.env.vars().iter().zip(it) {
            let x = LinExpr::var(v.clone());
            if let Some(c) = itv.as_constant() {
                out.push(lit_from(Atom::eq(&x.checked_add_constant(-c).unwrap())));
                continue;
            }
            if let Some(l) = itv.lo {
                out.push(lit_from(Atom::le(
                    &LinExpr::term(v.clone(), -1)
                        .checked_add_constant(l)
                        .unwrap(),
                )));
            }
            if let Some(h) = itv.hi {
                out.push(lit_from(Atom::le(&x.checked_add_constant(-h).unwrap())));
            }
        }
        Some(out)
    }
}

/// Shrinks `itv` to the nearest values congruent to `r` modulo `m`
/// (`m == 0` pins the constant `r`).
pub fn tighten_to_congruence(itv: Itv, m: Int, r: Int) -> Itv {
    if m == 0 {
        return itv.meet(&Itv::constant(r));
    }
    let lo = itv.lo.and_then(|l| l.checked_add((r - l).rem_euclid(m)));
    let hi = itv.hi.and_then(|h| h.checked_sub((h - r).rem_euclid(m)));
    Itv::new(lo.or(itv.lo), hi.or(itv.hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widening_drops_unstable_bounds() {
        let a = Itv::constant(0);
        let b = Itv::new(Some(0), Some(1));
        assert_eq!(a.widen(&b), Itv::new(Some(0), None));
        assert_eq!(b.widen(&b), b);
    }

    #[test]
    fn congruence_tightening() {
        let t = tighten_to_congruence(Itv::new(Some(-3), Some(10)), 4, 1);
        assert_eq!(t, Itv::new(Some(-3), Some(9)));
        let t = tighten_to_congruence(Itv::new(Some(2), Some(3)), 5, 0);
        assert!(t.is_empty());
    }

    #[test]
    fn propagation_of_two_variable_bound() {
        let e = LinExpr::var(Var::new("x"))
            .checked_add(&LinExpr::term(Var::new("y"), 2))
            .unwrap();
        let ranges = |v: &Var| {
            if v.name() == "y" {
                Itv::new(Some(1), Some(5))
            } else {
                Itv::new(Some(0), None)
            }
        };
        let out = propagate_le(&e, 10, ranges);
        assert_eq!(out[0], (Var::new("x"), Itv::new(None, Some(8))));
        assert_eq!(out[1], (Var::new("y"), Itv::new(None, Some(5))));
    }
}
