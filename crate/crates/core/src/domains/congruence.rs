use std::sync::Arc;

use crate::expr::{gcd, Int, LinExpr, Var};
use crate::linsolve::{Atom, Cube, Lit};

use super::{lit_from, Env};

/// `x ≡ r (mod m)`; `m == 0` is the constant `r`, `m == 1` is top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cong {
    pub m: Int,
    pub r: Int,
}

impl Cong {
    pub const TOP: Cong = Cong { m: 1, r: 0 };

    pub fn new(m: Int, r: Int) -> Cong {
        let m = m.abs();
        if m == 0 {
            Cong { m, r }
        } else {
            Cong {
                m,
                r: r.rem_euclid(m),
            }
        }
    }

    pub fn constant(c: Int) -> Cong {
        Cong { m: 0, r: c }
    }

    pub fn as_constant(&self) -> Option<Int> {
        (self.m == 0).then_some(self.r)
    }

    pub fn contains(&self, v: Int) -> bool {
        if self.m == 0 {
            v == self.r
        } else {
            v.rem_euclid(self.m) == self.r
        }
    }

    pub fn leq(&self, o: &Cong) -> bool {
        if o.m == 0 {
            return self.m == 0 && self.r == o.r;
        }
        self.m % o.m == 0 && (self.r - o.r).rem_euclid(o.m) == 0
    }

    pub fn join(&self, o: &Cong) -> Cong {
        let Some(d) = self.r.checked_sub(o.r) else {
            return Cong::TOP;
        };
        let g = gcd(gcd(self.m, o.m), d);
        Cong::new(g, self.r)
    }

    /// Intersection; `None` when empty.
    pub fn meet(&self, o: &Cong) -> Option<Cong> {
        match (self.m, o.m) {
            (0, _) => o.contains(self.r).then_some(*self),
            (_, 0) => self.contains(o.r).then_some(*o),
            (m1, m2) => {
                let g = gcd(m1, m2);
                if (o.r - self.r) % g != 0 {
                    return None;
                }
                let Some(l) = (m1 / g).checked_mul(m2) else {
                    return Some(*self);
                };
                // self.r + m1*t ≡ o.r (mod m2)
                let (_, t) = solve_linear(m1, o.r - self.r, m2)?;
                let x = m1.checked_mul(t).and_then(|v| v.checked_add(self.r));
                Some(x.map_or(*self, |x| Cong::new(l, x)))
            }
        }
    }

    pub fn scale(&self, k: Int) -> Cong {
        match (self.m.checked_mul(k), self.r.checked_mul(k)) {
            (Some(m), Some(r)) => Cong::new(m, r),
            _ => Cong::TOP,
        }
    }

    pub fn add(&self, o: &Cong) -> Cong {
        let m = gcd(self.m, o.m);
        match self.r.checked_add(o.r) {
            Some(r) => Cong::new(m, r),
            None => Cong::TOP,
        }
    }
}

fn ext_gcd(a: Int, b: Int) -> (Int, Int, Int) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Solutions of `k*x ≡ r (mod m)` as a congruence `(m', r')`;
/// `m == 0` means the exact equation `k*x = r`. `None` if unsolvable.
pub fn solve_linear(k: Int, r: Int, m: Int) -> Option<(Int, Int)> {
    let m = m.abs();
    if m == 0 {
        if k == 0 {
            return if r == 0 { Some((1, 0)) } else { None };
        }
        return (r % k == 0).then(|| (0, r / k));
    }
    let k = k.rem_euclid(m);
    let r = r.rem_euclid(m);
    let g = gcd(k, m);
    if r % g != 0 {
        return None;
    }
    let (m2, k2, r2) = (m / g, k / g, r / g);
    if m2 == 1 {
        return Some((1, 0));
    }
    let (_, inv, _) = ext_gcd(k2, m2);
    let x = (inv.rem_euclid(m2))
        .checked_mul(r2)
        .map(|v| v.rem_euclid(m2))?;
    Some((m2, x))
}

/// Non-relational congruence state; `None` is bottom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CongruenceState {
    env: Arc<Env>,
    vals: Option<Vec<Cong>>,
}

impl CongruenceState {
    pub fn top(env: Arc<Env>) -> Self {
        let n = env.len();
        CongruenceState {
            env,
            vals: Some(vec![Cong::TOP; n]),
        }
    }

    pub fn bottom(env: Arc<Env>) -> Self {
        CongruenceState { env, vals: None }
    }

    pub fn env(&self) -> &Arc<Env> {
        &self.env
    }

    pub fn is_bottom(&self) -> bool {
        self.vals.is_none()
    }

    pub fn set_bottom(&mut self) {
        self.vals = None;
    }

    pub fn get(&self, v: &Var) -> Cong {
        match &self.vals {
            Some(vals) => self.env.index(v).map_or(Cong::TOP, |i| vals[i]),
            None => Cong::TOP,
        }
    }

    pub fn set(&mut self, v: &Var, c: Cong) {
        if let (Some(vals), Some(i)) = (&mut self.vals, self.env.index(v)) {
            vals[i] = c;
        }
    }

    /// Meets the value of `v` with `c`.
    pub fn refine(&mut self, v: &Var, c: Cong) {
        if self.is_bottom() {
            return;
        }
        match self.get(v).meet(&c) {
            Some(n) => self.set(v, n),
            None => self.vals = None,
        }
    }

    pub fn leq(&self, o: &Self) -> bool {
        match (&self.vals, &o.vals) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a.iter().zip(b).all(|(x, y)| x.leq(y)),
        }
    }

    pub fn join(&self, o: &Self) -> Self {
        match (&self.vals, &o.vals) {
            (None, _) => o.clone(),
            (_, None) => self.clone(),
            (Some(a), Some(b)) => CongruenceState {
                env: self.env.clone(),
                vals: Some(a.iter().zip(b).map(|(x, y)| x.join(y)).collect()),
            },
        }
    }

    /// The lattice has no infinite ascending chains, so widening is join.
    pub fn widen(&self, o: &Self) -> Self {
        self.join(o)
    }

    fn eval(&self, e: &LinExpr) -> Cong {
        let mut acc = Cong::constant(e.constant_term());
        for (v, a) in e.terms() {
            acc = acc.add(&self.get(v).scale(*a));
        }
        acc
    }

    pub fn assign(&mut self, x: &Var, e: &LinExpr) {
        if self.is_bottom() {
            return;
        }
        let c = self.eval(e);
        self.set(x, c);
    }

    pub fn havoc(&mut self, x: &Var) {
        self.set(x, Cong::TOP);
    }

    /// Equalities and congruences are solved for each of their variables in
    /// turn; inequalities only matter once every variable is constant.
    pub fn assume_atom(&mut self, a: &Atom) {
        if self.is_bottom() {
            return;
        }
        let (e, c, m) = match a {
            Atom::Eq(e, c) => (e, *c, 0),
            Atom::Cong(e, m, r) => (e, *r, *m),
            Atom::Le(e, c) => {
                let v = self.eval(e);
                if let Some(k) = v.as_constant() {
                    if k > *c {
                        self.vals = None;
                    }
                }
                return;
            }
        };
        for (x, k) in e.terms() {
            let rest = self.eval(
                &e.checked_sub(&LinExpr::term(x.clone(), *k))
                    .expect("drop term"),
            );
            // k*x ≡ c - rest (mod gcd(m, rest.m))
            let modulus = gcd(m, rest.m);
            let Some(rhs) = c.checked_sub(rest.r) else {
                continue;
            };
            match solve_linear(*k, rhs, modulus) {
                Some((m2, r2)) => self.refine(x, Cong::new(m2, r2)),
                None => {
                    self.vals = None;
                    return;
                }
            }
            if self.is_bottom() {
                return;
            }
        }
    }

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
        let vals = self.vals.as_ref()?;
        let mut out = Vec::new();
        for (v, c) in self.env.vars().iter().zip(vals) {
            let x = LinExpr::var(v.clone());
            match c.m {
                0 => out.push(lit_from(Atom::eq(&x.checked_add_constant(-c.r).unwrap()))),
                1 => {}
                m => out.push(lit_from(Atom::cong(
                    &x.checked_add_constant(-c.r).unwrap(),
                    m,
                ))),
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn join_of_residues() {
        assert_eq!(Cong::new(4, 0).join(&Cong::new(4, 2)), Cong::new(2, 0));
        assert_eq!(Cong::constant(3).join(&Cong::constant(7)), Cong::new(4, 3));
        assert_eq!(
            Cong::constant(3).join(&Cong::constant(3)),
            Cong::constant(3)
        );
    }

    #[test]
    fn ordering_is_divisibility() {
        assert!(Cong::new(4, 0).leq(&Cong::new(2, 0)));
        assert!(!Cong::new(2, 0).leq(&Cong::new(4, 0)));
        assert!(Cong::constant(6).leq(&Cong::new(3, 0)));
        assert!(Cong::new(5, 1).leq(&Cong::TOP));
    }

    #[test]
    fn meet_uses_crt() {
        assert_eq!(
            Cong::new(2, 1).meet(&Cong::new(3, 0)),
            Some(Cong::new(6, 3))
        );
        assert_eq!(Cong::new(2, 1).meet(&Cong::new(4, 2)), None);
        assert_eq!(
            Cong::new(2, 1).meet(&Cong::constant(7)),
            Some(Cong::constant(7))
        );
    }

    #[test]
    fn linear_congruence_solutions() {
        assert_eq!(solve_linear(3, 1, 7), Some((7, 5)));
        assert_eq!(solve_linear(2, 1, 4), None);
        assert_eq!(solve_linear(2, 2, 4), Some((2, 1)));
        assert_eq!(solve_linear(3, 9, 0), Some((0, 3)));
        assert_eq!(solve_linear(3, 8, 0), None);
    }
}
