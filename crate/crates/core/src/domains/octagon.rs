//! Octagons as integer difference-bound matrices.
//!
//! Variable `k` owns the signed forms `V[2k] = +x_k` and `V[2k+1] = -x_k`;
//! entry `(i, j)` bounds `V[j] - V[i]`. Closure is the tight (integer)
//! closure: shortest paths, unary tightening, then strengthening.

use std::sync::Arc;

use crate::expr::{floor_div, Int, LinExpr, Var};
use crate::linsolve::{Atom, Cube, Lit};

use super::interval::{expr_range, Itv};
use super::{lit_from, Env};

const INF: Int = Int::MAX;

fn add(a: Int, b: Int) -> Int {
    if a == INF || b == INF {
        INF
    } else {
        a.checked_add(b)
            .unwrap_or(if a > 0 { INF } else { Int::MIN / 4 })
    }
}

fn bar(i: usize) -> usize {
    i ^ 1
}

#[derive(Clone, Debug)]
pub struct OctagonState {
    env: Arc<Env>,
    /// Row-major `2n × 2n`; `None` is bottom.
    m: Option<Vec<Int>>,
    closed: bool,
}

impl PartialEq for OctagonState {
    fn eq(&self, o: &Self) -> bool {
        self.m == o.m
    }
}

impl Eq for OctagonState {}

impl std::hash::Hash for OctagonState {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.m.hash(h)
    }
}

impl OctagonState {
    pub fn top(env: Arc<Env>) -> Self {
        let d = 2 * env.len();
        let mut m = vec![INF; d * d];
        for i in 0..d {
            m[i * d + i] = 0;
        }
        OctagonState {
            env,
            m: Some(m),
            closed: true,
        }
    }

    pub fn bottom(env: Arc<Env>) -> Self {
        OctagonState {
            env,
            m: None,
            closed: true,
        }
    }

    pub fn env(&self) -> &Arc<Env> {
        &self.env
    }

    pub fn is_bottom(&self) -> bool {
        self.m.is_none()
    }

    pub fn set_bottom(&mut self) {
        self.m = None;
        self.closed = true;
    }

    fn dim(&self) -> usize {
        2 * self.env.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> Int {
        let d = self.dim();
        self.m.as_ref().map_or(INF, |m| m[i * d + j])
    }

    /// Tightens `V[j] - V[i] <= c` and its coherent twin.
    fn constrain(&mut self, i: usize, j: usize, c: Int) {
        let d = self.dim();
        let Some(m) = &mut self.m else { return };
        for (a, b) in [(i, j), (bar(j), bar(i))] {
            if c < m[a * d + b] {
                m[a * d + b] = c;
                self.closed = false;
            }
        }
    }

    pub fn close(&mut self) {
        if self.closed {
            return;
        }
        self.closed = true;
        let d = self.dim();
        let Some(m) = &mut self.m else { return };
        for k in 0..d {
            for i in 0..d {
                let ik = m[i * d + k];
                if ik == INF {
                    continue;
                }
                for j in 0..d {
                    let v = add(ik, m[k * d + j]);
                    if v < m[i * d + j] {
                        m[i * d + j] = v;
                    }
                }
            }
        }
        for i in 0..d {
            let v = m[i * d + bar(i)];
            if v != INF {
                m[i * d + bar(i)] = 2 * floor_div(v, 2);
            }
        }
        for i in 0..d {
            if add(m[i * d + bar(i)], m[bar(i) * d + i]) < 0 || m[i * d + i] < 0 {
                self.m = None;
                return;
            }
        }
        for i in 0..d {
            for j in 0..d {
                let s = add(m[i * d + bar(i)] / 2, m[bar(j) * d + j] / 2);
                let s = if m[i * d + bar(i)] == INF || m[bar(j) * d + j] == INF {
                    INF
                } else {
                    s
                };
                if s < m[i * d + j] {
                    m[i * d + j] = s;
                }
            }
        }
        for i in 0..d {
            if m[i * d + i] < 0 {
                self.m = None;
                return;
            }
            m[i * d + i] = 0;
        }
    }

    pub fn closed(&self) -> OctagonState {
        let mut c = self.clone();
        c.close();
        c
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Bounds of variable `k` read from a closed matrix.
    fn itv_at(&self, k: usize) -> Itv {
        let hi = self.entry(2 * k + 1, 2 * k);
        let lo = self.entry(2 * k, 2 * k + 1);
        Itv::new(
            (lo != INF).then(|| -floor_div(lo, 2)),
            (hi != INF).then(|| floor_div(hi, 2)),
        )
    }

    pub fn get(&self, v: &Var) -> Itv {
        if self.is_bottom() {
            return Itv::new(Some(1), Some(0));
        }
        let c = self.closed();
        if c.is_bottom() {
            return Itv::new(Some(1), Some(0));
        }
        self.env.index(v).map_or(Itv::TOP, |k| c.itv_at(k))
    }

    pub fn leq(&self, o: &Self) -> bool {
        let a = self.closed();
        match (&a.m, &o.m) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(x), Some(y)) => x.iter().zip(y).all(|(p, q)| p <= q),
        }
    }

    pub fn join(&self, o: &Self) -> Self {
        let (a, b) = (self.closed(), o.closed());
        match (&a.m, &b.m) {
            (None, _) => b,
            (_, None) => a,
            (Some(x), Some(y)) => OctagonState {
                env: self.env.clone(),
                m: Some(x.iter().zip(y).map(|(p, q)| *p.max(q)).collect()),
                closed: true,
            },
        }
    }

    /// Entries that grew are dropped. The result is left unclosed.
    pub fn widen(&self, o: &Self) -> Self {
        let b = o.closed();
        match (&self.m, &b.m) {
            (None, _) => b,
            (_, None) => self.clone(),
            (Some(x), Some(y)) => OctagonState {
                env: self.env.clone(),
                m: Some(
                    x.iter()
                        .zip(y)
                        .map(|(p, q)| if q <= p { *p } else { INF })
                        .collect(),
                ),
                closed: false,
            },
        }
    }

    fn forget_index(&mut self, k: usize) {
        self.close();
        let d = self.dim();
        let Some(m) = &mut self.m else { return };
        for s in [2 * k, 2 * k + 1] {
            for j in 0..d {
                if j != s {
                    m[s * d + j] = INF;
                    m[j * d + s] = INF;
                }
            }
        }
    }

    pub fn havoc(&mut self, x: &Var) {
        if let Some(k) = self.env.index(x) {
            self.forget_index(k);
        }
    }

    /// `x := x + c` shifts every bound on `x`.
    fn shift(&mut self, k: usize, c: Int) {
        let d = self.dim();
        let Some(m) = &mut self.m else { return };
        let (p, n) = (2 * k, 2 * k + 1);
        for j in 0..d {
            for (row, delta) in [(p, -c), (n, c)] {
                if j != row {
                    let v = &mut m[row * d + j];
                    *v = add(*v, delta);
                    let w = &mut m[j * d + row];
                    *w = add(*w, -delta);
                }
            }
        }
    }

    fn negate_var(&mut self, k: usize) {
        let d = self.dim();
        let Some(m) = &mut self.m else { return };
        let (p, n) = (2 * k, 2 * k + 1);
        for j in 0..d {
            m.swap(p * d + j, n * d + j);
        }
        for i in 0..d {
            m.swap(i * d + p, i * d + n);
        }
    }

    /// Adds `s1*x_a + s2*x_b <= c` for signs `s1, s2 ∈ {1, -1}` (`a != b`),
    /// or `s1*x_a <= c` when `b` is `None`.
    fn add_oct(&mut self, a: usize, s1: Int, b: Option<(usize, Int)>, c: Int) {
        // s*x as a signed form index: +x is 2k, -x is 2k+1
        let form = |k: usize, s: Int| if s > 0 { 2 * k } else { 2 * k + 1 };
        match b {
            None => {
                // 2*s1*x_a <= 2c: V[form] - V[bar(form)] <= 2c
                let f = form(a, s1);
                let Some(c2) = c.checked_mul(2) else { return };
                self.constrain(bar(f), f, c2);
            }
            Some((b, s2)) => {
                // V[fa] - V[bar(fb)] = s1*x_a + s2*x_b
                let (fa, fb) = (form(a, s1), form(b, s2));
                self.constrain(bar(fb), fa, c);
            }
        }
    }

    fn assume_le(&mut self, e: &LinExpr, c: Int) {
        if self.is_bottom() {
            return;
        }
        self.close();
        if self.is_bottom() {
            return;
        }
        let terms: Vec<(usize, Int)> = e
            .terms()
            .iter()
            .filter_map(|(v, a)| self.env.index(v).map(|k| (k, *a)))
            .collect();
        if terms.len() != e.terms().len() {
            return;
        }
        let itvs: Vec<Itv> = terms.iter().map(|(k, _)| self.itv_at(*k)).collect();
        let rest_lo = |skip: &[usize]| -> Option<Int> {
            let mut acc: Int = 0;
            for (i, (_, a)) in terms.iter().enumerate() {
                if skip.contains(&i) {
                    continue;
                }
                acc = acc.checked_add(itvs[i].scale(*a).lo?)?;
            }
            Some(acc)
        };
        for i in 0..terms.len() {
            let (k, a) = terms[i];
            if let Some(budget) = rest_lo(&[i]).and_then(|r| c.checked_sub(r)) {
                self.add_oct(k, a.signum(), None, floor_div(budget, a.abs()));
            }
            for (j, &(l, b)) in terms.iter().enumerate().skip(i + 1) {
                if a.abs() != 1 || b.abs() != 1 {
                    continue;
                }
                let Some(budget) = rest_lo(&[i, j]).and_then(|r| c.checked_sub(r)) else {
                    continue;
                };
                self.add_oct(k, a, Some((l, b)), budget);
            }
        }
        self.close();
    }

    pub fn assume_atom(&mut self, a: &Atom) {
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
                    let Some(idx) = self.env.index(x) else { return };
                    self.close();
                    if self.is_bottom() {
                        return;
                    }
                    match super::congruence::solve_linear(*k, *r, *m) {
                        None => self.set_bottom(),
                        Some((m2, r2)) => {
                            let t =
                                super::interval::tighten_to_congruence(self.itv_at(idx), m2, r2);
                            self.restrict(idx, t);
                        }
                    }
                } else if let Some(v) = self.eval_constant(e) {
                    if v.rem_euclid(*m) != *r {
                        self.set_bottom();
                    }
                }
            }
        }
    }

    fn eval_constant(&self, e: &LinExpr) -> Option<Int> {
        e.eval_with(|v| self.get(v).as_constant())
    }

    /// Meets variable `k` with an interval.
    fn restrict(&mut self, k: usize, itv: Itv) {
        if itv.is_empty() {
            self.set_bottom();
            return;
        }
        if let Some(h) = itv.hi {
            self.add_oct(k, 1, None, h);
        }
        if let Some(l) = itv.lo {
            if let Some(nl) = l.checked_neg() {
                self.add_oct(k, -1, None, nl);
            }
        }
        self.close();
    }

    pub fn restrict_var(&mut self, v: &Var, itv: Itv) {
        if let Some(k) = self.env.index(v) {
            self.restrict(k, itv);
        }
    }

    pub fn assume_cube(&mut self, cube: &Cube) {
        for _ in 0..4 {
            let before = self.closed();
            for a in cube {
                self.assume_atom(a);
                if self.is_bottom() {
                    return;
                }
            }
            self.close();
            if *self == before {
                break;
            }
        }
    }

    /// Exact for `x := ±y + c`; otherwise forgets `x` and re-adds the bounds
    /// of `e` together with the differences to unit-coefficient variables.
    pub fn assign(&mut self, x: &Var, e: &LinExpr) {
        self.close();
        if self.is_bottom() {
            return;
        }
        let Some(kx) = self.env.index(x) else { return };
        let c = e.constant_term();
        let terms: Vec<(&Var, Int)> = e.terms().iter().map(|(v, a)| (v, *a)).collect();
        match terms.as_slice() {
            [] => {
                self.forget_index(kx);
                self.restrict(kx, Itv::constant(c));
            }
            [(y, a)] if *y == x && a.abs() == 1 => {
                if *a == -1 {
                    self.negate_var(kx);
                }
                self.shift(kx, c);
            }
            [(y, a)] if a.abs() == 1 && self.env.index(y).is_some() => {
                let ky = self.env.index(y).unwrap();
                self.forget_index(kx);
                // x - a*y <= c and -(x - a*y) <= -c
                self.add_oct(kx, 1, Some((ky, -a)), c);
                self.add_oct(kx, -1, Some((ky, *a)), -c);
                self.close();
            }
            _ => {
                let range = expr_range(e, |v| self.get(v));
                let mut rel = Vec::new();
                for (y, a) in &terms {
                    if *y == x || a.abs() != 1 {
                        continue;
                    }
                    let Some(ky) = self.env.index(y) else {
                        continue;
                    };
                    let rest = e
                        .checked_sub(&LinExpr::term((*y).clone(), *a))
                        .expect("drop term");
                    rel.push((ky, *a, expr_range(&rest, |v| self.get(v))));
                }
                self.forget_index(kx);
                for (ky, a, r) in rel {
                    // x - a*y ∈ r
                    if let Some(h) = r.hi {
                        self.add_oct(kx, 1, Some((ky, -a)), h);
                    }
                    if let Some(l) = r.lo.and_then(|l| l.checked_neg()) {
                        self.add_oct(kx, -1, Some((ky, a)), l);
                    }
                }
                self.restrict(kx, range);
            }
        }
    }

    /// Non-redundant-ish listing of the closed matrix as literals.
    pub fn to_lits(&self) -> Option<Vec<Lit>> {
        let c = self.closed();
        c.m.as_ref()?;
        let n = self.env.len();
        let vars = self.env.vars();
        let mut out = Vec::new();
        for (k, v) in vars.iter().enumerate().take(n) {
            let itv = c.itv_at(k);
            let x = LinExpr::var(v.clone());
            if let Some(v) = itv.as_constant() {
                out.push(lit_from(Atom::eq(&x.checked_add_constant(-v).unwrap())));
                continue;
            }
            if let Some(h) = itv.hi {
                out.push(lit_from(Atom::le(&x.checked_add_constant(-h).unwrap())));
            }
            if let Some(l) = itv.lo {
                out.push(lit_from(Atom::le(
                    &LinExpr::term(vars[k].clone(), -1)
                        .checked_add_constant(l)
                        .unwrap(),
                )));
            }
        }
        for k in 0..n {
            for l in k + 1..n {
                let (ik, il) = (c.itv_at(k), c.itv_at(l));
                if ik.as_constant().is_some() || il.as_constant().is_some() {
                    continue;
                }
                for s1 in [1, -1] {
                    for s2 in [1, -1] {
                        let form = |q: usize, s: Int| if s > 0 { 2 * q } else { 2 * q + 1 };
                        let bound = c.entry(bar(form(l, s2)), form(k, s1));
                        if bound == INF {
                            continue;
                        }
                        // skip bounds implied by the unary ones
                        let implied = add_opt(ik.scale(s1).hi, il.scale(s2).hi);
                        if implied.is_some_and(|v| v <= bound) {
                            continue;
                        }
                        let e = LinExpr::term(vars[k].clone(), s1)
                            .checked_add(&LinExpr::term(vars[l].clone(), s2))
                            .and_then(|e| e.checked_add_constant(-bound));
                        if let Some(e) = e {
                            out.push(lit_from(Atom::le(&e)));
                        }
                    }
                }
            }
        }
        Some(out)
    }
}

fn add_opt(a: Option<Int>, b: Option<Int>) -> Option<Int> {
    a.zip(b).and_then(|(a, b)| a.checked_add(b))
}
