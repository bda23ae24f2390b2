use std::collections::BTreeSet;
use std::fmt;

use crate::expr::{floor_div, gcd, BoolExpr, CmpOp, Int, LinExpr, Var};
use crate::semantics::ConcreteState;

/// A canonical linear atom. Expressions carry no constant part and at least
/// one variable; constant atoms are folded to true/false on construction.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `e <= c`, coefficients of `e` coprime.
    Le(LinExpr, Int),
    /// `e == c`, coefficients coprime, first coefficient positive.
    Eq(LinExpr, Int),
    /// `e ≡ r (mod m)`, `m >= 2`, `0 <= r < m`, coefficients in `[1, m)`.
    Cong(LinExpr, Int, Int),
}

/// Result of building an atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lit {
    True,
    False,
    Atom(Atom),
}

impl Atom {
    /// `e <= 0` for an arbitrary expression.
    pub fn le(e: &LinExpr) -> Option<Lit> {
        let c = e.constant_term().checked_neg()?;
        let h = e.homogeneous();
        if h.is_constant() {
            return Some(if 0 <= c { Lit::True } else { Lit::False });
        }
        let g = h.content();
        Some(Lit::Atom(Atom::Le(
            h.map_coeffs(|a| a / g),
            floor_div(c, g),
        )))
    }

    /// `e == 0`.
    pub fn eq(e: &LinExpr) -> Option<Lit> {
        let c = e.constant_term().checked_neg()?;
        let h = e.homogeneous();
        if h.is_constant() {
            return Some(if c == 0 { Lit::True } else { Lit::False });
        }
        let g = h.content();
        if c % g != 0 {
            return Some(Lit::False);
        }
        let lead = *h.terms().values().next().unwrap();
        let s = if lead < 0 { -g } else { g };
        Some(Lit::Atom(Atom::Eq(h.map_coeffs(|a| a / s), c / s)))
    }

    /// `e ≡ 0 (mod m)`.
    pub fn cong(e: &LinExpr, m: Int) -> Option<Lit> {
        let m = m.checked_abs()?;
        if m == 0 {
            return Atom::eq(e);
        }
        if m == 1 {
            return Some(Lit::True);
        }
        let h = e.homogeneous().map_coeffs(|a| a.rem_euclid(m));
        let r = e.constant_term().checked_neg()?.rem_euclid(m);
        if h.is_constant() {
            return Some(if r == 0 { Lit::True } else { Lit::False });
        }
        let g = gcd(h.content(), m);
        if r % g != 0 {
            return Some(Lit::False);
        }
        let m = m / g;
        if m == 1 {
            return Some(Lit::True);
        }
        Some(Lit::Atom(Atom::Cong(h.map_coeffs(|a| a / g), m, r / g)))
    }

    /// The atom as `expr ⋈ 0` with constant folded back in.
    pub fn expr(&self) -> LinExpr {
        match self {
            Atom::Le(e, c) | Atom::Eq(e, c) | Atom::Cong(e, _, c) => {
                e.checked_add_constant(-c).expect("negated bound")
            }
        }
    }

    pub fn lhs(&self) -> &LinExpr {
        match self {
            Atom::Le(e, _) | Atom::Eq(e, _) | Atom::Cong(e, _, _) => e,
        }
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.lhs().mentions(v)
    }

    fn rebuild(&self, e: &LinExpr) -> Option<Lit> {
        match self {
            Atom::Le(..) => Atom::le(e),
            Atom::Eq(..) => Atom::eq(e),
            Atom::Cong(_, m, _) => Atom::cong(e, *m),
        }
    }

    pub fn substitute(&self, v: &Var, by: &LinExpr) -> Option<Lit> {
        if !self.mentions(v) {
            return Some(Lit::Atom(self.clone()));
        }
        self.rebuild(&self.expr().substitute(v, by)?)
    }

    pub fn rename(&self, from: &Var, to: &Var) -> Atom {
        match self.rebuild(&self.expr().rename(from, to)) {
            Some(Lit::Atom(a)) => a,
            _ => unreachable!("renaming preserves the atom shape"),
        }
    }

    /// Multiplies the relation by a positive factor (`k*e ⋈ k*c`).
    pub fn scale(&self, k: Int) -> Option<(LinExpr, AtomKind)> {
        debug_assert!(k > 0);
        let e = self.expr().checked_scale(k)?;
        Some(match self {
            Atom::Le(..) => (e, AtomKind::Le),
            Atom::Eq(..) => (e, AtomKind::Eq),
            Atom::Cong(_, m, _) => (e, AtomKind::Cong(m.checked_mul(k)?)),
        })
    }

    pub fn holds(&self, s: &ConcreteState) -> Option<bool> {
        let v = self.lhs().eval_with(|x| s.get(x))?;
        Some(match self {
            Atom::Le(_, c) => v <= *c,
            Atom::Eq(_, c) => v == *c,
            Atom::Cong(_, m, r) => v.rem_euclid(*m) == *r,
        })
    }

    /// The negation as a disjunction of atoms.
    pub fn negate(&self) -> Vec<Lit> {
        match self {
            Atom::Le(e, c) => vec![Atom::le(
                &e.checked_scale(-1)
                    .unwrap()
                    .checked_add_constant(c + 1)
                    .unwrap(),
            )
            .unwrap()],
            Atom::Eq(e, c) => vec![
                Atom::le(&e.checked_add_constant(-(c - 1)).unwrap()).unwrap(),
                Atom::le(
                    &e.checked_scale(-1)
                        .unwrap()
                        .checked_add_constant(c + 1)
                        .unwrap(),
                )
                .unwrap(),
            ],
            Atom::Cong(e, m, r) => (0..*m)
                .filter(|x| x != r)
                .map(|x| Atom::cong(&e.checked_add_constant(-x).unwrap(), *m).unwrap())
                .collect(),
        }
    }

    pub fn kind(&self) -> AtomKind {
        match self {
            Atom::Le(..) => AtomKind::Le,
            Atom::Eq(..) => AtomKind::Eq,
            Atom::Cong(_, m, _) => AtomKind::Cong(*m),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomKind {
    Le,
    Eq,
    Cong(Int),
}

impl AtomKind {
    pub fn build(self, e: &LinExpr) -> Option<Lit> {
        match self {
            AtomKind::Le => Atom::le(e),
            AtomKind::Eq => Atom::eq(e),
            AtomKind::Cong(m) => Atom::cong(e, m),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Le(e, c) => {
                if e.terms().len() == 1 {
                    let (v, a) = e.terms().iter().next().unwrap();
                    if *a == -1 {
                        return write!(f, "{v} >= {}", -c);
                    }
                }
                write!(f, "{e} <= {c}")
            }
            Atom::Eq(e, c) => write!(f, "{e} == {c}"),
            Atom::Cong(e, m, r) => {
                if e.terms().len() == 1 {
                    write!(f, "{e} mod {m} == {r}")
                } else {
                    write!(f, "({e}) mod {m} == {r}")
                }
            }
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub type Cube = BTreeSet<Atom>;

/// A quantifier-free formula in disjunctive normal form.
///
/// `false` has no cubes; `true` is the single empty cube.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Predicate {
    cubes: BTreeSet<Cube>,
}

impl Predicate {
    pub fn tru() -> Self {
        Predicate {
            cubes: BTreeSet::from([Cube::new()]),
        }
    }

    pub fn fls() -> Self {
        Predicate {
            cubes: BTreeSet::new(),
        }
    }

    pub fn is_true(&self) -> bool {
        self.cubes.len() == 1 && self.cubes.iter().next().unwrap().is_empty()
    }

    pub fn is_false(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn cubes(&self) -> impl Iterator<Item = &Cube> {
        self.cubes.iter()
    }

    pub fn num_cubes(&self) -> usize {
        self.cubes.len()
    }

    pub fn lit(l: Lit) -> Self {
        match l {
            Lit::True => Predicate::tru(),
            Lit::False => Predicate::fls(),
            Lit::Atom(a) => Predicate::from_cube(Cube::from([a])),
        }
    }

    pub fn atom(a: Atom) -> Self {
        Predicate::from_cube(Cube::from([a]))
    }

    pub fn from_cube(c: Cube) -> Self {
        Predicate::from_cubes([c])
    }

    pub fn from_cubes<I: IntoIterator<Item = Cube>>(cubes: I) -> Self {
        let mut p = Predicate {
            cubes: cubes.into_iter().filter_map(simplify_cube).collect(),
        };
        p.drop_subsumed();
        p
    }

    /// Conjunction of literals.
    pub fn conj<I: IntoIterator<Item = Lit>>(lits: I) -> Self {
        let mut cube = Cube::new();
        for l in lits {
            match l {
                Lit::True => {}
                Lit::False => return Predicate::fls(),
                Lit::Atom(a) => {
                    cube.insert(a);
                }
            }
        }
        Predicate::from_cube(cube)
    }

    fn drop_subsumed(&mut self) {
        if self.cubes.iter().any(|c| c.is_empty()) {
            self.cubes = BTreeSet::from([Cube::new()]);
            return;
        }
        let all: Vec<Cube> = self.cubes.iter().cloned().collect();
        self.cubes
            .retain(|c| !all.iter().any(|d| d != c && d.is_subset(c)));
    }

    pub fn and(&self, other: &Predicate) -> Predicate {
        let mut cubes = Vec::new();
        for a in &self.cubes {
            for b in &other.cubes {
                cubes.push(a.union(b).cloned().collect());
            }
        }
        Predicate::from_cubes(cubes)
    }

    pub fn or(&self, other: &Predicate) -> Predicate {
        Predicate::from_cubes(self.cubes.iter().chain(other.cubes.iter()).cloned())
    }

    pub fn negate(&self) -> Predicate {
        let mut acc = Predicate::tru();
        for cube in &self.cubes {
            let mut neg_cube = Predicate::fls();
            for a in cube {
                for l in a.negate() {
                    neg_cube = neg_cube.or(&Predicate::lit(l));
                }
            }
            acc = acc.and(&neg_cube);
            if acc.is_false() {
                break;
            }
        }
        acc
    }

    /// DNF of a guard. `!=` splits into `<` or `>`.
    pub fn from_bool_expr(b: &BoolExpr) -> Predicate {
        match b {
            BoolExpr::True => Predicate::tru(),
            BoolExpr::False => Predicate::fls(),
            BoolExpr::Not(a) => Predicate::from_bool_expr(&a.negate()),
            BoolExpr::And(a, c) => Predicate::from_bool_expr(a).and(&Predicate::from_bool_expr(c)),
            BoolExpr::Or(a, c) => Predicate::from_bool_expr(a).or(&Predicate::from_bool_expr(c)),
            BoolExpr::Cmp(l, op, r) => {
                let d = l.checked_sub(r).expect("guard overflow");
                let neg = d.checked_scale(-1).expect("guard overflow");
                let lit = |e: LinExpr| Predicate::lit(Atom::le(&e).expect("guard overflow"));
                match op {
                    CmpOp::Lt => lit(d.checked_add_constant(1).unwrap()),
                    CmpOp::Le => lit(d),
                    CmpOp::Gt => lit(neg.checked_add_constant(1).unwrap()),
                    CmpOp::Ge => lit(neg),
                    CmpOp::Eq => Predicate::lit(Atom::eq(&d).expect("guard overflow")),
                    CmpOp::Ne => lit(d.checked_add_constant(1).unwrap())
                        .or(&lit(neg.checked_add_constant(1).unwrap())),
                }
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.cubes
            .iter()
            .flat_map(|c| c.iter().flat_map(|a| a.lhs().vars().cloned()))
            .collect()
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.cubes.iter().any(|c| c.iter().any(|a| a.mentions(v)))
    }

    /// Replaces `v` by `by`; `None` on overflow.
    pub fn substitute(&self, v: &Var, by: &LinExpr) -> Option<Predicate> {
        let mut cubes = Vec::new();
        'cubes: for c in &self.cubes {
            let mut out = Cube::new();
            for a in c {
                match a.substitute(v, by)? {
                    Lit::True => {}
                    Lit::False => continue 'cubes,
                    Lit::Atom(a) => {
                        out.insert(a);
                    }
                }
            }
            cubes.push(out);
        }
        Some(Predicate::from_cubes(cubes))
    }

    pub fn rename(&self, from: &Var, to: &Var) -> Predicate {
        Predicate::from_cubes(
            self.cubes
                .iter()
                .map(|c| c.iter().map(|a| a.rename(from, to)).collect()),
        )
    }

    /// Truth value in a state that assigns every mentioned variable.
    pub fn holds(&self, s: &ConcreteState) -> Option<bool> {
        for c in &self.cubes {
            let mut all = true;
            for a in c {
                if !a.holds(s)? {
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

    pub fn retain_cubes<F: FnMut(&Cube) -> bool>(&mut self, f: F) {
        self.cubes.retain(f);
    }
}

/// Drops atoms made redundant by a single other atom over the same expression
/// and detects pairwise contradictions. `None` means the cube is unsatisfiable.
pub fn simplify_cube(cube: Cube) -> Option<Cube> {
    use std::collections::BTreeMap;
    // Per homogeneous expression (up to sign): upper bound on e, upper bound on -e, equality, congruences.
    #[derive(Default)]
    struct Facts {
        upper: Option<Int>,
        lower: Option<Int>,
        eq: Option<Int>,
        congs: Vec<(Int, Int)>,
    }
    let mut facts: BTreeMap<LinExpr, Facts> = BTreeMap::new();
    let mut other = Cube::new();
    for a in cube {
        match &a {
            Atom::Le(e, c) => {
                let lead = *e.terms().values().next().unwrap();
                if lead > 0 {
                    let f = facts.entry(e.clone()).or_default();
                    f.upper = Some(f.upper.map_or(*c, |u| u.min(*c)));
                } else {
                    let f = facts.entry(e.checked_scale(-1).unwrap()).or_default();
                    let lo = -c;
                    f.lower = Some(f.lower.map_or(lo, |l| l.max(lo)));
                }
            }
            Atom::Eq(e, c) => {
                let f = facts.entry(e.clone()).or_default();
                if let Some(prev) = f.eq {
                    if prev != *c {
                        return None;
                    }
                }
                f.eq = Some(*c);
            }
            Atom::Cong(e, m, r) => {
                let lead = *e.terms().values().next().unwrap();
                debug_assert!(lead > 0);
                if e.terms().len() == 1 && lead == 1 {
                    facts.entry(e.clone()).or_default().congs.push((*m, *r));
                } else {
                    other.insert(a);
                }
            }
        }
    }
    let mut out = other;
    for (e, f) in facts {
        let (mut lo, mut hi, mut eq) = (f.lower, f.upper, f.eq);
        if let Some(v) = eq {
            if lo.is_some_and(|l| v < l) || hi.is_some_and(|h| v > h) {
                return None;
            }
            lo = None;
            hi = None;
        }
        if let (Some(l), Some(h)) = (lo, hi) {
            if l > h {
                return None;
            }
            if l == h {
                eq = Some(l);
                lo = None;
                hi = None;
            }
        }
        for (m, r) in &f.congs {
            match eq {
                Some(v) if v.rem_euclid(*m) != *r => return None,
                Some(_) => {}
                None => {
                    out.insert(Atom::Cong(e.clone(), *m, *r));
                }
            }
        }
        if let Some(v) = eq {
            out.insert(Atom::Eq(e.clone(), v));
        }
        if let Some(h) = hi {
            out.insert(Atom::Le(e.clone(), h));
        }
        if let Some(l) = lo {
            out.insert(Atom::Le(e.checked_scale(-1).unwrap(), -l));
        }
    }
    Some(out)
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_false() {
            return f.write_str("false");
        }
        if self.is_true() {
            return f.write_str("true");
        }
        let many = self.cubes.len() > 1;
        for (i, c) in self.cubes.iter().enumerate() {
            if i > 0 {
                f.write_str(" || ")?;
            }
            let paren = many && c.len() > 1;
            if paren {
                f.write_str("(")?;
            }
            for (j, a) in c.iter().enumerate() {
                if j > 0 {
                    f.write_str(" && ")?;
                }
                write!(f, "{a}")?;
            }
            if paren {
                f.write_str(")")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
