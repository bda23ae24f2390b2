//! Abstract domains: intervals, octagons, congruences and the reduced
//! product of congruences with octagons.

pub mod congruence;
pub mod interval;
pub mod octagon;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::Error;
use crate::expr::{Statement, Var};
use crate::linsolve::{Atom, Cube, Lit, Predicate};
use crate::semantics::ConcreteState;

pub use congruence::{Cong, CongruenceState};
pub use interval::{IntervalState, Itv};
pub use octagon::OctagonState;

/// The variables a state ranges over, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Env {
    vars: Vec<Var>,
    index: BTreeMap<Var, usize>,
}

impl Env {
    pub fn new<I: IntoIterator<Item = Var>>(vars: I) -> Self {
        let mut vars: Vec<Var> = vars.into_iter().collect();
        vars.sort();
        vars.dedup();
        let index = vars
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        Env { vars, index }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn index(&self, v: &Var) -> Option<usize> {
        self.index.get(v).copied()
    }
}

/// Overflowing constructions weaken to `true`.
pub(crate) fn lit_from(l: Option<Lit>) -> Lit {
    l.unwrap_or(Lit::True)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DomainKind {
    Interval,
    Octagon,
    Congruence,
    /// Congruence × octagon.
    Comp,
}

impl DomainKind {
    pub const ALL: [DomainKind; 4] = [
        DomainKind::Interval,
        DomainKind::Octagon,
        DomainKind::Congruence,
        DomainKind::Comp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Interval => "interval",
            DomainKind::Octagon => "octagon",
            DomainKind::Congruence => "congruence",
            DomainKind::Comp => "comp",
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        DomainKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownDomain(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AbstractState {
    Interval(IntervalState),
    Octagon(OctagonState),
    Congruence(CongruenceState),
    Comp(CongruenceState, OctagonState),
}

impl AbstractState {
    pub fn top(kind: DomainKind, env: Arc<Env>) -> Self {
        match kind {
            DomainKind::Interval => AbstractState::Interval(IntervalState::top(env)),
            DomainKind::Octagon => AbstractState::Octagon(OctagonState::top(env)),
            DomainKind::Congruence => AbstractState::Congruence(CongruenceState::top(env)),
            DomainKind::Comp => {
                AbstractState::Comp(CongruenceState::top(env.clone()), OctagonState::top(env))
            }
        }
    }

    pub fn bottom(kind: DomainKind, env: Arc<Env>) -> Self {
        match kind {
            DomainKind::Interval => AbstractState::Interval(IntervalState::bottom(env)),
            DomainKind::Octagon => AbstractState::Octagon(OctagonState::bottom(env)),
            DomainKind::Congruence => AbstractState::Congruence(CongruenceState::bottom(env)),
            DomainKind::Comp => AbstractState::Comp(
                CongruenceState::bottom(env.clone()),
                OctagonState::bottom(env),
            ),
        }
    }

    pub fn kind(&self) -> DomainKind {
        match self {
            AbstractState::Interval(_) => DomainKind::Interval,
            AbstractState::Octagon(_) => DomainKind::Octagon,
            AbstractState::Congruence(_) => DomainKind::Congruence,
            AbstractState::Comp(..) => DomainKind::Comp,
        }
    }

    pub fn is_bottom(&self) -> bool {
        match self {
            AbstractState::Interval(s) => s.is_bottom(),
            AbstractState::Octagon(s) => s.closed().is_bottom(),
            AbstractState::Congruence(s) => s.is_bottom(),
            AbstractState::Comp(c, o) => c.is_bottom() || o.closed().is_bottom(),
        }
    }

    pub fn leq(&self, o: &Self) -> bool {
        match (self, o) {
            (AbstractState::Interval(a), AbstractState::Interval(b)) => a.leq(b),
            (AbstractState::Octagon(a), AbstractState::Octagon(b)) => a.leq(b),
            (AbstractState::Congruence(a), AbstractState::Congruence(b)) => a.leq(b),
            (AbstractState::Comp(c1, o1), AbstractState::Comp(c2, o2)) => {
                self.is_bottom() || (c1.leq(c2) && o1.leq(o2))
            }
            _ => panic!("leq across domains"),
        }
    }

    pub fn join(&self, o: &Self) -> Self {
        match (self, o) {
            (AbstractState::Interval(a), AbstractState::Interval(b)) => {
                AbstractState::Interval(a.join(b))
            }
            (AbstractState::Octagon(a), AbstractState::Octagon(b)) => {
                AbstractState::Octagon(a.join(b))
            }
            (AbstractState::Congruence(a), AbstractState::Congruence(b)) => {
                AbstractState::Congruence(a.join(b))
            }
            (AbstractState::Comp(c1, o1), AbstractState::Comp(c2, o2)) => {
                if self.is_bottom() {
                    return o.clone();
                }
                if o.is_bottom() {
                    return self.clone();
                }
                AbstractState::Comp(c1.join(c2), o1.join(o2))
            }
            _ => panic!("join across domains"),
        }
    }

    pub fn widen(&self, o: &Self) -> Self {
        match (self, o) {
            (AbstractState::Interval(a), AbstractState::Interval(b)) => {
                AbstractState::Interval(a.widen(b))
            }
            (AbstractState::Octagon(a), AbstractState::Octagon(b)) => {
                AbstractState::Octagon(a.widen(b))
            }
            (AbstractState::Congruence(a), AbstractState::Congruence(b)) => {
                AbstractState::Congruence(a.widen(b))
            }
            (AbstractState::Comp(c1, o1), AbstractState::Comp(c2, o2)) => {
                if self.is_bottom() {
                    return o.clone();
                }
                if o.is_bottom() {
                    return self.clone();
                }
                AbstractState::Comp(c1.widen(c2), o1.widen(o2))
            }
            _ => panic!("widen across domains"),
        }
    }

    /// Meet with a conjunction of atoms.
    pub fn assume_cube(&mut self, cube: &Cube) {
        match self {
            AbstractState::Interval(s) => s.assume_cube(cube),
            AbstractState::Octagon(s) => s.assume_cube(cube),
            AbstractState::Congruence(s) => s.assume_cube(cube),
            AbstractState::Comp(c, o) => {
                c.assume_cube(cube);
                o.assume_cube(cube);
            }
        }
        self.reduce();
    }

    /// Meet with a predicate: each cube separately, then joined.
    pub fn assume(&self, p: &Predicate) -> Self {
        let mut acc = AbstractState::bottom(self.kind(), self.env().clone());
        for c in p.cubes() {
            let mut s = self.clone();
            s.assume_cube(c);
            acc = acc.join(&s);
        }
        acc
    }

    pub fn env(&self) -> &Arc<Env> {
        match self {
            AbstractState::Interval(s) => s.env(),
            AbstractState::Octagon(s) => s.env(),
            AbstractState::Congruence(s) => s.env(),
            AbstractState::Comp(c, _) => c.env(),
        }
    }

    /// Abstract transformer of a statement.
    pub fn post(&self, st: &Statement) -> Self {
        if self.is_bottom() {
            return AbstractState::bottom(self.kind(), self.env().clone());
        }
        match st {
            Statement::Assume(b) => self.assume(&Predicate::from_bool_expr(b)),
            Statement::Seq(parts) => {
                let mut s = self.clone();
                for p in parts {
                    s = s.post(p);
                }
                s
            }
            Statement::Assign(x, e) => {
                let mut s = self.clone();
                match &mut s {
                    AbstractState::Interval(i) => i.assign(x, e),
                    AbstractState::Octagon(o) => o.assign(x, e),
                    AbstractState::Congruence(c) => c.assign(x, e),
                    AbstractState::Comp(c, o) => {
                        c.assign(x, e);
                        o.assign(x, e);
                    }
                }
                s.reduce();
                s
            }
            Statement::Havoc(x) => {
                let mut s = self.clone();
                match &mut s {
                    AbstractState::Interval(i) => i.havoc(x),
                    AbstractState::Octagon(o) => o.havoc(x),
                    AbstractState::Congruence(c) => c.havoc(x),
                    AbstractState::Comp(c, o) => {
                        c.havoc(x);
                        o.havoc(x);
                    }
                }
                s
            }
        }
    }

    /// Bottom propagation, constants and congruence-tightened bounds
    /// exchanged between the product components.
    fn reduce(&mut self) {
        let AbstractState::Comp(c, o) = self else {
            return;
        };
        o.close();
        if c.is_bottom() || o.is_bottom() {
            c.set_bottom();
            o.set_bottom();
            return;
        }
        let vars: Vec<Var> = o.env().vars().to_vec();
        // tightening one variable can pin another through the closure
        for _ in 0..=vars.len() {
            let mut changed = false;
            for v in &vars {
                let mut itv = o.get(v);
                let cg = c.get(v);
                if cg.m != 1 {
                    let t = interval::tighten_to_congruence(itv, cg.m, cg.r);
                    if t != itv {
                        o.restrict_var(v, t);
                        o.close();
                        if o.is_bottom() {
                            c.set_bottom();
                            return;
                        }
                        changed = true;
                        itv = o.get(v);
                    }
                }
                if let Some(k) = itv.as_constant() {
                    if c.get(v) != Cong::constant(k) {
                        c.refine(v, Cong::constant(k));
                        if c.is_bottom() {
                            o.set_bottom();
                            return;
                        }
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    pub fn to_lits(&self) -> Option<Vec<Lit>> {
        match self {
            AbstractState::Interval(s) => s.to_lits(),
            AbstractState::Octagon(s) => s.to_lits(),
            AbstractState::Congruence(s) => s.to_lits(),
            AbstractState::Comp(c, o) => {
                let mut l = o.to_lits()?;
                // constants already appear in the octagon part
                l.extend(
                    c.to_lits()?
                        .into_iter()
                        .filter(|x| matches!(x, Lit::Atom(Atom::Cong(..)))),
                );
                Some(l)
            }
        }
    }

    /// The constraints of the state as a conjunction; bottom is `false`.
    pub fn to_predicate(&self) -> Predicate {
        if self.is_bottom() {
            return Predicate::fls();
        }
        match self.to_lits() {
            None => Predicate::fls(),
            Some(l) => Predicate::conj(l),
        }
    }

    /// The state described by a cube, if the domain represents the cube
    /// exactly.
    pub fn from_cube(kind: DomainKind, env: Arc<Env>, cube: &Cube) -> Option<Self> {
        if !cube.iter().all(|a| representable(kind, &env, a)) {
            return None;
        }
        let mut s = AbstractState::top(kind, env);
        s.assume_cube(cube);
        Some(s)
    }

    /// The state of a predicate when it is a single representable cube.
    pub fn from_predicate(kind: DomainKind, env: Arc<Env>, p: &Predicate) -> Option<Self> {
        if p.is_false() {
            return Some(AbstractState::bottom(kind, env));
        }
        let mut cubes = p.cubes();
        let c = cubes.next()?;
        if cubes.next().is_some() {
            return None;
        }
        AbstractState::from_cube(kind, env, c)
    }

    /// γ-membership of a concrete state.
    pub fn contains(&self, s: &ConcreteState) -> bool {
        self.to_predicate().holds(s).unwrap_or(false)
    }
}

fn representable(kind: DomainKind, env: &Env, a: &Atom) -> bool {
    if a.lhs().vars().any(|v| env.index(v).is_none()) {
        return false;
    }
    let terms = a.lhs().terms();
    let unary = terms.len() == 1 && terms.values().all(|c| c.abs() == 1);
    let octagonal = terms.len() <= 2 && terms.values().all(|c| c.abs() == 1);
    match (kind, a) {
        (DomainKind::Interval, Atom::Le(..) | Atom::Eq(..)) => unary,
        (DomainKind::Octagon, Atom::Le(..) | Atom::Eq(..)) => octagonal,
        (DomainKind::Congruence, Atom::Eq(..) | Atom::Cong(..)) => unary,
        (DomainKind::Comp, Atom::Le(..) | Atom::Eq(..)) => octagonal,
        (DomainKind::Comp, Atom::Cong(..)) => unary,
        _ => false,
    }
}

impl fmt::Display for AbstractState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_predicate())
    }
}
