//! Statement alphabet: linear integer expressions, boolean guards and statements.
//!
//! Every type here has a canonical textual form produced by `Display`. The
//! canonical form is accepted by [`crate::frontend::parse_statement`], and two
//! statements are equal exactly when their canonical forms are equal, which is
//! what makes statements usable as automaton letters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

/// Mathematical integers, represented with checked 128-bit arithmetic.
pub type Int = i128;

/// A program variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Variables introduced by the solver or by predicate transformers carry a
    /// character that cannot appear in a source identifier.
    pub fn is_auxiliary(&self) -> bool {
        self.0.contains(['\'', '#'])
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

impl Serialize for Var {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// `sum(coeff * var) + constant`, with no zero coefficients stored.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr {
    terms: BTreeMap<Var, Int>,
    constant: Int,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr::default()
    }

    pub fn constant(c: Int) -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: Var) -> Self {
        LinExpr::term(v, 1)
    }

    pub fn term(v: Var, coeff: Int) -> Self {
        let mut terms = BTreeMap::new();
        if coeff != 0 {
            terms.insert(v, coeff);
        }
        LinExpr { terms, constant: 0 }
    }

    /// Builds an expression from arbitrary (possibly repeated or zero) terms.
    pub fn from_terms<I: IntoIterator<Item = (Var, Int)>>(terms: I, constant: Int) -> Option<Self> {
        let mut e = LinExpr::constant(constant);
        for (v, c) in terms {
            e.add_term(v, c)?;
        }
        Some(e)
    }

    pub fn terms(&self) -> &BTreeMap<Var, Int> {
        &self.terms
    }

    pub fn constant_term(&self) -> Int {
        self.constant
    }

    pub fn coeff(&self, v: &Var) -> Int {
        self.terms.get(v).copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.terms.keys()
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.terms.contains_key(v)
    }

    /// The same expression with the constant part removed.
    pub fn homogeneous(&self) -> LinExpr {
        LinExpr {
            terms: self.terms.clone(),
            constant: 0,
        }
    }

    fn add_term(&mut self, v: Var, c: Int) -> Option<()> {
        if c == 0 {
            return Some(());
        }
        let slot = self.terms.entry(v.clone()).or_insert(0);
        *slot = slot.checked_add(c)?;
        if *slot == 0 {
            self.terms.remove(&v);
        }
        Some(())
    }

    pub fn checked_add(&self, other: &LinExpr) -> Option<LinExpr> {
        let mut out = self.clone();
        out.constant = out.constant.checked_add(other.constant)?;
        for (v, c) in &other.terms {
            out.add_term(v.clone(), *c)?;
        }
        Some(out)
    }

    pub fn checked_sub(&self, other: &LinExpr) -> Option<LinExpr> {
        self.checked_add(&other.checked_scale(-1)?)
    }

    pub fn checked_scale(&self, k: Int) -> Option<LinExpr> {
        if k == 0 {
            return Some(LinExpr::zero());
        }
        let mut terms = BTreeMap::new();
        for (v, c) in &self.terms {
            terms.insert(v.clone(), c.checked_mul(k)?);
        }
        Some(LinExpr {
            terms,
            constant: self.constant.checked_mul(k)?,
        })
    }

    pub fn checked_add_constant(&self, k: Int) -> Option<LinExpr> {
        let mut out = self.clone();
        out.constant = out.constant.checked_add(k)?;
        Some(out)
    }

    /// Replaces `v` by `by` everywhere.
    pub fn substitute(&self, v: &Var, by: &LinExpr) -> Option<LinExpr> {
        match self.terms.get(v) {
            None => Some(self.clone()),
            Some(&c) => {
                let mut rest = self.clone();
                rest.terms.remove(v);
                rest.checked_add(&by.checked_scale(c)?)
            }
        }
    }

    pub fn rename(&self, from: &Var, to: &Var) -> LinExpr {
        match self.terms.get(from) {
            None => self.clone(),
            Some(&c) => {
                let mut out = self.clone();
                out.terms.remove(from);
                // `to` is fresh at every call site, so no merge can overflow.
                out.add_term(to.clone(), c)
                    .expect("rename into fresh variable");
                out
            }
        }
    }

    /// Evaluates under a (partial) valuation; `None` on a missing variable or overflow.
    pub fn eval_with<F: Fn(&Var) -> Option<Int>>(&self, valuation: F) -> Option<Int> {
        let mut acc = self.constant;
        for (v, c) in &self.terms {
            acc = acc.checked_add(c.checked_mul(valuation(v)?)?)?;
        }
        Some(acc)
    }

    /// gcd of all variable coefficients (0 for a constant expression).
    pub fn content(&self) -> Int {
        self.terms.values().fold(0, |g, c| gcd(g, *c))
    }

    pub(crate) fn map_coeffs<F: Fn(Int) -> Int>(&self, f: F) -> LinExpr {
        let mut terms = BTreeMap::new();
        for (v, c) in &self.terms {
            let c = f(*c);
            if c != 0 {
                terms.insert(v.clone(), c);
            }
        }
        LinExpr {
            terms,
            constant: self.constant,
        }
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, &c) in &self.terms {
            let mag = c.unsigned_abs();
            if first {
                if c < 0 {
                    f.write_str("-")?;
                }
            } else if c < 0 {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if mag == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant > 0 {
            write!(f, " + {}", self.constant)
        } else if self.constant < 0 {
            write!(f, " - {}", self.constant.unsigned_abs())
        } else {
            Ok(())
        }
    }
}

impl fmt::Debug for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Division rounding toward negative infinity.
pub fn floor_div(a: Int, b: Int) -> Int {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

pub fn ceil_div(a: Int, b: Int) -> Int {
    -floor_div(-a, b)
}

pub fn gcd(a: Int, b: Int) -> Int {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as Int
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    pub fn holds(self, l: Int, r: Int) -> bool {
        match self {
            CmpOp::Lt => l < r,
            CmpOp::Le => l <= r,
            CmpOp::Gt => l > r,
            CmpOp::Ge => l >= r,
            CmpOp::Eq => l == r,
            CmpOp::Ne => l != r,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoolExpr {
    True,
    False,
    Cmp(LinExpr, CmpOp, LinExpr),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn cmp(l: LinExpr, op: CmpOp, r: LinExpr) -> BoolExpr {
        BoolExpr::Cmp(l, op, r)
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(a))
    }

    /// Logical negation pushed down to the comparisons (De Morgan), so that
    /// `!(x < 100)` becomes `x >= 100`.
    pub fn negate(&self) -> BoolExpr {
        match self {
            BoolExpr::True => BoolExpr::False,
            BoolExpr::False => BoolExpr::True,
            BoolExpr::Cmp(l, op, r) => BoolExpr::Cmp(l.clone(), op.negate(), r.clone()),
            BoolExpr::Not(inner) => (**inner).clone(),
            BoolExpr::And(a, b) => BoolExpr::or(a.negate(), b.negate()),
            BoolExpr::Or(a, b) => BoolExpr::and(a.negate(), b.negate()),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::Cmp(l, _, r) => {
                out.extend(l.vars().cloned());
                out.extend(r.vars().cloned());
            }
            BoolExpr::Not(a) => a.collect_vars(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn eval_with<F: Fn(&Var) -> Option<Int> + Copy>(&self, valuation: F) -> Option<bool> {
        Some(match self {
            BoolExpr::True => true,
            BoolExpr::False => false,
            BoolExpr::Cmp(l, op, r) => op.holds(l.eval_with(valuation)?, r.eval_with(valuation)?),
            BoolExpr::Not(a) => !a.eval_with(valuation)?,
            BoolExpr::And(a, b) => a.eval_with(valuation)? && b.eval_with(valuation)?,
            BoolExpr::Or(a, b) => a.eval_with(valuation)? || b.eval_with(valuation)?,
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            BoolExpr::Or(..) => 1,
            BoolExpr::And(..) => 2,
            _ => 3,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::True => f.write_str("true"),
            BoolExpr::False => f.write_str("false"),
            BoolExpr::Cmp(l, op, r) => write!(f, "{l} {} {r}", op.symbol()),
            BoolExpr::Not(a) => {
                f.write_str("!")?;
                a.fmt_child(f, a.precedence() < 3 || matches!(**a, BoolExpr::Cmp(..)))
            }
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                let me = self.precedence();
                a.fmt_child(f, a.precedence() < me)?;
                f.write_str(if me == 1 { " || " } else { " && " })?;
                b.fmt_child(f, b.precedence() <= me)
            }
        }
    }
}

impl fmt::Debug for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A letter of the program alphabet.
///
/// `Seq` holds at least two non-`Seq` parts; build it through
/// [`Statement::seq`] to keep that canonical shape.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Statement {
    Assume(BoolExpr),
    Assign(Var, LinExpr),
    Havoc(Var),
    Seq(Vec<Statement>),
}

impl Statement {
    pub fn assume(b: BoolExpr) -> Statement {
        Statement::Assume(b)
    }

    pub fn assign(v: impl Into<Var>, e: LinExpr) -> Statement {
        Statement::Assign(v.into(), e)
    }

    /// Sequential composition, flattened.
    pub fn seq<I: IntoIterator<Item = Statement>>(parts: I) -> Statement {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Statement::Seq(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Statement::Assume(BoolExpr::True),
            1 => flat.pop().unwrap(),
            _ => Statement::Seq(flat),
        }
    }

    /// The non-`Seq` parts in execution order.
    pub fn parts(&self) -> &[Statement] {
        match self {
            Statement::Seq(parts) => parts,
            other => std::slice::from_ref(other),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for p in self.parts() {
            match p {
                Statement::Assume(b) => out.extend(b.vars()),
                Statement::Assign(v, e) => {
                    out.insert(v.clone());
                    out.extend(e.vars().cloned());
                }
                Statement::Havoc(v) => {
                    out.insert(v.clone());
                }
                Statement::Seq(_) => unreachable!("nested Seq"),
            }
        }
        out
    }

    pub fn contains_havoc(&self) -> bool {
        self.parts()
            .iter()
            .any(|p| matches!(p, Statement::Havoc(_)))
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Assume(b) => write!(f, "assume({b})"),
            Statement::Assign(v, e) => write!(f, "{v} := {e}"),
            Statement::Havoc(v) => write!(f, "havoc {v}"),
            Statement::Seq(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Statement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Orders letters by canonical serialization (shortlex tie-breaking of
/// counterexamples relies on this).
pub fn cmp_letters(a: &Statement, b: &Statement) -> std::cmp::Ordering {
    a.to_string().cmp(&b.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Var {
        Var::new("x")
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let e = LinExpr::var(x()).checked_sub(&LinExpr::var(x())).unwrap();
        assert!(e.is_constant());
        assert_eq!(e, LinExpr::zero());
    }

    #[test]
    fn display_forms() {
        let e = LinExpr::from_terms([(x(), -1), (Var::new("y"), 2)], -3).unwrap();
        assert_eq!(e.to_string(), "-x + 2*y - 3");
        assert_eq!(LinExpr::constant(-4).to_string(), "-4");
    }

    #[test]
    fn negate_pushes_into_atoms() {
        let b = BoolExpr::and(
            BoolExpr::cmp(LinExpr::var(x()), CmpOp::Eq, LinExpr::constant(100)),
            BoolExpr::cmp(
                LinExpr::var(Var::new("y")),
                CmpOp::Eq,
                LinExpr::constant(42),
            ),
        );
        assert_eq!(b.negate().to_string(), "x != 100 || y != 42");
    }

    #[test]
    fn seq_flattens() {
        let a = Statement::assign("x", LinExpr::constant(0));
        let b = Statement::assign("y", LinExpr::constant(42));
        let c = Statement::Havoc(x());
        let left = Statement::seq([Statement::seq([a.clone(), b.clone()]), c.clone()]);
        let right = Statement::seq([a, Statement::seq([b, c])]);
        assert_eq!(left, right);
        assert_eq!(left.to_string(), "x := 0; y := 42; havoc x");
    }
}
