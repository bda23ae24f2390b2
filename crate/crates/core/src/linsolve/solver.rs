//! Satisfiability of one cube over the integers.
//!
//! 1. Congruences become equalities with a fresh multiplier variable.
//! 2. Equalities are eliminated exactly: unit coefficients by substitution,
//!    others by unimodular (Euclid) substitution steps.
//! 3. The remaining inequalities go through Fourier–Motzkin elimination with
//!    gcd tightening. A contradiction here is a proof of integer infeasibility.
//! 4. Otherwise an integer model is searched by depth-first back-substitution
//!    through the elimination stages, bounded by a node budget.

use std::collections::{BTreeMap, HashMap};

use crate::expr::{ceil_div, floor_div, Int, Var};

use super::predicate::{Atom, Cube};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum CubeResult {
    Sat(BTreeMap<Var, Int>),
    Unsat,
    Unknown(String),
}

/// Upper limit on rows produced by Fourier–Motzkin before giving up.
const MAX_ROWS: usize = 20_000;

type Row = (Vec<Int>, Int);

struct Subst {
    var: usize,
    coeffs: Vec<Int>,
    constant: Int,
}

fn row_gcd(coeffs: &[Int]) -> Int {
    coeffs.iter().fold(0, |g, c| crate::expr::gcd(g, *c))
}

struct Overflow;

fn add_scaled(dst: &mut [Int], src: &[Int], k: Int) -> Result<(), Overflow> {
    for (d, s) in dst.iter_mut().zip(src) {
        if *s != 0 {
            *d = d
                .checked_add(s.checked_mul(k).ok_or(Overflow)?)
                .ok_or(Overflow)?;
        }
    }
    Ok(())
}

struct System {
    ncols: usize,
    eqs: Vec<Row>,
    ineqs: Vec<Row>,
    substs: Vec<Subst>,
}

impl System {
    fn add_column(&mut self) -> usize {
        self.ncols += 1;
        for r in self.eqs.iter_mut().chain(self.ineqs.iter_mut()) {
            r.0.push(0);
        }
        for s in &mut self.substs {
            s.coeffs.push(0);
        }
        self.ncols - 1
    }

    /// Replaces column `var` by `coeffs·x + constant` in every row.
    fn substitute(&mut self, var: usize, coeffs: &[Int], constant: Int) -> Result<(), Overflow> {
        for row in self.eqs.iter_mut().chain(self.ineqs.iter_mut()) {
            let a = row.0[var];
            if a == 0 {
                continue;
            }
            row.0[var] = 0;
            add_scaled(&mut row.0, coeffs, a)?;
            row.1 = row
                .1
                .checked_sub(a.checked_mul(constant).ok_or(Overflow)?)
                .ok_or(Overflow)?;
        }
        for s in &mut self.substs {
            let a = s.coeffs[var];
            if a == 0 {
                continue;
            }
            s.coeffs[var] = 0;
            add_scaled(&mut s.coeffs, coeffs, a)?;
            s.constant = s
                .constant
                .checked_add(a.checked_mul(constant).ok_or(Overflow)?)
                .ok_or(Overflow)?;
        }
        Ok(())
    }

    /// Eliminates all equalities. `Ok(false)` on an integer contradiction.
    fn eliminate_equalities(&mut self) -> Result<bool, Overflow> {
        while let Some(mut row) = self.eqs.pop() {
            loop {
                let g = row_gcd(&row.0);
                if g == 0 {
                    if row.1 != 0 {
                        return Ok(false);
                    }
                    break;
                }
                if row.1 % g != 0 {
                    return Ok(false);
                }
                for c in row.0.iter_mut() {
                    *c /= g;
                }
                row.1 /= g;
                let (j, a) = row
                    .0
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0)
                    .min_by_key(|(i, c)| (c.unsigned_abs(), *i))
                    .map(|(i, c)| (i, *c))
                    .unwrap();
                if a.abs() == 1 {
                    // x_j = (b - Σ a_i x_i) / a
                    let coeffs: Vec<Int> = row
                        .0
                        .iter()
                        .enumerate()
                        .map(|(i, c)| if i == j { 0 } else { -c * a })
                        .collect();
                    let constant = row.1 * a;
                    self.substitute(j, &coeffs, constant)?;
                    self.substs.push(Subst {
                        var: j,
                        coeffs,
                        constant,
                    });
                    break;
                }
                // Normalise the pivot sign, then x_j = x' - Σ q_i x_i + q_b.
                if a < 0 {
                    for c in row.0.iter_mut() {
                        *c = -*c;
                    }
                    row.1 = -row.1;
                }
                let a = a.abs();
                let fresh = self.add_column();
                row.0.push(0);
                let mut coeffs = vec![0; self.ncols];
                coeffs[fresh] = 1;
                for (i, c) in row.0.iter().enumerate() {
                    if i != j && i != fresh && *c != 0 {
                        coeffs[i] = -floor_div(*c, a);
                    }
                }
                let constant = floor_div(row.1, a);
                self.substitute(j, &coeffs, constant)?;
                // The pivot row itself, rewritten under the same substitution.
                let pa = row.0[j];
                row.0[j] = 0;
                add_scaled(&mut row.0, &coeffs, pa)?;
                row.1 = row
                    .1
                    .checked_sub(pa.checked_mul(constant).ok_or(Overflow)?)
                    .ok_or(Overflow)?;
                self.substs.push(Subst {
                    var: j,
                    coeffs,
                    constant,
                });
            }
        }
        Ok(true)
    }
}

/// Normalises an inequality row; `Err(())` when it is a constant contradiction,
/// `Ok(None)` when trivially true.
fn normalize_ineq(mut row: Row) -> Result<Option<Row>, ()> {
    let g = row_gcd(&row.0);
    if g == 0 {
        return if row.1 >= 0 { Ok(None) } else { Err(()) };
    }
    if g > 1 {
        for c in row.0.iter_mut() {
            *c /= g;
        }
        row.1 = floor_div(row.1, g);
    }
    Ok(Some(row))
}

fn dedup_rows(rows: Vec<Row>) -> Result<Vec<Row>, ()> {
    let mut best: HashMap<Vec<Int>, Int> = HashMap::new();
    for r in rows {
        if let Some((c, b)) = normalize_ineq(r)? {
            let e = best.entry(c).or_insert(b);
            if b < *e {
                *e = b;
            }
        }
    }
    let mut out: Vec<Row> = best.into_iter().collect();
    out.sort();
    // Opposite pairs e <= b1, -e <= b2 with b1 + b2 < 0 are contradictory.
    let index: HashMap<&Vec<Int>, Int> = out.iter().map(|(c, b)| (c, *b)).collect();
    for (c, b) in &out {
        let neg: Vec<Int> = c.iter().map(|x| -x).collect();
        if let Some(nb) = index.get(&neg) {
            if b.checked_add(*nb).is_some_and(|s| s < 0) {
                return Err(());
            }
        }
    }
    Ok(out)
}

struct Stage {
    var: usize,
    rows: Vec<Row>,
}

enum Projection {
    Infeasible,
    Stages(Vec<Stage>),
    TooLarge,
    Overflow,
}

fn project(mut rows: Vec<Row>, ncols: usize) -> Projection {
    rows = match dedup_rows(rows) {
        Ok(r) => r,
        Err(()) => return Projection::Infeasible,
    };
    let mut stages = Vec::new();
    let mut remaining: Vec<bool> = (0..ncols)
        .map(|j| rows.iter().any(|r| r.0[j] != 0))
        .collect();
    loop {
        // Fewest generated rows first.
        let pick = (0..ncols)
            .filter(|&j| remaining[j])
            .map(|j| {
                let pos = rows.iter().filter(|r| r.0[j] > 0).count();
                let neg = rows.iter().filter(|r| r.0[j] < 0).count();
                ((pos * neg) as isize - (pos + neg) as isize, j)
            })
            .min();
        let Some((_, j)) = pick else { break };
        remaining[j] = false;
        let (with, without): (Vec<Row>, Vec<Row>) = rows.into_iter().partition(|r| r.0[j] != 0);
        let mut next = without;
        let (pos, neg): (Vec<&Row>, Vec<&Row>) = with.iter().partition(|r| r.0[j] > 0);
        if pos.len() * neg.len() + next.len() > MAX_ROWS {
            return Projection::TooLarge;
        }
        for p in &pos {
            for n in &neg {
                let (a, b) = (p.0[j], -n.0[j]);
                let g = crate::expr::gcd(a, b);
                let (ka, kb) = (b / g, a / g);
                let mut c = vec![0; ncols];
                if add_scaled(&mut c, &p.0, ka).is_err() || add_scaled(&mut c, &n.0, kb).is_err() {
                    return Projection::Overflow;
                }
                let bound = match p
                    .1
                    .checked_mul(ka)
                    .and_then(|x| n.1.checked_mul(kb).and_then(|y| x.checked_add(y)))
                {
                    Some(v) => v,
                    None => return Projection::Overflow,
                };
                c[j] = 0;
                next.push((c, bound));
            }
        }
        rows = match dedup_rows(next) {
            Ok(r) => r,
            Err(()) => return Projection::Infeasible,
        };
        stages.push(Stage { var: j, rows: with });
    }
    Projection::Stages(stages)
}

struct Search<'a> {
    stages: &'a [Stage],
    values: Vec<Option<Int>>,
    budget: usize,
    nodes: usize,
    /// Set when some branch was cut by the budget or by an unbounded range.
    incomplete: bool,
}

impl Search<'_> {
    fn bounds(&self, stage: &Stage) -> Option<(Option<Int>, Option<Int>)> {
        let (mut lo, mut hi): (Option<Int>, Option<Int>) = (None, None);
        for (c, b) in &stage.rows {
            let a = c[stage.var];
            let mut rest: Int = 0;
            for (i, ci) in c.iter().enumerate() {
                if i != stage.var && *ci != 0 {
                    let v = self.values[i].unwrap_or(0);
                    rest = rest.checked_add(ci.checked_mul(v)?)?;
                }
            }
            let rhs = b.checked_sub(rest)?;
            if a > 0 {
                let u = floor_div(rhs, a);
                hi = Some(hi.map_or(u, |h| h.min(u)));
            } else {
                let l = ceil_div(rhs, a);
                lo = Some(lo.map_or(l, |x| x.max(l)));
            }
        }
        Some((lo, hi))
    }

    /// Assigns stages from the last eliminated variable back to the first.
    fn run(&mut self, k: usize) -> bool {
        if k == 0 {
            return true;
        }
        let stage = &self.stages[k - 1];
        let Some((lo, hi)) = self.bounds(stage) else {
            self.incomplete = true;
            return false;
        };
        if let (Some(l), Some(h)) = (lo, hi) {
            if l > h {
                return false;
            }
        }
        let start = match (lo, hi) {
            (Some(l), Some(h)) => 0.clamp(l, h),
            (Some(l), None) => l.max(0),
            (None, Some(h)) => h.min(0),
            (None, None) => 0,
        };
        // Alternate outwards from `start`, staying within [lo, hi].
        let mut offset: Int = 0;
        loop {
            let mut progressed = false;
            for cand in [
                start.checked_add(offset),
                if offset > 0 {
                    start.checked_sub(offset)
                } else {
                    None
                },
            ]
            .into_iter()
            .flatten()
            {
                if lo.is_some_and(|l| cand < l) || hi.is_some_and(|h| cand > h) {
                    continue;
                }
                progressed = true;
                self.nodes += 1;
                if self.nodes > self.budget {
                    self.incomplete = true;
                    return false;
                }
                self.values[stage.var] = Some(cand);
                if self.run(k - 1) {
                    return true;
                }
                if self.nodes > self.budget {
                    self.values[stage.var] = None;
                    return false;
                }
            }
            if !progressed {
                self.values[stage.var] = None;
                return false;
            }
            offset += 1;
            if (lo.is_none() || hi.is_none()) && offset > 64 {
                // Unbounded side: stop widening the search and report it.
                self.incomplete = true;
                self.values[stage.var] = None;
                return false;
            }
        }
    }
}

pub(crate) fn solve_cube(cube: &Cube, budget: usize) -> CubeResult {
    let mut vars: Vec<Var> = Vec::new();
    let mut index: BTreeMap<Var, usize> = BTreeMap::new();
    for a in cube {
        for v in a.lhs().vars() {
            if !index.contains_key(v) {
                index.insert(v.clone(), vars.len());
                vars.push(v.clone());
            }
        }
    }
    let nvars = vars.len();
    let ncong = cube.iter().filter(|a| matches!(a, Atom::Cong(..))).count();
    let ncols = nvars + ncong;
    let mut sys = System {
        ncols,
        eqs: Vec::new(),
        ineqs: Vec::new(),
        substs: Vec::new(),
    };
    let mut next_mult = nvars;
    for a in cube {
        let mut coeffs = vec![0; ncols];
        for (v, c) in a.lhs().terms() {
            coeffs[index[v]] = *c;
        }
        match a {
            Atom::Le(_, c) => sys.ineqs.push((coeffs, *c)),
            Atom::Eq(_, c) => sys.eqs.push((coeffs, *c)),
            Atom::Cong(_, m, r) => {
                coeffs[next_mult] = -*m;
                next_mult += 1;
                sys.eqs.push((coeffs, *r));
            }
        }
    }
    match sys.eliminate_equalities() {
        Err(Overflow) => return CubeResult::Unknown("arithmetic overflow".into()),
        Ok(false) => return CubeResult::Unsat,
        Ok(true) => {}
    }
    let ncols = sys.ncols;
    let stages = match project(std::mem::take(&mut sys.ineqs), ncols) {
        Projection::Infeasible => return CubeResult::Unsat,
        Projection::TooLarge => return CubeResult::Unknown("projection too large".into()),
        Projection::Overflow => return CubeResult::Unknown("arithmetic overflow".into()),
        Projection::Stages(s) => s,
    };
    let mut search = Search {
        stages: &stages,
        values: vec![None; ncols],
        budget,
        nodes: 0,
        incomplete: false,
    };
    if !search.run(stages.len()) {
        return if search.incomplete {
            CubeResult::Unknown(format!("integer search budget of {budget} nodes exhausted"))
        } else {
            CubeResult::Unsat
        };
    }
    let mut values: Vec<Int> = search.values.iter().map(|v| v.unwrap_or(0)).collect();
    for s in sys.substs.iter().rev() {
        let mut acc = s.constant;
        for (i, c) in s.coeffs.iter().enumerate() {
            if *c != 0 {
                match c.checked_mul(values[i]).and_then(|t| acc.checked_add(t)) {
                    Some(v) => acc = v,
                    None => return CubeResult::Unknown("arithmetic overflow".into()),
                }
            }
        }
        values[s.var] = acc;
    }
    let model: BTreeMap<Var, Int> = vars.into_iter().zip(values).collect();
    let state = crate::semantics::ConcreteState::from_pairs(model.clone());
    if cube.iter().all(|a| a.holds(&state) == Some(true)) {
        CubeResult::Sat(model)
    } else {
        CubeResult::Unknown("model reconstruction failed".into())
    }
}
