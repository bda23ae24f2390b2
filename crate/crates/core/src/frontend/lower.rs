use std::collections::BTreeSet;

use crate::expr::{BoolExpr, Statement};
use crate::program::{Edge, Loc, ProgramAutomaton};

use super::ast::{Program, Stmt};

#[derive(Clone, Copy, Debug)]
pub struct LowerOptions {
    /// Fuse maximal runs of assignments into one `Seq` edge.
    pub fuse_assignments: bool,
    /// Drop locations from which no error location is reachable.
    pub trim: bool,
}

impl Default for LowerOptions {
    fn default() -> Self {
        LowerOptions {
            fuse_assignments: true,
            trim: true,
        }
    }
}

pub fn lower(prog: &Program) -> ProgramAutomaton {
    lower_with(prog, LowerOptions::default())
}

enum Item<'a> {
    Assignments(Vec<&'a Stmt>),
    Single(&'a Stmt),
}

struct Builder {
    count: usize,
    edges: Vec<Edge>,
    errors: BTreeSet<Loc>,
    fuse: bool,
}

impl Builder {
    fn fresh(&mut self) -> Loc {
        self.count += 1;
        Loc(self.count - 1)
    }

    fn edge(&mut self, src: Loc, stmt: Statement, dst: Loc) {
        self.edges.push(Edge { src, stmt, dst });
    }

    fn block(&mut self, stmts: &[Stmt], entry: Loc, exit: Loc) {
        if stmts.is_empty() {
            if entry != exit {
                self.edge(entry, Statement::Assume(BoolExpr::True), exit);
            }
            return;
        }
        let mut items: Vec<Item> = Vec::new();
        for s in stmts {
            match (s, items.last_mut()) {
                (Stmt::Assign(..), Some(Item::Assignments(run))) if self.fuse => run.push(s),
                (Stmt::Assign(..), _) => items.push(Item::Assignments(vec![s])),
                _ => items.push(Item::Single(s)),
            }
        }
        let mut cur = entry;
        let last = items.len() - 1;
        for (i, item) in items.iter().enumerate() {
            let next = if i == last { exit } else { self.fresh() };
            match item {
                Item::Assignments(run) => {
                    let parts = run.iter().map(|s| match s {
                        Stmt::Assign(v, e) => Statement::Assign(v.clone(), e.clone()),
                        _ => unreachable!(),
                    });
                    self.edge(cur, Statement::seq(parts), next);
                }
                Item::Single(s) => self.stmt(s, cur, next),
            }
            cur = next;
        }
    }

    fn branch(&mut self, from: Loc, guard: BoolExpr, body: &[Stmt], to: Loc) {
        if body.is_empty() {
            self.edge(from, Statement::Assume(guard), to);
        } else {
            let start = self.fresh();
            self.edge(from, Statement::Assume(guard), start);
            self.block(body, start, to);
        }
    }

    fn stmt(&mut self, s: &Stmt, entry: Loc, exit: Loc) {
        match s {
            Stmt::Assign(v, e) => self.edge(entry, Statement::Assign(v.clone(), e.clone()), exit),
            Stmt::Havoc(v) => self.edge(entry, Statement::Havoc(v.clone()), exit),
            Stmt::Assume(b) => self.edge(entry, Statement::Assume(b.clone()), exit),
            Stmt::Assert(b) => {
                let err = self.fresh();
                self.errors.insert(err);
                self.edge(entry, Statement::Assume(b.negate()), err);
                self.edge(entry, Statement::Assume(b.clone()), exit);
            }
            Stmt::If(c, then, els) => {
                self.branch(entry, c.clone(), then, exit);
                self.branch(entry, c.negate(), els, exit);
            }
            Stmt::While(c, body) => {
                self.branch(entry, c.clone(), body, entry);
                self.edge(entry, Statement::Assume(c.negate()), exit);
            }
        }
    }
}

/// Lowers a program: guards become `assume` edges, `assert(b)` becomes an
/// `assume(!b)` edge into a fresh error location next to an `assume(b)` edge
/// that continues.
pub fn lower_with(prog: &Program, opts: LowerOptions) -> ProgramAutomaton {
    let mut b = Builder {
        count: 0,
        edges: Vec::new(),
        errors: BTreeSet::new(),
        fuse: opts.fuse_assignments,
    };
    let init = b.fresh();
    let end = b.fresh();
    b.block(&prog.body, init, end);

    let keep: Vec<bool> = if opts.trim {
        let mut co = vec![false; b.count];
        for e in &b.errors {
            co[e.0] = true;
        }
        let mut changed = true;
        while changed {
            changed = false;
            for e in &b.edges {
                if co[e.dst.0] && !co[e.src.0] {
                    co[e.src.0] = true;
                    changed = true;
                }
            }
        }
        co[init.0] = true;
        co
    } else {
        vec![true; b.count]
    };

    let mut renumber = vec![None; b.count];
    let mut names = Vec::new();
    for (old, &k) in keep.iter().enumerate() {
        if k {
            renumber[old] = Some(Loc(names.len()));
            names.push(format!("l{}", names.len()));
        }
    }
    let edges = b
        .edges
        .into_iter()
        .filter_map(|e| {
            Some(Edge {
                src: renumber[e.src.0]?,
                dst: renumber[e.dst.0]?,
                stmt: e.stmt,
            })
        })
        .collect();
    let errors = b.errors.iter().filter_map(|l| renumber[l.0]).collect();
    ProgramAutomaton::new(
        prog.vars.clone(),
        names,
        edges,
        renumber[init.0].unwrap(),
        errors,
    )
}
