use crate::expr::{BoolExpr, LinExpr, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub vars: Vec<Var>,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Assign(Var, LinExpr),
    Havoc(Var),
    Assume(BoolExpr),
    Assert(BoolExpr),
    If(BoolExpr, Vec<Stmt>, Vec<Stmt>),
    While(BoolExpr, Vec<Stmt>),
}
