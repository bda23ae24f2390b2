use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::expr::{BoolExpr, CmpOp, Int, LinExpr, Statement, Var};

use super::ast::{Program, Stmt};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(Int),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 20] = [
    ":=", "<=", ">=", "==", "!=", "&&", "||", ";", ",", "(", ")", "{", "}", "+", "-", "*", "<",
    ">", "!", "=",
];

fn lex(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (tl, tc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(s),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let v: i64 = s.parse().map_err(|_| Error::Syntax {
                line: tl,
                col: tc,
                msg: format!("integer literal `{s}` out of range"),
            })?;
            out.push(Token {
                tok: Tok::Int(v as Int),
                line: tl,
                col: tc,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(&"=") => {
                return Err(Error::Syntax {
                    line: tl,
                    col: tc,
                    msg: "unexpected `=` (use `:=` for assignment, `==` for equality)".into(),
                })
            }
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Token {
                    tok: Tok::Sym(s),
                    line: tl,
                    col: tc,
                });
            }
            None => {
                return Err(Error::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

const KEYWORDS: [&str; 9] = [
    "var", "havoc", "assume", "assert", "if", "else", "while", "true", "false",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// `None` disables the declaration check (statement labels).
    declared: Option<BTreeSet<String>>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = self.peek();
        Err(Error::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == k)
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.err(format!(
                "expected `{s}`, found {}",
                describe(&self.peek().tok)
            ))
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize)> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok((s, t.line, t.col))
            }
            other => self.err(format!("expected identifier, found {}", describe(&other))),
        }
    }

    fn use_var(&mut self) -> Result<Var> {
        let (name, line, col) = self.ident()?;
        if let Some(declared) = &self.declared {
            if !declared.contains(&name) {
                return Err(Error::Undeclared { line, col, name });
            }
        }
        Ok(Var::new(&name))
    }

    fn program(&mut self) -> Result<Program> {
        let mut vars = Vec::new();
        let mut declared = BTreeSet::new();
        while self.is_kw("var") {
            self.bump();
            loop {
                let (name, line, col) = self.ident()?;
                if !declared.insert(name.clone()) {
                    return Err(Error::Redeclared { line, col, name });
                }
                vars.push(Var::new(&name));
                if self.is_sym(",") {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect_sym(";")?;
        }
        self.declared = Some(declared);
        let mut body = Vec::new();
        while self.peek().tok != Tok::Eof {
            body.push(self.stmt()?);
        }
        Ok(Program { vars, body })
    }

    fn block(&mut self) -> Result<Vec<Stmt>> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        while !self.is_sym("}") {
            if self.peek().tok == Tok::Eof {
                return self.err("unterminated block");
            }
            out.push(self.stmt()?);
        }
        self.bump();
        Ok(out)
    }

    fn paren_bexpr(&mut self) -> Result<BoolExpr> {
        self.expect_sym("(")?;
        let b = self.bexpr()?;
        self.expect_sym(")")?;
        Ok(b)
    }

    fn stmt(&mut self) -> Result<Stmt> {
        if self.is_kw("havoc") {
            self.bump();
            let v = self.use_var()?;
            self.expect_sym(";")?;
            return Ok(Stmt::Havoc(v));
        }
        if self.is_kw("assume") {
            self.bump();
            let b = self.paren_bexpr()?;
            self.expect_sym(";")?;
            return Ok(Stmt::Assume(b));
        }
        if self.is_kw("assert") {
            self.bump();
            let b = self.paren_bexpr()?;
            self.expect_sym(";")?;
            return Ok(Stmt::Assert(b));
        }
        if self.is_kw("if") {
            self.bump();
            let c = self.paren_bexpr()?;
            let then = self.block()?;
            let els = if self.is_kw("else") {
                self.bump();
                if self.is_kw("if") {
                    vec![self.stmt()?]
                } else {
                    self.block()?
                }
            } else {
                Vec::new()
            };
            return Ok(Stmt::If(c, then, els));
        }
        if self.is_kw("while") {
            self.bump();
            let c = self.paren_bexpr()?;
            let body = self.block()?;
            return Ok(Stmt::While(c, body));
        }
        let v = self.use_var()?;
        self.expect_sym(":=")?;
        let e = self.linexpr()?;
        self.expect_sym(";")?;
        Ok(Stmt::Assign(v, e))
    }

    fn linexpr(&mut self) -> Result<LinExpr> {
        let mut acc = self.term()?;
        loop {
            let sub = if self.is_sym("+") {
                false
            } else if self.is_sym("-") {
                true
            } else {
                return Ok(acc);
            };
            self.bump();
            let rhs = self.term()?;
            acc = if sub {
                acc.checked_sub(&rhs)
            } else {
                acc.checked_add(&rhs)
            }
            .ok_or(self.overflow())?;
        }
    }

    fn overflow(&self) -> Error {
        let t = self.peek();
        Error::Syntax {
            line: t.line,
            col: t.col,
            msg: "constant overflow".into(),
        }
    }

    fn term(&mut self) -> Result<LinExpr> {
        let mut acc = self.factor()?;
        while self.is_sym("*") {
            let (line, col) = (self.peek().line, self.peek().col);
            self.bump();
            let rhs = self.factor()?;
            acc = if acc.is_constant() {
                rhs.checked_scale(acc.constant_term())
                    .ok_or(self.overflow())?
            } else if rhs.is_constant() {
                acc.checked_scale(rhs.constant_term())
                    .ok_or(self.overflow())?
            } else {
                return Err(Error::NonLinear {
                    line,
                    col,
                    msg: format!("product of `{acc}` and `{rhs}`"),
                });
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<LinExpr> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Int(v) => {
                self.bump();
                Ok(LinExpr::constant(v))
            }
            Tok::Sym("-") => {
                self.bump();
                let f = self.factor()?;
                f.checked_scale(-1).ok_or(self.overflow())
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.linexpr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(LinExpr::var(self.use_var()?)),
            other => self.err(format!("expected expression, found {}", describe(&other))),
        }
    }

    fn bexpr(&mut self) -> Result<BoolExpr> {
        let mut acc = self.conj()?;
        while self.is_sym("||") {
            self.bump();
            acc = BoolExpr::or(acc, self.conj()?);
        }
        Ok(acc)
    }

    fn conj(&mut self) -> Result<BoolExpr> {
        let mut acc = self.unary()?;
        while self.is_sym("&&") {
            self.bump();
            acc = BoolExpr::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<BoolExpr> {
        if self.is_sym("!") {
            self.bump();
            return Ok(BoolExpr::not(self.unary()?));
        }
        if self.is_kw("true") {
            self.bump();
            return Ok(BoolExpr::True);
        }
        if self.is_kw("false") {
            self.bump();
            return Ok(BoolExpr::False);
        }
        if self.is_sym("(") {
            // `(` opens either an arithmetic operand or a nested guard.
            let save = self.pos;
            if let Ok(b) = self.comparison() {
                return Ok(b);
            }
            self.pos = save;
            return self.paren_bexpr();
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<BoolExpr> {
        let l = self.linexpr()?;
        let op = match &self.peek().tok {
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            Tok::Sym("==") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            other => {
                return self.err(format!(
                    "expected comparison operator, found {}",
                    describe(other)
                ))
            }
        };
        self.bump();
        let r = self.linexpr()?;
        Ok(BoolExpr::cmp(l, op, r))
    }

    fn label_part(&mut self) -> Result<Statement> {
        if self.is_kw("havoc") {
            self.bump();
            return Ok(Statement::Havoc(self.use_var()?));
        }
        if self.is_kw("assume") {
            self.bump();
            return Ok(Statement::Assume(self.paren_bexpr()?));
        }
        let v = self.use_var()?;
        self.expect_sym(":=")?;
        Ok(Statement::Assign(v, self.linexpr()?))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses a whole program.
pub fn parse_program(src: &str) -> Result<Program> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        declared: None,
    };
    p.program()
}

/// Parses the canonical text of a statement (`x := 0; assume(x < 1); havoc y`).
/// Variables need no declaration here.
pub fn parse_statement(src: &str) -> Result<Statement> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        declared: None,
    };
    let mut parts = vec![p.label_part()?];
    while p.is_sym(";") {
        p.bump();
        if p.peek().tok == Tok::Eof {
            break;
        }
        parts.push(p.label_part()?);
    }
    if p.peek().tok != Tok::Eof {
        return p.err(format!("trailing input {}", describe(&p.peek().tok)));
    }
    Ok(Statement::seq(parts))
}

/// Parses a guard expression; variables need no declaration.
pub fn parse_bool_expr(src: &str) -> Result<BoolExpr> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        declared: None,
    };
    let b = p.bexpr()?;
    if p.peek().tok != Tok::Eof {
        return p.err(format!("trailing input {}", describe(&p.peek().tok)));
    }
    Ok(b)
}
