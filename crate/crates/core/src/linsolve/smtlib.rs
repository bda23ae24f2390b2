//! SMT-LIB2 (QF_LIA) rendering of solver queries, plus an adapter that runs
//! an external solver process. The internal procedure never depends on it.

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::{Command, Stdio};

use crate::expr::{Int, LinExpr};

use super::predicate::{Atom, Cube};

fn int(c: Int) -> String {
    if c < 0 {
        format!("(- {})", c.unsigned_abs())
    } else {
        c.to_string()
    }
}

fn term(e: &LinExpr) -> String {
    let mut parts: Vec<String> = e
        .terms()
        .iter()
        .map(|(v, c)| {
            if *c == 1 {
                format!("|{v}|")
            } else {
                format!("(* {} |{v}|)", int(*c))
            }
        })
        .collect();
    if e.constant_term() != 0 || parts.is_empty() {
        parts.push(int(e.constant_term()));
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

pub fn atom_to_smt(a: &Atom) -> String {
    match a {
        Atom::Le(e, c) => format!("(<= {} {})", term(e), int(*c)),
        Atom::Eq(e, c) => format!("(= {} {})", term(e), int(*c)),
        Atom::Cong(e, m, r) => format!("(= (mod {} {m}) {r})", term(e)),
    }
}

/// A complete QF_LIA script for one cube: declarations, one `assert` per
/// atom, `(check-sat)` and `(get-model)`.
pub fn cube_to_smtlib(cube: &Cube) -> String {
    let mut out = String::from("(set-logic QF_LIA)\n");
    let vars: std::collections::BTreeSet<_> =
        cube.iter().flat_map(|a| a.lhs().vars().cloned()).collect();
    for v in &vars {
        writeln!(out, "(declare-fun |{v}| () Int)").unwrap();
    }
    for a in cube {
        writeln!(out, "(assert {})", atom_to_smt(a)).unwrap();
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

/// Verdict reported by an external solver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExternalVerdict {
    Sat,
    Unsat,
    Unknown(String),
}

/// Runs `program args…` with the script on stdin and reads the first line.
pub fn run_external(
    program: &str,
    args: &[&str],
    script: &str,
) -> std::io::Result<ExternalVerdict> {
    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()?;
    child
        .stdin
        .take()
        .expect("piped stdin")
        .write_all(script.as_bytes())?;
    let out = child.wait_with_output()?;
    let text = String::from_utf8_lossy(&out.stdout);
    Ok(match text.lines().next().map(str::trim) {
        Some("sat") => ExternalVerdict::Sat,
        Some("unsat") => ExternalVerdict::Unsat,
        other => ExternalVerdict::Unknown(other.unwrap_or("").to_string()),
    })
}
