//! Input language: parsing and lowering to a [`ProgramAutomaton`](crate::program::ProgramAutomaton).

mod ast;
mod lower;
mod parser;

pub use ast::{Program, Stmt};
pub use lower::{lower, lower_with, LowerOptions};
pub use parser::{parse_bool_expr, parse_program, parse_statement};

use crate::error::Result;
use crate::program::ProgramAutomaton;

/// Parses and lowers with default options.
pub fn compile(src: &str) -> Result<ProgramAutomaton> {
    Ok(lower(&parse_program(src)?))
}
