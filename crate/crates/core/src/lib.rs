pub mod error;
pub mod expr;
pub mod frontend;
pub mod linsolve;
pub mod program;
pub mod semantics;

pub use error::{Error, Result};
pub mod automata;
pub mod cegar;
pub mod domains;
pub mod fixpoint;
pub mod harness;
pub mod par;
pub mod pathprog;
pub mod refine;
