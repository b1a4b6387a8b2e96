//! Scalar expressions over chart variables and their second-order jets.
//!
//! Expressions are immutable trees; evaluation is pure, so a parsed [`Expr`]
//! can be shared freely across threads.

mod ast;
mod jet;
mod parse;

pub use ast::{BinOp, Expr, Func};
pub use jet::{eval, eval_jet2, DomainErrorKind, EvalError, Jet2};
pub use parse::{parse, ParseError};
