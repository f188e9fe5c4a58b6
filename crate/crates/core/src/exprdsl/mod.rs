//! A small expression language for configuration files.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | x<k> | p<k> | func '(' expr ')' | '(' expr ')'
//! func  := sin | cos | exp | ln | sqrt
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-2^2`
//! is `-4` while `2^-1` is `0.5`. There is no implicit multiplication.
//! Variables `x1..xn` and parameters `p1..pk` are 1-based.

mod ast;
mod eval;
mod parser;

pub use ast::{BinOp, Expr, ExprKind, Func, Span};
pub use eval::{eval_expr, eval_value, eval_with, EvalError};
pub use parser::{parse, ParseError};
