//! A small arithmetic expression language for objectives and constraints.

mod ast;
mod parser;
mod problem;

pub use ast::{BinOp, Expr, Func};
pub use parser::{parse_expr, ParseError, ParseErrorKind};
pub use problem::{load_problem, ParamOverrides, ProblemSpec};

use crate::domain::Point;
use crate::error::EvalError;

pub fn eval_expr(e: &Expr, x: &Point) -> Result<f64, EvalError> {
    e.eval(x.coords())
}
