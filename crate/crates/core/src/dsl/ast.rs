use std::fmt;

use crate::error::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
    Pow,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Min,
        Func::Max,
        Func::Pow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Pow => "pow",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max | Func::Pow => 2,
            _ => 1,
        }
    }
}

/// Expression tree. Variables are stored zero-based (`x1` is `Var(0)`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

fn domain_error(what: &str, node: &Expr, operand: f64, x: &[f64]) -> EvalError {
    EvalError::new(format!(
        "{what} (operand {operand}) in `{node}` at x = {x:?}"
    ))
}

/// `base^exponent` with exact integer powers and no principal-value branch
/// for negative bases.
fn power(node: &Expr, base: f64, exponent: f64, x: &[f64]) -> Result<f64, EvalError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(domain_error(
            "zero raised to a negative power",
            node,
            exponent,
            x,
        ));
    }
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        return Ok(base.powi(exponent as i32));
    }
    if base < 0.0 {
        return Err(domain_error(
            "negative base with non-integer exponent",
            node,
            base,
            x,
        ));
    }
    Ok(base.powf(exponent))
}

impl Expr {
    /// Largest variable index used, one-based; 0 when the expression has no variables.
    pub fn max_variable(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) => e.max_variable(),
            Expr::Binary(_, a, b) => a.max_variable().max(b.max_variable()),
            Expr::Call(_, args) => args.iter().map(Expr::max_variable).max().unwrap_or(0),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let value = match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => *x.get(*i).ok_or_else(|| {
                EvalError::new(format!(
                    "x{} referenced but point has dimension {}",
                    i + 1,
                    x.len()
                ))
            })?,
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(domain_error("division by zero", self, a, x));
                        }
                        a / b
                    }
                    BinOp::Pow => power(self, a, b, x)?,
                }
            }
            Expr::Call(func, args) => {
                let a = args[0].eval(x)?;
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                    Func::Exp => a.exp(),
                    Func::Abs => a.abs(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(domain_error("log of a non-positive value", self, a, x));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(domain_error("sqrt of a negative value", self, a, x));
                        }
                        a.sqrt()
                    }
                    Func::Min => a.min(args[1].eval(x)?),
                    Func::Max => a.max(args[1].eval(x)?),
                    Func::Pow => power(self, a, args[1].eval(x)?, x)?,
                }
            }
        };
        if !value.is_finite() {
            return Err(domain_error("non-finite result", self, value, x));
        }
        Ok(value)
    }

    fn binding(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 5,
        }
    }
}

struct Paren<'a>(&'a Expr, bool);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Prints with the minimum parentheses needed to re-parse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => write!(f, "({v})"),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            // -a^b parses as -(a^b), so only additive/multiplicative operands need wrapping
            Expr::Neg(e) => write!(f, "-{}", Paren(e, e.binding() < 3)),
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                let (left, right) = if *op == BinOp::Pow {
                    // right-associative; the exponent may be a unary minus
                    (a.binding() <= p, b.binding() < 3)
                } else {
                    (a.binding() < p, b.binding() <= p)
                };
                write!(f, "{} {} {}", Paren(a, left), op.symbol(), Paren(b, right))
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
