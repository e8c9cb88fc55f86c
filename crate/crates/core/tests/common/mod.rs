//! Test-only expression generator and tree-walking evaluator, written
//! independently of the library's parser and AST.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone)]
pub enum OExpr {
    Lit(f64),
    X(usize),
    Minus(Box<OExpr>),
    Bin(char, Box<OExpr>, Box<OExpr>),
    Fn1(&'static str, Box<OExpr>),
    Fn2(&'static str, Box<OExpr>, Box<OExpr>),
}

const UNARY: [&str; 7] = ["sin", "cos", "tan", "exp", "log", "sqrt", "abs"];
const BINARY: [&str; 3] = ["min", "max", "pow"];

pub fn random_expr<R: Rng>(rng: &mut R, depth: usize, dim: usize) -> OExpr {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.5) {
            OExpr::X(rng.gen_range(0..dim))
        } else {
            // short decimals so the printed literal is exactly what was generated
            let v: f64 = format!("{:.3}", rng.gen_range(0.0..10.0)).parse().unwrap();
            OExpr::Lit(v)
        };
    }
    let sub = |rng: &mut R| Box::new(random_expr(rng, depth - 1, dim));
    match rng.gen_range(0..10) {
        0 => OExpr::Minus(sub(rng)),
        1..=4 => {
            let op = *['+', '-', '*', '/'].choose(rng).unwrap();
            OExpr::Bin(op, sub(rng), sub(rng))
        }
        5 => {
            // small integer or half-integer exponents keep values finite
            let e = rng.gen_range(-3..=4) as f64 * if rng.gen_bool(0.3) { 0.5 } else { 1.0 };
            let exponent = if e < 0.0 {
                OExpr::Minus(Box::new(OExpr::Lit(-e)))
            } else {
                OExpr::Lit(e)
            };
            OExpr::Bin('^', sub(rng), Box::new(exponent))
        }
        6..=8 => OExpr::Fn1(UNARY.choose(rng).unwrap(), sub(rng)),
        _ => OExpr::Fn2(BINARY.choose(rng).unwrap(), sub(rng), sub(rng)),
    }
}

impl OExpr {
    /// Fully parenthesized source text.
    pub fn render(&self) -> String {
        match self {
            OExpr::Lit(v) => format!("{v}"),
            OExpr::X(i) => format!("x{}", i + 1),
            OExpr::Minus(e) => format!("(-{})", e.render()),
            OExpr::Bin(op, a, b) => format!("({} {op} {})", a.render(), b.render()),
            OExpr::Fn1(name, a) => format!("{name}({})", a.render()),
            OExpr::Fn2(name, a, b) => format!("{name}({}, {})", a.render(), b.render()),
        }
    }

    /// `None` on any domain error or non-finite intermediate value.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        let v = match self {
            OExpr::Lit(v) => *v,
            OExpr::X(i) => x[*i],
            OExpr::Minus(e) => -e.eval(x)?,
            OExpr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    '/' if b == 0.0 => return None,
                    '/' => a / b,
                    '^' => pow(a, b)?,
                    _ => unreachable!(),
                }
            }
            OExpr::Fn1(name, a) => {
                let a = a.eval(x)?;
                match *name {
                    "sin" => a.sin(),
                    "cos" => a.cos(),
                    "tan" => a.tan(),
                    "exp" => a.exp(),
                    "log" if a <= 0.0 => return None,
                    "log" => a.ln(),
                    "sqrt" if a < 0.0 => return None,
                    "sqrt" => a.sqrt(),
                    "abs" => a.abs(),
                    _ => unreachable!(),
                }
            }
            OExpr::Fn2(name, a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                match *name {
                    "min" => a.min(b),
                    "max" => a.max(b),
                    "pow" => pow(a, b)?,
                    _ => unreachable!(),
                }
            }
        };
        v.is_finite().then_some(v)
    }
}

fn pow(a: f64, b: f64) -> Option<f64> {
    if a == 0.0 && b < 0.0 {
        return None;
    }
    if b == b.trunc() && b.abs() <= i32::MAX as f64 {
        return Some(a.powi(b as i32));
    }
    if a < 0.0 {
        return None;
    }
    Some(a.powf(b))
}

/// Distance in units in the last place between two finite doubles.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    fn key(v: f64) -> i64 {
        let bits = v.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    }
    key(a).abs_diff(key(b))
}

/// Random text that is mostly not a valid expression.
pub fn garbage<R: Rng>(rng: &mut R, valid: &str) -> String {
    const ALPHABET: &[u8] = b"x0123456789.+-*/^(),eE sincologabqrtmpw_#\t";
    if rng.gen_bool(0.5) && !valid.is_empty() {
        let mut bytes = valid.as_bytes().to_vec();
        for _ in 0..rng.gen_range(1..4) {
            let i = rng.gen_range(0..bytes.len());
            match rng.gen_range(0..3) {
                0 => {
                    bytes.remove(i);
                    if bytes.is_empty() {
                        break;
                    }
                }
                1 => bytes.insert(i, *ALPHABET.choose(rng).unwrap()),
                _ => bytes[i] = *ALPHABET.choose(rng).unwrap(),
            }
        }
        String::from_utf8_lossy(&bytes).into_owned()
    } else {
        let n = rng.gen_range(0..30);
        (0..n)
            .map(|_| *ALPHABET.choose(rng).unwrap() as char)
            .collect()
    }
}
