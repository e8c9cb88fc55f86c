//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'x' index | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```

use thiserror::Error;

use super::ast::{BinOp, Expr, Func};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("invalid number literal {0:?}")]
    InvalidNumber(String),
    #[error("unknown identifier {0:?}")]
    UnknownIdentifier(String),
    #[error("variable x{index} out of range for dimension {dimension}")]
    VariableOutOfRange { index: usize, dimension: usize },
    #[error("{func} takes {expected} argument(s), got {found}")]
    Arity {
        func: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("expected {0:?}")]
    Expected(char),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

/// Parses `source` as an expression over `x1..x{dimension}`.
pub fn parse_expr(source: &str, dimension: usize) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: source.as_bytes(),
        text: source,
        pos: 0,
        dimension,
    };
    let e = p.expr()?;
    p.skip_ws();
    if let Some(c) = p.peek_char() {
        return Err(p.error(ParseErrorKind::UnexpectedChar(c)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    dimension: usize,
}

impl Parser<'_> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            offset: self.pos,
            kind,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            return Ok(());
        }
        match self.peek_char() {
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
            Some(_) => Err(self.error(ParseErrorKind::Expected(c as char))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => {
                let c = self.peek_char().expect("peek saw a byte");
                Err(self.error(ParseErrorKind::UnexpectedChar(c)))
            }
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.pos - start
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let mut count = self.digits();
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += self.digits();
        }
        let invalid = |p: &Self| ParseError {
            offset: start,
            kind: ParseErrorKind::InvalidNumber(p.text[start..p.pos].to_string()),
        };
        if count == 0 {
            return Err(invalid(self));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                return Err(invalid(self));
            }
        }
        let literal = &self.text[start..self.pos];
        let value: f64 = literal.parse().map_err(|_| invalid(self))?;
        if !value.is_finite() {
            return Err(invalid(self));
        }
        Ok(Expr::Num(value))
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.text[start..self.pos];
        let at_start = |kind| ParseError {
            offset: start,
            kind,
        };

        if let Some(func) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.error(ParseErrorKind::Expected('(')));
            }
            let mut args = vec![self.expr()?];
            while self.eat(b',') {
                args.push(self.expr()?);
            }
            self.expect(b')')?;
            if args.len() != func.arity() {
                return Err(at_start(ParseErrorKind::Arity {
                    func: func.name(),
                    expected: func.arity(),
                    found: args.len(),
                }));
            }
            return Ok(Expr::Call(func, args));
        }

        let index = name
            .strip_prefix('x')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse::<usize>().ok());
        match index {
            Some(i) if i >= 1 && i <= self.dimension => Ok(Expr::Var(i - 1)),
            Some(i) => Err(at_start(ParseErrorKind::VariableOutOfRange {
                index: i,
                dimension: self.dimension,
            })),
            None => Err(at_start(ParseErrorKind::UnknownIdentifier(
                name.to_string(),
            ))),
        }
    }
}
