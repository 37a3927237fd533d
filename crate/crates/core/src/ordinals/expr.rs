//! Text syntax for ordinal expressions.
//!
//! ```text
//! expr     := operand { binop operand }          (left associative)
//! binop    := "(+)" | "(+^)" | "(o^)"            natural sum, +̂, ⊕̂
//! operand  := ordinal [ "+" | "-" ]              sign suffix
//! ordinal  := term { "+" term }                  ordinary sum
//! term     := nat | "w" [ "^" exp ] [ "*" nat ] | "(" ordinal ")"
//! exp      := nat | "w" | "(" ordinal ")"
//! ```
//!
//! A `+` after a term is a sum when the next token can start a term
//! (digit, `w`, or a `(` that does not open a binary operator), and a sign
//! suffix otherwise. Whitespace is insignificant.

use std::fmt;

use super::{ExtOrdinal, Ordinal, OrdinalError, Sign};

/// Result of evaluating an expression: a plain ordinal when no sign or
/// signed operator was used, a signed ordinal otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprValue {
    Plain(Ordinal),
    Signed(ExtOrdinal),
}

impl fmt::Display for ExprValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprValue::Plain(o) => o.fmt(f),
            ExprValue::Signed(x) => x.fmt(f),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BinOp {
    NaturalSum,
    HatPlus,
    HatOplus,
}

const BINOPS: [(&str, BinOp); 3] = [
    ("(+)", BinOp::NaturalSum),
    ("(+^)", BinOp::HatPlus),
    ("(o^)", BinOp::HatOplus),
];

/// Parses and evaluates an ordinal expression.
pub fn eval_expr(text: &str) -> Result<ExprValue, OrdinalError> {
    let mut p = Parser { src: text, pos: 0 };
    let value = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(value)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> OrdinalError {
        OrdinalError::Parse {
            pos: self.pos,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), OrdinalError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    /// Binary operator at the current position, if any (does not consume).
    fn peek_binop(&mut self) -> Option<(usize, BinOp)> {
        self.skip_ws();
        let rest = compact_prefix(self.rest(), 5);
        BINOPS
            .iter()
            .find(|(tok, _)| rest.0.starts_with(tok))
            .map(|(tok, op)| (rest.1[tok.len() - 1], *op))
    }

    fn expr(&mut self) -> Result<ExprValue, OrdinalError> {
        let mut acc = self.operand()?;
        while let Some((len, op)) = self.peek_binop() {
            let op_pos = self.pos;
            self.pos += len;
            let rhs = self.operand()?;
            acc = apply(op, acc, rhs).map_err(|message| OrdinalError::Parse {
                pos: op_pos,
                message,
            })?;
        }
        Ok(acc)
    }

    fn operand(&mut self) -> Result<ExprValue, OrdinalError> {
        let start = self.pos;
        let value = self.ordinal()?;
        let sign = match self.peek() {
            Some('-') => Some(Sign::Minus),
            Some('+') => Some(Sign::Plus),
            _ => None,
        };
        match sign {
            None => Ok(ExprValue::Plain(value)),
            Some(sign) => {
                self.pos += 1;
                ExtOrdinal::new(value, sign)
                    .map(ExprValue::Signed)
                    .map_err(|e| OrdinalError::Parse {
                        pos: start,
                        message: e.to_string(),
                    })
            }
        }
    }

    /// Whether the text after a `+` starts a new term.
    fn plus_continues_sum(&mut self) -> bool {
        let save = self.pos;
        self.pos += 1;
        let next = self.peek();
        let is_binop = self.peek_binop().is_some();
        self.pos = save;
        match next {
            Some(c) if c.is_ascii_digit() || c == 'w' => true,
            Some('(') => !is_binop,
            _ => false,
        }
    }

    fn ordinal(&mut self) -> Result<Ordinal, OrdinalError> {
        let mut acc = self.term()?;
        while self.peek() == Some('+') && self.plus_continues_sum() {
            self.pos += 1;
            let t = self.term()?;
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Ordinal, OrdinalError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => Ok(Ordinal::from(self.nat()?)),
            Some('w') => {
                self.pos += 1;
                let exponent = if self.eat('^') {
                    self.exponent()?
                } else {
                    Ordinal::one()
                };
                let coeff = if self.eat('*') { self.nat()? } else { 1 };
                Ok(Ordinal::monomial(exponent, coeff))
            }
            Some('(') => {
                if self.peek_binop().is_some() {
                    return Err(self.error("expected an ordinal, found an operator"));
                }
                self.pos += 1;
                let inner = self.ordinal()?;
                self.expect(')')?;
                Ok(inner)
            }
            Some(c) => Err(self.error(format!("unexpected '{c}'"))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn exponent(&mut self) -> Result<Ordinal, OrdinalError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => Ok(Ordinal::from(self.nat()?)),
            Some('w') => {
                self.pos += 1;
                Ok(Ordinal::omega())
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.ordinal()?;
                self.expect(')')?;
                Ok(inner)
            }
            _ => Err(self.error("expected an exponent")),
        }
    }

    fn nat(&mut self) -> Result<u64, OrdinalError> {
        self.skip_ws();
        let digits: &str = {
            let rest = self.rest();
            let end = rest
                .find(|c: char| !c.is_ascii_digit())
                .unwrap_or(rest.len());
            &rest[..end]
        };
        if digits.is_empty() {
            return Err(self.error("expected a natural number"));
        }
        let n: u64 = digits
            .parse()
            .ok()
            .filter(|n| *n <= u64::from(u32::MAX))
            .ok_or_else(|| self.error("number too large"))?;
        self.pos += digits.len();
        Ok(n)
    }
}

/// The first `n` non-whitespace characters of `s`, and for each of them the
/// byte length of `s` consumed up to and including it.
fn compact_prefix(s: &str, n: usize) -> (String, Vec<usize>) {
    let mut out = String::new();
    let mut ends = Vec::new();
    for (i, c) in s.char_indices() {
        if out.len() >= n {
            break;
        }
        if c.is_whitespace() {
            continue;
        }
        out.push(c);
        ends.push(i + c.len_utf8());
    }
    (out, ends)
}

fn apply(op: BinOp, lhs: ExprValue, rhs: ExprValue) -> Result<ExprValue, String> {
    match op {
        BinOp::NaturalSum => match (lhs, rhs) {
            (ExprValue::Plain(a), ExprValue::Plain(b)) => Ok(ExprValue::Plain(a.natural_sum(&b))),
            _ => Err("(+) takes unsigned ordinals; use (o^) for signed values".into()),
        },
        BinOp::HatPlus => Ok(ExprValue::Signed(signed(lhs).hat_plus(&signed(rhs)))),
        BinOp::HatOplus => Ok(ExprValue::Signed(signed(lhs).hat_oplus(&signed(rhs)))),
    }
}

fn signed(v: ExprValue) -> ExtOrdinal {
    match v {
        ExprValue::Plain(o) => ExtOrdinal::plus(o),
        ExprValue::Signed(x) => x,
    }
}
