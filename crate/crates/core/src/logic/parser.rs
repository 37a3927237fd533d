//! Formula text grammar.
//!
//! ```text
//! formula := conj { "|" conj }                 (left associative)
//! conj    := unary { "&" unary }               (left associative)
//! unary   := "!" unary | primary
//! primary := "(" formula ")" | REL "(" term { "," term } ")" | term "=" term
//! term    := "x" DIGITS | "y" DIGITS | NAME
//! ```
//!
//! `NAME` is a run of ASCII alphanumerics or underscores; `x<k>` and
//! `y<k>` are free variables and parameter slots, anything else names a
//! parameter. Whitespace is insignificant between tokens.

use super::{Formula, LogicError, Signature, Term};

/// Parses `text` and checks it against `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, LogicError> {
    let mut p = Parser {
        src: text,
        pos: 0,
        sig,
    };
    let f = p.formula()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    sig: &'a Signature,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> LogicError {
        LogicError::Syntax {
            pos: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), LogicError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        let mut acc = self.conj()?;
        while self.eat('|') {
            acc = Formula::or(acc, self.conj()?);
        }
        Ok(acc)
    }

    fn conj(&mut self) -> Result<Formula, LogicError> {
        let mut acc = self.unary()?;
        while self.eat('&') {
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        if self.eat('!') {
            return Ok(Formula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, LogicError> {
        if self.eat('(') {
            let f = self.formula()?;
            self.expect(')')?;
            return Ok(f);
        }
        let start = self.pos;
        let name = self.name()?;
        if self.peek() == Some('(') {
            return self.atom(name, start);
        }
        let lhs = self.term_from(name, start)?;
        self.expect('=')?;
        let rhs = self.term()?;
        Ok(Formula::Eq(lhs, rhs))
    }

    fn atom(&mut self, rel: &str, start: usize) -> Result<Formula, LogicError> {
        let Some(expected) = self.sig.arity(rel) else {
            self.pos = start;
            return Err(LogicError::UnknownRelation {
                name: rel.to_string(),
            });
        };
        self.expect('(')?;
        let mut args = vec![self.term()?];
        while self.eat(',') {
            args.push(self.term()?);
        }
        self.expect(')')?;
        if args.len() != expected {
            return Err(LogicError::ArityMismatch {
                name: rel.to_string(),
                expected,
                found: args.len(),
            });
        }
        Ok(Formula::Atom {
            rel: rel.to_string(),
            args,
        })
    }

    fn name(&mut self) -> Result<&'a str, LogicError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(match rest.chars().next() {
                Some(c) => self.error(format!("unexpected '{c}'")),
                None => self.error("unexpected end of input"),
            });
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        let start = self.pos;
        let name = self.name()?;
        self.term_from(name, start)
    }

    fn term_from(&mut self, name: &str, start: usize) -> Result<Term, LogicError> {
        name.parse().map_err(|_| LogicError::Syntax {
            pos: start,
            message: format!("'{name}' is not a valid term"),
        })
    }
}
