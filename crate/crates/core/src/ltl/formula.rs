//! LTL-without-X formulas: AST, parser and negation normal form.

use std::fmt;
use thiserror::Error;

/// An LTL formula without the next-step operator. Goal atoms are place names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Finally(Box<Formula>),
    Globally(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn finally(f: Formula) -> Formula {
        Formula::Finally(Box::new(f))
    }

    pub fn globally(f: Formula) -> Formula {
        Formula::Globally(Box::new(f))
    }

    /// All atom names, in first-occurrence order.
    pub fn atoms(&self) -> Vec<&str> {
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a str>) {
            match f {
                Formula::True | Formula::False => {}
                Formula::Atom(a) => {
                    if !out.contains(&a.as_str()) {
                        out.push(a);
                    }
                }
                Formula::Not(x) | Formula::Finally(x) | Formula::Globally(x) => walk(x, out),
                Formula::And(a, b)
                | Formula::Or(a, b)
                | Formula::Implies(a, b)
                | Formula::Until(a, b)
                | Formula::Release(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at position {0}: {1}")]
    Syntax(usize, String),
    #[error("the next-step operator X is not allowed (position {0})")]
    XNotAllowed(usize),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

/// Grammar: `!`, `&`, `|`, `->`, `U`, `R`, `F`, `G`, parentheses, `true`,
/// `false`, and identifier atoms. Unary operators bind tightest, then
/// `U`/`R` (right-associative), then `&`, `|` and `->`.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let f = p.implication()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(ParseError::Syntax(p.pos, "trailing input".into()));
    }
    Ok(f)
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
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

    fn ident(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        if start >= self.src.len() {
            return None;
        }
        let c = self.src[start];
        if !(c.is_ascii_alphabetic() || c == b'_') {
            return None;
        }
        let mut end = start + 1;
        while end < self.src.len()
            && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
        {
            end += 1;
        }
        self.pos = end;
        Some((start, std::str::from_utf8(&self.src[start..end]).unwrap()))
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        self.skip_ws();
        if self.src[self.pos..].starts_with(b"->") {
            self.pos += 2;
            let rhs = self.implication()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conjunction()?;
        while self.peek() == Some(b'|') {
            self.pos += 1;
            let rhs = self.conjunction()?;
            f = Formula::Or(Box::new(f), Box::new(rhs));
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.until()?;
        while self.peek() == Some(b'&') {
            self.pos += 1;
            let rhs = self.until()?;
            f = Formula::And(Box::new(f), Box::new(rhs));
        }
        Ok(f)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        self.skip_ws();
        let save = self.pos;
        if let Some((_, id)) = self.ident() {
            match id {
                "U" => {
                    let rhs = self.until()?;
                    return Ok(Formula::Until(Box::new(lhs), Box::new(rhs)));
                }
                "R" => {
                    let rhs = self.until()?;
                    return Ok(Formula::Release(Box::new(lhs), Box::new(rhs)));
                }
                _ => self.pos = save,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(b'!') {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat(b'(') {
            let f = self.implication()?;
            if !self.eat(b')') {
                return Err(ParseError::Syntax(self.pos, "expected `)`".into()));
            }
            return Ok(f);
        }
        let at = self.pos;
        match self.ident() {
            Some((pos, "X")) => Err(ParseError::XNotAllowed(pos)),
            Some((_, "F")) => Ok(Formula::finally(self.unary()?)),
            Some((_, "G")) => Ok(Formula::globally(self.unary()?)),
            Some((pos, "U")) | Some((pos, "R")) => Err(ParseError::Syntax(
                pos,
                "operator needs a left operand".into(),
            )),
            Some((_, "true")) => Ok(Formula::True),
            Some((_, "false")) => Ok(Formula::False),
            Some((_, name)) => Ok(Formula::Atom(name.to_string())),
            None => Err(ParseError::Syntax(at, "expected a formula".into())),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &Formula) -> bool {
            !matches!(
                f,
                Formula::True
                    | Formula::False
                    | Formula::Atom(_)
                    | Formula::Not(_)
                    | Formula::Finally(_)
                    | Formula::Globally(_)
            )
        }
        fn write(f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
            let bin =
                |a: &Formula, op: &str, b: &Formula, out: &mut fmt::Formatter<'_>| -> fmt::Result {
                    if paren(a) {
                        out.write_str("(")?;
                        write(a, out)?;
                        out.write_str(")")?;
                    } else {
                        write(a, out)?;
                    }
                    out.write_str(op)?;
                    if paren(b) {
                        out.write_str("(")?;
                        write(b, out)?;
                        out.write_str(")")
                    } else {
                        write(b, out)
                    }
                };
            match f {
                Formula::True => out.write_str("true"),
                Formula::False => out.write_str("false"),
                Formula::Atom(a) => out.write_str(a),
                Formula::Not(x) => {
                    out.write_str("!")?;
                    if paren(x) {
                        out.write_str("(")?;
                        write(x, out)?;
                        out.write_str(")")
                    } else {
                        write(x, out)
                    }
                }
                Formula::And(a, b) => bin(a, " & ", b, out),
                Formula::Or(a, b) => bin(a, " | ", b, out),
                Formula::Implies(a, b) => bin(a, " -> ", b, out),
                Formula::Until(a, b) => bin(a, " U ", b, out),
                Formula::Release(a, b) => bin(a, " R ", b, out),
                Formula::Finally(x) => {
                    out.write_str("F ")?;
                    if paren(x) {
                        out.write_str("(")?;
                        write(x, out)?;
                        out.write_str(")")
                    } else {
                        write(x, out)
                    }
                }
                Formula::Globally(x) => {
                    out.write_str("G ")?;
                    if paren(x) {
                        out.write_str("(")?;
                        write(x, out)?;
                        out.write_str(")")
                    } else {
                        write(x, out)
                    }
                }
            }
        }
        write(self, f)
    }
}
