//! Recursive-descent parser for reflexive-process expressions.
//!
//! ```text
//! expr    := product ('+' product)*
//! product := factor ('*'? factor)*
//! factor  := primary ('^' nat)*
//! primary := word | '1' | '0' | '(' expr ')'
//! word    := atom+            (no whitespace inside a word)
//! atom    := letter digit*
//! ```
//!
//! Juxtaposition is multiplication, so `T(1+x)(1+y)` and `T*(1+x)*(1+y)` are the
//! same. A letter followed by digits is one atom: `Ta12x` is `T`, `a12`, `x`.
//! Whitespace separates tokens and is otherwise ignored.

use super::{AlgebraError, Atom, Polynomial, Word};

pub fn parse_expression(text: &str) -> Result<Polynomial, AlgebraError> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let p = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.error(format!("unexpected {:?}", parser.src[parser.pos] as char)));
    }
    Ok(p)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: impl Into<String>) -> AlgebraError {
        AlgebraError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial, AlgebraError> {
        let mut acc = self.product()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            acc = acc + self.product()?;
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Polynomial, AlgebraError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc * self.factor()?;
                }
                Some(c) if starts_primary(c) => acc = acc * self.factor()?,
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Polynomial, AlgebraError> {
        let mut base = self.primary()?;
        while self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.exponent()?;
            base = base.pow(n);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<u32, AlgebraError> {
        self.skip_ws();
        let start = self.pos;
        let digits = self.digit_run();
        if digits.is_empty() {
            return Err(AlgebraError::BadExponent { pos: start });
        }
        // "2.5" would otherwise parse as "2" followed by junk
        if self.src.get(self.pos) == Some(&b'.') {
            return Err(AlgebraError::BadExponent { pos: start });
        }
        digits
            .parse()
            .map_err(|_| AlgebraError::BadExponent { pos: start })
    }

    fn digit_run(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let src: &'a [u8] = self.src;
        std::str::from_utf8(&src[start..self.pos]).expect("ascii digits")
    }

    fn primary(&mut self) -> Result<Polynomial, AlgebraError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                match self.digit_run() {
                    "1" => Ok(Polynomial::one()),
                    "0" => Ok(Polynomial::zero()),
                    other => Err(AlgebraError::Syntax {
                        pos: start,
                        msg: format!("numeric literal {other:?} is not a symbol; only 1 and 0 are"),
                    }),
                }
            }
            Some(c) if c.is_ascii_alphabetic() => self.word().map(Polynomial::from),
            Some(c) => Err(self.error(format!("unexpected {:?}", c as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn word(&mut self) -> Result<Word, AlgebraError> {
        let mut atoms = Vec::new();
        while let Some(&c) = self.src.get(self.pos) {
            if !c.is_ascii_alphabetic() {
                break;
            }
            self.pos += 1;
            let idx_pos = self.pos;
            let digits = self.digit_run();
            let index = if digits.is_empty() {
                None
            } else {
                Some(digits.parse().map_err(|_| AlgebraError::Syntax {
                    pos: idx_pos,
                    msg: format!("atom index {digits:?} out of range"),
                })?)
            };
            atoms.push(Atom::build(c as char, index)?);
        }
        Ok(Word::from_atoms(atoms))
    }
}

fn starts_primary(c: u8) -> bool {
    c == b'(' || c.is_ascii_alphanumeric()
}
