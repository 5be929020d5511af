//! Text format for polynomials in `z` and `z̄`.
//!
//! ```text
//! expr   := ['+' | '-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := ['-'] atom ['^' uint]
//! atom   := number ['i'] | 'i' | 'z' uint | 'c' uint | '(' expr ')'
//! number := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//! ```
//!
//! `zj` is the coordinate `z_j` and `cj` its conjugate `z̄_j`, both 1-based.
//! Whitespace is ignored. Example: `z1*c1 + z2*c2 + 0.25*z1^2 + 0.25*c1^2`.

use num_complex::Complex64 as C64;

use super::{ComplexPolynomial, MAX_VARS};
use crate::error::{Error, Result};

/// Parses `text`. With `n_vars = None` the variable count is the largest
/// index used, but at least 2.
pub fn parse_polynomial(text: &str, n_vars: Option<usize>) -> Result<ComplexPolynomial> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        max_index: 0,
    };
    let poly = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    let target = n_vars.unwrap_or(parser.max_index.max(2));
    if parser.max_index > target {
        return Err(Error::Parse {
            position: 0,
            message: format!(
                "variable index {} exceeds the {} available variables",
                parser.max_index, target
            ),
        });
    }
    if !(1..=MAX_VARS).contains(&target) {
        return Err(Error::Parse {
            position: 0,
            message: format!("variable count {target} outside 1..={MAX_VARS}"),
        });
    }
    let mut out = ComplexPolynomial::zero(target);
    for (m, c) in poly.terms() {
        out.add_term(*m, *c);
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    max_index: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.to_string(),
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

    fn expr(&mut self) -> Result<ComplexPolynomial> {
        let negate = match self.peek() {
            Some(b'+') => {
                self.pos += 1;
                false
            }
            Some(b'-') => {
                self.pos += 1;
                true
            }
            _ => false,
        };
        let mut acc = self.term()?;
        if negate {
            acc = -acc;
        }
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == b'+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<ComplexPolynomial> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc * self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<ComplexPolynomial> {
        let negate = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.uint()?;
            base = base.pow(e as u32);
        }
        Ok(if negate { -base } else { base })
    }

    fn atom(&mut self) -> Result<ComplexPolynomial> {
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
            Some(b'i') => {
                self.pos += 1;
                Ok(ComplexPolynomial::constant(MAX_VARS, C64::new(0.0, 1.0)))
            }
            Some(v @ (b'z' | b'c')) => {
                self.pos += 1;
                let start = self.pos;
                let index = self.uint()?;
                if index == 0 || index > MAX_VARS {
                    self.pos = start;
                    return Err(self.error("variable index must be between 1 and 8"));
                }
                self.max_index = self.max_index.max(index);
                Ok(if v == b'z' {
                    ComplexPolynomial::z(MAX_VARS, index - 1)
                } else {
                    ComplexPolynomial::zbar(MAX_VARS, index - 1)
                })
            }
            Some(ch) if ch.is_ascii_digit() || ch == b'.' => {
                let x = self.number()?;
                if self.src.get(self.pos) == Some(&b'i') {
                    self.pos += 1;
                    Ok(ComplexPolynomial::constant(MAX_VARS, C64::new(0.0, x)))
                } else {
                    Ok(ComplexPolynomial::constant(MAX_VARS, C64::new(x, 0.0)))
                }
            }
            Some(_) => Err(self.error("expected a number, variable or '('")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn uint(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an unsigned integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.error("integer out of range"))
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if let Some(b'e' | b'E') = self.src.get(self.pos) {
            self.pos += 1;
            if let Some(b'+' | b'-') = self.src.get(self.pos) {
                self.pos += 1;
            }
            digits(self);
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse().map_err(|_| Error::Parse {
            position: start,
            message: format!("malformed number `{text}`"),
        })
    }
}
