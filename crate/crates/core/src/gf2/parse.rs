//! Text grammar for polynomials and rational functions in `D`.
//!
//! ```text
//! expr    := term ('+' term)*
//! term    := factor ('*' factor)* ('/' factor)?
//! factor  := '(' expr ')' | '0' | '1' | 'D' ('^' digits)?
//! ```
//!
//! Whitespace is ignored. `/` binds tighter than `+`, so `D^2+D^5/(1+D^6)`
//! is a sum of a polynomial and a fraction.

use super::{AlgebraError, Gf2Poly, Gf2Rational};

struct Parser<'a> {
    src: &'a str,
    bytes: Vec<u8>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        let bytes = src.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
        Self { src, bytes, pos: 0 }
    }

    fn err(&self, what: &str) -> AlgebraError {
        AlgebraError::Parse(format!("{what} at offset {} in {:?}", self.pos, self.src))
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Gf2Rational, AlgebraError> {
        let mut acc = self.term()?;
        while self.eat(b'+') {
            acc = &acc + &self.term()?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Gf2Rational, AlgebraError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = &acc * &self.factor()?;
        }
        if self.eat(b'/') {
            let den = self.factor()?;
            acc = acc.checked_div(&den)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Gf2Rational, AlgebraError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(inner)
            }
            Some(b'0') => {
                self.pos += 1;
                Ok(Gf2Rational::zero())
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(Gf2Rational::one())
            }
            Some(b'D') => {
                self.pos += 1;
                let k = if self.eat(b'^') {
                    let start = self.pos;
                    while self.peek().is_some_and(|b| b.is_ascii_digit()) {
                        self.pos += 1;
                    }
                    if start == self.pos {
                        return Err(self.err("expected exponent"));
                    }
                    std::str::from_utf8(&self.bytes[start..self.pos])
                        .ok()
                        .and_then(|s| s.parse::<usize>().ok())
                        .ok_or_else(|| self.err("exponent out of range"))?
                } else {
                    1
                };
                Ok(Gf2Rational::monomial(k))
            }
            _ => Err(self.err("expected '(', '0', '1' or 'D'")),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Gf2Rational, AlgebraError> {
    let mut parser = Parser::new(s);
    let value = parser.expr()?;
    if parser.pos != parser.bytes.len() {
        return Err(parser.err("trailing input"));
    }
    Ok(value)
}

pub fn parse_poly(s: &str) -> Result<Gf2Poly, AlgebraError> {
    let value = parse_rational(s)?;
    if !value.is_polynomial() {
        return Err(AlgebraError::Parse(format!("{s:?} is not a polynomial")));
    }
    Ok(value.numerator().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_bare_d_and_spacing() {
        assert_eq!(parse_poly("D").unwrap(), Gf2Poly::monomial(1));
        assert_eq!(parse_poly(" 1 + D^2 ").unwrap(), Gf2Poly::from_exponents([0, 2]));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "D^", "x", "1+", "(1+D", "D/(1+D)", "D^2)"] {
            assert!(parse_poly(bad).is_err(), "{bad}");
        }
        assert!(parse_rational("1/0").is_err());
    }
}
