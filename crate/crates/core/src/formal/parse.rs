//! Polynomial literal syntax.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor (['*'] factor)*          juxtaposition multiplies
//! factor := atom ['^' int]
//! atom   := int ['/' int] | 'x' int | '(' expr ')'
//! ```
//!
//! Variables are 1-based (`x1 .. xm`). Errors carry the byte offset.

use num_bigint::BigInt;

use super::{Polynomial, Rational};
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    dim: usize,
}

pub(crate) fn parse_polynomial(src: &str, dim: usize) -> Result<Polynomial> {
    let mut p = Parser { src, pos: 0, dim };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(Error::parse(p.pos, format!("unexpected {:?}", p.peek().unwrap())));
    }
    Ok(out)
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = Polynomial::zero(self.dim);
        let mut sign = Rational::ONE;
        if self.eat('-') {
            sign = -Rational::ONE;
        } else {
            self.eat('+');
        }
        loop {
            let t = self.term()?;
            acc.add_scaled(&t, &sign);
            if self.eat('+') {
                sign = Rational::ONE;
            } else if self.eat('-') {
                sign = -Rational::ONE;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        loop {
            let explicit = self.eat('*');
            self.skip_ws();
            match self.peek() {
                Some(c) if c.is_ascii_digit() || c == 'x' || c == '(' => {
                    let f = self.factor()?;
                    acc = &acc * &f;
                }
                _ if explicit => {
                    return Err(Error::parse(self.pos, "expected factor after '*'"));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.eat('^') {
            self.skip_ws();
            let at = self.pos;
            let e = self.integer()?;
            let e: u32 = e
                .try_into()
                .map_err(|_| Error::parse(at, "exponent out of range"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        self.skip_ws();
        let at = self.pos;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::parse(self.pos, "expected ')'"));
                }
                Ok(inner)
            }
            Some('x') => {
                self.pos += 1;
                let idx = self.integer()?;
                let idx: usize = idx
                    .try_into()
                    .map_err(|_| Error::parse(at, "variable index out of range"))?;
                if idx == 0 || idx > self.dim {
                    return Err(Error::parse(
                        at,
                        format!("variable x{idx} outside 1..={}", self.dim),
                    ));
                }
                Ok(Polynomial::var(self.dim, idx - 1))
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.big_integer()?;
                let save = self.pos;
                self.skip_ws();
                if self.peek() == Some('/') {
                    self.pos += 1;
                    self.skip_ws();
                    let dat = self.pos;
                    let den = self.big_integer()?;
                    if den == BigInt::from(0) {
                        return Err(Error::parse(dat, "zero denominator"));
                    }
                    return Ok(Polynomial::constant(
                        self.dim,
                        Rational::from_bigint(num, den),
                    ));
                }
                self.pos = save;
                Ok(Polynomial::constant(
                    self.dim,
                    Rational::from_bigint(num, BigInt::from(1)),
                ))
            }
            Some(c) => Err(Error::parse(at, format!("unexpected {c:?}"))),
            None => Err(Error::parse(at, "unexpected end of input")),
        }
    }

    fn digits(&mut self) -> Result<&str> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::parse(start, "expected digits"));
        }
        Ok(&self.src[start..self.pos])
    }

    fn integer(&mut self) -> Result<u64> {
        let at = self.pos;
        self.digits()?
            .parse()
            .map_err(|_| Error::parse(at, "integer out of range"))
    }

    fn big_integer(&mut self) -> Result<BigInt> {
        let at = self.pos;
        self.digits()?
            .parse()
            .map_err(|_| Error::parse(at, "invalid integer"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::Monomial;

    #[test]
    fn explicit_and_implicit_products_agree() {
        let a = parse_polynomial("3/4 * x1^2 * x3 - x2", 3).unwrap();
        let b = parse_polynomial("3/4 x1^2 x3 - x2", 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.coeff(&Monomial::from_exponents([2, 0, 1])), Rational::new(3, 4));
    }

    #[test]
    fn parentheses_and_powers() {
        let a = parse_polynomial("(x1 + 1)^2", 1).unwrap();
        assert_eq!(a, parse_polynomial("x1^2 + 2 x1 + 1", 1).unwrap());
        assert_eq!(parse_polynomial("-(x1 - x2)", 2).unwrap().to_string(), "-x1 + x2");
    }

    #[test]
    fn errors_carry_positions() {
        match parse_polynomial("x1 + x4", 3) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        match parse_polynomial("x1 + * x2", 2) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(parse_polynomial("1/0", 1).is_err());
        assert!(parse_polynomial("x1 x2)", 2).is_err());
        assert!(parse_polynomial("", 2).is_err());
    }
}
