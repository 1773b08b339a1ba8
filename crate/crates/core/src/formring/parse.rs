//! Recursive-descent parser for form text.
//!
//! ```text
//! form   := ['+'|'-'] term (('+'|'-') term)*
//! term   := coeff ['*' factor ('*' factor)*] | factor ('*' factor)*
//! factor := 'x' digits ['^' digits]
//! coeff  := digits | '(' tpoly ')'
//! tpoly  := ['+'|'-'] tterm (('+'|'-') tterm)*
//! tterm  := digits ['*' 't' ['^' digits]] | 't' ['^' digits]
//! ```
//!
//! Whitespace is insignificant. Integers are reduced mod p; `t` is the root of
//! the field modulus and is only available in extension fields.

use super::{check_nvars, Form, FormError, Monomial, MAX_EXPONENT};
use crate::gf::{Field, Fq};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    field: &'a Field,
    nvars: usize,
}

fn syntax(pos: usize, msg: impl Into<String>) -> FormError {
    FormError::Syntax { pos, msg: msg.into() }
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

    fn expect(&mut self, c: u8) -> Result<(), FormError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(syntax(self.pos, format!("expected '{}'", c as char)))
        }
    }

    /// Digits reduced modulo `m`, plus the raw value saturated at u64::MAX.
    fn digits(&mut self, m: u64) -> Result<(u64, u64), FormError> {
        self.skip_ws();
        let start = self.pos;
        let mut reduced = 0u64;
        let mut raw = 0u64;
        while let Some(&c) = self.src.get(self.pos) {
            if !c.is_ascii_digit() {
                break;
            }
            let d = (c - b'0') as u64;
            reduced = (reduced * 10 + d) % m;
            raw = raw.saturating_mul(10).saturating_add(d);
            self.pos += 1;
        }
        if self.pos == start {
            return Err(syntax(start, "expected a number"));
        }
        Ok((reduced, raw))
    }

    fn small_int(&mut self) -> Result<u64, FormError> {
        Ok(self.digits(u64::MAX)?.1)
    }

    fn coeff(&mut self) -> Result<Fq, FormError> {
        if self.eat(b'(') {
            let v = self.tpoly()?;
            self.expect(b')')?;
            Ok(v)
        } else {
            let (c, _) = self.digits(self.field.p() as u64)?;
            Ok(self.field.from_int(c as i64))
        }
    }

    fn tpoly(&mut self) -> Result<Fq, FormError> {
        let f = self.field;
        let mut acc = Fq::ZERO;
        let mut negate = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        loop {
            let term = self.tterm()?;
            let term = if negate { f.neg(term) } else { term };
            acc = f.add(acc, term);
            if self.eat(b'+') {
                negate = false;
            } else if self.eat(b'-') {
                negate = true;
            } else {
                return Ok(acc);
            }
        }
    }

    fn tterm(&mut self) -> Result<Fq, FormError> {
        let f = self.field;
        let coeff = match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let (c, _) = self.digits(f.p() as u64)?;
                let c = f.from_int(c as i64);
                if !self.eat(b'*') {
                    return Ok(c);
                }
                c
            }
            _ => Fq::ONE,
        };
        let at = self.pos;
        if !self.eat(b't') {
            return Err(syntax(self.pos, "expected 't' or a number"));
        }
        if f.e() == 1 {
            return Err(syntax(at, "'t' is only defined in extension fields"));
        }
        let k = if self.eat(b'^') { self.small_int()? } else { 1 };
        Ok(f.mul(coeff, f.pow(f.generator(), k)))
    }

    fn factor(&mut self, exps: &mut [u32]) -> Result<(), FormError> {
        let at = self.pos;
        if !self.eat(b'x') {
            return Err(syntax(self.pos, "expected a variable 'x<i>'"));
        }
        // no whitespace between 'x' and its index
        if !self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            return Err(syntax(self.pos, "expected a variable index"));
        }
        let index = self.small_int()?;
        if index >= self.nvars as u64 {
            return Err(FormError::VariableOutOfRange {
                pos: at,
                index: index.min(usize::MAX as u64) as usize,
                nvars: self.nvars,
            });
        }
        let k = if self.eat(b'^') { self.small_int()? } else { 1 };
        let slot = &mut exps[index as usize];
        let total = (*slot as u64).saturating_add(k);
        if total > MAX_EXPONENT as u64 {
            return Err(FormError::ExponentOverflow { max: MAX_EXPONENT });
        }
        *slot = total as u32;
        Ok(())
    }

    /// Returns the term's monomial and coefficient.
    fn term(&mut self) -> Result<(Monomial, Fq), FormError> {
        let mut exps = vec![0u32; self.nvars];
        let coeff = match self.peek() {
            Some(b'x') => {
                self.factor(&mut exps)?;
                Fq::ONE
            }
            Some(c) if c.is_ascii_digit() || c == b'(' => {
                let c = self.coeff()?;
                if !self.eat(b'*') {
                    return Ok((Monomial::one(), c));
                }
                self.factor(&mut exps)?;
                c
            }
            Some(c) => return Err(syntax(self.pos, format!("unexpected '{}'", c as char))),
            None => return Err(syntax(self.pos, "unexpected end of input")),
        };
        while self.eat(b'*') {
            self.factor(&mut exps)?;
        }
        Ok((Monomial::new(&exps).expect("checked exponents"), coeff))
    }

    fn form(&mut self) -> Result<Form, FormError> {
        let f = self.field;
        let mut degree: Option<u32> = None;
        let mut terms = Vec::new();
        let mut negate = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        loop {
            self.skip_ws();
            let start = self.pos;
            let (m, c) = self.term()?;
            match degree {
                None => degree = Some(m.degree()),
                Some(d) if d != m.degree() => {
                    return Err(FormError::Inhomogeneous { pos: start, expected: d, found: m.degree() })
                }
                _ => {}
            }
            terms.push((m, if negate { f.neg(c) } else { c }));
            if self.eat(b'+') {
                negate = false;
            } else if self.eat(b'-') {
                negate = true;
            } else if self.peek().is_none() {
                break;
            } else {
                return Err(syntax(self.pos, "expected '+', '-' or end of input"));
            }
        }
        Form::from_terms(f, self.nvars, degree.unwrap_or(0), terms)
    }
}

/// Parses form text over `field` in `nvars` variables `x0, ..., x{nvars-1}`.
pub fn parse_form(text: &str, field: &Field, nvars: usize) -> Result<Form, FormError> {
    check_nvars(nvars)?;
    let mut parser = Parser { src: text.as_bytes(), pos: 0, field, nvars };
    parser.form()
}
