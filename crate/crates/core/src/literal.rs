//! Parsing of element literals, curve specifications and twist data.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr  := ['-'] term (('+' | '-') term)*
//! term  := power (('*' | '/') power)*
//! power := atom ['^' ['-'] integer]
//! atom  := integer | 'g' | 't' | '(' expr ')'
//! ```
//!
//! Values are exact Laurent polynomials over F_q. Division is only by
//! monomials. Columns in errors are 1-based character positions.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::gf::GFq;
use crate::laurent::Laurent;
use crate::localfield::LocalField;
use crate::quadratic::TwistDatum;

/// Largest accepted exponent magnitude.
pub const MAX_EXPONENT: i64 = 4096;

/// Coefficient names in order.
pub const COEFF_NAMES: [&str; 5] = ["a1", "a2", "a3", "a4", "a6"];

struct Parser<'a> {
    k: &'a GFq,
    chars: Vec<char>,
    pos: usize,
    /// Column offset added to every reported position.
    base: usize,
}

fn perr(column: usize, message: impl Into<String>) -> Error {
    Error::Parse { column, message: message.into() }
}

impl<'a> Parser<'a> {
    fn col(&self) -> usize {
        self.base + self.pos + 1
    }
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }
    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }
    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(perr(self.col(), "expected an integer"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| perr(self.base + start + 1, "integer too large"))
    }

    fn expr(&mut self) -> Result<Laurent> {
        let mut acc = if self.peek() == Some('-') {
            self.pos += 1;
            self.term()?.neg()
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some('-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Laurent> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?);
                }
                Some('/') => {
                    self.pos += 1;
                    self.skip_ws();
                    let col = self.col();
                    let den = self.power()?;
                    if den.is_zero() {
                        return Err(perr(col, "division by zero"));
                    }
                    acc = acc.div_exact_monomial(&den).map_err(|_| perr(col, "divisor must be a monomial"))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Laurent> {
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let neg = self.peek() == Some('-');
        if neg {
            self.pos += 1;
        }
        self.skip_ws();
        let col = self.col();
        let ex = self.integer()?;
        if ex > MAX_EXPONENT {
            return Err(perr(col, format!("exponent exceeds {MAX_EXPONENT}")));
        }
        let pos = base.pow(ex as u32);
        if !neg {
            return Ok(pos);
        }
        if pos.is_zero() {
            return Err(perr(col, "division by zero"));
        }
        Laurent::constant(self.k, 1)
            .div_exact_monomial(&pos)
            .map_err(|_| perr(col, "negative powers require a monomial base"))
    }

    fn atom(&mut self) -> Result<Laurent> {
        let next = self.peek();
        let col = self.col();
        match next {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(perr(self.col(), "expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(Laurent::constant(self.k, self.k.from_int(n).code()))
            }
            Some('g') => {
                self.pos += 1;
                if self.k.n() == 1 {
                    return Err(perr(col, "'g' is only defined for n > 1"));
                }
                Ok(Laurent::constant(self.k, self.k.gen().code()))
            }
            Some('t') => {
                self.pos += 1;
                Ok(Laurent::monomial(self.k, 1, 1))
            }
            Some('T') => Err(perr(col, "'T' denotes the deformed uniformizer; inputs are in t")),
            Some(c) => Err(perr(col, format!("unexpected character {c:?}"))),
            None => Err(perr(col, "unexpected end of input")),
        }
    }
}

fn parse_at(k: &GFq, s: &str, base: usize, allow_negative: bool) -> Result<Laurent> {
    let mut p = Parser { k, chars: s.chars().collect(), pos: 0, base };
    let v = p.expr()?;
    if let Some(c) = p.peek() {
        return Err(perr(p.col(), format!("unexpected character {c:?}")));
    }
    if !allow_negative && !v.is_integral() {
        return Err(perr(base + 1, "negative powers of t are only allowed in gamma"));
    }
    Ok(v)
}

/// An integral element of F_q[[t]] given as a finite literal.
pub fn parse_integral(k: &GFq, s: &str) -> Result<Laurent> {
    parse_at(k, s, 0, false)
}

/// A Laurent polynomial, negative powers allowed.
pub fn parse_laurent(k: &GFq, s: &str) -> Result<Laurent> {
    parse_at(k, s, 0, true)
}

/// Curve coefficients as "a1,a2,a3,a4,a6" or named "a4=1, a6=t" (absent names are 0).
pub fn parse_curve(k: &GFq, s: &str) -> Result<[Laurent; 5]> {
    let mut pieces = Vec::new();
    let mut start = 0;
    for (i, c) in s.char_indices() {
        if c == ',' {
            pieces.push((start, &s[start..i]));
            start = i + 1;
        }
    }
    pieces.push((start, &s[start..]));
    let col_of = |byte: usize| s[..byte].chars().count();

    let named = pieces.iter().any(|(_, p)| p.contains('='));
    let mut out: [Laurent; 5] = std::array::from_fn(|_| Laurent::zero(k));
    if named {
        let mut seen = [false; 5];
        for (off, piece) in pieces {
            let Some(eq) = piece.find('=') else {
                return Err(perr(col_of(off) + 1, "expected name=value"));
            };
            let name = piece[..eq].trim();
            let idx = COEFF_NAMES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| perr(col_of(off) + 1, format!("unknown coefficient {name:?}")))?;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(perr(col_of(off) + 1, format!("duplicate coefficient {name}")));
            }
            out[idx] = parse_at(k, &piece[eq + 1..], col_of(off + eq + 1), false)?;
        }
    } else {
        if pieces.len() != 5 {
            return Err(perr(1, format!("expected 5 comma-separated coefficients, found {}", pieces.len())));
        }
        for (i, (off, piece)) in pieces.into_iter().enumerate() {
            out[i] = parse_at(k, piece, col_of(off), false)?;
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TwistJson {
    SqrtD { d: String },
    ArtinSchreier { gamma: String },
}

/// A twist datum from JSON: {"kind":"sqrt_d","d":"t"} or {"kind":"artin_schreier","gamma":"1/t^3"}.
pub fn parse_twist(field: &LocalField, json: &str) -> Result<TwistDatum> {
    let spec: TwistJson =
        serde_json::from_str(json).map_err(|e| perr(e.column(), format!("twist JSON: {e}")))?;
    let k = field.residue_field();
    match spec {
        TwistJson::SqrtD { d } => TwistDatum::sqrt_d(field, &parse_integral(k, &d)?),
        TwistJson::ArtinSchreier { gamma } => TwistDatum::artin_schreier(field, &parse_laurent(k, &gamma)?),
    }
}
