//! Exact Laurent polynomials over F_q: the finite elements of F_q((t)) that
//! user input and random generation produce.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf::GFq;
use crate::localfield::{format_digits, LFElement, LocalField};

/// sum_i digits[i] t^(low + i), normalized so that the first and last digits are nonzero.
#[derive(Clone, PartialEq, Eq)]
pub struct Laurent {
    field: GFq,
    low: i64,
    digits: Vec<u32>,
}

impl Laurent {
    pub fn new(field: &GFq, low: i64, digits: Vec<u32>) -> Laurent {
        let mut l = Laurent { field: field.clone(), low, digits };
        l.normalize();
        l
    }
    pub fn zero(field: &GFq) -> Laurent {
        Laurent { field: field.clone(), low: 0, digits: Vec::new() }
    }
    pub fn constant(field: &GFq, c: u32) -> Laurent {
        Laurent::new(field, 0, vec![c])
    }
    pub fn monomial(field: &GFq, c: u32, exp: i64) -> Laurent {
        Laurent::new(field, exp, vec![c])
    }

    fn normalize(&mut self) {
        while self.digits.last() == Some(&0) {
            self.digits.pop();
        }
        let lead = self.digits.iter().take_while(|&&d| d == 0).count();
        if lead == self.digits.len() {
            self.digits.clear();
            self.low = 0;
            return;
        }
        self.digits.drain(..lead);
        self.low += lead as i64;
    }

    pub fn field(&self) -> &GFq {
        &self.field
    }
    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }
    pub fn valuation(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.low)
    }
    /// Highest exponent present.
    pub fn degree(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.low + self.digits.len() as i64 - 1)
    }
    /// Coefficient code of t^i.
    pub fn coeff(&self, i: i64) -> u32 {
        let idx = i - self.low;
        if idx < 0 || idx >= self.digits.len() as i64 {
            0
        } else {
            self.digits[idx as usize]
        }
    }
    pub fn leading_coeff(&self) -> u32 {
        self.digits.first().copied().unwrap_or(0)
    }
    pub fn is_integral(&self) -> bool {
        self.valuation().is_none_or(|v| v >= 0)
    }

    /// Coefficients of t^0..t^(j-1) (requires integrality).
    pub fn truncated_digits(&self, j: i64) -> Result<Vec<u32>> {
        if !self.is_integral() {
            return Err(Error::NonIntegral);
        }
        Ok((0..j).map(|i| self.coeff(i)).collect())
    }

    /// The element of `field` (either backend) given by the same digits, known to `prec`.
    pub fn to_element(&self, field: &LocalField, prec: i64) -> LFElement {
        if self.is_zero() {
            return field.zero(prec);
        }
        field.from_digits(&self.digits, self.low, prec)
    }

    fn combine(&self, other: &Laurent, f: impl Fn(u32, u32) -> u32) -> Laurent {
        if self.is_zero() && other.is_zero() {
            return self.clone();
        }
        let lo = match (self.valuation(), other.valuation()) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => 0,
        };
        let hi = self.degree().unwrap_or(lo).max(other.degree().unwrap_or(lo));
        let digits = (lo..=hi).map(|i| f(self.coeff(i), other.coeff(i))).collect();
        Laurent::new(&self.field, lo, digits)
    }

    pub fn add(&self, other: &Laurent) -> Laurent {
        self.combine(other, |a, b| self.field.add(a, b))
    }
    pub fn sub(&self, other: &Laurent) -> Laurent {
        self.combine(other, |a, b| self.field.sub(a, b))
    }
    pub fn neg(&self) -> Laurent {
        Laurent::new(&self.field, self.low, self.digits.iter().map(|&d| self.field.neg(d)).collect())
    }
    pub fn mul(&self, other: &Laurent) -> Laurent {
        if self.is_zero() || other.is_zero() {
            return Laurent::zero(&self.field);
        }
        let k = &self.field;
        let mut out = vec![0u32; self.digits.len() + other.digits.len() - 1];
        for (i, &a) in self.digits.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.digits.iter().enumerate() {
                out[i + j] = k.add(out[i + j], k.mul(a, b));
            }
        }
        Laurent::new(k, self.low + other.low, out)
    }
    pub fn scale(&self, c: u32) -> Laurent {
        Laurent::new(&self.field, self.low, self.digits.iter().map(|&d| self.field.mul(d, c)).collect())
    }
    pub fn shift(&self, k: i64) -> Laurent {
        Laurent { low: self.low + k, ..self.clone() }
    }
    pub fn pow(&self, k: u32) -> Laurent {
        let mut acc = Laurent::constant(&self.field, 1);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact quotient when the divisor is a monomial; otherwise an error.
    pub fn div_exact_monomial(&self, other: &Laurent) -> Result<Laurent> {
        if other.digits.len() != 1 {
            return Err(Error::InvalidInput("division is only supported by monomials".into()));
        }
        let inv = self.field.inv(other.digits[0])?;
        Ok(self.scale(inv).shift(-other.low))
    }

    pub fn to_literal(&self) -> String {
        format_digits(&self.field, 't', self.low, &self.digits)
    }
}

impl fmt::Debug for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}
impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_normalization() {
        let k = GFq::new(2, 1).unwrap();
        let a = Laurent::new(&k, -2, vec![1, 0, 1]); // 1/t^2 + 1
        let b = Laurent::new(&k, -2, vec![1]);
        assert_eq!(a.add(&b), Laurent::constant(&k, 1));
        assert_eq!(a.valuation(), Some(-2));
        assert_eq!(a.mul(&a), Laurent::new(&k, -4, vec![1, 0, 0, 0, 1]));
        assert_eq!(a.to_literal(), "1/t^2 + 1");
        assert!(Laurent::new(&k, 3, vec![0, 0]).is_zero());
    }

    #[test]
    fn materialize_matches_digits() {
        let k = GFq::new(3, 1).unwrap();
        let x = Laurent::new(&k, 1, vec![2, 0, 1]);
        let f = LocalField::equal_char(k);
        let e = x.to_element(&f, 10);
        assert_eq!(e.valuation(), Some(1));
        assert_eq!(e.to_literal(), x.to_literal());
    }
}
