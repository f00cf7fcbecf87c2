//! Finite fields F_{p^n} with q <= 2^16, backed by log/exp tables.
//!
//! Elements are addressed by an integer code: the coordinate vector
//! (c_0, ..., c_{n-1}) with respect to the power basis of the defining
//! polynomial is encoded as c_0 + c_1 p + ... + c_{n-1} p^{n-1}.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 16;

struct Tables {
    p: u32,
    n: usize,
    q: u32,
    poly: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    trace_basis: Vec<u32>,
    prim: u32,
}

/// A finite field F_{p^n}. Cheap to clone; instances are cached per (p, n).
#[derive(Clone)]
pub struct GFq(Arc<Tables>);

impl PartialEq for GFq {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.p == other.0.p && self.0.n == other.0.n)
    }
}
impl Eq for GFq {}

impl fmt::Debug for GFq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.0.p, self.0.n)
    }
}

pub(crate) fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            out.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

// Dense polynomials over F_p, ascending coefficients.
mod fp_poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let df = f.len() - 1;
        let lead_inv = inv_mod(f[df], p);
        while r.len() > df {
            let k = r.len() - 1 - df;
            let c = (r[r.len() - 1] as u64 * lead_inv as u64 % p as u64) as u32;
            for (i, &fi) in f.iter().enumerate() {
                let sub = (c as u64 * fi as u64 % p as u64) as u32;
                r[k + i] = (r[k + i] + p - sub) % p;
            }
            trim(&mut r);
        }
        r
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let mut v: Vec<u32> = out.into_iter().map(|x| x as u32).collect();
        trim(&mut v);
        v
    }

    pub fn mulmod(a: &[u32], b: &[u32], f: &[u32], p: u32) -> Vec<u32> {
        rem(&mul(a, b, p), f, p)
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let len = a.len().max(b.len());
        let mut v: Vec<u32> = (0..len)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut v);
        v
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        let mut r = 1u64;
        let mut b = a as u64 % p as u64;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r as u32
    }

    /// Ben-Or style irreducibility test for a monic polynomial.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let n = f.len() - 1;
        if n == 1 {
            return true;
        }
        let x = vec![0, 1];
        let mut xp = x.clone();
        for _ in 0..n / 2 {
            // xp <- xp^p mod f
            let mut acc = vec![1u32];
            let mut base = xp.clone();
            let mut e = p;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulmod(&acc, &base, f, p);
                }
                base = mulmod(&base, &base, f, p);
                e >>= 1;
            }
            xp = acc;
            let g = gcd(f, &sub(&xp, &x, p), p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}

/// Solve a linear system over F_p given by its columns; returns the solution
/// with every free variable set to zero, or `None` if inconsistent.
pub(crate) fn solve_fp_linear(cols: &[Vec<u32>], rhs: &[u32], p: u32) -> Option<Vec<u32>> {
    let rows = rhs.len();
    let ncols = cols.len();
    let pm = p as u64;
    let mut m: Vec<Vec<u64>> = (0..rows)
        .map(|r| {
            let mut row: Vec<u64> = cols.iter().map(|c| c[r] as u64).collect();
            row.push(rhs[r] as u64);
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_multiple_of(pm)) else {
            continue;
        };
        m.swap(r, pr);
        let inv = fp_poly::inv_mod(m[r][c] as u32, p) as u64;
        for x in m[r].iter_mut() {
            *x = *x * inv % pm;
        }
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x = (*x + pm * pm - f * y) % pm;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| row[ncols] != 0) {
        return None;
    }
    let mut sol = vec![0u32; ncols];
    for (i, &c) in pivots.iter().enumerate() {
        sol[c] = m[i][ncols] as u32;
    }
    Some(sol)
}

fn cache() -> &'static Mutex<HashMap<(u32, usize), GFq>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), GFq>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl GFq {
    /// The field with p^n elements, using the lexicographically least monic
    /// irreducible polynomial of degree n as modulus.
    pub fn new(p: u32, n: usize) -> Result<GFq> {
        if !is_prime(p as u64) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if n == 0 {
            return Err(Error::InvalidField("extension degree must be at least 1".into()));
        }
        let q = (p as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
        if q > MAX_ORDER {
            return Err(Error::FieldTooLarge(q));
        }
        if let Some(f) = cache().lock().expect("field cache poisoned").get(&(p, n)) {
            return Ok(f.clone());
        }
        let mut field = GFq(Arc::new(Self::build(p, n, q as u32)));
        let basis: Vec<u32> = (0..n as u32).map(|i| field.trace_slow(p.pow(i))).collect();
        Arc::get_mut(&mut field.0).expect("fresh field is unshared").trace_basis = basis;
        cache()
            .lock()
            .expect("field cache poisoned")
            .entry((p, n))
            .or_insert(field.clone());
        Ok(field)
    }

    fn build(p: u32, n: usize, q: u32) -> Tables {
        let q_low = q as u64;
        let mut poly = Vec::new();
        for k in 0..q_low {
            let mut c: Vec<u32> = Vec::with_capacity(n + 1);
            let mut kk = k;
            for _ in 0..n {
                c.push((kk % p as u64) as u32);
                kk /= p as u64;
            }
            c.push(1);
            if fp_poly::is_irreducible(&c, p) {
                poly = c;
                break;
            }
        }
        assert!(!poly.is_empty(), "an irreducible polynomial of every degree exists");

        let to_vec = |code: u32| -> Vec<u32> {
            let mut v = Vec::with_capacity(n);
            let mut c = code;
            for _ in 0..n {
                v.push(c % p);
                c /= p;
            }
            fp_poly::trim(&mut v);
            v
        };
        let to_code = |v: &[u32]| -> u32 { v.iter().rev().fold(0, |acc, &c| acc * p + c) };
        let slow_mul = |a: u32, b: u32| -> u32 { to_code(&fp_poly::mulmod(&to_vec(a), &to_vec(b), &poly, p)) };
        let slow_pow = |a: u32, mut e: u64| -> u32 {
            let mut r = 1u32;
            let mut b = a;
            while e > 0 {
                if e & 1 == 1 {
                    r = slow_mul(r, b);
                }
                b = slow_mul(b, b);
                e >>= 1;
            }
            r
        };

        let order = (q - 1) as u64;
        let factors = prime_factors(order);
        let prim = (1..q)
            .find(|&c| factors.iter().all(|&l| slow_pow(c, order / l) != 1))
            .expect("multiplicative group is cyclic");
        let mut exp = vec![0u32; (q - 1) as usize];
        let mut log = vec![0u32; q as usize];
        let mut cur = 1u32;
        for (k, slot) in exp.iter_mut().enumerate() {
            *slot = cur;
            log[cur as usize] = k as u32;
            cur = slow_mul(cur, prim);
        }
        assert_eq!(cur, 1, "primitive element order check");

        Tables { p, n, q, poly, exp, log, trace_basis: Vec::new(), prim }
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }
    pub fn n(&self) -> usize {
        self.0.n
    }
    pub fn q(&self) -> u32 {
        self.0.q
    }
    /// Defining polynomial, ascending coefficients, monic.
    pub fn defining_poly(&self) -> &[u32] {
        &self.0.poly
    }

    pub fn elem(&self, code: u32) -> GFqElem {
        debug_assert!(code < self.q());
        GFqElem { field: self.clone(), code }
    }
    pub fn zero(&self) -> GFqElem {
        self.elem(0)
    }
    pub fn one(&self) -> GFqElem {
        self.elem(1)
    }
    /// Class of x in F_p[x]/(f); only meaningful as a generator when n > 1.
    pub fn gen(&self) -> GFqElem {
        if self.n() == 1 {
            self.elem(0)
        } else {
            self.elem(self.p())
        }
    }
    /// A generator of the multiplicative group.
    pub fn primitive_element(&self) -> GFqElem {
        self.elem(self.0.prim)
    }
    pub fn from_int(&self, k: i64) -> GFqElem {
        self.elem(k.rem_euclid(self.p() as i64) as u32)
    }
    pub fn from_coords(&self, coords: &[u32]) -> Result<GFqElem> {
        if coords.len() > self.n() || coords.iter().any(|&c| c >= self.p()) {
            return Err(Error::InvalidInput(format!("bad coordinate vector {coords:?}")));
        }
        Ok(self.elem(coords.iter().rev().fold(0, |acc, &c| acc * self.p() + c)))
    }
    pub fn coords(&self, code: u32) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.n());
        let mut c = code;
        for _ in 0..self.n() {
            v.push(c % self.p());
            c /= self.p();
        }
        v
    }
    pub fn code_of(&self, coords: &[u32]) -> u32 {
        coords.iter().rev().fold(0, |acc, &c| acc * self.p() + c % self.p())
    }

    /// All element codes 0..q.
    pub fn codes(&self) -> std::ops::Range<u32> {
        0..self.q()
    }

    // Raw arithmetic on codes.

    pub fn add(&self, a: u32, b: u32) -> u32 {
        let p = self.p();
        if p == 2 {
            return a ^ b;
        }
        if self.n() == 1 {
            return (a + b) % p;
        }
        let (mut a, mut b, mut pw, mut r) = (a, b, 1, 0);
        for _ in 0..self.n() {
            r += ((a % p + b % p) % p) * pw;
            a /= p;
            b /= p;
            pw *= p;
        }
        r
    }
    pub fn neg(&self, a: u32) -> u32 {
        let p = self.p();
        if p == 2 {
            return a;
        }
        if self.n() == 1 {
            return (p - a) % p;
        }
        let (mut a, mut pw, mut r) = (a, 1, 0);
        for _ in 0..self.n() {
            r += ((p - a % p) % p) * pw;
            a /= p;
            pw *= p;
        }
        r
    }
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let t = &self.0;
        let k = (t.log[a as usize] + t.log[b as usize]) % (t.q - 1);
        t.exp[k as usize]
    }
    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        let t = &self.0;
        Ok(t.exp[((t.q - 1 - t.log[a as usize]) % (t.q - 1)) as usize])
    }
    pub fn div(&self, a: u32, b: u32) -> Result<u32> {
        Ok(self.mul(a, self.inv(b)?))
    }
    pub fn pow(&self, a: u32, e: i64) -> Result<u32> {
        if a == 0 {
            return match e.cmp(&0) {
                std::cmp::Ordering::Greater => Ok(0),
                std::cmp::Ordering::Equal => Ok(1),
                std::cmp::Ordering::Less => Err(Error::DivisionByZero),
            };
        }
        let t = &self.0;
        let ord = (t.q - 1) as i64;
        let k = (t.log[a as usize] as i64 * e.rem_euclid(ord)).rem_euclid(ord);
        Ok(t.exp[k as usize])
    }
    /// Discrete logarithm with respect to the primitive element.
    pub fn log(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.0.log[a as usize])
    }
    pub fn exp(&self, k: i64) -> u32 {
        let ord = (self.q() - 1) as i64;
        self.0.exp[k.rem_euclid(ord) as usize]
    }

    fn trace_slow(&self, a: u32) -> u32 {
        let mut acc = 0;
        let mut x = a;
        for _ in 0..self.n() {
            acc = self.add(acc, x);
            x = self.frob_table(x);
        }
        acc
    }
    fn frob_table(&self, a: u32) -> u32 {
        if a == 0 {
            return 0;
        }
        let t = &self.0;
        let k = (t.log[a as usize] as u64 * t.p as u64 % (t.q - 1) as u64) as usize;
        t.exp[k]
    }

    /// Absolute trace to F_p, returned as an integer in [0, p).
    pub fn trace(&self, a: u32) -> u32 {
        let p = self.p();
        let mut acc = 0u64;
        for (i, c) in self.coords(a).into_iter().enumerate() {
            acc += c as u64 * self.0.trace_basis[i] as u64;
        }
        (acc % p as u64) as u32
    }

    /// a^{(q-1)/2} in {+1, -1}, or 0 for a = 0.
    pub fn quadratic_residue(&self, a: u32) -> Result<i8> {
        if self.p() == 2 {
            return Err(Error::OddCharRequired);
        }
        if a == 0 {
            return Ok(0);
        }
        Ok(if self.0.log[a as usize].is_multiple_of(2) { 1 } else { -1 })
    }

    /// A square root, choosing the one with the smaller code.
    pub fn sqrt(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return Some(0);
        }
        let t = &self.0;
        let k = t.log[a as usize] as u64;
        let ord = (t.q - 1) as u64;
        if t.p == 2 {
            return Some(t.exp[(k * (t.q as u64 / 2) % ord) as usize]);
        }
        if k % 2 == 1 {
            return None;
        }
        let r = t.exp[(k / 2) as usize];
        Some(r.min(self.neg(r)))
    }

    /// Solve x^2 - x = a (p = 2). Returns the solution whose constant
    /// coordinate is 0; the other solution is x + 1.
    pub fn solve_artin_schreier(&self, a: u32) -> Result<Option<u32>> {
        if self.p() != 2 {
            return Err(Error::EvenCharRequired);
        }
        if self.trace(a) != 0 {
            return Ok(None);
        }
        let n = self.n();
        let cols: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                let b = 1u32 << i;
                self.coords(self.add(self.mul(b, b), b))
            })
            .collect();
        let sol = solve_fp_linear(&cols, &self.coords(a), 2)
            .ok_or_else(|| Error::Internal("trace-zero Artin-Schreier equation has no root".into()))?;
        let mut x = self.code_of(&sol);
        if x & 1 == 1 {
            x ^= 1;
        }
        Ok(Some(x))
    }

    /// exp(2 pi i Tr(a) / p).
    pub fn additive_character(&self, a: u32) -> Complex64 {
        let tr = self.trace(a) as f64;
        Complex64::from_polar(1.0, 2.0 * PI * tr / self.p() as f64)
    }

    /// sum over x != 0 of chi(x) psi(x u) for a multiplicative character chi.
    pub fn gauss_sum(&self, chi: &dyn Fn(u32) -> Complex64, u: u32) -> Complex64 {
        (1..self.q())
            .map(|x| chi(x) * self.additive_character(self.mul(x, u)))
            .sum()
    }

    /// Normalized quadratic Gauss sum g/|g|.
    pub fn gauss_sum_sign(&self, u: &GFqElem) -> Result<Complex64> {
        if self.p() == 2 {
            return Err(Error::OddCharRequired);
        }
        self.check_parent(u)?;
        if u.code == 0 {
            return Err(Error::InvalidInput("Gauss sum level unit must be nonzero".into()));
        }
        let chi = |x: u32| Complex64::new(self.quadratic_residue(x).unwrap_or(0) as f64, 0.0);
        let g = self.gauss_sum(&chi, u.code);
        let q = self.q() as f64;
        if (g.norm_sqr() - q).abs() > 1e-9 * q {
            return Err(Error::Internal(format!("|g|^2 = {} differs from q = {q}", g.norm_sqr())));
        }
        Ok(g / g.norm())
    }

    /// Evaluate a polynomial (ascending coefficient codes) by Horner's rule.
    pub fn eval_poly(&self, coeffs: &[u32], x: u32) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }

    /// Roots of a nonzero polynomial with multiplicities, by exhaustive search
    /// and repeated synthetic division. Sorted by code.
    pub fn roots_with_multiplicity(&self, coeffs: &[u32]) -> Vec<(u32, u32)> {
        let mut poly = coeffs.to_vec();
        while poly.last() == Some(&0) {
            poly.pop();
        }
        if poly.len() <= 1 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for x in self.codes() {
            if self.eval_poly(&poly, x) != 0 {
                continue;
            }
            let mut mult = 0;
            let mut cur = poly.clone();
            while cur.len() > 1 && self.eval_poly(&cur, x) == 0 {
                cur = self.synthetic_div(&cur, x);
                mult += 1;
            }
            out.push((x, mult));
        }
        out
    }

    /// Quotient of f by (X - x), assuming f(x) = 0.
    fn synthetic_div(&self, f: &[u32], x: u32) -> Vec<u32> {
        let d = f.len() - 1;
        let mut out = vec![0u32; d];
        let mut carry = 0;
        for i in (0..d).rev() {
            carry = self.add(f[i + 1], self.mul(carry, x));
            out[i] = carry;
        }
        out
    }

    /// Canonical text form: descending powers of g, e.g. "2*g^2+g+1".
    pub fn format_code(&self, code: u32) -> String {
        if code == 0 {
            return "0".into();
        }
        let c = self.coords(code);
        let mut parts = Vec::new();
        for i in (0..c.len()).rev() {
            let ci = c[i];
            if ci == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "g".to_string(),
                _ => format!("g^{i}"),
            };
            parts.push(match (ci, i) {
                (_, 0) => ci.to_string(),
                (1, _) => mono,
                _ => format!("{ci}*{mono}"),
            });
        }
        parts.join("+")
    }

    fn check_parent(&self, a: &GFqElem) -> Result<()> {
        if a.field == *self {
            Ok(())
        } else {
            Err(Error::ParentMismatch)
        }
    }
}

/// An element of a finite field.
#[derive(Clone)]
pub struct GFqElem {
    field: GFq,
    code: u32,
}

impl PartialEq for GFqElem {
    fn eq(&self, other: &Self) -> bool {
        self.code == other.code && self.field == other.field
    }
}
impl Eq for GFqElem {}

impl std::hash::Hash for GFqElem {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.code.hash(state);
    }
}

impl fmt::Debug for GFqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.format_code(self.code))
    }
}
impl fmt::Display for GFqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.field.format_code(self.code))
    }
}

/// Operation selector for [`ff_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfOp {
    Add,
    Mul,
    Inv,
    Pow(i64),
}

/// Checked arithmetic: verifies parents and reports division by zero.
/// `Inv` and `Pow` ignore `b` apart from the parent check.
pub fn ff_arith(a: &GFqElem, b: &GFqElem, op: FfOp) -> Result<GFqElem> {
    if a.field != b.field {
        return Err(Error::ParentMismatch);
    }
    let f = &a.field;
    let code = match op {
        FfOp::Add => f.add(a.code, b.code),
        FfOp::Mul => f.mul(a.code, b.code),
        FfOp::Inv => f.inv(a.code)?,
        FfOp::Pow(e) => f.pow(a.code, e)?,
    };
    Ok(f.elem(code))
}

impl GFqElem {
    pub fn field(&self) -> &GFq {
        &self.field
    }
    pub fn code(&self) -> u32 {
        self.code
    }
    pub fn coords(&self) -> Vec<u32> {
        self.field.coords(self.code)
    }
    pub fn is_zero(&self) -> bool {
        self.code == 0
    }
    pub fn is_one(&self) -> bool {
        self.code == 1
    }
    pub fn inv(&self) -> Result<GFqElem> {
        Ok(self.field.elem(self.field.inv(self.code)?))
    }
    pub fn pow(&self, e: i64) -> Result<GFqElem> {
        Ok(self.field.elem(self.field.pow(self.code, e)?))
    }
    pub fn frobenius(&self) -> GFqElem {
        self.field.elem(self.field.frob_table(self.code))
    }
    pub fn trace(&self) -> u32 {
        self.field.trace(self.code)
    }
    pub fn quadratic_residue(&self) -> Result<i8> {
        self.field.quadratic_residue(self.code)
    }
    pub fn sqrt(&self) -> Option<GFqElem> {
        self.field.sqrt(self.code).map(|c| self.field.elem(c))
    }
    pub fn solve_artin_schreier(&self) -> Result<Option<GFqElem>> {
        Ok(self.field.solve_artin_schreier(self.code)?.map(|c| self.field.elem(c)))
    }
}

fn same_parent(a: &GFqElem, b: &GFqElem) {
    assert!(a.field == b.field, "finite field parent mismatch: {:?} vs {:?}", a.field, b.field);
}

macro_rules! bin_op {
    ($tr:ident, $m:ident, $raw:ident) => {
        impl $tr<&GFqElem> for &GFqElem {
            type Output = GFqElem;
            fn $m(self, rhs: &GFqElem) -> GFqElem {
                same_parent(self, rhs);
                self.field.elem(self.field.$raw(self.code, rhs.code))
            }
        }
        impl $tr<GFqElem> for GFqElem {
            type Output = GFqElem;
            fn $m(self, rhs: GFqElem) -> GFqElem {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&GFqElem> for GFqElem {
            type Output = GFqElem;
            fn $m(self, rhs: &GFqElem) -> GFqElem {
                (&self).$m(rhs)
            }
        }
    };
}
bin_op!(Add, add, add);
bin_op!(Sub, sub, sub);
bin_op!(Mul, mul, mul);

impl Neg for &GFqElem {
    type Output = GFqElem;
    fn neg(self) -> GFqElem {
        self.field.elem(self.field.neg(self.code))
    }
}
impl Neg for GFqElem {
    type Output = GFqElem;
    fn neg(self) -> GFqElem {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(p: u32, n: usize) -> GFq {
        GFq::new(p, n).unwrap()
    }

    #[test]
    fn defining_polynomials_are_lex_least() {
        assert_eq!(f(2, 2).defining_poly(), &[1, 1, 1]);
        assert_eq!(f(3, 2).defining_poly(), &[1, 0, 1]);
        assert_eq!(f(5, 2).defining_poly(), &[2, 0, 1]);
        assert_eq!(f(2, 3).defining_poly(), &[1, 1, 0, 1]);
        assert_eq!(f(5, 1).defining_poly(), &[0, 1]);
    }

    #[test]
    fn small_arithmetic() {
        let f5 = f(5, 1);
        assert_eq!(f5.from_int(2) * f5.from_int(3), f5.one());
        assert_eq!(f5.from_int(2).inv().unwrap(), f5.from_int(3));
        let f4 = f(2, 2);
        let g = f4.gen();
        assert_eq!(&g * &g, g.clone() + f4.one());
        assert_eq!(format!("{}", &g * &g), "g+1");
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert_eq!(f(5, 1).zero().inv(), Err(Error::DivisionByZero));
        let a = f(5, 1).one();
        let b = f(7, 1).one();
        assert_eq!(ff_arith(&a, &b, FfOp::Add), Err(Error::ParentMismatch));
    }

    #[test]
    fn quadratic_residues() {
        let f5 = f(5, 1);
        assert_eq!(f5.from_int(4).quadratic_residue().unwrap(), 1);
        assert_eq!(f5.from_int(2).quadratic_residue().unwrap(), -1);
        assert_eq!(f5.zero().quadratic_residue().unwrap(), 0);
        let f9 = f(3, 2);
        assert_eq!(f9.primitive_element().quadratic_residue().unwrap(), -1);
        assert_eq!(f(2, 2).one().quadratic_residue(), Err(Error::OddCharRequired));
    }

    #[test]
    fn artin_schreier_small_cases() {
        let f2 = f(2, 1);
        assert_eq!(f2.zero().solve_artin_schreier().unwrap(), Some(f2.zero()));
        assert_eq!(f2.one().solve_artin_schreier().unwrap(), None);
        let f4 = f(2, 2);
        let x = f4.one().solve_artin_schreier().unwrap().unwrap();
        assert_eq!(x, f4.gen());
        assert_eq!(&x * &x - x.clone(), f4.one());
        assert_eq!(f(3, 1).one().solve_artin_schreier(), Err(Error::EvenCharRequired));
    }

    #[test]
    fn square_roots() {
        let f4 = f(2, 2);
        assert_eq!(f4.gen().sqrt(), Some(f4.gen() * f4.gen()));
        let f5 = f(5, 1);
        assert_eq!(f5.from_int(4).sqrt(), Some(f5.from_int(2)));
        assert_eq!(f5.from_int(2).sqrt(), None);
    }

    #[test]
    fn gauss_sum_signs() {
        let f5 = f(5, 1);
        let s = f5.gauss_sum_sign(&f5.one()).unwrap();
        assert!((s - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        let f3 = f(3, 1);
        let s = f3.gauss_sum_sign(&f3.one()).unwrap();
        assert!((s - Complex64::new(0.0, 1.0)).norm() < 1e-9);
        // Direct summation over F_9 gives g = +3.
        let f9 = f(3, 2);
        let s = f9.gauss_sum_sign(&f9.one()).unwrap();
        assert!((s - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn roots_and_multiplicities() {
        let f5 = f(5, 1);
        // (x-1)^2 (x-3) = x^3 - 5x^2 + 7x - 3
        let r = f5.roots_with_multiplicity(&[2, 2, 0, 1]);
        assert_eq!(r, vec![(1, 2), (3, 1)]);
        let f2 = f(2, 1);
        // x^3 over F_2
        assert_eq!(f2.roots_with_multiplicity(&[0, 0, 0, 1]), vec![(0, 3)]);
    }

    #[test]
    fn artin_schreier_count_is_half() {
        for n in 1..=4 {
            let k = f(2, n);
            let solvable = k.codes().filter(|&a| k.solve_artin_schreier(a).unwrap().is_some()).count();
            assert_eq!(solvable as u32, k.q() / 2);
        }
    }

    #[test]
    fn gauss_sum_norms() {
        for (p, n) in [(3, 1), (5, 1), (7, 1), (3, 2), (5, 2), (3, 3)] {
            let k = f(p, n);
            for u in 1..k.q().min(30) {
                let chi = |x: u32| Complex64::new(k.quadratic_residue(x).unwrap() as f64, 0.0);
                let g = k.gauss_sum(&chi, u);
                assert!((g.norm_sqr() - k.q() as f64).abs() < 1e-9 * k.q() as f64);
            }
        }
    }

    fn field_strategy() -> impl Strategy<Value = GFq> {
        prop_oneof![Just((2u32, 2usize)), Just((5, 1)), Just((2, 3)), Just((3, 2)), Just((5, 2))]
            .prop_map(|(p, n)| GFq::new(p, n).unwrap())
    }

    proptest! {
        #[test]
        fn frobenius_is_additive(k in field_strategy(), a in 0u32..1000, b in 0u32..1000) {
            let x = k.elem(a % k.q());
            let y = k.elem(b % k.q());
            prop_assert_eq!((&x + &y).frobenius(), x.frobenius() + y.frobenius());
            prop_assert_eq!(x.frobenius(), x.pow(k.p() as i64).unwrap());
        }

        #[test]
        fn field_axioms(k in field_strategy(), a in 0u32..1000, b in 0u32..1000, c in 0u32..1000) {
            let (x, y, z) = (k.elem(a % k.q()), k.elem(b % k.q()), k.elem(c % k.q()));
            prop_assert_eq!(&x * &(&y + &z), &x * &y + &x * &z);
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&x - &x, k.zero());
            if !x.is_zero() {
                prop_assert_eq!(&x * &x.inv().unwrap(), k.one());
            }
        }

        #[test]
        fn quadratic_residue_is_multiplicative(a in 1u32..1000, b in 1u32..1000) {
            for k in [GFq::new(5, 2).unwrap(), GFq::new(3, 2).unwrap(), GFq::new(7, 1).unwrap()] {
                let x = 1 + a % (k.q() - 1);
                let y = 1 + b % (k.q() - 1);
                let lhs = k.quadratic_residue(k.mul(x, y)).unwrap();
                prop_assert_eq!(lhs, k.quadratic_residue(x).unwrap() * k.quadratic_residue(y).unwrap());
                let s = k.sqrt(k.mul(x, x)).unwrap();
                prop_assert_eq!(k.mul(s, s), k.mul(x, x));
            }
        }
    }

    #[test]
    fn half_of_units_are_nonsquares() {
        for (p, n) in [(3, 1), (5, 1), (3, 2), (5, 2), (7, 1)] {
            let k = f(p, n);
            let neg = (1..k.q()).filter(|&a| k.quadratic_residue(a).unwrap() == -1).count();
            assert_eq!(neg as u32, (k.q() - 1) / 2);
        }
    }
}
