//! The two local fields being compared: F_q((t)) and
//! Frac(W(F_q)[T]/(T^e - p)), with valuation and absolute precision tracked
//! on every element.
//!
//! An element is stored as `pi^shift * R` where `R` is a unit known modulo
//! `m^(prec - shift)`. When `prec == shift` nothing beyond `v >= prec` is
//! known and the element is "bottom" (indistinguishable from zero).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gf::{GFq, GFqElem};

/// Hard ceiling on the number of stored digits in equal characteristic.
const MAX_EQUAL_REL: i64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    EqualChar,
    MixedChar,
}

struct Witt {
    p: u64,
    n: usize,
    e: usize,
    /// Low coefficients of the digit-lifted defining polynomial (monic, degree n).
    h: Vec<u64>,
    /// p^0 ..= p^max_m.
    pw: Vec<u64>,
    max_m: u32,
}

#[inline]
fn mulm(a: u64, b: u64, m: u64) -> u64 {
    if m <= 1 << 32 {
        a * b % m
    } else {
        ((a as u128 * b as u128) % m as u128) as u64
    }
}

impl Witt {
    fn new(residue: &GFq, e: usize) -> Witt {
        let p = residue.p() as u64;
        let mut pw = vec![1u64];
        while let Some(next) = pw.last().unwrap().checked_mul(p) {
            if next > 1 << 62 {
                break;
            }
            pw.push(next);
        }
        let max_m = (pw.len() - 1) as u32;
        let n = residue.n();
        let h = residue.defining_poly()[..n].iter().map(|&c| c as u64).collect();
        Witt { p, n, e, h, pw, max_m }
    }

    fn max_rel(&self) -> i64 {
        self.e as i64 * self.max_m as i64
    }

    fn coeff_exp(&self, rel: i64, i: usize) -> u32 {
        let r = rel - i as i64;
        if r <= 0 {
            0
        } else {
            ((r + self.e as i64 - 1) / self.e as i64) as u32
        }
    }

    fn modulus(&self, rel: i64) -> u64 {
        self.pw[self.coeff_exp(rel, 0) as usize]
    }

    fn canon(&self, a: &mut [u64], rel: i64) {
        for i in 0..self.e {
            let m = self.pw[self.coeff_exp(rel, i) as usize];
            for x in &mut a[i * self.n..(i + 1) * self.n] {
                *x %= m;
            }
        }
    }

    fn add(&self, a: &[u64], b: &[u64], rel: i64) -> Vec<u64> {
        let m = self.modulus(rel);
        let mut out: Vec<u64> = a.iter().zip(b).map(|(&x, &y)| (x % m + y % m) % m).collect();
        self.canon(&mut out, rel);
        out
    }

    fn neg(&self, a: &[u64], rel: i64) -> Vec<u64> {
        let m = self.modulus(rel);
        let mut out: Vec<u64> = a.iter().map(|&x| (m - x % m) % m).collect();
        self.canon(&mut out, rel);
        out
    }

    fn mul(&self, a: &[u64], b: &[u64], rel: i64) -> Vec<u64> {
        let (e, n) = (self.e, self.n);
        let m = self.modulus(rel);
        let wn = 2 * n - 1;
        let mut t = vec![0u64; (2 * e - 1) * wn];
        for i in 0..e {
            for j in 0..n {
                let x = a[i * n + j] % m;
                if x == 0 {
                    continue;
                }
                for k in 0..e {
                    for l in 0..n {
                        let y = b[k * n + l] % m;
                        if y == 0 {
                            continue;
                        }
                        let idx = (i + k) * wn + j + l;
                        t[idx] = (t[idx] + mulm(x, y, m)) % m;
                    }
                }
            }
        }
        // Reduce modulo h in the unramified variable.
        for k in 0..2 * e - 1 {
            for d in (n..wn).rev() {
                let c = t[k * wn + d];
                if c == 0 {
                    continue;
                }
                t[k * wn + d] = 0;
                for (jj, &hj) in self.h.iter().enumerate() {
                    let idx = k * wn + d - n + jj;
                    t[idx] = (t[idx] + m - mulm(c, hj, m)) % m;
                }
            }
        }
        // Fold T^e = p.
        let pm = self.p % m;
        for k in (e..2 * e - 1).rev() {
            for l in 0..n {
                let c = t[k * wn + l];
                if c != 0 {
                    let idx = (k - e) * wn + l;
                    t[idx] = (t[idx] + mulm(c, pm, m)) % m;
                }
            }
        }
        let mut out = vec![0u64; e * n];
        for k in 0..e {
            out[k * n..(k + 1) * n].copy_from_slice(&t[k * wn..k * wn + n]);
        }
        self.canon(&mut out, rel);
        out
    }

    /// Multiply by T^k; the result is reduced for `rel_out`.
    fn mul_pi(&self, a: &[u64], k: i64, rel_out: i64) -> Vec<u64> {
        let (e, n) = (self.e, self.n);
        let m = self.modulus(rel_out);
        let q = (k / e as i64) as usize;
        let r = (k % e as i64) as usize;
        let factor = if q as u32 > self.max_m { 0 } else { self.pw[q] % m };
        let pf = mulm(factor, self.p % m, m);
        let mut out = vec![0u64; e * n];
        for i in 0..e {
            let (dst, f) = if i + r < e { (i + r, factor) } else { (i + r - e, pf) };
            for j in 0..n {
                out[dst * n + j] = mulm(a[i * n + j] % m, f, m);
            }
        }
        self.canon(&mut out, rel_out);
        out
    }

    /// Exact division by T^k, assuming the valuation is at least k.
    fn div_pi(&self, a: &[u64], k: i64, rel_out: i64) -> Vec<u64> {
        let (e, n) = (self.e, self.n);
        let q = (k / e as i64) as usize;
        let r = (k % e as i64) as usize;
        let mut out = vec![0u64; e * n];
        for i in 0..e {
            let src = i + r;
            for j in 0..n {
                out[i * n + j] = if src < e {
                    a[src * n + j]
                } else {
                    let x = a[(src - e) * n + j];
                    debug_assert_eq!(x % self.p, 0);
                    x / self.p
                };
            }
        }
        if q > 0 {
            let d = self.pw[q.min(self.max_m as usize)];
            for x in &mut out {
                debug_assert_eq!(*x % d, 0);
                *x /= d;
            }
        }
        self.canon(&mut out, rel_out);
        out
    }

    fn val(&self, a: &[u64]) -> Option<i64> {
        let mut best: Option<i64> = None;
        for i in 0..self.e {
            for &x in &a[i * self.n..(i + 1) * self.n] {
                if x == 0 {
                    continue;
                }
                let mut v = 0i64;
                let mut y = x;
                while y % self.p == 0 {
                    y /= self.p;
                    v += 1;
                }
                let cand = self.e as i64 * v + i as i64;
                best = Some(best.map_or(cand, |b| b.min(cand)));
            }
        }
        best
    }
}

enum Kind {
    Equal,
    Mixed(Witt),
}

struct Inner {
    residue: GFq,
    kind: Kind,
}

/// A local field descriptor. Cheap to clone.
#[derive(Clone)]
pub struct LocalField(Arc<Inner>);

impl PartialEq for LocalField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.residue == other.0.residue && self.ram_index() == other.ram_index())
    }
}
impl Eq for LocalField {}

impl fmt::Debug for LocalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            Kind::Equal => write!(f, "F_{}((t))", self.0.residue.q()),
            Kind::Mixed(w) => write!(f, "Frac(W(F_{})[T]/(T^{} - {}))", self.0.residue.q(), w.e, w.p),
        }
    }
}

/// Digits of the unit part.
#[derive(Clone, PartialEq, Eq, Debug)]
enum Rep {
    Eq(Vec<u32>),
    Mx(Vec<u64>),
}

impl LocalField {
    pub fn equal_char(residue: GFq) -> LocalField {
        LocalField(Arc::new(Inner { residue, kind: Kind::Equal }))
    }

    pub fn mixed_char(residue: GFq, e: usize) -> Result<LocalField> {
        if e == 0 {
            return Err(Error::InvalidField("ramification index must be at least 1".into()));
        }
        let w = Witt::new(&residue, e);
        Ok(LocalField(Arc::new(Inner { residue, kind: Kind::Mixed(w) })))
    }

    pub fn backend(&self) -> Backend {
        match self.0.kind {
            Kind::Equal => Backend::EqualChar,
            Kind::Mixed(_) => Backend::MixedChar,
        }
    }
    pub fn residue_field(&self) -> &GFq {
        &self.0.residue
    }
    pub fn p(&self) -> u32 {
        self.0.residue.p()
    }
    /// v(p), or `None` in equal characteristic.
    pub fn ram_index(&self) -> Option<i64> {
        match &self.0.kind {
            Kind::Equal => None,
            Kind::Mixed(w) => Some(w.e as i64),
        }
    }
    pub fn uniformizer_name(&self) -> char {
        match self.0.kind {
            Kind::Equal => 't',
            Kind::Mixed(_) => 'T',
        }
    }
    /// Largest relative precision an element can carry.
    pub fn max_rel_precision(&self) -> i64 {
        match &self.0.kind {
            Kind::Equal => MAX_EQUAL_REL,
            Kind::Mixed(w) => w.max_rel(),
        }
    }

    // ----- unit-part primitives -----

    fn rep_zero(&self) -> Rep {
        match &self.0.kind {
            Kind::Equal => Rep::Eq(Vec::new()),
            Kind::Mixed(w) => Rep::Mx(vec![0; w.e * w.n]),
        }
    }

    fn rep_truncate(&self, a: &Rep, rel: i64) -> Rep {
        match (a, &self.0.kind) {
            (Rep::Eq(v), _) => Rep::Eq(v[..(rel.max(0) as usize).min(v.len())].to_vec()),
            (Rep::Mx(v), Kind::Mixed(w)) => {
                let mut out = v.clone();
                w.canon(&mut out, rel);
                Rep::Mx(out)
            }
            _ => unreachable!("representation does not match backend"),
        }
    }

    /// Reinterpret a representative at a larger relative precision.
    fn rep_pad(&self, a: &Rep, rel: i64) -> Rep {
        match a {
            Rep::Eq(v) => {
                let mut out = v.clone();
                out.resize(rel.max(0) as usize, 0);
                Rep::Eq(out)
            }
            Rep::Mx(v) => Rep::Mx(v.clone()),
        }
    }

    fn rep_add(&self, a: &Rep, b: &Rep, rel: i64) -> Rep {
        let k = &self.0.residue;
        match (a, b, &self.0.kind) {
            (Rep::Eq(x), Rep::Eq(y), _) => Rep::Eq(
                (0..rel as usize)
                    .map(|i| k.add(x.get(i).copied().unwrap_or(0), y.get(i).copied().unwrap_or(0)))
                    .collect(),
            ),
            (Rep::Mx(x), Rep::Mx(y), Kind::Mixed(w)) => Rep::Mx(w.add(x, y, rel)),
            _ => unreachable!("representation does not match backend"),
        }
    }

    fn rep_neg(&self, a: &Rep, rel: i64) -> Rep {
        let k = &self.0.residue;
        match (a, &self.0.kind) {
            (Rep::Eq(x), _) => Rep::Eq(x.iter().map(|&c| k.neg(c)).collect()),
            (Rep::Mx(x), Kind::Mixed(w)) => Rep::Mx(w.neg(x, rel)),
            _ => unreachable!("representation does not match backend"),
        }
    }

    fn rep_mul(&self, a: &Rep, b: &Rep, rel: i64) -> Rep {
        let k = &self.0.residue;
        match (a, b, &self.0.kind) {
            (Rep::Eq(x), Rep::Eq(y), _) => {
                let r = rel as usize;
                let mut out = vec![0u32; r];
                for (i, &xi) in x.iter().enumerate().take(r) {
                    if xi == 0 {
                        continue;
                    }
                    for (j, &yj) in y.iter().enumerate().take(r - i) {
                        if yj != 0 {
                            out[i + j] = k.add(out[i + j], k.mul(xi, yj));
                        }
                    }
                }
                Rep::Eq(out)
            }
            (Rep::Mx(x), Rep::Mx(y), Kind::Mixed(w)) => Rep::Mx(w.mul(x, y, rel)),
            _ => unreachable!("representation does not match backend"),
        }
    }

    fn rep_mul_pi(&self, a: &Rep, k: i64, rel_out: i64) -> Rep {
        match (a, &self.0.kind) {
            (Rep::Eq(x), _) => {
                let mut out = vec![0u32; k as usize];
                out.extend_from_slice(x);
                out.truncate(rel_out.max(0) as usize);
                Rep::Eq(out)
            }
            (Rep::Mx(x), Kind::Mixed(w)) => Rep::Mx(w.mul_pi(x, k, rel_out)),
            _ => unreachable!("representation does not match backend"),
        }
    }

    fn rep_div_pi(&self, a: &Rep, k: i64, rel_out: i64) -> Rep {
        match (a, &self.0.kind) {
            (Rep::Eq(x), _) => {
                let mut v: Vec<u32> = x.iter().skip(k as usize).copied().collect();
                v.truncate(rel_out.max(0) as usize);
                Rep::Eq(v)
            }
            (Rep::Mx(x), Kind::Mixed(w)) => Rep::Mx(w.div_pi(x, k, rel_out)),
            _ => unreachable!("representation does not match backend"),
        }
    }

    fn rep_val(&self, a: &Rep) -> Option<i64> {
        match (a, &self.0.kind) {
            (Rep::Eq(x), _) => x.iter().position(|&c| c != 0).map(|i| i as i64),
            (Rep::Mx(x), Kind::Mixed(w)) => w.val(x),
            _ => unreachable!("representation does not match backend"),
        }
    }

    /// Residue class of an integral representative.
    fn rep_residue(&self, a: &Rep) -> u32 {
        match (a, &self.0.kind) {
            (Rep::Eq(x), _) => x.first().copied().unwrap_or(0),
            (Rep::Mx(x), Kind::Mixed(w)) => {
                let coords: Vec<u32> = x[..w.n].iter().map(|&c| (c % w.p) as u32).collect();
                self.0.residue.code_of(&coords)
            }
            _ => unreachable!("representation does not match backend"),
        }
    }

    /// Representative of sum d_k pi^k for k < rel, using digit lifts.
    fn rep_from_digits(&self, digits: &[u32], rel: i64) -> Rep {
        let rel = rel.max(0);
        match &self.0.kind {
            Kind::Equal => {
                let mut v: Vec<u32> = digits.iter().take(rel as usize).copied().collect();
                v.resize(rel as usize, 0);
                Rep::Eq(v)
            }
            Kind::Mixed(w) => {
                let m = w.modulus(rel);
                let mut out = vec![0u64; w.e * w.n];
                for (k, &d) in digits.iter().enumerate().take(rel as usize) {
                    if d == 0 {
                        continue;
                    }
                    let (q, i) = (k / w.e, k % w.e);
                    if q as u32 >= w.max_m {
                        continue;
                    }
                    let f = w.pw[q];
                    for (j, c) in self.0.residue.coords(d).into_iter().enumerate() {
                        let idx = i * w.n + j;
                        out[idx] = (out[idx] + mulm(c as u64, f, m)) % m;
                    }
                }
                w.canon(&mut out, rel);
                Rep::Mx(out)
            }
        }
    }

    /// pi-adic digit expansion of a representative, `rel` digits.
    fn rep_to_digits(&self, a: &Rep, rel: i64) -> Vec<u32> {
        match a {
            Rep::Eq(x) => {
                let mut v: Vec<u32> = x.iter().take(rel as usize).copied().collect();
                v.resize(rel.max(0) as usize, 0);
                v
            }
            Rep::Mx(_) => {
                let mut out = Vec::with_capacity(rel.max(0) as usize);
                let mut cur = a.clone();
                let mut r = rel;
                while r > 0 {
                    let d = self.rep_residue(&cur);
                    out.push(d);
                    let lifted = self.rep_from_digits(&[d], r);
                    let diff = self.rep_add(&cur, &self.rep_neg(&lifted, r), r);
                    cur = self.rep_div_pi(&diff, 1, r - 1);
                    r -= 1;
                }
                out
            }
        }
    }

    fn rep_unit_inverse(&self, u: &Rep, rel: i64) -> Rep {
        let k = &self.0.residue;
        let r0 = k.inv(self.rep_residue(u)).expect("unit has nonzero residue");
        let mut x = self.rep_from_digits(&[r0], 1);
        let mut cur = 1;
        let two = self.rep_from_int(2, rel);
        while cur < rel {
            let nxt = (2 * cur).min(rel);
            let ut = self.rep_truncate(u, nxt);
            let xt = self.rep_pad(&x, nxt);
            let ux = self.rep_mul(&ut, &xt, nxt);
            let two_t = self.rep_truncate(&two, nxt);
            let corr = self.rep_add(&two_t, &self.rep_neg(&ux, nxt), nxt);
            x = self.rep_mul(&xt, &corr, nxt);
            cur = nxt;
        }
        x
    }

    fn rep_from_int(&self, k: i64, rel: i64) -> Rep {
        match &self.0.kind {
            Kind::Equal => {
                let mut v = vec![0u32; rel.max(0) as usize];
                if let Some(c) = v.first_mut() {
                    *c = self.0.residue.from_int(k).code();
                }
                Rep::Eq(v)
            }
            Kind::Mixed(w) => {
                let m = w.modulus(rel) as i128;
                let mut out = vec![0u64; w.e * w.n];
                out[0] = (k as i128).rem_euclid(m) as u64;
                w.canon(&mut out, rel);
                Rep::Mx(out)
            }
        }
    }

    fn normalize(&self, shift: i64, rel: i64, rep: Rep) -> LFElement {
        if rel <= 0 {
            return self.zero(shift + rel.max(0));
        }
        match self.rep_val(&rep) {
            None => self.zero(shift + rel),
            Some(0) => LFElement { field: self.clone(), shift, prec: shift + rel, unit: rep },
            Some(v) => {
                let unit = self.rep_div_pi(&rep, v, rel - v);
                LFElement { field: self.clone(), shift: shift + v, prec: shift + rel, unit }
            }
        }
    }

    fn clamp_rel(&self, shift: i64, prec: i64) -> i64 {
        (prec - shift).min(self.max_rel_precision())
    }

    // ----- constructors -----

    /// Zero known modulo m^prec.
    pub fn zero(&self, prec: i64) -> LFElement {
        LFElement { field: self.clone(), shift: prec, prec, unit: self.rep_zero() }
    }
    pub fn one(&self, prec: i64) -> LFElement {
        self.from_int(1, prec)
    }
    pub fn from_int(&self, k: i64, prec: i64) -> LFElement {
        if prec <= 0 {
            return self.zero(prec);
        }
        let rel = self.clamp_rel(0, prec);
        self.normalize(0, rel, self.rep_from_int(k, rel))
    }
    /// pi^k known to the given absolute precision.
    pub fn uniformizer_pow(&self, k: i64, prec: i64) -> LFElement {
        self.one(prec - k).mul_pi_pow(k)
    }
    /// sum_i digits[i] pi^(low + i), known modulo m^prec; digits beyond prec are ignored.
    pub fn from_digits(&self, digits: &[u32], low: i64, prec: i64) -> LFElement {
        if prec <= low {
            return self.zero(prec);
        }
        let rel = self.clamp_rel(low, prec);
        self.normalize(low, rel, self.rep_from_digits(digits, rel))
    }
    /// The digit lift of a residue-field element.
    pub fn lift_residue(&self, r: &GFqElem, prec: i64) -> LFElement {
        self.from_digits(&[r.code()], 0, prec)
    }
}

/// An element of a local field with tracked precision.
#[derive(Clone)]
pub struct LFElement {
    field: LocalField,
    shift: i64,
    prec: i64,
    unit: Rep,
}

impl PartialEq for LFElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.shift == other.shift
            && self.prec == other.prec
            && self.unit == other.unit
    }
}
impl Eq for LFElement {}

impl LFElement {
    pub fn field(&self) -> &LocalField {
        &self.field
    }
    pub fn valuation(&self) -> Option<i64> {
        (self.prec > self.shift).then_some(self.shift)
    }
    /// Absolute precision: the element is known modulo m^precision.
    pub fn precision(&self) -> i64 {
        self.prec
    }
    pub fn rel_precision(&self) -> i64 {
        self.prec - self.shift
    }
    /// True when only `v >= precision` is known.
    pub fn is_bottom(&self) -> bool {
        self.prec <= self.shift
    }
    /// Lower bound on the valuation: exact value or the precision.
    pub fn val_or_prec(&self) -> i64 {
        self.shift
    }

    fn check(&self, other: &LFElement) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::ParentMismatch)
        }
    }

    pub fn try_add(&self, other: &LFElement) -> Result<LFElement> {
        self.check(other)?;
        let prec = self.prec.min(other.prec);
        let lo = self.shift.min(other.shift);
        if lo >= prec {
            return Ok(self.field.zero(prec));
        }
        let rel = prec - lo;
        let f = &self.field;
        let part = |x: &LFElement| -> Option<Rep> {
            if x.is_bottom() || x.shift >= prec {
                return None;
            }
            let r = f.rep_truncate(&x.unit, prec - x.shift);
            Some(f.rep_mul_pi(&r, x.shift - lo, rel))
        };
        let sum = match (part(self), part(other)) {
            (Some(a), Some(b)) => f.rep_add(&a, &b, rel),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => return Ok(f.zero(prec)),
        };
        Ok(f.normalize(lo, rel, sum))
    }

    pub fn try_mul(&self, other: &LFElement) -> Result<LFElement> {
        self.check(other)?;
        if self.is_bottom() || other.is_bottom() {
            let prec = (self.shift + other.prec).min(other.shift + self.prec);
            return Ok(self.field.zero(prec));
        }
        let rel = self.rel_precision().min(other.rel_precision());
        let f = &self.field;
        let a = f.rep_truncate(&self.unit, rel);
        let b = f.rep_truncate(&other.unit, rel);
        let shift = self.shift + other.shift;
        Ok(LFElement { field: f.clone(), shift, prec: shift + rel, unit: f.rep_mul(&a, &b, rel) })
    }

    pub fn neg(&self) -> LFElement {
        if self.is_bottom() {
            return self.clone();
        }
        let rel = self.rel_precision();
        LFElement { unit: self.field.rep_neg(&self.unit, rel), ..self.clone() }
    }

    pub fn try_sub(&self, other: &LFElement) -> Result<LFElement> {
        self.try_add(&other.neg())
    }

    pub fn inv(&self) -> Result<LFElement> {
        if self.is_bottom() {
            return Err(Error::PrecisionLoss);
        }
        let rel = self.rel_precision();
        let unit = self.field.rep_unit_inverse(&self.unit, rel);
        Ok(LFElement { field: self.field.clone(), shift: -self.shift, prec: rel - self.shift, unit })
    }

    pub fn try_div(&self, other: &LFElement) -> Result<LFElement> {
        self.try_mul(&other.inv()?)
    }

    /// Exact multiplication by pi^k (k may be negative).
    pub fn mul_pi_pow(&self, k: i64) -> LFElement {
        LFElement { field: self.field.clone(), shift: self.shift + k, prec: self.prec + k, unit: self.unit.clone() }
    }

    pub fn pow(&self, mut k: u32) -> LFElement {
        if k == 0 {
            return self.field.one(self.rel_precision().max(1));
        }
        let mut acc: Option<LFElement> = None;
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => &a * &base,
                });
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc.expect("k > 0")
    }

    /// Reduce precision to `prec` (never increases it).
    pub fn truncate(&self, prec: i64) -> LFElement {
        if prec >= self.prec {
            return self.clone();
        }
        if self.shift >= prec {
            return self.field.zero(prec);
        }
        LFElement { unit: self.field.rep_truncate(&self.unit, prec - self.shift), prec, ..self.clone() }
    }

    /// Image in the residue field; requires integrality.
    pub fn residue(&self) -> Result<GFqElem> {
        let k = self.field.residue_field();
        if self.is_bottom() {
            return if self.prec >= 1 { Ok(k.zero()) } else { Err(Error::insufficient("residue of an undetermined element")) };
        }
        match self.shift.cmp(&0) {
            std::cmp::Ordering::Greater => Ok(k.zero()),
            std::cmp::Ordering::Equal => Ok(k.elem(self.field.rep_residue(&self.unit))),
            std::cmp::Ordering::Less => Err(Error::NonIntegral),
        }
    }

    /// Whether pi^k divides the element; errors when precision cannot decide.
    pub fn divisible_by_pi(&self, k: i64) -> Result<bool> {
        if !self.is_bottom() {
            Ok(self.shift >= k)
        } else if self.prec >= k {
            Ok(true)
        } else {
            Err(Error::insufficient(format!("cannot decide divisibility by pi^{k} at precision {}", self.prec)))
        }
    }

    /// Valuation, or an error if the element is indistinguishable from zero.
    pub fn exact_valuation(&self) -> Result<i64> {
        self.valuation()
            .ok_or_else(|| Error::insufficient(format!("valuation exceeds precision {}", self.prec)))
    }

    /// Leading-term unit: self / pi^v.
    pub fn unit_part(&self) -> Result<LFElement> {
        let v = self.exact_valuation()?;
        Ok(self.mul_pi_pow(-v))
    }

    /// Digits d_k of sum d_k pi^k for shift <= k < precision.
    pub fn digits(&self) -> (i64, Vec<u32>) {
        if self.is_bottom() {
            return (self.prec, Vec::new());
        }
        (self.shift, self.field.rep_to_digits(&self.unit, self.rel_precision()))
    }

    /// Class modulo m^j (requires an integral element known to that precision).
    pub fn reduce_mod(&self, j: i64) -> Result<TruncClass> {
        if !self.is_bottom() && self.shift < 0 {
            return Err(Error::NonIntegral);
        }
        if self.prec < j {
            return Err(Error::insufficient(format!("reduce_mod {j} needs precision {j}, have {}", self.prec)));
        }
        let mut digits = vec![0u32; j.max(0) as usize];
        if !self.is_bottom() {
            let (low, d) = self.truncate(j).digits();
            for (i, c) in d.into_iter().enumerate() {
                let idx = low as usize + i;
                if idx < digits.len() {
                    digits[idx] = c;
                }
            }
        }
        Ok(TruncClass { field: self.field.clone(), j, digits })
    }

    /// (v(x), unit mod U^j) for a nonzero element known well enough.
    pub fn mult_class(&self, j: i64) -> Result<MultClass> {
        let u = self.unit_part()?;
        Ok(MultClass { m: self.shift, unit: u.reduce_mod(j.max(1))? })
    }

    /// Canonical text form, ascending powers; precision is not shown.
    pub fn to_literal(&self) -> String {
        let (low, d) = self.digits();
        format_digits(self.field.residue_field(), self.field.uniformizer_name(), low, &d)
    }
}

pub(crate) fn format_digits(k: &GFq, var: char, low: i64, digits: &[u32]) -> String {
    let mut terms = Vec::new();
    for (i, &c) in digits.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let ex = low + i as i64;
        let coeff = k.format_code(c);
        let coeff = if coeff.contains('+') { format!("({coeff})") } else { coeff };
        let mono = match ex {
            1 => var.to_string(),
            _ => format!("{var}^{ex}"),
        };
        terms.push(match ex.cmp(&0) {
            std::cmp::Ordering::Equal => coeff,
            std::cmp::Ordering::Less => {
                let den = if ex == -1 { var.to_string() } else { format!("{var}^{}", -ex) };
                format!("{coeff}/{den}")
            }
            std::cmp::Ordering::Greater if c == 1 => mono,
            std::cmp::Ordering::Greater => format!("{coeff}*{mono}"),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

impl fmt::Debug for LFElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({}^{})", self.to_literal(), self.field.uniformizer_name(), self.prec)
    }
}
impl fmt::Display for LFElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

macro_rules! lf_op {
    ($tr:ident, $m:ident, $inner:ident) => {
        impl std::ops::$tr<&LFElement> for &LFElement {
            type Output = LFElement;
            fn $m(self, rhs: &LFElement) -> LFElement {
                self.$inner(rhs).expect("local field parent mismatch")
            }
        }
        impl std::ops::$tr<LFElement> for LFElement {
            type Output = LFElement;
            fn $m(self, rhs: LFElement) -> LFElement {
                (&self).$m(&rhs)
            }
        }
    };
}
lf_op!(Add, add, try_add);
lf_op!(Sub, sub, try_sub);
lf_op!(Mul, mul, try_mul);

/// A class in O/m^j, stored as its pi-adic digits d_0..d_{j-1}.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncClass {
    field: LocalField,
    j: i64,
    digits: Vec<u32>,
}

impl TruncClass {
    pub fn new(field: &LocalField, j: i64, digits: &[u32]) -> TruncClass {
        let mut d: Vec<u32> = digits.iter().take(j as usize).copied().collect();
        d.resize(j.max(0) as usize, 0);
        TruncClass { field: field.clone(), j, digits: d }
    }
    pub fn field(&self) -> &LocalField {
        &self.field
    }
    pub fn level(&self) -> i64 {
        self.j
    }
    pub fn digits(&self) -> &[u32] {
        &self.digits
    }
    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }
    /// Canonical lift: the digit polynomial padded with zeros, known to `target_prec`.
    pub fn lift_to_integer(&self, target_prec: i64) -> Result<LFElement> {
        if target_prec < self.j {
            return Err(Error::InvalidInput(format!(
                "lift precision {target_prec} below class level {}",
                self.j
            )));
        }
        Ok(self.field.from_digits(&self.digits, 0, target_prec))
    }
    fn binop(&self, other: &TruncClass, f: impl Fn(&LFElement, &LFElement) -> LFElement) -> Result<TruncClass> {
        if self.field != other.field || self.j != other.j {
            return Err(Error::ParentMismatch);
        }
        let a = self.lift_to_integer(self.j)?;
        let b = other.lift_to_integer(self.j)?;
        f(&a, &b).reduce_mod(self.j)
    }
    pub fn add(&self, other: &TruncClass) -> Result<TruncClass> {
        self.binop(other, |a, b| a + b)
    }
    pub fn mul(&self, other: &TruncClass) -> Result<TruncClass> {
        self.binop(other, |a, b| a * b)
    }
}

impl fmt::Display for TruncClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format_digits(self.field.residue_field(), self.field.uniformizer_name(), 0, &self.digits);
        write!(f, "{s} mod {}^{}", self.field.uniformizer_name(), self.j)
    }
}

/// A class in K^x / U^j: valuation plus unit class modulo m^j.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultClass {
    pub m: i64,
    pub unit: TruncClass,
}

impl MultClass {
    pub fn mul(&self, other: &MultClass) -> Result<MultClass> {
        Ok(MultClass { m: self.m + other.m, unit: self.unit.mul(&other.unit)? })
    }
    /// A representative pi^m * lift(u).
    pub fn representative(&self, prec_rel: i64) -> Result<LFElement> {
        Ok(self.unit.lift_to_integer(prec_rel.max(self.unit.j))?.mul_pi_pow(self.m))
    }
}

/// The truncated-ring isomorphism between F_q[[t]]/(t^e) and
/// W(F_q)[T]/(T^e - p) modulo T^e, determined by t -> T and the identity on
/// the residue field.
#[derive(Clone, Debug)]
pub struct TripleIso {
    e: i64,
    source: LocalField,
    target: LocalField,
}

impl TripleIso {
    pub fn new(residue: &GFq, e: i64) -> Result<TripleIso> {
        if e < 1 {
            return Err(Error::InvalidInput("deformation level must be positive".into()));
        }
        Ok(TripleIso {
            e,
            source: LocalField::equal_char(residue.clone()),
            target: LocalField::mixed_char(residue.clone(), e as usize)?,
        })
    }
    pub fn from_fields(source: &LocalField, target: &LocalField) -> Result<TripleIso> {
        let e = target
            .ram_index()
            .ok_or_else(|| Error::InvalidInput("target must be mixed characteristic".into()))?;
        if source.backend() != Backend::EqualChar || source.residue_field() != target.residue_field() {
            return Err(Error::InvalidInput("source must be F_q((t)) with the same residue field".into()));
        }
        Ok(TripleIso { e, source: source.clone(), target: target.clone() })
    }
    pub fn level(&self) -> i64 {
        self.e
    }
    pub fn source(&self) -> &LocalField {
        &self.source
    }
    pub fn target(&self) -> &LocalField {
        &self.target
    }

    fn transport(&self, c: &TruncClass, from: &LocalField, to: &LocalField, max_j: i64) -> Result<TruncClass> {
        if c.field != *from {
            return Err(Error::ParentMismatch);
        }
        if c.j > max_j {
            return Err(Error::PrecisionExceedsIso { j: c.j, e: self.e });
        }
        Ok(TruncClass { field: to.clone(), j: c.j, digits: c.digits.clone() })
    }

    /// phi: O_K/m^j -> O_K'/m^j for j <= e.
    pub fn phi_apply(&self, c: &TruncClass) -> Result<TruncClass> {
        self.transport(c, &self.source, &self.target, self.e)
    }
    pub fn phi_inverse(&self, c: &TruncClass) -> Result<TruncClass> {
        self.transport(c, &self.target, &self.source, self.e)
    }
    /// eta: m_K/m_K^(e+1) -> m_K'/m_K'^(e+1), given as a class at level e+1
    /// with vanishing constant digit.
    pub fn eta_apply(&self, c: &TruncClass) -> Result<TruncClass> {
        if c.digits.first().copied().unwrap_or(0) != 0 {
            return Err(Error::InvalidInput("eta is defined on the maximal ideal only".into()));
        }
        self.transport(c, &self.source, &self.target, self.e + 1)
    }
    pub fn eta_inverse(&self, c: &TruncClass) -> Result<TruncClass> {
        if c.digits.first().copied().unwrap_or(0) != 0 {
            return Err(Error::InvalidInput("eta is defined on the maximal ideal only".into()));
        }
        self.transport(c, &self.target, &self.source, self.e + 1)
    }
    /// xi: K^x/U^j -> K'^x/U'^j, (m, u) -> (m, phi(u)).
    pub fn xi_apply(&self, x: &MultClass) -> Result<MultClass> {
        Ok(MultClass { m: x.m, unit: self.phi_apply(&x.unit)? })
    }
    pub fn xi_inverse(&self, y: &MultClass) -> Result<MultClass> {
        Ok(MultClass { m: y.m, unit: self.phi_inverse(&y.unit)? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eq_field(p: u32, n: usize) -> LocalField {
        LocalField::equal_char(GFq::new(p, n).unwrap())
    }
    fn mx_field(p: u32, n: usize, e: usize) -> LocalField {
        LocalField::mixed_char(GFq::new(p, n).unwrap(), e).unwrap()
    }

    #[test]
    fn cancellation_keeps_precision() {
        let k = eq_field(5, 1);
        let a = k.from_digits(&[0, 1, 1], 0, 5);
        let b = k.from_digits(&[0, 4], 0, 5);
        let s = &a + &b;
        assert_eq!(s.valuation(), Some(2));
        assert_eq!(s.precision(), 5);
        assert_eq!(s, k.from_digits(&[0, 0, 1], 0, 5));
    }

    #[test]
    fn t_to_the_e_is_p() {
        let k = mx_field(2, 1, 4);
        let t = k.uniformizer_pow(1, 40);
        let t4 = &(&t * &t) * &(&t * &t);
        assert_eq!(t4.truncate(40), k.from_int(2, 40));
        assert_eq!(k.from_int(2, 40).valuation(), Some(4));
    }

    #[test]
    fn geometric_series_inverse() {
        let k = eq_field(5, 1);
        let one_minus_t = k.from_digits(&[1, 4], 0, 10);
        let inv = k.one(10).try_div(&one_minus_t).unwrap();
        assert_eq!(inv.digits().1, vec![1; 10]);
        assert_eq!(&inv * &one_minus_t, k.one(10));
    }

    #[test]
    fn valuations() {
        let k = eq_field(2, 1);
        let x = k.from_digits(&[0, 0, 0, 1, 1], 0, 10);
        assert_eq!(x.valuation(), Some(3));
        let te = k.uniformizer_pow(4, 4);
        assert_eq!(te.valuation(), None);
        assert!(te.is_bottom());
    }

    #[test]
    fn reduce_mod_examples() {
        let k = eq_field(2, 1);
        let x = k.from_digits(&[1, 1, 0, 0, 0, 1], 0, 10);
        assert_eq!(x.reduce_mod(3).unwrap().digits(), &[1, 1, 0]);
        let m = mx_field(3, 1, 2);
        let y = &m.from_int(3, 10) + &m.uniformizer_pow(1, 10);
        assert_eq!(y.reduce_mod(2).unwrap().digits(), &[0, 1]);
        assert!(k.zero(8).reduce_mod(5).unwrap().is_zero());
        assert!(matches!(k.zero(3).reduce_mod(5), Err(Error::InsufficientPrecision(_))));
    }

    #[test]
    fn phi_key_homomorphism_example() {
        let k = GFq::new(2, 1).unwrap();
        let iso = TripleIso::new(&k, 4).unwrap();
        let a = TruncClass::new(iso.source(), 4, &[1, 1]);
        let lhs = iso.phi_apply(&a.mul(&a).unwrap()).unwrap();
        let pa = iso.phi_apply(&a).unwrap();
        let rhs = pa.mul(&pa).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.digits(), &[1, 0, 1, 0]);
        let big = TruncClass::new(iso.source(), 5, &[1]);
        assert_eq!(iso.phi_apply(&big), Err(Error::PrecisionExceedsIso { j: 5, e: 4 }));
    }

    #[test]
    fn literal_format() {
        let k = eq_field(2, 2);
        let x = k.from_digits(&[1, 0, 3], 0, 10);
        assert_eq!(x.to_literal(), "1 + (g+1)*t^2");
        let y = k.from_digits(&[1, 0, 1], -3, 10);
        assert_eq!(y.to_literal(), "1/t^3 + 1/t");
    }

    #[test]
    fn mixed_negative_one_digits() {
        // -1 = 1 + T + T^2 + ... in Z_2[2^(1/1)] with T = 2.
        let k = mx_field(2, 1, 1);
        let m1 = k.from_int(-1, 8);
        assert_eq!(m1.digits().1, vec![1; 8]);
    }

    fn arb_digits(q: u32, len: usize) -> impl Strategy<Value = Vec<u32>> {
        proptest::collection::vec(0..q, len)
    }

    proptest! {
        #[test]
        fn precision_soundness(p in prop_oneof![Just(2u32), Just(3), Just(5)], e in 1usize..6,
                               da in arb_digits(25, 12), db in arb_digits(25, 12), dc in arb_digits(25, 12)) {
            for field in [eq_field(p, 1), mx_field(p, 1, e)] {
                let q = field.residue_field().q();
                let mk = |d: &[u32], prec| {
                    let d: Vec<u32> = d.iter().map(|x| x % q).collect();
                    field.from_digits(&d, 0, prec)
                };
                let expr = |prec: i64| {
                    let a = mk(&da, prec);
                    let b = mk(&db, prec);
                    let c = mk(&dc, prec);
                    let s = &(&a * &b) - &c;
                    let t = &(&s * &s) + &(&a * &c);
                    let q = t.inv().ok().map(|inv| &inv * &b);
                    (t, q)
                };
                let (t_lo, q_lo) = expr(10);
                let (t_hi, q_hi) = expr(20);
                prop_assert_eq!(t_lo.clone(), t_hi.truncate(t_lo.precision()));
                if let Some(q_lo) = q_lo {
                    let q_hi = q_hi.expect("invertible at low precision stays invertible");
                    prop_assert_eq!(q_lo.clone(), q_hi.truncate(q_lo.precision()));
                }
            }
        }

        #[test]
        fn valuation_is_additive(p in prop_oneof![Just(2u32), Just(3), Just(5)], e in 1usize..6,
                                 sa in 0i64..5, sb in 0i64..5, da in arb_digits(5, 8), db in arb_digits(5, 8)) {
            for field in [eq_field(p, 1), mx_field(p, 1, e)] {
                let q = field.residue_field().q();
                let mut da = da.iter().map(|x| x % q).collect::<Vec<_>>();
                let mut db = db.iter().map(|x| x % q).collect::<Vec<_>>();
                da[0] = 1.max(da[0]);
                db[0] = 1.max(db[0]);
                let a = field.from_digits(&da, sa, 30);
                let b = field.from_digits(&db, sb, 30);
                prop_assert_eq!((&a * &b).valuation(), Some(sa + sb));
            }
        }

        #[test]
        fn reduce_lift_round_trip(p in prop_oneof![Just(2u32), Just(3), Just(5)], n in 1usize..3, e in 1usize..9,
                                  d in arb_digits(1000, 8), j in 1i64..9) {
            let field = mx_field(p, n, e);
            let q = field.residue_field().q();
            let d: Vec<u32> = d.iter().map(|x| x % q).collect();
            let c = TruncClass::new(&field, j, &d);
            let x = c.lift_to_integer(j + 5).unwrap();
            prop_assert_eq!(x.reduce_mod(j).unwrap(), c);
        }
    }

    #[test]
    fn v_of_p_is_e() {
        for e in 1..6 {
            let k = mx_field(3, 2, e);
            assert_eq!(k.from_int(3, 50).valuation(), Some(e as i64));
            assert_eq!(k.uniformizer_pow(1, 50).valuation(), Some(1));
        }
        assert_eq!(eq_field(3, 1).from_int(3, 50).valuation(), None);
    }
}
