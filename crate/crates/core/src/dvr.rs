//! Discrete valuation rings that Tate's algorithm can run over: a local field
//! at a fixed working precision, and a quadratic extension of one presented
//! as a rank-2 module over the base.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::gf::{solve_fp_linear, GFq, GFqElem};
use crate::localfield::{LFElement, LocalField};

/// The operations Tate's algorithm needs from a DVR with a fixed uniformizer.
pub trait Dvr: Send + Sync {
    type Elem: Clone + fmt::Debug + Send + Sync;

    fn residue_field(&self) -> &GFq;
    fn residue_char(&self) -> u32 {
        self.residue_field().p()
    }
    fn int(&self, n: i64) -> Self::Elem;
    /// A fixed lift of a residue-field element.
    fn lift(&self, r: &GFqElem) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul_pi(&self, a: &Self::Elem, k: u32) -> Self::Elem;
    /// Exact division by pi^k; fails if the quotient would not be integral-compatible.
    fn div_pi(&self, a: &Self::Elem, k: u32) -> Result<Self::Elem>;
    fn valuation(&self, a: &Self::Elem) -> Option<i64>;
    fn precision(&self, a: &Self::Elem) -> i64;
    fn residue(&self, a: &Self::Elem) -> Result<GFqElem>;
    fn literal(&self, a: &Self::Elem) -> String;

    fn divisible(&self, a: &Self::Elem, k: i64) -> Result<bool> {
        match self.valuation(a) {
            Some(v) => Ok(v >= k),
            None if self.precision(a) >= k => Ok(true),
            None => Err(Error::insufficient(format!(
                "membership in m^{k} undecidable at precision {}",
                self.precision(a)
            ))),
        }
    }
    fn exact_val(&self, a: &Self::Elem) -> Result<i64> {
        self.valuation(a)
            .ok_or_else(|| Error::insufficient(format!("valuation exceeds precision {}", self.precision(a))))
    }
    fn pow(&self, a: &Self::Elem, k: u32) -> Self::Elem {
        let mut acc = self.int(1);
        for _ in 0..k {
            acc = self.mul(&acc, a);
        }
        acc
    }
    fn lift_code(&self, code: u32) -> Self::Elem {
        self.lift(&self.residue_field().elem(code))
    }
}

/// A local field viewed as its valuation ring at working precision `prec`.
#[derive(Clone, Debug)]
pub struct LocalRing {
    pub field: LocalField,
    pub prec: i64,
}

impl LocalRing {
    pub fn new(field: &LocalField, prec: i64) -> LocalRing {
        LocalRing { field: field.clone(), prec }
    }
}

impl Dvr for LocalRing {
    type Elem = LFElement;

    fn residue_field(&self) -> &GFq {
        self.field.residue_field()
    }
    fn int(&self, n: i64) -> LFElement {
        self.field.from_int(n, self.prec)
    }
    fn lift(&self, r: &GFqElem) -> LFElement {
        self.field.lift_residue(r, self.prec)
    }
    fn add(&self, a: &LFElement, b: &LFElement) -> LFElement {
        a + b
    }
    fn sub(&self, a: &LFElement, b: &LFElement) -> LFElement {
        a - b
    }
    fn mul(&self, a: &LFElement, b: &LFElement) -> LFElement {
        a * b
    }
    fn neg(&self, a: &LFElement) -> LFElement {
        a.neg()
    }
    fn mul_pi(&self, a: &LFElement, k: u32) -> LFElement {
        a.mul_pi_pow(k as i64)
    }
    fn div_pi(&self, a: &LFElement, k: u32) -> Result<LFElement> {
        if !a.divisible_by_pi(k as i64)? {
            return Err(Error::Internal(format!("{a:?} is not divisible by pi^{k}")));
        }
        Ok(a.mul_pi_pow(-(k as i64)))
    }
    fn valuation(&self, a: &LFElement) -> Option<i64> {
        a.valuation()
    }
    fn precision(&self, a: &LFElement) -> i64 {
        a.precision()
    }
    fn residue(&self, a: &LFElement) -> Result<GFqElem> {
        a.residue()
    }
    fn literal(&self, a: &LFElement) -> String {
        a.to_literal()
    }
    fn pow(&self, a: &LFElement, k: u32) -> LFElement {
        a.pow(k)
    }
}

/// Element x + y*theta of a quadratic extension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QElem {
    pub x: LFElement,
    pub y: LFElement,
}

/// Residue-field data for an unramified quadratic extension: an embedding
/// F_q -> F_{q^2} and the decomposition z = iota(a) + iota(b) * theta_bar.
struct UnramData {
    big: GFq,
    iota: Vec<u32>,
    theta_bar: u32,
    split: HashMap<u32, (u32, u32)>,
}

/// O_K[theta] with theta^2 = s*theta - n, either Eisenstein (ramified, theta
/// is a uniformizer) or with irreducible residue polynomial (unramified).
pub struct QuadExtRing {
    base: LocalRing,
    s: LFElement,
    n: LFElement,
    s_over_n: Option<LFElement>,
    inv_n: Option<LFElement>,
    ramified: bool,
    unram: Option<UnramData>,
}

impl QuadExtRing {
    /// Build from the defining polynomial X^2 - s X + n over the base.
    pub fn new(base: LocalRing, s: LFElement, n: LFElement) -> Result<QuadExtRing> {
        let vs = s.valuation();
        let vn = n.valuation();
        let eisenstein = vn == Some(1) && (s.is_bottom() && s.precision() >= 1 || vs.is_some_and(|v| v >= 1));
        if eisenstein {
            let inv_n = n.inv()?;
            let s_over_n = &s * &inv_n;
            return Ok(QuadExtRing { base, s, n, s_over_n: Some(s_over_n), inv_n: Some(inv_n), ramified: true, unram: None });
        }
        let sbar = s.residue().map_err(|_| Error::InvalidInput("defining polynomial is not integral".into()))?;
        let nbar = n.residue().map_err(|_| Error::InvalidInput("defining polynomial is not integral".into()))?;
        let k = base.field.residue_field().clone();
        let has_root = k.codes().any(|x| {
            let v = k.add(k.sub(k.mul(x, x), k.mul(sbar.code(), x)), nbar.code());
            v == 0
        });
        if has_root {
            return Err(Error::InvalidInput("defining polynomial is neither Eisenstein nor residually irreducible".into()));
        }
        let unram = Some(Self::unram_data(&k, sbar.code(), nbar.code())?);
        Ok(QuadExtRing { base, s, n, s_over_n: None, inv_n: None, ramified: false, unram })
    }

    fn unram_data(k: &GFq, sbar: u32, nbar: u32) -> Result<UnramData> {
        let big = GFq::new(k.p(), 2 * k.n())?;
        let h = k.defining_poly();
        // A root of h in the big field gives the embedding.
        let rho = if k.n() == 1 {
            0
        } else {
            big.codes()
                .find(|&x| h.iter().rev().fold(0, |acc, &c| big.add(big.mul(acc, x), big.from_int(c as i64).code())) == 0)
                .ok_or_else(|| Error::Internal("no embedding of the residue field".into()))?
        };
        let iota: Vec<u32> = k
            .codes()
            .map(|c| {
                k.coords(c).iter().enumerate().fold(0, |acc, (i, &ci)| {
                    let term = big.mul(big.from_int(ci as i64).code(), big.pow(rho, i as i64).unwrap_or(1));
                    big.add(acc, term)
                })
            })
            .collect();
        let (s_big, n_big) = (iota[sbar as usize], iota[nbar as usize]);
        let theta_bar = big
            .codes()
            .find(|&x| big.add(big.sub(big.mul(x, x), big.mul(s_big, x)), n_big) == 0)
            .ok_or_else(|| Error::Internal("residue polynomial has no root in the quadratic extension".into()))?;
        // Decompose every element of the big field over the basis {iota(g^i), iota(g^i) theta_bar}.
        let n = k.n();
        let mut cols = Vec::with_capacity(2 * n);
        for i in 0..n {
            let gi = iota[k.code_of(&unit_vec(n, i)) as usize];
            cols.push(big.coords(gi));
        }
        for i in 0..n {
            let gi = iota[k.code_of(&unit_vec(n, i)) as usize];
            cols.push(big.coords(big.mul(gi, theta_bar)));
        }
        let mut split = HashMap::with_capacity(big.q() as usize);
        for z in big.codes() {
            let sol = solve_fp_linear(&cols, &big.coords(z), k.p())
                .ok_or_else(|| Error::Internal("quadratic residue basis is degenerate".into()))?;
            split.insert(z, (k.code_of(&sol[..n]), k.code_of(&sol[n..])));
        }
        Ok(UnramData { big, iota, theta_bar, split })
    }

    pub fn is_ramified(&self) -> bool {
        self.ramified
    }
    pub fn base(&self) -> &LocalRing {
        &self.base
    }
    pub fn embed(&self, a: &LFElement) -> QElem {
        QElem { x: a.clone(), y: self.base.field.zero(self.base.prec) }
    }
    pub fn theta(&self) -> QElem {
        QElem { x: self.base.field.zero(self.base.prec), y: self.base.int(1) }
    }
    /// N(x + y theta) = x^2 + s x y + n y^2.
    pub fn norm(&self, a: &QElem) -> LFElement {
        let xx = &a.x * &a.x;
        let xy = &(&a.x * &a.y) * &self.s;
        let yy = &(&a.y * &a.y) * &self.n;
        &(&xx + &xy) + &yy
    }
    /// Discriminant s^2 - 4n of the defining polynomial.
    pub fn discriminant(&self) -> LFElement {
        &(&self.s * &self.s) - &(&self.base.int(4) * &self.n)
    }

    fn div_pi_once(&self, a: &QElem) -> QElem {
        let s_over_n = self.s_over_n.as_ref().expect("ramified");
        let inv_n = self.inv_n.as_ref().expect("ramified");
        // 1/Pi = (s - Pi)/n
        QElem { x: &a.y + &(&a.x * s_over_n), y: (&a.x * inv_n).neg() }
    }
}

fn unit_vec(n: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

impl Dvr for QuadExtRing {
    type Elem = QElem;

    fn residue_field(&self) -> &GFq {
        match &self.unram {
            Some(u) => &u.big,
            None => self.base.residue_field(),
        }
    }
    fn int(&self, n: i64) -> QElem {
        self.embed(&self.base.int(n))
    }
    fn lift(&self, r: &GFqElem) -> QElem {
        match &self.unram {
            None => self.embed(&self.base.lift(r)),
            Some(u) => {
                let (a, b) = u.split[&r.code()];
                let k = self.base.residue_field();
                QElem { x: self.base.lift(&k.elem(a)), y: self.base.lift(&k.elem(b)) }
            }
        }
    }
    fn add(&self, a: &QElem, b: &QElem) -> QElem {
        QElem { x: &a.x + &b.x, y: &a.y + &b.y }
    }
    fn sub(&self, a: &QElem, b: &QElem) -> QElem {
        QElem { x: &a.x - &b.x, y: &a.y - &b.y }
    }
    fn neg(&self, a: &QElem) -> QElem {
        QElem { x: a.x.neg(), y: a.y.neg() }
    }
    fn mul(&self, a: &QElem, b: &QElem) -> QElem {
        let yy = &a.y * &b.y;
        QElem {
            x: &(&a.x * &b.x) - &(&yy * &self.n),
            y: &(&(&a.x * &b.y) + &(&a.y * &b.x)) + &(&yy * &self.s),
        }
    }
    fn mul_pi(&self, a: &QElem, k: u32) -> QElem {
        if !self.ramified {
            return QElem { x: a.x.mul_pi_pow(k as i64), y: a.y.mul_pi_pow(k as i64) };
        }
        let mut cur = a.clone();
        for _ in 0..k {
            // (x + y Pi) Pi = -y n + (x + y s) Pi
            cur = QElem { x: (&cur.y * &self.n).neg(), y: &cur.x + &(&cur.y * &self.s) };
        }
        cur
    }
    fn div_pi(&self, a: &QElem, k: u32) -> Result<QElem> {
        if !self.divisible(a, k as i64)? {
            return Err(Error::Internal(format!("{a:?} is not divisible by Pi^{k}")));
        }
        if !self.ramified {
            return Ok(QElem { x: a.x.mul_pi_pow(-(k as i64)), y: a.y.mul_pi_pow(-(k as i64)) });
        }
        let mut cur = a.clone();
        for _ in 0..k {
            cur = self.div_pi_once(&cur);
        }
        Ok(cur)
    }
    fn valuation(&self, a: &QElem) -> Option<i64> {
        let prec = self.precision(a);
        let (cx, cy) = if self.ramified {
            (a.x.valuation().map(|v| 2 * v), a.y.valuation().map(|v| 2 * v + 1))
        } else {
            (a.x.valuation(), a.y.valuation())
        };
        let m = match (cx, cy) {
            (Some(u), Some(v)) => u.min(v),
            (Some(u), None) | (None, Some(u)) => u,
            (None, None) => return None,
        };
        (m < prec).then_some(m)
    }
    fn precision(&self, a: &QElem) -> i64 {
        if self.ramified {
            (2 * a.x.precision()).min(2 * a.y.precision() + 1)
        } else {
            a.x.precision().min(a.y.precision())
        }
    }
    fn residue(&self, a: &QElem) -> Result<GFqElem> {
        if let Some(v) = self.valuation(a) {
            if v < 0 {
                return Err(Error::NonIntegral);
            }
        } else if self.precision(a) < 1 {
            return Err(Error::insufficient("residue of an undetermined element"));
        }
        match &self.unram {
            None => a.x.residue(),
            Some(u) => {
                let xr = a.x.residue()?;
                let yr = a.y.residue()?;
                let big = &u.big;
                let z = big.add(u.iota[xr.code() as usize], big.mul(u.iota[yr.code() as usize], u.theta_bar));
                Ok(big.elem(z))
            }
        }
    }
    fn literal(&self, a: &QElem) -> String {
        let name = if self.ramified { "Pi" } else { "theta" };
        if a.y.is_bottom() {
            return a.x.to_literal();
        }
        format!("({}) + ({})*{name}", a.x.to_literal(), a.y.to_literal())
    }
}
