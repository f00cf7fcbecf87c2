//! Separable quadratic extensions, their quadratic characters, and the
//! quadratic-twist Weierstrass models in every residue characteristic.

use std::fmt;
use std::sync::Arc;

use crate::curves::{covariants, WeierstrassEq};
use crate::dvr::{LocalRing, QuadExtRing};
use crate::error::{Error, Result};
use crate::gf::GFq;
use crate::laurent::Laurent;
use crate::localfield::{Backend, LFElement, LocalField, TripleIso};

/// AS-normalize gamma: strip even negative leading exponents using
/// gamma -> gamma - delta^2 + delta, then test that the extension is a field.
pub fn normalize_gamma(gamma: &Laurent) -> Result<Laurent> {
    let k = gamma.field();
    if k.p() != 2 {
        return Err(Error::EvenCharRequired);
    }
    let mut g = gamma.clone();
    loop {
        let v = g.valuation().ok_or(Error::ReducibleASPolynomial)?;
        if v >= 0 || v % 2 != 0 {
            break;
        }
        let c = k.sqrt(g.leading_coeff()).expect("square roots exist in characteristic 2");
        let delta = Laurent::monomial(k, c, v / 2);
        g = g.sub(&delta.mul(&delta)).add(&delta);
    }
    match g.valuation() {
        Some(v) if v > 0 => Err(Error::ReducibleASPolynomial),
        Some(0) if k.trace(g.coeff(0)) == 0 => Err(Error::ReducibleASPolynomial),
        _ => Ok(g),
    }
}

/// Parameters of a quadratic extension of the mixed-characteristic field.
#[derive(Clone, Debug)]
pub enum MixedParam {
    /// K'(sqrt(d')), p odd.
    SqrtD { d: Laurent },
    /// x^2 - T^r x + c' with c' = T^(2r) gamma', p = 2 (r = 0: unramified).
    ArtinSchreier { r: i64, c: Laurent },
}

#[derive(Clone, Debug)]
pub enum TwistKind {
    SqrtD { d: Laurent },
    ArtinSchreier { gamma: Laurent },
    MixedCharQuadratic(MixedParam),
}

/// A normalized separable quadratic extension of a local field.
///
/// All parameters are exact digit polynomials in the uniformizer, so they
/// can be materialized at any working precision.
#[derive(Clone, Debug)]
pub struct TwistDatum {
    pub field: LocalField,
    pub kind: TwistKind,
    pub ramified: bool,
    pub r: i64,
    pub disc_val: i64,
}

impl TwistDatum {
    /// K(sqrt(d)) over F_q((t)), p odd; d is rescaled by even powers of t so that v(d) <= 1.
    pub fn sqrt_d(field: &LocalField, d: &Laurent) -> Result<TwistDatum> {
        let k = field.residue_field();
        if k.p() == 2 {
            return Err(Error::OddCharRequired);
        }
        let v = d.valuation().ok_or_else(|| Error::InvalidInput("d must be nonzero".into()))?;
        let d = d.shift(-2 * v.div_euclid(2));
        let vd = v.rem_euclid(2);
        if vd == 0 && k.quadratic_residue(d.coeff(0))? == 1 {
            return Err(Error::InvalidInput(format!("{d} is a square: the extension is split")));
        }
        Ok(TwistDatum { field: field.clone(), kind: TwistKind::SqrtD { d }, ramified: vd == 1, r: 0, disc_val: vd })
    }

    /// K(x^2 - x = gamma) over F_2^n((t)), normalized.
    pub fn artin_schreier(field: &LocalField, gamma: &Laurent) -> Result<TwistDatum> {
        let gamma = normalize_gamma(gamma)?;
        let v = gamma.valuation().expect("normalized gamma is nonzero");
        let r = (-v + 1).div_euclid(2).max(0);
        Ok(TwistDatum {
            field: field.clone(),
            kind: TwistKind::ArtinSchreier { gamma },
            ramified: r > 0,
            r,
            disc_val: 2 * r,
        })
    }

    pub fn mixed(field: &LocalField, param: MixedParam) -> Result<TwistDatum> {
        let (ramified, r, disc_val) = match &param {
            MixedParam::SqrtD { d } => {
                let v = d.valuation().ok_or_else(|| Error::InvalidInput("d must be nonzero".into()))?;
                (v == 1, 0, v)
            }
            MixedParam::ArtinSchreier { r, .. } => (*r > 0, *r, 2 * r),
        };
        Ok(TwistDatum { field: field.clone(), kind: TwistKind::MixedCharQuadratic(param), ramified, r, disc_val })
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            TwistKind::SqrtD { .. } => "sqrt_d",
            TwistKind::ArtinSchreier { .. } => "artin_schreier",
            TwistKind::MixedCharQuadratic(_) => "mixed_char_quadratic",
        }
    }

    /// Conductor exponent of the associated character (equal to disc_val for quadratic characters).
    pub fn conductor(&self) -> i64 {
        match &self.kind {
            TwistKind::ArtinSchreier { gamma } => {
                let v = gamma.valuation().expect("normalized");
                if v == 0 {
                    0
                } else {
                    1 - v
                }
            }
            _ => self.disc_val,
        }
    }

    /// (s, n) with the extension cut out by x^2 - s x + n.
    pub fn defining_poly(&self, prec: i64) -> (LFElement, LFElement) {
        let f = &self.field;
        match &self.kind {
            TwistKind::SqrtD { d } | TwistKind::MixedCharQuadratic(MixedParam::SqrtD { d }) => {
                (f.zero(prec), d.to_element(f, prec).neg())
            }
            TwistKind::ArtinSchreier { gamma } => {
                (f.uniformizer_pow(self.r, prec), gamma.shift(2 * self.r).to_element(f, prec))
            }
            TwistKind::MixedCharQuadratic(MixedParam::ArtinSchreier { c, .. }) => {
                (f.uniformizer_pow(self.r, prec), c.to_element(f, prec))
            }
        }
    }

    /// The extension ring O[theta] over a base ring at its working precision.
    pub fn extension_ring(&self, base: &LocalRing) -> Result<QuadExtRing> {
        let (s, n) = self.defining_poly(base.prec);
        QuadExtRing::new(base.clone(), s, n)
    }

    /// v(s^2 - 4n) computed from the defining polynomial; must equal `disc_val`.
    pub fn disc_valuation_computed(&self) -> Result<i64> {
        let prec = 4 * self.disc_val + 8 + 2 * self.field.ram_index().unwrap_or(0);
        let (s, n) = self.defining_poly(prec);
        let four = self.field.from_int(4, prec);
        (&(&s * &s) - &(&four * &n)).exact_valuation()
    }

    /// The parameter literal echoed in reports.
    pub fn param_literal(&self) -> String {
        match &self.kind {
            TwistKind::SqrtD { d } | TwistKind::MixedCharQuadratic(MixedParam::SqrtD { d }) => {
                d.to_element(&self.field, d.degree().unwrap_or(0) + 1).to_literal()
            }
            TwistKind::ArtinSchreier { gamma } => gamma.to_literal(),
            TwistKind::MixedCharQuadratic(MixedParam::ArtinSchreier { c, .. }) => {
                c.to_element(&self.field, c.degree().unwrap_or(0) + 1).to_literal()
            }
        }
    }
}

/// Quadratic character on K^x, realized by one concrete symbol formula.
pub trait QuadSymbol: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn field(&self) -> &LocalField;
    fn conductor(&self) -> i64;
    fn eval(&self, x: &LFElement) -> Result<i8>;
}

/// chi_d(x) = QR of the residue of (-1)^(v(d) v(x)) d^v(x) x^(-v(d)), p odd, either backend.
#[derive(Debug)]
pub struct TameSymbol {
    field: LocalField,
    vd: i64,
    ud: u32,
}

impl TameSymbol {
    pub fn new(field: &LocalField, d: &Laurent) -> Result<TameSymbol> {
        let k = field.residue_field();
        if k.p() == 2 {
            return Err(Error::OddCharRequired);
        }
        let vd = d.valuation().ok_or_else(|| Error::InvalidInput("d must be nonzero".into()))?;
        if !(0..=1).contains(&vd) {
            return Err(Error::InvalidInput("d must be normalized to valuation 0 or 1".into()));
        }
        Ok(TameSymbol { field: field.clone(), vd, ud: d.leading_coeff() })
    }
}

impl QuadSymbol for TameSymbol {
    fn name(&self) -> &'static str {
        "tame"
    }
    fn field(&self) -> &LocalField {
        &self.field
    }
    fn conductor(&self) -> i64 {
        self.vd
    }
    fn eval(&self, x: &LFElement) -> Result<i8> {
        if x.field() != &self.field {
            return Err(Error::ParentMismatch);
        }
        let k = self.field.residue_field();
        let vx = x.exact_valuation()?;
        let ux = x.unit_part()?.residue()?.code();
        let sign = if (self.vd * vx).rem_euclid(2) == 1 { k.neg(1) } else { 1 };
        let val = k.mul(sign, k.mul(k.pow(self.ud, vx)?, k.pow(ux, -self.vd)?));
        k.quadratic_residue(val)
    }
}

/// chi_gamma(x) = (-1)^Tr(res(gamma dx/x)) on F_2^n((t)).
#[derive(Debug)]
pub struct ASResidueSymbol {
    field: LocalField,
    gamma: Laurent,
    c: i64,
}

impl ASResidueSymbol {
    pub fn new(field: &LocalField, gamma: &Laurent) -> Result<ASResidueSymbol> {
        if field.backend() != Backend::EqualChar || field.p() != 2 {
            return Err(Error::EvenCharRequired);
        }
        let v = gamma.valuation().ok_or(Error::ReducibleASPolynomial)?;
        Ok(ASResidueSymbol { field: field.clone(), gamma: gamma.clone(), c: if v >= 0 { 0 } else { 1 - v } })
    }
}

impl QuadSymbol for ASResidueSymbol {
    fn name(&self) -> &'static str {
        "artin_schreier_residue"
    }
    fn field(&self) -> &LocalField {
        &self.field
    }
    fn conductor(&self) -> i64 {
        self.c
    }
    fn eval(&self, x: &LFElement) -> Result<i8> {
        if x.field() != &self.field {
            return Err(Error::ParentMismatch);
        }
        let k = self.field.residue_field();
        let m = x.exact_valuation()?;
        let u = x.unit_part()?;
        // dx/x = m dt/t + (u'/u) dt; only u'/u mod t^(c-1) meets the polar part of gamma.
        let need = (self.c - 1).max(0) as usize;
        if u.rel_precision() < need as i64 + 1 {
            return Err(Error::insufficient("unit part known too coarsely for the residue symbol"));
        }
        let (_, ud) = u.digits();
        let w = log_derivative(k, &ud, need);
        let mut res = if m.rem_euclid(2) == 1 { self.gamma.coeff(0) } else { 0 };
        for (i, &wi) in w.iter().enumerate() {
            res = k.add(res, k.mul(self.gamma.coeff(-1 - i as i64), wi));
        }
        Ok(if k.trace(res) == 0 { 1 } else { -1 })
    }
}

/// Coefficients 0..len of u'/u for a unit power series u (digit codes).
fn log_derivative(k: &GFq, u: &[u32], len: usize) -> Vec<u32> {
    if len == 0 {
        return Vec::new();
    }
    let coeff = |i: usize| u.get(i).copied().unwrap_or(0);
    let deriv: Vec<u32> = (0..len).map(|i| k.mul(k.from_int(i as i64 + 1).code(), coeff(i + 1))).collect();
    // inverse of u mod t^len
    let u0_inv = k.inv(coeff(0)).expect("unit");
    let mut inv = vec![0u32; len];
    inv[0] = u0_inv;
    for i in 1..len {
        let mut s = 0;
        for j in 1..=i {
            s = k.add(s, k.mul(coeff(j), inv[i - j]));
        }
        inv[i] = k.neg(k.mul(s, u0_inv));
    }
    (0..len)
        .map(|i| (0..=i).fold(0, |acc, j| k.add(acc, k.mul(deriv[j], inv[i - j]))))
        .collect()
}

/// chi'(y) = chi(xi^{-1}(y)): the character of K'^x obtained by transport.
#[derive(Debug)]
pub struct TransportedSymbol {
    iso: TripleIso,
    source: Arc<dyn QuadSymbol>,
}

impl TransportedSymbol {
    pub fn new(iso: &TripleIso, source: Arc<dyn QuadSymbol>) -> Result<TransportedSymbol> {
        if source.field() != iso.source() {
            return Err(Error::ParentMismatch);
        }
        if source.conductor() > iso.level() {
            return Err(Error::PrecisionExceedsIso { j: source.conductor(), e: iso.level() });
        }
        Ok(TransportedSymbol { iso: iso.clone(), source })
    }
}

impl QuadSymbol for TransportedSymbol {
    fn name(&self) -> &'static str {
        "transported"
    }
    fn field(&self) -> &LocalField {
        self.iso.target()
    }
    fn conductor(&self) -> i64 {
        self.source.conductor()
    }
    fn eval(&self, y: &LFElement) -> Result<i8> {
        let level = self.conductor().max(1);
        let class = y.mult_class(level)?;
        let x = self.iso.xi_inverse(&class)?.representative(level)?;
        self.source.eval(&x)
    }
}

/// Names of the symbol backends, in registry order.
pub const SYMBOL_BACKENDS: [&str; 3] = ["tame", "artin_schreier_residue", "transported"];

/// The symbol evaluating the character of a source-side datum.
pub fn native_symbol(datum: &TwistDatum) -> Result<Arc<dyn QuadSymbol>> {
    Ok(match &datum.kind {
        TwistKind::SqrtD { d } | TwistKind::MixedCharQuadratic(MixedParam::SqrtD { d }) => {
            Arc::new(TameSymbol::new(&datum.field, d)?)
        }
        TwistKind::ArtinSchreier { gamma } => Arc::new(ASResidueSymbol::new(&datum.field, gamma)?),
        TwistKind::MixedCharQuadratic(MixedParam::ArtinSchreier { .. }) => {
            return Err(Error::Unsupported("2-adic characters are only available by transport".into()))
        }
    })
}

/// A quadratic character together with the extension it cuts out.
#[derive(Clone, Debug)]
pub struct QuadChar {
    pub datum: TwistDatum,
    symbol: Arc<dyn QuadSymbol>,
}

impl QuadChar {
    /// The character of an equal-characteristic datum via its native symbol.
    pub fn new(datum: &TwistDatum) -> Result<QuadChar> {
        Ok(QuadChar { datum: datum.clone(), symbol: native_symbol(datum)? })
    }
    /// chi' on K' defined by transport of `source` along xi.
    pub fn transported(datum: &TwistDatum, iso: &TripleIso, source: &QuadChar) -> Result<QuadChar> {
        let symbol = Arc::new(TransportedSymbol::new(iso, source.symbol.clone())?);
        Ok(QuadChar { datum: datum.clone(), symbol })
    }
    pub fn conductor(&self) -> i64 {
        self.symbol.conductor()
    }
    pub fn backend(&self) -> &'static str {
        self.symbol.name()
    }
    pub fn eval(&self, x: &LFElement) -> Result<i8> {
        self.symbol.eval(x)
    }
}

fn check_integral(a: &[LFElement; 5], what: &str) -> Result<()> {
    for (i, x) in a.iter().enumerate() {
        if x.valuation().is_some_and(|v| v < 0) {
            return Err(Error::NonIntegralTwist(format!("{what}: coefficient {} has negative valuation", i + 1)));
        }
    }
    Ok(())
}

/// Integral model of the quadratic twist of `eq` by the datum, over the datum's field.
pub fn twist_equation(ring: &LocalRing, eq: &WeierstrassEq<LFElement>, datum: &TwistDatum) -> Result<WeierstrassEq<LFElement>> {
    if ring.field != datum.field {
        return Err(Error::ParentMismatch);
    }
    let f = &ring.field;
    let w = ring.prec;
    let [a1, a2, a3, a4, a6] = &eq.a;
    let (out, ratio) = match &datum.kind {
        TwistKind::SqrtD { d } | TwistKind::MixedCharQuadratic(MixedParam::SqrtD { d }) => {
            let d = d.to_element(f, w);
            let d2 = &d * &d;
            let inv4 = f.from_int(4, w).inv()?;
            let inv2 = f.from_int(2, w).inv()?;
            let a2t = &(&d * &eq.b2) * &inv4;
            let a4t = &(&d2 * &eq.b4) * &inv2;
            let a6t = &(&(&d2 * &d) * &eq.b6) * &inv4;
            let out = [f.zero(w), a2t, f.zero(w), a4t, a6t];
            (out, d2.pow(3))
        }
        TwistKind::ArtinSchreier { gamma } => {
            let r = datum.r;
            let g = gamma.to_element(f, w);
            let out = [
                a1.mul_pi_pow(r),
                (a2 + &(&g * &(a1 * a1))).mul_pi_pow(2 * r),
                a3.mul_pi_pow(3 * r),
                a4.mul_pi_pow(4 * r),
                (a6 + &(&g * &(a3 * a3))).mul_pi_pow(6 * r),
            ];
            (out, f.uniformizer_pow(12 * r, w + 12 * r))
        }
        TwistKind::MixedCharQuadratic(MixedParam::ArtinSchreier { c, .. }) => {
            let r = datum.r;
            let e = f.ram_index().unwrap_or(0);
            if 2 * r > e + 1 {
                return Err(Error::NonIntegralTwist(format!("4*gamma' is not in 2*O for r = {r}, e = {e}")));
            }
            // gamma' = c / T^(2r), known to precision w - 2r + (guard)
            let g = c.to_element(f, w + 2 * r).mul_pi_pow(-2 * r);
            let u = &f.one(w) - &(&f.from_int(4, w) * &g);
            let u2 = &u * &u;
            let two = f.from_int(2, w);
            let out = [
                (&u * a1).mul_pi_pow(r),
                (&u * &(a2 + &(&g * &(a1 * a1)))).mul_pi_pow(2 * r),
                (&u2 * a3).mul_pi_pow(3 * r),
                (&u2 * &(a4 + &(&(&two * &g) * &(a1 * a3)))).mul_pi_pow(4 * r),
                (&(&u2 * &u) * &(a6 + &(&g * &(a3 * a3)))).mul_pi_pow(6 * r),
            ];
            (out, u2.pow(3).mul_pi_pow(12 * r))
        }
    };
    check_integral(&out, datum.kind_name())?;
    let out = out.map(|x| x.truncate(w));
    let twisted = covariants(ring, &out)?;
    let expected = &ratio * &eq.delta;
    let diff = &twisted.delta - &expected;
    if !diff.is_bottom() {
        return Err(Error::Internal(format!(
            "twist discriminant ratio check failed: {} vs {}",
            twisted.delta.to_literal(),
            expected.to_literal()
        )));
    }
    Ok(twisted)
}

/// The twist of an exact equal-characteristic model, computed exactly.
pub fn twist_exact(a: &[Laurent; 5], datum: &TwistDatum) -> Result<[Laurent; 5]> {
    let k = datum.field.residue_field();
    let [a1, a2, a3, a4, a6] = a;
    let out = match &datum.kind {
        TwistKind::SqrtD { d } => {
            let c = |x: i64| Laurent::constant(k, k.from_int(x).code());
            let inv = |x: i64| k.inv(k.from_int(x).code());
            let b2 = a1.mul(a1).add(&a2.mul(&c(4)));
            let b4 = a4.mul(&c(2)).add(&a1.mul(a3));
            let b6 = a3.mul(a3).add(&a6.mul(&c(4)));
            let d2 = d.mul(d);
            [
                Laurent::zero(k),
                d.mul(&b2).scale(inv(4)?),
                Laurent::zero(k),
                d2.mul(&b4).scale(inv(2)?),
                d2.mul(d).mul(&b6).scale(inv(4)?),
            ]
        }
        TwistKind::ArtinSchreier { gamma } => {
            let r = datum.r;
            [
                a1.shift(r),
                a2.add(&gamma.mul(&a1.mul(a1))).shift(2 * r),
                a3.shift(3 * r),
                a4.shift(4 * r),
                a6.add(&gamma.mul(&a3.mul(a3))).shift(6 * r),
            ]
        }
        TwistKind::MixedCharQuadratic(_) => {
            return Err(Error::InvalidInput("exact twists are only defined over F_q((t))".into()))
        }
    };
    if let Some(i) = out.iter().position(|x| !x.is_integral()) {
        return Err(Error::NonIntegralTwist(format!("coefficient {} has negative valuation", i + 1)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> (GFq, LocalField) {
        let k = GFq::new(2, 1).unwrap();
        (k.clone(), LocalField::equal_char(k))
    }
    fn mono(k: &GFq, exp: i64) -> Laurent {
        Laurent::monomial(k, 1, exp)
    }

    #[test]
    fn gamma_normalization() {
        let (k, _) = f2();
        assert_eq!(normalize_gamma(&mono(&k, -4)).unwrap(), mono(&k, -1));
        assert_eq!(normalize_gamma(&mono(&k, -2)).unwrap(), mono(&k, -1));
        assert_eq!(normalize_gamma(&mono(&k, -1)).unwrap(), mono(&k, -1));
        assert!(matches!(normalize_gamma(&mono(&k, 3)), Err(Error::ReducibleASPolynomial)));
        assert!(matches!(normalize_gamma(&Laurent::zero(&k)), Err(Error::ReducibleASPolynomial)));
        // 1 + t: trace of the constant term is 1, so this is the unramified extension
        assert!(normalize_gamma(&Laurent::new(&k, 0, vec![1, 1])).is_ok());
    }

    #[test]
    fn discriminants_and_conductors() {
        let (k, f) = f2();
        let d = TwistDatum::artin_schreier(&f, &mono(&k, -4)).unwrap();
        assert_eq!((d.r, d.disc_val, d.conductor()), (1, 2, 2));
        assert_eq!(d.disc_valuation_computed().unwrap(), 2);
        let d = TwistDatum::artin_schreier(&f, &mono(&k, -3)).unwrap();
        assert_eq!((d.r, d.disc_val, d.conductor()), (2, 4, 4));
        assert_eq!(d.disc_valuation_computed().unwrap(), 4);
        let d = TwistDatum::artin_schreier(&f, &Laurent::constant(&k, 1)).unwrap();
        assert_eq!((d.disc_val, d.conductor()), (0, 0));

        let k5 = GFq::new(5, 1).unwrap();
        let f5 = LocalField::equal_char(k5.clone());
        let d = TwistDatum::sqrt_d(&f5, &mono(&k5, 1)).unwrap();
        assert_eq!((d.disc_val, d.conductor()), (1, 1));
        assert_eq!(d.disc_valuation_computed().unwrap(), 1);
        // t^3 is rescaled to t
        let d = TwistDatum::sqrt_d(&f5, &mono(&k5, 3)).unwrap();
        assert_eq!(d.param_literal(), "t");
        assert!(TwistDatum::sqrt_d(&f5, &Laurent::constant(&k5, 4)).is_err());
    }

    #[test]
    fn symbol_values() {
        let k5 = GFq::new(5, 1).unwrap();
        let f5 = LocalField::equal_char(k5.clone());
        let chi = QuadChar::new(&TwistDatum::sqrt_d(&f5, &mono(&k5, 1)).unwrap()).unwrap();
        assert_eq!(chi.eval(&f5.from_int(2, 10)).unwrap(), -1);
        assert_eq!(chi.eval(&f5.from_int(4, 10)).unwrap(), 1);

        let (k, f) = f2();
        let chi = QuadChar::new(&TwistDatum::artin_schreier(&f, &mono(&k, -1)).unwrap()).unwrap();
        assert_eq!(chi.conductor(), 2);
        assert_eq!(chi.eval(&f.uniformizer_pow(1, 10)).unwrap(), 1);
        assert_eq!(chi.eval(&f.from_digits(&[1, 1], 0, 10)).unwrap(), -1);
    }

    #[test]
    fn twist_discriminant_ratios() {
        let (k, f) = f2();
        let ring = LocalRing::new(&f, 40);
        let a = [mono(&k, 0), Laurent::zero(&k), Laurent::zero(&k), Laurent::zero(&k), mono(&k, 1)];
        let eq = covariants(&ring, &a.clone().map(|x| x.to_element(&f, 40))).unwrap();
        let datum = TwistDatum::artin_schreier(&f, &mono(&k, -1)).unwrap();
        let tw = twist_equation(&ring, &eq, &datum).unwrap();
        assert_eq!(tw.a[0].to_literal(), "t");
        assert_eq!(tw.a[1].to_literal(), "t");
        assert_eq!(tw.a[4].to_literal(), "t^7");
        assert_eq!(tw.delta.valuation(), Some(13));
        let exact = twist_exact(&a, &datum).unwrap();
        for (x, y) in exact.iter().zip(&tw.a) {
            assert_eq!(x.to_literal(), y.to_literal());
        }

        let k5 = GFq::new(5, 1).unwrap();
        let f5 = LocalField::equal_char(k5.clone());
        let ring = LocalRing::new(&f5, 30);
        let one = f5.one(30);
        let eq = covariants(&ring, &[f5.zero(30), f5.zero(30), f5.zero(30), one.clone(), one]).unwrap();
        let datum = TwistDatum::sqrt_d(&f5, &mono(&k5, 1)).unwrap();
        let tw = twist_equation(&ring, &eq, &datum).unwrap();
        assert_eq!(tw.a[3].to_literal(), "t^2");
        assert_eq!(tw.a[4].to_literal(), "t^3");
        assert_eq!(tw.delta.valuation(), Some(6));
    }

    #[test]
    fn norms_are_in_the_kernel() {
        let cases: Vec<(u32, Vec<Laurent>)> = {
            let k2 = GFq::new(2, 1).unwrap();
            let k5 = GFq::new(5, 1).unwrap();
            vec![
                (2, vec![mono(&k2, -1), mono(&k2, -3), Laurent::new(&k2, -5, vec![1, 1, 0, 1]), Laurent::constant(&k2, 1)]),
                (5, vec![mono(&k5, 1), Laurent::constant(&k5, 2), Laurent::new(&k5, 1, vec![3, 1])]),
            ]
        };
        for (p, params) in cases {
            let k = GFq::new(p, 1).unwrap();
            let f = LocalField::equal_char(k.clone());
            for param in params {
                let datum = if p == 2 { TwistDatum::artin_schreier(&f, &param) } else { TwistDatum::sqrt_d(&f, &param) }.unwrap();
                let chi = QuadChar::new(&datum).unwrap();
                let ring = datum.extension_ring(&LocalRing::new(&f, 30)).unwrap();
                let mut saw_minus = false;
                for seed in 0..60u32 {
                    let dig = |s: u32| -> Vec<u32> { (0..6).map(|i| (s.wrapping_mul(2654435761).rotate_left(i * 5) >> 7) % p).collect() };
                    let x = f.from_digits(&dig(seed), 0, 30);
                    let y = f.from_digits(&dig(seed + 1000), (seed % 3) as i64, 30);
                    let z = crate::dvr::QElem { x: x.clone(), y };
                    let n = ring.norm(&z);
                    if n.is_bottom() {
                        continue;
                    }
                    assert_eq!(chi.eval(&n).unwrap(), 1, "norm {n} of {param}");
                    if !x.is_bottom() && chi.eval(&x).unwrap() == -1 {
                        saw_minus = true;
                    }
                }
                let pi = f.uniformizer_pow(1, 30);
                saw_minus |= chi.eval(&pi).unwrap() == -1;
                assert!(saw_minus, "character of {param} looks trivial");
            }
        }
    }
}
