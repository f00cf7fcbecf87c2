//! Local root numbers of elliptic curves in the cases fixed by classical
//! formulas, organized as a registry of named rules.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curves::{Potential, Reduction, TateResult};
use crate::error::{Error, Result};
use crate::gf::{GFq, GFqElem};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootNumberMethod {
    GoodReduction,
    SplitMult,
    NonsplitMult,
    PotMultAdditive,
    OddPotGood,
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootNumberVerdict {
    pub w: Option<i8>,
    pub method: RootNumberMethod,
    pub justification: String,
}

impl RootNumberVerdict {
    fn known(w: i8, method: RootNumberMethod, justification: impl Into<String>) -> Self {
        RootNumberVerdict { w: Some(w), method, justification: justification.into() }
    }
    pub fn unsupported(justification: impl Into<String>) -> Self {
        RootNumberVerdict { w: None, method: RootNumberMethod::Unsupported, justification: justification.into() }
    }
    pub fn is_supported(&self) -> bool {
        self.w.is_some()
    }
}

/// One way of computing w(E) from the reduction data over a field with residue field `k`.
pub trait RootNumberRule: Send + Sync {
    fn name(&self) -> &'static str;
    fn applies(&self, k: &GFq, tate: &TateResult) -> bool;
    fn evaluate(&self, k: &GFq, tate: &TateResult) -> Result<RootNumberVerdict>;
}

struct GoodRule;
impl RootNumberRule for GoodRule {
    fn name(&self) -> &'static str {
        "good"
    }
    fn applies(&self, _: &GFq, t: &TateResult) -> bool {
        t.reduction == Reduction::Good
    }
    fn evaluate(&self, _: &GFq, _: &TateResult) -> Result<RootNumberVerdict> {
        Ok(RootNumberVerdict::known(1, RootNumberMethod::GoodReduction, "unramified representation"))
    }
}

struct MultRule;
impl RootNumberRule for MultRule {
    fn name(&self) -> &'static str {
        "multiplicative"
    }
    fn applies(&self, _: &GFq, t: &TateResult) -> bool {
        matches!(t.reduction, Reduction::MultSplit | Reduction::MultNonsplit)
    }
    fn evaluate(&self, _: &GFq, t: &TateResult) -> Result<RootNumberVerdict> {
        Ok(if t.reduction == Reduction::MultSplit {
            RootNumberVerdict::known(-1, RootNumberMethod::SplitMult, "split multiplicative: special representation sp(2)")
        } else {
            RootNumberVerdict::known(
                1,
                RootNumberMethod::NonsplitMult,
                "nonsplit multiplicative: sp(2) twisted by the unramified quadratic character",
            )
        })
    }
}

/// Additive, potentially multiplicative, p odd: w = eps(nu) eps(nu omega^-1) / |...| = nu(-1).
struct PotMultRule;
impl RootNumberRule for PotMultRule {
    fn name(&self) -> &'static str {
        "potentially_multiplicative"
    }
    fn applies(&self, k: &GFq, t: &TateResult) -> bool {
        k.p() != 2 && t.reduction == Reduction::Additive && t.potential == Potential::Multiplicative
    }
    fn evaluate(&self, k: &GFq, _: &TateResult) -> Result<RootNumberVerdict> {
        let eps = epsilon_quadratic(k, &k.one())?;
        // the unramified twist omega^-1 leaves the sign unchanged, so w = eps^2
        let w = eps * eps;
        let sign = real_sign(w)?;
        let nu_minus_one = k.quadratic_residue(k.neg(1))?;
        if sign != nu_minus_one {
            return Err(Error::Internal(format!("Gauss-sum sign {sign} disagrees with nu(-1) = {nu_minus_one}")));
        }
        Ok(RootNumberVerdict::known(
            sign,
            RootNumberMethod::PotMultAdditive,
            "nu (+) nu*omega^-1 with nu tamely ramified quadratic; eps(nu)^2 from the Gauss sum equals nu(-1); \
             sp(2) normalized so that split/nonsplit give -1/+1",
        ))
    }
}

/// Additive, potentially good, tame (p >= 5, or p = 3 with f = 2).
struct OddPotGoodRule;
impl RootNumberRule for OddPotGoodRule {
    fn name(&self) -> &'static str {
        "odd_potentially_good"
    }
    fn applies(&self, k: &GFq, t: &TateResult) -> bool {
        t.reduction == Reduction::Additive
            && t.potential == Potential::Good
            && (k.p() >= 5 || (k.p() == 3 && t.conductor_f == 2 && matches!(semistability_defect(t.v_delta_min), 2 | 4)))
    }
    fn evaluate(&self, k: &GFq, t: &TateResult) -> Result<RootNumberVerdict> {
        let e = semistability_defect(t.v_delta_min);
        let table = tame_table(k, e)?;
        let gauss = tame_gauss_oracle(k, e)?;
        if table != gauss {
            return Err(Error::Internal(format!("tame root number table {table} disagrees with Gauss sums {gauss} (e = {e})")));
        }
        Ok(RootNumberVerdict::known(
            table,
            RootNumberMethod::OddPotGood,
            format!("tame potentially good, e = {e}: classical table (external result), confirmed by Gauss sums"),
        ))
    }
}

/// Named root-number rules, tried in order.
pub struct RuleRegistry {
    rules: Vec<Box<dyn RootNumberRule>>,
}

impl Default for RuleRegistry {
    fn default() -> Self {
        let mut r = RuleRegistry { rules: Vec::new() };
        r.register(Box::new(GoodRule));
        r.register(Box::new(MultRule));
        r.register(Box::new(PotMultRule));
        r.register(Box::new(OddPotGoodRule));
        r
    }
}

impl RuleRegistry {
    pub fn register(&mut self, rule: Box<dyn RootNumberRule>) {
        self.rules.push(rule);
    }
    pub fn names(&self) -> Vec<&'static str> {
        self.rules.iter().map(|r| r.name()).collect()
    }
    pub fn get(&self, name: &str) -> Option<&dyn RootNumberRule> {
        self.rules.iter().find(|r| r.name() == name).map(|r| r.as_ref())
    }
    pub fn root_number(&self, k: &GFq, tate: &TateResult) -> Result<RootNumberVerdict> {
        match self.rules.iter().find(|r| r.applies(k, tate)) {
            Some(rule) => rule.evaluate(k, tate),
            None if k.p() == 2 => Ok(RootNumberVerdict::unsupported(
                "additive reduction in residue characteristic 2 needs external formulas",
            )),
            None => Ok(RootNumberVerdict::unsupported("wildly ramified potentially good reduction in residue characteristic 3")),
        }
    }
}

/// w(E) for a curve over a local field with residue field `k`, using the default rules.
pub fn root_number(k: &GFq, tate: &TateResult) -> Result<RootNumberVerdict> {
    RuleRegistry::default().root_number(k, tate)
}

/// eps(nu, psi)/|eps| for the tame ramified quadratic character, psi of level 0 twisted by `u`.
pub fn epsilon_quadratic(k: &GFq, u: &GFqElem) -> Result<Complex64> {
    k.gauss_sum_sign(u)
}

/// e = 12 / gcd(v(disc_min), 12).
pub fn semistability_defect(v_delta_min: i64) -> i64 {
    12 / gcd(v_delta_min.rem_euclid(12), 12)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn legendre(k: &GFq, a: i64) -> Result<i8> {
    k.quadratic_residue(k.from_int(a).code())
}

/// Classical tame potentially-good root numbers: (-1/k) for e = 2, 6; (-3/k) for e = 3; (-2/k) for e = 4.
pub fn tame_table(k: &GFq, e: i64) -> Result<i8> {
    match e {
        1 => Ok(1),
        2 | 6 => legendre(k, -1),
        3 => legendre(k, -3),
        4 => legendre(k, -2),
        _ => Err(Error::Unsupported(format!("semistability defect {e} is not tame"))),
    }
}

/// The same sign computed from Gauss sums of a character of order e of tame inertia:
/// abelian case (e | q-1): G(chi) G(chi^-1) / q = chi(-1);
/// induced case (e | q+1): -G(chi)/q over F_{q^2}, the sign coming from the unramified twist.
pub fn tame_gauss_oracle(k: &GFq, e: i64) -> Result<i8> {
    let q = k.q() as i64;
    if e == 1 {
        return Ok(1);
    }
    let order_char = |f: &GFq| {
        let f = f.clone();
        move |x: u32| -> Complex64 {
            let l = f.log(x).expect("nonzero") as f64;
            Complex64::from_polar(1.0, 2.0 * PI * l / e as f64)
        }
    };
    if (q - 1) % e == 0 {
        let chi = order_char(k);
        let g1 = k.gauss_sum(&chi, 1);
        let g2 = k.gauss_sum(&|x| chi(x).conj(), 1);
        real_sign(g1 * g2 / q as f64)
    } else if (q + 1) % e == 0 {
        let big = GFq::new(k.p(), 2 * k.n())?;
        let chi = order_char(&big);
        let g = big.gauss_sum(&chi, 1) / q as f64;
        Ok(-real_sign(g)?)
    } else {
        Err(Error::Unsupported(format!("e = {e} divides neither q - 1 nor q + 1")))
    }
}

fn real_sign(z: Complex64) -> Result<i8> {
    if z.im.abs() > TOL || (z.re.abs() - 1.0).abs() > TOL {
        return Err(Error::Internal(format!("expected a real sign, got {z}")));
    }
    Ok(if z.re > 0.0 { 1 } else { -1 })
}

/// Parity of dim E(K)/N E(K_chi) solved from w(E_{K_chi}) = chi(disc) (-1)^dim.
pub fn kt_parity(w_base_change: i8, chi_delta: i8) -> u8 {
    if w_base_change * chi_delta == 1 {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{Kodaira, ModelLiterals};

    fn tate(reduction: Reduction, potential: Potential, vdm: i64, f: i64) -> TateResult {
        let lit = ModelLiterals::from_vec(vec!["0".into(); 5]);
        TateResult {
            kodaira: Kodaira::I0,
            v_delta: vdm,
            v_delta_min: vdm,
            conductor_f: f,
            tamagawa_c: 1,
            num_components: 1,
            reduction,
            potential,
            minimal_model: lit.clone(),
            reduced_minimal_model: lit,
            smooth_points: 0,
        }
    }

    #[test]
    fn semistable_values() {
        let k = GFq::new(2, 1).unwrap();
        let w = |r| root_number(&k, &tate(r, Potential::Good, 1, 1)).unwrap().w;
        assert_eq!(w(Reduction::Good), Some(1));
        assert_eq!(w(Reduction::MultSplit), Some(-1));
        assert_eq!(w(Reduction::MultNonsplit), Some(1));
        assert_eq!(w(Reduction::Additive), None);
    }

    #[test]
    fn epsilon_examples() {
        let k5 = GFq::new(5, 1).unwrap();
        let k3 = GFq::new(3, 1).unwrap();
        assert!((epsilon_quadratic(&k5, &k5.one()).unwrap() - Complex64::new(1.0, 0.0)).norm() < TOL);
        assert!((epsilon_quadratic(&k3, &k3.one()).unwrap() - Complex64::new(0.0, 1.0)).norm() < TOL);
        for (p, n) in [(3, 1), (5, 1), (7, 1), (3, 2), (11, 1), (13, 1)] {
            let k = GFq::new(p, n).unwrap();
            let u = k.one();
            let a = epsilon_quadratic(&k, &u).unwrap();
            let b = epsilon_quadratic(&k, &k.elem(k.neg(1))).unwrap();
            let nu = k.quadratic_residue(k.neg(1)).unwrap() as f64;
            // psi-bar gives the complex conjugate, so the product is 1; the square is nu(-1)
            assert!((a * b - Complex64::new(1.0, 0.0)).norm() < TOL);
            assert!((b - a.conj()).norm() < TOL);
            assert!((a * a - Complex64::new(nu, 0.0)).norm() < TOL);
        }
    }

    #[test]
    fn tame_table_matches_gauss_sums() {
        for (p, n) in [(5, 1), (7, 1), (11, 1), (13, 1), (17, 1), (19, 1), (5, 2), (23, 1)] {
            let k = GFq::new(p, n).unwrap();
            for e in [2, 3, 4, 6] {
                assert_eq!(tame_table(&k, e).unwrap(), tame_gauss_oracle(&k, e).unwrap(), "q = {}, e = {e}", k.q());
            }
        }
        let k3 = GFq::new(3, 1).unwrap();
        for e in [2, 4] {
            assert_eq!(tame_table(&k3, e).unwrap(), tame_gauss_oracle(&k3, e).unwrap());
        }
    }

    #[test]
    fn parity() {
        assert_eq!(kt_parity(1, 1), 0);
        assert_eq!(kt_parity(-1, 1), 1);
        assert_eq!(kt_parity(-1, -1), 0);
    }
}
