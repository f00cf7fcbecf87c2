//! Weierstrass equations, covariants and Tate's algorithm over any [`Dvr`].
//!
//! The algorithm never divides by 2 or 3: every root or transformation
//! parameter it needs is found by exhaustive search in the residue field,
//! so the same code runs in residue characteristic 2, 3 and p >= 5.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dvr::Dvr;
use crate::error::{Error, Result};
use crate::gf::GFq;

/// y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 together with its covariants.
#[derive(Clone, Debug)]
pub struct WeierstrassEq<E> {
    pub a: [E; 5],
    pub b2: E,
    pub b4: E,
    pub b6: E,
    pub b8: E,
    pub c4: E,
    pub c6: E,
    pub delta: E,
}

impl<E> WeierstrassEq<E> {
    pub fn a1(&self) -> &E {
        &self.a[0]
    }
    pub fn a2(&self) -> &E {
        &self.a[1]
    }
    pub fn a3(&self) -> &E {
        &self.a[2]
    }
    pub fn a4(&self) -> &E {
        &self.a[3]
    }
    pub fn a6(&self) -> &E {
        &self.a[4]
    }
}

/// Compute b2..b8, c4, c6 and the discriminant, checking the two classical
/// identities at the available precision.
pub fn covariants<R: Dvr>(ring: &R, a: &[R::Elem; 5]) -> Result<WeierstrassEq<R::Elem>> {
    for ai in a {
        if let Some(v) = ring.valuation(ai) {
            if v < 0 {
                return Err(Error::NonIntegral);
            }
        }
    }
    let [a1, a2, a3, a4, a6] = a;
    let i = |n: i64| ring.int(n);
    let m = |x: &R::Elem, y: &R::Elem| ring.mul(x, y);
    let ad = |x: &R::Elem, y: &R::Elem| ring.add(x, y);
    let sb = |x: &R::Elem, y: &R::Elem| ring.sub(x, y);

    let a1sq = m(a1, a1);
    let b2 = ad(&a1sq, &m(&i(4), a2));
    let b4 = ad(&m(&i(2), a4), &m(a1, a3));
    let b6 = ad(&m(a3, a3), &m(&i(4), a6));
    let b8 = sb(
        &ad(&ad(&m(&a1sq, a6), &m(&i(4), &m(a2, a6))), &m(a2, &m(a3, a3))),
        &ad(&m(a1, &m(a3, a4)), &m(a4, a4)),
    );
    let b2sq = m(&b2, &b2);
    let c4 = sb(&b2sq, &m(&i(24), &b4));
    let c6 = sb(&m(&i(36), &m(&b2, &b4)), &ad(&m(&b2sq, &b2), &m(&i(216), &b6)));
    let delta = sb(
        &m(&i(9), &m(&b2, &m(&b4, &b6))),
        &ad(&ad(&m(&b2sq, &b8), &m(&i(8), &m(&b4, &m(&b4, &b4)))), &m(&i(27), &m(&b6, &b6))),
    );

    let id1 = sb(&m(&i(4), &b8), &sb(&m(&b2, &b6), &m(&b4, &b4)));
    let id2 = sb(&m(&i(1728), &delta), &sb(&m(&c4, &m(&c4, &c4)), &m(&c6, &c6)));
    if ring.valuation(&id1).is_some() || ring.valuation(&id2).is_some() {
        return Err(Error::Internal("covariant identities fail".into()));
    }
    if ring.valuation(&delta).is_none() {
        return Err(Error::insufficient(format!(
            "discriminant indistinguishable from zero at precision {}",
            ring.precision(&delta)
        )));
    }
    Ok(WeierstrassEq { a: a.clone(), b2, b4, b6, b8, c4, c6, delta })
}

/// The change of variables x = x' + r, y = y' + s x' + t.
pub fn rst_transform<R: Dvr>(ring: &R, a: &[R::Elem; 5], r: &R::Elem, s: &R::Elem, t: &R::Elem) -> [R::Elem; 5] {
    let [a1, a2, a3, a4, a6] = a;
    let i = |n: i64| ring.int(n);
    let m = |x: &R::Elem, y: &R::Elem| ring.mul(x, y);
    let ad = |x: &R::Elem, y: &R::Elem| ring.add(x, y);
    let sb = |x: &R::Elem, y: &R::Elem| ring.sub(x, y);
    let rr = m(r, r);
    let n1 = ad(a1, &m(&i(2), s));
    let n2 = sb(&ad(a2, &m(&i(3), r)), &ad(&m(s, a1), &m(s, s)));
    let n3 = ad(&ad(a3, &m(r, a1)), &m(&i(2), t));
    let n4 = sb(
        &ad(&ad(a4, &m(&i(2), &m(r, a2))), &m(&i(3), &rr)),
        &ad(&ad(&m(s, a3), &m(&ad(t, &m(r, s)), a1)), &m(&i(2), &m(s, t))),
    );
    let n6 = sb(
        &ad(&ad(&ad(a6, &m(r, a4)), &m(&rr, a2)), &m(&rr, r)),
        &ad(&ad(&m(t, a3), &m(t, t)), &m(&m(r, t), a1)),
    );
    [n1, n2, n3, n4, n6]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kodaira {
    I0,
    In(u32),
    II,
    III,
    IV,
    I0Star,
    InStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl Kodaira {
    /// Number of irreducible components of the special fibre of the minimal regular model.
    pub fn components(&self) -> u32 {
        match self {
            Kodaira::I0 | Kodaira::II => 1,
            Kodaira::In(n) => *n,
            Kodaira::III => 2,
            Kodaira::IV => 3,
            Kodaira::I0Star => 5,
            Kodaira::InStar(n) => 5 + n,
            Kodaira::IVStar => 7,
            Kodaira::IIIStar => 8,
            Kodaira::IIStar => 9,
        }
    }
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kodaira::I0 => write!(f, "I0"),
            Kodaira::In(n) => write!(f, "I{n}"),
            Kodaira::II => write!(f, "II"),
            Kodaira::III => write!(f, "III"),
            Kodaira::IV => write!(f, "IV"),
            Kodaira::I0Star => write!(f, "I0*"),
            Kodaira::InStar(n) => write!(f, "I{n}*"),
            Kodaira::IVStar => write!(f, "IV*"),
            Kodaira::IIIStar => write!(f, "III*"),
            Kodaira::IIStar => write!(f, "II*"),
        }
    }
}

impl FromStr for Kodaira {
    type Err = Error;
    fn from_str(s: &str) -> Result<Kodaira> {
        let bad = || Error::InvalidInput(format!("unknown Kodaira symbol {s:?}"));
        Ok(match s {
            "I0" => Kodaira::I0,
            "II" => Kodaira::II,
            "III" => Kodaira::III,
            "IV" => Kodaira::IV,
            "I0*" => Kodaira::I0Star,
            "IV*" => Kodaira::IVStar,
            "III*" => Kodaira::IIIStar,
            "II*" => Kodaira::IIStar,
            _ => {
                let rest = s.strip_prefix('I').ok_or_else(bad)?;
                match rest.strip_suffix('*') {
                    Some(num) => Kodaira::InStar(num.parse().map_err(|_| bad())?),
                    None => Kodaira::In(rest.parse().map_err(|_| bad())?),
                }
            }
        })
    }
}

impl Serialize for Kodaira {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
impl<'de> Deserialize<'de> for Kodaira {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reduction {
    Good,
    MultSplit,
    MultNonsplit,
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Potential {
    Good,
    Multiplicative,
}

/// Coefficients a1..a6 as literals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelLiterals {
    pub a1: String,
    pub a2: String,
    pub a3: String,
    pub a4: String,
    pub a6: String,
}

impl ModelLiterals {
    pub fn from_vec(v: Vec<String>) -> ModelLiterals {
        let [a1, a2, a3, a4, a6]: [String; 5] = v.try_into().expect("five coefficients");
        ModelLiterals { a1, a2, a3, a4, a6 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TateResult {
    pub kodaira: Kodaira,
    pub v_delta: i64,
    pub v_delta_min: i64,
    #[serde(rename = "f")]
    pub conductor_f: i64,
    #[serde(rename = "c")]
    pub tamagawa_c: u32,
    #[serde(rename = "m")]
    pub num_components: u32,
    pub reduction: Reduction,
    pub potential: Potential,
    pub minimal_model: ModelLiterals,
    /// Reduction of the minimal model to the residue field.
    pub reduced_minimal_model: ModelLiterals,
    /// Number of residue-field points on the smooth locus of the reduced minimal model.
    pub smooth_points: u64,
}

impl TateResult {
    /// Equality of everything except the literal minimal model (which lives
    /// over a specific field).
    pub fn same_invariants(&self, other: &TateResult) -> bool {
        self.kodaira == other.kodaira
            && self.v_delta == other.v_delta
            && self.v_delta_min == other.v_delta_min
            && self.conductor_f == other.conductor_f
            && self.tamagawa_c == other.tamagawa_c
            && self.num_components == other.num_components
            && self.reduction == other.reduction
            && self.potential == other.potential
            && self.reduced_minimal_model == other.reduced_minimal_model
            && self.smooth_points == other.smooth_points
    }
}

/// Tate's algorithm output together with the minimal model itself.
#[derive(Clone, Debug)]
pub struct TateRun<E> {
    pub result: TateResult,
    pub minimal: WeierstrassEq<E>,
}

struct Outcome {
    kodaira: Kodaira,
    f: i64,
    c: u32,
    reduction: Reduction,
}

/// Run Tate's algorithm on an integral model.
pub fn tate_algorithm<R: Dvr>(ring: &R, eq: &WeierstrassEq<R::Elem>) -> Result<TateRun<R::Elem>> {
    let k = ring.residue_field().clone();
    let v_delta = ring.exact_val(&eq.delta)?;
    let res = |x: &R::Elem| -> Result<u32> { Ok(ring.residue(x)?.code()) };
    let div = |x: &R::Elem, n: u32| ring.div_pi(x, n);
    let lift = |c: u32| ring.lift_code(c);
    let zero = ring.int(0);

    let mut cur = eq.clone();
    let outcome = 'outer: loop {
        let vd = ring.exact_val(&cur.delta)?;
        if vd == 0 {
            break Outcome { kodaira: Kodaira::I0, f: 0, c: 1, reduction: Reduction::Good };
        }
        let red: Vec<u32> = cur.a.iter().map(&res).collect::<Result<_>>()?;
        let (x0, y0) = singular_point(&k, &red)
            .ok_or_else(|| Error::Internal("no singular point on a curve with v(disc) > 0".into()))?;
        let mut a = rst_transform(ring, &cur.a, &lift(x0), &zero, &lift(y0));
        cur = covariants(ring, &a)?;

        if !ring.divisible(&cur.b2, 1)? {
            let split = !quad_roots(&k, res(&a[0])?, res(&a[1])?).is_empty();
            let n = vd as u32;
            let c = if split { n } else if n.is_multiple_of(2) { 2 } else { 1 };
            let reduction = if split { Reduction::MultSplit } else { Reduction::MultNonsplit };
            break Outcome { kodaira: Kodaira::In(n), f: 1, c, reduction };
        }
        if !ring.divisible(&a[4], 2)? {
            break Outcome { kodaira: Kodaira::II, f: vd, c: 1, reduction: Reduction::Additive };
        }
        if !ring.divisible(&cur.b8, 3)? {
            break Outcome { kodaira: Kodaira::III, f: vd - 1, c: 2, reduction: Reduction::Additive };
        }
        if !ring.divisible(&cur.b6, 3)? {
            let has = !quad_roots(&k, res(&div(&a[2], 1)?)?, res(&div(&a[4], 2)?)?).is_empty();
            break Outcome { kodaira: Kodaira::IV, f: vd - 2, c: if has { 3 } else { 1 }, reduction: Reduction::Additive };
        }

        // Arrange pi | a1, a2; pi^2 | a3, a4; pi^3 | a6.
        let (r1, r2) = (res(&a[0])?, res(&a[1])?);
        let s0 = k
            .codes()
            .find(|&s| k.add(r1, k.add(s, s)) == 0 && k.sub(k.sub(r2, k.mul(s, r1)), k.mul(s, s)) == 0)
            .ok_or_else(|| Error::Internal("no s with pi | a1, a2".into()))?;
        a = rst_transform(ring, &a, &zero, &lift(s0), &zero);
        let (q3, q6) = (res(&div(&a[2], 1)?)?, res(&div(&a[4], 2)?)?);
        let t0 = k
            .codes()
            .find(|&t| k.add(q3, k.add(t, t)) == 0 && k.sub(k.sub(q6, k.mul(t, q3)), k.mul(t, t)) == 0)
            .ok_or_else(|| Error::Internal("no t with pi^2 | a3 and pi^3 | a6".into()))?;
        a = rst_transform(ring, &a, &zero, &zero, &ring.mul_pi(&lift(t0), 1));
        for (ai, need) in a.iter().zip([1, 1, 2, 2, 3]) {
            if !ring.divisible(ai, need)? {
                return Err(Error::Internal(format!("coefficient not divisible by pi^{need} before the cubic step")));
            }
        }

        let b = res(&div(&a[1], 1)?)?;
        let c = res(&div(&a[3], 2)?)?;
        let d = res(&div(&a[4], 3)?)?;
        let roots = k.roots_with_multiplicity(&[d, c, b, 1]);
        let multiple = roots.iter().find(|(_, m)| *m >= 2).copied();
        match multiple {
            None => {
                cur = covariants(ring, &a)?;
                break Outcome { kodaira: Kodaira::I0Star, f: vd - 4, c: 1 + roots.len() as u32, reduction: Reduction::Additive };
            }
            Some((alpha, 2)) => {
                a = rst_transform(ring, &a, &ring.mul_pi(&lift(alpha), 1), &zero, &zero);
                let (mut ix, mut iy) = (3u32, 3u32);
                let cp = loop {
                    if ix + iy - 5 > vd as u32 {
                        return Err(Error::Internal("I_n* subprocedure does not terminate".into()));
                    }
                    let a3t = res(&div(&a[2], iy - 1)?)?;
                    let a6t = res(&div(&a[4], ix + iy - 2)?)?;
                    let qr = quad_roots(&k, a3t, a6t);
                    let Some(&(beta, _)) = qr.iter().find(|(_, m)| *m == 2) else {
                        break if qr.is_empty() { 2 } else { 4 };
                    };
                    a = rst_transform(ring, &a, &zero, &zero, &ring.mul_pi(&lift(beta), iy - 1));
                    iy += 1;
                    let a2t = res(&div(&a[1], 1)?)?;
                    let a4t = res(&div(&a[3], ix)?)?;
                    let a6t = res(&div(&a[4], ix + iy - 2)?)?;
                    let xr = k.roots_with_multiplicity(&[a6t, a4t, a2t]);
                    let Some(&(alpha, _)) = xr.iter().find(|(_, m)| *m == 2) else {
                        break if xr.is_empty() { 2 } else { 4 };
                    };
                    a = rst_transform(ring, &a, &ring.mul_pi(&lift(alpha), ix - 1), &zero, &zero);
                    ix += 1;
                };
                let n = ix + iy - 5;
                cur = covariants(ring, &a)?;
                break Outcome { kodaira: Kodaira::InStar(n), f: vd - n as i64 - 4, c: cp, reduction: Reduction::Additive };
            }
            Some((alpha, _)) => {
                a = rst_transform(ring, &a, &ring.mul_pi(&lift(alpha), 1), &zero, &zero);
                let x3 = res(&div(&a[2], 2)?)?;
                let x6 = res(&div(&a[4], 4)?)?;
                let qr = quad_roots(&k, x3, x6);
                let Some(&(beta, _)) = qr.iter().find(|(_, m)| *m == 2) else {
                    cur = covariants(ring, &a)?;
                    let c = if qr.is_empty() { 1 } else { 3 };
                    break Outcome { kodaira: Kodaira::IVStar, f: vd - 6, c, reduction: Reduction::Additive };
                };
                a = rst_transform(ring, &a, &zero, &zero, &ring.mul_pi(&lift(beta), 2));
                if !ring.divisible(&a[3], 4)? {
                    cur = covariants(ring, &a)?;
                    break Outcome { kodaira: Kodaira::IIIStar, f: vd - 7, c: 2, reduction: Reduction::Additive };
                }
                if !ring.divisible(&a[4], 6)? {
                    cur = covariants(ring, &a)?;
                    break Outcome { kodaira: Kodaira::IIStar, f: vd - 8, c: 1, reduction: Reduction::Additive };
                }
                let scaled = [div(&a[0], 1)?, div(&a[1], 2)?, div(&a[2], 3)?, div(&a[3], 4)?, div(&a[4], 6)?];
                cur = covariants(ring, &scaled)?;
                if ring.exact_val(&cur.delta)? != vd - 12 {
                    return Err(Error::Internal("rescaling did not lower v(disc) by 12".into()));
                }
                continue 'outer;
            }
        }
    };

    let v_delta_min = ring.exact_val(&cur.delta)?;
    let m = outcome.kodaira.components();
    let f_ogg = v_delta_min - m as i64 + 1;
    if f_ogg != outcome.f {
        return Err(Error::Internal(format!(
            "Ogg relation fails: v(disc_min) = {v_delta_min}, m = {m}, f = {}",
            outcome.f
        )));
    }
    let class_ok = match outcome.reduction {
        Reduction::Good => outcome.f == 0,
        Reduction::MultSplit | Reduction::MultNonsplit => outcome.f == 1,
        Reduction::Additive => outcome.f >= 2 && (k.p() < 5 || outcome.f == 2),
    };
    if !class_ok {
        return Err(Error::Internal(format!("conductor exponent {} inconsistent with {:?}", outcome.f, outcome.reduction)));
    }
    if (v_delta - v_delta_min) % 12 != 0 || v_delta_min > v_delta {
        return Err(Error::Internal("minimal discriminant is not v(disc) - 12k".into()));
    }

    let potential = potential_class(ring, &cur)?;
    let pot_mult_expected = match outcome.kodaira {
        Kodaira::In(n) if n > 0 => Some(true),
        Kodaira::InStar(_) if k.p() != 2 => Some(true),
        Kodaira::In(_) | Kodaira::InStar(_) => None,
        _ => Some(false),
    };
    if let Some(exp) = pot_mult_expected {
        if exp != (potential == Potential::Multiplicative) {
            return Err(Error::Internal(format!("v(j) sign inconsistent with Kodaira type {}", outcome.kodaira)));
        }
    }

    let reduced: Vec<u32> = cur.a.iter().map(&res).collect::<Result<_>>()?;
    let smooth_points = smooth_point_count(&k, &reduced)?;
    let q = k.q() as u64;
    let expected = match outcome.reduction {
        Reduction::Good => None,
        Reduction::MultSplit => Some(q - 1),
        Reduction::MultNonsplit => Some(q + 1),
        Reduction::Additive => Some(q),
    };
    if expected.is_some_and(|e| e != smooth_points) {
        return Err(Error::Internal(format!("smooth locus has {smooth_points} points, expected {expected:?}")));
    }

    let result = TateResult {
        kodaira: outcome.kodaira,
        v_delta,
        v_delta_min,
        conductor_f: outcome.f,
        tamagawa_c: outcome.c,
        num_components: m,
        reduction: outcome.reduction,
        potential,
        minimal_model: ModelLiterals::from_vec(cur.a.iter().map(|x| ring.literal(x)).collect()),
        reduced_minimal_model: ModelLiterals::from_vec(reduced.iter().map(|&c| k.format_code(c)).collect()),
        smooth_points,
    };
    Ok(TateRun { result, minimal: cur })
}

/// Potential reduction type from v(j) = 3 v(c4) - v(disc).
pub fn potential_class<R: Dvr>(ring: &R, eq: &WeierstrassEq<R::Elem>) -> Result<Potential> {
    let vd = ring.exact_val(&eq.delta)?;
    match ring.valuation(&eq.c4) {
        Some(v) => Ok(if 3 * v < vd { Potential::Multiplicative } else { Potential::Good }),
        None if 3 * ring.precision(&eq.c4) >= vd => Ok(Potential::Good),
        None => Err(Error::insufficient("sign of v(j) undecidable")),
    }
}

/// Roots of Y^2 + b Y - c over the residue field.
fn quad_roots(k: &GFq, b: u32, c: u32) -> Vec<(u32, u32)> {
    k.roots_with_multiplicity(&[k.neg(c), b, 1])
}

fn curve_values(k: &GFq, a: &[u32], x: u32, y: u32) -> (u32, u32, u32) {
    let [a1, a2, a3, a4, a6] = [a[0], a[1], a[2], a[3], a[4]];
    let x2 = k.mul(x, x);
    let lhs = k.add(k.mul(y, y), k.add(k.mul(a1, k.mul(x, y)), k.mul(a3, y)));
    let rhs = k.add(k.add(k.mul(x2, x), k.mul(a2, x2)), k.add(k.mul(a4, x), a6));
    let f = k.sub(lhs, rhs);
    let three = k.from_int(3).code();
    let two = k.from_int(2).code();
    let fx = k.sub(k.mul(a1, y), k.add(k.add(k.mul(three, x2), k.mul(two, k.mul(a2, x))), a4));
    let fy = k.add(k.add(k.mul(two, y), k.mul(a1, x)), a3);
    (f, fx, fy)
}

/// The singular point of a singular reduced Weierstrass cubic, if any.
pub fn singular_point(k: &GFq, a: &[u32]) -> Option<(u32, u32)> {
    let [a1, a2, a3, a4, a6] = [a[0], a[1], a[2], a[3], a[4]];
    for x in k.codes() {
        let y = if k.p() != 2 {
            let two = k.from_int(2).code();
            k.neg(k.div(k.add(k.mul(a1, x), a3), two).ok()?)
        } else if a1 != 0 {
            k.div(k.add(k.mul(x, x), a4), a1).ok()?
        } else {
            let x2 = k.mul(x, x);
            k.sqrt(k.add(k.add(k.mul(x2, x), k.mul(a2, x2)), k.add(k.mul(a4, x), a6)))?
        };
        if curve_values(k, a, x, y) == (0, 0, 0) {
            return Some((x, y));
        }
    }
    None
}

/// Number of F_q-points on the smooth locus of y^2 + a1xy + a3y = x^3 + ... (point at infinity included).
pub fn smooth_point_count(k: &GFq, a: &[u32]) -> Result<u64> {
    if k.q() as u64 > crate::gf::MAX_ORDER {
        return Err(Error::FieldTooLarge(k.q() as u64));
    }
    let [a1, a2, a3, a4, a6] = [a[0], a[1], a[2], a[3], a[4]];
    let mut total: u64 = 1;
    for x in k.codes() {
        let x2 = k.mul(x, x);
        let rhs = k.add(k.add(k.mul(x2, x), k.mul(a2, x2)), k.add(k.mul(a4, x), a6));
        let bb = k.add(k.mul(a1, x), a3);
        total += if k.p() != 2 {
            let disc = k.add(k.mul(bb, bb), k.mul(k.from_int(4).code(), rhs));
            (1 + k.quadratic_residue(disc)?) as u64
        } else if bb == 0 {
            1
        } else {
            let z = k.div(rhs, k.mul(bb, bb))?;
            if k.trace(z) == 0 {
                2
            } else {
                0
            }
        };
    }
    if singular_point(k, a).is_some() {
        total -= 1;
    }
    Ok(total)
}

/// Retry `f` at doubled working precision while it reports insufficient precision.
pub fn with_adaptive_precision<T>(start: i64, cap: i64, mut f: impl FnMut(i64) -> Result<T>) -> Result<T> {
    let mut w = start.max(1).min(cap);
    loop {
        match f(w) {
            Err(e @ (Error::InsufficientPrecision(_) | Error::PrecisionLoss)) => {
                if w >= cap {
                    return Err(e);
                }
                w = (2 * w).min(cap);
            }
            other => return other,
        }
    }
}
