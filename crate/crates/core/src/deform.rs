//! Deformation from F_q((t)) to Frac(W(F_q)[T]/(T^e - p)): lift the curve
//! and the quadratic character, run every invariant on both sides and
//! compare, raising e until everything the theory predicts actually holds.

use serde::Serialize;
use serde_json::{json, Value};

use crate::curves::{covariants, tate_algorithm, with_adaptive_precision, ModelLiterals, TateResult, WeierstrassEq};
use crate::dvr::{Dvr, LocalRing};
use crate::error::{Error, Result};
use crate::gf::GFq;
use crate::laurent::Laurent;
use crate::localfield::{Backend, LFElement, LocalField, TripleIso};
use crate::quadratic::{twist_equation, twist_exact, MixedParam, QuadChar, TameSymbol, QuadSymbol, TwistDatum, TwistKind};
use crate::rootnum::{kt_parity, root_number, RootNumberVerdict};

pub const DEFAULT_MAX_E: i64 = 64;
pub const MAX_E_ENV: &str = "PADIC_DEFORM_MAX_E";

/// The precision cap, overridable through the environment.
pub fn default_max_e() -> i64 {
    std::env::var(MAX_E_ENV).ok().and_then(|s| s.trim().parse().ok()).filter(|&e| e >= 1).unwrap_or(DEFAULT_MAX_E)
}

/// First working precision tried by the adaptive Tate runs.
const START_PREC: i64 = 24;
/// Working-precision cap over F_q((t)).
const EQ_CHAR_PREC_CAP: i64 = 1 << 12;

#[derive(Debug, Clone)]
pub struct DeformOptions {
    pub e_override: Option<i64>,
    pub max_e: i64,
}

impl Default for DeformOptions {
    fn default() -> Self {
        DeformOptions { e_override: None, max_e: default_max_e() }
    }
}

/// An integral Weierstrass equation over F_q((t)) given exactly.
#[derive(Debug, Clone)]
pub struct CurveInput {
    pub field: GFq,
    pub a: [Laurent; 5],
}

impl CurveInput {
    pub fn new(field: &GFq, a: [Laurent; 5]) -> Result<CurveInput> {
        if a.iter().any(|x| x.field() != field) {
            return Err(Error::ParentMismatch);
        }
        if !a.iter().all(Laurent::is_integral) {
            return Err(Error::NonIntegral);
        }
        let c = CurveInput { field: field.clone(), a };
        if c.discriminant().is_zero() {
            return Err(Error::SingularEquation);
        }
        Ok(c)
    }
    /// Exact discriminant over F_q[t].
    pub fn discriminant(&self) -> Laurent {
        exact_discriminant(&self.field, &self.a)
    }
    pub fn literals(&self) -> ModelLiterals {
        ModelLiterals::from_vec(self.a.iter().map(Laurent::to_literal).collect())
    }
    pub fn source_field(&self) -> LocalField {
        LocalField::equal_char(self.field.clone())
    }
    pub fn materialize(&self, field: &LocalField, prec: i64) -> [LFElement; 5] {
        self.a.clone().map(|x| x.to_element(field, prec))
    }
    /// Tate's algorithm over F_q((t)) at adaptive precision.
    pub fn tate(&self) -> Result<TateResult> {
        Ok(tate_adaptive(&self.source_field(), |r| Ok(self.materialize(&r.field, r.prec)))?.0)
    }
}

/// The discriminant of an exact model, by the standard covariant formulas.
pub fn exact_discriminant(k: &GFq, a: &[Laurent; 5]) -> Laurent {
    let c = |n: i64| Laurent::constant(k, k.from_int(n).code());
    let [a1, a2, a3, a4, a6] = a;
    let b2 = a1.mul(a1).add(&c(4).mul(a2));
    let b4 = c(2).mul(a4).add(&a1.mul(a3));
    let b6 = a3.mul(a3).add(&c(4).mul(a6));
    let b8 = a1.mul(a1).mul(a6).add(&c(4).mul(a2).mul(a6)).add(&a2.mul(a3).mul(a3)).sub(&a1.mul(a3).mul(a4)).sub(&a4.mul(a4));
    c(9).mul(&b2).mul(&b4).mul(&b6)
        .sub(&b2.mul(&b2).mul(&b8))
        .sub(&c(8).mul(&b4).mul(&b4).mul(&b4))
        .sub(&c(27).mul(&b6).mul(&b6))
}

/// The deformation level and the triple isomorphism at that level.
#[derive(Debug, Clone)]
pub struct DeformCtx {
    pub e: i64,
    pub e_floor: i64,
    pub source: LocalField,
    pub target: LocalField,
    pub iso: TripleIso,
}

/// max{v(disc) + c(chi), v(disc of K_chi/K)}.
pub fn e_floor(v_delta: i64, conductor: i64, disc_val: i64) -> i64 {
    (v_delta + conductor).max(disc_val)
}

pub fn build_ctx(source: &LocalField, v_delta: i64, chi: &QuadChar, e_override: Option<i64>) -> Result<DeformCtx> {
    if source.backend() != Backend::EqualChar {
        return Err(Error::InvalidInput("the source field must be F_q((t))".into()));
    }
    let floor = e_floor(v_delta, chi.conductor(), chi.datum.disc_val);
    let e = e_override.unwrap_or(0).max(floor).max(2);
    let iso = TripleIso::new(source.residue_field(), e)?;
    Ok(DeformCtx { e, e_floor: floor, source: iso.source().clone(), target: iso.target().clone(), iso })
}

/// a_i' = lift(phi(a_i mod t^e)), as exact digit polynomials in T.
pub fn deform_coefficients(ctx: &DeformCtx, a: &[Laurent; 5]) -> Result<[Laurent; 5]> {
    let k = ctx.source.residue_field();
    let mut out = Vec::with_capacity(5);
    for ai in a {
        let class = ai.to_element(&ctx.source, ctx.e).reduce_mod(ctx.e)?;
        let lifted = ctx.iso.phi_apply(&class)?.lift_to_integer(ctx.e)?;
        if lifted.reduce_mod(ctx.e)? != ctx.iso.phi_apply(&class)? {
            return Err(Error::Internal("lift does not reduce to the transported class".into()));
        }
        out.push(Laurent::new(k, 0, class.digits().to_vec()));
    }
    Ok(out.try_into().expect("five coefficients"))
}

/// E' over K', with v(disc') = v(disc) verified.
pub fn deform_equation(ctx: &DeformCtx, curve: &CurveInput) -> Result<[Laurent; 5]> {
    let a = deform_coefficients(ctx, &curve.a)?;
    let v = curve.discriminant().valuation().ok_or(Error::SingularEquation)?;
    let prec = (v + 8).max(2 * ctx.e);
    let ring = LocalRing::new(&ctx.target, prec);
    let lifted = a.clone().map(|x| x.to_element(&ctx.target, prec));
    let vp = match covariants(&ring, &lifted) {
        Ok(eq) => eq.delta.valuation().unwrap_or(i64::MAX),
        Err(Error::InsufficientPrecision(_)) => i64::MAX,
        Err(e) => return Err(e),
    };
    if vp != v {
        return Err(Error::DeltaValuationMismatch { source_val: v, target_val: if vp == i64::MAX { prec } else { vp } });
    }
    Ok(a)
}

/// The quadratic datum over K' and the character chi' = chi o xi^{-1}.
pub fn deform_quadratic(ctx: &DeformCtx, chi: &QuadChar) -> Result<(TwistDatum, QuadChar)> {
    let datum = &chi.datum;
    let k = ctx.source.residue_field();
    let transport = |x: &Laurent, eta: bool| -> Result<Laurent> {
        let class = if eta {
            ctx.iso.eta_apply(&x.to_element(&ctx.source, ctx.e + 1).reduce_mod(ctx.e + 1)?)?
        } else {
            ctx.iso.phi_apply(&x.to_element(&ctx.source, ctx.e).reduce_mod(ctx.e)?)?
        };
        Ok(Laurent::new(k, 0, class.digits().to_vec()))
    };
    let param = match &datum.kind {
        TwistKind::SqrtD { d } => MixedParam::SqrtD { d: transport(d, datum.ramified)? },
        TwistKind::ArtinSchreier { gamma } => {
            let c = gamma.shift(2 * datum.r);
            MixedParam::ArtinSchreier { r: datum.r, c: transport(&c, datum.r > 0)? }
        }
        TwistKind::MixedCharQuadratic(_) => {
            return Err(Error::InvalidInput("the datum to deform must live over F_q((t))".into()))
        }
    };
    let target = TwistDatum::mixed(&ctx.target, param)?;
    let (src, tgt) = (datum.disc_valuation_computed()?, target.disc_valuation_computed()?);
    if src != tgt || src != datum.disc_val || tgt != target.disc_val {
        return Err(Error::DiscMismatch { source_val: src, target_val: tgt });
    }
    let chi_prime = QuadChar::transported(&target, &ctx.iso, chi)?;
    Ok((target, chi_prime))
}

#[derive(Debug, Clone, Serialize)]
pub struct CharTransport {
    /// xi(disc) and disc' as classes in K'^x / U'^c, written as T^m * unit.
    pub xi_delta: String,
    pub delta_prime: String,
    pub chi_delta: i8,
    pub chi_prime_delta_prime: i8,
    pub class_level: i64,
}

/// Check disc' = xi(disc) in K'^x / U'^c and evaluate both characters.
pub fn check_char_transport(ctx: &DeformCtx, chi: &QuadChar, chi_prime: &QuadChar, delta: &LFElement, delta_prime: &LFElement) -> Result<CharTransport> {
    let c = chi.conductor();
    let show = |m: &crate::localfield::MultClass| if c == 0 { format!("T^{}", m.m) } else { format!("T^{} * ({})", m.m, m.unit) };
    let image = ctx.iso.xi_apply(&delta.mult_class(c)?)?;
    let actual = delta_prime.mult_class(c)?;
    let same = if c == 0 { image.m == actual.m } else { image == actual };
    if !same {
        return Err(Error::ClassMismatch);
    }
    Ok(CharTransport {
        xi_delta: show(&image),
        delta_prime: show(&actual),
        chi_delta: chi.eval(delta)?,
        chi_prime_delta_prime: chi_prime.eval(delta_prime)?,
        class_level: c,
    })
}

fn prec_cap(field: &LocalField) -> i64 {
    match field.backend() {
        Backend::EqualChar => EQ_CHAR_PREC_CAP,
        Backend::MixedChar => field.max_rel_precision(),
    }
}

/// Tate's algorithm on a model produced at any requested working precision.
pub fn tate_adaptive(field: &LocalField, model: impl Fn(&LocalRing) -> Result<[LFElement; 5]>) -> Result<(TateResult, WeierstrassEq<LFElement>)> {
    with_adaptive_precision(START_PREC, prec_cap(field), |w| {
        let ring = LocalRing::new(field, w);
        let a = model(&ring)?;
        let eq = covariants(&ring, &a)?;
        let run = tate_algorithm(&ring, &eq)?;
        Ok((run.result, eq))
    })
}

/// Tate's algorithm after base change to the quadratic extension cut out by `datum`;
/// returns the result and the residue field of the extension.
pub fn tate_base_change(datum: &TwistDatum, model: impl Fn(&LocalRing) -> Result<[LFElement; 5]>) -> Result<(TateResult, GFq)> {
    with_adaptive_precision(START_PREC, prec_cap(&datum.field), |w| {
        let ring = LocalRing::new(&datum.field, w);
        let ext = datum.extension_ring(&ring)?;
        let a = model(&ring)?.map(|x| ext.embed(&x));
        let eq = covariants(&ext, &a)?;
        let run = tate_algorithm(&ext, &eq)?;
        Ok((run.result, ext.residue_field().clone()))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchEntry {
    pub name: String,
    pub value_k: Value,
    pub value_k_prime: Value,
    pub matched: bool,
    pub unsupported: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwistEcho {
    pub kind: &'static str,
    pub param: String,
    pub r: i64,
    pub disc_val: i64,
    pub conductor: i64,
    pub symbol: &'static str,
}

impl TwistEcho {
    pub fn new(chi: &QuadChar) -> TwistEcho {
        let d = &chi.datum;
        TwistEcho { kind: d.kind_name(), param: d.param_literal(), r: d.r, disc_val: d.disc_val, conductor: chi.conductor(), symbol: chi.backend() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SideResults {
    pub curve: TateResult,
    pub twist: TateResult,
    pub base_change: TateResult,
    pub w: RootNumberVerdict,
    pub w_twist: RootNumberVerdict,
    pub w_base_change: RootNumberVerdict,
    pub chi_delta: i8,
    pub chi_minus_one: i8,
    pub kt_parity: Option<u8>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchReport {
    pub p: u32,
    pub n: usize,
    pub curve: ModelLiterals,
    pub twist: TwistEcho,
    pub e_used: i64,
    pub e_floor: i64,
    pub retries: u32,
    pub deformed_curve: ModelLiterals,
    pub deformed_twist: TwistEcho,
    /// Tate data of deform(twist(E)), to compare with twist(deform(E)) = k_prime.twist.
    pub twist_then_deform: TateResult,
    pub k: SideResults,
    pub k_prime: SideResults,
    pub kt_status: &'static str,
    pub entries: Vec<MatchEntry>,
    pub all_matched: bool,
}

impl MatchReport {
    pub fn mismatches(&self) -> Vec<&MatchEntry> {
        self.entries.iter().filter(|e| !e.matched && !e.unsupported).collect()
    }
}

fn invariants(t: &TateResult) -> Value {
    json!({
        "kodaira": t.kodaira, "v_delta": t.v_delta, "v_delta_min": t.v_delta_min, "f": t.conductor_f,
        "c": t.tamagawa_c, "m": t.num_components, "reduction": t.reduction, "potential": t.potential,
        "reduced_minimal_model": t.reduced_minimal_model, "smooth_points": t.smooth_points,
    })
}

fn entry(name: &str, a: Value, b: Value) -> MatchEntry {
    MatchEntry { name: name.into(), matched: a == b, value_k: a, value_k_prime: b, unsupported: false }
}

fn verdict_entry(name: &str, a: &RootNumberVerdict, b: &RootNumberVerdict) -> MatchEntry {
    let unsupported = !a.is_supported() || !b.is_supported();
    MatchEntry { name: name.into(), value_k: json!(a.w), value_k_prime: json!(b.w), matched: !unsupported && a.w == b.w, unsupported }
}

/// K-side data that do not depend on e.
struct SourceSide {
    chi: QuadChar,
    twisted: [Laurent; 5],
    delta: Laurent,
    results: SideResults,
}

fn kt(w_bc: &RootNumberVerdict, chi_delta: i8) -> Option<u8> {
    w_bc.w.map(|w| kt_parity(w, chi_delta))
}

fn source_side(curve: &CurveInput, datum: &TwistDatum) -> Result<SourceSide> {
    let f = curve.source_field();
    let k = &curve.field;
    let chi = QuadChar::new(datum)?;
    let twisted = twist_exact(&curve.a, datum)?;
    let delta = curve.discriminant();

    let (tate_e, eq) = tate_adaptive(&f, |r| Ok(curve.materialize(&r.field, r.prec)))?;
    let (tate_tw, _) = tate_adaptive(&f, |r| {
        // the generic twist formula must reproduce the exact twist
        let eq = covariants(r, &curve.materialize(&r.field, r.prec))?;
        let tw = twist_equation(r, &eq, datum)?;
        let exact = twisted.clone().map(|x| x.to_element(&r.field, r.prec));
        for (x, y) in tw.a.iter().zip(&exact) {
            if !(x - y).is_bottom() {
                return Err(Error::Internal("exact and generic twist models differ".into()));
            }
        }
        Ok(exact)
    })?;
    let (tate_bc, kl) = tate_base_change(datum, |r| Ok(curve.materialize(&r.field, r.prec)))?;

    let chi_delta = chi.eval(&eq.delta)?;
    let chi_minus_one = chi.eval(&f.from_int(-1, 8))?;
    let w_bc = root_number(&kl, &tate_bc)?;
    let results = SideResults {
        w: root_number(k, &tate_e)?,
        w_twist: root_number(k, &tate_tw)?,
        kt_parity: kt(&w_bc, chi_delta),
        w_base_change: w_bc,
        curve: tate_e,
        twist: tate_tw,
        base_change: tate_bc,
        chi_delta,
        chi_minus_one,
    };
    Ok(SourceSide { chi, twisted, delta, results })
}

/// One full comparison at a fixed deformation level.
fn attempt(curve: &CurveInput, src: &SourceSide, e: i64) -> Result<MatchReport> {
    let k = &curve.field;
    let v_delta = src.delta.valuation().ok_or(Error::SingularEquation)?;
    let ctx = build_ctx(&curve.source_field(), v_delta, &src.chi, Some(e))?;
    let kp = &ctx.target;

    let a_prime = deform_equation(&ctx, curve)?;
    let (datum_prime, chi_prime) = deform_quadratic(&ctx, &src.chi)?;
    let twisted_prime = deform_coefficients(&ctx, &src.twisted)?;

    let lift_model = |a: &[Laurent; 5]| {
        let a = a.clone();
        move |r: &LocalRing| Ok(a.clone().map(|x| x.to_element(&r.field, r.prec)))
    };
    let (tate_e, eq) = tate_adaptive(kp, lift_model(&a_prime))?;
    if tate_e.v_delta != v_delta {
        return Err(Error::DeltaValuationMismatch { source_val: v_delta, target_val: tate_e.v_delta });
    }
    let (tate_tw, _) = tate_adaptive(kp, |r| {
        let eq = covariants(r, &a_prime.clone().map(|x| x.to_element(&r.field, r.prec)))?;
        Ok(twist_equation(r, &eq, &datum_prime)?.a)
    })?;
    let (tate_tw_then_def, _) = tate_adaptive(kp, lift_model(&twisted_prime))?;
    let (tate_bc, kl) = tate_base_change(&datum_prime, lift_model(&a_prime))?;

    let transport = check_char_transport(&ctx, &src.chi, &chi_prime, &src.delta.to_element(&ctx.source, v_delta + e + 1), &eq.delta)?;
    let chi_minus_one = chi_prime.eval(&kp.from_int(-1, e + 1))?;
    let w_bc = root_number(&kl, &tate_bc)?;
    let side = SideResults {
        w: root_number(k, &tate_e)?,
        w_twist: root_number(k, &tate_tw)?,
        kt_parity: kt(&w_bc, transport.chi_prime_delta_prime),
        w_base_change: w_bc,
        curve: tate_e,
        twist: tate_tw,
        base_change: tate_bc,
        chi_delta: transport.chi_prime_delta_prime,
        chi_minus_one,
    };

    let s = &src.results;
    let mut entries = Vec::new();
    for key in ["v_delta", "v_delta_min", "kodaira", "f", "c", "m", "reduction", "potential", "reduced_minimal_model", "smooth_points"] {
        let (a, b) = (invariants(&s.curve), invariants(&side.curve));
        entries.push(entry(key, a[key].clone(), b[key].clone()));
    }
    entries.push(entry("disc_val", json!(src.chi.datum.disc_val), json!(datum_prime.disc_val)));
    entries.push(entry("delta_class", json!(transport.xi_delta), json!(transport.delta_prime)));
    entries.push(entry("chi_delta", json!(s.chi_delta), json!(side.chi_delta)));
    entries.push(entry("chi_minus_one", json!(s.chi_minus_one), json!(side.chi_minus_one)));
    if let TwistKind::MixedCharQuadratic(MixedParam::SqrtD { d }) = &datum_prime.kind {
        let direct = TameSymbol::new(kp, d)?.eval(&eq.delta)?;
        entries.push(entry("chi_prime_direct", json!(side.chi_delta), json!(direct)));
    }
    entries.push(entry("twist", invariants(&s.twist), invariants(&side.twist)));
    entries.push(entry("twist_commutation", invariants(&tate_tw_then_def), invariants(&side.twist)));
    entries.push(entry("base_change", invariants(&s.base_change), invariants(&side.base_change)));
    entries.push(verdict_entry("w", &s.w, &side.w));
    entries.push(verdict_entry("w_twist", &s.w_twist, &side.w_twist));
    entries.push(verdict_entry("w_base_change", &s.w_base_change, &side.w_base_change));
    let identity = |r: &SideResults| match (r.w.w, r.w_twist.w, r.w_base_change.w) {
        (Some(a), Some(b), Some(c)) => Some(c == a * b * r.chi_minus_one),
        _ => None,
    };
    let (ia, ib) = (identity(s), identity(&side));
    entries.push(MatchEntry {
        name: "w_twist_identity".into(),
        value_k: json!(ia),
        value_k_prime: json!(ib),
        matched: ia == Some(true) && ib == Some(true),
        unsupported: ia.is_none() || ib.is_none(),
    });
    entries.push(MatchEntry {
        name: "kt_parity".into(),
        value_k: json!(s.kt_parity),
        value_k_prime: json!(side.kt_parity),
        matched: s.kt_parity.is_some() && s.kt_parity == side.kt_parity,
        unsupported: s.kt_parity.is_none() || side.kt_parity.is_none(),
    });

    let all_matched = entries.iter().all(|e| e.matched || e.unsupported);
    let kt_status = match (s.kt_parity, side.kt_parity) {
        (Some(a), Some(b)) if a == b => "verified",
        (Some(_), Some(_)) => "mismatch",
        _ => "verified conditionally on term transport",
    };
    Ok(MatchReport {
        p: k.p(),
        n: k.n(),
        curve: curve.literals(),
        twist: TwistEcho::new(&src.chi),
        e_used: e,
        e_floor: ctx.e_floor,
        retries: 0,
        deformed_curve: ModelLiterals::from_vec(a_prime.iter().map(|x| x.to_element(kp, e).to_literal()).collect()),
        deformed_twist: TwistEcho::new(&chi_prime),
        twist_then_deform: tate_tw_then_def,
        k: src.results.clone(),
        k_prime: side,
        kt_status,
        entries,
        all_matched,
    })
}

/// The full comparison with adaptive e.
pub fn run_match(curve: &CurveInput, datum: &TwistDatum, options: &DeformOptions) -> Result<MatchReport> {
    if datum.field != curve.source_field() {
        return Err(Error::ParentMismatch);
    }
    let src = source_side(curve, datum)?;
    let v_delta = src.delta.valuation().ok_or(Error::SingularEquation)?;
    let mut e = build_ctx(&curve.source_field(), v_delta, &src.chi, options.e_override)?.e;
    let mut retries = 0;
    loop {
        let outcome = if e > options.max_e {
            Err(Error::PrecisionCapExceeded {
                max_e: options.max_e,
                last_failure: format!("required starting level {e} exceeds the cap"),
            })
        } else {
            attempt(curve, &src, e)
        };
        let last_failure = match outcome {
            Ok(mut report) => {
                report.retries = retries;
                if report.all_matched || 2 * e > options.max_e {
                    return Ok(report);
                }
                let names: Vec<_> = report.mismatches().iter().map(|m| m.name.clone()).collect();
                format!("mismatched entries at e = {e}: {}", names.join(", "))
            }
            Err(err @ Error::PrecisionCapExceeded { .. }) => return Err(err),
            Err(err) if err.is_retryable() => format!("{err} (e = {e})"),
            Err(err) => return Err(err),
        };
        if 2 * e > options.max_e {
            return Err(Error::PrecisionCapExceeded { max_e: options.max_e, last_failure });
        }
        e *= 2;
        retries += 1;
    }
}
