//! Built-in checks: worked examples with known values, plus oracle
//! comparisons that are cheap enough to run on every invocation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curves::{Kodaira, Reduction};
use crate::deform::{run_match, CurveInput, DeformOptions};
use crate::error::Result;
use crate::gf::GFq;
use crate::literal::{parse_curve, parse_laurent};
use crate::localfield::{LocalField, TripleIso, TruncClass};
use crate::quadratic::TwistDatum;
use crate::rootnum::{root_number, tame_gauss_oracle, tame_table};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Number of failed identities among `pairs` random pairs for phi at level e:
/// additivity, multiplicativity, phi(1) = 1, and phi^-1 o phi = id.
pub fn phi_ring_hom_failures(k: &GFq, e: i64, pairs: usize, seed: u64) -> Result<usize> {
    let iso = TripleIso::new(k, e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((k.q() as u64) << 32) ^ e as u64);
    let random = |rng: &mut ChaCha8Rng| {
        let d: Vec<u32> = (0..e).map(|_| rng.random_range(0..k.q())).collect();
        TruncClass::new(iso.source(), e, &d)
    };
    let one = TruncClass::new(iso.source(), e, &[1]);
    let mut failures = usize::from(iso.phi_apply(&one)? != TruncClass::new(iso.target(), e, &[1]));
    for _ in 0..pairs {
        let a = random(&mut rng);
        let b = random(&mut rng);
        let (pa, pb) = (iso.phi_apply(&a)?, iso.phi_apply(&b)?);
        let ok = iso.phi_apply(&a.add(&b)?)? == pa.add(&pb)?
            && iso.phi_apply(&a.mul(&b)?)? == pa.mul(&pb)?
            && iso.phi_inverse(&pa)? == a;
        failures += usize::from(!ok);
    }
    Ok(failures)
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn curve(p: u32, n: usize, spec: &str) -> Result<CurveInput> {
    let k = GFq::new(p, n)?;
    let a = parse_curve(&k, spec)?;
    CurveInput::new(&k, a)
}

pub fn run_all() -> Vec<Check> {
    vec![
        check("witt_ring_relation", || {
            // In W(F_2)[T]/(T^4 - 2) the uniformizer satisfies T^4 = 2, and v(2) = 4.
            let f = LocalField::mixed_char(GFq::new(2, 1)?, 4)?;
            let t4 = f.uniformizer_pow(1, 20).pow(4);
            let two = f.from_int(2, 20);
            Ok((t4.truncate(two.precision()) == two && two.valuation() == Some(4), format!("T^4 = {}, v(2) = {:?}", t4.to_literal(), two.valuation())))
        }),
        check("truncated_ring_isomorphism", || {
            let k = GFq::new(2, 1)?;
            let iso = TripleIso::new(&k, 4)?;
            let t = iso.phi_apply(&TruncClass::new(iso.source(), 4, &[0, 1]))?;
            let maps_t = t == TruncClass::new(iso.target(), 4, &[0, 1]);
            let failures = phi_ring_hom_failures(&k, 4, 200, 1)?;
            Ok((maps_t && failures == 0, format!("phi(t) = {t}; {failures} failures on 200 pairs")))
        }),
        check("normalized_gamma_discriminant", || {
            let k = GFq::new(2, 1)?;
            let f = LocalField::equal_char(k.clone());
            let d = TwistDatum::artin_schreier(&f, &parse_laurent(&k, "1/t^4")?)?;
            let c = curve(2, 1, "1,0,0,0,t")?;
            let report = run_match(&c, &d, &DeformOptions::default())?;
            let ok = d.param_literal() == "1/t"
                && d.disc_val == 2
                && report.deformed_twist.disc_val == 2
                && report.all_matched;
            Ok((ok, format!("gamma -> {}, disc_val {} / {}", d.param_literal(), d.disc_val, report.deformed_twist.disc_val)))
        }),
        check("split_multiplicative_root_number", || {
            let c = curve(2, 1, "1,0,0,0,t")?;
            let t = c.tate()?;
            let w = root_number(&c.field, &t)?.w;
            Ok((t.reduction == Reduction::MultSplit && w == Some(-1), format!("{} {:?}, w = {w:?}", t.kodaira, t.reduction)))
        }),
        check("nonsplit_multiplicative_root_number", || {
            let c = curve(2, 1, "1,1,0,0,t")?;
            let t = c.tate()?;
            let w = root_number(&c.field, &t)?.w;
            Ok((t.reduction == Reduction::MultNonsplit && w == Some(1), format!("{} {:?}, w = {w:?}", t.kodaira, t.reduction)))
        }),
        check("good_reduction_tate", || {
            let c = curve(5, 1, "0,0,0,1,1")?;
            let t = c.tate()?;
            let w = root_number(&c.field, &t)?.w;
            Ok((t.kodaira == Kodaira::I0 && t.conductor_f == 0 && w == Some(1), format!("{} f={} w={w:?}", t.kodaira, t.conductor_f)))
        }),
        check("tame_root_numbers_vs_gauss_sums", || {
            let mut bad = Vec::new();
            for (p, n) in [(5, 1), (7, 1), (11, 1), (13, 1), (3, 2)] {
                let k = GFq::new(p, n)?;
                for e in [2, 3, 4, 6] {
                    if p == 3 && e % 3 == 0 {
                        continue;
                    }
                    if tame_table(&k, e)? != tame_gauss_oracle(&k, e)? {
                        bad.push(format!("q={} e={e}", k.q()));
                    }
                }
            }
            Ok((bad.is_empty(), if bad.is_empty() { "all agree".into() } else { bad.join(", ") }))
        }),
        check("flagship_deformation", || {
            let k = GFq::new(2, 1)?;
            let f = LocalField::equal_char(k.clone());
            let d = TwistDatum::artin_schreier(&f, &parse_laurent(&k, "1/t")?)?;
            let report = run_match(&curve(2, 1, "1,0,0,0,t")?, &d, &DeformOptions::default())?;
            Ok((report.all_matched, format!("e_used = {}, {} entries", report.e_used, report.entries.len())))
        }),
        check("odd_twist_deformation", || {
            let k = GFq::new(5, 1)?;
            let f = LocalField::equal_char(k.clone());
            let d = TwistDatum::sqrt_d(&f, &parse_laurent(&k, "t")?)?;
            let report = run_match(&curve(5, 1, "0,0,0,t,1+t^2")?, &d, &DeformOptions::default())?;
            Ok((report.all_matched, format!("e_used = {}", report.e_used)))
        }),
    ]
}
