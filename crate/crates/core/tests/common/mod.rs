//! Independent oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use padic_deform::curves::TateResult;
use padic_deform::deform::{build_ctx, deform_quadratic};
use padic_deform::gf::GFq;
use padic_deform::laurent::Laurent;
use padic_deform::literal::parse_integral;
use padic_deform::localfield::{LFElement, LocalField};
use padic_deform::quadratic::{QuadChar, TwistDatum};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random unit of O_K known to relative precision `rel`.
pub fn random_unit(rng: &mut impl Rng, f: &LocalField, rel: i64) -> LFElement {
    let q = f.residue_field().q();
    let mut d: Vec<u32> = (0..rel).map(|_| rng.random_range(0..q)).collect();
    d[0] = rng.random_range(1..q);
    f.from_digits(&d, 0, rel)
}

pub fn random_element(rng: &mut impl Rng, f: &LocalField, vals: std::ops::RangeInclusive<i64>, rel: i64) -> LFElement {
    let m = rng.random_range(vals);
    random_unit(rng, f, rel).mul_pi_pow(m)
}

// ---------------------------------------------------------------------------
// Norm-group oracle

type Key = (i64, Vec<u32>);

/// K^x / (U^c pi^(2Z)) with the subgroup generated by sampled norms from the
/// quadratic extension. Local class field theory says the norm group has
/// index 2 and contains U^c; both facts are checked, not assumed.
pub struct NormOracle {
    level: i64,
    subgroup: HashMap<Key, ()>,
    pub norms: Vec<LFElement>,
    pub group_order: usize,
}

fn key(x: &LFElement, level: i64) -> Key {
    let m = x.valuation().expect("nonzero");
    let u = x.unit_part().expect("unit part");
    (m.rem_euclid(2), u.reduce_mod(level).expect("known to level").digits().to_vec())
}

impl NormOracle {
    /// Sample `count` norms N(a + b theta) = a^2 + s a b + n b^2 of random elements of O_L.
    pub fn new(datum: &TwistDatum, conductor: i64, count: usize, seed: u64) -> NormOracle {
        let f = &datum.field;
        let q = f.residue_field().q() as usize;
        let level = conductor.max(1);
        let rel = level + 4 + 2 * datum.disc_val;
        let prec = 6 * rel + 16;
        let (s, n) = datum.defining_poly(prec);
        let mut r = rng(seed);
        let mut norms = Vec::new();
        while norms.len() < count {
            let a = random_element(&mut r, f, 0..=2, rel + 8);
            let b = random_element(&mut r, f, 0..=2, rel + 8);
            let b = if r.random_range(0..4) == 0 { f.zero(prec) } else { b };
            let nm = &(&(&a * &a) + &(&(&s * &a) * &b)) + &(&(&b * &b) * &n);
            if nm.valuation().is_some() && nm.rel_precision() >= level {
                norms.push(nm);
            }
        }
        // closure of the norm images under multiplication
        let group_order = 2 * (q - 1) * q.pow((level - 1) as u32);
        let gens: Vec<LFElement> = norms.iter().map(|x| x.unit_part().unwrap().mul_pi_pow(x.valuation().unwrap().rem_euclid(2))).collect();
        let one = f.one(level + 2);
        let mut subgroup = HashMap::new();
        subgroup.insert(key(&one, level), ());
        let mut queue = VecDeque::from([one]);
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let mut y = (&x * g).truncate(level + 4);
                // reduce the parity of the valuation: pi^2 is a norm
                let v = y.valuation().unwrap();
                if v >= 2 {
                    y = y.mul_pi_pow(-(v - v.rem_euclid(2)));
                }
                let k = key(&y, level);
                if subgroup.insert(k, ()).is_none() {
                    queue.push_back(y);
                }
            }
        }
        NormOracle { level, subgroup, norms, group_order }
    }

    pub fn index(&self) -> usize {
        self.group_order / self.subgroup.len()
    }

    pub fn is_norm(&self, x: &LFElement) -> bool {
        self.subgroup.contains_key(&key(x, self.level))
    }

    pub fn chi(&self, x: &LFElement) -> i8 {
        if self.is_norm(x) { 1 } else { -1 }
    }
}

/// The outcome of comparing a character against the norm oracle.
#[derive(Debug, Default)]
pub struct CharReport {
    pub norms_checked: usize,
    pub elements_checked: usize,
    pub disagreements: Vec<String>,
}

pub fn check_character(chi: &QuadChar, norms: usize, elements: usize, seed: u64) -> CharReport {
    let oracle = NormOracle::new(&chi.datum, chi.conductor(), norms, seed);
    let mut rep = CharReport::default();
    if oracle.index() != 2 {
        rep.disagreements.push(format!("norm subgroup has index {} (expected 2)", oracle.index()));
        return rep;
    }
    for n in &oracle.norms {
        rep.norms_checked += 1;
        match chi.eval(n) {
            Ok(1) => {}
            other => rep.disagreements.push(format!("norm {} gives {:?}", n.to_literal(), other)),
        }
    }
    let f = &chi.datum.field;
    let mut r = rng(seed ^ 0x5eed);
    for _ in 0..elements {
        let x = random_element(&mut r, f, -3..=3, chi.conductor().max(1) + 3);
        rep.elements_checked += 1;
        let got = chi.eval(&x);
        if got != Ok(oracle.chi(&x)) {
            rep.disagreements.push(format!("chi({}) = {:?}, oracle {}", x.to_literal(), got, oracle.chi(&x)));
        }
    }
    rep
}

/// Random normalized data for the character oracle, as in the sweep generator.
pub fn random_characters(k: &GFq, count: usize, seed: u64) -> Vec<TwistDatum> {
    let f = LocalField::equal_char(k.clone());
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let q = k.q();
        let datum = if k.p() == 2 {
            let low = -r.random_range(0..=7i64);
            let len = r.random_range(1..=4);
            let d: Vec<u32> = (0..len).map(|_| r.random_range(0..q)).collect();
            TwistDatum::artin_schreier(&f, &Laurent::new(k, low, d))
        } else {
            let len = r.random_range(1..=3);
            let d: Vec<u32> = (0..len).map(|_| r.random_range(0..q)).collect();
            TwistDatum::sqrt_d(&f, &Laurent::new(k, r.random_range(0..=1), d))
        };
        if let Ok(d) = datum {
            out.push(d);
        }
    }
    out
}

/// The character transported to the deformed field at the level run_match would start from.
pub fn transported(chi: &QuadChar, v_delta: i64) -> QuadChar {
    let ctx = build_ctx(&chi.datum.field, v_delta, chi, None).unwrap();
    deform_quadratic(&ctx, chi).unwrap().1
}

// ---------------------------------------------------------------------------
// Kodaira oracle for p >= 5 from valuations of c4, c6 and the discriminant.

pub fn exact_c4_c6_delta(k: &GFq, a: &[Laurent; 5]) -> (Laurent, Laurent, Laurent) {
    let c = |n: i64| Laurent::constant(k, k.from_int(n).code());
    let [a1, a2, a3, a4, a6] = a;
    let b2 = a1.mul(a1).add(&c(4).mul(a2));
    let b4 = c(2).mul(a4).add(&a1.mul(a3));
    let b6 = a3.mul(a3).add(&c(4).mul(a6));
    let c4 = b2.mul(&b2).sub(&c(24).mul(&b4));
    let c6 = b2.pow(3).neg().add(&c(36).mul(&b2).mul(&b4)).sub(&c(216).mul(&b6));
    // 1728 Delta = c4^3 - c6^2, and 1728 is invertible for p >= 5
    let d = c4.pow(3).sub(&c6.mul(&c6));
    let inv = k.inv(k.from_int(1728).code()).unwrap();
    (c4, c6, d.scale(inv))
}

fn val(x: &Laurent) -> i64 {
    x.valuation().unwrap_or(i64::MAX / 4)
}

/// (Kodaira symbol, v(Delta_min), f) for p >= 5.
pub fn kodaira_oracle(k: &GFq, a: &[Laurent; 5]) -> (String, i64, i64) {
    assert!(k.p() >= 5);
    let (c4, c6, d) = exact_c4_c6_delta(k, a);
    let (mut v4, mut v6, mut vd) = (val(&c4), val(&c6), val(&d));
    while v4 >= 4 && v6 >= 6 && vd >= 12 {
        v4 -= 4;
        v6 -= 6;
        vd -= 12;
    }
    let (sym, f) = if vd == 0 {
        ("I0".to_string(), 0)
    } else if v4 == 0 {
        (format!("I{vd}"), 1)
    } else if v4 == 2 && v6 == 3 && vd > 6 {
        (format!("I{}*", vd - 6), 2)
    } else {
        let s = match vd {
            2 => "II",
            3 => "III",
            4 => "IV",
            6 => "I0*",
            8 => "IV*",
            9 => "III*",
            10 => "II*",
            _ => panic!("impossible v(Delta_min) = {vd} for additive potentially good reduction"),
        };
        (s.to_string(), 2)
    };
    (sym, vd, f)
}

// ---------------------------------------------------------------------------
// Point counts on the reduced minimal model by brute force.

pub fn residue_coeffs(k: &GFq, t: &TateResult) -> [u32; 5] {
    let m = &t.reduced_minimal_model;
    [&m.a1, &m.a2, &m.a3, &m.a4, &m.a6].map(|s| parse_integral(k, s).unwrap().coeff(0))
}

/// Nonsingular points of the projective cubic, counted by enumerating F_q^2
/// and testing both partial derivatives; the point at infinity is always smooth.
pub fn brute_smooth_points(k: &GFq, a: [u32; 5]) -> u64 {
    let [a1, a2, a3, a4, a6] = a;
    let mut count = 1;
    for x in k.codes() {
        for y in k.codes() {
            let x2 = k.mul(x, x);
            let lhs = k.add(k.mul(y, y), k.add(k.mul(a1, k.mul(x, y)), k.mul(a3, y)));
            let rhs = k.add(k.add(k.mul(x2, x), k.mul(a2, x2)), k.add(k.mul(a4, x), a6));
            if lhs != rhs {
                continue;
            }
            let three = k.from_int(3).code();
            let two = k.from_int(2).code();
            let fx = k.sub(k.mul(a1, y), k.add(k.add(k.mul(three, x2), k.mul(two, k.mul(a2, x))), a4));
            let fy = k.add(k.add(k.mul(two, y), k.mul(a1, x)), a3);
            if fx != 0 || fy != 0 {
                count += 1;
            }
        }
    }
    count
}

// ---------------------------------------------------------------------------
// Gauss sums by direct summation.

/// sum over x != 0 of nu(x) psi(Tr(u x)), nu the quadratic character.
pub fn gauss_sum(k: &GFq, u: u32) -> Complex64 {
    let p = k.p() as f64;
    k.codes()
        .filter(|&x| x != 0)
        .map(|x| {
            let nu = k.quadratic_residue(x).unwrap() as f64;
            let tr = k.trace(k.mul(u, x)) as f64;
            Complex64::from_polar(nu, 2.0 * std::f64::consts::PI * tr / p)
        })
        .sum()
}
