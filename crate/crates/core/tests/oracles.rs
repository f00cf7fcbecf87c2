mod common;

use common::*;
use padic_deform::deform::CurveInput;
use padic_deform::gf::GFq;
use padic_deform::quadratic::{twist_exact, QuadChar};
use padic_deform::rootnum::epsilon_quadratic;
use padic_deform::sweep::random_curve;

fn characters_agree(p: u32, n: usize, count: usize, seed: u64) -> usize {
    let k = GFq::new(p, n).unwrap();
    let mut checked = 0;
    for (i, datum) in random_characters(&k, count, seed).into_iter().enumerate() {
        let chi = QuadChar::new(&datum).unwrap();
        let rep = check_character(&chi, 50, 50, seed + i as u64);
        assert!(rep.disagreements.is_empty(), "{} {}: {:?}", datum.kind_name(), datum.param_literal(), rep.disagreements);
        assert!(rep.norms_checked >= 50 && rep.elements_checked >= 50);
        checked += 1;
        if i % 3 == 0 {
            let chi2 = transported(&chi, 1 + i as i64 % 3);
            let rep = check_character(&chi2, 50, 50, seed + 1000 + i as u64);
            assert!(rep.disagreements.is_empty(), "transported {}: {:?}", datum.param_literal(), rep.disagreements);
            checked += 1;
        }
    }
    checked
}

#[test]
fn characters_match_norm_groups_p2() {
    assert!(characters_agree(2, 1, 14, 1) + characters_agree(2, 2, 8, 2) >= 20);
}

#[test]
fn characters_match_norm_groups_p3() {
    assert!(characters_agree(3, 1, 12, 3) + characters_agree(3, 2, 10, 4) >= 20);
}

#[test]
fn characters_match_norm_groups_p5() {
    assert!(characters_agree(5, 1, 14, 5) + characters_agree(5, 2, 8, 6) >= 20);
}

#[test]
fn kodaira_types_match_valuation_table() {
    for (p, n) in [(5, 1), (7, 1), (5, 2), (11, 1)] {
        let k = GFq::new(p, n).unwrap();
        let mut r = rng(p as u64 * 10 + n as u64);
        for _ in 0..120 {
            let c = random_curve(&mut r, &k);
            let t = c.tate().unwrap();
            let (sym, vdm, f) = kodaira_oracle(&k, &c.a);
            assert_eq!((t.kodaira.to_string(), t.v_delta_min, t.conductor_f), (sym, vdm, f), "{:?}", c.a);
        }
    }
}

#[test]
fn twisted_kodaira_types_match_valuation_table() {
    let k = GFq::new(7, 1).unwrap();
    let mut r = rng(77);
    for i in 0..60 {
        let c = random_curve(&mut r, &k);
        let datum = &random_characters(&k, 1, i)[0];
        let tw = CurveInput::new(&k, twist_exact(&c.a, datum).unwrap()).unwrap();
        let t = tw.tate().unwrap();
        let (sym, vdm, f) = kodaira_oracle(&k, &tw.a);
        assert_eq!((t.kodaira.to_string(), t.v_delta_min, t.conductor_f), (sym, vdm, f));
    }
}

#[test]
fn smooth_point_counts_match_enumeration() {
    for (p, n) in [(2, 1), (2, 2), (3, 1), (3, 2), (5, 1)] {
        let k = GFq::new(p, n).unwrap();
        let mut r = rng(1000 + p as u64 * 10 + n as u64);
        for _ in 0..80 {
            let c = random_curve(&mut r, &k);
            let t = c.tate().unwrap();
            assert_eq!(t.smooth_points, brute_smooth_points(&k, residue_coeffs(&k, &t)), "{:?}", c.a);
        }
    }
}

#[test]
fn gauss_sums_by_direct_summation() {
    for (p, n) in [(3, 1), (5, 1), (7, 1), (3, 2), (5, 2), (11, 1), (13, 1), (3, 3)] {
        let k = GFq::new(p, n).unwrap();
        let q = k.q() as f64;
        for u in k.codes().filter(|&u| u != 0) {
            let g = gauss_sum(&k, u);
            assert!((g.norm_sqr() - q).abs() < 1e-9, "|g|^2 for q = {q}");
            let eps = epsilon_quadratic(&k, &k.elem(u)).unwrap();
            assert!((eps - g / q.sqrt()).norm() < 1e-9, "normalized sum for q = {q}, u = {u}");
            let nu_minus_one = k.quadratic_residue(k.neg(1)).unwrap() as f64;
            assert!((eps * eps - nu_minus_one).norm() < 1e-9);
        }
    }
}

#[test]
fn norm_oracle_rejects_the_wrong_character() {
    for (p, n) in [(2, 1), (2, 2), (3, 1), (5, 1)] {
        let k = GFq::new(p, n).unwrap();
        let data = random_characters(&k, 12, 99);
        let mut distinguished = 0;
        for w in data.windows(2) {
            let a = QuadChar::new(&w[0]).unwrap();
            let b = QuadChar::new(&w[1]).unwrap();
            let oracle = NormOracle::new(&w[0], a.conductor(), 50, 7);
            let mut r = rng(3);
            let differs = (0..200).any(|_| {
                let x = random_element(&mut r, &w[0].field, -3..=3, a.conductor().max(b.conductor()).max(1) + 3);
                b.eval(&x).unwrap() != oracle.chi(&x)
            });
            if w[0].param_literal() != w[1].param_literal() {
                distinguished += usize::from(differs);
            }
        }
        assert!(distinguished >= 5, "p = {p}, n = {n}: only {distinguished} pairs distinguished");
    }
}
