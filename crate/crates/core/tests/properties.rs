mod common;

use proptest::prelude::*;
use proptest::test_runner::FileFailurePersistence;

use common::{random_characters, random_element, random_unit, rng};
use padic_deform::deform::{run_match, CurveInput, DeformOptions};
use padic_deform::gf::GFq;
use padic_deform::quadratic::{twist_exact, QuadChar};
use padic_deform::sweep::sweep_case;

fn field_strategy() -> impl Strategy<Value = (u32, usize)> {
    prop_oneof![Just((2, 1)), Just((2, 2)), Just((3, 1)), Just((3, 2)), Just((5, 1))]
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        failure_persistence: Some(Box::new(FileFailurePersistence::WithSource("regressions"))),
        ..ProptestConfig::default()
    })]

    /// Matching at e_used is stable when the level is doubled.
    #[test]
    fn stable_at_double_level((p, n) in field_strategy(), seed in 0u64..1000, index in 0u64..50) {
        let k = GFq::new(p, n).unwrap();
        let (curve, datum) = sweep_case(&k, seed, index);
        let opts = DeformOptions::default();
        let first = run_match(&curve, &datum, &opts).unwrap();
        prop_assert!(first.all_matched);
        let doubled = DeformOptions { e_override: Some(2 * first.e_used), ..opts };
        let second = run_match(&curve, &datum, &doubled).unwrap();
        prop_assert!(second.all_matched);
        prop_assert_eq!(second.e_used, 2 * first.e_used);
        let values = |r: &padic_deform::deform::MatchReport| {
            r.entries.iter().map(|e| (e.name.clone(), e.value_k_prime.clone())).collect::<Vec<_>>()
        };
        prop_assert_eq!(values(&first), values(&second));
    }

    /// Twisting twice by the same character gives back the invariants of E.
    #[test]
    fn double_twist_is_trivial((p, n) in field_strategy(), seed in 0u64..1000, index in 0u64..50) {
        let k = GFq::new(p, n).unwrap();
        let (curve, datum) = sweep_case(&k, seed, index);
        let once = twist_exact(&curve.a, &datum).unwrap();
        let twice = CurveInput::new(&k, twist_exact(&once, &datum).unwrap()).unwrap();
        let (a, b) = (curve.tate().unwrap(), twice.tate().unwrap());
        // isomorphism invariants only: model literals and v(Delta) of the model may change
        let inv = |t: &padic_deform::curves::TateResult| {
            (t.kodaira, t.v_delta_min, t.conductor_f, t.tamagawa_c, t.num_components, t.reduction, t.potential, t.smooth_points)
        };
        prop_assert_eq!(inv(&a), inv(&b));
    }

    /// chi(x u) = chi(x) for u in U^c.
    #[test]
    fn character_is_trivial_on_conductor_units((p, n) in field_strategy(), seed in 0u64..10_000) {
        let k = GFq::new(p, n).unwrap();
        let datum = random_characters(&k, 1, seed).pop().unwrap();
        let chi = QuadChar::new(&datum).unwrap();
        let c = chi.conductor().max(1);
        let f = &datum.field;
        let mut r = rng(seed);
        for _ in 0..20 {
            let x = random_element(&mut r, f, -4..=4, c + 6);
            // u = 1 + pi^c * (random integral element)
            let y = random_unit(&mut r, f, 6).mul_pi_pow(c);
            let u = &f.one(c + 6) + &y;
            prop_assert_eq!(chi.eval(&x).unwrap(), chi.eval(&(&x * &u)).unwrap());
        }
    }
}
