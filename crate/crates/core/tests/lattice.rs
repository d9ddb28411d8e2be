mod support;

use mesoheat_core::analysis::parity_check;
use mesoheat_core::rational::ratio;
use mesoheat_core::{amplification_factor, LatticeField, Rational, Stencil};
use proptest::prelude::*;
use support::{naive_ring, q, trinomial_kernel};

fn p_strategy() -> impl Strategy<Value = Rational> {
    (1i64..=12).prop_map(|n| ratio(n, 24))
}

fn ring_values() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((0i64..40, 1i64..6).prop_map(|(n, d)| ratio(n, d)), 3..24)
}

#[test]
fn delta_matches_trinomial_kernel() {
    for (num, den) in [(1, 3), (1, 4), (1, 2), (1, 7)] {
        let p = q(num, den);
        let stencil = Stencil::new(p.clone()).unwrap();
        for r in 0..12 {
            let field = LatticeField::<Rational>::delta_line().evolve(&stencil, r as u64);
            assert_eq!(field.window(-(r as i64), r as i64), trinomial_kernel(&p, r), "p = {p}, r = {r}");
        }
    }
}

#[test]
fn float_ring_matches_naive_loop() {
    let values: Vec<f64> = (0..40).map(|i| ((i * 13) % 7) as f64 / 3.0).collect();
    let stencil = Stencil::one_third();
    let fast = LatticeField::ring(values.clone()).unwrap().evolve(&stencil, 300);
    let slow = naive_ring(&values, 1.0 / 3.0, 300);
    for (a, b) in fast.values().iter().zip(&slow) {
        assert!((a - b).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_conserves_heat_exactly(values in ring_values(), p in p_strategy(), steps in 0u64..40) {
        let stencil = Stencil::new(p).unwrap();
        let field = LatticeField::ring(values).unwrap();
        prop_assert_eq!(field.evolve(&stencil, steps).total_heat(), field.total_heat());
    }

    #[test]
    fn maximum_principle(values in ring_values(), p in p_strategy(), steps in 0u64..40) {
        let stencil = Stencil::new(p).unwrap();
        let field = LatticeField::ring(values).unwrap();
        let out = field.evolve(&stencil, steps);
        prop_assert!(out.ensure_non_negative().is_ok());
        prop_assert!(out.max_value() <= field.max_value());
        prop_assert!(out.min_value() >= field.min_value());
    }

    #[test]
    fn mirror_commutes_with_evolution(values in ring_values(), p in p_strategy(), steps in 0u64..20) {
        let stencil = Stencil::new(p).unwrap();
        let field = LatticeField::ring(values.clone()).unwrap();
        prop_assert_eq!(field.mirror().evolve(&stencil, steps), field.evolve(&stencil, steps).mirror());
        let ok = parity_check(
            |u: &[Rational]| LatticeField::ring(u.to_vec()).unwrap().evolve(&stencil, steps).values().to_vec(),
            &values,
        );
        prop_assert!(ok);
    }

    #[test]
    fn support_grows_one_cell_per_step(p in p_strategy(), steps in 0u64..30, width in 0i64..4) {
        let stencil = Stencil::new(p).unwrap();
        let values = vec![ratio(1, 1); width as usize + 1];
        let field = LatticeField::line(values, -width / 2);
        let (lo, hi) = field.support().unwrap();
        let out = field.evolve(&stencil, steps);
        let (lo2, hi2) = out.support().unwrap();
        prop_assert!(lo2 >= lo - steps as i64 && hi2 <= hi + steps as i64);
        prop_assert_eq!(out.value_at(hi + steps as i64 + 1), ratio(0, 1));
    }

    #[test]
    fn symbol_is_dissipative(p in p_strategy(), theta in -3.2f64..3.2) {
        let g = amplification_factor(&Stencil::new(p).unwrap(), theta);
        prop_assert!(g.abs() <= 1.0 + 1e-15);
    }

    #[test]
    fn convolution_and_fourier_routes_agree(values in ring_values(), p in p_strategy(), steps in 0u64..60) {
        let stencil = Stencil::new(p).unwrap();
        let field = LatticeField::ring(values).unwrap();
        let direct = field.evolve(&stencil, steps).to_f64();
        let spectral = field.to_f64().exact_evolve_ring(&stencil, steps).unwrap();
        let scale = direct.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in direct.values().iter().zip(spectral.values()) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }
}
