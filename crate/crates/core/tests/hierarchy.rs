mod support;

use mesoheat_core::opcalc::{expand_mixed_to_spatial, expand_stencil, reduce_to_mixed_form, Form, ScaleSymbols};
use mesoheat_core::rational::ratio;
use mesoheat_core::{derive_hierarchy, Rational, Stencil};
use num_traits::Zero;
use proptest::prelude::*;
use support::{oracle_coefficients, q};

fn stencil(num: i64, den: i64) -> Stencil {
    Stencil::new(ratio(num, den)).unwrap()
}

/// Every derived term, evaluated at concrete scales, matches the brute-force fit.
fn check_against_oracle(p: &Rational, level: u32, dx: &Rational, dt: &Rational) {
    let pde = derive_hierarchy(&Stencil::new(p.clone()).unwrap(), level).unwrap();
    let (time, space) = oracle_coefficients(p, dx, dt, level as usize + 1, 2 * level as usize + 2);
    for term in &pde.terms {
        let want = if term.x_order == 0 {
            &time[term.t_order as usize]
        } else {
            &space[term.x_order as usize]
        };
        assert_eq!(&term.evaluate(dx, dt), want, "{} at level {level}", term.derivative_name());
    }
    // Nothing the oracle sees is missing from the derived equation, except odd space orders (zero).
    for (k, v) in space.iter().enumerate().skip(1) {
        if pde.coefficient(0, k as u32).is_none() {
            assert!(v.is_zero(), "oracle has a U_x^{k} term the hierarchy dropped");
        }
    }
}

#[test]
fn oracle_agrees_at_one_third() {
    for level in 0..=3 {
        check_against_oracle(&q(1, 3), level, &q(1, 10), &q(1, 300));
        check_against_oracle(&q(1, 3), level, &q(3, 7), &q(2, 9));
    }
}

#[test]
fn level_one_fourth_order_coefficient() {
    let pde = derive_hierarchy(&Stencil::one_third(), 1).unwrap();
    let t = pde.coefficient(0, 4).unwrap();
    assert_eq!((t.coeff.clone(), t.dt_power, t.dx_power), (q(1, 36), -1, 4));
    assert_eq!(t.fraction_coefficient(ScaleSymbols::Meso), "(δx⁴/(36δt))");
}

#[test]
fn levels_nest() {
    let s = Stencil::one_third();
    let levels: Vec<_> = (0..=4).map(|n| derive_hierarchy(&s, n).unwrap()).collect();
    for pair in levels.windows(2) {
        for term in &pair[0].terms {
            assert_eq!(pair[1].coefficient(term.t_order, term.x_order), Some(term));
        }
    }
}

#[test]
fn order_structure() {
    let s = stencil(1, 4);
    for n in 0..=4u32 {
        let pde = derive_hierarchy(&s, n).unwrap();
        assert_eq!(pde.max_time_order(), n + 1);
        assert_eq!(pde.max_space_order(), 2 * (n + 1));
        assert!(pde.is_dimensionally_homogeneous());
        assert!(pde.terms.iter().all(|t| t.x_order % 2 == 0), "odd space derivative at level {n}");
        assert!(pde.terms.iter().all(|t| t.grading() <= 2 * n as i32));
    }
}

#[test]
fn micro_symbols_change_only_rendering() {
    let s = Stencil::one_third();
    let meso = derive_hierarchy(&s, 1).unwrap();
    let micro = mesoheat_core::opcalc::derive_hierarchy_in(&s, 1, ScaleSymbols::Micro).unwrap();
    assert_eq!(meso.terms, micro.terms);
    assert!(micro.to_string().contains("x_a"));
}

#[test]
fn mixed_form_round_trip() {
    let s = Stencil::one_third();
    let spatial = derive_hierarchy(&s, 1).unwrap();
    let mixed = reduce_to_mixed_form(&spatial).unwrap();
    assert_eq!(mixed.form, Form::Mixed);
    let uxxt = mixed.coefficient(1, 2).unwrap();
    assert_eq!((uxxt.coeff.clone(), uxxt.dt_power, uxxt.dx_power), (q(1, 12), 0, 2));
    assert!(mixed.coefficient(0, 4).is_none());
    assert_eq!(expand_mixed_to_spatial(&mixed).unwrap(), spatial);
}

#[test]
fn expansion_rejects_bad_orders() {
    let s = Stencil::one_third();
    assert!(expand_stencil(&s, ScaleSymbols::Meso, 0, 4).is_err());
    assert!(expand_stencil(&s, ScaleSymbols::Meso, 2, 3).is_err());
    assert!(expand_stencil(&s, ScaleSymbols::Meso, 2, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oracle_agrees_for_any_stencil(
        p_num in 1i64..=50,
        level in 0u32..=2,
        dx_num in 1i64..20, dx_den in 1i64..20,
        dt_num in 1i64..20, dt_den in 1i64..20,
    ) {
        check_against_oracle(&q(p_num, 100), level, &q(dx_num, dx_den), &q(dt_num, dt_den));
    }

    #[test]
    fn every_level_is_homogeneous(p_num in 1i64..=50, level in 0u32..=3) {
        let pde = derive_hierarchy(&stencil(p_num, 100), level).unwrap();
        prop_assert!(pde.is_dimensionally_homogeneous());
        prop_assert!(pde.terms.iter().all(|t| t.x_order % 2 == 0));
    }
}
