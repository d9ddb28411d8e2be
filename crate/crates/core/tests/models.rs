use mesoheat_core::models::fourth_derivative_prefactor;
use mesoheat_core::rational::{integer, ratio};
use mesoheat_core::{
    derive_hierarchy, dimensionless_params, dispersion_roots, nondimensionalize, predicted_speed, redimensionalize,
    Error, LinearPDE, MicroParams, ScaleSpec, SpeedSource, Stencil,
};
use proptest::prelude::*;

fn scales(n1: i64, n2: i64, x_a: (i64, i64), t_a: (i64, i64), l: (i64, i64), t: (i64, i64)) -> mesoheat_core::Result<ScaleSpec> {
    let micro = MicroParams::new(ratio(x_a.0, x_a.1), ratio(t_a.0, t_a.1))?;
    let dx = integer(n1) * micro.x_a();
    let dt = integer(n2) * micro.t_a();
    ScaleSpec::new(micro, dx, dt, ratio(l.0, l.1), ratio(t.0, t.1), false)
}

#[test]
fn parabolic_models_have_no_finite_speed() {
    let err = predicted_speed(SpeedSource::Pde(&LinearPDE::heat(integer(1)).unwrap())).unwrap_err();
    assert!(matches!(err, Error::InfiniteSpeed));
    assert!(err.to_string().contains("infinite speed"));
    let v = predicted_speed(SpeedSource::Pde(&LinearPDE::telegraph(ratio(1, 4), integer(1)).unwrap())).unwrap();
    assert!((v.value - 2.0).abs() < 1e-15);
}

#[test]
fn epsilon_relation_at_matched_time_scale() {
    // With T* = L*^2/(3D) the two small parameters satisfy ε1 = (3/2) D̄ ε2.
    let s = scales(10, 100, (1, 100), (1, 30000), (2, 1), (4, 3)).unwrap();
    let m = dimensionless_params(&s, &integer(1)).unwrap();
    assert_eq!(m.eps1, ratio(3, 2) * &m.d_bar * &m.eps2);
}

#[test]
fn level_one_prefactor_is_one_twelfth() {
    let s = scales(10, 100, (1, 100), (1, 30000), (3, 1), (7, 10)).unwrap();
    let pde = derive_hierarchy(&Stencil::one_third(), 1).unwrap().to_linear(&s.dx, &s.dt).unwrap();
    let (model, barred) = nondimensionalize(&pde, &s).unwrap();
    assert_eq!(fourth_derivative_prefactor(&barred, &model), ratio(1, 12));
    assert_eq!(barred.c_tt(), &model.eps1);
}

#[test]
fn fractional_ratios_rejected_unless_allowed() {
    let micro = MicroParams::new(ratio(1, 100), ratio(1, 100)).unwrap();
    let bad = ScaleSpec::new(micro.clone(), ratio(1, 40), ratio(1, 10), integer(1), integer(1), false);
    assert!(matches!(bad, Err(Error::InvalidScales(_))));
    assert!(ScaleSpec::new(micro, ratio(1, 40), ratio(1, 10), integer(1), integer(1), true).is_ok());
}

#[test]
fn pde_json_round_trip() {
    let pde = LinearPDE::fourth_order(ratio(1, 600), integer(1), ratio(1, 1200)).unwrap();
    let text = serde_json::to_string(&pde).unwrap();
    assert!(text.contains("\"1/600\""));
    let back: LinearPDE = serde_json::from_str(&text).unwrap();
    assert_eq!(back, pde);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn telegraph_modes_decay(tau in 1e-4f64..10.0, d in 1e-3f64..10.0, k in 0.0f64..500.0) {
        let c = LinearPDE::telegraph(
            mesoheat_core::rational::from_f64(tau).unwrap(),
            mesoheat_core::rational::from_f64(d).unwrap(),
        ).unwrap().to_f64();
        let disp = dispersion_roots(&c, k);
        prop_assert!(!disp.unstable);
        prop_assert!(disp.roots.iter().all(|s| s.re <= 1e-12 * (1.0 + s.norm())));
    }

    #[test]
    fn fourth_order_unstable_exactly_past_threshold(d2_milli in 1i64..1000, k in 0.0f64..200.0) {
        let d2 = ratio(d2_milli, 1000);
        let c = LinearPDE::fourth_order(ratio(1, 100), integer(1), d2).unwrap().to_f64();
        let k2 = k * k;
        let threshold = c.c_xx / c.c_x4;
        prop_assume!((k2 - threshold).abs() > 1e-9 * threshold);
        prop_assert_eq!(dispersion_roots(&c, k).unstable, k2 > threshold);
    }

    #[test]
    fn nondimensionalisation_round_trips(
        n1 in 1i64..20, n2 in 1i64..20,
        xa in 1i64..50, ta in 1i64..50,
        l in 1i64..10, t in 1i64..10,
    ) {
        let Ok(s) = scales(n1, n2, (1, 100 * xa), (1, 100 * ta), (l, 1), (t, 1)) else {
            return Ok(());
        };
        let pde = LinearPDE::fourth_order(s.dt.clone() / integer(2), integer(3), ratio(1, 7)).unwrap();
        let (model, barred) = nondimensionalize(&pde, &s).unwrap();
        prop_assert_eq!(redimensionalize(&barred, &s).unwrap(), pde);
        prop_assert_eq!(model.eps1.clone(), s.eps1());
    }

    #[test]
    fn epsilons_are_linked_through_d_bar(
        n1 in 1i64..20, xa in 1i64..50, ta in 1i64..50, l in 1i64..10, t in 1i64..10,
    ) {
        // δt = δx²/(3D) with D = x_a²/(3 t_a) forces N2 = N1².
        let Ok(s) = scales(n1, n1 * n1, (1, 100 * xa), (1, 100 * ta), (l, 1), (t, 1)) else {
            return Ok(());
        };
        let d = mesoheat_core::diffusion_coefficient(&Stencil::one_third(), &s.micro);
        prop_assert_eq!(s.dt.clone(), &s.dx * &s.dx / (integer(3) * &d));
        let m = dimensionless_params(&s, &d).unwrap();
        prop_assert_eq!(m.eps1.clone(), &m.eps2 / (integer(6) * &m.d_bar));
    }
}
