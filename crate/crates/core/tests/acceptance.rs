//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod support;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mesoheat_core::opcalc::{
    compare_with_references, log_series_coeffs, operator_identity_check, printed_reference_coefficients,
    reduce_to_mixed_form, Verdict,
};
use mesoheat_core::rational::{integer, ratio};
use mesoheat_core::{
    convergence_study, derive_hierarchy, fd_heat_solve, front_speed, lattice_front_speed, negativity_scan,
    nondimensionalize, predicted_speed, CoefficientChoice, ContinuumField, InitialData, LatticeField, LinearPDE,
    MicroParams, Profile, Rational, ScaleSpec, Snapshot, SpectralOptions, SpectralSolver, SpeedSource, Stencil,
    StudyConfig,
};
use support::{oracle_coefficients, q, trinomial_kernel};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn coeff_of(pde: &mesoheat_core::ModifiedPDE, j: u32, k: u32) -> Result<&mesoheat_core::SeriesTerm, String> {
    pde.coefficient(j, k).ok_or_else(|| format!("no ∂t^{j}∂x^{k} term"))
}

fn coefficient_reproduction() -> Check {
    let pde = derive_hierarchy(&Stencil::one_third(), 1).map_err(|e| e.to_string())?;
    let utt = coeff_of(&pde, 2, 0)?;
    let uxx = coeff_of(&pde, 0, 2)?;
    ensure(
        (utt.coeff.clone(), utt.dt_power, utt.dx_power) == (ratio(1, 2), 1, 0),
        format!("U_tt coefficient {:?}", utt),
    )?;
    ensure(
        (uxx.coeff.clone(), uxx.dt_power, uxx.dx_power) == (ratio(1, 3), -1, 2),
        format!("U_xx coefficient {:?}", uxx),
    )?;
    ensure(utt.compact_coefficient(Default::default()) == "1/2·δt", "U_tt display")?;
    Ok(format!("U_tt = {}, U_xx = {}", utt.fraction_coefficient(Default::default()), uxx.fraction_coefficient(Default::default())))
}

fn coefficient_correction() -> Check {
    let stencil = Stencil::one_third();
    let pde = derive_hierarchy(&stencil, 1).map_err(|e| e.to_string())?;
    let u4 = coeff_of(&pde, 0, 4)?;
    ensure(
        (u4.coeff.clone(), u4.dt_power, u4.dx_power) == (ratio(1, 36), -1, 4),
        format!("U_xxxx coefficient {:?}", u4),
    )?;
    // (D/12) δx² with D = δx²/(3δt)
    let d_over_12 = ratio(1, 3) / integer(12);
    ensure(u4.coeff == d_over_12, "δx⁴/(36δt) != (D/12)δx²")?;

    for (dx, dt) in [(q(1, 10), q(1, 300)), (q(2, 7), q(5, 13))] {
        let (time, space) = oracle_coefficients(&q(1, 3), &dx, &dt, 3, 6);
        for term in &pde.terms {
            let expected = if term.x_order == 0 {
                &time[term.t_order as usize]
            } else {
                &space[term.x_order as usize]
            };
            ensure(
                &term.evaluate(&dx, &dt) == expected,
                format!("{} disagrees with the Taylor-fit oracle", term.derivative_name()),
            )?;
        }
    }

    let spatial = compare_with_references(&pde, &printed_reference_coefficients(&stencil));
    let factor = spatial
        .iter()
        .find(|c| c.derivative == "U_xxxx")
        .map(|c| c.verdict.clone());
    ensure(
        factor == Some(Verdict::FactorMismatch { ratio: integer(3) }),
        format!("U_xxxx annotation {factor:?}"),
    )?;
    let mixed = reduce_to_mixed_form(&pde).map_err(|e| e.to_string())?;
    let uxxt = coeff_of(&mixed, 1, 2)?;
    ensure(uxxt.coeff == ratio(1, 12) && uxxt.dx_power == 2 && uxxt.dt_power == 0, "U_xxt coefficient")?;
    let mixed_check = compare_with_references(&mixed, &printed_reference_coefficients(&stencil));
    let dim = mixed_check
        .iter()
        .find(|c| c.derivative == "U_xxt")
        .map(|c| c.verdict.clone());
    ensure(dim == Some(Verdict::DimensionalMismatch), format!("U_xxt annotation {dim:?}"))?;
    Ok("U_xxxx = δx⁴/(36δt) (oracle agrees); printed (D/36)δx² off by 3, printed U_xxt dimensionally inconsistent".into())
}

fn operator_identities() -> Check {
    let log = log_series_coeffs(8);
    for n in 1..=8i64 {
        let sign = if n % 2 == 1 { 1 } else { -1 };
        ensure(log.coefficient(n as usize) == ratio(sign, n), format!("log coefficient {n}"))?;
    }
    let report = operator_identity_check(8);
    ensure(report.holds(), "ln(1+(e^z-1)) - z is nonzero through order 8")?;
    Ok("log series [1, -1/2, 1/3, ...]; ln(1+(e^z-1)) = z through z^8".into())
}

fn exact_lattice() -> Check {
    let stencil = Stencil::one_third();
    let two = LatticeField::<Rational>::delta_line().evolve(&stencil, 2);
    let want = [q(1, 9), q(2, 9), q(3, 9), q(2, 9), q(1, 9)];
    ensure(two.window(-2, 2) == want, format!("r = 2 field {:?}", two.values()))?;
    ensure(trinomial_kernel(&q(1, 3), 2) == want, "trinomial oracle")?;

    let seed: Vec<Rational> = (0..256i64).map(|s| ratio((s * 37) % 101, 7)).collect();
    let exact = LatticeField::ring(seed.clone()).unwrap();
    let total = exact.total_heat();
    let evolved = exact.evolve(&stencil, 10_000);
    ensure(evolved.total_heat() == total, "rational ring lost heat")?;

    let float = LatticeField::ring(seed.iter().map(mesoheat_core::rational::to_f64).collect::<Vec<f64>>()).unwrap();
    let before = float.total_heat();
    let after = float.evolve(&stencil, 10_000).total_heat();
    let drift = (after - before).abs() / before.abs();
    ensure(drift <= 1e-9, format!("float drift {drift:e}"))?;
    Ok(format!("delta r=2 exact; 256-cell ring x 1e4 steps: rational exact, float drift {drift:.1e}"))
}

fn hierarchy_ordering() -> Check {
    let mut parts = Vec::new();
    // (level, coefficients, lower bound, exclusive upper bound)
    let cases = [
        (0, CoefficientChoice::Derived, 2.0 - 0.4, 2.0 + 0.4),
        (1, CoefficientChoice::Derived, 4.0 - 0.6, 4.0 + 0.6),
        (1, CoefficientChoice::Printed, f64::NEG_INFINITY, 3.0),
    ];
    for (level, choice, lo, hi) in cases {
        let mut config = StudyConfig::gaussian_default(level);
        config.coefficients = choice;
        let report = convergence_study(&config).map_err(|e| e.to_string())?;
        let label = format!("level {level} {choice:?}: slope {:.3}", report.slope);
        ensure(report.slope >= lo && report.slope < hi, label.clone())?;
        parts.push(label);
    }
    Ok(parts.join("; "))
}

fn spike_history(pde: &LinearPDE, modes: usize, times: &[f64]) -> Result<Vec<Snapshot>, String> {
    let u0 = Profile::Spike { center: 0.0, width: 0.05 }
        .sample(-20.0, 40.0, modes)
        .map_err(|e| e.to_string())?;
    let solver = SpectralSolver::new(pde, &InitialData::new(u0), &SpectralOptions::default()).map_err(|e| e.to_string())?;
    Ok(solver.history(times).iter().map(Snapshot::from_continuum).collect())
}

fn grid(t_end: f64, samples: usize) -> Vec<f64> {
    (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect()
}

fn finite_speed() -> Check {
    let micro = MicroParams::new(ratio(1, 50), ratio(1, 7500)).unwrap();
    let history = LatticeField::<Rational>::delta_line().history(&Stencil::one_third(), 60);
    let lattice = lattice_front_speed(&history, &micro).map_err(|e| e.to_string())?;
    ensure(
        lattice.fitted_exact.as_deref() == Some("150/1") && micro.signal_speed() == integer(150),
        format!("lattice speed {:?}", lattice.fitted_exact),
    )?;

    let telegraph = LinearPDE::telegraph(integer(1), integer(1)).unwrap();
    let predicted = predicted_speed(SpeedSource::Pde(&telegraph)).unwrap().value;
    let tel = front_speed(&spike_history(&telegraph, 4096, &grid(10.0, 41))?, 1e-6, 0.0)
        .map_err(|e| e.to_string())?
        .with_prediction(predicted);
    let dev = tel.relative_deviation.unwrap();
    ensure(dev <= 0.10, format!("telegraph speed {:.4} vs {predicted}", tel.fitted))?;

    let heat = LinearPDE::heat(integer(1)).unwrap();
    let mut speeds = Vec::new();
    for window in [1.0, 0.25, 0.0625, 0.015625] {
        let est = front_speed(&spike_history(&heat, 16384, &grid(window, 17))?, 1e-6, 0.0).map_err(|e| e.to_string())?;
        speeds.push(est.fitted);
    }
    // A finite speed would make successive estimates settle; here each one at least grows by half.
    let diverging = speeds.windows(2).all(|w| w[1] >= 1.5 * w[0]);
    ensure(diverging, format!("heat speeds {speeds:?}"))?;
    Ok(format!(
        "lattice 150/1 = x_a/t_a; telegraph {:.4} (dev {:.2}%); heat {:?}",
        tel.fitted,
        100.0 * dev,
        speeds.iter().map(|s| format!("{s:.2}")).collect::<Vec<_>>()
    ))
}

fn positivity() -> Check {
    let times = grid(10.0, 41);
    let telegraph = LinearPDE::telegraph(integer(1), integer(1)).unwrap();
    let tel = negativity_scan(&spike_history(&telegraph, 4096, &times)?, &1e-8);
    let Some(v) = tel else {
        return Err("no negative values in the telegraph solution".into());
    };
    let heat = negativity_scan(&spike_history(&LinearPDE::heat(integer(1)).unwrap(), 4096, &times)?, &1e-10);
    ensure(heat.is_none(), format!("heat went negative: {heat:?}"))?;

    // Same spike on the lattice: x_a = 40/1024, t_a = x_a²/3 so D = 1.
    let cells = 1024usize;
    let x_a = 40.0 / cells as f64;
    let t_a = x_a * x_a / 3.0;
    let spike = Profile::Spike { center: 0.0, width: 0.05 };
    let values: Vec<f64> = (0..cells).map(|i| spike.eval(-20.0 + i as f64 * x_a)).collect();
    let stencil = Stencil::one_third();
    let mut field = LatticeField::ring(values).unwrap();
    let per_frame = (0.25 / t_a).round() as u64;
    let mut frames = vec![Snapshot {
        t: 0.0,
        x: Vec::new(),
        u: field.values().to_vec(),
    }];
    for _ in 0..40 {
        field = field.evolve(&stencil, per_frame);
        frames.push(Snapshot {
            t: field.step_index() as f64 * t_a,
            x: (0..cells).map(|i| -20.0 + i as f64 * x_a).collect(),
            u: field.values().to_vec(),
        });
    }
    frames[0].x = frames[1].x.clone();
    let lattice = negativity_scan(&frames, &1e-10);
    ensure(lattice.is_none(), format!("lattice went negative: {lattice:?}"))?;
    let exact = LatticeField::<Rational>::delta_line().history(&stencil, 200);
    ensure(exact.iter().all(|f| f.ensure_non_negative().is_ok()), "exact lattice went negative")?;
    Ok(format!("telegraph u = {:.3e} at t = {}, x = {:.3}; heat and lattice non-negative", v.u, v.t, v.x))
}

fn dimensionless_equivalence() -> Check {
    let micro = MicroParams::new(ratio(1, 100), ratio(1, 30000)).unwrap();
    let scales = ScaleSpec::new(micro, ratio(1, 10), ratio(1, 300), integer(3), ratio(7, 10), false)
        .map_err(|e| e.to_string())?;
    let pde = derive_hierarchy(&Stencil::one_third(), 1)
        .and_then(|m| m.to_linear(&scales.dx, &scales.dt))
        .map_err(|e| e.to_string())?;
    let (model, barred) = nondimensionalize(&pde, &scales).map_err(|e| e.to_string())?;
    ensure(barred.c_tt() == &model.eps1, "barred c_tt != ε1")?;
    ensure(barred.c_xx() == &model.d_bar, "barred c_xx != D̄")?;
    ensure(barred.c_x4() == &(&model.eps2 * &model.d_bar / integer(12)), "barred c_x4 != ε2 D̄/12")?;

    let (l, t_star) = (3.0, 0.7);
    let modes = 64;
    let dimensional = ContinuumField::sample(0.0, 2.0 * PI * l, modes, |x| (x / l).cos().exp()).unwrap();
    let scaled = ContinuumField::sample(0.0, 2.0 * PI, modes, |x| x.cos().exp()).unwrap();
    let opts = SpectralOptions::default();
    let t = 1.0;
    let direct = SpectralSolver::new(&pde, &InitialData::new(dimensional), &opts).map_err(|e| e.to_string())?;
    let via = SpectralSolver::new(&barred, &InitialData::new(scaled), &opts).map_err(|e| e.to_string())?;
    let a = direct.at(t).u.values;
    let b = via.at(t / t_star).u.values;
    let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-10, format!("L∞ {err:e}"))?;
    Ok(format!("ε1 = {}, ε2 = {}, D̄ = {}, L∞ = {err:.1e}", model.eps1, model.eps2, model.d_bar))
}

fn solver_cross_checks() -> Check {
    let cells = 64i64;
    let dx = ratio(1, 16);
    let d = integer(1);
    let dt = &dx * &dx / integer(3);
    let u0: Vec<Rational> = (0..cells).map(|s| ratio((s * s) % 17, 5)).collect();
    let fd = fd_heat_solve(&d, &u0, &dx, &dt, 50).map_err(|e| e.to_string())?;
    let lattice = LatticeField::ring(u0).unwrap().evolve(&Stencil::one_third(), 50);
    ensure(fd == lattice.values(), "fd_heat_solve at r = 1/3 differs from the lattice")?;

    let u0 = ContinuumField::sample(0.0, 2.0 * PI, 64, f64::sin).unwrap();
    let heat = LinearPDE::heat(integer(1)).unwrap();
    let state = SpectralSolver::new(&heat, &InitialData::new(u0.clone()), &SpectralOptions::default())
        .map_err(|e| e.to_string())?
        .at(1.0);
    let amp = (-1.0f64).exp();
    let err = state
        .u
        .values
        .iter()
        .zip(u0.xs())
        .map(|(u, x)| (u - amp * x.sin()).abs())
        .fold(0.0, f64::max);
    ensure(err <= 1e-12, format!("sin(x) amplitude error {err:e}"))?;
    Ok(format!("fd == lattice exactly; e^-1 amplitude error {err:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("coefficient reproduction", coefficient_reproduction, Duration::from_secs(1)),
        ("coefficient correction", coefficient_correction, Duration::from_secs(1)),
        ("operator identities", operator_identities, Duration::from_secs(1)),
        ("exact lattice behavior", exact_lattice, Duration::from_secs(5)),
        ("hierarchy accuracy ordering", hierarchy_ordering, Duration::from_secs(60)),
        ("finite speed", finite_speed, Duration::from_secs(30)),
        ("positivity dichotomy", positivity, Duration::from_secs(10)),
        ("dimensionless equivalence", dimensionless_equivalence, Duration::from_secs(5)),
        ("solver cross-checks", solver_cross_checks, Duration::from_secs(5)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => Err(format!("{detail} (took {elapsed:.2?}, budget {budget:?})")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS [{elapsed:.2?}] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL [{elapsed:.2?}] {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
