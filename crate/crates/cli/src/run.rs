//! Dispatch from a resolved [`ExperimentConfig`] to the library.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use mesoheat_core::opcalc::{
    compare_with_references, derive_hierarchy_in, operator_identity_check, printed_reference_coefficients,
    reduce_to_mixed_form, ModifiedPDE, ScaleSymbols,
};
use mesoheat_core::rational::{self, format_rational, from_f64};
use mesoheat_core::{
    compare_fields, convergence_study, front_speed, io, lattice_front_speed, predicted_speed, Closure,
    CoefficientChoice, ContinuumField, Error, InitialData, InstabilityPolicy, LatticeField, LinearPDE, MicroParams,
    Norm, Profile, Rational, Scalar, Snapshot, SpectralOptions, SpectralSolver, SpeedSource, Stencil, StudyConfig,
};
use serde_json::{json, Value};

use crate::config::*;
use crate::error::{at, CliError};

/// Runs one experiment; returns the one-line summary.
pub fn run(config: &ExperimentConfig) -> Result<String, CliError> {
    match config.command.expect("resolved configs name a command") {
        CommandKind::SimulateLattice => simulate_lattice(config),
        CommandKind::Derive => derive(config),
        CommandKind::Solve => solve(config),
        CommandKind::Compare => compare(config),
        CommandKind::Speed => speed(config),
        CommandKind::Study => study(config),
    }
}

/// Output sink: the named file, or stdout.
fn emit(config: &ExperimentConfig, write: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    match &config.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut out = BufWriter::new(file);
            write(&mut out)?;
            out.flush().map_err(|e| CliError::io(path, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            write(&mut out)?;
            out.flush().map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn format_of(config: &ExperimentConfig, default: Format) -> Format {
    if let Some(f) = config.format {
        return f;
    }
    match config.output.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        Some("csv") => Format::Csv,
        _ => default,
    }
}

fn write_json(out: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(Error::from)?;
    writeln!(out).map_err(Error::from)?;
    Ok(())
}

fn stencil(config: &ExperimentConfig) -> Result<Stencil, CliError> {
    match &config.p {
        Some(p) => Stencil::new(p.0.clone()).map_err(at("p")),
        None => Ok(Stencil::one_third()),
    }
}

fn micro(config: &ExperimentConfig) -> Result<MicroParams, CliError> {
    let one = rational::integer(1);
    let x_a = config.x_a.as_ref().map_or(one.clone(), |v| v.0.clone());
    let t_a = config.t_a.as_ref().map_or(one, |v| v.0.clone());
    MicroParams::new(x_a, t_a).map_err(at("x_a"))
}

fn positive(field: &'static str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::config(field, format!("must be a positive number, got {v}")))
    }
}

fn profile(config: &ExperimentConfig, default: ProfileKind, center: f64) -> Result<Profile, CliError> {
    let center = config.center.unwrap_or(center);
    Ok(match config.profile.unwrap_or(default) {
        ProfileKind::Gaussian => Profile::Gaussian {
            center,
            width: positive("width", config.width.unwrap_or(0.5))?,
            amplitude: config.amplitude.unwrap_or(1.0),
        },
        ProfileKind::Sine => Profile::Sine {
            wavenumber: config.wavenumber.unwrap_or(1.0),
            amplitude: config.amplitude.unwrap_or(1.0),
            offset: config.offset.unwrap_or(0.0),
        },
        ProfileKind::Spike | ProfileKind::Delta => Profile::Spike {
            center,
            width: positive("width", config.width.unwrap_or(0.05))?,
        },
        ProfileKind::Constant => Profile::Constant {
            value: config.value.unwrap_or(1.0),
        },
    })
}

fn simulate_lattice(config: &ExperimentConfig) -> Result<String, CliError> {
    let stencil = stencil(config)?;
    match config.mode.unwrap_or(Arithmetic::Rational) {
        Arithmetic::Rational => simulate::<Rational>(config, &stencil),
        Arithmetic::Float => simulate::<f64>(config, &stencil),
    }
}

fn lattice_value<T: Scalar>(v: f64) -> Result<T, CliError> {
    let exact = from_f64(v).map_err(at("profile"))?;
    Ok(T::from_rational(&exact))
}

fn initial_lattice<T: Scalar>(config: &ExperimentConfig, micro: &MicroParams) -> Result<LatticeField<T>, CliError> {
    let topology = config.topology.unwrap_or(TopologyKind::Line);
    let kind = config.profile.unwrap_or(ProfileKind::Delta);
    if let Some(path) = &config.input {
        let field = read_field(path)?;
        let values = field.values.iter().map(|&v| lattice_value(v)).collect::<Result<Vec<T>, _>>()?;
        return match topology {
            TopologyKind::Ring => LatticeField::ring(values).map_err(at("input")),
            TopologyKind::Line => Ok(LatticeField::line(values, 0)),
        };
    }
    let cells = config.cells.unwrap_or(64);
    let half = (cells / 2) as i64;
    if kind == ProfileKind::Delta {
        return match topology {
            TopologyKind::Line => Ok(LatticeField::delta_line()),
            TopologyKind::Ring => {
                let mut values = vec![T::zero(); cells];
                if let Some(v) = values.get_mut(cells / 2) {
                    *v = T::one();
                }
                LatticeField::ring(values).map_err(at("cells"))
            }
        };
    }
    let shape = profile(config, kind, 0.0)?;
    let x_a = rational::to_f64(micro.x_a());
    let values = (0..cells as i64)
        .map(|i| lattice_value(shape.eval((i - half) as f64 * x_a)))
        .collect::<Result<Vec<T>, _>>()?;
    match topology {
        TopologyKind::Ring => LatticeField::ring(values).map_err(at("cells")),
        TopologyKind::Line => Ok(LatticeField::line(values, -half)),
    }
}

fn simulate<T: Scalar>(config: &ExperimentConfig, stencil: &Stencil) -> Result<String, CliError> {
    let micro = micro(config)?;
    let u0: LatticeField<T> = initial_lattice(config, &micro)?;
    let steps = config.steps.unwrap_or(1);
    let field = u0.evolve(stencil, steps);
    match format_of(config, Format::Csv) {
        Format::Csv => emit(config, |out| Ok(io::write_lattice_csv(&field, out)?))?,
        Format::Json => {
            let doc = serde_json::to_value(field.to_document(stencil)).map_err(Error::from)?;
            emit(config, |out| write_json(out, &doc))?
        }
    }
    let heat = field.total_heat();
    Ok(format!(
        "simulate-lattice: p = {}, r = {steps}, {} cells, total heat {}",
        format_rational(stencil.p()),
        field.len(),
        heat.to_csv()
    ))
}

fn derive(config: &ExperimentConfig) -> Result<String, CliError> {
    let stencil = stencil(config)?;
    let level = config.level.unwrap_or(1);
    let symbols = match config.symbols.unwrap_or(SymbolKind::Meso) {
        SymbolKind::Meso => ScaleSymbols::Meso,
        SymbolKind::Micro => ScaleSymbols::Micro,
    };
    let spatial = derive_hierarchy_in(&stencil, level, symbols).map_err(at("level"))?;
    let pde = match config.form.unwrap_or(FormKind::Spatial) {
        FormKind::Spatial => spatial,
        FormKind::Mixed => reduce_to_mixed_form(&spatial).map_err(at("form"))?,
    };
    let hierarchy = (0..=level)
        .map(|n| derive_hierarchy_in(&stencil, n, symbols).map(|m| level_json(&m)))
        .collect::<Result<Vec<_>, _>>()?;
    let checks = compare_with_references(&pde, &printed_reference_coefficients(&stencil));
    let order = config.series_order.unwrap_or(8);
    if order == 0 {
        return Err(CliError::config("series_order", "must be at least 1"));
    }
    let identities = operator_identity_check(order);
    let log_series: Vec<String> = mesoheat_core::opcalc::log_series_coeffs(order)
        .coefficients()
        .iter()
        .skip(1)
        .map(format_rational)
        .collect();

    let mut doc = pde.to_json();
    let obj = doc.as_object_mut().expect("ModifiedPDE::to_json yields an object");
    obj.insert("p".into(), json!(format_rational(stencil.p())));
    obj.insert("equation".into(), json!(pde.to_string()));
    obj.insert(
        "dimensionally_homogeneous".into(),
        json!(pde.is_dimensionally_homogeneous()),
    );
    obj.insert("hierarchy".into(), Value::Array(hierarchy));
    obj.insert(
        "reference_checks".into(),
        serde_json::to_value(&checks).map_err(Error::from)?,
    );
    obj.insert(
        "operator_identities".into(),
        json!({
            "order": order,
            "holds": identities.holds(),
            "log_series": log_series,
        }),
    );
    emit(config, |out| write_json(out, &doc))?;
    Ok(format!("derive: level {level}: {pde}"))
}

fn level_json(pde: &ModifiedPDE) -> Value {
    let mut v = pde.to_json();
    if let Some(obj) = v.as_object_mut() {
        obj.insert("equation".into(), json!(pde.to_string()));
    }
    v
}

fn num(field: &Option<Num>, default: i64) -> Rational {
    field.as_ref().map_or_else(|| rational::integer(default), |v| v.0.clone())
}

fn required(field: &'static str, v: &Option<Num>) -> Result<Rational, CliError> {
    v.as_ref()
        .map(|n| n.0.clone())
        .ok_or_else(|| CliError::config(field, "is required for this model"))
}

fn build_pde(config: &ExperimentConfig, default: ModelKind) -> Result<(String, LinearPDE), CliError> {
    let model = match (config.model, &config.pde) {
        (None, Some(pde)) => return Ok(("custom".into(), pde.clone())),
        (m, _) => m.unwrap_or(default),
    };
    let d = num(&config.d, 1);
    let pde = match model {
        ModelKind::Heat => LinearPDE::heat(d).map_err(at("d"))?,
        ModelKind::Telegraph => LinearPDE::telegraph(num(&config.tau, 1), d).map_err(at("tau"))?,
        ModelKind::FourthOrder => {
            if config.eps1.is_some() || config.eps2.is_some() || config.d_bar.is_some() {
                // ε1 U_tt + U_t = D̄ U_xx + ε2 D̄ U_xxxx
                let d_bar = num(&config.d_bar, 1);
                let eps1 = num(&config.eps1, 0);
                let eps2 = required("eps2", &config.eps2)?;
                LinearPDE::fourth_order(eps1, d_bar.clone(), eps2 * d_bar).map_err(at("eps2"))?
            } else {
                LinearPDE::fourth_order(num(&config.tau, 0), d, required("d2", &config.d2)?).map_err(at("d2"))?
            }
        }
        ModelKind::Mixed => LinearPDE::mixed(num(&config.tau, 0), d, required("d1", &config.d1)?).map_err(at("d1"))?,
        ModelKind::Hierarchy => {
            let stencil = stencil(config)?;
            let (dx, dt) = match &config.scales {
                Some(s) => (s.dx.clone(), s.dt.clone()),
                None => (required("dx", &config.dx)?, required("dt", &config.dt)?),
            };
            let level = config.level.unwrap_or(1);
            let derived = derive_hierarchy_in(&stencil, level, ScaleSymbols::Meso).map_err(at("level"))?;
            derived.to_linear(&dx, &dt).map_err(at("level"))?
        }
        ModelKind::Lattice => {
            return Err(CliError::config("model", "the lattice model is only available to `speed`"));
        }
    };
    let name = serde_json::to_value(model)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    Ok((name, pde))
}

fn read_field(path: &Path) -> Result<ContinuumField, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    io::read_field_csv(file).map_err(|e| match e {
        Error::Io(source) => CliError::io(path, source),
        other => CliError::config("input", format!("{}: {other}", path.display())),
    })
}

struct GridDefaults {
    x_start: f64,
    length: f64,
    modes: usize,
    t_end: f64,
    samples: usize,
    profile: ProfileKind,
}

fn initial_field(config: &ExperimentConfig, defaults: &GridDefaults) -> Result<ContinuumField, CliError> {
    if let Some(path) = &config.input {
        return read_field(path);
    }
    let x_start = config.x_start.as_ref().map_or(defaults.x_start, Num::f64);
    let length = positive("length", config.length.as_ref().map_or(defaults.length, Num::f64))?;
    let modes = config.modes.unwrap_or(defaults.modes);
    let shape = profile(config, defaults.profile, x_start + length / 2.0)?;
    shape.sample(x_start, length, modes).map_err(at("modes"))
}

fn output_times(config: &ExperimentConfig, defaults: &GridDefaults) -> Result<Vec<f64>, CliError> {
    if let Some(times) = &config.times {
        if times.is_empty() || times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(CliError::config("times", "need at least one finite time >= 0"));
        }
        return Ok(times.clone());
    }
    let t_end = config.t_end.unwrap_or(defaults.t_end);
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(CliError::config("t_end", "must be a finite time >= 0"));
    }
    let samples = config.samples.unwrap_or(defaults.samples);
    Ok(match samples {
        0 => return Err(CliError::config("samples", "must be at least 1")),
        1 => vec![t_end],
        n => (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect(),
    })
}

fn spectral_options(config: &ExperimentConfig, policy: InstabilityPolicy) -> SpectralOptions {
    SpectralOptions {
        closure: match config.closure.unwrap_or(ClosureKind::Compatibility) {
            ClosureKind::Compatibility => Closure::Compatibility,
            ClosureKind::ZeroRate => Closure::ZeroRate,
            ClosureKind::Require => Closure::Require,
        },
        policy: config.policy.map_or(policy, |p| match p {
            PolicyKind::Reject => InstabilityPolicy::Reject,
            PolicyKind::Cutoff => InstabilityPolicy::Cutoff,
            PolicyKind::Allow => InstabilityPolicy::Allow,
        }),
    }
}

fn solve(config: &ExperimentConfig) -> Result<String, CliError> {
    let defaults = GridDefaults {
        x_start: 0.0,
        length: 2.0 * PI,
        modes: 64,
        t_end: 1.0,
        samples: 1,
        profile: ProfileKind::Gaussian,
    };
    let (name, pde) = build_pde(config, ModelKind::Heat)?;
    let u0 = initial_field(config, &defaults)?;
    let times = output_times(config, &defaults)?;
    let options = spectral_options(config, InstabilityPolicy::Reject);
    let solver = SpectralSolver::new(&pde, &InitialData::new(u0), &options).map_err(|e| match e {
        Error::MissingInitialRate => CliError::config("closure", e.to_string()),
        other => CliError::Core(other),
    })?;
    let frames = solver.history(&times);
    match format_of(config, Format::Csv) {
        Format::Csv => emit(config, |out| Ok(io::write_snapshots_csv(&frames, out)?))?,
        Format::Json => {
            let snapshots: Vec<Value> = frames
                .iter()
                .map(|f| json!({"t": f.time, "x": f.xs(), "u": f.values}))
                .collect();
            let doc = json!({
                "model": name,
                "pde": serde_json::to_value(&pde).map_err(Error::from)?,
                "snapshots": snapshots,
            });
            emit(config, |out| write_json(out, &doc))?
        }
    }
    let last = frames.last().expect("at least one output time");
    let peak = last.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(format!(
        "solve: {name}, {} modes, {} snapshot(s) up to t = {}, max |u| = {peak:.6e}",
        last.len(),
        frames.len(),
        last.time
    ))
}

fn norm(config: &ExperimentConfig) -> Norm {
    match config.norm.unwrap_or(NormKind::L2) {
        NormKind::L2 => Norm::L2,
        NormKind::Linf => Norm::Linf,
    }
}

fn compare(config: &ExperimentConfig) -> Result<String, CliError> {
    let a = config.a.as_ref().ok_or_else(|| CliError::config("a", "is required"))?;
    let b = config.b.as_ref().ok_or_else(|| CliError::config("b", "is required"))?;
    let fa = read_field(a)?;
    let fb = read_field(b)?;
    let norm = norm(config);
    let error = compare_fields(&fa, &fb, norm).map_err(at("b"))?;
    let pass = config.tolerance.map(|tol| error <= tol);
    let doc = json!({
        "a": a.display().to_string(),
        "b": b.display().to_string(),
        "norm": norm.name(),
        "error": error,
        "tolerance": config.tolerance,
        "pass": pass,
    });
    if config.output.is_some() || config.format.is_some() {
        emit(config, |out| write_json(out, &doc))?;
    }
    let summary = format!("compare: {} distance {error:.6e}", norm.name());
    if pass == Some(false) {
        return Err(CliError::Tolerance(format!(
            "{summary} exceeds {:e}",
            config.tolerance.unwrap_or_default()
        )));
    }
    Ok(summary)
}

fn speed(config: &ExperimentConfig) -> Result<String, CliError> {
    let model = config.model.unwrap_or(ModelKind::Telegraph);
    let (name, estimate) = if model == ModelKind::Lattice {
        let stencil = stencil(config)?;
        let micro = micro(config)?;
        let steps = config.steps.unwrap_or(100);
        let history = LatticeField::<Rational>::delta_line().history(&stencil, steps);
        let estimate = lattice_front_speed(&history, &micro)?;
        let predicted = predicted_speed(SpeedSource::Micro(&micro))?;
        ("lattice".to_string(), estimate.with_prediction(predicted.value))
    } else {
        let defaults = GridDefaults {
            x_start: -20.0,
            length: 40.0,
            modes: 4096,
            t_end: 10.0,
            samples: 41,
            profile: ProfileKind::Spike,
        };
        let (name, pde) = build_pde(config, model)?;
        let u0 = initial_field(config, &defaults)?;
        let center = config.center.unwrap_or(u0.x_start + u0.length / 2.0);
        let times = output_times(config, &defaults)?;
        let solver = SpectralSolver::new(&pde, &InitialData::new(u0), &spectral_options(config, InstabilityPolicy::Reject))?;
        let history: Vec<Snapshot> = solver.history(&times).iter().map(Snapshot::from_continuum).collect();
        let threshold = config.threshold.unwrap_or(1e-6);
        let estimate = front_speed(&history, threshold, center)?;
        match predicted_speed(SpeedSource::Pde(&pde)) {
            Ok(p) => (name, estimate.with_prediction(p.value)),
            Err(Error::InfiniteSpeed) => (name, estimate),
            Err(e) => return Err(e.into()),
        }
    };
    match format_of(config, Format::Csv) {
        Format::Csv => emit(config, |out| Ok(io::write_speed_csv(&estimate, out)?))?,
        Format::Json => {
            let mut doc = serde_json::to_value(&estimate).map_err(Error::from)?;
            if let Some(obj) = doc.as_object_mut() {
                obj.insert("model".into(), json!(name));
            }
            emit(config, |out| write_json(out, &doc))?
        }
    }
    let fitted = estimate.fitted_exact.clone().unwrap_or_else(|| format!("{:.6}", estimate.fitted));
    let summary = match estimate.predicted {
        Some(p) => format!("speed: {name}, fitted {fitted}, predicted {p:.6}"),
        None => format!("speed: {name}, fitted {fitted}, predicted infinite"),
    };
    if let Some(tol) = config.tolerance {
        match estimate.relative_deviation {
            Some(dev) if dev <= tol => {}
            Some(dev) => return Err(CliError::Tolerance(format!("{summary}: relative deviation {dev:.3e} > {tol:e}"))),
            None => return Err(CliError::Core(Error::InfiniteSpeed)),
        }
    }
    Ok(summary)
}

fn study(config: &ExperimentConfig) -> Result<String, CliError> {
    match (config.expected_slope, config.slope_tolerance) {
        (Some(_), None) => return Err(CliError::config("slope_tolerance", "is required with expected_slope")),
        (None, Some(_)) => return Err(CliError::config("expected_slope", "is required with slope_tolerance")),
        _ => {}
    }
    let level = config.level.unwrap_or(1);
    let mut study = StudyConfig::gaussian_default(level);
    if let Some(p) = &config.p {
        study.p = p.0.clone();
    }
    if let Some(d) = &config.d {
        study.diffusivity = d.0.clone();
    }
    if let Some(x) = &config.x_start {
        study.x_start = x.f64();
    }
    if let Some(l) = &config.length {
        study.length = l.0.clone();
    }
    if let Some(t) = &config.t_final {
        study.t_final = t.0.clone();
    }
    if let Some(r) = &config.refinements {
        study.refinements = r.iter().map(|n| n.0.clone()).collect();
    }
    if config.profile.is_some() || config.input.is_some() {
        if config.input.is_some() {
            return Err(CliError::config("input", "studies take a named profile"));
        }
        let center = study.x_start + rational::to_f64(&study.length) / 2.0;
        study.profile = profile(config, ProfileKind::Gaussian, center)?;
    }
    study.norm = norm(config);
    if let Some(c) = config.coefficients {
        study.coefficients = match c {
            CoefficientKind::Derived => CoefficientChoice::Derived,
            CoefficientKind::Printed => CoefficientChoice::Printed,
        };
    }
    let options = spectral_options(config, InstabilityPolicy::Cutoff);
    study.closure = options.closure;
    study.policy = options.policy;

    let report = convergence_study(&study).map_err(|e| match e {
        Error::InvalidStudy(_) | Error::InadmissibleStencil(_) => CliError::config("refinements", e.to_string()),
        other => CliError::Core(other),
    })?;
    match format_of(config, Format::Csv) {
        Format::Csv => emit(config, |out| Ok(io::write_convergence_csv(&report, out)?))?,
        Format::Json => {
            let doc = json!({
                "config": serde_json::to_value(&study).map_err(Error::from)?,
                "report": serde_json::to_value(&report).map_err(Error::from)?,
            });
            emit(config, |out| write_json(out, &doc))?
        }
    }
    let summary = format!("study: {}, slope {:.4}", report.model, report.slope);
    if let (Some(expected), Some(tol)) = (config.expected_slope, config.slope_tolerance) {
        if (report.slope - expected).abs() > tol {
            return Err(CliError::Tolerance(format!("{summary} outside {expected} ± {tol}")));
        }
    }
    if let Some(max) = config.max_slope {
        if report.slope >= max {
            return Err(CliError::Tolerance(format!("{summary} not below {max}")));
        }
    }
    Ok(summary)
}
