//! Verification harness: positivity, parity, signal fronts and convergence of the
//! hierarchy against the lattice.

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeField, MicroParams, Stencil};
use crate::opcalc::{derive_hierarchy, printed_reference_coefficients};
use crate::rational::{self, format_rational, Rational, Scalar};
use crate::solvers::{
    Closure, ContinuumField, InitialData, InstabilityPolicy, Profile, SpectralOptions, SpectralSolver,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// Grid-weighted: `sqrt(h * sum e^2)`.
    #[default]
    L2,
    Linf,
}

impl Norm {
    pub fn name(self) -> &'static str {
        match self {
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        }
    }
}

pub fn norm_of_difference(a: &[f64], b: &[f64], spacing: f64, norm: Norm) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!("{} vs {} samples", a.len(), b.len())));
    }
    let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
    Ok(match norm {
        Norm::Linf => diffs.fold(0.0, f64::max),
        Norm::L2 => (spacing * diffs.map(|d| d * d).sum::<f64>()).sqrt(),
    })
}

pub fn compare_fields(a: &ContinuumField, b: &ContinuumField, norm: Norm) -> Result<f64> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch(format!(
            "[{}, +{}) x {} vs [{}, +{}) x {}",
            a.x_start,
            a.length,
            a.len(),
            b.x_start,
            b.length,
            b.len()
        )));
    }
    norm_of_difference(&a.values, &b.values, a.spacing(), norm)
}

/// One sampled instant of a solution history.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T = f64> {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<T>,
}

impl Snapshot<f64> {
    pub fn from_continuum(field: &ContinuumField) -> Self {
        Snapshot {
            t: field.time,
            x: field.xs(),
            u: field.values.clone(),
        }
    }
}

impl<T: Scalar> Snapshot<T> {
    /// Places cell `s` at `x = s x_a` and step `r` at `t = r t_a`.
    pub fn from_lattice(field: &LatticeField<T>, micro: &MicroParams) -> Self {
        let x_a = rational::to_f64(micro.x_a());
        let t_a = rational::to_f64(micro.t_a());
        Snapshot {
            t: field.step_index() as f64 * t_a,
            x: field.indices().map(|s| s as f64 * x_a).collect(),
            u: field.values().to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub x: f64,
    pub t: f64,
    pub u: f64,
}

/// Earliest sample (in time order, then space) with `u < -tol`.
pub fn negativity_scan<T: Scalar>(history: &[Snapshot<T>], tol: &T) -> Option<Violation> {
    let floor = -tol.clone();
    let mut frames: Vec<&Snapshot<T>> = history.iter().collect();
    frames.sort_by(|a, b| a.t.total_cmp(&b.t));
    frames.into_iter().find_map(|frame| {
        frame
            .u
            .iter()
            .zip(&frame.x)
            .find(|(u, _)| **u < floor)
            .map(|(u, x)| Violation {
                x: *x,
                t: frame.t,
                u: u.to_f64(),
            })
    })
}

/// Periodic reflection `i -> -i mod M`.
pub fn mirror<T: Clone>(values: &[T]) -> Vec<T> {
    let m = values.len();
    (0..m).map(|i| values[(m - i) % m].clone()).collect()
}

/// Does `evolve` commute with reflection on `u0`? Exact for rationals, `1e-12` for floats.
pub fn parity_check<T: Scalar>(evolve: impl Fn(&[T]) -> Vec<T>, u0: &[T]) -> bool {
    let a = evolve(&mirror(u0));
    let b = mirror(&evolve(u0));
    if a.len() != b.len() {
        return false;
    }
    if T::EXACT {
        a == b
    } else {
        a.iter().zip(&b).all(|(x, y)| (x.to_f64() - y.to_f64()).abs() <= 1e-12)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpeedEstimate {
    pub threshold: f64,
    /// `(t, arrival front)` pairs, non-decreasing in both.
    pub positions: Vec<(f64, f64)>,
    pub fitted: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_deviation: Option<f64>,
}

impl SpeedEstimate {
    pub fn with_prediction(mut self, predicted: f64) -> Self {
        self.predicted = Some(predicted);
        self.relative_deviation = Some((self.fitted - predicted).abs() / predicted.abs());
        self
    }
}

/// Farthest distance from `center` at which `|u| > threshold`, interpolating the crossing
/// linearly between samples when `threshold > 0`.
fn front_position(frame: &Snapshot<f64>, threshold: f64, center: f64) -> Option<f64> {
    let n = frame.u.len();
    let above: Vec<usize> = (0..n).filter(|&i| frame.u[i].abs() > threshold).collect();
    let (&first, &last) = (above.first()?, above.last()?);
    let crossing = |inside: usize, outside: Option<usize>| -> f64 {
        let xi = frame.x[inside];
        match outside {
            Some(o) if threshold > 0.0 => {
                let ui = frame.u[inside].abs();
                let uo = frame.u[o].abs();
                xi + (frame.x[o] - xi) * (ui - threshold) / (ui - uo)
            }
            _ => xi,
        }
    };
    let right = crossing(last, (last + 1 < n).then_some(last + 1));
    let left = crossing(first, first.checked_sub(1));
    Some((right - center).max(center - left))
}

/// Tracks the arrival front `max_{t' <= t}` of the largest `|x - center|` with `|u| > threshold`
/// and fits its speed by least squares over the whole history.
pub fn front_speed(history: &[Snapshot<f64>], threshold: f64, center: f64) -> Result<SpeedEstimate> {
    let mut frames: Vec<&Snapshot<f64>> = history.iter().collect();
    frames.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut positions = Vec::with_capacity(frames.len());
    let mut reach = f64::NEG_INFINITY;
    for frame in &frames {
        if let Some(p) = front_position(frame, threshold, center) {
            reach = reach.max(p);
        }
        if reach.is_finite() {
            positions.push((frame.t, reach));
        }
    }
    let initial = positions.first().map(|p| p.1);
    let moved = match initial {
        Some(x0) => positions.iter().any(|p| p.1 > x0),
        None => false,
    };
    if !moved || positions.len() < 2 {
        return Err(Error::FrontNotDetected(threshold));
    }
    let fitted = least_squares_slope(&positions);
    Ok(SpeedEstimate {
        threshold,
        positions,
        fitted,
        fitted_exact: None,
        predicted: None,
        relative_deviation: None,
    })
}

/// Support-based front of a lattice history, fitted in exact arithmetic.
pub fn lattice_front_speed<T: Scalar>(history: &[LatticeField<T>], micro: &MicroParams) -> Result<SpeedEstimate> {
    let mut points: Vec<(Rational, Rational)> = Vec::new();
    let mut reach: Option<i64> = None;
    for field in history {
        if let Some((lo, hi)) = field.support() {
            let r = hi.abs().max(lo.abs());
            reach = Some(reach.map_or(r, |m| m.max(r)));
        }
        if let Some(r) = reach {
            let t = rational::integer(field.step_index() as i64) * micro.t_a();
            let x = rational::integer(r) * micro.x_a();
            points.push((t, x));
        }
    }
    let moved = points.first().is_some_and(|p0| points.iter().any(|p| p.1 > p0.1));
    if !moved {
        return Err(Error::FrontNotDetected(0.0));
    }
    let n = rational::integer(points.len() as i64);
    let t_mean = points.iter().map(|p| p.0.clone()).sum::<Rational>() / &n;
    let x_mean = points.iter().map(|p| p.1.clone()).sum::<Rational>() / &n;
    let mut num = Rational::zero();
    let mut den = Rational::zero();
    for (t, x) in &points {
        let dt = t - &t_mean;
        num += &dt * (x - &x_mean);
        den += &dt * &dt;
    }
    if den.is_zero() {
        return Err(Error::FrontNotDetected(0.0));
    }
    let slope = num / den;
    Ok(SpeedEstimate {
        threshold: 0.0,
        positions: points
            .iter()
            .map(|(t, x)| (rational::to_f64(t), rational::to_f64(x)))
            .collect(),
        fitted: rational::to_f64(&slope),
        fitted_exact: Some(format_rational(&slope)),
        predicted: None,
        relative_deviation: None,
    })
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), (x, y)| {
        (num + (x - mx) * (y - my), den + (x - mx) * (x - mx))
    });
    num / den
}

/// Which fourth-derivative coefficient the level-1 model uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientChoice {
    /// Straight from the exact expansion.
    #[default]
    Derived,
    /// The printed `(D/36)·δx²` value.
    Printed,
}

/// Lattice-versus-PDE refinement study at fixed diffusivity, `δt = p δx² / D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub level: u32,
    #[serde(with = "rational::as_string")]
    pub p: Rational,
    #[serde(with = "rational::as_string")]
    pub diffusivity: Rational,
    pub x_start: f64,
    #[serde(with = "rational::as_string")]
    pub length: Rational,
    #[serde(with = "rational::as_string")]
    pub t_final: Rational,
    /// Lattice spacings `δx`, coarse to fine.
    #[serde(with = "rational_list")]
    pub refinements: Vec<Rational>,
    pub profile: Profile,
    #[serde(default)]
    pub norm: Norm,
    #[serde(default)]
    pub coefficients: CoefficientChoice,
    #[serde(default)]
    pub closure: Closure,
    #[serde(default = "default_cutoff")]
    pub policy: InstabilityPolicy,
}

fn default_cutoff() -> InstabilityPolicy {
    InstabilityPolicy::Cutoff
}

mod rational_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(format_rational).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| rational::parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl StudyConfig {
    /// Gaussian data, `D = 1`, `p = 1/3`, `δx ∈ {1/16, 1/32, 1/64, 1/128}` on `[-4, 4)`.
    pub fn gaussian_default(level: u32) -> Self {
        StudyConfig {
            level,
            p: rational::ratio(1, 3),
            diffusivity: rational::integer(1),
            x_start: -4.0,
            length: rational::integer(8),
            t_final: rational::ratio(1, 8),
            refinements: [16, 32, 64, 128].iter().map(|&n| rational::ratio(1, n)).collect(),
            profile: Profile::Gaussian {
                center: 0.0,
                width: 0.5,
                amplitude: 1.0,
            },
            norm: Norm::L2,
            coefficients: CoefficientChoice::Derived,
            closure: Closure::Compatibility,
            policy: InstabilityPolicy::Cutoff,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub dx: f64,
    pub dt: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub model: String,
    pub norm: Norm,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log error` against `log δx` over the finest three levels.
    pub slope: f64,
}

pub fn convergence_study(config: &StudyConfig) -> Result<ConvergenceReport> {
    if config.refinements.len() < 4 {
        return Err(Error::InvalidStudy(format!(
            "need at least 4 refinement levels, got {}",
            config.refinements.len()
        )));
    }
    if !(config.diffusivity > Rational::zero() && config.t_final > Rational::zero()) {
        return Err(Error::InvalidStudy("diffusivity and t_final must be positive".into()));
    }
    let stencil = Stencil::new(config.p.clone())?;
    let pde_template = derive_hierarchy(&stencil, config.level)?;

    let rows = config
        .refinements
        .par_iter()
        .map(|dx| study_level(config, &stencil, &pde_template, dx))
        .collect::<Result<Vec<ConvergenceRow>>>()?;

    let finest: Vec<(f64, f64)> = rows
        .iter()
        .rev()
        .take(3)
        .map(|r| (r.dx.ln(), r.error.ln()))
        .collect();
    let slope = least_squares_slope(&finest);
    let model = format!(
        "level {} ({})",
        config.level,
        match config.coefficients {
            CoefficientChoice::Derived => "derived coefficients",
            CoefficientChoice::Printed => "printed fourth-derivative coefficient",
        }
    );
    Ok(ConvergenceReport {
        model,
        norm: config.norm,
        rows,
        slope,
    })
}

fn study_level(
    config: &StudyConfig,
    stencil: &Stencil,
    pde_template: &crate::opcalc::ModifiedPDE,
    dx: &Rational,
) -> Result<ConvergenceRow> {
    if *dx <= Rational::zero() {
        return Err(Error::InvalidStudy("refinement spacings must be positive".into()));
    }
    let dt = stencil.p() * dx * dx / &config.diffusivity;
    let cells = &config.length / dx;
    let steps = &config.t_final / &dt;
    if !cells.is_integer() || !steps.is_integer() {
        return Err(Error::InvalidStudy(format!(
            "δx = {} needs integral cell count (got {}) and step count (got {})",
            format_rational(dx),
            format_rational(&cells),
            format_rational(&steps)
        )));
    }
    let cells = cells.to_integer().to_usize().unwrap_or(0);
    let steps = steps.to_integer().to_u64().unwrap_or(0);

    let u0 = config
        .profile
        .sample(config.x_start, rational::to_f64(&config.length), cells)?;
    let lattice = LatticeField::ring(u0.values.clone())?.evolve(stencil, steps);

    let mut pde = pde_template.to_linear(dx, &dt)?;
    if config.coefficients == CoefficientChoice::Printed {
        let printed = printed_reference_coefficients(stencil)
            .into_iter()
            .find(|r| r.term.x_order == 4 && r.term.t_order == 0)
            .map(|r| r.term.evaluate(dx, &dt))
            .ok_or_else(|| Error::InvalidStudy("no printed coefficient".into()))?;
        if pde.c_x4().is_zero() {
            return Err(Error::InvalidStudy(
                "printed coefficient substitution needs a level with a U_xxxx term".into(),
            ));
        }
        pde = pde.with_c_x4(printed)?;
    }
    let options = SpectralOptions {
        closure: config.closure,
        policy: config.policy,
    };
    let solver = SpectralSolver::new(&pde, &InitialData::new(u0.clone()), &options)?;
    let continuum = solver.at(rational::to_f64(&config.t_final)).u;
    let error = norm_of_difference(lattice.values(), &continuum.values, u0.spacing(), config.norm)?;
    Ok(ConvergenceRow {
        dx: rational::to_f64(dx),
        dt: rational::to_f64(&dt),
        error,
    })
}
