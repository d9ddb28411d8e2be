//! Solvers for every member of the hierarchy on a periodic domain.
//!
//! [`SpectralSolver`] advances each Fourier mode exactly in time, so comparisons between
//! models carry no time-stepping error. [`fd_heat_solve`] is the explicit scheme that
//! coincides with the lattice rule and serves as a cross-check.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::models::{growth_rates, Coefficients, LinearPDE};
use crate::rational::{ratio, Rational, Scalar};

/// Uniform samples `u(x_m, t)` of a periodic function, `x_m = x_start + m L / M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuumField {
    pub x_start: f64,
    pub length: f64,
    pub values: Vec<f64>,
    pub time: f64,
}

impl ContinuumField {
    pub fn new(x_start: f64, length: f64, values: Vec<f64>, time: f64) -> Result<Self> {
        let m = values.len();
        if m < 4 || m % 2 == 1 {
            return Err(Error::InvalidGrid(format!("sample count must be even and >= 4, got {m}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!("domain length must be > 0, got {length}")));
        }
        Ok(ContinuumField {
            x_start,
            length,
            values,
            time,
        })
    }

    pub fn sample(x_start: f64, length: f64, samples: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = length / samples as f64;
        let values = (0..samples).map(|m| f(x_start + m as f64 * h)).collect();
        ContinuumField::new(x_start, length, values, 0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.values.len() as f64
    }

    pub fn x(&self, m: usize) -> f64 {
        self.x_start + m as f64 * self.spacing()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|m| self.x(m)).collect()
    }

    /// Wavenumber of each DFT bin.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|j| 2.0 * PI * fft::signed_index(j, m) as f64 / self.length)
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    pub fn same_grid(&self, other: &ContinuumField) -> bool {
        self.len() == other.len() && self.x_start == other.x_start && self.length == other.length
    }

    fn with_values(&self, values: Vec<f64>, time: f64) -> ContinuumField {
        ContinuumField {
            x_start: self.x_start,
            length: self.length,
            values,
            time,
        }
    }
}

/// Named analytic initial profiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `amplitude * exp(-(x - center)^2 / (2 width^2))`
    Gaussian { center: f64, width: f64, amplitude: f64 },
    /// `offset + amplitude * sin(wavenumber * x)`
    Sine { wavenumber: f64, amplitude: f64, offset: f64 },
    /// Unit-peak Gaussian narrow enough to act as a point source.
    Spike { center: f64, width: f64 },
    Constant { value: f64 },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Gaussian { center, width, amplitude } => {
                let z = (x - center) / width;
                amplitude * (-0.5 * z * z).exp()
            }
            Profile::Sine {
                wavenumber,
                amplitude,
                offset,
            } => offset + amplitude * (wavenumber * x).sin(),
            Profile::Spike { center, width } => {
                let z = (x - center) / width;
                (-0.5 * z * z).exp()
            }
            Profile::Constant { value } => value,
        }
    }

    pub fn sample(&self, x_start: f64, length: f64, samples: usize) -> Result<ContinuumField> {
        ContinuumField::sample(x_start, length, samples, |x| self.eval(x))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialData {
    pub u0: ContinuumField,
    /// `u_t(x, 0)`; needed only when `c_tt > 0`.
    pub rate: Option<Vec<f64>>,
}

impl InitialData {
    pub fn new(u0: ContinuumField) -> Self {
        InitialData { u0, rate: None }
    }

    pub fn with_rate(mut self, rate: Vec<f64>) -> Result<Self> {
        if rate.len() != self.u0.len() {
            return Err(Error::GridMismatch(format!(
                "rate has {} samples, field has {}",
                rate.len(),
                self.u0.len()
            )));
        }
        self.rate = Some(rate);
        Ok(self)
    }
}

/// How to supply the unmeasurable initial rate of a second-order-in-time model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// `u_t(x, 0) = D u_xx(x, 0)`.
    #[default]
    Compatibility,
    ZeroRate,
    /// Fail with [`Error::MissingInitialRate`].
    Require,
}

/// What to do with modes in the ill-posed band `k > sqrt(c_xx / c_x4)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstabilityPolicy {
    /// Fail if an unstable mode carries more than round-off; round-off there is dropped.
    #[default]
    Reject,
    Cutoff,
    Allow,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub closure: Closure,
    pub policy: InstabilityPolicy,
}

/// Solution and its time derivative at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState {
    pub u: ContinuumField,
    pub rate: Vec<f64>,
}

/// Relative amplitude under which a Fourier coefficient counts as round-off.
const EXCITATION_FLOOR: f64 = 1e-12;

/// Below this `|ω t|` the two-root propagator switches to its confluent series.
const CONFLUENT_LIMIT: f64 = 1e-4;

#[derive(Clone, Debug)]
struct Mode {
    u0: Complex64,
    rate0: Complex64,
    roots: Vec<Complex64>,
}

/// Mode-wise exact propagator for a fixed model and initial state.
#[derive(Clone, Debug)]
pub struct SpectralSolver {
    grid: ContinuumField,
    coeffs: Coefficients,
    modes: Vec<Mode>,
}

impl SpectralSolver {
    pub fn new(pde: &LinearPDE, init: &InitialData, options: &SpectralOptions) -> Result<Self> {
        let coeffs = pde.to_f64();
        let grid = init.u0.clone();
        let ks = grid.wavenumbers();
        let u_hat = fft::forward(&grid.values);
        let rate_hat = if coeffs.c_tt > 0.0 {
            match (&init.rate, options.closure) {
                (Some(rate), _) => fft::forward(rate),
                (None, Closure::Compatibility) => u_hat
                    .iter()
                    .zip(&ks)
                    .map(|(u, k)| -coeffs.c_xx * k * k * u)
                    .collect(),
                (None, Closure::ZeroRate) => vec![Complex64::zero(); u_hat.len()],
                (None, Closure::Require) => return Err(Error::MissingInitialRate),
            }
        } else {
            vec![Complex64::zero(); u_hat.len()]
        };

        let threshold = coeffs.stability_threshold();
        let scale = u_hat
            .iter()
            .chain(&rate_hat)
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let mut modes = Vec::with_capacity(u_hat.len());
        for ((&u0, &rate0), &k) in u_hat.iter().zip(&rate_hat).zip(&ks) {
            let roots = growth_rates(&coeffs, k);
            let growing = roots.iter().find(|s| s.re > 0.0).copied();
            let mut roots = roots;
            if let Some(s) = growing {
                match options.policy {
                    InstabilityPolicy::Reject => {
                        let excited = u0.norm().max(rate0.norm()) > EXCITATION_FLOOR * scale;
                        if excited {
                            return Err(Error::IllPosedGrowth {
                                wavenumber: k.abs(),
                                rate: s.re,
                                threshold,
                            });
                        }
                        // Round-off content only; letting it grow would swamp the solution.
                        roots.clear();
                    }
                    // A removed mode carries no roots and stays identically zero.
                    InstabilityPolicy::Cutoff => roots.clear(),
                    InstabilityPolicy::Allow => {}
                }
            }
            modes.push(Mode { u0, rate0, roots });
        }
        Ok(SpectralSolver { grid, coeffs, modes })
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    /// State at time `t` (absolute, measured from the initial data).
    pub fn at(&self, t: f64) -> SpectralState {
        let (u_hat, rate_hat): (Vec<Complex64>, Vec<Complex64>) =
            self.modes.par_iter().map(|m| advance(m, t)).unzip();
        SpectralState {
            u: self.grid.with_values(fft::inverse_real(&u_hat), self.grid.time + t),
            rate: fft::inverse_real(&rate_hat),
        }
    }

    pub fn history(&self, times: &[f64]) -> Vec<ContinuumField> {
        times.iter().map(|&t| self.at(t).u).collect()
    }
}

/// Advances one mode; returns `(û(t), û_t(t))`.
fn advance(mode: &Mode, t: f64) -> (Complex64, Complex64) {
    match mode.roots.as_slice() {
        [] => (Complex64::zero(), Complex64::zero()),
        [s] => {
            let e = (s * t).exp();
            (mode.u0 * e, s * mode.u0 * e)
        }
        [s1, s2] => {
            let (s1, s2) = (*s1, *s2);
            let half_gap = (s1 - s2) / 2.0;
            let z = half_gap * t;
            if z.norm() < CONFLUENT_LIMIT {
                // (A + B t) e^{m t} generalised with cosh/sinh series; exact at a double root.
                let m = (s1 + s2) / 2.0;
                let z2 = z * z;
                let cosh = 1.0 + z2 / 2.0 + z2 * z2 / 24.0;
                let sinhc = 1.0 + z2 / 6.0 + z2 * z2 / 120.0;
                let e = (m * t).exp();
                let b = mode.rate0 - m * mode.u0;
                let u = e * (mode.u0 * cosh + b * t * sinhc);
                let rate = m * u + e * (mode.u0 * half_gap * half_gap * t * sinhc + b * cosh);
                (u, rate)
            } else {
                let a = (mode.rate0 - s2 * mode.u0) / (s1 - s2);
                let b = mode.u0 - a;
                let e1 = (s1 * t).exp();
                let e2 = (s2 * t).exp();
                (a * e1 + b * e2, a * s1 * e1 + b * s2 * e2)
            }
        }
        _ => unreachable!("at most two growth rates per mode"),
    }
}

pub fn spectral_solve(pde: &LinearPDE, init: &InitialData, t: f64, options: &SpectralOptions) -> Result<SpectralState> {
    Ok(SpectralSolver::new(pde, init, options)?.at(t))
}

/// Level-0 closure `u_t(x, 0) = c_xx u_xx(x, 0)`, differentiated spectrally.
pub fn compatibility_initial_rate(pde: &LinearPDE, u0: &ContinuumField) -> Vec<f64> {
    let d = pde.to_f64().c_xx;
    let spectrum: Vec<Complex64> = fft::forward(&u0.values)
        .into_iter()
        .zip(u0.wavenumbers())
        .map(|(u, k)| -d * k * k * u)
        .collect();
    fft::inverse_real(&spectrum)
}

/// Explicit forward-time centred-space scheme for `u_t = D u_xx` on a periodic grid:
/// `u_s' = u_s + r (u_{s+1} - 2 u_s + u_{s-1})`, `r = D dt / dx^2 <= 1/2`.
pub fn fd_heat_solve<T: Scalar>(d: &T, u0: &[T], dx: &T, dt: &T, steps: u64) -> Result<Vec<T>> {
    let r = d.clone() * dt.clone() / (dx.clone() * dx.clone());
    let half = T::from_rational(&ratio(1, 2));
    if r > half {
        return Err(Error::StabilityViolation(format!("{r:?}")));
    }
    let n = u0.len();
    if n < 3 {
        return Err(Error::InvalidGrid(format!("need at least 3 cells, got {n}")));
    }
    let two = T::one() + T::one();
    let mut u = u0.to_vec();
    let mut next = u.clone();
    for _ in 0..steps {
        for s in 0..n {
            let l = u[(s + n - 1) % n].clone();
            let c = u[s].clone();
            let rr = u[(s + 1) % n].clone();
            next[s] = c.clone() + r.clone() * (rr + l - two.clone() * c);
        }
        std::mem::swap(&mut u, &mut next);
    }
    Ok(u)
}

/// [`fd_heat_solve`] on a sampled field.
pub fn fd_heat_solve_field(d: f64, init: &ContinuumField, dt: f64, steps: u64) -> Result<ContinuumField> {
    let values = fd_heat_solve(&d, &init.values, &init.spacing(), &dt, steps)?;
    Ok(init.with_values(values, init.time + dt * steps as f64))
}

/// Exact `D dt / dx^2` for rational inputs.
pub fn mesh_ratio(d: &Rational, dx: &Rational, dt: &Rational) -> Rational {
    d * dt / (dx * dx)
}
