//! The linear phenomenological family `c_tt U_tt + U_t = c_xx U_xx + c_x4 U_xxxx + c_xxt U_xxt`,
//! its scalings and its Fourier symbol.

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::MicroParams;
use crate::rational::{self, format_rational, Rational};

/// Coefficients of one member of the model family; the `U_t` coefficient is fixed at 1.
///
/// `c_tt` is the lag time, `c_xx` the diffusivity, `c_x4` the fourth-derivative
/// coefficient and `c_xxt` the mixed-derivative coefficient. At most one of
/// `c_x4`, `c_xxt` is nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LinearPdeRecord", into = "LinearPdeRecord")]
pub struct LinearPDE {
    c_tt: Rational,
    c_xx: Rational,
    c_x4: Rational,
    c_xxt: Rational,
}

#[derive(Serialize, Deserialize)]
struct LinearPdeRecord {
    #[serde(with = "rational::as_string")]
    c_tt: Rational,
    #[serde(with = "rational::as_string")]
    c_xx: Rational,
    #[serde(with = "rational::as_string")]
    c_x4: Rational,
    #[serde(with = "rational::as_string")]
    c_xxt: Rational,
}

impl TryFrom<LinearPdeRecord> for LinearPDE {
    type Error = Error;
    fn try_from(r: LinearPdeRecord) -> Result<Self> {
        LinearPDE::new(r.c_tt, r.c_xx, r.c_x4, r.c_xxt)
    }
}

impl From<LinearPDE> for LinearPdeRecord {
    fn from(p: LinearPDE) -> Self {
        LinearPdeRecord {
            c_tt: p.c_tt,
            c_xx: p.c_xx,
            c_x4: p.c_x4,
            c_xxt: p.c_xxt,
        }
    }
}

/// `f64` view of a [`LinearPDE`] for the solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    pub c_tt: f64,
    pub c_xx: f64,
    pub c_x4: f64,
    pub c_xxt: f64,
}

impl LinearPDE {
    pub fn new(c_tt: Rational, c_xx: Rational, c_x4: Rational, c_xxt: Rational) -> Result<Self> {
        if !c_xx.is_positive() {
            return Err(Error::InvalidPde(format!("c_xx must be > 0, got {}", format_rational(&c_xx))));
        }
        for (name, v) in [("c_tt", &c_tt), ("c_x4", &c_x4), ("c_xxt", &c_xxt)] {
            if v.is_negative() {
                return Err(Error::InvalidPde(format!("{name} must be >= 0, got {}", format_rational(v))));
            }
        }
        if !c_x4.is_zero() && !c_xxt.is_zero() {
            return Err(Error::InvalidPde(
                "c_x4 and c_xxt are alternative corrections and cannot both be nonzero".into(),
            ));
        }
        Ok(LinearPDE { c_tt, c_xx, c_x4, c_xxt })
    }

    /// `U_t = D U_xx`.
    pub fn heat(d: Rational) -> Result<Self> {
        LinearPDE::new(Rational::zero(), d, Rational::zero(), Rational::zero())
    }

    /// `tau U_tt + U_t = D U_xx`.
    pub fn telegraph(tau: Rational, d: Rational) -> Result<Self> {
        LinearPDE::new(tau, d, Rational::zero(), Rational::zero())
    }

    /// `tau U_tt + U_t = D U_xx + D2 U_xxxx`.
    pub fn fourth_order(tau: Rational, d: Rational, d2: Rational) -> Result<Self> {
        LinearPDE::new(tau, d, d2, Rational::zero())
    }

    /// `tau U_tt + U_t = D U_xx + D1 U_xxt`.
    pub fn mixed(tau: Rational, d: Rational, d1: Rational) -> Result<Self> {
        LinearPDE::new(tau, d, Rational::zero(), d1)
    }

    pub fn c_tt(&self) -> &Rational {
        &self.c_tt
    }
    pub fn c_xx(&self) -> &Rational {
        &self.c_xx
    }
    pub fn c_x4(&self) -> &Rational {
        &self.c_x4
    }
    pub fn c_xxt(&self) -> &Rational {
        &self.c_xxt
    }

    pub fn with_c_x4(&self, c_x4: Rational) -> Result<Self> {
        LinearPDE::new(self.c_tt.clone(), self.c_xx.clone(), c_x4, self.c_xxt.clone())
    }

    pub fn is_parabolic(&self) -> bool {
        self.c_tt.is_zero()
    }

    pub fn to_f64(&self) -> Coefficients {
        Coefficients {
            c_tt: rational::to_f64(&self.c_tt),
            c_xx: rational::to_f64(&self.c_xx),
            c_x4: rational::to_f64(&self.c_x4),
            c_xxt: rational::to_f64(&self.c_xxt),
        }
    }
}

impl Coefficients {
    /// Largest stable wavenumber `sqrt(c_xx / c_x4)`; infinite without a fourth-derivative term.
    pub fn stability_threshold(&self) -> f64 {
        if self.c_x4 > 0.0 {
            (self.c_xx / self.c_x4).sqrt()
        } else {
            f64::INFINITY
        }
    }
}

/// Micro `(x_a, t_a)`, meso `(δx, δt)` and macro `(L*, T*)` scales.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleSpec {
    pub micro: MicroParams,
    #[serde(with = "rational::as_string")]
    pub dx: Rational,
    #[serde(with = "rational::as_string")]
    pub dt: Rational,
    #[serde(with = "rational::as_string")]
    pub length_macro: Rational,
    #[serde(with = "rational::as_string")]
    pub time_macro: Rational,
    /// Skip the `δx = N1 x_a`, `δt = N2 t_a` integrality check.
    #[serde(default)]
    pub allow_fractional_ratios: bool,
}

impl ScaleSpec {
    pub fn new(
        micro: MicroParams,
        dx: Rational,
        dt: Rational,
        length_macro: Rational,
        time_macro: Rational,
        allow_fractional_ratios: bool,
    ) -> Result<Self> {
        let spec = ScaleSpec {
            micro,
            dx,
            dt,
            length_macro,
            time_macro,
            allow_fractional_ratios,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("δx", &self.dx),
            ("δt", &self.dt),
            ("L*", &self.length_macro),
            ("T*", &self.time_macro),
        ] {
            if !v.is_positive() {
                return Err(Error::InvalidScales(format!("{name} must be > 0")));
            }
        }
        if !self.allow_fractional_ratios {
            self.check_integral_ratios()?;
        }
        for (name, eps) in [("ε1", self.eps1()), ("ε2", self.eps2())] {
            if !(eps.is_positive() && eps < Rational::one()) {
                return Err(Error::InvalidScales(format!(
                    "{name} = {} must lie in (0, 1)",
                    format_rational(&eps)
                )));
            }
        }
        Ok(())
    }

    pub fn check_integral_ratios(&self) -> Result<()> {
        for (name, ratio) in [("N1 = δx/x_a", self.n1()), ("N2 = δt/t_a", self.n2())] {
            if !ratio.is_integer() || ratio < Rational::one() {
                return Err(Error::InvalidScales(format!(
                    "{name} = {} must be an integer >= 1",
                    format_rational(&ratio)
                )));
            }
        }
        Ok(())
    }

    pub fn n1(&self) -> Rational {
        &self.dx / self.micro.x_a()
    }

    pub fn n2(&self) -> Rational {
        &self.dt / self.micro.t_a()
    }

    /// `ε1 = δt / (2 T*)`.
    pub fn eps1(&self) -> Rational {
        &self.dt / (&self.time_macro * rational::integer(2))
    }

    /// `ε2 = (δx / L*)^2`.
    pub fn eps2(&self) -> Rational {
        let r = &self.dx / &self.length_macro;
        &r * &r
    }
}

/// `(D̄, ε1, ε2)`, all pure numbers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionlessModel {
    #[serde(with = "rational::as_string")]
    pub d_bar: Rational,
    #[serde(with = "rational::as_string")]
    pub eps1: Rational,
    #[serde(with = "rational::as_string")]
    pub eps2: Rational,
}

/// `D̄ = D T*/L*^2`, `ε1 = δt/(2T*)`, `ε2 = (δx/L*)^2`.
pub fn dimensionless_params(scales: &ScaleSpec, diffusivity: &Rational) -> Result<DimensionlessModel> {
    if !diffusivity.is_positive() {
        return Err(Error::InvalidPde("diffusivity must be > 0".into()));
    }
    let l = &scales.length_macro;
    Ok(DimensionlessModel {
        d_bar: diffusivity * &scales.time_macro / (l * l),
        eps1: scales.eps1(),
        eps2: scales.eps2(),
    })
}

/// Rescales `t = T* t̄`, `x = L* x̄` and multiplies through by `T*`.
pub fn nondimensionalize(pde: &LinearPDE, scales: &ScaleSpec) -> Result<(DimensionlessModel, LinearPDE)> {
    scales.validate()?;
    if !scales.allow_fractional_ratios {
        scales.check_integral_ratios()?;
    }
    let model = dimensionless_params(scales, pde.c_xx())?;
    let t = &scales.time_macro;
    let l2 = &scales.length_macro * &scales.length_macro;
    let barred = LinearPDE::new(
        pde.c_tt() / t,
        pde.c_xx() * t / &l2,
        pde.c_x4() * t / (&l2 * &l2),
        pde.c_xxt() / &l2,
    )?;
    Ok((model, barred))
}

/// Exact inverse of [`nondimensionalize`].
pub fn redimensionalize(barred: &LinearPDE, scales: &ScaleSpec) -> Result<LinearPDE> {
    let t = &scales.time_macro;
    let l2 = &scales.length_macro * &scales.length_macro;
    LinearPDE::new(
        barred.c_tt() * t,
        barred.c_xx() * &l2 / t,
        barred.c_x4() * (&l2 * &l2) / t,
        barred.c_xxt() * &l2,
    )
}

/// Ratio `c̄_x4 / (ε2 D̄)` of a nondimensionalised fourth-order model.
pub fn fourth_derivative_prefactor(barred: &LinearPDE, model: &DimensionlessModel) -> Rational {
    barred.c_x4() / (&model.eps2 * &model.d_bar)
}

pub enum SpeedSource<'a> {
    Pde(&'a LinearPDE),
    Micro(&'a MicroParams),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictedSpeed {
    pub value: f64,
    /// Exact value when the speed is rational (the lattice model).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

/// `sqrt(c_xx / c_tt)` for telegraph-type models, `x_a / t_a` for the lattice.
pub fn predicted_speed(source: SpeedSource<'_>) -> Result<PredictedSpeed> {
    match source {
        SpeedSource::Pde(pde) => {
            if pde.is_parabolic() {
                return Err(Error::InfiniteSpeed);
            }
            let c = pde.to_f64();
            Ok(PredictedSpeed {
                value: (c.c_xx / c.c_tt).sqrt(),
                exact: None,
            })
        }
        SpeedSource::Micro(micro) => {
            let v = micro.signal_speed();
            Ok(PredictedSpeed {
                value: rational::to_f64(&v),
                exact: Some(format_rational(&v)),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dispersion {
    pub wavenumber: f64,
    /// One root for `c_tt = 0`, two otherwise (slow root first).
    pub roots: Vec<Complex64>,
    pub unstable: bool,
}

/// Roots `s` of `c_tt s^2 + (1 + c_xxt k^2) s + (c_xx k^2 - c_x4 k^4) = 0` for modes `e^{ikx + st}`.
pub fn dispersion_roots(coeffs: &Coefficients, k: f64) -> Dispersion {
    let roots = growth_rates(coeffs, k);
    let unstable = roots.iter().any(|s| s.re > 0.0);
    Dispersion {
        wavenumber: k,
        roots,
        unstable,
    }
}

pub(crate) fn growth_rates(c: &Coefficients, k: f64) -> Vec<Complex64> {
    let k2 = k * k;
    let a = c.c_tt;
    let b = 1.0 + c.c_xxt * k2;
    let q0 = c.c_xx * k2 - c.c_x4 * k2 * k2;
    if a == 0.0 {
        return vec![Complex64::new(-q0 / b, 0.0)];
    }
    // Cancellation-free quadratic: q = -(b + sqrt(b^2 - 4 a q0)) / 2, roots q/a and q0/q.
    let disc = Complex64::new(b * b - 4.0 * a * q0, 0.0).sqrt();
    let q = -(Complex64::new(b, 0.0) + disc) / 2.0;
    let fast = q / a;
    let slow = Complex64::new(q0, 0.0) / q;
    vec![slow, fast]
}
