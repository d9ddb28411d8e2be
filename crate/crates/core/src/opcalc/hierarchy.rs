//! Taylor expansion of the lattice rule `U(x, t + dt) = sum_i w_i U(x + i dx, t)` into
//! the hierarchy of modified PDEs, with every coefficient kept as an exact rational
//! times `dt^a dx^b`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Stencil;
use crate::models::LinearPDE;
use crate::rational::{self, factorial, Rational};

/// Which pair of scale symbols the coefficients are written in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleSymbols {
    /// `(x_a, t_a)`
    Micro,
    /// `(δx, δt)`
    #[default]
    Meso,
}

impl ScaleSymbols {
    fn names(self) -> (&'static str, &'static str) {
        match self {
            ScaleSymbols::Micro => ("x_a", "t_a"),
            ScaleSymbols::Meso => ("δx", "δt"),
        }
    }
}

/// `coeff · dt^dt_power · dx^dx_power · ∂_t^t_order ∂_x^x_order U`.
///
/// Terms with `x_order == 0` live on the left-hand side of the equation, all others
/// on the right; `coeff` is the coefficient as written on its own side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTerm {
    #[serde(with = "rational::as_string")]
    pub coeff: Rational,
    pub dt_power: i32,
    pub dx_power: i32,
    #[serde(rename = "j")]
    pub t_order: u32,
    #[serde(rename = "k")]
    pub x_order: u32,
}

impl SeriesTerm {
    pub fn is_time_side(&self) -> bool {
        self.x_order == 0
    }

    /// Every term of the equation must carry units of temperature / time:
    /// `dt_power - t_order = -1` and `dx_power - x_order = 0`.
    pub fn is_dimensionally_consistent(&self) -> bool {
        self.dt_power - self.t_order as i32 == -1 && self.dx_power == self.x_order as i32
    }

    /// Size in powers of `dx` relative to `U_t`, counting `dt` as `dx^2`.
    pub fn grading(&self) -> i32 {
        self.dx_power + 2 * self.dt_power
    }

    /// Coefficient value for concrete scales.
    pub fn evaluate(&self, dx: &Rational, dt: &Rational) -> Rational {
        &self.coeff * rational::pow(dt, self.dt_power) * rational::pow(dx, self.dx_power)
    }

    pub fn derivative_name(&self) -> String {
        format!(
            "U_{}{}",
            "x".repeat(self.x_order as usize),
            "t".repeat(self.t_order as usize)
        )
    }

    /// Compact coefficient, e.g. `1/2·δt` or `1/3·δx²·δt⁻¹`.
    pub fn compact_coefficient(&self, symbols: ScaleSymbols) -> String {
        let (x, t) = symbols.names();
        let mut parts = vec![plain_rational(&self.coeff)];
        if self.dx_power != 0 {
            parts.push(format!("{x}{}", superscript(self.dx_power)));
        }
        if self.dt_power != 0 {
            parts.push(format!("{t}{}", superscript(self.dt_power)));
        }
        parts.join("·")
    }

    /// Fraction-style coefficient, e.g. `(δx⁴/(36δt))`; empty for a bare unit coefficient.
    pub fn fraction_coefficient(&self, symbols: ScaleSymbols) -> String {
        let (x, t) = symbols.names();
        let magnitude = self.coeff.abs();
        let mut num = Vec::new();
        let mut den = Vec::new();
        let n = magnitude.numer().clone();
        let d = magnitude.denom().clone();
        let sym = |name: &str, power: i32| format!("{name}{}", superscript(power.abs()));
        for (name, power) in [(x, self.dx_power), (t, self.dt_power)] {
            if power > 0 {
                num.push(sym(name, power));
            } else if power < 0 {
                den.push(sym(name, power));
            }
        }
        if !n.is_one() || num.is_empty() {
            num.insert(0, n.to_string());
        }
        if !d.is_one() {
            den.insert(0, d.to_string());
        }
        let numerator = num.concat();
        if den.is_empty() {
            if numerator == "1" {
                return String::new();
            }
            return format!("({numerator})");
        }
        let denominator = den.concat();
        if den.len() > 1 {
            format!("({numerator}/({denominator}))")
        } else {
            format!("({numerator}/{denominator})")
        }
    }
}

fn plain_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Unicode exponent; a power of one is left implicit.
fn superscript(power: i32) -> String {
    if power == 1 {
        return String::new();
    }
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    let mut out = String::new();
    if power < 0 {
        out.push('⁻');
    }
    for c in power.unsigned_abs().to_string().chars() {
        out.push(DIGITS[c.to_digit(10).unwrap_or(0) as usize]);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// Only pure spatial derivatives on the right-hand side (`U_xxxx` style).
    SpatialOnly,
    /// Level-1 form with `U_xxxx` traded for the mixed derivative `U_xxt`.
    Mixed,
}

/// Two-sided expansion of the lattice rule before any truncation by level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    pub time_order: u32,
    pub space_order: u32,
    pub symbols: ScaleSymbols,
    pub terms: Vec<SeriesTerm>,
}

impl Expansion {
    pub fn coefficient(&self, t_order: u32, x_order: u32) -> Option<&SeriesTerm> {
        find(&self.terms, t_order, x_order)
    }
}

fn find(terms: &[SeriesTerm], t_order: u32, x_order: u32) -> Option<&SeriesTerm> {
    terms
        .iter()
        .find(|t| t.t_order == t_order && t.x_order == x_order)
}

/// Expands `U(x, t + dt) = p U(x + dx, t) + (1 - 2p) U(x, t) + p U(x - dx, t)` in Taylor
/// series and divides by `dt`, keeping time derivatives through `time_order` and spatial
/// derivatives through `space_order`.
pub fn expand_stencil(
    stencil: &Stencil,
    symbols: ScaleSymbols,
    time_order: u32,
    space_order: u32,
) -> Result<Expansion> {
    if time_order < 1 {
        return Err(Error::InvalidOrder(format!("time order must be >= 1, got {time_order}")));
    }
    if space_order < 2 || space_order % 2 == 1 {
        return Err(Error::InvalidOrder(format!(
            "space order must be even and >= 2, got {space_order} (odd orders vanish by parity)"
        )));
    }
    let mut terms = Vec::new();
    // Left: [U(t + dt) - U(t)] / dt = sum_{j>=1} dt^{j-1}/j! ∂_t^j U.
    for j in (1..=time_order).rev() {
        terms.push(SeriesTerm {
            coeff: Rational::new(BigInt::one(), factorial(j)),
            dt_power: j as i32 - 1,
            dx_power: 0,
            t_order: j,
            x_order: 0,
        });
    }
    // Right: sum_i w_i (i dx)^k / k! ∂_x^k U / dt, k >= 1 (the k = 0 moment cancels U).
    let weights = stencil.weights();
    for k in 1..=space_order {
        let moment: Rational = weights
            .iter()
            .zip([-1i64, 0, 1])
            .map(|(w, offset)| w * rational::pow(&rational::integer(offset), k as i32))
            .sum::<Rational>()
            / Rational::from_integer(factorial(k));
        if moment.is_zero() {
            continue;
        }
        debug_assert!(k % 2 == 0, "odd moment of a symmetric stencil");
        terms.push(SeriesTerm {
            coeff: moment,
            dt_power: -1,
            dx_power: k as i32,
            t_order: 0,
            x_order: k,
        });
    }
    Ok(Expansion {
        time_order,
        space_order,
        symbols,
        terms,
    })
}

/// One level of the modified-equation hierarchy, normalised so that `U_t` has coefficient 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifiedPDE {
    pub level: u32,
    pub form: Form,
    #[serde(default)]
    pub symbols: ScaleSymbols,
    pub terms: Vec<SeriesTerm>,
}

/// Level `N` keeps every term of relative size up to `dx^{2N}`, with `dt = O(dx^2)` and
/// `D` held fixed: time derivatives through order `N + 1`, space derivatives through `2(N + 1)`.
pub fn derive_hierarchy(stencil: &Stencil, level: u32) -> Result<ModifiedPDE> {
    derive_hierarchy_in(stencil, level, ScaleSymbols::Meso)
}

pub fn derive_hierarchy_in(stencil: &Stencil, level: u32, symbols: ScaleSymbols) -> Result<ModifiedPDE> {
    let raw = expand_stencil(stencil, symbols, level + 1, 2 * (level + 1))?;
    let cap = 2 * level as i32;
    let terms = raw.terms.into_iter().filter(|t| t.grading() <= cap).collect();
    Ok(ModifiedPDE {
        level,
        form: Form::SpatialOnly,
        symbols,
        terms,
    })
}

impl ModifiedPDE {
    pub fn coefficient(&self, t_order: u32, x_order: u32) -> Option<&SeriesTerm> {
        find(&self.terms, t_order, x_order)
    }

    pub fn is_dimensionally_homogeneous(&self) -> bool {
        self.terms.iter().all(SeriesTerm::is_dimensionally_consistent)
    }

    pub fn max_time_order(&self) -> u32 {
        self.terms.iter().map(|t| t.t_order).max().unwrap_or(0)
    }

    pub fn max_space_order(&self) -> u32 {
        self.terms.iter().map(|t| t.x_order).max().unwrap_or(0)
    }

    /// Concrete coefficients for the linear model family (levels 0 and 1 only).
    pub fn to_linear(&self, dx: &Rational, dt: &Rational) -> Result<LinearPDE> {
        let mut c = [Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero()];
        for term in &self.terms {
            let value = term.evaluate(dx, dt);
            let slot = match (term.t_order, term.x_order) {
                (1, 0) => {
                    if !value.is_one() {
                        return Err(Error::InvalidPde("U_t coefficient must be normalised to 1".into()));
                    }
                    continue;
                }
                (2, 0) => 0,
                (0, 2) => 1,
                (0, 4) => 2,
                (1, 2) => 3,
                (j, k) => {
                    return Err(Error::UnsupportedLevel(format!(
                        "term ∂_t^{j} ∂_x^{k} has no slot in the linear model family (level {})",
                        self.level
                    )))
                }
            };
            c[slot] = value;
        }
        let [c_tt, c_xx, c_x4, c_xxt] = c;
        LinearPDE::new(c_tt, c_xx, c_x4, c_xxt)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|t| {
                serde_json::json!({
                    "j": t.t_order,
                    "k": t.x_order,
                    "coeff": rational::format_rational(&t.coeff),
                    "dt_power": t.dt_power,
                    "dx_power": t.dx_power,
                    "derivative": t.derivative_name(),
                    "display": t.compact_coefficient(self.symbols),
                })
            })
            .collect();
        serde_json::json!({
            "level": self.level,
            "form": self.form,
            "terms": terms,
        })
    }
}

impl fmt::Display for ModifiedPDE {
    /// e.g. `(δt/2)·U_tt + U_t = (δx²/(3δt))·U_xx + (δx⁴/(36δt))·U_xxxx`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut lhs: Vec<&SeriesTerm> = self.terms.iter().filter(|t| t.is_time_side()).collect();
        lhs.sort_by_key(|t| std::cmp::Reverse(t.t_order));
        let mut rhs: Vec<&SeriesTerm> = self.terms.iter().filter(|t| !t.is_time_side()).collect();
        rhs.sort_by_key(|t| (t.x_order + t.t_order, t.t_order));
        let side = |terms: &[&SeriesTerm]| -> String {
            if terms.is_empty() {
                return "0".into();
            }
            let mut out = String::new();
            for (i, t) in terms.iter().enumerate() {
                let negative = t.coeff.is_negative();
                match (i, negative) {
                    (0, true) => out.push('-'),
                    (0, false) => {}
                    (_, true) => out.push_str(" - "),
                    (_, false) => out.push_str(" + "),
                }
                let c = t.fraction_coefficient(self.symbols);
                if c.is_empty() {
                    out.push_str(&t.derivative_name());
                } else {
                    out.push_str(&format!("{c}·{}", t.derivative_name()));
                }
            }
            out
        };
        write!(f, "{} = {}", side(&lhs), side(&rhs))
    }
}

/// Trades the level-1 `U_xxxx` term for `U_xxt` using the level-0 relation
/// `∂_t = D ∂_xx`, i.e. `∂_xxxx = (1/D) ∂_xxt`.
pub fn reduce_to_mixed_form(pde: &ModifiedPDE) -> Result<ModifiedPDE> {
    if pde.level != 1 || pde.form != Form::SpatialOnly {
        return Err(Error::UnsupportedLevel(format!(
            "mixed-form reduction is defined only for the level-1 spatial form (got level {} {:?})",
            pde.level, pde.form
        )));
    }
    let diffusivity = pde
        .coefficient(0, 2)
        .ok_or_else(|| Error::InvalidPde("missing U_xx term".into()))?
        .clone();
    let mut terms = Vec::with_capacity(pde.terms.len());
    for term in &pde.terms {
        if term.t_order == 0 && term.x_order == 4 {
            terms.push(SeriesTerm {
                coeff: &term.coeff / &diffusivity.coeff,
                dt_power: term.dt_power - diffusivity.dt_power,
                dx_power: term.dx_power - diffusivity.dx_power,
                t_order: 1,
                x_order: 2,
            });
        } else {
            terms.push(term.clone());
        }
    }
    Ok(ModifiedPDE {
        level: 1,
        form: Form::Mixed,
        symbols: pde.symbols,
        terms,
    })
}

/// Inverse of [`reduce_to_mixed_form`] to the kept order: `U_xxt = D U_xxxx + ...`.
pub fn expand_mixed_to_spatial(pde: &ModifiedPDE) -> Result<ModifiedPDE> {
    if pde.level != 1 || pde.form != Form::Mixed {
        return Err(Error::UnsupportedLevel("expected a level-1 mixed form".into()));
    }
    let diffusivity = pde
        .coefficient(0, 2)
        .ok_or_else(|| Error::InvalidPde("missing U_xx term".into()))?
        .clone();
    let terms = pde
        .terms
        .iter()
        .map(|term| {
            if term.t_order == 1 && term.x_order == 2 {
                SeriesTerm {
                    coeff: &term.coeff * &diffusivity.coeff,
                    dt_power: term.dt_power + diffusivity.dt_power,
                    dx_power: term.dx_power + diffusivity.dx_power,
                    t_order: 0,
                    x_order: 4,
                }
            } else {
                term.clone()
            }
        })
        .collect();
    Ok(ModifiedPDE {
        level: 1,
        form: Form::SpatialOnly,
        symbols: pde.symbols,
        terms,
    })
}

/// A coefficient as it is commonly printed for the `p = 1/3` expansion, kept so derived
/// values can be checked against it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReferenceCoefficient {
    pub label: String,
    pub term: SeriesTerm,
}

/// The printed fourth-derivative coefficient `(D/36)·δx²` and the printed mixed-term
/// coefficient `(δx²·D/36)`, with `D = p δx²/δt`.
pub fn printed_reference_coefficients(stencil: &Stencil) -> Vec<ReferenceCoefficient> {
    let coeff = stencil.p() / rational::integer(36);
    vec![
        ReferenceCoefficient {
            label: "U_xxxx coefficient printed as (D/36)·δx²".into(),
            term: SeriesTerm {
                coeff: coeff.clone(),
                dt_power: -1,
                dx_power: 4,
                t_order: 0,
                x_order: 4,
            },
        },
        ReferenceCoefficient {
            label: "U_xxt coefficient printed as (δx²·D/36)".into(),
            term: SeriesTerm {
                coeff,
                dt_power: -1,
                dx_power: 4,
                t_order: 1,
                x_order: 2,
            },
        },
    ]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Agrees,
    /// Same scale powers, different rational factor; `ratio = computed / reference`.
    FactorMismatch {
        #[serde(with = "rational::as_string")]
        ratio: Rational,
    },
    /// The reference does not have units of temperature / time.
    DimensionalMismatch,
    NotComputed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientComparison {
    pub label: String,
    pub derivative: String,
    pub computed: Option<SeriesTerm>,
    pub reference: SeriesTerm,
    #[serde(flatten)]
    pub verdict: Verdict,
}

/// Checks a derived PDE against reference coefficients; the derived value is authoritative.
pub fn compare_with_references(pde: &ModifiedPDE, references: &[ReferenceCoefficient]) -> Vec<CoefficientComparison> {
    references
        .iter()
        .filter_map(|r| {
            let computed = pde.coefficient(r.term.t_order, r.term.x_order).cloned();
            let verdict = match &computed {
                None => return None,
                Some(_) if !r.term.is_dimensionally_consistent() => Verdict::DimensionalMismatch,
                Some(c) if c.dt_power == r.term.dt_power && c.dx_power == r.term.dx_power => {
                    if c.coeff == r.term.coeff {
                        Verdict::Agrees
                    } else {
                        Verdict::FactorMismatch {
                            ratio: &c.coeff / &r.term.coeff,
                        }
                    }
                }
                Some(_) => Verdict::DimensionalMismatch,
            };
            Some(CoefficientComparison {
                label: r.label.clone(),
                derivative: r.term.derivative_name(),
                computed,
                reference: r.term.clone(),
                verdict,
            })
        })
        .collect()
}
