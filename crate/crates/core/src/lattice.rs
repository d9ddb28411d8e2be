//! The discrete micro-level heat model: the explicit rule
//! `u_s^{r+1} = p u_{s+1}^r + (1 - 2p) u_s^r + p u_{s-1}^r` and its diagnostics.
//!
//! Every operation is generic over [`Scalar`], so the same code runs in exact
//! rational arithmetic (used by the oracle tests) and in `f64`.

use std::f64::consts::PI;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fft;
use crate::rational::{self, format_rational, ratio, Rational, Scalar};

/// Symmetric nearest-neighbour stencil `[p, 1 - 2p, p]` on offsets `[-1, 0, +1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stencil {
    p: Rational,
}

impl Stencil {
    pub fn new(p: Rational) -> Result<Self> {
        if p <= Rational::zero() || p > ratio(1, 2) {
            return Err(Error::InadmissibleStencil(format_rational(&p)));
        }
        if p == ratio(1, 2) {
            log::warn!("p = 1/2 leaves the checkerboard mode undamped: g(pi) = -1");
        }
        Ok(Stencil { p })
    }

    pub fn one_third() -> Self {
        Stencil { p: ratio(1, 3) }
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    /// Weights on offsets `[-1, 0, +1]`.
    pub fn weights(&self) -> [Rational; 3] {
        let center = Rational::one() - &self.p * rational::integer(2);
        [self.p.clone(), center, self.p.clone()]
    }

    /// `g(theta) = 1 - 2p (1 - cos theta)`.
    pub fn amplification_factor(&self, theta: f64) -> f64 {
        1.0 - 2.0 * rational::to_f64(&self.p) * (1.0 - theta.cos())
    }
}

impl Default for Stencil {
    fn default() -> Self {
        Stencil::one_third()
    }
}

pub fn amplification_factor(stencil: &Stencil, theta: f64) -> f64 {
    stencil.amplification_factor(theta)
}

/// Micro-level cell size `x_a` and tick `t_a`; both strictly positive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroParams {
    #[serde(with = "rational::as_string")]
    x_a: Rational,
    #[serde(with = "rational::as_string")]
    t_a: Rational,
}

impl MicroParams {
    pub fn new(x_a: Rational, t_a: Rational) -> Result<Self> {
        if x_a <= Rational::zero() || t_a <= Rational::zero() {
            return Err(Error::InvalidScales(format!(
                "micro scales must be positive (x_a = {}, t_a = {})",
                format_rational(&x_a),
                format_rational(&t_a)
            )));
        }
        Ok(MicroParams { x_a, t_a })
    }

    pub fn x_a(&self) -> &Rational {
        &self.x_a
    }

    pub fn t_a(&self) -> &Rational {
        &self.t_a
    }

    /// Lattice signal speed `x_a / t_a`: one cell per tick.
    pub fn signal_speed(&self) -> Rational {
        &self.x_a / &self.t_a
    }
}

/// `D = p x_a^2 / t_a`.
pub fn diffusion_coefficient(stencil: &Stencil, micro: &MicroParams) -> Rational {
    stencil.p() * micro.x_a() * micro.x_a() / micro.t_a()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    /// Periodic lattice of `M >= 3` cells.
    Ring,
    /// Infinite line holding only a finite window; `origin` is the index `s` of the first stored cell.
    Line { origin: i64 },
}

/// Temperatures `u_s^r` at a fixed step `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeField<T> {
    values: Vec<T>,
    topology: Topology,
    step: u64,
}

impl<T: Scalar> LatticeField<T> {
    pub fn ring(values: Vec<T>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidField(format!(
                "a ring needs at least 3 cells, got {}",
                values.len()
            )));
        }
        Ok(LatticeField {
            values,
            topology: Topology::Ring,
            step: 0,
        })
    }

    /// Line field whose first value sits at index `origin`. Zero cells at either end are trimmed.
    pub fn line(values: Vec<T>, origin: i64) -> Self {
        let first = values.iter().position(|v| !v.is_zero());
        let Some(first) = first else {
            return LatticeField {
                values: Vec::new(),
                topology: Topology::Line { origin },
                step: 0,
            };
        };
        let last = values.iter().rposition(|v| !v.is_zero()).unwrap_or(first);
        LatticeField {
            values: values[first..=last].to_vec(),
            topology: Topology::Line {
                origin: origin + first as i64,
            },
            step: 0,
        }
    }

    /// Unit heat at `s = 0` on the line.
    pub fn delta_line() -> Self {
        LatticeField::line(vec![T::one()], 0)
    }

    pub fn with_step(mut self, step: u64) -> Self {
        self.step = step;
        self
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Lattice index of each stored value.
    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        let origin = match self.topology {
            Topology::Ring => 0,
            Topology::Line { origin } => origin,
        };
        (0..self.values.len() as i64).map(move |i| origin + i)
    }

    /// Value at lattice index `s` (wrapped on a ring, zero outside the stored window on a line).
    pub fn value_at(&self, s: i64) -> T {
        match self.topology {
            Topology::Ring => {
                let m = self.values.len() as i64;
                self.values[s.rem_euclid(m) as usize].clone()
            }
            Topology::Line { origin } => {
                let i = s - origin;
                if i < 0 || i >= self.values.len() as i64 {
                    T::zero()
                } else {
                    self.values[i as usize].clone()
                }
            }
        }
    }

    /// Values at indices `lo..=hi`.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<T> {
        (lo..=hi).map(|s| self.value_at(s)).collect()
    }

    /// Inclusive index range of nonzero values, if any.
    pub fn support(&self) -> Option<(i64, i64)> {
        let idx: Vec<i64> = self
            .indices()
            .zip(&self.values)
            .filter(|(_, v)| !v.is_zero())
            .map(|(s, _)| s)
            .collect();
        Some((*idx.first()?, *idx.last()?))
    }

    pub fn step(&self, stencil: &Stencil) -> Self {
        self.evolve(stencil, 1)
    }

    /// `steps`-fold composition of [`LatticeField::step`].
    pub fn evolve(&self, stencil: &Stencil, steps: u64) -> Self {
        let periodic = matches!(self.topology, Topology::Ring);
        let values = T::convolve_steps(&self.values, stencil.p(), periodic, steps);
        let topology = match self.topology {
            Topology::Ring => Topology::Ring,
            Topology::Line { origin } => Topology::Line {
                origin: origin - steps as i64,
            },
        };
        LatticeField {
            values,
            topology,
            step: self.step + steps,
        }
    }

    /// Every intermediate state `r = 0..=steps`.
    pub fn history(&self, stencil: &Stencil, steps: u64) -> Vec<Self> {
        let mut out = Vec::with_capacity(steps as usize + 1);
        out.push(self.clone());
        for _ in 0..steps {
            let next = out.last().map(|f: &Self| f.step(stencil)).unwrap_or_else(|| self.clone());
            out.push(next);
        }
        out
    }

    /// Sum over the ring or over the stored support on the line.
    pub fn total_heat(&self) -> T {
        self.values.iter().cloned().fold(T::zero(), |acc, v| acc + v)
    }

    pub fn max_value(&self) -> Option<T> {
        self.values
            .iter()
            .cloned()
            .reduce(|a, b| if b > a { b } else { a })
    }

    pub fn min_value(&self) -> Option<T> {
        self.values
            .iter()
            .cloned()
            .reduce(|a, b| if b < a { b } else { a })
    }

    /// Reflection `s -> -s`.
    pub fn mirror(&self) -> Self {
        match self.topology {
            Topology::Ring => {
                let m = self.values.len();
                LatticeField {
                    values: (0..m).map(|i| self.values[(m - i) % m].clone()).collect(),
                    topology: Topology::Ring,
                    step: self.step,
                }
            }
            Topology::Line { origin } => {
                let n = self.values.len() as i64;
                LatticeField {
                    values: self.values.iter().rev().cloned().collect(),
                    topology: Topology::Line {
                        origin: -(origin + n - 1),
                    },
                    step: self.step,
                }
            }
        }
    }

    /// Temperatures are absolute: rejects any negative value.
    pub fn ensure_non_negative(&self) -> Result<()> {
        match self.values.iter().position(|v| *v < T::zero()) {
            Some(i) => Err(Error::InvalidField(format!(
                "negative temperature {:?} at cell {}",
                self.values[i],
                self.indices().nth(i).unwrap_or_default()
            ))),
            None => Ok(()),
        }
    }

    pub fn to_f64(&self) -> LatticeField<f64> {
        LatticeField {
            values: self.values.iter().map(Scalar::to_f64).collect(),
            topology: self.topology,
            step: self.step,
        }
    }

    /// Ring-only evolution through the discrete Fourier symbol
    /// `g_j = 1 - 2p (1 - cos(2 pi j / M))` raised to the power `steps`.
    pub fn exact_evolve_ring(&self, stencil: &Stencil, steps: u64) -> Result<LatticeField<f64>> {
        if !matches!(self.topology, Topology::Ring) {
            return Err(Error::WrongTopology {
                operation: "exact_evolve_ring",
                expected: "ring",
            });
        }
        let m = self.values.len();
        let samples: Vec<f64> = self.values.iter().map(Scalar::to_f64).collect();
        let mut spectrum = fft::forward(&samples);
        let exponent = i32::try_from(steps).ok();
        for (j, c) in spectrum.iter_mut().enumerate() {
            let theta = 2.0 * PI * j as f64 / m as f64;
            let g = stencil.amplification_factor(theta);
            *c *= match exponent {
                Some(e) => g.powi(e),
                None => g.powf(steps as f64),
            };
        }
        Ok(LatticeField {
            values: fft::inverse_real(&spectrum),
            topology: Topology::Ring,
            step: self.step + steps,
        })
    }

    pub fn to_document(&self, stencil: &Stencil) -> LatticeDocument {
        let (topology, cells, origin) = match self.topology {
            Topology::Ring => ("ring".to_string(), Some(self.values.len()), None),
            Topology::Line { origin } => ("line".to_string(), None, Some(origin)),
        };
        LatticeDocument {
            topology,
            m: cells,
            origin,
            p: format_rational(stencil.p()),
            r: self.step,
            values: self.values.iter().map(Scalar::to_json).collect(),
        }
    }

    pub fn from_document(doc: &LatticeDocument) -> Result<(Self, Stencil)> {
        let stencil = Stencil::new(rational::parse_rational(&doc.p)?)?;
        let values = doc
            .values
            .iter()
            .map(T::from_json)
            .collect::<Result<Vec<T>>>()?;
        let field = match doc.topology.as_str() {
            "ring" => {
                if let Some(m) = doc.m {
                    if m != values.len() {
                        return Err(Error::InvalidField(format!(
                            "ring declares M = {m} but holds {} values",
                            values.len()
                        )));
                    }
                }
                LatticeField::ring(values)?
            }
            "line" => {
                let origin = doc.origin.unwrap_or(0);
                LatticeField {
                    values,
                    topology: Topology::Line { origin },
                    step: 0,
                }
            }
            other => return Err(Error::InvalidField(format!("unknown topology {other:?}"))),
        };
        Ok((field.with_step(doc.r), stencil))
    }
}

/// JSON form `{topology, M | origin, p: "num/den", r, values}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeDocument {
    pub topology: String,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none", default)]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub origin: Option<i64>,
    pub p: String,
    pub r: u64,
    pub values: Vec<Value>,
}
