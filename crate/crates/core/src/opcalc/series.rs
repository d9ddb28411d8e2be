//! Truncated formal power series with exact rational coefficients, used for the
//! shift/difference/derivative operator identities `E = e^{aD}`, `Delta = E - 1`,
//! `aD = ln(1 + Delta)`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::rational::{self, factorial, Rational};

/// Coefficients of `c_0 + c_1 z + ... + c_K z^K`, where `z` stands for `aD` or `Delta_a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorSeries {
    coeffs: Vec<Rational>,
}

impl OperatorSeries {
    pub fn new(mut coeffs: Vec<Rational>, order: usize) -> Self {
        coeffs.resize(order + 1, Rational::zero());
        OperatorSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        OperatorSeries::new(Vec::new(), order)
    }

    pub fn constant(c: Rational, order: usize) -> Self {
        OperatorSeries::new(vec![c], order)
    }

    /// The series `z` itself.
    pub fn variable(order: usize) -> Self {
        let mut s = OperatorSeries::zero(order);
        if order >= 1 {
            s.coeffs[1] = Rational::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficient(&self, power: usize) -> Rational {
        self.coeffs.get(power).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coeffs
    }

    /// `(power, coefficient)` for every nonzero coefficient.
    pub fn nonzero_terms(&self) -> Vec<(usize, Rational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k, c.clone()))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|k| self.coefficient(k) + other.coefficient(k))
            .collect();
        OperatorSeries::new(coeffs, order)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|k| self.coefficient(k) - other.coefficient(k))
            .collect();
        OperatorSeries::new(coeffs, order)
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = vec![Rational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                out[i + j] += a * b;
            }
        }
        OperatorSeries::new(out, order)
    }

    /// `self(inner(z))`; `inner` must have no constant term.
    ///
    /// # Panics
    /// If `inner` has a nonzero constant term (the composition would not be a
    /// finite computation on truncated series).
    pub fn compose(&self, inner: &Self) -> Self {
        assert!(
            inner.coefficient(0).is_zero(),
            "inner series of a composition must vanish at zero"
        );
        let order = self.order().min(inner.order());
        let mut result = OperatorSeries::zero(order);
        let mut power = OperatorSeries::constant(Rational::one(), order);
        for k in 0..=order {
            let c = self.coefficient(k);
            if !c.is_zero() {
                let term = OperatorSeries::new(power.coeffs.iter().map(|x| x * &c).collect(), order);
                result = result.add(&term);
            }
            power = power.mul(inner);
        }
        result
    }
}

impl Serialize for OperatorSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.coeffs.iter().map(rational::format_rational).collect();
        strings.serialize(s)
    }
}

/// `ln(1 + w) = w - w^2/2 + w^3/3 - ...` through `w^order`; the constant term is zero.
pub fn log_series_coeffs(order: usize) -> OperatorSeries {
    let coeffs = (0..=order)
        .map(|k| {
            if k == 0 {
                Rational::zero()
            } else {
                let sign = if k % 2 == 1 { 1 } else { -1 };
                Rational::new(BigInt::from(sign), BigInt::from(k))
            }
        })
        .collect();
    OperatorSeries::new(coeffs, order)
}

/// `E_a = e^{aD} = sum (aD)^k / k!` through `k = order`.
pub fn shift_series_coeffs(order: usize) -> OperatorSeries {
    let coeffs = (0..=order)
        .map(|k| Rational::new(BigInt::one(), factorial(k as u32)))
        .collect();
    OperatorSeries::new(coeffs, order)
}

/// `Delta_a = E_a - 1`.
pub fn difference_series_coeffs(order: usize) -> OperatorSeries {
    shift_series_coeffs(order).sub(&OperatorSeries::constant(Rational::one(), order))
}

pub fn exp_minus_one(order: usize) -> OperatorSeries {
    difference_series_coeffs(order)
}

/// Residuals of the two compositions that must reduce to the identity.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub order: usize,
    /// `ln(1 + (e^z - 1)) - z`.
    pub log_of_shift: OperatorSeries,
    /// `(e^{ln(1 + w)} - 1) - w`.
    pub shift_of_log: OperatorSeries,
}

impl IdentityReport {
    pub fn holds(&self) -> bool {
        self.log_of_shift.is_zero() && self.shift_of_log.is_zero()
    }
}

pub fn operator_identity_check(order: usize) -> IdentityReport {
    let z = OperatorSeries::variable(order);
    let log_of_shift = log_series_coeffs(order)
        .compose(&difference_series_coeffs(order))
        .sub(&z);
    let shift_of_log = exp_minus_one(order)
        .compose(&log_series_coeffs(order))
        .sub(&z);
    IdentityReport {
        order,
        log_of_shift,
        shift_of_log,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn log_coefficients() {
        let s = log_series_coeffs(4);
        assert_eq!(
            &s.coefficients()[1..],
            &[ratio(1, 1), ratio(-1, 2), ratio(1, 3), ratio(-1, 4)]
        );
        assert_eq!(&log_series_coeffs(1).coefficients()[1..], &[ratio(1, 1)]);
        assert_eq!(log_series_coeffs(6).coefficient(6), ratio(-1, 6));
    }

    #[test]
    fn shift_coefficients() {
        assert_eq!(
            shift_series_coeffs(3).coefficients(),
            &[ratio(1, 1), ratio(1, 1), ratio(1, 2), ratio(1, 6)]
        );
        assert_eq!(shift_series_coeffs(0).coefficients(), &[ratio(1, 1)]);
        assert_eq!(difference_series_coeffs(5).coefficient(0), ratio(0, 1));
    }

    #[test]
    fn identities_hold_exactly() {
        for k in [1, 2, 6, 8, 12] {
            let report = operator_identity_check(k);
            assert!(report.holds(), "order {k}: {report:?}");
        }
    }

    #[test]
    fn composition_detects_a_wrong_coefficient() {
        let mut wrong = log_series_coeffs(4).coefficients().to_vec();
        wrong[3] = ratio(1, 4);
        let bad = OperatorSeries::new(wrong, 4).compose(&difference_series_coeffs(4));
        let residual = bad.sub(&OperatorSeries::variable(4));
        assert!(!residual.is_zero());
        assert_eq!(residual.nonzero_terms()[0].0, 3);
    }

    #[test]
    fn product_truncates() {
        let a = OperatorSeries::new(vec![ratio(1, 1), ratio(1, 1)], 2);
        let sq = a.mul(&a);
        assert_eq!(sq.coefficients(), &[ratio(1, 1), ratio(2, 1), ratio(1, 1)]);
        let b = OperatorSeries::new(vec![ratio(1, 1), ratio(1, 1)], 1);
        assert_eq!(a.mul(&b).order(), 1);
    }
}
