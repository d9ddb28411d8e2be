//! Exact rationals and the scalar abstraction shared by exact and float code paths.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"n/d"`, integers and decimal literals (`"0.3"`, `"-1.5e-2"`) exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n.trim().parse().map_err(|_| bad(text))?;
        let den: BigInt = d.trim().parse().map_err(|_| bad(text))?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad(text))?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad(text));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().map_err(|_| bad(text))?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    value *= pow(&ten, scale);
    Ok(if negative { -value } else { value })
}

fn bad(text: &str) -> Error {
    Error::Parse(format!("not a rational number: {text:?}"))
}

/// Always renders as `"num/den"`, including integers (`"2/1"`).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Exact value of a finite float (every finite `f64` is a dyadic rational).
pub fn from_f64(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| Error::Parse(format!("{v} is not a finite number")))
}

pub fn to_f64(r: &Rational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Integer power, negative exponents allowed for nonzero bases.
pub fn pow(base: &Rational, exp: i32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp.unsigned_abs() {
        acc *= base;
    }
    if exp < 0 {
        acc.recip()
    } else {
        acc
    }
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Serde adapter storing a rational as a `"num/den"` string.
pub mod as_string {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Arithmetic the lattice and explicit solvers run on: exact rationals or `f64`.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;

    /// CSV cell: `"num/den"` for rationals, 17 significant digits for floats.
    fn to_csv(&self) -> String;
    fn to_json(&self) -> Value;
    fn from_json(value: &Value) -> Result<Self>;
    fn parse(text: &str) -> Result<Self>;

    /// `steps` applications of the symmetric three-point rule `[p, 1 - 2p, p]`.
    ///
    /// `periodic` wraps indices; otherwise the support grows by one cell per side per step
    /// and the result has `values.len() + 2 * steps` entries.
    fn convolve_steps(values: &[Self], p: &Rational, periodic: bool, steps: u64) -> Vec<Self> {
        let side = Self::from_rational(p);
        let center = Self::one() - side.clone() - side.clone();
        let mut current = values.to_vec();
        for _ in 0..steps {
            current = three_point(&current, &side, &center, periodic);
        }
        current
    }
}

/// One update `u'_s = w u_{s-1} + c u_s + w u_{s+1}` with a generic scalar.
pub(crate) fn three_point<T: Scalar>(values: &[T], side: &T, center: &T, periodic: bool) -> Vec<T> {
    let n = values.len();
    if periodic {
        (0..n)
            .map(|s| {
                let left = &values[(s + n - 1) % n];
                let right = &values[(s + 1) % n];
                side.clone() * left.clone() + center.clone() * values[s].clone() + side.clone() * right.clone()
            })
            .collect()
    } else {
        let at = |i: isize| -> T {
            if i < 0 || i as usize >= n {
                T::zero()
            } else {
                values[i as usize].clone()
            }
        };
        (0..n as isize + 2)
            .map(|s| {
                let i = s - 1;
                side.clone() * at(i - 1) + center.clone() * at(i) + side.clone() * at(i + 1)
            })
            .collect()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn to_csv(&self) -> String {
        format!("{:.16e}", self)
    }
    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }
    fn from_json(value: &Value) -> Result<Self> {
        match value {
            Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}"))),
            Value::String(s) => <f64 as Scalar>::parse(s),
            other => Err(Error::Parse(format!("expected a number, found {other}"))),
        }
    }
    fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.contains('/') {
            return Ok(to_f64(&parse_rational(t)?));
        }
        t.parse().map_err(|_| Error::Parse(format!("not a number: {text:?}")))
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        to_f64(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn to_csv(&self) -> String {
        format_rational(self)
    }
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
    fn from_json(value: &Value) -> Result<Self> {
        match value {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => parse_rational(&n.to_string()),
            other => Err(Error::Parse(format!("expected a rational string, found {other}"))),
        }
    }
    fn parse(text: &str) -> Result<Self> {
        parse_rational(text)
    }

    // Runs on integer numerators over a shared denominator; per-operation gcd
    // normalisation is far too slow for thousands of steps.
    fn convolve_steps(values: &[Self], p: &Rational, periodic: bool, steps: u64) -> Vec<Self> {
        if steps == 0 {
            return values.to_vec();
        }
        let common = values
            .iter()
            .fold(BigInt::one(), |acc, v| num_integer::Integer::lcm(&acc, v.denom()));
        let mut nums: Vec<BigInt> = values
            .iter()
            .map(|v| v.numer() * (&common / v.denom()))
            .collect();
        let side = p.numer().clone();
        let den = p.denom().clone();
        let center = &den - &side * 2;

        let n0 = nums.len();
        let mut next;
        if periodic {
            next = vec![BigInt::zero(); n0];
            for _ in 0..steps {
                for s in 0..n0 {
                    let l = &nums[(s + n0 - 1) % n0];
                    let r = &nums[(s + 1) % n0];
                    combine(&mut next[s], l, &nums[s], r, &side, &center);
                }
                std::mem::swap(&mut nums, &mut next);
            }
        } else {
            // Pad once to the final width; the active window widens by one per side per step.
            let width = n0 + 2 * steps as usize;
            let pad = steps as usize;
            let mut padded = vec![BigInt::zero(); width];
            for (i, v) in nums.drain(..).enumerate() {
                padded[pad + i] = v;
            }
            nums = padded;
            next = vec![BigInt::zero(); width];
            let (mut lo, mut hi) = (pad, pad + n0);
            for _ in 0..steps {
                lo -= 1;
                hi += 1;
                for s in lo..hi {
                    let zero = BigInt::zero();
                    let l = if s > 0 { &nums[s - 1] } else { &zero };
                    let r = if s + 1 < width { &nums[s + 1] } else { &zero };
                    combine(&mut next[s], l, &nums[s], r, &side, &center);
                }
                std::mem::swap(&mut nums, &mut next);
            }
        }
        let denominator = common * num_traits::pow(den, steps as usize);
        nums.into_iter()
            .map(|n| Rational::new(n, denominator.clone()))
            .collect()
    }
}

fn combine(out: &mut BigInt, left: &BigInt, mid: &BigInt, right: &BigInt, side: &BigInt, center: &BigInt) {
    out.clone_from(left);
    *out += right;
    if !side.is_one() {
        *out *= side;
    }
    if center.is_one() {
        *out += mid;
    } else if !center.is_zero() {
        *out += mid * center;
    }
}
