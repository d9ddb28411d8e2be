//! Oracles shared by the integration targets. Nothing here calls the expansion or
//! convolution code under test.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn falling(n: usize, k: usize) -> Q {
    (0..k).fold(Q::one(), |acc, i| acc * Q::from_integer(BigInt::from(n - i)))
}

fn powi(x: &Q, n: usize) -> Q {
    (0..n).fold(Q::one(), |acc, _| acc * x)
}

/// Solves `sum_k c_k f^(k)(z0) = residual(f)` for `f = z^n`, `n = 0..=order`.
///
/// Monomial `z^n` only has derivatives up to order `n`, so the system is lower triangular.
fn fit(order: usize, z0: &Q, residual: impl Fn(usize) -> Q) -> Vec<Q> {
    let mut c: Vec<Q> = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut rhs = residual(n);
        for (k, ck) in c.iter().enumerate() {
            rhs -= ck * falling(n, k) * powi(z0, n - k);
        }
        c.push(rhs / falling(n, n));
    }
    c
}

/// `p f(x0+dx) + (1-2p) f(x0) + p f(x0-dx)` as a combination of derivatives at `x0`.
pub fn space_fit(p: &Q, dx: &Q, x0: &Q, order: usize) -> Vec<Q> {
    let centre = Q::one() - p * q(2, 1);
    fit(order, x0, |n| {
        p * powi(&(x0 + dx), n) + &centre * powi(x0, n) + p * powi(&(x0 - dx), n)
    })
}

/// `g(t0+dt) - g(t0)` as a combination of derivatives at `t0`.
pub fn time_fit(dt: &Q, t0: &Q, order: usize) -> Vec<Q> {
    fit(order, t0, |n| powi(&(t0 + dt), n) - powi(t0, n))
}

/// Modified-equation coefficients at concrete `(dx, dt)`, normalised so `U_t` has weight 1.
/// Returns `(time, space)`: `time[j]` multiplies `d_t^j U`, `space[k]` multiplies `d_x^k U`.
pub fn oracle_coefficients(p: &Q, dx: &Q, dt: &Q, time_order: usize, space_order: usize) -> (Vec<Q>, Vec<Q>) {
    let t0 = q(3, 11);
    let x0 = q(5, 7);
    let b = time_fit(dt, &t0, time_order);
    let a = space_fit(p, dx, &x0, space_order);
    let norm = b[1].clone();
    (
        b.iter().map(|v| v / &norm).collect(),
        a.iter().map(|v| v / &norm).collect(),
    )
}

/// Coefficient of `z^s` in `(p/z + 1 - 2p + p z)^r`, i.e. the lattice kernel after `r` steps.
pub fn trinomial_kernel(p: &Q, r: usize) -> Vec<Q> {
    let centre = Q::one() - p * q(2, 1);
    let mut poly = vec![Q::one()];
    for _ in 0..r {
        let mut next = vec![Q::zero(); poly.len() + 2];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c * p;
            next[i + 1] += c * &centre;
            next[i + 2] += c * p;
        }
        poly = next;
    }
    poly
}

/// Plain periodic three-point update, `steps` times, in `f64`.
pub fn naive_ring(values: &[f64], p: f64, steps: usize) -> Vec<f64> {
    let n = values.len();
    let mut u = values.to_vec();
    for _ in 0..steps {
        u = (0..n)
            .map(|s| p * u[(s + n - 1) % n] + (1.0 - 2.0 * p) * u[s] + p * u[(s + 1) % n])
            .collect();
    }
    u
}
