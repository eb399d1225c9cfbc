//! Dense bivariate polynomials in `(z, z̃)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::scalar::Scalar;

/// `Σ μ_jk z^j z̃^k`, stored densely for `j, k ≤ degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariatePoly<T> {
    degree: usize,
    /// Row `j`, column `k`.
    c: Vec<Vec<T>>,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

pub(crate) fn scalar_of<T: Scalar>(n: u128) -> T {
    T::from_u128(n).expect("integer fits")
}

impl<T: Scalar> BivariatePoly<T> {
    pub fn zero(degree: usize) -> Self {
        Self { degree, c: vec![vec![T::zero(); degree + 1]; degree + 1] }
    }

    pub fn constant(x: T) -> Self {
        let mut p = Self::zero(0);
        p.c[0][0] = x;
        p
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    /// `a z + b z̃`.
    pub fn linear(a: T, b: T) -> Self {
        let mut p = Self::zero(1);
        p.c[1][0] = a;
        p.c[0][1] = b;
        p
    }

    pub fn from_fn(degree: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut p = Self::zero(degree);
        for j in 0..=degree {
            for k in 0..=degree - j {
                p.c[j][k] = f(j, k);
            }
        }
        p
    }

    pub fn degree_bound(&self) -> usize {
        self.degree
    }

    /// Actual total degree (0 for the zero polynomial).
    pub fn total_degree(&self) -> usize {
        self.terms().map(|(j, k, _)| j + k).max().unwrap_or(0)
    }

    /// `μ_jk`; zero outside the stored range.
    pub fn coeff(&self, j: usize, k: usize) -> T {
        self.c.get(j).and_then(|row| row.get(k)).cloned().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, j: usize, k: usize, value: T) {
        let need = j.max(k);
        if need > self.degree {
            self.grow(need);
        }
        self.c[j][k] = value;
    }

    fn grow(&mut self, degree: usize) {
        for row in &mut self.c {
            row.resize(degree + 1, T::zero());
        }
        self.c.resize(degree + 1, vec![T::zero(); degree + 1]);
        self.degree = degree;
    }

    /// Nonzero terms `(j, k, μ_jk)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.c
            .iter()
            .enumerate()
            .flat_map(|(j, row)| row.iter().enumerate().map(move |(k, x)| (j, k, x)))
            .filter(|(_, _, x)| !x.is_zero())
    }

    pub fn scale(&self, a: &T) -> Self {
        Self { degree: self.degree, c: self.c.iter().map(|row| row.iter().map(|x| x.clone() * a.clone()).collect()).collect() }
    }

    pub fn eval(&self, z: &T, zt: &T) -> T {
        // Horner in z̃ inside Horner in z.
        self.c.iter().rev().fold(T::zero(), |acc, row| {
            let inner = row.iter().rev().fold(T::zero(), |a, x| a * zt.clone() + x.clone());
            acc * z.clone() + inner
        })
    }

    /// Coefficients of `ψ(z, −z)` in powers of `z`.
    pub fn antidiagonal(&self) -> Vec<T> {
        let mut out = vec![T::zero(); 2 * self.degree + 1];
        for (j, k, x) in self.terms() {
            let v = if k % 2 == 0 { x.clone() } else { -x.clone() };
            out[j + k] = out[j + k].clone() + v;
        }
        trim_vec(out)
    }

    /// Coefficients of `ψ(z, z)` in powers of `z`.
    pub fn diagonal(&self) -> Vec<T> {
        let mut out = vec![T::zero(); 2 * self.degree + 1];
        for (j, k, x) in self.terms() {
            out[j + k] = out[j + k].clone() + x.clone();
        }
        trim_vec(out)
    }

    pub fn cast<U: Scalar>(&self) -> BivariatePoly<U> {
        BivariatePoly {
            degree: self.degree,
            c: self.c.iter().map(|row| row.iter().map(crate::scalar::cast).collect()).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let d = self.degree.max(other.degree);
        let mut m = T::zero();
        for j in 0..=d {
            for k in 0..=d {
                m = T::max_of(m, (self.coeff(j, k) - other.coeff(j, k)).abs());
            }
        }
        m
    }
}

fn trim_vec<T: Scalar>(mut v: Vec<T>) -> Vec<T> {
    while v.len() > 1 && v.last().is_some_and(|x| x.is_zero()) {
        v.pop();
    }
    v
}

impl<T: Scalar> Add for &BivariatePoly<T> {
    type Output = BivariatePoly<T>;

    fn add(self, rhs: &BivariatePoly<T>) -> BivariatePoly<T> {
        let d = self.degree.max(rhs.degree);
        BivariatePoly::from_fn(d, |j, k| self.coeff(j, k) + rhs.coeff(j, k))
    }
}

impl<T: Scalar> Sub for &BivariatePoly<T> {
    type Output = BivariatePoly<T>;

    fn sub(self, rhs: &BivariatePoly<T>) -> BivariatePoly<T> {
        let d = self.degree.max(rhs.degree);
        BivariatePoly::from_fn(d, |j, k| self.coeff(j, k) - rhs.coeff(j, k))
    }
}

impl<T: Scalar> Mul for &BivariatePoly<T> {
    type Output = BivariatePoly<T>;

    fn mul(self, rhs: &BivariatePoly<T>) -> BivariatePoly<T> {
        let mut out: BivariatePoly<T> = BivariatePoly::zero(self.degree + rhs.degree);
        for (j1, k1, a) in self.terms() {
            for (j2, k2, b) in rhs.terms() {
                let (j, k) = (j1 + j2, k1 + k2);
                out.c[j][k] = out.c[j][k].clone() + a.clone() * b.clone();
            }
        }
        out
    }
}

impl<T: Scalar> fmt::Display for BivariatePoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<(usize, usize, &T)> = self.terms().collect();
        terms.sort_by_key(|&(j, k, _)| (j + k, k));
        if terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = terms
            .into_iter()
            .map(|(j, k, x)| {
                let mono = [("z", j), ("zt", k)]
                    .iter()
                    .filter(|(_, e)| *e > 0)
                    .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
                    .collect::<Vec<_>>()
                    .join("*");
                if mono.is_empty() {
                    format!("{x}")
                } else {
                    format!("({x})*{mono}")
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}
