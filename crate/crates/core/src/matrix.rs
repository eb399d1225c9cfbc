//! Small dense matrices over any [`Scalar`].
//!
//! Problems here never exceed a few dozen rows, so storage is a flat
//! row-major `Vec` and elimination is textbook Gaussian elimination with
//! partial pivoting. Lower-triangular systems, the common case for explicit
//! methods, are solved by substitution without pivoting.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};


use crate::scalar::{cast, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Returned when elimination meets a pivot with `|p| <= eps_zero`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Singular;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self { rows: n, cols: m, data: rows.into_iter().flatten().collect() }
    }

    pub fn column_vector(v: &[T]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    /// `(i, j, value)` triples in row-major order.
    pub fn indexed(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let cols = self.cols;
        self.data.iter().enumerate().map(move |(k, x)| (k / cols, k % cols, x))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        self.map(cast::<T, U>)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.cast()
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(T::zero(), |acc, (a, x)| acc + a.clone() * x.clone())
            })
            .collect()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| T::max_of(m, x.abs()))
    }

    pub fn min_entry(&self) -> Option<T> {
        self.data.iter().cloned().reduce(|a, b| if b < a { b } else { a })
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(Scalar::is_negligible)
    }

    pub fn all_nonneg(&self) -> bool {
        self.data.iter().all(Scalar::is_nonneg)
    }

    /// Zero (to `eps_zero`) on and above the diagonal.
    pub fn is_strictly_lower(&self) -> bool {
        self.indexed().all(|(i, j, x)| j < i || x.is_negligible())
    }

    pub fn is_lower(&self) -> bool {
        self.indexed().all(|(i, j, x)| j <= i || x.is_negligible())
    }

    /// 0/1 pattern of entries with `|x| > eps_zero`.
    pub fn incidence(&self) -> Matrix<T> {
        self.map(|x| if x.is_negligible() { T::zero() } else { T::one() })
    }

    /// Entrywise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.data.iter().zip(&other.data).all(|(a, b)| a <= b)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| T::max_of(m, (a.clone() - b.clone()).abs()))
    }

    /// Solve `self · X = rhs`.
    pub fn solve(&self, rhs: &Self) -> Result<Self, Singular> {
        assert!(self.is_square(), "solve needs a square matrix");
        assert_eq!(self.rows, rhs.rows, "dimension mismatch");
        if self.is_lower() {
            self.solve_lower(rhs)
        } else {
            self.solve_general(rhs)
        }
    }

    pub fn solve_vec(&self, rhs: &[T]) -> Result<Vec<T>, Singular> {
        Ok(self.solve(&Self::column_vector(rhs))?.data)
    }

    pub fn inverse(&self) -> Result<Self, Singular> {
        self.solve(&Self::identity(self.rows))
    }

    fn solve_lower(&self, rhs: &Self) -> Result<Self, Singular> {
        let n = self.rows;
        let mut x = Self::zeros(n, rhs.cols);
        for i in 0..n {
            let pivot = self[(i, i)].clone();
            if pivot.is_negligible() {
                return Err(Singular);
            }
            for c in 0..rhs.cols {
                let mut acc = rhs[(i, c)].clone();
                for k in 0..i {
                    let a = &self[(i, k)];
                    if !a.is_zero() && !x[(k, c)].is_zero() {
                        acc = acc - a.clone() * x[(k, c)].clone();
                    }
                }
                x[(i, c)] = if pivot.is_one() { acc } else { acc / pivot.clone() };
            }
        }
        Ok(x)
    }

    fn solve_general(&self, rhs: &Self) -> Result<Self, Singular> {
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&p, &q| {
                    a[(p, col)].abs().partial_cmp(&a[(q, col)].abs()).unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("non-empty range");
            if a[(piv, col)].is_negligible() {
                return Err(Singular);
            }
            a.swap_rows(col, piv);
            b.swap_rows(col, piv);
            let p = a[(col, col)].clone();
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone() / p.clone();
                for c in col..n {
                    let v = a[(col, c)].clone();
                    a[(r, c)] = a[(r, c)].clone() - factor.clone() * v;
                }
                for c in 0..b.cols {
                    let v = b[(col, c)].clone();
                    b[(r, c)] = b[(r, c)].clone() - factor.clone() * v;
                }
            }
        }
        let mut x = Self::zeros(n, b.cols);
        for i in (0..n).rev() {
            for c in 0..b.cols {
                let mut acc = b[(i, c)].clone();
                for k in i + 1..n {
                    acc = acc - a[(i, k)].clone() * x[(k, c)].clone();
                }
                x[(i, c)] = acc / a[(i, i)].clone();
            }
        }
        Ok(x)
    }

    /// Determinant by pivoted elimination.
    pub fn determinant(&self) -> T {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&p, &q| {
                    a[(p, col)].abs().partial_cmp(&a[(q, col)].abs()).unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("non-empty range");
            if a[(piv, col)].is_zero() {
                return T::zero();
            }
            if piv != col {
                a.swap_rows(col, piv);
                det = -det;
            }
            let p = a[(col, col)].clone();
            det = det * p.clone();
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone() / p.clone();
                for c in col..n {
                    let v = a[(col, c)].clone();
                    a[(r, c)] = a[(r, c)].clone() - factor.clone() * v;
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "dimension mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "dimension mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }
}

impl<T: Scalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;

    fn neg(self) -> Matrix<T> {
        self.map(|x| -x.clone())
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out: Matrix<T> = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }
}

impl<T: Scalar> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| format!("{x}")).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}
