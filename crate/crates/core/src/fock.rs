//! Truncated Fock-space primitives.
//!
//! Single-mode operators are `d x d` matrices over `|0>, ..., |d-1>`. Two-mode
//! objects use the product basis `|n1> (x) |n2>` with row-major index `n1 * d2 + n2`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DpaError, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Entry-wise tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Per-mode Fock dimensions of a two-mode space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockCutoff {
    pub d1: usize,
    pub d2: usize,
}

impl FockCutoff {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        check_dim(d1)?;
        check_dim(d2)?;
        Ok(Self { d1, d2 })
    }

    pub fn symmetric(d: usize) -> Result<Self> {
        Self::new(d, d)
    }

    pub fn dim(&self) -> usize {
        self.d1 * self.d2
    }

    #[inline]
    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * self.d2 + n2
    }

    #[inline]
    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx / self.d2, idx % self.d2)
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(DpaError::InvalidDimension(format!(
            "mode dimension must be at least 2, got {d}"
        )));
    }
    Ok(())
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry-wise deviation from `M = M†`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Square sub-block over indices `0..n`.
    pub fn leading_block(&self, n: usize) -> Self {
        Self::from_fn(n, n, |i, j| self[(i, j)])
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `a†` truncated to `d` levels: `<n+1|a†|n> = sqrt(n+1)`, the top level maps to nothing.
pub fn creation_matrix(d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    let mut m = ComplexMatrix::zeros(d, d);
    for n in 0..d - 1 {
        m[(n + 1, n)] = C64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    Ok(m)
}

pub fn annihilation_matrix(d: usize) -> Result<ComplexMatrix> {
    Ok(creation_matrix(d)?.transpose())
}

/// `(-1)^{a†a}`.
pub fn parity_matrix(d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    let diag: Vec<C64> = (0..d).map(|n| C64::new(parity_sign(n), 0.0)).collect();
    Ok(ComplexMatrix::diagonal(&diag))
}

#[inline]
pub(crate) fn parity_sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `ln(n!)` for `n = 0..len`.
pub(crate) fn ln_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0;
    out.push(0.0);
    for n in 1..len {
        acc += (n as f64).ln();
        out.push(acc);
    }
    out
}

const RESCALE: f64 = 1e150;

/// `<m|D(beta)|n>` for `D(beta) = exp(beta a† - conj(beta) a)`, from the associated-Laguerre
/// closed form. Matrix elements are those of the infinite-dimensional operator restricted
/// to the first `d` levels.
pub fn displacement_matrix(beta: C64, d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    if !beta.re.is_finite() || !beta.im.is_finite() {
        return Err(DpaError::InvalidParameter(format!(
            "displacement amplitude must be finite, got {beta}"
        )));
    }
    let x = beta.norm_sqr();
    if x == 0.0 {
        return Ok(ComplexMatrix::identity(d));
    }
    let ln_abs = 0.5 * x.ln();
    let theta = beta.arg();
    let lnf = ln_factorials(d);
    let mut m = ComplexMatrix::zeros(d, d);

    for k in 0..d {
        let kf = k as f64;
        let lower = C64::from_polar(1.0, kf * theta);
        let upper = C64::from_polar(parity_sign(k), -kf * theta);
        // L_j^{(k)}(x) for j = 0..d-k by forward recurrence, carried with a log scale.
        let mut scale = 0.0f64;
        let mut prev = 0.0f64;
        let mut cur = 1.0f64;
        for j in 0..d - k {
            if j == 1 {
                prev = cur;
                cur = 1.0 + kf - x;
            } else if j > 1 {
                let jf = (j - 1) as f64;
                let next = ((2.0 * jf + 1.0 + kf - x) * cur - (jf + kf) * prev) / (jf + 1.0);
                prev = cur;
                cur = next;
            }
            if cur.abs() > RESCALE {
                cur /= RESCALE;
                prev /= RESCALE;
                scale += RESCALE.ln();
            }
            let log_pref = 0.5 * (lnf[j] - lnf[j + k]) + kf * ln_abs - 0.5 * x + scale;
            let mag = cur * log_pref.exp();
            m[(j + k, j)] = lower * mag;
            if k > 0 {
                m[(j, j + k)] = upper * mag;
            }
        }
    }
    Ok(m)
}

/// A point in the four-dimensional quadrature phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q1: f64,
    pub p1: f64,
    pub q2: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub fn new(q1: f64, p1: f64, q2: f64, p2: f64) -> Self {
        Self { q1, p1, q2, p2 }
    }

    pub fn origin() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    /// Build from complex amplitudes, inverting `beta = (q + i p)/sqrt(2)`.
    pub fn from_betas(beta1: C64, beta2: C64) -> Self {
        let s = std::f64::consts::SQRT_2;
        Self::new(beta1.re * s, beta1.im * s, beta2.re * s, beta2.im * s)
    }

    pub fn beta1(&self) -> C64 {
        C64::new(self.q1, self.p1) / std::f64::consts::SQRT_2
    }

    pub fn beta2(&self) -> C64 {
        C64::new(self.q2, self.p2) / std::f64::consts::SQRT_2
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.q1, self.p1, self.q2, self.p2]
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }
}
