//! Pfaffians and the paired-state wave functions built from them.
//!
//! Amplitudes are returned in log-magnitude/phase form: Jastrow factors grow
//! factorially with the particle number.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Even-dimensional skew-symmetric matrix; only the strict upper triangle
/// is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    dim: usize,
    upper: Vec<C64>,
}

impl SkewMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        if !dim.is_multiple_of(2) {
            return Err(Error::Pfaffian(format!("dimension {dim} is odd")));
        }
        Ok(Self { dim, upper: vec![C64::new(0.0, 0.0); dim * dim.saturating_sub(1) / 2] })
    }

    /// Fill from `f(i, j)` for `i < j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            for j in i + 1..dim {
                let k = m.index(i, j);
                m.upper[k] = f(i, j);
            }
        }
        Ok(m)
    }

    fn index(&self, i: usize, j: usize) -> usize {
        // row-major strict upper triangle
        i * self.dim - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.upper[self.index(i, j)],
            std::cmp::Ordering::Greater => -self.upper[self.index(j, i)],
            std::cmp::Ordering::Equal => C64::new(0.0, 0.0),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => {
                let k = self.index(i, j);
                self.upper[k] = v;
            }
            std::cmp::Ordering::Greater => {
                let k = self.index(j, i);
                self.upper[k] = -v;
            }
            std::cmp::Ordering::Equal => {}
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { dim: self.dim, upper: self.upper.iter().map(|v| v * c).collect() }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }
}

/// `value = exp(ln_abs + i·arg)`; `ln_abs = −∞` encodes zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogAmplitude {
    pub ln_abs: f64,
    pub arg: f64,
}

impl LogAmplitude {
    pub const ONE: Self = Self { ln_abs: 0.0, arg: 0.0 };
    pub const ZERO: Self = Self { ln_abs: f64::NEG_INFINITY, arg: 0.0 };

    pub fn from_value(z: C64) -> Self {
        if z.norm() == 0.0 {
            Self::ZERO
        } else {
            Self { ln_abs: z.norm().ln(), arg: z.arg() }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }

    pub fn value(&self) -> C64 {
        if self.is_zero() {
            C64::new(0.0, 0.0)
        } else {
            C64::from_polar(self.ln_abs.exp(), self.arg)
        }
    }

    fn mul_value(self, z: C64) -> Self {
        self * Self::from_value(z)
    }
}

impl std::ops::Mul for LogAmplitude {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        let arg = (self.arg + other.arg).rem_euclid(std::f64::consts::TAU);
        let arg = if arg > std::f64::consts::PI { arg - std::f64::consts::TAU } else { arg };
        Self { ln_abs: self.ln_abs + other.ln_abs, arg }
    }
}

/// Parlett–Reid elimination with partial pivoting. Returns the factors
/// whose product is the Pfaffian (row swaps contribute `−1`), or `None` if
/// the matrix is singular.
fn elimination_factors(a: &SkewMatrix) -> Option<Vec<C64>> {
    let n = a.dim();
    let mut m = a.to_dense();
    let mut factors = Vec::with_capacity(n);
    let mut k = 0;
    while k + 1 < n {
        let (kp, best) = (k + 1..n)
            .map(|r| (r, m[(r, k)].norm()))
            .fold((k + 1, -1.0), |b, x| if x.1 > b.1 { x } else { b });
        if best == 0.0 {
            return None;
        }
        if kp != k + 1 {
            m.swap_rows(k + 1, kp);
            m.swap_columns(k + 1, kp);
            factors.push(C64::new(-1.0, 0.0));
        }
        let pivot = m[(k, k + 1)];
        factors.push(pivot);
        if k + 2 < n {
            let tau: Vec<C64> = (k + 2..n).map(|j| m[(k, j)] / pivot).collect();
            let col: Vec<C64> = (k + 2..n).map(|i| m[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    m[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    Some(factors)
}

/// Pfaffian in log form, safe against overflow.
pub fn pfaffian_log(a: &SkewMatrix) -> LogAmplitude {
    match elimination_factors(a) {
        Some(f) => f.into_iter().fold(LogAmplitude::ONE, LogAmplitude::mul_value),
        None => LogAmplitude::ZERO,
    }
}

pub fn pfaffian(a: &SkewMatrix) -> C64 {
    match elimination_factors(a) {
        Some(f) => f.into_iter().product(),
        None => C64::new(0.0, 0.0),
    }
}

fn check_distinct(points: &[C64], what: &str) -> Result<()> {
    for i in 0..points.len() {
        if !points[i].re.is_finite() || !points[i].im.is_finite() {
            return Err(Error::Pfaffian(format!("{what} {i} is not finite")));
        }
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return Err(Error::Pfaffian(format!("{what}s {i} and {j} coincide")));
            }
        }
    }
    Ok(())
}

fn jastrow_squared(z: &[C64]) -> LogAmplitude {
    let mut acc = LogAmplitude::ONE;
    for k in 0..z.len() {
        for l in k + 1..z.len() {
            let d = z[k] - z[l];
            acc = acc.mul_value(d * d);
        }
    }
    acc
}

/// `Pf[1/(z_i − z_j)] · Π_{k<l} (z_k − z_l)²`, single-particle factors
/// omitted.
pub fn ground_state_amplitude(z: &[C64]) -> Result<LogAmplitude> {
    if z.is_empty() || !z.len().is_multiple_of(2) {
        return Err(Error::Pfaffian(format!("need an even, nonzero particle count, got {}", z.len())));
    }
    check_distinct(z, "particle")?;
    let kernel = SkewMatrix::from_fn(z.len(), |i, j| 1.0 / (z[i] - z[j]))?;
    Ok(pfaffian_log(&kernel) * jastrow_squared(z))
}

/// `Pf[(z1 − z2)/(z1 z2 (z_i − z_j))] · Π_{k<l} (z_k − z_l)²` over the
/// particles, single-particle factors omitted.
pub fn two_hole_amplitude(z1: C64, z2: C64, z: &[C64]) -> Result<LogAmplitude> {
    if z.is_empty() || !z.len().is_multiple_of(2) {
        return Err(Error::Pfaffian(format!("need an even, nonzero particle count, got {}", z.len())));
    }
    if z1.norm() == 0.0 || z2.norm() == 0.0 {
        return Err(Error::Pfaffian("hole at the origin".into()));
    }
    check_distinct(z, "particle")?;
    if z.iter().any(|&p| p == z1 || p == z2) {
        return Err(Error::Pfaffian("hole coincides with a particle".into()));
    }
    let c = (z1 - z2) / (z1 * z2);
    if c.norm() == 0.0 {
        return Ok(LogAmplitude::ZERO);
    }
    let kernel = SkewMatrix::from_fn(z.len(), |i, j| c / (z[i] - z[j]))?;
    Ok(pfaffian_log(&kernel) * jastrow_squared(z))
}
