//! Dense complex polynomials (ascending coefficients) and an Aberth–Ehrlich
//! simultaneous root finder with a companion-matrix fallback.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    /// `coeffs[k]` multiplies `λ^k`.
    pub coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == C64::new(0.0, 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    pub fn from_real(c: &[f64]) -> Self {
        Self::new(c.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut c = vec![C64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        Self { coeffs: c }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> C64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    /// Value and first derivative by Horner.
    pub fn eval_with_derivative(&self, x: C64) -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::constant(C64::new(0.0, 0.0));
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or_default()
                    + other.coeffs.get(k).copied().unwrap_or_default()
            })
            .collect();
        Self::new(c)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Sum of |c_k| |x|^k, the natural scale for judging |p(x)|.
    pub fn abs_scale(&self, x: C64) -> f64 {
        let r = x.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// All roots. Aberth–Ehrlich iteration, falling back to companion-matrix
    /// eigenvalues when the iteration stalls; results are Newton-polished.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        if self.leading().norm() == 0.0 {
            return Err(Error::RootFinding("zero leading coefficient".into()));
        }
        match self.aberth(500) {
            Some(r) => Ok(r),
            None => {
                let mut r = self.companion_roots()?;
                for z in r.iter_mut() {
                    *z = self.newton_polish(*z);
                }
                Ok(r)
            }
        }
    }

    fn cauchy_radius(&self) -> f64 {
        let lead = self.leading().norm();
        1.0 + self.coeffs[..self.degree()]
            .iter()
            .map(|c| c.norm() / lead)
            .fold(0.0, f64::max)
    }

    fn aberth(&self, max_iter: usize) -> Option<Vec<C64>> {
        let n = self.degree();
        // Initial guesses on a circle whose radius is the geometric mean of
        // the root moduli (|c_0/c_n|^{1/n}), bounded by the Cauchy radius.
        let lead = self.leading().norm();
        let c0 = self.coeffs[0].norm();
        let mut r0 = if c0 > 0.0 { (c0 / lead).powf(1.0 / n as f64) } else { 1.0 };
        r0 = r0.clamp(1e-3, self.cauchy_radius());
        let centre = -self.coeffs[n - 1] / (self.coeffs[n] * n as f64);
        let mut z: Vec<C64> = (0..n)
            .map(|k| {
                let ang = 2.0 * std::f64::consts::PI * (k as f64) / n as f64 + 0.4;
                centre + C64::from_polar(r0, ang)
            })
            .collect();
        let mut done = vec![false; n];
        for _ in 0..max_iter {
            let mut all = true;
            for k in 0..n {
                if done[k] {
                    continue;
                }
                let (p, dp) = self.eval_with_derivative(z[k]);
                if p.norm() <= 4.0 * f64::EPSILON * self.abs_scale(z[k]) {
                    done[k] = true;
                    continue;
                }
                let ratio = p / dp;
                let s: C64 = (0..n)
                    .filter(|&j| j != k)
                    .map(|j| C64::new(1.0, 0.0) / (z[k] - z[j]))
                    .sum();
                let corr = ratio / (C64::new(1.0, 0.0) - ratio * s);
                if !corr.re.is_finite() || !corr.im.is_finite() {
                    return None;
                }
                z[k] -= corr;
                if corr.norm() <= 1e-15 * z[k].norm().max(1e-300) {
                    done[k] = true;
                } else {
                    all = false;
                }
            }
            if all {
                return Some(z.into_iter().map(|x| self.newton_polish(x)).collect());
            }
        }
        None
    }

    fn newton_polish(&self, mut z: C64) -> C64 {
        for _ in 0..3 {
            let (p, dp) = self.eval_with_derivative(z);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            let cand = z - step;
            if self.eval(cand).norm() <= p.norm() {
                z = cand;
            } else {
                break;
            }
        }
        z
    }

    fn companion_roots(&self) -> Result<Vec<C64>> {
        let n = self.degree();
        let lead = self.leading();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..n {
            m[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::RootFinding("companion Schur failed".into()))?;
        let (_, t) = schur.unpack();
        Ok((0..n).map(|i| t[(i, i)]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn known_quartic() {
        // (λ²+1)(λ²+4)
        let p = Poly::from_real(&[4.0, 0.0, 5.0, 0.0, 1.0]);
        let mut r = p.roots().unwrap();
        r.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        let expect = [c(0.0, -2.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 2.0)];
        for (a, b) in r.iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn reexpansion_matches() {
        let roots = vec![c(1.0, 2.0), c(-0.5, 0.1), c(3.0, -1.0), c(0.2, 0.2), c(-2.0, 0.0)];
        let p = Poly::from_roots(&roots);
        let found = p.roots().unwrap();
        let q = Poly::from_roots(&found);
        for (a, b) in p.coeffs.iter().zip(q.coeffs.iter()) {
            assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn companion_fallback_agrees() {
        let p = Poly::from_roots(&[c(1.0, 0.0), c(2.0, 1.0), c(-1.0, -3.0)]);
        let mut a = p.companion_roots().unwrap();
        let mut b = p.roots().unwrap();
        let key = |z: &C64| (z.re * 1e6).round() as i64;
        a.sort_by_key(key);
        b.sort_by_key(key);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn derivative_and_mul() {
        let p = Poly::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(p.derivative(), Poly::from_real(&[2.0, 6.0]));
        let q = p.mul(&Poly::from_real(&[0.0, 1.0]));
        assert_eq!(q, Poly::from_real(&[0.0, 1.0, 2.0, 3.0]));
    }
}
