//! Riemann theta function `θ(z|B) = Σ_n exp 2πi(n·z + ½ nᵀBn)` and the
//! Jacobian lattice `ℤ^g + Bℤ^g`.
//!
//! Summation runs over the lattice ellipsoid centred at `−Y⁻¹ Im z`
//! (`Y = Im B`), where the terms are largest; everything is computed in the
//! normalized form `exp(−π Im zᵀ Y⁻¹ Im z) θ(z)` whose terms are bounded by 1.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ThetaContext {
    pub b: DMatrix<C64>,
    y: DMatrix<f64>,
    y_inv: DMatrix<f64>,
    /// Upper-triangular `R` with `Y = RᵀR`.
    r: DMatrix<f64>,
    /// Ellipsoid radius: terms with `π‖R(n+c)‖² > radius²` are dropped.
    radius_sq: f64,
    pub tol: f64,
}

impl ThetaContext {
    pub fn new(b: DMatrix<C64>, tol: f64) -> Result<Self> {
        let g = b.nrows();
        if g == 0 || b.ncols() != g {
            return Err(Error::InvalidPeriods("period matrix must be square and non-empty".into()));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidPeriods("theta tolerance must be positive".into()));
        }
        let y = b.map(|v| v.im);
        let y = 0.5 * (&y + y.transpose());
        let chol = y
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidPeriods("Im B is not positive definite".into()))?;
        let r = chol.l().transpose();
        let y_inv = chol.inverse();
        // Tail of the normalized sum (including the |n| factor of the
        // gradient) is below tol·e^{-8} once π r² exceeds this.
        let radius_sq = (1.0 / tol).ln() + 8.0 + 2.0 * g as f64;
        Ok(Self { b, y, y_inv, r, radius_sq, tol })
    }

    pub fn genus(&self) -> usize {
        self.b.nrows()
    }

    pub fn imag_part(&self) -> &DMatrix<f64> {
        &self.y
    }

    /// `π Im zᵀ Y⁻¹ Im z`, the log of the normalization factor.
    pub fn log_scale(&self, z: &[C64]) -> f64 {
        let yz = DVector::from_iterator(z.len(), z.iter().map(|v| v.im));
        PI * (yz.transpose() * &self.y_inv * &yz)[(0, 0)]
    }

    /// Visit every lattice vector in the truncation ellipsoid centred at `−c`.
    fn enumerate<F: FnMut(&[i64])>(&self, c: &[f64], mut visit: F) {
        let g = self.genus();
        let bound = self.radius_sq / PI;
        let mut n = vec![0i64; g];
        self.enumerate_level(g, c, bound, &mut n, &mut visit);
    }

    fn enumerate_level<F: FnMut(&[i64])>(
        &self,
        level: usize,
        c: &[f64],
        remaining: f64,
        n: &mut Vec<i64>,
        visit: &mut F,
    ) {
        if level == 0 {
            visit(n);
            return;
        }
        let i = level - 1;
        let rii = self.r[(i, i)];
        // offset from already-fixed coordinates j > i
        let mut shift = rii * c[i];
        for j in (i + 1)..n.len() {
            shift += self.r[(i, j)] * (n[j] as f64 + c[j]);
        }
        // (rii·n_i + shift)² ≤ remaining
        let half = remaining.max(0.0).sqrt() / rii;
        let centre = -shift / rii;
        let lo = (centre - half).ceil() as i64;
        let hi = (centre + half).floor() as i64;
        for k in lo..=hi {
            let v = rii * k as f64 + shift;
            n[i] = k;
            self.enumerate_level(level - 1, c, remaining - v * v, n, visit);
        }
        n[i] = 0;
    }

    /// Normalized theta and gradient: returns `(θ̃, ∇θ̃)` where
    /// `θ(z) = e^{log_scale(z)} θ̃(z)` and likewise for the gradient.
    pub fn normalized_with_gradient(&self, z: &[C64]) -> (C64, Vec<C64>) {
        let g = self.genus();
        let yz = DVector::from_iterator(g, z.iter().map(|v| v.im));
        let c: Vec<f64> = (&self.y_inv * &yz).iter().copied().collect();
        let log_scale = PI * yz.dot(&DVector::from_column_slice(&c));
        let mut val = C64::new(0.0, 0.0);
        let mut grad = vec![C64::new(0.0, 0.0); g];
        let two_pi_i = C64::new(0.0, 2.0 * PI);
        self.enumerate(&c, |n| {
            let mut lin = C64::new(0.0, 0.0);
            let mut quad = C64::new(0.0, 0.0);
            for i in 0..g {
                let ni = n[i] as f64;
                lin += z[i] * ni;
                for j in 0..g {
                    quad += self.b[(i, j)] * (ni * n[j] as f64);
                }
            }
            let term = (two_pi_i * (lin + 0.5 * quad) - log_scale).exp();
            val += term;
            for i in 0..g {
                grad[i] += term * two_pi_i * n[i] as f64;
            }
        });
        (val, grad)
    }

    pub fn normalized(&self, z: &[C64]) -> C64 {
        self.normalized_with_gradient(z).0
    }

    /// `θ(z|B)`. For large `Im z` prefer [`ThetaContext::normalized`].
    pub fn theta(&self, z: &[C64]) -> C64 {
        let (v, _) = self.normalized_with_gradient(z);
        v * self.log_scale(z).exp()
    }

    pub fn theta_with_gradient(&self, z: &[C64]) -> (C64, Vec<C64>) {
        let (v, g) = self.normalized_with_gradient(z);
        let s = self.log_scale(z).exp();
        (v * s, g.into_iter().map(|x| x * s).collect())
    }

    /// `∇θ / θ`.
    pub fn log_gradient(&self, z: &[C64]) -> Vec<C64> {
        let (v, g) = self.normalized_with_gradient(z);
        g.into_iter().map(|x| x / v).collect()
    }

    /// Integer vectors `(m, n)` with `w ≈ m + B n`, and the residual
    /// `|w − m − Bn|`.
    pub fn lattice_decompose(&self, w: &[C64]) -> (Vec<i64>, Vec<i64>, f64) {
        let g = self.genus();
        let yw = DVector::from_iterator(g, w.iter().map(|v| v.im));
        let n: Vec<i64> = (&self.y_inv * yw).iter().map(|v| v.round() as i64).collect();
        let rest: Vec<C64> = (0..g)
            .map(|i| w[i] - (0..g).map(|j| self.b[(i, j)] * n[j] as f64).sum::<C64>())
            .collect();
        let m: Vec<i64> = rest.iter().map(|v| v.re.round() as i64).collect();
        let res = rest
            .iter()
            .zip(&m)
            .map(|(v, &mi)| (v - mi as f64).norm())
            .fold(0.0, f64::max);
        (m, n, res)
    }

    /// Distance of `w` from the period lattice.
    pub fn lattice_residual(&self, w: &[C64]) -> f64 {
        self.lattice_decompose(w).2
    }

    pub fn reduce(&self, z: &[C64]) -> JacobianPoint {
        let g = self.genus();
        let yz = DVector::from_iterator(g, z.iter().map(|v| v.im));
        let n: Vec<f64> = (&self.y_inv * yz).iter().map(|v| v.round()).collect();
        let shifted: Vec<C64> = (0..g)
            .map(|i| z[i] - (0..g).map(|j| self.b[(i, j)] * n[j]).sum::<C64>())
            .collect();
        let z = shifted.iter().map(|v| C64::new(v.re - v.re.round(), v.im)).collect();
        JacobianPoint { z, reduced: true }
    }
}

/// A point of `ℂ^g`, optionally reduced into the fundamental domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianPoint {
    pub z: Vec<C64>,
    pub reduced: bool,
}

impl JacobianPoint {
    pub fn new(z: Vec<C64>) -> Self {
        Self { z, reduced: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_b(g: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        let a: DMatrix<f64> = DMatrix::from_fn(g, g, |_, _| rng.gen_range(-0.5..0.5));
        let y = &a * a.transpose() + DMatrix::identity(g, g) * 0.6;
        let x: DMatrix<f64> = DMatrix::from_fn(g, g, |_, _| rng.gen_range(-0.5..0.5));
        let x = 0.5 * (&x + x.transpose());
        DMatrix::from_fn(g, g, |i, j| C64::new(x[(i, j)], y[(i, j)]))
    }

    fn brute(b: &DMatrix<C64>, z: &[C64], radius: i64) -> C64 {
        let g = z.len();
        let mut total = C64::new(0.0, 0.0);
        let count = (2 * radius + 1).pow(g as u32);
        for idx in 0..count {
            let mut k = idx;
            let n: Vec<f64> = (0..g)
                .map(|_| {
                    let v = (k % (2 * radius + 1)) - radius;
                    k /= 2 * radius + 1;
                    v as f64
                })
                .collect();
            let mut e = C64::new(0.0, 0.0);
            for i in 0..g {
                e += n[i] * z[i];
                for j in 0..g {
                    e += 0.5 * n[i] * n[j] * b[(i, j)];
                }
            }
            total += (C64::new(0.0, 2.0 * PI) * e).exp();
        }
        total
    }

    #[test]
    fn matches_brute_force_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in 1..=2 {
            let b = sample_b(g, &mut rng);
            let ctx = ThetaContext::new(b.clone(), 1e-14).unwrap();
            for _ in 0..10 {
                let z: Vec<C64> =
                    (0..g).map(|_| C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect();
                let r = if g == 1 { 60 } else { 25 };
                assert!((ctx.theta(&z) - brute(&b, &z, r)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let b = sample_b(3, &mut rng);
        let ctx = ThetaContext::new(b, 1e-14).unwrap();
        let z = vec![C64::new(0.1, 0.2), C64::new(-0.3, 0.05), C64::new(0.25, -0.1)];
        let (_, grad) = ctx.theta_with_gradient(&z);
        let h = 1e-6;
        for k in 0..3 {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += h;
            zm[k] -= h;
            let fd = (ctx.theta(&zp) - ctx.theta(&zm)) / (2.0 * h);
            assert!((fd - grad[k]).norm() < 1e-7 * grad[k].norm().max(1.0));
        }
    }

    #[test]
    fn reduction_is_idempotent_and_lattice_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let b = sample_b(2, &mut rng);
        let ctx = ThetaContext::new(b.clone(), 1e-12).unwrap();
        let z = vec![C64::new(3.7, 2.9), C64::new(-5.2, -1.4)];
        let r1 = ctx.reduce(&z);
        let r2 = ctx.reduce(&r1.z);
        for (a, b) in r1.z.iter().zip(&r2.z) {
            assert!((a - b).norm() < 1e-12);
        }
        let diff: Vec<C64> = z.iter().zip(&r1.z).map(|(a, b)| a - b).collect();
        assert!(ctx.lattice_residual(&diff) < 1e-12);
    }

    #[test]
    fn rejects_indefinite_imaginary_part() {
        let b = DMatrix::from_row_slice(1, 1, &[C64::new(0.0, -1.0)]);
        assert!(ThetaContext::new(b, 1e-10).is_err());
    }
}
