//! Gauss–Legendre rules and an adaptive panel integrator for vector-valued
//! complex integrands.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Fixed-order panel rule reused by [`adaptive`].
pub struct GaussRule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self { x, w }
    }

    fn panel<F>(&self, f: &mut F, a: f64, b: f64, dim: usize) -> Vec<C64>
    where
        F: FnMut(f64, &mut [C64]),
    {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = vec![C64::new(0.0, 0.0); dim];
        let mut buf = vec![C64::new(0.0, 0.0); dim];
        for (&xi, &wi) in self.x.iter().zip(&self.w) {
            f(mid + half * xi, &mut buf);
            for (a, v) in acc.iter_mut().zip(&buf) {
                *a += v * (wi * half);
            }
        }
        acc
    }
}

/// Adaptive bisection on [a, b] until each panel agrees with the sum of its
/// halves to `tol` (absolute, max-norm over components).
pub fn adaptive<F>(mut f: F, a: f64, b: f64, dim: usize, tol: f64) -> Result<Vec<C64>>
where
    F: FnMut(f64, &mut [C64]),
{
    let rule = GaussRule::new(20);
    let mut total = vec![C64::new(0.0, 0.0); dim];
    let whole = rule.panel(&mut f, a, b, dim);
    let mut stack = vec![(a, b, whole, 0usize)];
    let mut panels = 0usize;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        panels += 1;
        if panels > 200_000 {
            return Err(Error::Quadrature("panel budget exhausted".into()));
        }
        let mid = 0.5 * (lo + hi);
        let left = rule.panel(&mut f, lo, mid, dim);
        let right = rule.panel(&mut f, mid, hi, dim);
        let err = est
            .iter()
            .zip(left.iter().zip(&right))
            .map(|(e, (l, r))| (e - l - r).norm())
            .fold(0.0, f64::max);
        let local_tol = tol * (hi - lo).abs() / (b - a).abs();
        if err <= local_tol.max(1e-17) || depth > 48 {
            if depth > 48 && err > 1e3 * local_tol {
                return Err(Error::Quadrature(format!("no convergence near {mid}")));
            }
            for (t, (l, r)) in total.iter_mut().zip(left.iter().zip(&right)) {
                *t += l + r;
            }
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // ∫_0^1 1/(x² + 1e-4) dx = 100·atan(100)
        let v = adaptive(
            |x, out| out[0] = C64::new(1.0 / (x * x + 1e-4), 0.0),
            0.0,
            1.0,
            1,
            1e-12,
        )
        .unwrap();
        assert!((v[0].re - 100.0 * 100f64.atan()).abs() < 1e-9);
    }
}
