//! Dormand–Prince 5(4) integrator with PI step-size control.
//!
//! Shared by the classical spin flow and the Dubrovin flow so that both see
//! the same error-control semantics: `tol` is used as both the absolute and
//! relative per-step local error target.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub tol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, h_init: None, h_max: f64::INFINITY, max_steps: 10_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Adaptive stepper. Keeps the last step size and controller memory so that
/// successive calls to [`Dopri5::advance`] continue smoothly.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    opts: OdeOptions,
    h: Option<f64>,
    err_old: f64,
    pub stats: OdeStats,
}

impl Dopri5 {
    pub fn new(opts: OdeOptions) -> Self {
        Self { opts, h: opts.h_init, err_old: 1e-4, stats: OdeStats::default() }
    }

    fn initial_step<F>(&mut self, f: &mut F, t: f64, y: &[f64], k1: &[f64], dir: f64) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        // Hairer's heuristic.
        let tol = self.opts.tol;
        let n = y.len().max(1) as f64;
        let sc = |v: f64| tol + tol * v.abs();
        let d0 = (y.iter().map(|v| (v / sc(*v)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (k1.iter().zip(y).map(|(k, v)| (k / sc(*v)).powi(2)).sum::<f64>() / n).sqrt();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.opts.h_max);
        let y1: Vec<f64> = y.iter().zip(k1).map(|(v, k)| v + dir * h0 * k).collect();
        let mut k2 = vec![0.0; y.len()];
        f(t + dir * h0, &y1, &mut k2);
        self.stats.evaluations += 1;
        let d2 = (k2
            .iter()
            .zip(k1)
            .zip(y)
            .map(|((a, b), v)| ((a - b) / sc(*v)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.opts.h_max)
    }

    /// Advance `y` from `*t` to exactly `t_end`. After every accepted step
    /// `on_step(t, y)` is called; it may modify `y` in place (chart changes)
    /// and must then return `true` so the FSAL derivative is recomputed.
    pub fn advance<F, G>(
        &mut self,
        f: &mut F,
        t: &mut f64,
        y: &mut [f64],
        t_end: f64,
        mut on_step: G,
    ) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        G: FnMut(f64, &mut [f64]) -> Result<bool>,
    {
        let dim = y.len();
        if (t_end - *t).abs() == 0.0 {
            return Ok(());
        }
        let dir = (t_end - *t).signum();
        let mut k1 = vec![0.0; dim];
        let mut k2 = vec![0.0; dim];
        let mut k3 = vec![0.0; dim];
        let mut k4 = vec![0.0; dim];
        let mut k5 = vec![0.0; dim];
        let mut k6 = vec![0.0; dim];
        let mut k7 = vec![0.0; dim];
        let mut ys = vec![0.0; dim];
        let mut ynew = vec![0.0; dim];
        f(*t, y, &mut k1);
        self.stats.evaluations += 1;
        let mut h = match self.h {
            Some(h) => h.abs(),
            None => self.initial_step(f, *t, y, &k1, dir),
        };
        let tol = self.opts.tol;
        let beta = 0.04;
        let expo1 = 0.2 - beta * 0.75;
        let mut steps = 0usize;
        loop {
            let remaining = (t_end - *t) * dir;
            if remaining <= 0.0 {
                break;
            }
            let mut last = false;
            if h >= remaining {
                h = remaining;
                last = true;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: *t });
            }
            steps += 1;
            if steps > self.opts.max_steps {
                return Err(Error::StepUnderflow { t: *t });
            }
            let hs = h * dir;
            for i in 0..dim {
                ys[i] = y[i] + hs * A21 * k1[i];
            }
            f(*t + C2 * hs, &ys, &mut k2);
            for i in 0..dim {
                ys[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
            }
            f(*t + C3 * hs, &ys, &mut k3);
            for i in 0..dim {
                ys[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            f(*t + C4 * hs, &ys, &mut k4);
            for i in 0..dim {
                ys[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            f(*t + C5 * hs, &ys, &mut k5);
            for i in 0..dim {
                ys[i] = y[i]
                    + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let t_new = if last { t_end } else { *t + hs };
            f(t_new, &ys, &mut k6);
            for i in 0..dim {
                ynew[i] = y[i]
                    + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            f(t_new, &ynew, &mut k7);
            self.stats.evaluations += 6;
            let mut err = 0.0;
            for i in 0..dim {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = tol + tol * y[i].abs().max(ynew[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / dim.max(1) as f64).sqrt();
            if !err.is_finite() {
                self.stats.rejected += 1;
                h *= 0.2;
                continue;
            }
            let fac11 = err.powf(expo1);
            let fac = (fac11 / self.err_old.powf(beta) / 0.9).clamp(0.1, 5.0);
            let h_new = (h / fac).min(self.opts.h_max);
            if err <= 1.0 {
                self.stats.accepted += 1;
                self.err_old = err.max(1e-4);
                y.copy_from_slice(&ynew);
                *t = t_new;
                if on_step(*t, y)? {
                    f(*t, y, &mut k1);
                    self.stats.evaluations += 1;
                } else {
                    std::mem::swap(&mut k1, &mut k7);
                }
                if !last {
                    h = h_new;
                    self.h = Some(h);
                }
            } else {
                self.stats.rejected += 1;
                h = (h / (fac11 / 0.9).min(5.0)).min(h);
            }
        }
        Ok(())
    }
}

/// Integrate and return the state at each requested sample time (the first
/// sample may equal `t0`).
pub fn integrate_samples<F>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    samples: &[f64],
    opts: OdeOptions,
) -> Result<(Vec<Vec<f64>>, OdeStats)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut stepper = Dopri5::new(opts);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(samples.len());
    for &ts in samples {
        stepper.advance(&mut f, &mut t, &mut y, ts, |_, _| Ok(false))?;
        out.push(y.clone());
    }
    Ok((out, stepper.stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_is_accurate() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let samples: Vec<f64> = (1..=20).map(|k| k as f64).collect();
        let (ys, stats) =
            integrate_samples(f, 0.0, &[1.0, 0.0], &samples, OdeOptions::with_tol(1e-11)).unwrap();
        for (t, y) in samples.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-8, "t={t} {}", y[0]);
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn backward_integration() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        let (ys, _) =
            integrate_samples(f, 1.0, &[1.0], &[0.0], OdeOptions::with_tol(1e-12)).unwrap();
        assert!((ys[0][0] - 1f64.exp()).abs() < 1e-9);
    }
}
