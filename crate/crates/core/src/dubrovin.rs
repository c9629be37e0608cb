//! Direct integration of the separation variables:
//! `u̇_k = 2i y(u_k) / Π_{j≠k}(u_k − u_j)` together with
//! `iJ̇⁻ = J⁻[gJ³ + 2Σε − 2Σu_k]`.
//!
//! Near a branch point `E` a point is moved to the chart `u = E + w²`, where
//! `y = w·h(w)` and `ẇ = i h(w) / Π_{j≠k}(u_k − u_j)` is regular; passing
//! through `w = 0` is the turning point of the oscillation and flips the sheet.

use std::cell::RefCell;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::curve::{CurvePoint, HyperellipticCurve};
use crate::error::{Error, Result};
use crate::model::{ClassicalSpinState, EnergySpectrum};
use crate::ode::{Dopri5, OdeOptions, OdeStats};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `u̇_k` for every point of the divisor.
pub fn dubrovin_rhs(points: &[CurvePoint], curve: &HyperellipticCurve) -> Result<Vec<C64>> {
    let gap_guard = 1e-12 * curve.scale();
    let mut out = Vec::with_capacity(points.len());
    for (k, p) in points.iter().enumerate() {
        let mut denom = C64::new(1.0, 0.0);
        for (j, q) in points.iter().enumerate() {
            if j != k {
                let d = p.lambda - q.lambda;
                if d.norm() < gap_guard {
                    return Err(Error::DivisorCollision { t: f64::NAN, gap: d.norm() });
                }
                denom *= d;
            }
        }
        let y = curve.y_plus(p.lambda) * p.sheet as f64;
        out.push(2.0 * I * y / denom);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
enum Chart {
    /// `u` with `y = sheet · y_+(u)`; `base` is the position at the last
    /// accepted step, used to count cut crossings inside a step.
    Plane { sheet: i8, base: C64 },
    /// `u = E + w²`, `y = w·h`, with `h` continued from `h_ref`.
    Local { branch: usize, h_ref: C64 },
}

struct Charts {
    charts: Vec<Chart>,
}

fn local_h(curve: &HyperellipticCurve, branch: usize, u: C64, h_ref: C64) -> C64 {
    let mut h2 = C64::new(1.0, 0.0);
    for (i, &e) in curve.branch_points.iter().enumerate() {
        if i != branch {
            h2 *= u - e;
        }
    }
    let h = h2.sqrt();
    if (h - h_ref).norm() <= (h + h_ref).norm() {
        h
    } else {
        -h
    }
}

fn crossing_parity(curve: &HyperellipticCurve, from: C64, to: C64) -> f64 {
    if curve.crossings(from, to).len().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivisorTrajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vec<CurvePoint>>,
    pub jminus: Vec<C64>,
    /// Smallest `|u_i − u_j|` at any accepted step.
    pub min_gap: f64,
    /// Smallest distance of any `u_i` to a branch point at any accepted step.
    pub min_branch_distance: f64,
    /// Number of turning points passed.
    pub branch_passages: usize,
    pub stats: OdeStats,
}

impl DivisorTrajectory {
    /// `(t, Re u_1, Im u_1, …, Re J⁻, Im J⁻)` rows.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.times
            .iter()
            .zip(&self.points)
            .zip(&self.jminus)
            .map(|((&t, pts), j)| {
                let mut row = vec![t];
                for p in pts {
                    row.push(p.lambda.re);
                    row.push(p.lambda.im);
                }
                row.push(j.re);
                row.push(j.im);
                row
            })
            .collect()
    }
}

/// Integrate the divisor and `J⁻` from `t = 0`, recording at `samples`
/// (which may be negative for backward integration).
pub fn integrate_dubrovin(
    u0: &[CurvePoint],
    curve: &HyperellipticCurve,
    spec: &EnergySpectrum,
    state0: &ClassicalSpinState,
    samples: &[f64],
    tol: f64,
) -> Result<DivisorTrajectory> {
    let g = u0.len();
    if g != curve.genus {
        return Err(Error::DimensionMismatch { expected: curve.genus, got: g });
    }
    let freq0 = spec.g() * state0.j3() + 2.0 * spec.epsilons().iter().sum::<f64>();
    let deltas: Vec<f64> = curve.cuts.iter().flat_map(|c| [1e-3 * c.length(); 2]).collect();
    let charts = RefCell::new(Charts {
        charts: u0.iter().map(|p| Chart::Plane { sheet: p.sheet, base: p.lambda }).collect(),
    });
    // variables: (Re, Im) of u or w per point, then Re J⁻, Im J⁻
    let mut y: Vec<f64> = u0.iter().flat_map(|p| [p.lambda.re, p.lambda.im]).collect();
    let jm = state0.j_minus();
    y.push(jm.re);
    y.push(jm.im);

    let position = |ch: &Chart, v: C64| -> C64 {
        match *ch {
            Chart::Plane { .. } => v,
            Chart::Local { branch, .. } => curve.branch_points[branch] + v * v,
        }
    };

    let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let ch = charts.borrow();
        let vars: Vec<C64> = (0..g).map(|k| C64::new(y[2 * k], y[2 * k + 1])).collect();
        let us: Vec<C64> = (0..g).map(|k| position(&ch.charts[k], vars[k])).collect();
        let mut usum = C64::new(0.0, 0.0);
        for k in 0..g {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..g {
                if j != k {
                    denom *= us[k] - us[j];
                }
            }
            let d = match ch.charts[k] {
                Chart::Plane { sheet, base } => {
                    let yv = curve.y_plus(us[k]) * (sheet as f64 * crossing_parity(curve, base, us[k]));
                    2.0 * I * yv / denom
                }
                Chart::Local { branch, h_ref } => I * local_h(curve, branch, us[k], h_ref) / denom,
            };
            dy[2 * k] = d.re;
            dy[2 * k + 1] = d.im;
            usum += us[k];
        }
        let j = C64::new(y[2 * g], y[2 * g + 1]);
        let dj = -I * j * (freq0 - 2.0 * usum);
        dy[2 * g] = dj.re;
        dy[2 * g + 1] = dj.im;
    };

    let scale = curve.scale();
    let mut min_gap = f64::INFINITY;
    let mut min_branch = f64::INFINITY;
    let mut passages = 0usize;
    let mut on_step = |t: f64, y: &mut [f64]| -> Result<bool> {
        let mut ch = charts.borrow_mut();
        let mut changed = false;
        let mut us = Vec::with_capacity(g);
        for k in 0..g {
            let v = C64::new(y[2 * k], y[2 * k + 1]);
            let u = position(&ch.charts[k], v);
            us.push(u);
            let (nearest, dist) = curve.nearest_branch_point(u);
            min_branch = min_branch.min(dist);
            let delta = deltas[nearest];
            match ch.charts[k] {
                Chart::Plane { sheet, base } => {
                    let sheet = (sheet as f64 * crossing_parity(curve, base, u)) as i8;
                    if dist < delta {
                        let w = (u - curve.branch_points[nearest]).sqrt();
                        let yv = curve.y_plus(u) * sheet as f64;
                        ch.charts[k] = Chart::Local { branch: nearest, h_ref: yv / w };
                        y[2 * k] = w.re;
                        y[2 * k + 1] = w.im;
                        changed = true;
                    } else {
                        ch.charts[k] = Chart::Plane { sheet, base: u };
                    }
                }
                Chart::Local { branch, h_ref } => {
                    let h = local_h(curve, branch, u, h_ref);
                    if v.norm_sqr() > 2.0 * deltas[branch] {
                        let yv = v * h;
                        let yp = curve.y_plus(u);
                        let sheet = if (yv - yp).norm() <= (yv + yp).norm() { 1 } else { -1 };
                        ch.charts[k] = Chart::Plane { sheet, base: u };
                        y[2 * k] = u.re;
                        y[2 * k + 1] = u.im;
                        changed = true;
                        passages += 1;
                    } else {
                        ch.charts[k] = Chart::Local { branch, h_ref: h };
                    }
                }
            }
        }
        for a in 0..g {
            for b in (a + 1)..g {
                let gap = (us[a] - us[b]).norm();
                min_gap = min_gap.min(gap);
                if gap < 1e-12 * scale {
                    return Err(Error::DivisorCollision { t, gap });
                }
            }
        }
        Ok(changed)
    };

    let mut times = Vec::with_capacity(samples.len());
    let mut points = Vec::with_capacity(samples.len());
    let mut jminus = Vec::with_capacity(samples.len());
    // forward and backward samples are each integrated outward from t = 0
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| samples[a].abs().partial_cmp(&samples[b].abs()).unwrap());
    let mut results: Vec<Option<(Vec<CurvePoint>, C64)>> = vec![None; samples.len()];
    let snapshot = |y: &[f64], charts: &Charts| -> Vec<CurvePoint> {
        (0..g)
            .map(|k| {
                let v = C64::new(y[2 * k], y[2 * k + 1]);
                match charts.charts[k] {
                    Chart::Plane { sheet, base } => CurvePoint {
                        lambda: v,
                        sheet: (sheet as f64 * crossing_parity(curve, base, v)) as i8,
                    },
                    Chart::Local { branch, h_ref } => {
                        let u = curve.branch_points[branch] + v * v;
                        let yv = v * local_h(curve, branch, u, h_ref);
                        let yp = curve.y_plus(u);
                        let sheet = if (yv - yp).norm() <= (yv + yp).norm() { 1 } else { -1 };
                        CurvePoint { lambda: u, sheet }
                    }
                }
            })
            .collect()
    };
    let y_start = y.clone();
    let charts_start: Vec<Chart> = charts.borrow().charts.clone();
    let mut stats = OdeStats::default();
    for direction in [1.0f64, -1.0] {
        y.copy_from_slice(&y_start);
        charts.borrow_mut().charts = charts_start.clone();
        let mut t = 0.0;
        // a point starting next to a branch point must begin in its local chart
        on_step(0.0, &mut y)?;
        let mut solver = Dopri5::new(OdeOptions::with_tol(tol));
        for &idx in &order {
            let target = samples[idx];
            if target * direction < 0.0 || (target == 0.0 && direction < 0.0) {
                continue;
            }
            solver.advance(&mut rhs, &mut t, &mut y, target, &mut on_step)?;
            let pts = snapshot(&y, &charts.borrow());
            results[idx] = Some((pts, C64::new(y[2 * g], y[2 * g + 1])));
        }
        stats.accepted += solver.stats.accepted;
        stats.rejected += solver.stats.rejected;
        stats.evaluations += solver.stats.evaluations;
    }
    for (idx, r) in results.into_iter().enumerate() {
        let (pts, j) = r.expect("every sample visited");
        times.push(samples[idx]);
        points.push(pts);
        jminus.push(j);
    }
    Ok(DivisorTrajectory {
        times,
        points,
        jminus,
        min_gap,
        min_branch_distance: min_branch,
        branch_passages: passages,
        stats,
    })
}

/// Separation variables along a spin trajectory: zeros of `b(λ, t)`,
/// matched from sample to sample by nearest continuation.
pub fn track_spin_roots(states: &[ClassicalSpinState], spec: &EnergySpectrum) -> Result<Vec<Vec<C64>>> {
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(states.len());
    for s in states {
        let lax = crate::curve::LaxMatrix::new(s, spec)?;
        let mut roots = if spec.n() > 1 { lax.b_numerator().roots()? } else { Vec::new() };
        if let Some(prev) = out.last() {
            let mut ordered = Vec::with_capacity(roots.len());
            for p in prev {
                let (i, _) = roots
                    .iter()
                    .enumerate()
                    .map(|(i, r)| (i, (r - p).norm()))
                    .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
                ordered.push(roots.remove(i));
            }
            roots = ordered;
        }
        out.push(roots);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{build_curve, separation_roots, RootChoice};
    use crate::model::integrate_spins_sampled;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize, seed: u64) -> (ClassicalSpinState, EnergySpectrum) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let radii: Vec<f64> = (0..n).map(|i| 0.5 + 0.1 * i as f64).collect();
        let state = ClassicalSpinState::random(&radii, &mut rng).unwrap();
        let eps: Vec<f64> = (0..n).map(|i| i as f64 - 0.3 * (i as f64).sin()).collect();
        (state, EnergySpectrum::new(eps, 0.8, 1).unwrap())
    }

    #[test]
    fn genus_one_rhs_has_no_product() {
        let (state, spec) = setup(2, 1);
        let curve = build_curve(&state, &spec).unwrap();
        let p = CurvePoint { lambda: C64::new(0.3, 0.2), sheet: -1 };
        let d = dubrovin_rhs(&[p], &curve).unwrap();
        assert!((d[0] + 2.0 * I * curve.y_plus(p.lambda)).norm() < 1e-14);
        let e = CurvePoint { lambda: curve.branch_points[0], sheet: 1 };
        assert!(dubrovin_rhs(&[e], &curve).unwrap()[0].norm() < 1e-10);
    }

    #[test]
    fn matches_spin_flow_roots() {
        for (n, seed) in [(2, 3u64), (3, 4)] {
            let (state, spec) = setup(n, seed);
            let curve = build_curve(&state, &spec).unwrap();
            let roots = separation_roots(&state, &spec, &curve, RootChoice::B).unwrap();
            let samples: Vec<f64> = (0..=40).map(|k| 0.25 * k as f64).collect();
            let traj = integrate_dubrovin(&roots.points, &curve, &spec, &state, &samples, 1e-12).unwrap();
            let spins = integrate_spins_sampled(&state, &spec, &samples, 1e-12).unwrap();
            let tracked = track_spin_roots(&spins.states, &spec).unwrap();
            for (k, pts) in traj.points.iter().enumerate() {
                for p in pts {
                    let d = tracked[k].iter().map(|r| (r - p.lambda).norm()).fold(f64::INFINITY, f64::min);
                    assert!(d < 1e-6, "n={n} t={} d={d}", samples[k]);
                }
                let dj = (traj.jminus[k] - spins.states[k].j_minus()).norm();
                assert!(dj < 1e-6, "J- mismatch {dj} at t={}", samples[k]);
            }
        }
    }

    #[test]
    fn backward_integration_returns() {
        let (state, spec) = setup(3, 5);
        let curve = build_curve(&state, &spec).unwrap();
        let roots = separation_roots(&state, &spec, &curve, RootChoice::B).unwrap();
        let traj =
            integrate_dubrovin(&roots.points, &curve, &spec, &state, &[-3.0, 0.0, 3.0], 1e-12).unwrap();
        for (a, b) in traj.points[1].iter().zip(&roots.points) {
            assert_eq!(a, b);
        }
        let spins = integrate_spins_sampled(&state, &spec, &[0.0, 3.0], 1e-12).unwrap();
        assert!((traj.jminus[2] - spins.states[1].j_minus()).norm() < 1e-7);
    }

    #[test]
    fn passes_through_branch_point_chart() {
        // start next to a branch point so the local chart is used at once
        let (state, spec) = setup(2, 6);
        let curve = build_curve(&state, &spec).unwrap();
        let ctx = crate::abel::AbelContext::new(curve.clone()).unwrap();
        let e = curve.branch_points[1];
        let dir = curve.cuts[0].lower - e;
        let p0 = CurvePoint { lambda: e + dir * 1e-5, sheet: 1 };
        let samples: Vec<f64> = (0..=20).map(|k| 0.05 * k as f64).collect();
        let traj = integrate_dubrovin(&[p0], &curve, &spec, &state, &samples, 1e-12).unwrap();
        let a0 = ctx.abel_sum(&traj.points[0]).unwrap();
        let v = ctx.dubrovin_velocity();
        for (k, pts) in traj.points.iter().enumerate() {
            let a = ctx.abel_sum(pts).unwrap();
            let w: Vec<C64> = (0..1).map(|i| a[i] - a0[i] - v[i] * samples[k]).collect();
            assert!(ctx.theta.lattice_residual(&w) < 1e-7, "t={} {:?}", samples[k], w);
        }
        assert!(traj.min_branch_distance < 1e-4);
        assert!(traj.branch_passages >= 1);
    }
}
