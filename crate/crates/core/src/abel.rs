//! Abel–Jacobi map with base point `∞⁺`, the Riemann vector, the linear flow
//! on the Jacobian, and inversion of the Abel map.
//!
//! Inversion uses the trace formula: for the divisor `D` with
//! `Σ A(P_k) + K ≡ z`, the power sums `Σ λ_k^m` equal
//! `Σ_j ∮_{α_j} λ^m ω_j` plus residue contributions of
//! `λ^m d log θ(A(P) − z)` at `∞⁺` and `∞⁻`, both obtained from trapezoidal
//! sums on a large circle.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{
    alpha_moments, assign_cuts, period_data, CurvePoint, HomologyBasis, HyperellipticCurve,
    PeriodData,
};
use crate::dubrovin::{dubrovin_rhs, integrate_dubrovin};
use crate::error::{Error, Result};
use crate::model::{ClassicalSpinState, EnergySpectrum};
use crate::quadrature::adaptive;
use crate::theta::{JacobianPoint, ThetaContext};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Time dependence used by [`AbelContext::flow`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FlowMode {
    /// Unit imaginary speed along the last coordinate.
    Paper,
    /// `z0 + tV` with `V` measured on the Dubrovin flow.
    #[default]
    Calibrated,
}

impl std::str::FromStr for FlowMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "calibrated" => Ok(Self::Calibrated),
            other => Err(Error::Config(format!("unknown flow mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AbelContext {
    pub curve: HyperellipticCurve,
    pub basis: HomologyBasis,
    pub periods: PeriodData,
    pub theta: ThetaContext,
    /// `A(E)` for each branch point, in `curve.branch_points` order.
    pub branch_images: Vec<Vec<C64>>,
    /// `A(∞⁻)` on the dissected surface.
    pub infinity_minus: Vec<C64>,
    /// Riemann vector for base point `∞⁺`.
    pub k: Vec<C64>,
    /// `alpha_powers[j][p] = ∮_{α_j} λ^p dλ / y_+`, `p < 2g + 1`.
    alpha_powers: Vec<Vec<C64>>,
    quad_tol: f64,
}

fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Inversion {
    pub points: Vec<CurvePoint>,
    /// Distance of `Σ A(P_k) + K − z` from the lattice.
    pub residual: f64,
    /// Cut assigned to each point and the distance to it.
    pub cut_index: Vec<usize>,
    pub cut_distance: Vec<f64>,
}

impl AbelContext {
    pub fn new(curve: HyperellipticCurve) -> Result<Self> {
        let g = curve.genus;
        if g == 0 {
            return Err(Error::InvalidPeriods("the Abel map needs genus >= 1".into()));
        }
        let basis = HomologyBasis::new(&curve);
        let quad_tol = 1e-13;
        let periods = period_data(&curve, &basis, quad_tol)?;
        let theta = ThetaContext::new(periods.b.clone(), 1e-15)?;
        let alpha_powers = (0..g)
            .map(|j| {
                // resolution doubled until stable, as for the period matrix
                let mut nodes = 256;
                let mut prev = alpha_moments(&curve, j, 2 * g + 1, nodes);
                loop {
                    nodes *= 2;
                    let next = alpha_moments(&curve, j, 2 * g + 1, nodes);
                    let diff = prev.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                    let size = next.iter().map(|v| v.norm()).fold(0.0, f64::max);
                    prev = next;
                    if diff <= 1e-14 * size || nodes >= 1 << 20 {
                        break prev;
                    }
                }
            })
            .collect();
        let mut ctx = Self {
            curve,
            basis,
            periods,
            theta,
            branch_images: Vec::new(),
            infinity_minus: Vec::new(),
            k: vec![ZERO; g],
            alpha_powers,
            quad_tol,
        };
        ctx.branch_images = (0..ctx.curve.branch_points.len())
            .map(|i| ctx.branch_point_image(i))
            .collect::<Result<_>>()?;
        ctx.infinity_minus = ctx.infinity_minus_image()?;
        ctx.k = ctx.find_riemann_vector()?;
        Ok(ctx)
    }

    pub fn genus(&self) -> usize {
        self.curve.genus
    }

    /// Coefficients of `(ω_1..ω_g)` with respect to `dλ`, on the `+` sheet,
    /// at `base + offset`.
    fn omega_at(&self, base: C64, offset: C64) -> Vec<C64> {
        let lam = base + offset;
        let y = self.curve.y_plus_at(base, offset);
        scale(&self.periods.omega_coeffs(lam), 1.0 / y)
    }

    /// `∫ ω` from `∞⁺` to `∞` in direction `d` measured backwards: returns
    /// `∫_{start}^{∞} ω` along `start + d·v²/(1−v²)`.
    fn ray_integral(&self, start: C64, d: C64) -> Result<Vec<C64>> {
        let g = self.genus();
        adaptive(
            |v, out| {
                let w = 1.0 - v * v;
                let off = d * (v * v / w);
                let jac = d * (2.0 * v / (w * w));
                let om = self.omega_at(start, off);
                for (o, x) in out.iter_mut().zip(om) {
                    *o = x * jac;
                }
            },
            0.0,
            1.0,
            g,
            self.quad_tol,
        )
    }

    fn branch_point_image(&self, idx: usize) -> Result<Vec<C64>> {
        let e = self.curve.branch_points[idx];
        let own = idx / 2;
        let cut = self.curve.cuts[own];
        let outward = {
            let v = e - cut.midpoint();
            v / v.norm()
        };
        let far = 10.0 * self.curve.scale() + e.norm();
        let clearance = 1e-6 * self.curve.scale();
        let dir = (0..16)
            .filter(|&k| k != 8)
            .map(|k| outward * C64::from_polar(1.0, k as f64 * PI / 8.0))
            .find(|&d| {
                let b = e + d * far;
                self.curve
                    .cuts
                    .iter()
                    .enumerate()
                    .all(|(j, c)| j == own || c.segment_distance(e, b) > clearance)
            })
            .ok_or_else(|| Error::Quadrature(format!("no clear ray from branch point {e}")))?;
        Ok(scale(&self.ray_integral(e, dir)?, C64::new(-1.0, 0.0)))
    }

    /// `A(∞⁻)` along the path that comes in to the end of the last cut not
    /// touched by a β leg and returns on the other sheet, so it stays inside
    /// the surface dissected along the canonical cycles.
    fn infinity_minus_image(&self) -> Result<Vec<C64>> {
        let last = self.curve.cuts.len() - 1;
        let free = match self.basis.legs.last() {
            Some(&(_, entry)) if entry == self.curve.cuts[last].lower => 2 * last + 1,
            Some(_) => 2 * last,
            None => 2 * last + 1,
        };
        Ok(scale(&self.branch_images[free], C64::new(2.0, 0.0)))
    }

    /// `∫_{E}^{λ} ω` along the straight segment from branch point `E`, for
    /// the lift ending on `sheet` (sign flips at every cut crossed).
    fn segment_from_branch_point(&self, e: C64, p: CurvePoint) -> Result<Vec<C64>> {
        let g = self.genus();
        let delta = p.lambda - e;
        // crossing parameters t ∈ (0, 1) along e + t·delta
        let mut ts: Vec<f64> = Vec::new();
        for c in &self.curve.cuts {
            let start = e + delta * 1e-12;
            if c.crossed_by(start, p.lambda) {
                let d = c.upper - c.lower;
                // solve e + t·delta = c.lower + s·d
                let det = (delta.conj() * d).im;
                let t = ((c.lower - e).conj() * d).im / det;
                ts.push(t.clamp(0.0, 1.0));
            }
        }
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut bounds = vec![0.0];
        bounds.extend(ts.iter().copied());
        bounds.push(1.0);
        let mut total = vec![ZERO; g];
        let pieces = bounds.len() - 1;
        for k in 0..pieces {
            // crossings after this piece: pieces − 1 − k
            let flips = pieces - 1 - k;
            let sign = p.sheet as f64 * if flips % 2 == 0 { 1.0 } else { -1.0 };
            let (s0, s1) = (bounds[k].sqrt(), bounds[k + 1].sqrt());
            let part = adaptive(
                |s, out| {
                    let off = delta * (s * s);
                    let jac = delta * (2.0 * s);
                    let om = self.omega_at(e, off);
                    for (o, x) in out.iter_mut().zip(om) {
                        *o = x * jac;
                    }
                },
                s0,
                s1,
                g,
                self.quad_tol,
            )?;
            for (t, v) in total.iter_mut().zip(part) {
                *t += v * sign;
            }
        }
        Ok(total)
    }

    /// `A(P) = ∫_{∞⁺}^{P} ω`, routed through the nearest branch point.
    pub fn abel_map(&self, p: CurvePoint) -> Result<Vec<C64>> {
        let (idx, dist) = self.curve.nearest_branch_point(p.lambda);
        let e = self.curve.branch_points[idx];
        if dist == 0.0 {
            return Ok(self.branch_images[idx].clone());
        }
        let tail = self.segment_from_branch_point(e, p)?;
        Ok(add(&self.branch_images[idx], &tail))
    }

    /// `A(P)` through an explicitly chosen branch point (for path audits).
    pub fn abel_map_via(&self, p: CurvePoint, branch_index: usize) -> Result<Vec<C64>> {
        let e = self.curve.branch_points[branch_index];
        let tail = self.segment_from_branch_point(e, p)?;
        Ok(add(&self.branch_images[branch_index], &tail))
    }

    pub fn abel_sum(&self, points: &[CurvePoint]) -> Result<Vec<C64>> {
        let mut acc = vec![ZERO; self.genus()];
        for &p in points {
            acc = add(&acc, &self.abel_map(p)?);
        }
        Ok(acc)
    }

    /// Jacobian image of a divisor: `Σ A(P_k) + K`.
    pub fn divisor_image(&self, points: &[CurvePoint]) -> Result<JacobianPoint> {
        Ok(JacobianPoint::new(add(&self.abel_sum(points)?, &self.k)))
    }

    /// Normalized `|θ(A(D) + K)|` over a few pseudo-random effective divisors
    /// of degree `g − 1`, with `K` replaced by `cand`.
    fn vanishing_defect(&self, cand: &[C64], probes: &[Vec<Vec<C64>>]) -> f64 {
        probes
            .iter()
            .map(|images| {
                let mut w = cand.to_vec();
                for im in images {
                    w = add(&w, im);
                }
                self.theta.normalized(&self.theta.reduce(&w).z).norm()
            })
            .fold(0.0, f64::max)
    }

    fn probe_divisors(&self, count: usize, seed: u64) -> Result<Vec<Vec<Vec<C64>>>> {
        let g = self.genus();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = self.curve.scale();
        (0..count)
            .map(|_| {
                (0..g.saturating_sub(1))
                    .map(|_| {
                        let lam = C64::new(rng.gen_range(-s..s), rng.gen_range(-s..s));
                        let sheet = if rng.gen_bool(0.5) { 1 } else { -1 };
                        self.abel_map(CurvePoint { lambda: lam, sheet })
                    })
                    .collect()
            })
            .collect()
    }

    /// `K = h − (g−1)A(E_0)` for the half-period `h` that passes the
    /// Riemann vanishing check.
    fn find_riemann_vector(&self) -> Result<Vec<C64>> {
        let g = self.genus();
        let probes = self.probe_divisors(if g == 1 { 1 } else { 4 }, 0x5eed)?;
        let shift = scale(&self.branch_images[0], C64::new(-((g - 1) as f64), 0.0));
        let mut best: Option<(f64, Vec<C64>)> = None;
        for mask in 0u32..(1 << (2 * g)) {
            let h: Vec<C64> = (0..g)
                .map(|i| {
                    let a = (mask >> i & 1) as f64;
                    let bpart: C64 = (0..g)
                        .map(|j| self.periods.b[(i, j)] * ((mask >> (g + j) & 1) as f64))
                        .sum();
                    0.5 * (a + bpart)
                })
                .collect();
            let cand = add(&h, &shift);
            let defect = self.vanishing_defect(&cand, &probes);
            if best.as_ref().is_none_or(|(d, _)| defect < *d) {
                best = Some((defect, cand));
            }
        }
        let (defect, k) = best.expect("at least one candidate");
        if defect > 1e-8 {
            return Err(Error::InvalidPeriods(format!(
                "Riemann vanishing fails for every half-period (best {defect:e})"
            )));
        }
        Ok(self.theta.reduce(&k).z)
    }

    /// `max |θ̃(A(D) + K)|` over `count` random degree-(g−1) divisors.
    pub fn riemann_vanishing_defect(&self, count: usize, seed: u64) -> Result<f64> {
        let probes = self.probe_divisors(count, seed)?;
        Ok(self.vanishing_defect(&self.k, &probes))
    }

    /// Exact velocity of `Σ A(u_k)` under `u̇_k = 2i y(u_k)/Π(u_k − u_j)`.
    pub fn dubrovin_velocity(&self) -> Vec<C64> {
        let g = self.genus();
        (0..g).map(|i| self.periods.m_inv[(i, 0)] * (2.0 * I)).collect()
    }

    /// `z(t)` from `z0`. In calibrated mode `velocity` must be supplied.
    pub fn flow(&self, z0: &JacobianPoint, t: f64, mode: FlowMode, velocity: &[C64]) -> JacobianPoint {
        let g = self.genus();
        let z: Vec<C64> = match mode {
            FlowMode::Paper => {
                let mut z = z0.z.clone();
                z[g - 1] += I * t;
                z
            }
            FlowMode::Calibrated => add(&z0.z, &scale(velocity, C64::new(t, 0.0))),
        };
        if t == 0.0 {
            return z0.clone();
        }
        self.theta.reduce(&z)
    }

    /// Values of `A` and `dA/dλ` on the circle `|λ| = r`, + sheet.
    fn circle_data(&self, r: f64, nodes: usize) -> (Vec<C64>, Vec<Vec<C64>>, Vec<Vec<C64>>) {
        let g = self.genus();
        let lams: Vec<C64> =
            (0..nodes).map(|j| C64::from_polar(r, 2.0 * PI * j as f64 / nodes as f64)).collect();
        let f: Vec<Vec<C64>> = lams.iter().map(|&l| self.omega_at(l, ZERO)).collect();
        // G(τ) = −F(1/τ)/τ², sampled at τ_j = 1/λ_j; Taylor coefficients by DFT.
        // Coefficients are kept as c_k ρ^k with ρ = |τ| so nothing over- or
        // underflows at large node counts.
        let rho = 1.0 / r;
        let phases: Vec<C64> = lams.iter().map(|l| l / r).collect();
        let gvals: Vec<Vec<C64>> = f.iter().zip(&lams).map(|(fv, l)| scale(fv, -(l * l))).collect();
        let mut coeffs = vec![vec![ZERO; g]; nodes / 2];
        for (k, ck) in coeffs.iter_mut().enumerate() {
            for (j, gv) in gvals.iter().enumerate() {
                let w = phases[(j * k) % nodes] / nodes as f64;
                for i in 0..g {
                    ck[i] += gv[i] * w;
                }
            }
        }
        let a: Vec<Vec<C64>> = phases
            .iter()
            .map(|&e| {
                let unit = e.conj();
                let mut acc = vec![ZERO; g];
                let mut p = unit * rho;
                for (k, ck) in coeffs.iter().enumerate() {
                    let w = p / (k as f64 + 1.0);
                    for i in 0..g {
                        acc[i] += ck[i] * w;
                    }
                    p *= unit;
                }
                acc
            })
            .collect();
        (lams, a, f)
    }

    /// `Σ_j ∮_{α_j} λ^m ω_j`.
    fn alpha_part(&self, m: usize) -> C64 {
        let g = self.genus();
        let mut total = ZERO;
        for j in 0..g {
            for l in 0..g {
                total += self.periods.m_inv[(j, l)] * self.alpha_powers[j][g - 1 - l + m];
            }
        }
        total
    }

    fn power_sums(&self, z: &[C64], r: f64, nodes: usize) -> Vec<C64> {
        let g = self.genus();
        let (lams, a_plus, f) = self.circle_data(r, nodes);
        let mut sums: Vec<C64> = (0..=g).map(|m| self.alpha_part(m)).collect();
        for (sheet, sign) in [(1, 1.0), (-1, -1.0)] {
            for (idx, lam) in lams.iter().enumerate() {
                let a = if sheet == 1 {
                    a_plus[idx].clone()
                } else {
                    sub(&self.infinity_minus, &a_plus[idx])
                };
                let w = sub(&a, z);
                let lg = self.theta.log_gradient(&w);
                let dlog: C64 = lg.iter().zip(&f[idx]).map(|(x, y)| x * y).sum::<C64>() * sign;
                let mut p = *lam;
                for s in sums.iter_mut() {
                    *s += p * dlog / nodes as f64;
                    p *= lam;
                }
            }
        }
        sums
    }

    /// `J⁻(t)` along `z(t) = z0 + tV` with `V` the Dubrovin velocity.
    ///
    /// The `m = 1` trace formula, evaluated by residues at `∞±`, reads
    /// `Σ u_k = c_α + (1/2i) d/dt log[θ(z − A(∞⁻)) / θ(z)]`, so the phase
    /// integral is available in closed form. `z0` must not be reduced along
    /// the way; the flow is evaluated without lattice reduction.
    pub fn jminus_along_flow(
        &self,
        z0: &[C64],
        velocity: &[C64],
        times: &[f64],
        state0: &ClassicalSpinState,
        spec: &EnergySpectrum,
    ) -> Vec<C64> {
        let c_alpha = self.alpha_part(1);
        let freq0 = spec.g() * state0.j3() + 2.0 * spec.epsilons().iter().sum::<f64>();
        let log_ratio = |t: f64| -> C64 {
            let z = add(z0, &scale(velocity, C64::new(t, 0.0)));
            let zm = sub(&z, &self.infinity_minus);
            self.theta.normalized(&zm).ln() - self.theta.normalized(&z).ln()
                + (self.theta.log_scale(&zm) - self.theta.log_scale(&z))
        };
        let base = log_ratio(0.0);
        let j0 = state0.j_minus();
        times
            .iter()
            .map(|&t| j0 * (-I * (freq0 - 2.0 * c_alpha) * t + log_ratio(t) - base).exp())
            .collect()
    }

    /// Divisor `D` of degree `g` with `Σ A(P_k) + K ≡ z`.
    pub fn invert_divisor(&self, z: &JacobianPoint) -> Result<Inversion> {
        let g = self.genus();
        let zr = self.theta.reduce(&z.z).z;
        let mut r = 2.5 * self.curve.scale();
        for _attempt in 0..12 {
            let mut nodes = 128;
            let mut sums = self.power_sums(&zr, r, nodes);
            let mut converged = false;
            while nodes < 1 << 14 {
                nodes *= 2;
                let next = self.power_sums(&zr, r, nodes);
                let diff = next
                    .iter()
                    .zip(&sums)
                    .enumerate()
                    .map(|(m, (a, b))| (a - b).norm() / r.powi(m as i32))
                    .fold(0.0, f64::max);
                if next.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                    return Err(Error::Inversion("trace-formula sums are not finite".into()));
                }
                sums = next;
                if diff < 1e-12 {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Inversion("trace-formula sums did not converge".into()));
            }
            let count = sums[0].re.round();
            if count < g as f64 && (sums[0] - count).norm() < 1e-6 {
                // some divisor points lie outside the contour
                r *= 4.0;
                continue;
            }
            if (sums[0] - g as f64).norm() > 1e-6 {
                return Err(Error::Inversion(format!(
                    "zero count {} differs from genus {g} (z on the degenerate locus?)",
                    sums[0]
                )));
            }
            // Newton identities → elementary symmetric functions
            let mut e = vec![C64::new(1.0, 0.0)];
            for k in 1..=g {
                let mut acc = ZERO;
                for i in 1..=k {
                    let s = if i % 2 == 1 { 1.0 } else { -1.0 };
                    acc += e[k - i] * sums[i] * s;
                }
                e.push(acc / k as f64);
            }
            let coeffs: Vec<C64> = (0..=g)
                .map(|p| {
                    let k = g - p;
                    e[k] * if k.is_multiple_of(2) { 1.0 } else { -1.0 }
                })
                .collect();
            let roots = crate::poly::Poly::new(coeffs).roots()?;
            if roots.iter().any(|l| !l.re.is_finite() || !l.im.is_finite()) {
                return Err(Error::Inversion(format!("non-finite divisor point at contour radius {r}")));
            }
            if roots.iter().any(|l| l.norm() > r / 1.5) {
                r *= 2.0;
                continue;
            }
            let mut points = Vec::with_capacity(g);
            for &lam in &roots {
                let mut best = (f64::INFINITY, 1i8);
                for sheet in [1i8, -1] {
                    let a = self.abel_map(CurvePoint { lambda: lam, sheet })?;
                    let w = self.theta.reduce(&sub(&a, &zr)).z;
                    let v = self.theta.normalized(&w).norm();
                    if v < best.0 {
                        best = (v, sheet);
                    }
                }
                points.push(CurvePoint { lambda: lam, sheet: best.1 });
            }
            points.sort_by(|a, b| {
                a.lambda.re.total_cmp(&b.lambda.re).then(a.lambda.im.total_cmp(&b.lambda.im))
            });
            let image = self.divisor_image(&points)?;
            let residual = self.theta.lattice_residual(&sub(&image.z, &zr));
            let lambdas: Vec<C64> = points.iter().map(|p| p.lambda).collect();
            let (cut_index, cut_distance) = assign_cuts(&self.curve, &lambdas)?;
            if residual > 1e-6 {
                return Err(Error::Inversion(format!("round-trip residual {residual:e}")));
            }
            return Ok(Inversion { points, residual, cut_index, cut_distance });
        }
        Err(Error::Inversion("divisor escapes every trial contour".into()))
    }
}

/// Velocity of `Σ A(u_k)` measured on the Dubrovin flow by a symmetric
/// difference over `[−h, h]`. The Abel sum is linear in `t`, so the only
/// error is that of the integration and quadrature.
pub fn calibrate_velocity(
    ctx: &AbelContext,
    points0: &[CurvePoint],
    spec: &EnergySpectrum,
    state0: &ClassicalSpinState,
    h: f64,
    tol: f64,
) -> Result<Vec<C64>> {
    let traj = integrate_dubrovin(points0, &ctx.curve, spec, state0, &[-h, h], tol)?;
    let a_minus = ctx.abel_sum(&traj.points[0])?;
    let a_plus = ctx.abel_sum(&traj.points[1])?;
    let w = sub(&a_plus, &a_minus);
    let (m, n, _) = ctx.theta.lattice_decompose(&w);
    let g = ctx.genus();
    Ok((0..g)
        .map(|i| {
            let lat = m[i] as f64 + (0..g).map(|j| ctx.periods.b[(i, j)] * n[j] as f64).sum::<C64>();
            (w[i] - lat) / (2.0 * h)
        })
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Observables {
    pub times: Vec<f64>,
    /// `u = −2 Σ u_i`.
    pub u: Vec<C64>,
    pub jminus: Vec<C64>,
    /// Estimated quadrature error of the phase integral.
    pub phase_error: f64,
}

/// `u(t)` and `J⁻(t) = J⁻(0) exp(−i ∫₀ᵗ [gJ³ + 2Σε − 2Σu_k] ds)` from sampled
/// divisors. `times` must start at 0 and be monotone.
pub fn reconstruct_observables(
    curve: Option<&HyperellipticCurve>,
    times: &[f64],
    divisors: &[Vec<CurvePoint>],
    state0: &ClassicalSpinState,
    spec: &EnergySpectrum,
    tol: f64,
) -> Result<Observables> {
    if times.len() != divisors.len() || times.is_empty() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: divisors.len() });
    }
    if times[0] != 0.0 {
        return Err(Error::InvalidState("observable reconstruction starts at t = 0".into()));
    }
    let sums: Vec<C64> = divisors.iter().map(|d| d.iter().map(|p| p.lambda).sum()).collect();
    let rates: Vec<C64> = match curve {
        Some(c) if c.genus > 0 => divisors
            .iter()
            .map(|d| Ok(dubrovin_rhs(d, c)?.into_iter().sum()))
            .collect::<Result<_>>()?,
        _ => vec![ZERO; times.len()],
    };
    // Hermite-corrected trapezoid on each interval
    let hermite = |a: usize, b: usize| -> C64 {
        let h = times[b] - times[a];
        0.5 * h * (sums[a] + sums[b]) + h * h / 12.0 * (rates[a] - rates[b])
    };
    let mut integral = vec![ZERO; times.len()];
    let mut err: f64 = 0.0;
    for k in 1..times.len() {
        integral[k] = integral[k - 1] + hermite(k - 1, k);
        if k >= 2 && k % 2 == 0 {
            let fine = hermite(k - 2, k - 1) + hermite(k - 1, k);
            err += (fine - hermite(k - 2, k)).norm() / 15.0;
        }
    }
    // the phase integrand carries the factor 2
    let phase_error = 2.0 * err;
    if phase_error > tol {
        return Err(Error::InvalidState(format!(
            "time samples too sparse: phase quadrature error {phase_error:e} > {tol:e}"
        )));
    }
    let freq0 = spec.g() * state0.j3() + 2.0 * spec.epsilons().iter().sum::<f64>();
    let j0 = state0.j_minus();
    let jminus = times
        .iter()
        .zip(&integral)
        .map(|(&t, s)| j0 * (-I * (freq0 * t - 2.0 * s)).exp())
        .collect();
    Ok(Observables {
        times: times.to_vec(),
        u: sums.iter().map(|s| -2.0 * s).collect(),
        jminus,
        phase_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{build_curve, separation_roots, RootChoice};
    use crate::model::integrate_spins_sampled;
    use crate::poly::Poly;

    fn random_curve(n: usize, seed: u64) -> HyperellipticCurve {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let radii: Vec<f64> = (0..n).map(|i| 0.5 + 0.1 * i as f64).collect();
        let state = ClassicalSpinState::random(&radii, &mut rng).unwrap();
        let eps: Vec<f64> = (0..n).map(|i| i as f64 - 0.3 * (i as f64).sin()).collect();
        let spec = EnergySpectrum::new(eps, 0.8, 1).unwrap();
        build_curve(&state, &spec).unwrap()
    }

    #[test]
    fn genus_one_riemann_vector_is_half_period_sum() {
        let q = Poly::from_real(&[4.0, 0.0, 5.0, 0.0, 1.0]);
        let ctx = AbelContext::new(HyperellipticCurve::from_polynomial(&q).unwrap()).unwrap();
        let b = ctx.periods.b[(0, 0)];
        let w = vec![ctx.k[0] - 0.5 * (1.0 + b)];
        assert!(ctx.theta.lattice_residual(&w) < 1e-9);
        assert!(ctx.theta.theta(&ctx.k).norm() < 1e-9);
    }

    #[test]
    fn branch_points_are_two_torsion_relative_to_infinity_minus() {
        for n in [2, 3] {
            let ctx = AbelContext::new(random_curve(n, 21)).unwrap();
            for a in &ctx.branch_images {
                let w: Vec<C64> = sub(&scale(a, C64::new(2.0, 0.0)), &ctx.infinity_minus);
                assert!(ctx.theta.lattice_residual(&w) < 1e-8);
            }
        }
    }

    #[test]
    fn abel_map_is_path_independent() {
        let ctx = AbelContext::new(random_curve(3, 22)).unwrap();
        let p = CurvePoint { lambda: C64::new(0.4, 0.6), sheet: -1 };
        let a0 = ctx.abel_map_via(p, 0).unwrap();
        for idx in 1..ctx.curve.branch_points.len() {
            let a = ctx.abel_map_via(p, idx).unwrap();
            assert!(ctx.theta.lattice_residual(&sub(&a, &a0)) < 1e-8);
        }
    }

    #[test]
    fn inversion_round_trip() {
        for n in [2, 3, 4] {
            let ctx = AbelContext::new(random_curve(n, 23 + n as u64)).unwrap();
            let g = ctx.genus();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..3 {
                let pts: Vec<CurvePoint> = (0..g)
                    .map(|j| {
                        let c = ctx.curve.cuts[j].midpoint();
                        CurvePoint {
                            lambda: c + C64::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)),
                            sheet: if rng.gen_bool(0.5) { 1 } else { -1 },
                        }
                    })
                    .collect();
                let z = ctx.divisor_image(&pts).unwrap();
                let inv = ctx.invert_divisor(&z).unwrap();
                for p in &pts {
                    let hit = inv
                        .points
                        .iter()
                        .any(|q| (q.lambda - p.lambda).norm() < 1e-6 && q.sheet == p.sheet);
                    assert!(hit, "n={n} missing {p:?} in {:?}", inv.points);
                }
            }
        }
    }

    #[test]
    fn calibrated_velocity_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let state = ClassicalSpinState::random(&[0.5, 0.6, 0.7], &mut rng).unwrap();
        let spec = EnergySpectrum::new(vec![0.0, 0.9, 2.1], 0.8, 1).unwrap();
        let curve = build_curve(&state, &spec).unwrap();
        let ctx = AbelContext::new(curve.clone()).unwrap();
        let roots = separation_roots(&state, &spec, &curve, RootChoice::B).unwrap();
        let v = calibrate_velocity(&ctx, &roots.points, &spec, &state, 1e-2, 1e-13).unwrap();
        let exact = ctx.dubrovin_velocity();
        for (a, b) in v.iter().zip(&exact) {
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn theta_flow_reproduces_spin_dynamics() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let state = ClassicalSpinState::random(&[0.5, 0.6, 0.7], &mut rng).unwrap();
        let spec = EnergySpectrum::new(vec![0.0, 0.9, 2.1], 0.8, 1).unwrap();
        let curve = build_curve(&state, &spec).unwrap();
        let ctx = AbelContext::new(curve.clone()).unwrap();
        let roots = separation_roots(&state, &spec, &curve, RootChoice::B).unwrap();
        let z0 = ctx.divisor_image(&roots.points).unwrap();
        let v = calibrate_velocity(&ctx, &roots.points, &spec, &state, 1e-2, 1e-13).unwrap();
        let times: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
        let divisors: Vec<Vec<CurvePoint>> = times
            .iter()
            .map(|&t| ctx.invert_divisor(&ctx.flow(&z0, t, FlowMode::Calibrated, &v)).unwrap().points)
            .collect();
        let spins = integrate_spins_sampled(&state, &spec, &times, 1e-12).unwrap();
        let jm = ctx.jminus_along_flow(&z0.z, &v, &times, &state, &spec);
        for (k, s) in spins.states.iter().enumerate() {
            let lax = crate::curve::LaxMatrix::new(s, &spec).unwrap();
            let b = lax.b_numerator();
            for p in &divisors[k] {
                assert!(b.eval(p.lambda).norm() < 1e-6 * b.abs_scale(p.lambda), "t={}", times[k]);
            }
            assert!((jm[k] - s.j_minus()).norm() < 1e-7, "t={} {} {}", times[k], jm[k], s.j_minus());
        }
    }
}
