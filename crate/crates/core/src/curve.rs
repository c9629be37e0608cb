//! Lax matrix, spectral curve `y² = Q(λ)`, its cuts, the separation
//! variables and the period matrix.
//!
//! Sheet convention: `y_+` is the branch of `√Q` that is analytic off the cut
//! segments and behaves like `+λⁿ` at infinity (the point `∞⁺`).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClassicalSpinState, EnergySpectrum};
use crate::poly::Poly;
use crate::quadrature::adaptive;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `L(λ) = [[a, b], [c, −a]]` with `a = −2/g + Σ S³_i/(λ−ε_i)`,
/// `b = Σ S⁻_i/(λ−ε_i)`, `c = Σ S⁺_i/(λ−ε_i)`.
#[derive(Debug, Clone)]
pub struct LaxMatrix {
    pub g: f64,
    pub poles: Vec<f64>,
    pub a_res: Vec<f64>,
    pub b_res: Vec<C64>,
    pub c_res: Vec<C64>,
}

impl LaxMatrix {
    pub fn new(state: &ClassicalSpinState, spec: &EnergySpectrum) -> Result<Self> {
        if state.n() != spec.n() {
            return Err(Error::DimensionMismatch { expected: spec.n(), got: state.n() });
        }
        Ok(Self {
            g: spec.g(),
            poles: spec.epsilons().to_vec(),
            a_res: state.spins().iter().map(|s| s[2]).collect(),
            b_res: (0..state.n()).map(|i| state.s_minus(i)).collect(),
            c_res: (0..state.n()).map(|i| state.s_plus(i)).collect(),
        })
    }

    pub fn constant(&self) -> f64 {
        -2.0 / self.g
    }

    pub fn a(&self, lam: C64) -> C64 {
        self.poles.iter().zip(&self.a_res).fold(C64::new(self.constant(), 0.0), |acc, (&e, &r)| {
            acc + r / (lam - e)
        })
    }

    pub fn b(&self, lam: C64) -> C64 {
        self.poles.iter().zip(&self.b_res).map(|(&e, &r)| r / (lam - e)).sum()
    }

    pub fn c(&self, lam: C64) -> C64 {
        self.poles.iter().zip(&self.c_res).map(|(&e, &r)| r / (lam - e)).sum()
    }

    pub fn eval(&self, lam: C64) -> [[C64; 2]; 2] {
        let a = self.a(lam);
        [[a, self.b(lam)], [self.c(lam), -a]]
    }

    /// `P(λ) = Π (λ − ε_i)`.
    pub fn pole_poly(&self) -> Poly {
        let roots: Vec<C64> = self.poles.iter().map(|&e| C64::new(e, 0.0)).collect();
        Poly::from_roots(&roots)
    }

    fn numerator(&self, constant: C64, res: &[C64]) -> Poly {
        let mut acc = self.pole_poly().scale(constant);
        for (i, &r) in res.iter().enumerate() {
            let others: Vec<C64> = self
                .poles
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &e)| C64::new(e, 0.0))
                .collect();
            acc = acc.add(&Poly::from_roots(&others).scale(r));
        }
        acc
    }

    /// `a(λ)P(λ)`.
    pub fn a_numerator(&self) -> Poly {
        let res: Vec<C64> = self.a_res.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.numerator(C64::new(self.constant(), 0.0), &res)
    }

    /// `b(λ)P(λ)`, of degree `n − 1` with leading coefficient `J⁻`.
    pub fn b_numerator(&self) -> Poly {
        self.numerator(C64::new(0.0, 0.0), &self.b_res)
    }

    pub fn c_numerator(&self) -> Poly {
        self.numerator(C64::new(0.0, 0.0), &self.c_res)
    }

    /// `Q = (a² + bc)(gP/2)²`.
    pub fn spectral_polynomial(&self) -> Poly {
        let a = self.a_numerator();
        let bc = self.b_numerator().mul(&self.c_numerator());
        a.mul(&a).add(&bc).scale(C64::new(0.25 * self.g * self.g, 0.0))
    }
}

/// A straight cut between two branch points, `lower` having the smaller
/// `(Im, Re)` ordering key.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub lower: C64,
    pub upper: C64,
}

impl Cut {
    pub fn midpoint(&self) -> C64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn half(&self) -> C64 {
        0.5 * (self.upper - self.lower)
    }

    pub fn length(&self) -> f64 {
        (self.upper - self.lower).norm()
    }

    /// Euclidean distance from `p` to the segment.
    pub fn distance(&self, p: C64) -> f64 {
        let d = self.upper - self.lower;
        let t = ((p - self.lower) * d.conj()).re / d.norm_sqr();
        let t = t.clamp(0.0, 1.0);
        (p - (self.lower + d * t)).norm()
    }

    /// Distance between this cut and the segment `from → to`.
    pub fn segment_distance(&self, from: C64, to: C64) -> f64 {
        if self.crossed_by(from, to) {
            return 0.0;
        }
        let other = Cut { lower: from, upper: to };
        self.distance(from)
            .min(self.distance(to))
            .min(other.distance(self.lower))
            .min(other.distance(self.upper))
    }

    /// Whether the open segment `from → to` crosses this cut.
    pub fn crossed_by(&self, from: C64, to: C64) -> bool {
        let cross = |o: C64, a: C64, b: C64| ((a - o).conj() * (b - o)).im;
        let d1 = cross(from, to, self.lower);
        let d2 = cross(from, to, self.upper);
        let d3 = cross(self.lower, self.upper, from);
        let d4 = cross(self.lower, self.upper, to);
        (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperellipticCurve {
    /// Ascending coefficients of the monic `Q`.
    pub q_coeffs: Vec<C64>,
    pub branch_points: Vec<C64>,
    pub cuts: Vec<Cut>,
    pub genus: usize,
}

/// Sort key placing cuts left to right, then bottom to top.
fn cut_order(a: &Cut, b: &Cut) -> std::cmp::Ordering {
    let (ma, mb) = (a.midpoint(), b.midpoint());
    ma.re.partial_cmp(&mb.re).unwrap().then(ma.im.partial_cmp(&mb.im).unwrap())
}

/// Pair branch points into vertical cuts. Points sharing a real part (within
/// `tol`) are grouped, sorted by imaginary part and paired consecutively; for
/// a generic curve each group is a single conjugate pair.
pub fn pair_branch_points(points: &[C64], tol: f64) -> Result<Vec<Cut>> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    let mut cuts = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && (sorted[j].re - sorted[j - 1].re).abs() <= tol {
            j += 1;
        }
        let mut group = sorted[i..j].to_vec();
        if group.len() % 2 == 1 {
            return Err(Error::DegenerateCurve(format!(
                "unpaired branch point near Re λ = {:.6e} (real branch point or coalescence)",
                group[0].re
            )));
        }
        group.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        for pair in group.chunks(2) {
            cuts.push(Cut { lower: pair[0], upper: pair[1] });
        }
        i = j;
    }
    cuts.sort_by(cut_order);
    Ok(cuts)
}

impl HyperellipticCurve {
    /// Curve of a monic polynomial of even degree; computes branch points
    /// and cuts.
    pub fn from_polynomial(q: &Poly) -> Result<Self> {
        let deg = q.degree();
        if deg < 2 || deg % 2 == 1 {
            return Err(Error::DegenerateCurve(format!("Q must have even degree >= 2, got {deg}")));
        }
        let q = q.scale(C64::new(1.0, 0.0) / q.leading());
        let roots = q.roots()?;
        let scale = roots.iter().fold(1.0f64, |m, r| m.max(r.norm()));
        for (i, a) in roots.iter().enumerate() {
            for b in &roots[i + 1..] {
                if (a - b).norm() < 1e-10 * scale {
                    return Err(Error::DegenerateCurve(format!("double root of Q near {a}")));
                }
            }
        }
        let mut curve = Self {
            q_coeffs: q.coeffs.clone(),
            branch_points: roots,
            cuts: Vec::new(),
            genus: deg / 2 - 1,
        };
        curve.cuts = pair_branch_points(&curve.branch_points, 1e-9 * scale)?;
        curve.branch_points = curve.cuts.iter().flat_map(|c| [c.lower, c.upper]).collect();
        Ok(curve)
    }

    /// Curve with prescribed cuts (used when tracking curves along paths).
    pub fn from_cuts(cuts: Vec<Cut>) -> Result<Self> {
        let branch_points: Vec<C64> = cuts.iter().flat_map(|c| [c.lower, c.upper]).collect();
        if branch_points.len() < 2 {
            return Err(Error::DegenerateCurve("no cuts".into()));
        }
        let q = Poly::from_roots(&branch_points);
        Ok(Self { q_coeffs: q.coeffs, genus: cuts.len() - 1, branch_points, cuts })
    }

    pub fn q(&self) -> Poly {
        Poly::new(self.q_coeffs.clone())
    }

    /// Magnitude scale of the branch-point configuration (at least 1).
    pub fn scale(&self) -> f64 {
        self.branch_points.iter().fold(1.0f64, |m, r| m.max(r.norm()))
    }

    /// `y_+(λ)`.
    pub fn y_plus(&self, lam: C64) -> C64 {
        self.y_plus_at(lam, C64::new(0.0, 0.0))
    }

    /// `y_+(base + offset)`, accurate when `base` is a branch point and
    /// `offset` is tiny.
    pub fn y_plus_at(&self, base: C64, offset: C64) -> C64 {
        let mut y = C64::new(1.0, 0.0);
        for cut in &self.cuts {
            let da = (base - cut.lower) + offset;
            let db = (base - cut.upper) + offset;
            let dm = (base - cut.midpoint()) + offset;
            if dm == C64::new(0.0, 0.0) {
                y *= I * cut.half();
                continue;
            }
            y *= dm * ((da / dm) * (db / dm)).sqrt();
        }
        y
    }

    /// Indices of cuts crossed by the open segment `from → to`.
    pub fn crossings(&self, from: C64, to: C64) -> Vec<usize> {
        (0..self.cuts.len()).filter(|&j| self.cuts[j].crossed_by(from, to)).collect()
    }

    /// Nearest branch point: (index into `branch_points`, distance).
    pub fn nearest_branch_point(&self, lam: C64) -> (usize, f64) {
        self.branch_points
            .iter()
            .enumerate()
            .map(|(i, e)| (i, (lam - e).norm()))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }

    /// Smallest distance between distinct branch points.
    pub fn min_branch_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for (i, a) in self.branch_points.iter().enumerate() {
            for b in &self.branch_points[i + 1..] {
                gap = gap.min((a - b).norm());
            }
        }
        gap
    }
}

/// Spectral curve of a spin configuration.
pub fn build_curve(state: &ClassicalSpinState, spec: &EnergySpectrum) -> Result<HyperellipticCurve> {
    if state.radii().contains(&0.0) {
        return Err(Error::DegenerateCurve("zero spin length".into()));
    }
    let lax = LaxMatrix::new(state, spec)?;
    HyperellipticCurve::from_polynomial(&lax.spectral_polynomial())
}

/// Which numerator defines the separation variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum RootChoice {
    /// Zeros of `b(λ)`, the choice consistent with the equations of motion.
    #[default]
    B,
    /// Zeros of `c(λ)` (complex conjugates of the `b` zeros for real spins).
    C,
}

/// A point `(λ, y)` on the curve with `y = sheet · y_+(λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub lambda: C64,
    pub sheet: i8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparationRoots {
    pub points: Vec<CurvePoint>,
    /// Distinct cut assigned to each point (nearest-cut matching).
    pub cut_index: Vec<usize>,
    /// Distance of each point to its assigned cut.
    pub cut_distance: Vec<f64>,
}

impl SeparationRoots {
    pub fn max_cut_distance(&self) -> f64 {
        self.cut_distance.iter().fold(0.0, |m: f64, &d| m.max(d))
    }
}

/// Assign each point to a distinct cut, minimizing the largest distance and
/// then the total distance.
pub fn assign_cuts(curve: &HyperellipticCurve, pts: &[C64]) -> Result<(Vec<usize>, Vec<f64>)> {
    let ncut = curve.cuts.len();
    if pts.len() > ncut {
        return Err(Error::DegenerateCurve(format!("{} points for {ncut} cuts", pts.len())));
    }
    let dist: Vec<Vec<f64>> =
        pts.iter().map(|&p| curve.cuts.iter().map(|c| c.distance(p)).collect()).collect();
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    let mut current = Vec::with_capacity(pts.len());
    fn search(
        k: usize,
        dist: &[Vec<f64>],
        used: u64,
        current: &mut Vec<usize>,
        best: &mut Option<(f64, f64, Vec<usize>)>,
    ) {
        if k == dist.len() {
            let worst = current.iter().enumerate().map(|(i, &c)| dist[i][c]).fold(0.0, f64::max);
            let total: f64 = current.iter().enumerate().map(|(i, &c)| dist[i][c]).sum();
            let better = match best {
                None => true,
                Some((w, t, _)) => worst < *w || (worst == *w && total < *t),
            };
            if better {
                *best = Some((worst, total, current.clone()));
            }
            return;
        }
        for c in 0..dist[k].len() {
            if used >> c & 1 == 0 {
                current.push(c);
                search(k + 1, dist, used | 1 << c, current, best);
                current.pop();
            }
        }
    }
    search(0, &dist, 0, &mut current, &mut best);
    let (_, _, assign) = best.ok_or_else(|| Error::DegenerateCurve("no cut assignment".into()))?;
    let d = assign.iter().enumerate().map(|(i, &c)| dist[i][c]).collect();
    Ok((assign, d))
}

/// Zeros `u_k` of `b(λ)` (or `c(λ)`), with `y(u_k) = (g/2) a(u_k) P(u_k)`
/// fixing the sheet.
pub fn separation_roots(
    state: &ClassicalSpinState,
    spec: &EnergySpectrum,
    curve: &HyperellipticCurve,
    choice: RootChoice,
) -> Result<SeparationRoots> {
    let lax = LaxMatrix::new(state, spec)?;
    let num = match choice {
        RootChoice::B => lax.b_numerator(),
        RootChoice::C => lax.c_numerator(),
    };
    let n = spec.n();
    if n == 1 {
        return Ok(SeparationRoots { points: Vec::new(), cut_index: Vec::new(), cut_distance: Vec::new() });
    }
    let size: f64 = lax.b_res.iter().map(|v| v.norm()).sum();
    let lead = num.coeffs.get(n - 1).copied().unwrap_or_default();
    if size == 0.0 || lead.norm() < 1e-14 * size {
        return Err(Error::DegenerateCurve("J⁻ vanishes: separation variables escape to infinity".into()));
    }
    let roots = num.roots()?;
    let a_num = lax.a_numerator();
    let points = roots
        .iter()
        .map(|&u| {
            let y = a_num.eval(u) * (0.5 * spec.g());
            let yp = curve.y_plus(u);
            let sheet = if (y - yp).norm() <= (y + yp).norm() { 1 } else { -1 };
            CurvePoint { lambda: u, sheet }
        })
        .collect::<Vec<_>>();
    let lambdas: Vec<C64> = points.iter().map(|p| p.lambda).collect();
    let (cut_index, cut_distance) = assign_cuts(curve, &lambdas)?;
    Ok(SeparationRoots { points, cut_index, cut_distance })
}

/// Canonical cycles: `α_j` encircles cut `j` counter-clockwise on the `+`
/// sheet; `β_j` runs from cut `j` to the last cut on the `+` sheet and back on
/// the `−` sheet, as a chain of legs between consecutive cuts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomologyBasis {
    pub alpha_cuts: Vec<usize>,
    /// Straight legs `(from, to)` from cut `k` to cut `k + 1`.
    pub legs: Vec<(C64, C64)>,
    /// `β_j` is the sum of legs `j..g`.
    pub genus: usize,
}

impl HomologyBasis {
    pub fn new(curve: &HyperellipticCurve) -> Self {
        let g = curve.genus;
        // Zigzag through the branch points: enter cut 1 at its lower end, leave
        // each cut at the end it was not entered by, and enter the next cut at
        // its nearer end. Consecutive legs then share no endpoint, so the β
        // cycles do not meet each other.
        let mut legs = Vec::with_capacity(g);
        let mut exit = curve.cuts[0].upper;
        for k in 0..g {
            let next = curve.cuts[k + 1];
            let (entry, other) = if (next.lower - exit).norm() < (next.upper - exit).norm() {
                (next.lower, next.upper)
            } else {
                (next.upper, next.lower)
            };
            legs.push((exit, entry));
            exit = other;
        }
        Self { alpha_cuts: (0..g).collect(), legs, genus: g }
    }

    /// Intersection form on `(α_1..α_g, β_1..β_g)`, computed from where the
    /// cycles meet the cuts: `β_j` starts on cut `j` and ends on the last
    /// cut, which carries no `α`.
    pub fn intersection_matrix(&self) -> DMatrix<i64> {
        let g = self.genus;
        let mut m = DMatrix::zeros(2 * g, 2 * g);
        for i in 0..g {
            for j in 0..g {
                // β_j leaves cut j once; every later cut it enters and
                // leaves again, and the last cut carries no α.
                let v = (i == j) as i64;
                m[(i, g + j)] = v;
                m[(g + j, i)] = -v;
            }
        }
        m
    }
}

pub(crate) fn max_norm(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

#[derive(Debug, Clone)]
pub struct PeriodData {
    /// `M_ij = ∮_{α_j} μ_i` with `μ_i = λ^{g−i} dλ / y`.
    pub m: DMatrix<C64>,
    /// `M⁻¹`: row `i` gives `ω_i` in terms of the `μ`.
    pub m_inv: DMatrix<C64>,
    pub b: DMatrix<C64>,
    /// Sign applied to the β legs so that `Im B ≻ 0`.
    pub beta_sign: f64,
}

impl PeriodData {
    pub fn genus(&self) -> usize {
        self.b.nrows()
    }

    /// `(ω_1, …, ω_g)(λ)` as coefficients of `dλ / y_+`.
    pub fn omega_coeffs(&self, lam: C64) -> Vec<C64> {
        let g = self.genus();
        let mu: Vec<C64> = (0..g).map(|i| lam.powi((g - 1 - i) as i32)).collect();
        (0..g).map(|i| (0..g).map(|l| self.m_inv[(i, l)] * mu[l]).sum()).collect()
    }

    pub fn symmetry_defect(&self) -> f64 {
        max_norm(&(&self.b - self.b.transpose()))
    }

    pub fn min_imag_eigenvalue(&self) -> f64 {
        let y = self.b.map(|v| v.im);
        let y = 0.5 * (&y + y.transpose());
        y.symmetric_eigenvalues().iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

/// `∮_{α_j} λ^k dλ / y_+` for `k = 0..g`, by collapsing the loop onto the cut:
/// with `λ = m + h cos θ` the integrand becomes the smooth periodic
/// `i λ^k / Π_{j'≠j} s_{j'}(λ)` and the trapezoidal rule converges
/// geometrically.
pub fn alpha_moments(curve: &HyperellipticCurve, j: usize, powers: usize, nodes: usize) -> Vec<C64> {
    let cut = curve.cuts[j];
    let (m, h) = (cut.midpoint(), cut.half());
    let mut acc = vec![C64::new(0.0, 0.0); powers];
    for s in 0..nodes {
        let theta = 2.0 * PI * (s as f64) / (nodes as f64);
        let lam = m + h * theta.cos();
        let mut other = C64::new(1.0, 0.0);
        for (k, c) in curve.cuts.iter().enumerate() {
            if k != j {
                let dm = lam - c.midpoint();
                other *= dm * (((lam - c.lower) / dm) * ((lam - c.upper) / dm)).sqrt();
            }
        }
        let base = I / other;
        let mut p = C64::new(1.0, 0.0);
        for a in acc.iter_mut() {
            *a += base * p;
            p *= lam;
        }
    }
    let w = 2.0 * PI / nodes as f64;
    acc.into_iter().map(|v| v * w).collect()
}

fn alpha_moments_converged(curve: &HyperellipticCurve, j: usize, powers: usize) -> Result<Vec<C64>> {
    let mut nodes = 64;
    let mut prev = alpha_moments(curve, j, powers, nodes);
    while nodes < 1 << 20 {
        nodes *= 2;
        let next = alpha_moments(curve, j, powers, nodes);
        let diff = prev.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let size = next.iter().map(|v| v.norm()).fold(0.0, f64::max);
        prev = next;
        if diff <= 1e-14 * size.max(1e-300) {
            return Ok(prev);
        }
    }
    Err(Error::Quadrature(format!("alpha period on cut {j} did not converge")))
}

/// `∫_{E}^{E'} λ^k dλ / y_+` along the straight segment between two branch
/// points, with `λ − E = (mid − E)s²` on each half to absorb the square-root
/// endpoint behavior.
pub fn segment_moments(
    curve: &HyperellipticCurve,
    from: C64,
    to: C64,
    powers: usize,
    tol: f64,
) -> Result<Vec<C64>> {
    let mid = 0.5 * (from + to);
    let mut total = vec![C64::new(0.0, 0.0); powers];
    for (end, sign) in [(from, 1.0), (to, -1.0)] {
        let d = mid - end;
        let part = adaptive(
            |s, out| {
                let off = d * (s * s);
                let lam = end + off;
                let y = curve.y_plus_at(end, off);
                let base = d * (2.0 * s) / y;
                let mut p = C64::new(1.0, 0.0);
                for o in out.iter_mut() {
                    *o = base * p;
                    p *= lam;
                }
            },
            0.0,
            1.0,
            powers,
            tol,
        )?;
        for (t, v) in total.iter_mut().zip(part) {
            *t += v * sign;
        }
    }
    Ok(total)
}

/// Period matrix. `tol` is the absolute quadrature tolerance for the β legs.
pub fn period_data(curve: &HyperellipticCurve, basis: &HomologyBasis, tol: f64) -> Result<PeriodData> {
    let g = curve.genus;
    if g == 0 {
        return Err(Error::InvalidPeriods("genus 0 curve has no periods".into()));
    }
    let scale = curve.scale();
    if curve.min_branch_gap() < 1e-8 * scale {
        return Err(Error::InvalidPeriods("near-coalescent branch points".into()));
    }
    // μ_i = λ^{g−i}: row i uses power g−1−i (0-based).
    let mut m = DMatrix::<C64>::zeros(g, g);
    for (j, &cut) in basis.alpha_cuts.iter().enumerate() {
        let mom = alpha_moments_converged(curve, cut, g)?;
        for i in 0..g {
            m[(i, j)] = mom[g - 1 - i];
        }
    }
    let m_inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidPeriods("singular alpha-period matrix".into()))?;
    let mut legs = Vec::with_capacity(g);
    for &(from, to) in &basis.legs {
        legs.push(segment_moments(curve, from, to, g, tol)?);
    }
    // β_j = Σ_{k≥j} 2·leg_k
    let mut beta_mu = DMatrix::<C64>::zeros(g, g);
    for j in 0..g {
        for leg in &legs[j..] {
            for i in 0..g {
                beta_mu[(i, j)] += leg[g - 1 - i] * 2.0;
            }
        }
    }
    let b = &m_inv * beta_mu;
    let mut pd = PeriodData { m, m_inv, b, beta_sign: 1.0 };
    if pd.min_imag_eigenvalue() <= 0.0 {
        pd.b = -pd.b;
        pd.beta_sign = -1.0;
    }
    if pd.min_imag_eigenvalue() <= 0.0 {
        return Err(Error::InvalidPeriods("Im B is not positive definite".into()));
    }
    if pd.symmetry_defect() > 1e-6 * max_norm(&pd.b).max(1.0) {
        return Err(Error::InvalidPeriods(format!("B not symmetric ({:e})", pd.symmetry_defect())));
    }
    Ok(pd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_setup(n: usize, seed: u64) -> (ClassicalSpinState, EnergySpectrum) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let radii: Vec<f64> = (0..n).map(|i| 0.5 + 0.1 * i as f64).collect();
        let state = ClassicalSpinState::random(&radii, &mut rng).unwrap();
        let eps: Vec<f64> = (0..n).map(|i| i as f64 - 0.3 * (i as f64).sin()).collect();
        let spec = EnergySpectrum::new(eps, 0.8, 1).unwrap();
        (state, spec)
    }

    #[test]
    fn spectral_polynomial_matches_direct_evaluation() {
        let (state, spec) = random_setup(3, 1);
        let lax = LaxMatrix::new(&state, &spec).unwrap();
        let q = lax.spectral_polynomial();
        assert_eq!(q.degree(), 6);
        assert!((q.leading() - 1.0).norm() < 1e-12);
        let p = lax.pole_poly();
        for k in 0..7 {
            let lam = C64::new(-1.0 + 0.7 * k as f64, 0.3 * k as f64 - 0.4);
            let a = lax.a(lam);
            let direct = (a * a + lax.b(lam) * lax.c(lam)) * (0.5 * spec.g() * p.eval(lam)).powi(2);
            assert!((q.eval(lam) - direct).norm() <= 1e-10 * direct.norm());
        }
    }

    #[test]
    fn quartic_with_stacked_roots() {
        let q = Poly::from_real(&[4.0, 0.0, 5.0, 0.0, 1.0]);
        let curve = HyperellipticCurve::from_polynomial(&q).unwrap();
        let expect = [C64::new(0.0, -2.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 2.0)];
        for (a, b) in curve.branch_points.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn y_plus_squares_to_q_and_is_plus_at_infinity() {
        let (state, spec) = random_setup(3, 2);
        let curve = build_curve(&state, &spec).unwrap();
        let q = curve.q();
        for k in 0..20 {
            let lam = C64::new(-2.0 + 0.31 * k as f64, 1.7 * (k as f64).cos());
            let y = curve.y_plus(lam);
            assert!((y * y - q.eval(lam)).norm() < 1e-10 * q.eval(lam).norm().max(1.0));
        }
        let big = C64::new(1e4, 3e3);
        let ratio = curve.y_plus(big) / big.powi(3);
        assert!((ratio - 1.0).norm() < 1e-3);
    }

    #[test]
    fn symmetric_two_spin_midpoint() {
        let state = ClassicalSpinState::new(vec![[0.7, 0.0, 0.0], [0.7, 0.0, 0.0]]).unwrap();
        let spec = EnergySpectrum::new(vec![-1.0, 1.0], 0.5, 1).unwrap();
        let curve = build_curve(&state, &spec).unwrap();
        let roots = separation_roots(&state, &spec, &curve, RootChoice::B).unwrap();
        assert_eq!(roots.points.len(), 1);
        assert!(roots.points[0].lambda.norm() < 1e-14);
    }

    #[test]
    fn separation_sheet_matches_a() {
        let (state, spec) = random_setup(4, 3);
        let curve = build_curve(&state, &spec).unwrap();
        let lax = LaxMatrix::new(&state, &spec).unwrap();
        let roots = separation_roots(&state, &spec, &curve, RootChoice::B).unwrap();
        for p in &roots.points {
            let y = lax.a_numerator().eval(p.lambda) * (0.5 * spec.g());
            let on_sheet = curve.y_plus(p.lambda) * p.sheet as f64;
            assert!((y - on_sheet).norm() < 1e-9 * y.norm().max(1e-3));
        }
        let croots = separation_roots(&state, &spec, &curve, RootChoice::C).unwrap();
        for (b, c) in roots.points.iter().zip(&croots.points) {
            assert!(croots.points.iter().any(|q| (q.lambda - b.lambda.conj()).norm() < 1e-10));
            let _ = c;
        }
    }

    fn agm(mut a: f64, mut b: f64) -> f64 {
        while (a - b).abs() > 1e-16 * a {
            let (x, y) = (0.5 * (a + b), (a * b).sqrt());
            a = x;
            b = y;
        }
        a
    }

    fn ellip_k(k: f64) -> f64 {
        PI / (2.0 * agm(1.0, (1.0 - k * k).sqrt()))
    }

    #[test]
    fn genus_one_period_matches_elliptic_oracle() {
        let q = Poly::from_real(&[4.0, 0.0, 5.0, 0.0, 1.0]);
        let curve = HyperellipticCurve::from_polynomial(&q).unwrap();
        let basis = HomologyBasis::new(&curve);
        let pd = period_data(&curve, &basis, 1e-13).unwrap();
        // α: ∮ around [−2i, −i] = 2∫_1^2 dt/√((t²−1)(4−t²)) = K(√3/2);
        // β: 2∫_{−1}^{1} dt/√((1−t²)(4−t²)) = 2K(1/2).
        let expect = 2.0 * ellip_k(0.5) / ellip_k(3f64.sqrt() / 2.0);
        let b = pd.b[(0, 0)];
        assert!(b.re.abs() < 1e-10, "{b}");
        assert!((b.im - expect).abs() < 1e-10, "{b} vs {expect}");
    }

    #[test]
    fn periods_normalized_symmetric_and_stable() {
        for (n, seed) in [(3, 5u64), (4, 6)] {
            let (state, spec) = random_setup(n, seed);
            let curve = build_curve(&state, &spec).unwrap();
            let basis = HomologyBasis::new(&curve);
            let pd = period_data(&curve, &basis, 1e-13).unwrap();
            assert!(pd.symmetry_defect() < 1e-9, "{}", pd.symmetry_defect());
            assert!(pd.min_imag_eigenvalue() > 0.0);
            for j in 0..curve.genus {
                let mom = alpha_moments(&curve, basis.alpha_cuts[j], curve.genus, 4096);
                for i in 0..curve.genus {
                    let v: C64 = (0..curve.genus)
                        .map(|l| pd.m_inv[(i, l)] * mom[curve.genus - 1 - l])
                        .sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((v - target).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn intersection_form_is_canonical() {
        let (state, spec) = random_setup(4, 9);
        let curve = build_curve(&state, &spec).unwrap();
        let m = HomologyBasis::new(&curve).intersection_matrix();
        let g = curve.genus;
        for i in 0..2 * g {
            for j in 0..2 * g {
                let expect = if j == i + g { 1 } else if i == j + g { -1 } else { 0 };
                assert_eq!(m[(i, j)], expect);
            }
        }
    }
}
