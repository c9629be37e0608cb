//! Branch-point motion under parameter sweeps: coalescence detection, braid
//! words, the induced action on first homology, and the fractional-level
//! sequence.
//!
//! Homology is written in the arc basis of the base configuration: with the
//! branch points ordered along a slightly rotated real axis, `δ_k` lifts the
//! arc between points `k` and `k + 1`. Then `α_j = δ_{2j−1}`,
//! `β_j = Σ_{k≥j} δ_{2k}`, and a half twist of points `k, k+1` acts by the
//! transvection `z ↦ z + ⟨z, δ_k⟩ δ_k`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::abel::AbelContext;
use crate::curve::HyperellipticCurve;
use crate::error::{Error, Result};
use crate::model::ClassicalSpinState;
use crate::poly::Poly;

/// Angle of the projection line used to read braid words.
const PROJECTION_ANGLE: f64 = 0.1;

/// Coupling, level energies and (optionally) spin lengths. Complex values
/// are allowed so that loops can encircle coalescences; `radii`, when set,
/// rescales the template spins to those lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub g: C64,
    pub epsilons: Vec<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
}

impl ParamPoint {
    pub fn real(g: f64, epsilons: &[f64]) -> Self {
        Self {
            g: C64::new(g, 0.0),
            epsilons: epsilons.iter().map(|&e| C64::new(e, 0.0)).collect(),
            radii: None,
        }
    }

    pub fn with_radii(mut self, radii: Vec<f64>) -> Self {
        self.radii = Some(radii);
        self
    }

    fn lerp(&self, other: &Self, t: f64) -> Self {
        let radii = match (&self.radii, &other.radii) {
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| x + (y - x) * t).collect()),
            (a, _) => a.clone(),
        };
        Self {
            g: self.g + (other.g - self.g) * t,
            epsilons: self.epsilons.iter().zip(&other.epsilons).map(|(a, b)| a + (b - a) * t).collect(),
            radii,
        }
    }

    /// Equality up to a relative `1e-12`, so that paths assembled from
    /// independently computed vertices still connect.
    pub fn same_as(&self, other: &Self) -> bool {
        let close = |a: C64, b: C64| (a - b).norm() <= 1e-12 * (1.0 + a.norm().max(b.norm()));
        close(self.g, other.g)
            && self.epsilons.len() == other.epsilons.len()
            && self.epsilons.iter().zip(&other.epsilons).all(|(a, b)| close(*a, *b))
            && match (&self.radii, &other.radii) {
                (Some(a), Some(b)) => a.iter().zip(b).all(|(x, y)| close(C64::new(*x, 0.0), C64::new(*y, 0.0))),
                (None, None) => true,
                _ => false,
            }
    }

    pub fn is_real(&self) -> bool {
        self.g.im == 0.0 && self.epsilons.iter().all(|e| e.im == 0.0)
    }
}

/// Piecewise-linear path through `nodes`, sampled with `samples` points per
/// segment as the initial tracking grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPath {
    pub nodes: Vec<ParamPoint>,
    pub samples: usize,
    pub closed: bool,
}

impl ParameterPath {
    pub fn new(nodes: Vec<ParamPoint>, samples: usize, closed: bool) -> Result<Self> {
        if nodes.len() < 2 || samples < 2 {
            return Err(Error::Config("a path needs at least 2 nodes and 2 samples".into()));
        }
        let n = nodes[0].epsilons.len();
        if nodes.iter().any(|p| p.epsilons.len() != n) {
            return Err(Error::Config("path nodes disagree on the number of levels".into()));
        }
        if nodes.iter().any(|p| p.radii.as_ref().is_some_and(|r| r.len() != n || r.iter().any(|&x| !(x > 0.0)))) {
            return Err(Error::Config("path radii must be positive, one per level".into()));
        }
        if nodes.iter().any(|p| p.radii.is_some()) && nodes.iter().any(|p| p.radii.is_none()) {
            return Err(Error::Config("radii must be given at every node or none".into()));
        }
        if closed && !nodes[0].same_as(nodes.last().expect("non-empty")) {
            return Err(Error::Config("closed path must end where it starts".into()));
        }
        Ok(Self { nodes, samples, closed })
    }

    /// Closed polygonal loop `g = centre + radius·e^{iφ}` starting at
    /// `φ = phase`, with fixed level energies.
    pub fn coupling_circle(
        centre: C64,
        radius: f64,
        phase: f64,
        epsilons: &[f64],
        vertices: usize,
        turns: i32,
    ) -> Result<Self> {
        let eps: Vec<C64> = epsilons.iter().map(|&e| C64::new(e, 0.0)).collect();
        let count = vertices * turns.unsigned_abs() as usize;
        let sign = turns.signum() as f64;
        let mut nodes: Vec<ParamPoint> = (0..=count)
            .map(|k| {
                let phi = phase + sign * 2.0 * std::f64::consts::PI * k as f64 / vertices as f64;
                ParamPoint { g: centre + C64::from_polar(radius, phi), epsilons: eps.clone(), radii: None }
            })
            .collect();
        let first = nodes[0].clone();
        *nodes.last_mut().expect("non-empty") = first;
        Self::new(nodes, 4, true)
    }

    /// `self` followed by `other` (which must start where `self` ends).
    pub fn then(&self, other: &Self) -> Result<Self> {
        if !self.nodes.last().expect("non-empty").same_as(&other.nodes[0]) {
            return Err(Error::Config("paths do not connect".into()));
        }
        let mut nodes = self.nodes.clone();
        nodes.extend(other.nodes[1..].iter().cloned());
        let closed = nodes[0].same_as(nodes.last().expect("non-empty"));
        if closed {
            let first = nodes[0].clone();
            *nodes.last_mut().expect("non-empty") = first;
        }
        Self::new(nodes, self.samples.max(other.samples), closed)
    }

    pub fn reversed(&self) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Self { nodes, samples: self.samples, closed: self.closed }
    }

    /// Point at arclength-free parameter `s ∈ [0, 1]` (uniform per segment).
    pub fn point_at(&self, s: f64) -> ParamPoint {
        let segs = (self.nodes.len() - 1) as f64;
        let x = (s.clamp(0.0, 1.0) * segs).min(segs);
        let i = (x.floor() as usize).min(self.nodes.len() - 2);
        self.nodes[i].lerp(&self.nodes[i + 1], x - i as f64)
    }
}

/// `Q(λ)` for fixed spins at a (possibly complex) parameter point.
pub fn spectral_polynomial(spins: &ClassicalSpinState, p: &ParamPoint) -> Result<Poly> {
    let n = spins.n();
    if p.epsilons.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.epsilons.len() });
    }
    if p.g.norm() == 0.0 {
        return Err(Error::InvalidSpectrum("g must be nonzero".into()));
    }
    let scaled;
    let spins = match &p.radii {
        Some(r) => {
            let s: Vec<[f64; 3]> = spins
                .spins()
                .iter()
                .zip(spins.radii())
                .zip(r)
                .map(|((v, &r0), &r1)| [v[0] * r1 / r0, v[1] * r1 / r0, v[2] * r1 / r0])
                .collect();
            scaled = ClassicalSpinState::new(s)?;
            &scaled
        }
        None => spins,
    };
    let pole = Poly::from_roots(&p.epsilons);
    let numerator = |constant: C64, res: &dyn Fn(usize) -> C64| -> Poly {
        let mut acc = pole.scale(constant);
        for i in 0..n {
            let others: Vec<C64> =
                p.epsilons.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &e)| e).collect();
            acc = acc.add(&Poly::from_roots(&others).scale(res(i)));
        }
        acc
    };
    let zero = C64::new(0.0, 0.0);
    let a = numerator(-2.0 / p.g, &|i| C64::new(spins.spins()[i][2], 0.0));
    let b = numerator(zero, &|i| spins.s_minus(i));
    let c = numerator(zero, &|i| spins.s_plus(i));
    Ok(a.mul(&a).add(&b.mul(&c)).scale(0.25 * p.g * p.g))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoalescenceEvent {
    /// Path parameter at the closest approach.
    pub s: f64,
    pub g: C64,
    /// Indices (in the initial branch-point order) of the approaching pair.
    pub pair: (usize, usize),
    pub min_distance: f64,
    /// Period of the separation-variable oscillation just before and after
    /// the event (genus-1 real configurations only).
    pub period_before: Option<f64>,
    pub period_after: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonodromyResult {
    /// `permutation[k]` is the initial index of the point where strand `k`
    /// ends (closed paths).
    pub permutation: Vec<usize>,
    /// Generators as (1-based position, exponent ±1).
    pub braid: Vec<(usize, i8)>,
    pub braid_word: String,
    /// Integer action on `(α_1..α_g, β_1..β_g)` coordinates.
    pub matrix: Vec<Vec<i64>>,
    pub events: Vec<CoalescenceEvent>,
    pub min_distance: f64,
    pub steps: usize,
}

impl MonodromyResult {
    pub fn matrix(&self) -> DMatrix<i64> {
        let d = self.matrix.len();
        DMatrix::from_fn(d, d, |i, j| self.matrix[i][j])
    }
}

/// `J = [[0, I], [−I, 0]]`.
pub fn symplectic_form(g: usize) -> DMatrix<i64> {
    let mut j = DMatrix::zeros(2 * g, 2 * g);
    for i in 0..g {
        j[(i, g + i)] = 1;
        j[(g + i, i)] = -1;
    }
    j
}

/// Coordinates of the arc cycles `δ_1..δ_{2g+1}`.
pub fn arc_cycles(g: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::with_capacity(2 * g + 1);
    for k in 1..=(2 * g + 1) {
        let mut v = vec![0i64; 2 * g];
        if k % 2 == 1 {
            let j = k.div_ceil(2);
            if j <= g {
                v[j - 1] = 1;
            } else {
                for x in v.iter_mut().take(g) {
                    *x = -1;
                }
            }
        } else {
            let j = k / 2;
            v[g + j - 1] = 1;
            if j < g {
                v[g + j] = -1;
            }
        }
        out.push(v);
    }
    out
}

/// `T_δ^{±1} = I ∓ δδᵀJ`.
pub fn transvection(delta: &[i64], exponent: i8) -> DMatrix<i64> {
    let d = delta.len();
    let g = d / 2;
    let dv = DMatrix::from_column_slice(d, 1, delta);
    let outer = &dv * dv.transpose() * symplectic_form(g);
    DMatrix::identity(d, d) - outer * exponent as i64
}

fn det_i64(m: &DMatrix<i64>) -> i64 {
    // Bareiss fraction-free elimination
    let n = m.nrows();
    let mut a: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)] as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    if n == 0 {
        1
    } else {
        (sign * a[n - 1][n - 1]) as i64
    }
}

/// Determinant of an integer matrix (exact).
pub fn integer_determinant(m: &DMatrix<i64>) -> i64 {
    det_i64(m)
}

/// Whether `MᵀJM = J` holds exactly.
pub fn is_symplectic(m: &DMatrix<i64>) -> bool {
    let j = symplectic_form(m.nrows() / 2);
    m.transpose() * &j * m == j
}

/// Rank of an integer matrix via exact fraction-free elimination.
pub fn integer_rank(m: &DMatrix<i64>) -> usize {
    let (r, c) = m.shape();
    let mut a: Vec<Vec<i128>> = (0..r).map(|i| (0..c).map(|j| m[(i, j)] as i128).collect()).collect();
    let mut rank = 0;
    for col in 0..c {
        let Some(p) = (rank..r).find(|&i| a[i][col] != 0) else { continue };
        a.swap(rank, p);
        for i in 0..r {
            if i != rank && a[i][col] != 0 {
                let (f, h) = (a[i][col], a[rank][col]);
                for j in 0..c {
                    a[i][j] = a[i][j] * h - a[rank][j] * f;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn project(z: C64) -> (f64, f64) {
    let w = z * C64::from_polar(1.0, -PROJECTION_ANGLE);
    (w.re, w.im)
}

fn sorted_roots(q: &Poly) -> Result<Vec<C64>> {
    let mut r = q.roots()?;
    r.sort_by(|a, b| project(*a).0.partial_cmp(&project(*b).0).unwrap());
    Ok(r)
}

fn min_gap(points: &[C64]) -> (f64, (usize, usize)) {
    let mut best = (f64::INFINITY, (0, 0));
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = (points[i] - points[j]).norm();
            if d < best.0 {
                best = (d, (i, j));
            }
        }
    }
    best
}

/// Match `old` to `new` by nearest neighbours; `None` if ambiguous.
fn match_step(old: &[C64], new: &[C64]) -> Option<Vec<C64>> {
    let (gap, _) = min_gap(old);
    let mut out = Vec::with_capacity(old.len());
    let mut used = vec![false; new.len()];
    for &o in old {
        let mut d: Vec<(f64, usize)> = new.iter().enumerate().map(|(i, &n)| ((n - o).norm(), i)).collect();
        d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let (d1, i1) = d[0];
        let d2 = d.get(1).map_or(f64::INFINITY, |x| x.0);
        if used[i1] || d1 > 0.25 * gap || d1 > 0.5 * d2 {
            return None;
        }
        used[i1] = true;
        out.push(new[i1]);
    }
    Some(out)
}

/// Strand order along the projection.
fn order(points: &[C64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| project(points[a]).0.partial_cmp(&project(points[b]).0).unwrap());
    idx
}

/// Crossing between two tracked configurations: `Some(None)` if the order
/// is unchanged, `Some(Some((pos, sign)))` for one adjacent swap, `None` if
/// the step must be refined.
fn crossing(old: &[C64], new: &[C64]) -> Option<Option<(usize, i8)>> {
    let o = order(old);
    let n = order(new);
    if o == n {
        return Some(None);
    }
    let diffs: Vec<usize> = (0..o.len()).filter(|&i| o[i] != n[i]).collect();
    if diffs.len() != 2 || diffs[1] != diffs[0] + 1 {
        return None;
    }
    let pos = diffs[0];
    let (left, right) = (o[pos], o[pos + 1]);
    let (xl0, yl0) = project(old[left]);
    let (xl1, yl1) = project(new[left]);
    let (xr0, yr0) = project(old[right]);
    let (xr1, yr1) = project(new[right]);
    let denom = (xl1 - xl0) - (xr1 - xr0);
    let theta = if denom == 0.0 { 0.5 } else { ((xr0 - xl0) / denom).clamp(0.0, 1.0) };
    let yl = yl0 + theta * (yl1 - yl0);
    let yr = yr0 + theta * (yr1 - yr0);
    Some(Some((pos + 1, if yl < yr { 1 } else { -1 })))
}

/// Cancel adjacent `s_i s_i^-1` pairs.
fn free_reduce(word: Vec<(usize, i8)>) -> Vec<(usize, i8)> {
    let mut out: Vec<(usize, i8)> = Vec::with_capacity(word.len());
    for g in word {
        match out.last() {
            Some(&(p, e)) if p == g.0 && e == -g.1 => {
                out.pop();
            }
            _ => out.push(g),
        }
    }
    out
}

/// Track the branch points along `path`; detect approaches closer than
/// `delta`; read off the braid word and the homology action.
pub fn sweep_and_detect(
    path: &ParameterPath,
    spins: &ClassicalSpinState,
    delta: f64,
) -> Result<MonodromyResult> {
    let start = sorted_roots(&spectral_polynomial(spins, &path.point_at(0.0))?)?;
    let (gap0, _) = min_gap(&start);
    if gap0 < delta {
        return Err(Error::Tracking { param: 0.0, reason: "path starts at a coalescence".into() });
    }
    let genus = start.len() / 2 - 1;
    let segments = path.nodes.len() - 1;
    let base_ds = 1.0 / (segments * path.samples) as f64;
    let mut current = start.clone();
    let mut s = 0.0;
    let mut ds = base_ds;
    let mut braid: Vec<(usize, i8)> = Vec::new();
    let mut events: Vec<CoalescenceEvent> = Vec::new();
    let mut open_event: Option<(f64, f64, (usize, usize))> = None;
    let mut min_distance = gap0;
    let mut steps = 0usize;
    while s < 1.0 {
        let next_s = (s + ds).min(1.0);
        let p = path.point_at(next_s);
        let roots = spectral_polynomial(spins, &p)?.roots()?;
        let accepted = match_step(&current, &roots).and_then(|m| crossing(&current, &m).map(|c| (m, c)));
        match accepted {
            Some((matched, cross)) => {
                if let Some(c) = cross {
                    braid.push(c);
                }
                current = matched;
                s = next_s;
                steps += 1;
                let (gap, pair) = min_gap(&current);
                min_distance = min_distance.min(gap);
                match open_event {
                    Some((_, best, _)) if gap < delta => {
                        if gap < best {
                            open_event = Some((s, gap, pair));
                        }
                    }
                    Some((es, best, epair)) => {
                        events.push(CoalescenceEvent {
                            s: es,
                            g: path.point_at(es).g,
                            pair: epair,
                            min_distance: best,
                            period_before: None,
                            period_after: None,
                        });
                        open_event = None;
                    }
                    None if gap < delta => open_event = Some((s, gap, pair)),
                    None => {}
                }
                ds = (ds * 2.0).min(base_ds);
            }
            None => {
                ds *= 0.5;
                if ds < 1e-14 {
                    return Err(Error::Tracking {
                        param: s,
                        reason: "ambiguous branch-point continuation".into(),
                    });
                }
            }
        }
        if steps > 10_000_000 {
            return Err(Error::Tracking { param: s, reason: "step budget exhausted".into() });
        }
    }
    if let Some((es, best, epair)) = open_event {
        events.push(CoalescenceEvent {
            s: es,
            g: path.point_at(es).g,
            pair: epair,
            min_distance: best,
            period_before: None,
            period_after: None,
        });
    }
    for ev in events.iter_mut() {
        let before = path.point_at((ev.s - 0.02).max(0.0));
        let after = path.point_at((ev.s + 0.02).min(1.0));
        ev.period_before = oscillation_period_at(spins, &before).ok().flatten();
        ev.period_after = oscillation_period_at(spins, &after).ok().flatten();
    }
    let permutation = if path.closed {
        current
            .iter()
            .map(|c| {
                start
                    .iter()
                    .enumerate()
                    .map(|(i, s0)| (i, (s0 - c).norm()))
                    .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b })
                    .0
            })
            .collect()
    } else {
        (0..start.len()).collect()
    };
    let braid = free_reduce(braid);
    let cycles = arc_cycles(genus);
    let mut m = DMatrix::<i64>::identity(2 * genus, 2 * genus);
    for &(pos, e) in &braid {
        m = transvection(&cycles[pos - 1], e) * m;
    }
    let braid_word = braid
        .iter()
        .map(|&(p, e)| if e > 0 { format!("s{p}") } else { format!("s{p}^-1") })
        .collect::<Vec<_>>()
        .join(" ");
    Ok(MonodromyResult {
        permutation,
        braid,
        braid_word,
        matrix: (0..2 * genus).map(|i| (0..2 * genus).map(|j| m[(i, j)]).collect()).collect(),
        events,
        min_distance,
        steps,
    })
}

/// Monodromy of a closed path.
pub fn monodromy_matrix(
    path: &ParameterPath,
    spins: &ClassicalSpinState,
    delta: f64,
) -> Result<MonodromyResult> {
    if !path.closed {
        return Err(Error::Config("monodromy needs a closed path".into()));
    }
    let res = sweep_and_detect(path, spins, delta)?;
    let m = res.matrix();
    if !is_symplectic(&m) || integer_determinant(&m) != 1 {
        return Err(Error::Tracking { param: 1.0, reason: "monodromy is not symplectic".into() });
    }
    Ok(res)
}

/// Double root of `Q` near `(g_guess, λ_guess)`: Newton on
/// `Q(λ; g) = ∂_λ Q(λ; g) = 0` in complex `(λ, g)`.
pub fn find_coalescence(
    spins: &ClassicalSpinState,
    epsilons: &[f64],
    g_guess: C64,
    lambda_guess: C64,
) -> Result<(C64, C64)> {
    let eval = |g: C64, lam: C64| -> Result<(C64, C64)> {
        let p = ParamPoint { g, ..ParamPoint::real(0.0, epsilons) };
        let q = spectral_polynomial(spins, &p)?;
        Ok(q.eval_with_derivative(lam))
    };
    let (mut g, mut lam) = (g_guess, lambda_guess);
    for _ in 0..100 {
        let (f1, f2) = eval(g, lam)?;
        if f1.norm() < 1e-14 && f2.norm() < 1e-14 {
            return Ok((g, lam));
        }
        let hl = 1e-7 * lam.norm().max(1.0);
        let hg = 1e-7 * g.norm().max(1.0);
        let (a1, a2) = eval(g, lam + hl)?;
        let (b1, b2) = eval(g + hg, lam)?;
        let j = [[(a1 - f1) / hl, (b1 - f1) / hg], [(a2 - f2) / hl, (b2 - f2) / hg]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.norm() == 0.0 {
            break;
        }
        let dl = (f1 * j[1][1] - f2 * j[0][1]) / det;
        let dg = (j[0][0] * f2 - j[1][0] * f1) / det;
        lam -= dl;
        g -= dg;
        if dl.norm() < 1e-15 * lam.norm().max(1.0) && dg.norm() < 1e-15 * g.norm().max(1.0) {
            return Ok((g, lam));
        }
    }
    Err(Error::NoConvergence("coalescence search".into()))
}

/// Period of the separation-variable motion for genus 1: the smallest
/// `T > 0` with `T·V = m + nB` for integers `m, n`.
pub fn oscillation_period(ctx: &AbelContext) -> Option<f64> {
    if ctx.genus() != 1 {
        return None;
    }
    let v = ctx.dubrovin_velocity()[0];
    let b = ctx.periods.b[(0, 0)];
    let mut best: Option<f64> = None;
    for n in -40i64..=40 {
        for m in -40i64..=40 {
            if m == 0 && n == 0 {
                continue;
            }
            let t = (m as f64 + b * n as f64) / v;
            if t.re > 0.0 && t.im.abs() < 1e-8 * t.re && best.is_none_or(|x| t.re < x) {
                best = Some(t.re);
            }
        }
    }
    best
}

fn oscillation_period_at(spins: &ClassicalSpinState, p: &ParamPoint) -> Result<Option<f64>> {
    if !p.is_real() || p.epsilons.len() != 2 {
        return Ok(None);
    }
    let q = spectral_polynomial(spins, p)?;
    let curve = HyperellipticCurve::from_polynomial(&q)?;
    let ctx = AbelContext::new(curve)?;
    Ok(oscillation_period(&ctx))
}

/// Fractional level data for `m ≥ 1`: `k = 2(1−8m)/(1+8m)`,
/// `c = 3k/(k+2)`, `q = exp(iπ/(k+2))` with the phase reduced mod 2 exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Levels {
    pub m: u64,
    pub k: Ratio<i64>,
    pub k_plus_2: Ratio<i64>,
    pub c: Ratio<i64>,
    /// Phase of `q` in units of π, in `[0, 2)`.
    pub q_phase: Ratio<i64>,
    pub q: C64,
}

pub fn admissible_levels(m: u64) -> Result<Levels> {
    if m == 0 || m > (i64::MAX as u64 - 1) / 16 {
        return Err(Error::Config(format!("level index m must be in 1..2^59, got {m}")));
    }
    let mi = m as i64;
    let k = Ratio::new(2 * (1 - 8 * mi), 1 + 8 * mi);
    let k_plus_2 = k + Ratio::from_integer(2);
    let c = Ratio::from_integer(3) * k / k_plus_2;
    let phase = k_plus_2.recip();
    let two = Ratio::from_integer(2);
    let q_phase = phase - two * (phase / two).floor();
    let angle = std::f64::consts::PI * (*q_phase.numer() as f64) / (*q_phase.denom() as f64);
    Ok(Levels { m, k, k_plus_2, c, q_phase, q: C64::from_polar(1.0, angle) })
}
