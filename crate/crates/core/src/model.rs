//! Pairing-model data types, the classical Hamiltonian, Gaudin invariants and
//! the classical spin flow.
//!
//! Classical spins use the Pauli normalization `S = 2t` implied by the bracket
//! `{S^α, S^β} = 2ε_{αβγ} S^γ`. With that normalization the classical
//! Hamiltonian is `H = Σ 2ε_l S³_l − (g/2) J⁺J⁻` (twice the pseudo-spin
//! Hamiltonian evaluated at `t = S/2`) and the Gaudin invariants are
//! `R_l = S³_l − (g/2) Σ_{l'≠l} S_l·S_{l'} / (ε_l − ε_{l'})`.
//! The flow is `dS_i/dt = 2 S_i × B_i`, `B_i = (−(g/2)J¹, −(g/2)J², ε_i)`, so
//! that a single spin obeys `i dJ⁻/dt = J⁻ (g J³ + 2ε₁)` with
//! `S⁻ = S¹ + iS²`.

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{Dopri5, OdeOptions, OdeStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySpectrum {
    epsilons: Vec<f64>,
    g: f64,
    pairs: usize,
}

impl EnergySpectrum {
    pub fn new(epsilons: Vec<f64>, g: f64, pairs: usize) -> Result<Self> {
        if epsilons.is_empty() {
            return Err(Error::InvalidSpectrum("need at least one level".into()));
        }
        if epsilons.iter().any(|e| !e.is_finite()) || !g.is_finite() {
            return Err(Error::InvalidSpectrum("non-finite input".into()));
        }
        if let Some(w) = epsilons.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpectrum(format!(
                "epsilons must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if g == 0.0 {
            return Err(Error::InvalidSpectrum("coupling g must be nonzero".into()));
        }
        if pairs > epsilons.len() {
            return Err(Error::InvalidSpectrum(format!(
                "pair count {pairs} exceeds level count {}",
                epsilons.len()
            )));
        }
        Ok(Self { epsilons, g, pairs })
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn n(&self) -> usize {
        self.epsilons.len()
    }
    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn with_coupling(&self, g: f64) -> Result<Self> {
        Self::new(self.epsilons.clone(), g, self.pairs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSpinState {
    spins: Vec<[f64; 3]>,
    radii: Vec<f64>,
}

impl ClassicalSpinState {
    pub fn new(spins: Vec<[f64; 3]>) -> Result<Self> {
        let radii: Vec<f64> = spins.iter().map(norm3).collect();
        if let Some(i) = radii.iter().position(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidState(format!("spin {i} has zero or non-finite radius")));
        }
        Ok(Self { spins, radii })
    }

    /// Uniformly random directions with the given radii.
    pub fn random<R: Rng + ?Sized>(radii: &[f64], rng: &mut R) -> Result<Self> {
        let spins = radii
            .iter()
            .map(|&r| {
                let z: f64 = rng.gen_range(-1.0..1.0);
                let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let rho = (1.0 - z * z).sqrt();
                [r * rho * phi.cos(), r * rho * phi.sin(), r * z]
            })
            .collect();
        Self::new(spins)
    }

    pub(crate) fn from_flat(flat: &[f64], radii: &[f64]) -> Self {
        let spins = flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self { spins, radii: radii.to_vec() }
    }

    pub(crate) fn flat(&self) -> Vec<f64> {
        self.spins.iter().flat_map(|s| s.iter().copied()).collect()
    }

    pub fn spins(&self) -> &[[f64; 3]] {
        &self.spins
    }
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
    pub fn n(&self) -> usize {
        self.spins.len()
    }

    /// `S⁻_i = S¹_i + i S²_i`.
    pub fn s_minus(&self, i: usize) -> C64 {
        C64::new(self.spins[i][0], self.spins[i][1])
    }
    /// `S⁺_i = S¹_i − i S²_i`.
    pub fn s_plus(&self, i: usize) -> C64 {
        self.s_minus(i).conj()
    }
    pub fn j3(&self) -> f64 {
        self.spins.iter().map(|s| s[2]).sum()
    }
    pub fn j_minus(&self) -> C64 {
        (0..self.n()).map(|i| self.s_minus(i)).sum()
    }
    pub fn total(&self) -> [f64; 3] {
        self.spins.iter().fold([0.0; 3], |a, s| [a[0] + s[0], a[1] + s[1], a[2] + s[2]])
    }
}

fn norm3(s: &[f64; 3]) -> f64 {
    (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt()
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn check_dim(state: &ClassicalSpinState, spec: &EnergySpectrum) -> Result<()> {
    if state.n() != spec.n() {
        return Err(Error::DimensionMismatch { expected: spec.n(), got: state.n() });
    }
    Ok(())
}

pub fn hamiltonian(state: &ClassicalSpinState, spec: &EnergySpectrum) -> Result<f64> {
    check_dim(state, spec)?;
    let zeeman: f64 = state
        .spins
        .iter()
        .zip(spec.epsilons())
        .map(|(s, e)| 2.0 * e * s[2])
        .sum();
    Ok(zeeman - 0.5 * spec.g() * state.j_minus().norm_sqr())
}

pub fn gaudin_invariants(state: &ClassicalSpinState, spec: &EnergySpectrum) -> Result<Vec<f64>> {
    check_dim(state, spec)?;
    Ok(gaudin_values(spec.epsilons(), &state.spins, spec.g()))
}

fn gaudin_values(eps: &[f64], spins: &[[f64; 3]], g: f64) -> Vec<f64> {
    (0..spins.len())
        .map(|l| {
            let coupling: f64 = (0..spins.len())
                .filter(|&m| m != l)
                .map(|m| dot3(&spins[l], &spins[m]) / (eps[l] - eps[m]))
                .sum();
            spins[l][2] - 0.5 * g * coupling
        })
        .collect()
}

fn rhs_flat(flat: &[f64], eps: &[f64], g: f64, out: &mut [f64]) {
    let (mut jx, mut jy) = (0.0, 0.0);
    for s in flat.chunks_exact(3) {
        jx += s[0];
        jy += s[1];
    }
    let (bx, by) = (-0.5 * g * jx, -0.5 * g * jy);
    for ((s, d), &e) in flat.chunks_exact(3).zip(out.chunks_exact_mut(3)).zip(eps) {
        // 2 S × B
        d[0] = 2.0 * (s[1] * e - s[2] * by);
        d[1] = 2.0 * (s[2] * bx - s[0] * e);
        d[2] = 2.0 * (s[0] * by - s[1] * bx);
    }
}

pub fn spin_time_derivative(
    state: &ClassicalSpinState,
    spec: &EnergySpectrum,
) -> Result<Vec<[f64; 3]>> {
    check_dim(state, spec)?;
    let flat = state.flat();
    let mut out = vec![0.0; flat.len()];
    rhs_flat(&flat, spec.epsilons(), spec.g(), &mut out);
    Ok(out.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
}

/// Maximum absolute deviation of each conserved quantity from its initial
/// value over a trajectory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub hamiltonian: f64,
    pub j3: f64,
    pub gaudin: Vec<f64>,
    pub radii: Vec<f64>,
}

impl DriftReport {
    pub fn max(&self) -> f64 {
        self.gaudin
            .iter()
            .chain(&self.radii)
            .copied()
            .fold(self.hamiltonian.max(self.j3), f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ClassicalSpinState>,
    pub stats: OdeStats,
    pub drift: DriftReport,
}

impl Trajectory {
    pub fn last(&self) -> &ClassicalSpinState {
        self.states.last().expect("trajectory is never empty")
    }
}

fn audit(states: &[ClassicalSpinState], spec: &EnergySpectrum) -> Result<DriftReport> {
    let s0 = &states[0];
    let h0 = hamiltonian(s0, spec)?;
    let j0 = s0.j3();
    let r0 = gaudin_invariants(s0, spec)?;
    let mut rep = DriftReport {
        hamiltonian: 0.0,
        j3: 0.0,
        gaudin: vec![0.0; spec.n()],
        radii: vec![0.0; spec.n()],
    };
    for s in states {
        rep.hamiltonian = rep.hamiltonian.max((hamiltonian(s, spec)? - h0).abs());
        rep.j3 = rep.j3.max((s.j3() - j0).abs());
        for (d, (r, r_0)) in rep.gaudin.iter_mut().zip(gaudin_invariants(s, spec)?.iter().zip(&r0)) {
            *d = d.max((r - r_0).abs());
        }
        for (i, d) in rep.radii.iter_mut().enumerate() {
            *d = d.max((norm3(&s.spins[i]) - s0.radii[i]).abs());
        }
    }
    Ok(rep)
}

fn validate_run(t_end: f64, tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidState(format!("tolerance must be positive, got {tol}")));
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidState(format!("t_end must be positive, got {t_end}")));
    }
    Ok(())
}

/// Integrate the spin flow to `t_end`, recording every accepted step.
pub fn integrate_spins(
    state0: &ClassicalSpinState,
    spec: &EnergySpectrum,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory> {
    check_dim(state0, spec)?;
    validate_run(t_end, tol)?;
    let eps = spec.epsilons().to_vec();
    let g = spec.g();
    let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| rhs_flat(y, &eps, g, dy);
    let mut stepper = Dopri5::new(OdeOptions::with_tol(tol));
    let mut y = state0.flat();
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![state0.clone()];
    let radii = state0.radii.clone();
    stepper.advance(&mut f, &mut t, &mut y, t_end, |t, y| {
        times.push(t);
        states.push(ClassicalSpinState::from_flat(y, &radii));
        Ok(false)
    })?;
    let drift = audit(&states, spec)?;
    Ok(Trajectory { times, states, stats: stepper.stats, drift })
}

/// Integrate the spin flow and report the state at the requested (increasing,
/// non-negative) sample times.
pub fn integrate_spins_sampled(
    state0: &ClassicalSpinState,
    spec: &EnergySpectrum,
    samples: &[f64],
    tol: f64,
) -> Result<Trajectory> {
    check_dim(state0, spec)?;
    validate_run(samples.last().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE), tol)?;
    if samples.windows(2).any(|w| w[1] <= w[0]) || samples.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidState("sample times must be increasing and >= 0".into()));
    }
    let eps = spec.epsilons().to_vec();
    let g = spec.g();
    let f = |_t: f64, y: &[f64], dy: &mut [f64]| rhs_flat(y, &eps, g, dy);
    let (ys, stats) =
        crate::ode::integrate_samples(f, 0.0, &state0.flat(), samples, OdeOptions::with_tol(tol))?;
    let states: Vec<_> =
        ys.iter().map(|y| ClassicalSpinState::from_flat(y, &state0.radii)).collect();
    let drift = audit(&states, spec)?;
    Ok(Trajectory { times: samples.to_vec(), states, stats, drift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(eps: &[f64], g: f64) -> EnergySpectrum {
        EnergySpectrum::new(eps.to_vec(), g, 1).unwrap()
    }

    #[test]
    fn spectrum_validation() {
        assert!(EnergySpectrum::new(vec![1.0, 1.0], 0.5, 1).is_err());
        assert!(EnergySpectrum::new(vec![1.0, 2.0], 0.0, 1).is_err());
        assert!(EnergySpectrum::new(vec![1.0, 2.0], 0.5, 3).is_err());
        assert!(EnergySpectrum::new(vec![], 0.5, 0).is_err());
    }

    #[test]
    fn zero_radius_rejected() {
        assert!(ClassicalSpinState::new(vec![[0.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn polar_single_spin_energy() {
        let s = ClassicalSpinState::new(vec![[0.0, 0.0, 0.7]]).unwrap();
        let h = hamiltonian(&s, &spec(&[1.3], 0.4)).unwrap();
        assert!((h - 2.0 * 1.3 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn antiparallel_pair_energy_vanishes() {
        let s = ClassicalSpinState::new(vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(hamiltonian(&s, &spec(&[0.2, 0.9], 0.8)).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let s = ClassicalSpinState::new(vec![[1.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(
            hamiltonian(&s, &spec(&[0.0, 1.0], 1.0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gaudin_sum_and_zero_coupling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = ClassicalSpinState::random(&[1.0, 0.5, 0.8, 1.2], &mut rng).unwrap();
        let sp = spec(&[-1.0, 0.1, 0.4, 2.0], 0.9);
        let r = gaudin_invariants(&s, &sp).unwrap();
        assert!((r.iter().sum::<f64>() - s.j3()).abs() < 1e-12);
        let r0 = gaudin_invariants(&s, &sp.with_coupling(1e-300).unwrap()).unwrap();
        for (a, sp) in r0.iter().zip(s.spins()) {
            assert!((a - sp[2]).abs() < 1e-15);
        }
    }

    #[test]
    fn gaudin_permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = ClassicalSpinState::random(&[1.0, 0.5, 0.8, 1.1], &mut rng).unwrap();
        let eps = [-0.2, 0.3, 1.1, 1.4];
        let r = gaudin_values(&eps, s.spins(), 0.7);
        let order = [2usize, 0, 3, 1];
        let eps_p: Vec<f64> = order.iter().map(|&i| eps[i]).collect();
        let spins_p: Vec<[f64; 3]> = order.iter().map(|&i| s.spins()[i]).collect();
        let r_p = gaudin_values(&eps_p, &spins_p, 0.7);
        for (k, &i) in order.iter().enumerate() {
            assert!((r_p[k] - r[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn polar_spin_is_fixed_point() {
        let s = ClassicalSpinState::new(vec![[0.0, 0.0, 0.5]]).unwrap();
        let d = spin_time_derivative(&s, &spec(&[0.7], 1.1)).unwrap();
        assert_eq!(d[0], [0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_spin_j_minus_law() {
        let (s_val, eps, g) = (0.8, 0.65, 1.7);
        let s = ClassicalSpinState::new(vec![[s_val, 0.0, 0.0]]).unwrap();
        let d = spin_time_derivative(&s, &spec(&[eps], g)).unwrap();
        let ds_minus = C64::new(d[0][0], d[0][1]);
        let expect = -C64::i() * s.s_minus(0) * (2.0 * eps);
        assert!((ds_minus - expect).norm() < 1e-14);
        // general tilt: i dS⁻/dt = S⁻ (g S³ + 2ε)
        let s = ClassicalSpinState::new(vec![[0.3, -0.4, 0.5]]).unwrap();
        let d = spin_time_derivative(&s, &spec(&[eps], g)).unwrap();
        let lhs = C64::i() * C64::new(d[0][0], d[0][1]);
        let rhs = s.s_minus(0) * (g * 0.5 + 2.0 * eps);
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn single_spin_precession_analytic() {
        let (s_val, eps) = (0.9, 0.37);
        let s = ClassicalSpinState::new(vec![[s_val, 0.0, 0.0]]).unwrap();
        let times: Vec<f64> = (1..=50).map(|k| k as f64).collect();
        let tr = integrate_spins_sampled(&s, &spec(&[eps], 0.6), &times, 1e-11).unwrap();
        for (t, st) in tr.times.iter().zip(&tr.states) {
            let expect = C64::from_polar(s_val, -2.0 * eps * t);
            assert!((st.s_minus(0) - expect).norm() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn flow_is_s_cross_grad_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = ClassicalSpinState::random(&[1.0, 0.6, 0.9], &mut rng).unwrap();
        let sp = spec(&[-0.5, 0.2, 1.0], 0.8);
        let d = spin_time_derivative(&s, &sp).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut grad = [0.0; 3];
            for a in 0..3 {
                let mut sp_ = s.spins().to_vec();
                let mut sm_ = s.spins().to_vec();
                sp_[i][a] += h;
                sm_[i][a] -= h;
                let hp = hamiltonian(&ClassicalSpinState::new(sp_).unwrap(), &sp).unwrap();
                let hm = hamiltonian(&ClassicalSpinState::new(sm_).unwrap(), &sp).unwrap();
                grad[a] = (hp - hm) / (2.0 * h);
            }
            let si = s.spins()[i];
            let cross = [
                si[1] * grad[2] - si[2] * grad[1],
                si[2] * grad[0] - si[0] * grad[2],
                si[0] * grad[1] - si[1] * grad[0],
            ];
            for a in 0..3 {
                assert!((cross[a] - d[i][a]).abs() < 1e-8);
            }
            assert!(dot3(&si, &d[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn invariants_constant_along_flow_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = ClassicalSpinState::random(&[1.0, 0.7, 1.3], &mut rng).unwrap();
        let sp = spec(&[-0.8, 0.1, 0.9], 1.2);
        let d = spin_time_derivative(&s, &sp).unwrap();
        let h = 1e-5;
        let shift = |sign: f64| {
            ClassicalSpinState::new(
                s.spins()
                    .iter()
                    .zip(&d)
                    .map(|(a, b)| [a[0] + sign * h * b[0], a[1] + sign * h * b[1], a[2] + sign * h * b[2]])
                    .collect(),
            )
            .unwrap()
        };
        let rp = gaudin_invariants(&shift(1.0), &sp).unwrap();
        let rm = gaudin_invariants(&shift(-1.0), &sp).unwrap();
        for (a, b) in rp.iter().zip(&rm) {
            assert!(((a - b) / (2.0 * h)).abs() < 1e-9);
        }
    }
}
