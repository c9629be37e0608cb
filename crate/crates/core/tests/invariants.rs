//! Property tests for algebraic identities that must hold for every input.

use std::f64::consts::PI;

use gaudin_forge::braid::{
    admissible_levels, arc_cycles, integer_determinant, is_symplectic, symplectic_form, transvection,
};
use gaudin_forge::config::{parse_config, Task};
use gaudin_forge::model::{gaudin_invariants, integrate_spins, ClassicalSpinState, EnergySpectrum};
use gaudin_forge::pfaffian::{ground_state_amplitude, pfaffian, SkewMatrix};
use gaudin_forge::theta::ThetaContext;
use gaudin_forge::C64;
use nalgebra::DMatrix;
use num_rational::Ratio;
use proptest::prelude::*;

fn c64() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

/// Riemann matrix `X + iY` with `Y = LLᵀ + I/2`.
fn riemann_matrix(g: usize) -> impl Strategy<Value = DMatrix<C64>> {
    (prop::collection::vec(-0.5..0.5f64, g * g), prop::collection::vec(-0.6..0.6f64, g * g)).prop_map(
        move |(x, l)| {
            let l = DMatrix::from_row_slice(g, g, &l);
            let y = &l * l.transpose() + DMatrix::identity(g, g) * 0.5;
            DMatrix::from_fn(g, g, |i, j| {
                let (a, b) = (i.min(j), i.max(j));
                C64::new(x[a * g + b], y[(i, j)])
            })
        },
    )
}

fn skew(dim: usize) -> impl Strategy<Value = SkewMatrix> {
    prop::collection::vec(c64(), dim * dim)
        .prop_map(move |v| SkewMatrix::from_fn(dim, |i, j| v[i * dim + j]).unwrap())
}

fn distinct_points(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((0.3..2.0f64, 0.0..2.0 * PI), n)
        .prop_map(|v| v.into_iter().map(|(r, a)| C64::from_polar(r, a)).collect::<Vec<_>>())
        .prop_filter("points too close", |z| {
            (0..z.len()).all(|i| (0..i).all(|j| (z[i] - z[j]).norm() > 1e-2))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn theta_is_even_and_quasi_periodic(
        (b, z) in (1usize..=2).prop_flat_map(|g| (riemann_matrix(g), prop::collection::vec(c64(), g)))
    ) {
        let g = b.nrows();
        let th = ThetaContext::new(b.clone(), 1e-14).unwrap();
        let t0 = th.theta(&z);
        let neg: Vec<C64> = z.iter().map(|v| -v).collect();
        prop_assert!((th.theta(&neg) - t0).norm() <= 1e-10 * t0.norm().max(1.0));
        for k in 0..g {
            let mut shifted = z.clone();
            shifted[k] += 1.0;
            prop_assert!((th.theta(&shifted) - t0).norm() <= 1e-10 * t0.norm().max(1.0));
            let zb: Vec<C64> = (0..g).map(|i| z[i] + b[(i, k)]).collect();
            let expect = (-2.0 * PI * C64::i() * (z[k] + 0.5 * b[(k, k)])).exp() * t0;
            prop_assert!((th.theta(&zb) - expect).norm() <= 1e-9 * expect.norm().max(1e-12));
        }
    }

    #[test]
    fn reduction_stays_on_the_lattice_coset(
        (b, z) in (1usize..=3).prop_flat_map(|g| (riemann_matrix(g), prop::collection::vec(c64(), g)))
    ) {
        let th = ThetaContext::new(b, 1e-14).unwrap();
        let big: Vec<C64> = z.iter().map(|v| v * 7.3).collect();
        let red = th.reduce(&big);
        let diff: Vec<C64> = big.iter().zip(&red.z).map(|(a, b)| a - b).collect();
        prop_assert!(th.lattice_residual(&diff) < 1e-9);
        for v in &red.z {
            prop_assert!(v.re.abs() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn pfaffian_squares_to_determinant(a in (1usize..=4).prop_flat_map(|h| skew(2 * h))) {
        let pf = pfaffian(&a);
        let det = a.to_dense().determinant();
        prop_assert!((pf * pf - det).norm() <= 1e-10 * det.norm().max(1.0));
    }

    #[test]
    fn pfaffian_is_homogeneous_and_alternating(a in skew(6), c in c64()) {
        let pf = pfaffian(&a);
        let scaled = pfaffian(&a.scale(c));
        prop_assert!((scaled - c.powi(3) * pf).norm() <= 1e-10 * pf.norm().max(1.0));
        // simultaneous swap of rows and columns 0 and 1 flips the sign
        let swapped = SkewMatrix::from_fn(6, |i, j| {
            let p = |k: usize| match k { 0 => 1, 1 => 0, k => k };
            a.get(p(i), p(j))
        })
        .unwrap();
        prop_assert!((pfaffian(&swapped) + pf).norm() <= 1e-10 * pf.norm().max(1.0));
    }

    #[test]
    fn ground_amplitude_is_antisymmetric(z in distinct_points(6), i in 0usize..6, j in 0usize..6) {
        prop_assume!(i != j);
        let a = ground_state_amplitude(&z).unwrap().value();
        let mut w = z.clone();
        w.swap(i, j);
        let b = ground_state_amplitude(&w).unwrap().value();
        prop_assert!((a + b).norm() <= 1e-9 * a.norm().max(1e-300));
    }

    #[test]
    fn transvection_products_are_symplectic(word in prop::collection::vec((0usize..5, prop::bool::ANY), 0..12)) {
        let g = 2;
        let cycles = arc_cycles(g);
        let mut m = DMatrix::<i64>::identity(2 * g, 2 * g);
        for (k, inverse) in word {
            m = transvection(&cycles[k], if inverse { -1 } else { 1 }) * m;
        }
        prop_assert!(is_symplectic(&m));
        prop_assert_eq!(integer_determinant(&m), 1);
        let j = symplectic_form(g);
        prop_assert_eq!(m.transpose() * &j * &m, j);
    }

    #[test]
    fn level_data_is_consistent(m in 1u64..1_000_000_000) {
        let lv = admissible_levels(m).unwrap();
        let two = Ratio::from_integer(2);
        prop_assert_eq!(lv.k + two, lv.k_plus_2);
        prop_assert_eq!(lv.c * lv.k_plus_2, lv.k * 3);
        prop_assert!(lv.q_phase >= Ratio::from_integer(0) && lv.q_phase < two);
        let mut phase = lv.k_plus_2.recip() % two;
        if phase < Ratio::from_integer(0) {
            phase += two;
        }
        prop_assert_eq!(lv.q_phase, phase);
        let phase = PI * *lv.q_phase.numer() as f64 / *lv.q_phase.denom() as f64;
        prop_assert!((lv.q - C64::from_polar(1.0, phase)).norm() < 1e-12);
    }

    #[test]
    fn gaudin_invariants_sum_to_total_projection(
        spins in prop::collection::vec((0.2..1.0f64, -1.0..1.0f64, 0.0..2.0 * PI), 2..6),
        g in 0.1..1.5f64,
    ) {
        let n = spins.len();
        let s: Vec<[f64; 3]> = spins
            .iter()
            .map(|&(r, c, phi)| {
                let st = (1.0 - c * c).sqrt();
                [r * st * phi.cos(), r * st * phi.sin(), r * c]
            })
            .collect();
        let state = ClassicalSpinState::new(s).unwrap();
        let eps: Vec<f64> = (0..n).map(|k| k as f64 * 0.7 - 0.3).collect();
        let spec = EnergySpectrum::new(eps, g, 1).unwrap();
        let r = gaudin_invariants(&state, &spec).unwrap();
        prop_assert!((r.iter().sum::<f64>() - state.j3()).abs() < 1e-12);
    }

    #[test]
    fn config_values_round_trip(
        eps in prop::collection::btree_set(-50i32..50, 2..6),
        g in 0.05..3.0f64,
        seed in 0..=i64::MAX as u64,
    ) {
        let eps: Vec<f64> = eps.into_iter().map(|k| k as f64 * 0.1).collect();
        let text = format!(
            "task = \"richardson\"\nseed = {seed}\n[spectrum]\nepsilons = {eps:?}\ng = {g:?}\npairs = 1\n"
        );
        let cfg = parse_config(&text).unwrap();
        prop_assert_eq!(cfg.task, Task::Richardson);
        prop_assert_eq!(cfg.seed, Some(seed));
        let spec = cfg.spectrum.unwrap();
        prop_assert_eq!(spec.epsilons, eps);
        prop_assert_eq!(spec.g, g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn classical_flow_conserves_invariants(seed in any::<u64>(), n in 2usize..5) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let radii: Vec<f64> = (0..n).map(|k| 0.5 + 0.1 * k as f64).collect();
        let state = ClassicalSpinState::random(&radii, &mut rng).unwrap();
        let eps: Vec<f64> = (0..n).map(|k| k as f64 * 0.5).collect();
        let spec = EnergySpectrum::new(eps, 0.8, 1).unwrap();
        let traj = integrate_spins(&state, &spec, 5.0, 1e-12).unwrap();
        prop_assert!(traj.drift.max() < 1e-8, "drift {}", traj.drift.max());
    }
}
