//! Integrate the separation variables directly with the Dubrovin equations
//! and rebuild `J⁻(t)` from them.
//!
//! cargo run --release --example dubrovin

use gaudin_forge::curve::{build_curve, separation_roots, RootChoice};
use gaudin_forge::dubrovin::integrate_dubrovin;
use gaudin_forge::model::{integrate_spins_sampled, ClassicalSpinState, EnergySpectrum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gaudin_forge::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let state = ClassicalSpinState::random(&[0.6, 0.9, 0.5], &mut rng)?;
    let spec = EnergySpectrum::new(vec![-0.7, -0.1, 1.3], 0.75, 1)?;
    let curve = build_curve(&state, &spec)?;
    let roots = separation_roots(&state, &spec, &curve, RootChoice::B)?;
    let times: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
    let dub = integrate_dubrovin(&roots.points, &curve, &spec, &state, &times, 1e-12)?;
    let spins = integrate_spins_sampled(&state, &spec, &times, 1e-12)?;
    println!("branch passages {}, closest approach to a branch point {:.2e}", dub.branch_passages, dub.min_branch_distance);
    println!("{:>5}  {:>26}  {:>10}", "t", "J- (Dubrovin)", "|error|");
    for (k, &t) in times.iter().enumerate() {
        let j = dub.jminus[k];
        let err = (j - spins.states[k].j_minus()).norm();
        println!("{t:>5.1}  {:>12.9} {:>+12.9}i  {err:>10.2e}", j.re, j.im);
    }
    Ok(())
}
