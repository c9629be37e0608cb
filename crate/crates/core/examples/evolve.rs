//! Integrate the classical spin flow and report how well the conserved
//! quantities hold.
//!
//! cargo run --example evolve

use gaudin_forge::model::{gaudin_invariants, hamiltonian, integrate_spins, ClassicalSpinState, EnergySpectrum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gaudin_forge::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let state = ClassicalSpinState::random(&[0.5, 0.5, 1.0, 0.8], &mut rng)?;
    let spec = EnergySpectrum::new(vec![-0.4, 0.3, 1.1, 1.6], 0.7, 1)?;
    println!("H(0) = {:.15}", hamiltonian(&state, &spec)?);
    println!("r(0) = {:?}", gaudin_invariants(&state, &spec)?);
    let traj = integrate_spins(&state, &spec, 50.0, 1e-12)?;
    let last = traj.last();
    println!("steps accepted {}, rejected {}", traj.stats.accepted, traj.stats.rejected);
    println!("J3 {:.15} -> {:.15}", state.j3(), last.j3());
    println!("|J-| {:.6} -> {:.6}", state.j_minus().norm(), last.j_minus().norm());
    println!("worst relative drift {:.2e}", traj.drift.max());
    Ok(())
}
