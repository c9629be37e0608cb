//! Linear flow on the Jacobian: invert the Abel map along `z(t) = z0 + tV`
//! and compare the divisor with the roots of `B(λ)` from the spin flow.
//!
//! cargo run --release --example theta_flow

use gaudin_forge::abel::{calibrate_velocity, AbelContext, FlowMode};
use gaudin_forge::curve::{build_curve, separation_roots, RootChoice};
use gaudin_forge::dubrovin::track_spin_roots;
use gaudin_forge::model::{integrate_spins_sampled, ClassicalSpinState, EnergySpectrum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gaudin_forge::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let state = ClassicalSpinState::random(&[0.5, 0.6, 0.7], &mut rng)?;
    let spec = EnergySpectrum::new(vec![0.0, 0.9, 2.1], 0.8, 1)?;
    let curve = build_curve(&state, &spec)?;
    let ctx = AbelContext::new(curve.clone())?;
    let roots = separation_roots(&state, &spec, &curve, RootChoice::B)?;
    let z0 = ctx.divisor_image(&roots.points)?;
    let v = calibrate_velocity(&ctx, &roots.points, &spec, &state, 1e-2, 1e-13)?;
    for (i, vi) in v.iter().enumerate() {
        println!("V[{i}] = {vi:.9}");
    }

    let times: Vec<f64> = (0..=10).map(|k| 0.5 * k as f64).collect();
    let spins = integrate_spins_sampled(&state, &spec, &times, 1e-12)?;
    let direct = track_spin_roots(&spins.states, &spec)?;
    println!("{:>5}  {:>12}  {:>10}", "t", "max |du|", "residual");
    for (k, &t) in times.iter().enumerate() {
        let inv = ctx.invert_divisor(&ctx.flow(&z0, t, FlowMode::Calibrated, &v))?;
        let worst = direct[k]
            .iter()
            .map(|u| inv.points.iter().map(|p| (p.lambda - u).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        println!("{t:>5.1}  {worst:>12.3e}  {:>10.1e}", inv.residual);
    }
    Ok(())
}
