//! Build the spectral curve of a classical state: branch points, cuts,
//! period matrix and the separation variables.
//!
//! cargo run --example curve

use gaudin_forge::abel::AbelContext;
use gaudin_forge::curve::{build_curve, separation_roots, RootChoice};
use gaudin_forge::model::{ClassicalSpinState, EnergySpectrum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gaudin_forge::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let state = ClassicalSpinState::random(&[0.5, 0.6, 0.7], &mut rng)?;
    let spec = EnergySpectrum::new(vec![0.0, 0.9, 2.1], 0.8, 1)?;
    let curve = build_curve(&state, &spec)?;
    println!("genus {}", curve.genus);
    for (k, cut) in curve.cuts.iter().enumerate() {
        println!("cut {k}: {:.9} .. {:.9}", cut.lower, cut.upper);
    }
    let ctx = AbelContext::new(curve.clone())?;
    println!("period matrix B:\n{:.9}", ctx.periods.b);
    println!("B symmetry defect {:.1e}, min eig Im B {:.4}", ctx.periods.symmetry_defect(), ctx.periods.min_imag_eigenvalue());
    let roots = separation_roots(&state, &spec, &curve, RootChoice::B)?;
    for p in &roots.points {
        println!("u = {:.12} on sheet {:+}", p.lambda, p.sheet);
    }
    Ok(())
}
