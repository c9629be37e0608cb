//! Loop the coupling around a planted branch-point collision and read off
//! the braid word and the integer monodromy on the curve's homology.
//!
//! cargo run --release --example monodromy

use gaudin_forge::braid::{find_coalescence, monodromy_matrix, ParameterPath};
use gaudin_forge::model::ClassicalSpinState;
use gaudin_forge::C64;

fn main() -> gaudin_forge::Result<()> {
    // planar spins make a(u) and b(u) vanish together at a real coupling
    let spins = ClassicalSpinState::new(vec![[1.0, 0.0, 0.3], [0.8, 0.0, -0.2]])?;
    let eps = [0.0, 1.0];
    let (g_star, lam) = find_coalescence(&spins, &eps, C64::new(2.0, 0.0), C64::new(0.55, 0.0))?;
    println!("collision at g = {g_star:.9}, lambda = {lam:.9}");

    for (label, centre, radius) in [("around", g_star, 0.3), ("away", C64::new(0.5, 0.0), 0.1)] {
        let path = ParameterPath::coupling_circle(centre, radius, 0.0, &eps, 64, 1)?;
        let res = monodromy_matrix(&path, &spins, 1e-3)?;
        println!("{label}: braid '{}', {} events", res.braid_word, res.events.len());
        println!("{}", res.matrix());
    }
    Ok(())
}
