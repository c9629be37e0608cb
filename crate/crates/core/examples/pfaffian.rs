//! Pfaffian ground-state and two-hole amplitudes for particles on a ring.
//!
//! cargo run --example pfaffian

use std::f64::consts::PI;

use gaudin_forge::pfaffian::{ground_state_amplitude, two_hole_amplitude};
use gaudin_forge::C64;

fn main() -> gaudin_forge::Result<()> {
    let z: Vec<C64> = (0..12).map(|k| C64::from_polar(1.0 + 0.05 * k as f64, 2.0 * PI * k as f64 / 12.0)).collect();
    let psi = ground_state_amplitude(&z)?;
    println!("ground state: ln|psi| = {:.12}, arg = {:.12}", psi.ln_abs, psi.arg);

    let mut swapped = z.clone();
    swapped.swap(0, 5);
    let psi_s = ground_state_amplitude(&swapped)?;
    println!("after swapping two particles: arg shift / pi = {:.12}", (psi_s.arg - psi.arg) / PI);

    let z1 = C64::new(0.3, 0.2);
    for z2 in [C64::new(-0.4, 0.1), C64::new(0.3, 0.25), z1] {
        let amp = two_hole_amplitude(z1, z2, &z)?;
        println!("holes at {z1:.2}, {z2:.2}: |psi| = {:.6e}", amp.value().norm());
    }
    Ok(())
}
