//! Exact fractional level data for the admissible sequence.
//!
//! cargo run --example levels

use gaudin_forge::braid::admissible_levels;

fn main() -> gaudin_forge::Result<()> {
    println!("{:>8} {:>14} {:>12} {:>14} {:>8}", "m", "k", "k+2", "c", "arg q/pi");
    for m in [1, 2, 3, 5, 10, 100, 1_000_000] {
        let lv = admissible_levels(m)?;
        println!("{m:>8} {:>14} {:>12} {:>14} {:>8}", lv.k, lv.k_plus_2, lv.c, lv.q_phase);
    }
    Ok(())
}
