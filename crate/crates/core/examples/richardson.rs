//! Solve the Richardson equations for a picket-fence spectrum and check the
//! energy against exact diagonalization.
//!
//! cargo run --example richardson

use gaudin_forge::model::EnergySpectrum;
use gaudin_forge::richardson::{exact_diagonalize, ground_occupation, solve_richardson};

fn main() -> gaudin_forge::Result<()> {
    let eps: Vec<f64> = (0..6).map(|k| 0.5 * k as f64).collect();
    let exact = exact_diagonalize(&EnergySpectrum::new(eps.clone(), 1.2, 3)?)?;
    println!("{:>5}  {:>22}  {:>22}", "g", "Richardson", "nearest ED level");
    for g in [0.2, 0.6, 1.2] {
        let spec = EnergySpectrum::new(eps.clone(), g, 3)?;
        let sol = solve_richardson(&spec, &ground_occupation(&spec), 1e-12)?;
        let ed = exact_diagonalize(&spec)?;
        let e = sol.eigenvalue();
        let nearest = ed.eigenvalues.iter().copied().min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs())).unwrap();
        println!("{g:>5.2}  {e:>22.15}  {nearest:>22.15}");
        for (k, p) in sol.pair_energies.iter().enumerate() {
            println!("        e_{k} = {:+.12} {:+.12}i", p.re, p.im);
        }
    }
    println!("sector dimension at N = 3: {}", exact.eigenvalues.len());
    Ok(())
}
