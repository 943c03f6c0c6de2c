//! Estimate the empirical nonlinearity constant and certify the noise
//! drift conditions H5 (global existence), H5' (invariant measure) and
//! H5'' (exponential decay) for a few parameter choices.
//!
//! ```bash
//! cargo run --release --example check_hypothesis
//! ```

use num_complex::Complex64;
use snls::*;

fn main() -> snls::Result<()> {
    let grid = Grid::new(1, 64, 256)?;
    let params = EquationParams::new(1, Complex64::new(1.0, 0.0), 2.0, 1)?;
    let k_hat = estimate_moser_constant(&params, &grid, 2000, 1)?;
    println!("empirical constant K_hat = {k_hat:.4} (budget 2000, safety factor 1.5)\n");

    // The closed-form threshold for b = d = sigma is
    // (1-p) a^2 > 2 |alpha| K + c^2.
    let p = 0.5;
    for (a, c) in [(4.0, 0.5), (3.3, 0.0), (3.0, 0.0), (4.0, 3.0)] {
        let spec = NoiseSpec::new(a, 1.0, c, 1.0)?;
        println!("noise a={a}, b=1, c={c}, d=1:");
        for id in [Hypothesis::H5, Hypothesis::H5Prime, Hypothesis::H5DoublePrime] {
            let p_arg = (id != Hypothesis::H5).then_some(p);
            let report = check_hypothesis(id, &spec, &params, k_hat, p_arg, 100.0)?;
            println!(
                "  {:5} -> {:?} (margin {:+.4}, worst x = {:.3})",
                id.to_string(),
                report.verdict,
                report.margin,
                report.worst_x
            );
        }
    }

    // Full report as emitted on the JSON interface.
    let spec = NoiseSpec::new(4.0, 1.0, 0.5, 1.0)?;
    let report = check_hypothesis(Hypothesis::H5DoublePrime, &spec, &params, k_hat, Some(p), 100.0)?;
    println!("\nJSON form:\n{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
