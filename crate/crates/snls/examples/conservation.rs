//! Mass and energy conservation of the deterministic defocusing cubic
//! equation under the Strang splitting integrator, with the order-2
//! scaling of the energy drift.
//!
//! ```bash
//! cargo run --release --example conservation
//! ```

use num_complex::Complex64;
use snls::*;

fn main() -> snls::Result<()> {
    let grid = Grid::new(1, 64, 256)?;
    let params = EquationParams::new(1, Complex64::new(-1.0, 0.0), 2.0, 1)?;
    let u0 = config::build_initial(&grid, "modulated-cosine", 1.0, None, None)?;

    let run = |dt: f64| -> snls::Result<(f64, f64)> {
        let scheme = SchemeConfig {
            scheme: SchemeId::StrangSplitDeterministic,
            dt,
            horizon: 1.0,
            blowup_threshold: 1e6,
            record_stride: 10,
        };
        let traj = simulate_path(&u0, &scheme, &params, None, PathRng::new(0, 0))?;
        let m0 = traj.mass[0];
        let e = traj.energy.as_ref().expect("real alpha records energy");
        let e0 = e[0];
        let mass_drift = traj.mass.iter().map(|m| (m - m0).abs() / m0).fold(0.0, f64::max);
        let energy_drift = e.iter().map(|x| (x - e0).abs() / e0.abs()).fold(0.0, f64::max);
        Ok((mass_drift, energy_drift))
    };

    for dt in [2e-3, 1e-3, 5e-4] {
        let (mass, energy) = run(dt)?;
        println!("dt = {dt:.0e}: relative mass drift {mass:.2e}, energy drift {energy:.2e}");
    }
    println!("halving dt divides the energy drift by ~4 (second order); mass is conserved to roundoff");
    Ok(())
}
