//! Grids, Fourier modes, Sobolev norms, Galerkin projection and the exact
//! linear propagator.
//!
//! ```bash
//! cargo run --release --example spectral_basics
//! ```

use num_complex::Complex64;
use snls::{Grid, SobolevIndex, SpectralField};

fn main() -> snls::Result<()> {
    // 1D torus, 256 collocation points, modes |k| <= 64.
    let grid = Grid::new(1, 64, 256)?;
    println!(
        "grid: d={} N={} n={} ({} retained modes)",
        grid.dim(),
        grid.points_per_dim(),
        grid.truncation(),
        grid.mode_count()
    );

    // Basis modes have ||e_k||_s = <k>^s exactly.
    let s = SobolevIndex(2.0);
    for k in [0i64, 1, 8, 64] {
        let e = SpectralField::basis_mode(&grid, &[k])?;
        println!(
            "||e_{k}||_2 = {:.6}  (<k>^2 = {:.6})",
            e.sobolev_norm(s),
            (1.0 + (k * k) as f64)
        );
    }

    // A two-mode field: norms, sup norm, projection.
    let u = SpectralField::from_modes(
        &grid,
        &[
            (vec![1], Complex64::new(1.0, 0.0)),
            (vec![40], Complex64::new(0.5, 0.5)),
        ],
    )?;
    println!("||u||_0 = {:.6}, ||u||_2 = {:.3}", u.sobolev_norm(SobolevIndex(0.0)), u.sobolev_norm(s));
    println!("discrete sup norm = {:.6}", u.sup_norm());
    let low = u.project(8)?;
    println!(
        "after projection to |k| <= 8: ||P u||_2 = {:.6} (mode 40 removed)",
        low.sobolev_norm(s)
    );

    // The linear flow rotates phases and preserves every Sobolev norm.
    let v = u.linear_propagate(1.37);
    println!(
        "propagated by t = 1.37: ||S(t) u||_2 - ||u||_2 = {:.2e}",
        v.sobolev_norm(s) - u.sobolev_norm(s)
    );
    println!(
        "mode-1 phase moved by e^{{i t}}: {:.6} + {:.6}i",
        v.coeff(&[1]).re,
        v.coeff(&[1]).im
    );
    Ok(())
}
