//! Exponential p-mean decay under H5''-certified noise: simulate a small
//! ensemble, fit the decay rate of E||u(t)||_s^p, and check the
//! supermartingale property of e^{lambda t} E||u||_s^p.
//!
//! ```bash
//! cargo run --release --example decay_ensemble
//! ```

use num_complex::Complex64;
use snls::*;

fn main() -> snls::Result<()> {
    let grid = Grid::new(1, 64, 512)?;
    let params = EquationParams::new(2, Complex64::new(1.0, 0.0), 2.0, 1)?;
    let spec = NoiseSpec::new(8.0, 2.0, 0.0, 2.0)?;
    let p = 0.5;

    let k_hat = estimate_moser_constant(&params, &grid, 2000, 1)?;
    let cert = check_hypothesis(Hypothesis::H5DoublePrime, &spec, &params, k_hat, Some(p), 100.0)?;
    println!(
        "H5'' {:?}: margin B~ = {:.3}, guaranteed p-mean rate p B~ = {:.3}",
        cert.verdict,
        cert.margin,
        p * cert.margin
    );
    assert!(cert.is_certified());

    let u0 = config::build_initial(&grid, "single-mode", 1.0, Some(1), None)?;
    let scheme = SchemeConfig {
        scheme: SchemeId::SplitStepGeometric,
        dt: 1e-3,
        horizon: 5.0,
        blowup_threshold: 1e3 * u0.sobolev_norm(params.s),
        record_stride: 10,
    };
    let trajs: Vec<Trajectory> = (0..48)
        .map(|i| simulate_path(&u0, &scheme, &params, Some(&spec), PathRng::new(11, i)))
        .collect::<snls::Result<_>>()?;

    let est = EnsembleEstimate::from_trajectories(&trajs, p)?;
    let (rate, stderr) = fit_decay_rate(&est, (1.0, 5.0))?;
    println!("fitted decay rate on [1,5]: lambda_hat = {rate:.3} +- {stderr:.3}");

    let lambda = 0.5 * p * cert.margin;
    let test = supermartingale_decay_test(&est, lambda, p)?;
    println!(
        "supermartingale test at lambda = {lambda:.3}: {} (first violation: {:?})",
        test.verdict, test.first_violation_t
    );
    Ok(())
}
