//! Empirical estimation of the constant `K` in
//! `||F(u)||_s <= K ||u||_inf^{2 sigma} ||u||_s`.
//!
//! No closed form for `K` is available; the estimator maximizes the observed
//! ratio over a randomized sample of fields with mixed smooth/rough spectra
//! and applies a 1.5 safety factor. The result is an empirical lower bound
//! on the true constant, scaled for safety, and every hypothesis verdict
//! downstream inherits this provenance.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use super::{nonlinearity, EquationParams};
use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

/// Safety factor applied to the maximal observed ratio.
pub const MOSER_SAFETY_FACTOR: f64 = 1.5;

/// Deterministic sampler of random fields with varied spectral profiles:
/// smooth (exponential decay), rough (power-law decay), and flat spectra,
/// with log-uniform amplitude scales.
pub struct FieldSampler {
    grid: Grid,
    rng: ChaCha12Rng,
}

impl FieldSampler {
    pub fn new(grid: &Grid, seed: u64) -> FieldSampler {
        FieldSampler {
            grid: grid.clone(),
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(&mut self) -> SpectralField {
        let profile = self.rng.gen_range(0u8..3);
        let rate = match profile {
            0 => self.rng.gen_range(0.2..2.0),  // smooth: exp(-rate |k|)
            1 => self.rng.gen_range(0.3..2.0),  // rough: (1 + |k|)^{-rate}
            _ => 0.0,                           // flat
        };
        let amplitude = 10f64.powf(self.rng.gen_range(-2.0..2.0));
        let mut field = SpectralField::zero(&self.grid);
        let retained: Vec<u32> = self.grid.retained_indices().to_vec();
        let ksq = self.grid.ksq();
        for idx in retained {
            let i = idx as usize;
            let k = ksq[i].sqrt();
            let weight = match profile {
                0 => (-rate * k).exp(),
                1 => (1.0 + k).powf(-rate),
                _ => 1.0,
            };
            let z = Complex64::new(
                self.rng.sample::<f64, _>(rand_distr::StandardNormal),
                self.rng.sample::<f64, _>(rand_distr::StandardNormal),
            );
            field.coeffs_mut()[i] = z * weight * amplitude;
        }
        field
    }
}

/// Ratio `||F(u)||_s / (||u||_inf^{2 sigma} ||u||_s)`; `None` for degenerate
/// (numerically zero) fields.
pub fn moser_ratio(u: &SpectralField, params: &EquationParams) -> Option<f64> {
    let norm = u.sobolev_norm(params.s);
    let sup = u.sup_norm();
    if norm == 0.0 || sup == 0.0 {
        return None;
    }
    let fnorm = nonlinearity(u, params).sobolev_norm(params.s);
    Some(fnorm / (sup.powf(2.0 * params.sigma as f64) * norm))
}

/// Empirical estimate `K_hat = 1.5 * max ratio` over `budget` sampled fields.
///
/// Deterministic given `seed`; samples are drawn sequentially, so estimates
/// over nested budgets from the same seed are monotone non-decreasing.
pub fn estimate_moser_constant(
    params: &EquationParams,
    grid: &Grid,
    budget: usize,
    seed: u64,
) -> Result<f64> {
    if budget == 0 {
        return Err(Error::InvalidParameter(
            "moser budget must be at least 1".into(),
        ));
    }
    let mut sampler = FieldSampler::new(grid, seed);
    let mut best: f64 = 0.0;
    for _ in 0..budget {
        let u = sampler.sample();
        if let Some(r) = moser_ratio(&u, params) {
            best = best.max(r);
        }
    }
    if best == 0.0 {
        return Err(Error::InvalidParameter(
            "degenerate sample: every drawn field was zero".into(),
        ));
    }
    Ok(MOSER_SAFETY_FACTOR * best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(sigma: u32) -> EquationParams {
        EquationParams::new(sigma, Complex64::new(1.0, 0.0), 2.0, 1).unwrap()
    }

    #[test]
    fn ratio_of_constant_modulus_field_is_one() {
        // F(e_0) is a scalar multiple of e_0, so the ratio collapses to 1 and
        // a budget-1 estimate forced onto e_0 returns exactly the safety factor.
        let grid = Grid::new(1, 4, 12).unwrap();
        let e0 = SpectralField::basis_mode(&grid, &[0]).unwrap();
        for sigma in [1u32, 2] {
            let r = moser_ratio(&e0, &params(sigma)).unwrap();
            assert!((r - 1.0).abs() < 1e-12, "sigma={sigma}: {r}");
            assert!((MOSER_SAFETY_FACTOR * r - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn estimate_is_deterministic_and_monotone_in_budget() {
        let grid = Grid::new(1, 16, 40).unwrap();
        let p = params(1);
        let a = estimate_moser_constant(&p, &grid, 500, 77).unwrap();
        let b = estimate_moser_constant(&p, &grid, 500, 77).unwrap();
        assert_eq!(a.to_bits(), b.to_bits(), "same seed must be bit-identical");
        let c = estimate_moser_constant(&p, &grid, 2000, 77).unwrap();
        assert!(c >= a, "running max over a nested sample cannot decrease");
    }

    #[test]
    fn estimate_bounds_a_holdout_sample() {
        let grid = Grid::new(1, 16, 40).unwrap();
        let p = params(1);
        let k_hat = estimate_moser_constant(&p, &grid, 1000, 123).unwrap();
        let mut holdout = FieldSampler::new(&grid, 456);
        for _ in 0..1000 {
            let u = holdout.sample();
            if let Some(r) = moser_ratio(&u, &p) {
                assert!(r <= k_hat, "holdout ratio {r} exceeded K_hat {k_hat}");
            }
        }
    }

    #[test]
    fn zero_budget_rejected() {
        let grid = Grid::new(1, 4, 12).unwrap();
        assert!(estimate_moser_constant(&params(1), &grid, 0, 1).is_err());
    }
}
