//! The nonlinear drift `F(u) = |u|^{2 sigma} u` with exact dealiasing, the
//! scalar-multiplier noise coefficient `phi(u) = f(u) u`, conserved
//! functionals of the deterministic flow, and numeric certifiers for the
//! drift hypotheses on the noise.

mod hypothesis;
mod moser;

pub use hypothesis::{
    check_hypothesis, closed_form_margin, Hypothesis, HypothesisReport, Verdict,
};
pub use moser::{estimate_moser_constant, moser_ratio, FieldSampler, MOSER_SAFETY_FACTOR};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SobolevIndex, SpectralField};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Parameters of the equation `du = -i Lap(u) dt - i alpha |u|^{2 sigma} u dt + phi(u) dW`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EquationParams {
    /// Nonlinearity power `sigma` (positive integer).
    pub sigma: u32,
    /// Coupling `alpha`: focusing `+1`, defocusing `-1`, general complex admitted.
    pub alpha: Complex64,
    /// Sobolev regularity index of the state space.
    pub s: SobolevIndex,
    /// Spatial dimension of the torus.
    pub dim: usize,
}

impl EquationParams {
    pub fn new(sigma: u32, alpha: Complex64, s: f64, dim: usize) -> Result<EquationParams> {
        if sigma == 0 {
            return Err(Error::InvalidParameter(
                "sigma must be a positive integer".into(),
            ));
        }
        if s <= dim as f64 / 2.0 {
            return Err(Error::InvalidParameter(format!(
                "s must exceed d/2 (s = {s}, d = {dim})"
            )));
        }
        Ok(EquationParams {
            sigma,
            alpha,
            s: SobolevIndex(s),
            dim,
        })
    }

    /// Dealiasing padding factor: products of degree `2 sigma + 1` are
    /// alias-free on a grid enlarged by `sigma + 1`.
    pub fn padding_factor(&self) -> usize {
        self.sigma as usize + 1
    }
}

/// Parameters of the noise multiplier `h(x) = a (1+x)^b + i c (1+x)^d`
/// applied as `phi(u) = h(||u||_inf) u`.
///
/// The exponents must satisfy `b >= 1`, `d >= 1`; the boundary `b = d = 1`
/// is admitted because the certifier's case analysis includes
/// `b = d = sigma = 1`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(rename = "d")]
    pub d_exp: f64,
}

impl NoiseSpec {
    pub fn new(a: f64, b: f64, c: f64, d_exp: f64) -> Result<NoiseSpec> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::InvalidParameter("noise a must be nonzero".into()));
        }
        if !(b >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "noise exponent b must be >= 1, got {b}"
            )));
        }
        if !(d_exp >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "noise exponent d must be >= 1, got {d_exp}"
            )));
        }
        if !c.is_finite() {
            return Err(Error::InvalidParameter("noise c must be finite".into()));
        }
        Ok(NoiseSpec { a, b, c, d_exp })
    }

    /// The scalar multiplier `h(x)`.
    pub fn h(&self, x: f64) -> Complex64 {
        let base = 1.0 + x;
        Complex64::new(self.a * base.powf(self.b), self.c * base.powf(self.d_exp))
    }
}

/// Dealiased Galerkin nonlinearity `P_n(|u|^{2 sigma} u)`.
///
/// The field is transformed to a grid enlarged by `sigma + 1`, the product
/// is formed pointwise, and the result is transformed back and re-masked to
/// the retained ball, so the degree-`(2 sigma + 1)` product is alias-free.
pub fn nonlinearity(u: &SpectralField, params: &EquationParams) -> SpectralField {
    let factor = params.padding_factor();
    let mut values = u.to_physical_padded(factor);
    for v in values.iter_mut() {
        let amp = v.norm_sqr().powi(params.sigma as i32);
        *v *= amp;
    }
    SpectralField::from_physical_padded(u.grid(), factor, &values)
}

/// Noise coefficient `phi(u) = h(||u||_inf) u`; maps zero to zero exactly.
pub fn noise_coefficient(u: &SpectralField, spec: &NoiseSpec) -> SpectralField {
    let m = u.sup_norm();
    u.scaled(spec.h(m))
}

/// Mass `M(u) = ||u||_{L^2}^2 = sum_k |uhat(k)|^2`.
pub fn mass(u: &SpectralField) -> f64 {
    u.coeffs().iter().map(|c| c.norm_sqr()).sum()
}

/// Energy `E(u) = 1/2 ||grad u||_{L^2}^2 - alpha/(2+2sigma) ||u||_{L^{2+2sigma}}^{2+2sigma}`,
/// defined for real `alpha` only. The potential term is integrated on the
/// dealiased grid, which is exact for the degree-`(2 sigma + 2)` integrand.
pub fn energy(u: &SpectralField, params: &EquationParams) -> Result<f64> {
    if params.alpha.im != 0.0 {
        return Err(Error::InvalidParameter(
            "energy is defined for real alpha only".into(),
        ));
    }
    let grid = u.grid();
    let ksq = grid.ksq();
    let mut kinetic = 0.0;
    for &idx in grid.retained_indices() {
        let i = idx as usize;
        kinetic += ksq[i] * u.coeffs()[i].norm_sqr();
    }
    let factor = params.padding_factor();
    let values = u.to_physical_padded(factor);
    let m = grid.points_per_dim() * factor;
    let cell = (TWO_PI / m as f64).powi(grid.dim() as i32);
    let mut potential = 0.0;
    for v in &values {
        potential += v.norm_sqr().powi(params.sigma as i32 + 1);
    }
    potential *= cell;
    Ok(0.5 * kinetic - params.alpha.re / (2.0 + 2.0 * params.sigma as f64) * potential)
}

/// Checks the two-point bound
/// `||F(u) - F(v)||_s <= C (||u||_s^{2 sigma} + ||v||_s^{2 sigma}) ||u - v||_s`,
/// used as a property test with `C` calibrated once per `(s, sigma, d)`.
pub fn lipschitz_bound_check(
    u: &SpectralField,
    v: &SpectralField,
    params: &EquationParams,
    c: f64,
) -> Result<bool> {
    if !u.grid().same_as(v.grid()) {
        return Err(Error::GridMismatch(
            "lipschitz_bound_check requires matching grids".into(),
        ));
    }
    let s = params.s;
    let fu = nonlinearity(u, params);
    let fv = nonlinearity(v, params);
    let lhs = fu.axpy(Complex64::new(-1.0, 0.0), &fv)?.sobolev_norm(s);
    let du = u.axpy(Complex64::new(-1.0, 0.0), v)?.sobolev_norm(s);
    let pow = 2.0 * params.sigma as f64;
    let rhs = c * (u.sobolev_norm(s).powf(pow) + v.sobolev_norm(s).powf(pow)) * du;
    Ok(lhs <= rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;
    use std::collections::HashMap;

    fn params(sigma: u32, alpha: f64, s: f64) -> EquationParams {
        EquationParams::new(sigma, Complex64::new(alpha, 0.0), s, 1).unwrap()
    }

    #[test]
    fn nonlinearity_of_constant_field() {
        let grid = Grid::new(1, 4, 16).unwrap();
        let c = Complex64::new(0.8, 0.3);
        let u = SpectralField::from_modes(&grid, &[(vec![0], c * TWO_PI.sqrt())]).unwrap();
        for sigma in [1u32, 2, 3] {
            let f = nonlinearity(&u, &params(sigma, 1.0, 2.0));
            let expected = c.norm_sqr().powi(sigma as i32) * c;
            let got = f.coeff(&[0]) / TWO_PI.sqrt();
            assert!((got - expected).norm() < 1e-12 * expected.norm());
            // No spurious content on other modes.
            for k in 1..=4i64 {
                assert!(f.coeff(&[k]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn nonlinearity_of_single_mode_is_scalar_multiple() {
        // |e_k|^2 = (2pi)^{-d} everywhere, so F(e_k) = (2pi)^{-d sigma} e_k.
        let grid = Grid::new(1, 5, 12).unwrap();
        let e3 = SpectralField::basis_mode(&grid, &[3]).unwrap();
        let f = nonlinearity(&e3, &params(1, 1.0, 2.0));
        let expected = TWO_PI.powi(-1);
        assert!((f.coeff(&[3]).re - expected).abs() < 1e-13);
        assert!(f.coeff(&[3]).im.abs() < 1e-13);
    }

    /// Exact convolution of truncated Fourier series; the product picks up
    /// one `(2pi)^{-d/2}` per factor pair.
    fn convolve(
        a: &HashMap<i64, Complex64>,
        b: &HashMap<i64, Complex64>,
    ) -> HashMap<i64, Complex64> {
        let norm = TWO_PI.powf(-0.5);
        let mut out: HashMap<i64, Complex64> = HashMap::new();
        for (ka, va) in a {
            for (kb, vb) in b {
                *out.entry(ka + kb).or_default() += va * vb * norm;
            }
        }
        out
    }

    #[test]
    fn nonlinearity_matches_symbolic_convolution() {
        let grid = Grid::new(1, 10, 22).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let mut modes: HashMap<i64, Complex64> = HashMap::new();
        for k in -2i64..=2 {
            modes.insert(k, Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        }
        let pairs: Vec<(Vec<i64>, Complex64)> =
            modes.iter().map(|(k, v)| (vec![*k], *v)).collect();
        let u = SpectralField::from_modes(&grid, &pairs).unwrap();
        let f = nonlinearity(&u, &params(2, 1.0, 2.0));

        // |u|^4 u = u^3 conj(u)^2 computed by exact convolution.
        let conj: HashMap<i64, Complex64> =
            modes.iter().map(|(k, v)| (-k, v.conj())).collect();
        let u2 = convolve(&modes, &modes);
        let u3 = convolve(&u2, &modes);
        let cc = convolve(&conj, &conj);
        let full = convolve(&u3, &cc);

        let scale: f64 = full.values().map(|v| v.norm()).fold(0.0, f64::max);
        for k in -10i64..=10 {
            let expected = full.get(&k).copied().unwrap_or_default();
            let got = f.coeff(&[k]);
            assert!(
                (got - expected).norm() <= 1e-10 * scale,
                "mode {k}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn nonlinearity_gauge_covariance() {
        let grid = Grid::new(1, 8, 20).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let pairs: Vec<(Vec<i64>, Complex64)> = (-3i64..=3)
            .map(|k| (vec![k], Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)))
            .collect();
        let u = SpectralField::from_modes(&grid, &pairs).unwrap();
        let p = params(2, 1.0, 2.0);
        let theta = 1.234f64;
        let phase = Complex64::new(theta.cos(), theta.sin());
        let lhs = nonlinearity(&u.scaled(phase), &p);
        let rhs = nonlinearity(&u, &p).scaled(phase);
        let scale = rhs.sobolev_norm(SobolevIndex(0.0));
        assert!(lhs.max_coeff_distance(&rhs) < 1e-12 * scale);
    }

    #[test]
    fn zero_maps_to_zero() {
        let grid = Grid::new(1, 4, 12).unwrap();
        let z = SpectralField::zero(&grid);
        let p = params(2, 1.0, 2.0);
        assert_eq!(mass(&nonlinearity(&z, &p)), 0.0);
        let spec = NoiseSpec::new(2.0, 1.5, 0.5, 1.2).unwrap();
        assert_eq!(mass(&noise_coefficient(&z, &spec)), 0.0);
    }

    #[test]
    fn noise_coefficient_is_scalar_multiple() {
        let grid = Grid::new(1, 6, 16).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let pairs: Vec<(Vec<i64>, Complex64)> = (-4i64..=4)
            .map(|k| (vec![k], Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)))
            .collect();
        let u = SpectralField::from_modes(&grid, &pairs).unwrap();
        let spec = NoiseSpec::new(2.0, 1.5, 0.5, 1.2).unwrap();
        let phi = noise_coefficient(&u, &spec);
        let m = u.sup_norm();
        let f = spec.h(m);
        // Im f / Re f = (c/a) (1+m)^{d-b}.
        let ratio = f.im / f.re;
        assert!((ratio - 0.25 * (1.0 + m).powf(-0.3)).abs() < 1e-12);
        for k in -4i64..=4 {
            let expected = f * u.coeff(&[k]);
            assert!((phi.coeff(&[k]) - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn constant_one_field_with_quadratic_gain() {
        // u = 1, a = 1, b = 2, c = 0: m = 1, f = 4, output = 4.
        let grid = Grid::new(1, 4, 12).unwrap();
        let u =
            SpectralField::from_modes(&grid, &[(vec![0], Complex64::new(TWO_PI.sqrt(), 0.0))])
                .unwrap();
        let spec = NoiseSpec::new(1.0, 2.0, 0.0, 1.0).unwrap();
        let phi = noise_coefficient(&u, &spec);
        let got = phi.coeff(&[0]) / TWO_PI.sqrt();
        assert!((got - Complex64::new(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn noise_spec_validation() {
        assert!(NoiseSpec::new(0.0, 2.0, 0.0, 2.0).is_err());
        assert!(NoiseSpec::new(1.0, 0.5, 0.0, 2.0).is_err());
        assert!(NoiseSpec::new(1.0, 2.0, 0.0, 0.9).is_err());
        assert!(NoiseSpec::new(1.0, 1.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn mass_of_basis_mode_is_one() {
        let grid = Grid::new(2, 3, 10).unwrap();
        let e = SpectralField::basis_mode(&grid, &[1, -2]).unwrap();
        assert!((mass(&e) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn energy_closed_forms() {
        let grid = Grid::new(1, 4, 16).unwrap();
        // Constant field, alpha = 0: zero kinetic and zero potential energy.
        let e0 = SpectralField::basis_mode(&grid, &[0]).unwrap();
        let p0 = params(1, 0.0, 2.0);
        assert!(energy(&e0, &p0).unwrap().abs() < 1e-15);

        // u = e_1, alpha = -1, sigma = 1: E = 1/2 + (1/4) (2pi)^{-1}.
        let e1 = SpectralField::basis_mode(&grid, &[1]).unwrap();
        let p1 = params(1, -1.0, 2.0);
        let expected = 0.5 + 0.25 / TWO_PI;
        assert!((energy(&e1, &p1).unwrap() - expected).abs() < 1e-12);

        // Complex alpha rejected.
        let pc = EquationParams::new(1, Complex64::new(1.0, 0.5), 2.0, 1).unwrap();
        assert!(energy(&e1, &pc).is_err());
    }

    #[test]
    fn lipschitz_bound_trivial_cases() {
        let grid = Grid::new(1, 6, 16).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let pairs: Vec<(Vec<i64>, Complex64)> = (-4i64..=4)
            .map(|k| (vec![k], Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)))
            .collect();
        let u = SpectralField::from_modes(&grid, &pairs).unwrap();
        let p = params(1, 1.0, 2.0);
        // u = v: both sides vanish for any C >= 0.
        assert!(lipschitz_bound_check(&u, &u, &p, 0.0).unwrap());
        // v = 0 reduces to ||F(u)||_s <= C ||u||_s^{2 sigma + 1}.
        let z = SpectralField::zero(&grid);
        let norm = u.sobolev_norm(SobolevIndex(2.0));
        let fnorm = nonlinearity(&u, &p).sobolev_norm(SobolevIndex(2.0));
        let c = fnorm / norm.powi(3);
        assert!(lipschitz_bound_check(&u, &z, &p, c * 1.0001).unwrap());
        assert!(!lipschitz_bound_check(&u, &z, &p, c * 0.5).unwrap());
    }

    #[test]
    fn lipschitz_bound_with_calibrated_constant() {
        let grid = Grid::new(1, 8, 20).unwrap();
        let p = params(1, 1.0, 2.0);
        let mut sampler = FieldSampler::new(&grid, 900);
        // Calibrate C on one sample, then verify on a disjoint sample.
        let mut max_ratio: f64 = 0.0;
        for _ in 0..100 {
            let u = sampler.sample();
            let v = sampler.sample();
            let fu = nonlinearity(&u, &p);
            let fv = nonlinearity(&v, &p);
            let s = SobolevIndex(2.0);
            let lhs = fu.axpy(Complex64::new(-1.0, 0.0), &fv).unwrap().sobolev_norm(s);
            let du = u.axpy(Complex64::new(-1.0, 0.0), &v).unwrap().sobolev_norm(s);
            let rhs = (u.sobolev_norm(s).powi(2) + v.sobolev_norm(s).powi(2)) * du;
            if rhs > 0.0 {
                max_ratio = max_ratio.max(lhs / rhs);
            }
        }
        let c = 1.5 * max_ratio;
        let mut holdout = FieldSampler::new(&grid, 901);
        for _ in 0..200 {
            let u = holdout.sample();
            let v = holdout.sample();
            assert!(lipschitz_bound_check(&u, &v, &p, c).unwrap());
        }
    }
}
