//! Truncated Fourier representation of periodic complex fields.
//!
//! Convention: `u(x) = (2pi)^{-d/2} sum_k uhat(k) e^{i k.x}` with
//! `uhat(k) = (2pi)^{-d/2} int u(x) e^{-i k.x} dx`, so the basis functions
//! `e_k(x) = (2pi)^{-d/2} e^{i k.x}` are orthonormal in `L^2` and
//! `||e_k||_s = <k>^s` holds exactly.

use num_complex::Complex64;

use super::fft::fft_nd;
use super::grid::{Grid, SobolevIndex};
use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Complex Fourier coefficients on the retained ball of a [`Grid`], stored
/// densely on the FFT cube with entries outside the ball identically zero.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    /// The zero field.
    pub fn zero(grid: &Grid) -> SpectralField {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.cube_len()],
        }
    }

    /// Basis mode `e_k`; errors when `|k|_2` exceeds the truncation radius.
    pub fn basis_mode(grid: &Grid, k: &[i64]) -> Result<SpectralField> {
        let mut kv = [0i64; 3];
        if k.len() != grid.dim() {
            return Err(Error::InvalidParameter(format!(
                "mode vector has {} components, grid dimension is {}",
                k.len(),
                grid.dim()
            )));
        }
        kv[..k.len()].copy_from_slice(k);
        let sq: i64 = kv.iter().map(|c| c * c).sum();
        if sq > (grid.truncation() as i64).pow(2) {
            return Err(Error::InvalidParameter(format!(
                "mode {k:?} outside retained ball of radius {}",
                grid.truncation()
            )));
        }
        let mut field = SpectralField::zero(grid);
        let flat = grid.flat_index_on(&kv, grid.points_per_dim());
        field.coeffs[flat] = Complex64::new(1.0, 0.0);
        Ok(field)
    }

    /// Build from `(mode, coefficient)` pairs.
    pub fn from_modes(grid: &Grid, modes: &[(Vec<i64>, Complex64)]) -> Result<SpectralField> {
        let mut field = SpectralField::zero(grid);
        for (k, c) in modes {
            let mut kv = [0i64; 3];
            kv[..k.len().min(3)].copy_from_slice(&k[..k.len().min(3)]);
            let flat = grid
                .flat_index(&kv)
                .filter(|&f| grid.mask()[f])
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("mode {k:?} outside retained ball"))
                })?;
            field.coeffs[flat] = *c;
        }
        Ok(field)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Raw coefficient cube (row-major FFT layout).
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Mutable cube access for crate-internal samplers and steppers, which
    /// are responsible for staying inside the retained ball.
    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of wavenumber `k` (zero outside the ball).
    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        let mut kv = [0i64; 3];
        kv[..k.len().min(3)].copy_from_slice(&k[..k.len().min(3)]);
        match self.grid.flat_index(&kv) {
            Some(flat) if self.grid.mask()[flat] => self.coeffs[flat],
            _ => Complex64::default(),
        }
    }

    pub fn set_coeff(&mut self, k: &[i64], value: Complex64) -> Result<()> {
        let mut kv = [0i64; 3];
        kv[..k.len().min(3)].copy_from_slice(&k[..k.len().min(3)]);
        let flat = self
            .grid
            .flat_index(&kv)
            .filter(|&f| self.grid.mask()[f])
            .ok_or_else(|| Error::InvalidParameter(format!("mode {k:?} outside retained ball")))?;
        self.coeffs[flat] = value;
        Ok(())
    }

    /// Values at the collocation points of a cube refined by `factor`
    /// (`factor = 1` is the grid's own collocation mesh).
    pub fn to_physical_padded(&self, factor: usize) -> Vec<Complex64> {
        let d = self.grid.dim();
        let m = self.grid.points_per_dim() * factor;
        let shape = vec![m; d];
        let total: usize = shape.iter().product();
        let norm = (TWO_PI).powf(-(d as f64) / 2.0);
        let mut cube = vec![Complex64::default(); total];
        for (idx, k) in self
            .grid
            .retained_indices()
            .iter()
            .zip(self.grid.retained_modes())
        {
            let value = self.coeffs[*idx as usize];
            if value != Complex64::default() {
                cube[self.grid.flat_index_on(k, m)] = value * norm;
            }
        }
        fft_nd(&mut cube, &shape, true);
        cube
    }

    /// Values at the grid's `N^d` collocation points.
    pub fn to_physical(&self) -> Vec<Complex64> {
        self.to_physical_padded(1)
    }

    /// Recover retained coefficients from values on a cube refined by
    /// `factor`; content outside the retained ball is discarded (this is the
    /// Galerkin projection composed with the discrete transform).
    pub fn from_physical_padded(grid: &Grid, factor: usize, values: &[Complex64]) -> SpectralField {
        let d = grid.dim();
        let m = grid.points_per_dim() * factor;
        let shape = vec![m; d];
        let total: usize = shape.iter().product();
        assert_eq!(values.len(), total, "physical cube has wrong size");
        let mut cube = values.to_vec();
        fft_nd(&mut cube, &shape, false);
        let norm = (TWO_PI).powf(d as f64 / 2.0) / total as f64;
        let mut field = SpectralField::zero(grid);
        for (idx, k) in grid.retained_indices().iter().zip(grid.retained_modes()) {
            field.coeffs[*idx as usize] = cube[grid.flat_index_on(k, m)] * norm;
        }
        field
    }

    pub fn from_physical(grid: &Grid, values: &[Complex64]) -> SpectralField {
        SpectralField::from_physical_padded(grid, 1, values)
    }

    /// `(u, v)_s = sum_k <k>^{2s} uhat(k) conj(vhat(k))`.
    pub fn sobolev_inner(&self, other: &SpectralField, s: SobolevIndex) -> Result<Complex64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch(
                "sobolev_inner requires both fields on the same grid".into(),
            ));
        }
        let ksq = self.grid.ksq();
        let mut acc = Complex64::default();
        for &idx in self.grid.retained_indices() {
            let i = idx as usize;
            let w = (1.0 + ksq[i]).powf(s.0);
            acc += self.coeffs[i] * other.coeffs[i].conj() * w;
        }
        Ok(acc)
    }

    /// `||u||_s = sqrt(Re (u, u)_s)`.
    pub fn sobolev_norm(&self, s: SobolevIndex) -> f64 {
        let ksq = self.grid.ksq();
        let mut acc = 0.0;
        for &idx in self.grid.retained_indices() {
            let i = idx as usize;
            acc += (1.0 + ksq[i]).powf(s.0) * self.coeffs[i].norm_sqr();
        }
        acc.sqrt()
    }

    /// Discrete sup norm: max of `|u(x_j)|` over the `N^d` collocation
    /// points. A lower bound for the true `L^inf` norm.
    pub fn sup_norm(&self) -> f64 {
        self.to_physical()
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Galerkin projection onto `|k|_2 <= radius`; idempotent, self-adjoint
    /// in every `(.,.)_s`, and a contraction in every `||.||_s`.
    pub fn project(&self, radius: u32) -> Result<SpectralField> {
        if radius > self.grid.truncation() {
            return Err(Error::InvalidParameter(format!(
                "projection radius {} exceeds grid truncation {}",
                radius,
                self.grid.truncation()
            )));
        }
        let cap = (radius as f64) * (radius as f64);
        let ksq = self.grid.ksq();
        let mut out = self.clone();
        for &idx in self.grid.retained_indices() {
            let i = idx as usize;
            if ksq[i] > cap {
                out.coeffs[i] = Complex64::default();
            }
        }
        Ok(out)
    }

    /// Exact free-Schrodinger flow: `uhat(k) -> e^{+i |k|^2 t} uhat(k)`.
    ///
    /// The phase sign matches `du = -i Laplacian(u) dt + ...`; every `|uhat(k)|`
    /// and hence every Sobolev norm is preserved exactly. Modulus-level
    /// diagnostics are independent of this sign choice.
    pub fn linear_propagate(&self, t: f64) -> SpectralField {
        let ksq = self.grid.ksq();
        let mut out = self.clone();
        for &idx in self.grid.retained_indices() {
            let i = idx as usize;
            let phase = ksq[i] * t;
            out.coeffs[i] *= Complex64::new(phase.cos(), phase.sin());
        }
        out
    }

    /// `self + scale * other`.
    pub fn axpy(&self, scale: Complex64, other: &SpectralField) -> Result<SpectralField> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("axpy requires matching grids".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += scale * b;
        }
        Ok(out)
    }

    /// Multiply every coefficient by `scale`.
    pub fn scaled(&self, scale: Complex64) -> SpectralField {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= scale;
        }
        out
    }

    /// True when every coefficient is finite.
    pub fn all_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Maximum coefficient-wise distance to `other`.
    pub fn max_coeff_distance(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn random_field(grid: &Grid, rng: &mut ChaCha12Rng) -> SpectralField {
        let mut f = SpectralField::zero(grid);
        let idxs: Vec<u32> = grid.retained_indices().to_vec();
        for idx in idxs {
            f.coeffs[idx as usize] = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        f
    }

    #[test]
    fn basis_mode_norm_matches_bessel_weight() {
        let grid = Grid::new(1, 8, 20).unwrap();
        for k in -8i64..=8 {
            let e = SpectralField::basis_mode(&grid, &[k]).unwrap();
            for s in [0.0, 1.0, 1.5, 2.0] {
                let expected = (1.0 + (k * k) as f64).powf(s / 2.0);
                let got = e.sobolev_norm(SobolevIndex(s));
                assert!(
                    (got - expected).abs() <= 1e-12 * expected,
                    "k={k} s={s}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn distinct_modes_are_orthogonal() {
        let grid = Grid::new(1, 4, 12).unwrap();
        let e1 = SpectralField::basis_mode(&grid, &[1]).unwrap();
        let e3 = SpectralField::basis_mode(&grid, &[-3]).unwrap();
        let ip = e1.sobolev_inner(&e3, SobolevIndex(1.5)).unwrap();
        assert!(ip.norm() < 1e-15);
    }

    #[test]
    fn sobolev_inner_matches_direct_sum() {
        let grid = Grid::new(1, 3, 8).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let u = random_field(&grid, &mut rng);
        let v = random_field(&grid, &mut rng);
        let s = SobolevIndex(1.5);
        // Independent oracle: explicit sum over the 7 modes with compensated
        // accumulation.
        let mut acc = Complex64::default();
        let mut comp = Complex64::default();
        for k in -3i64..=3 {
            let w = (1.0 + (k * k) as f64).powf(1.5);
            let term = u.coeff(&[k]) * v.coeff(&[k]).conj() * w - comp;
            let next = acc + term;
            comp = (next - acc) - term;
            acc = next;
        }
        let got = u.sobolev_inner(&v, s).unwrap();
        assert!((got - acc).norm() < 1e-13 * acc.norm().max(1.0));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let g1 = Grid::new(1, 3, 8).unwrap();
        let g2 = Grid::new(1, 3, 10).unwrap();
        let u = SpectralField::zero(&g1);
        let v = SpectralField::zero(&g2);
        assert!(u.sobolev_inner(&v, SobolevIndex(0.0)).is_err());
    }

    #[test]
    fn round_trip_reproduces_coefficients() {
        let grid = Grid::new(2, 5, 16).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let u = random_field(&grid, &mut rng);
        let back = SpectralField::from_physical(&grid, &u.to_physical());
        let scale = u.sobolev_norm(SobolevIndex(0.0));
        assert!(back.max_coeff_distance(&u) < 1e-12 * scale);
    }

    #[test]
    fn sup_norm_of_constant_and_single_mode() {
        let grid = Grid::new(1, 4, 16).unwrap();
        // Constant field with value c: coefficient of e_0 is sqrt(2pi) c.
        let c = Complex64::new(0.7, -0.4);
        let u = SpectralField::from_modes(&grid, &[(vec![0], c * TWO_PI.sqrt())]).unwrap();
        assert!((u.sup_norm() - c.norm()).abs() < 1e-12);
        // |e_k(x)| = (2pi)^{-1/2} everywhere.
        let e3 = SpectralField::basis_mode(&grid, &[3]).unwrap();
        assert!((e3.sup_norm() - TWO_PI.powf(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_close_to_fine_grid_value() {
        // e_0 + e_1 on N = 64 versus the same field sampled on 4096 points.
        let coarse = Grid::new(1, 1, 64).unwrap();
        let fine = Grid::new(1, 1, 4096).unwrap();
        let modes = [
            (vec![0i64], Complex64::new(1.0, 0.0)),
            (vec![1i64], Complex64::new(1.0, 0.0)),
        ];
        let uc = SpectralField::from_modes(&coarse, &modes).unwrap();
        let uf = SpectralField::from_modes(&fine, &modes).unwrap();
        assert!((uc.sup_norm() - uf.sup_norm()).abs() < 1e-6);
    }

    #[test]
    fn projection_is_idempotent_and_contractive() {
        let grid = Grid::new(1, 12, 32) .unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..100 {
            let u = random_field(&grid, &mut rng);
            let p = u.project(5).unwrap();
            let pp = p.project(5).unwrap();
            assert!(pp.max_coeff_distance(&p) == 0.0);
            for s in [0.0, 1.0, 2.0] {
                assert!(p.sobolev_norm(SobolevIndex(s)) <= u.sobolev_norm(SobolevIndex(s)) + 1e-15);
            }
        }
        // project(e_k, m) keeps or kills the mode.
        let e2 = SpectralField::basis_mode(&grid, &[2]).unwrap();
        assert_eq!(e2.project(2).unwrap().coeff(&[2]), Complex64::new(1.0, 0.0));
        assert_eq!(e2.project(1).unwrap().coeff(&[2]), Complex64::default());
        assert!(e2.project(13).is_err());
    }

    #[test]
    fn propagator_phase_and_group_law() {
        let grid = Grid::new(1, 6, 16).unwrap();
        let tau = 0.83;
        let e4 = SpectralField::basis_mode(&grid, &[4]).unwrap();
        let rotated = e4.linear_propagate(tau);
        let expected = Complex64::new((16.0 * tau).cos(), (16.0 * tau).sin());
        assert!((rotated.coeff(&[4]) - expected).norm() < 1e-14);

        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let u = random_field(&grid, &mut rng);
        assert!(u.linear_propagate(0.0).max_coeff_distance(&u) == 0.0);
        let two_step = u.linear_propagate(0.4).linear_propagate(0.93);
        let one_step = u.linear_propagate(1.33);
        let scale = u.sobolev_norm(SobolevIndex(0.0));
        assert!(two_step.max_coeff_distance(&one_step) < 1e-12 * scale);
    }

    #[test]
    fn propagator_preserves_norms_and_moduli() {
        let grid = Grid::new(1, 10, 24).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let u = random_field(&grid, &mut rng);
        let v = u.linear_propagate(1.37);
        for s in [0.0, 1.5, 2.0] {
            let a = u.sobolev_norm(SobolevIndex(s));
            let b = v.sobolev_norm(SobolevIndex(s));
            assert!((a - b).abs() <= 1e-12 * a);
        }
        for &idx in grid.retained_indices() {
            let a = u.coeffs()[idx as usize].norm();
            let b = v.coeffs()[idx as usize].norm();
            // 4 ulp allowance on the modulus.
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.max(1e-300));
        }
    }

    #[test]
    fn parseval_identity_on_collocation_grid() {
        let grid = Grid::new(1, 7, 18).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let u = random_field(&grid, &mut rng);
        let v = random_field(&grid, &mut rng);
        let spectral = u.sobolev_inner(&v, SobolevIndex(0.0)).unwrap();
        let (pu, pv) = (u.to_physical(), v.to_physical());
        let mut physical = Complex64::default();
        for (a, b) in pu.iter().zip(pv.iter()) {
            physical += a * b.conj();
        }
        physical *= TWO_PI / grid.points_per_dim() as f64;
        assert!((spectral - physical).norm() < 1e-12 * spectral.norm().max(1.0));
    }
}
