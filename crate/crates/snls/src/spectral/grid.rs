//! Collocation grid on the d-dimensional torus `(R/2piZ)^d` together with
//! the Galerkin truncation to the wavenumber ball `|k|_2 <= n`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic grid with `points_per_dim` collocation points per dimension and
/// retained Fourier modes `{k in Z^d : |k|_2 <= truncation}`.
///
/// Collocation points are `x_j = 2pi j / N` in each coordinate. The grid
/// requires `N >= 2n + 2` so every retained mode is representable without
/// wraparound, and `N` even.
#[derive(Clone, Debug)]
pub struct Grid {
    inner: Arc<GridInner>,
}

#[derive(Debug)]
struct GridInner {
    dim: usize,
    truncation: u32,
    points_per_dim: usize,
    shape: Vec<usize>,
    len: usize,
    /// `|k|^2` for every flat cube index.
    ksq: Vec<f64>,
    /// Flat cube indices inside the retained ball.
    retained: Vec<u32>,
    /// Wavenumber vector for each entry of `retained`.
    kvecs: Vec<[i64; 3]>,
    /// Retained-ball mask over the full cube.
    mask: Vec<bool>,
}

/// Signed wavenumber for a cube index along one axis.
#[inline]
fn signed_mode(idx: usize, n_points: usize) -> i64 {
    let k = idx as i64;
    if k >= n_points as i64 / 2 {
        k - n_points as i64
    } else {
        k
    }
}

impl Grid {
    /// Build a grid; rejects `N < 2n + 2` (mode wraparound), odd `N`, and
    /// dimensions outside 1..=3.
    pub fn new(dim: usize, truncation: u32, points_per_dim: usize) -> Result<Grid> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "dim must be 1, 2 or 3, got {dim}"
            )));
        }
        if truncation == 0 {
            return Err(Error::InvalidParameter(
                "truncation radius n must be positive".into(),
            ));
        }
        if points_per_dim % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "points per dimension must be even, got {points_per_dim}"
            )));
        }
        if points_per_dim < 2 * truncation as usize + 2 {
            return Err(Error::InvalidParameter(format!(
                "points per dimension {} too small for truncation {} (need N >= 2n + 2 = {})",
                points_per_dim,
                truncation,
                2 * truncation + 2
            )));
        }
        let shape = vec![points_per_dim; dim];
        let len: usize = shape.iter().product();
        let mut ksq = vec![0.0; len];
        let mut mask = vec![false; len];
        let mut retained = Vec::new();
        let mut kvecs = Vec::new();
        let radius_sq = (truncation as i64) * (truncation as i64);
        for flat in 0..len {
            let mut rem = flat;
            let mut k = [0i64; 3];
            for axis in (0..dim).rev() {
                k[axis] = signed_mode(rem % points_per_dim, points_per_dim);
                rem /= points_per_dim;
            }
            let sq: i64 = k[..dim].iter().map(|c| c * c).sum();
            ksq[flat] = sq as f64;
            if sq <= radius_sq {
                mask[flat] = true;
                retained.push(flat as u32);
                kvecs.push(k);
            }
        }
        Ok(Grid {
            inner: Arc::new(GridInner {
                dim,
                truncation,
                points_per_dim,
                shape,
                len,
                ksq,
                retained,
                kvecs,
                mask,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    /// Galerkin truncation radius `n`.
    pub fn truncation(&self) -> u32 {
        self.inner.truncation
    }

    /// Collocation points per dimension `N`.
    pub fn points_per_dim(&self) -> usize {
        self.inner.points_per_dim
    }

    /// Cube shape `[N; d]`.
    pub fn shape(&self) -> &[usize] {
        &self.inner.shape
    }

    /// Total number of cube entries `N^d`.
    pub fn cube_len(&self) -> usize {
        self.inner.len
    }

    /// Number of retained modes.
    pub fn mode_count(&self) -> usize {
        self.inner.retained.len()
    }

    /// Flat cube indices of the retained modes.
    pub fn retained_indices(&self) -> &[u32] {
        &self.inner.retained
    }

    /// Wavenumber vectors aligned with `retained_indices`; only the first
    /// `dim` components are meaningful.
    pub fn retained_modes(&self) -> &[[i64; 3]] {
        &self.inner.kvecs
    }

    /// `|k|^2` per flat cube index.
    pub fn ksq(&self) -> &[f64] {
        &self.inner.ksq
    }

    pub fn mask(&self) -> &[bool] {
        &self.inner.mask
    }

    /// Flat cube index of wavenumber `k` on a cube with `m` points per
    /// dimension (indices wrap modulo `m`).
    pub fn flat_index_on(&self, k: &[i64; 3], m: usize) -> usize {
        let mut idx = 0usize;
        for axis in 0..self.inner.dim {
            let wrapped = k[axis].rem_euclid(m as i64) as usize;
            idx = idx * m + wrapped;
        }
        idx
    }

    /// Flat cube index of wavenumber `k` on this grid's own cube.
    pub fn flat_index(&self, k: &[i64; 3]) -> Option<usize> {
        for axis in 0..self.inner.dim {
            if k[axis].unsigned_abs() as u32 > self.inner.truncation {
                return None;
            }
        }
        Some(self.flat_index_on(k, self.inner.points_per_dim))
    }

    /// Structural compatibility: same dimension, truncation and resolution.
    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim
                && self.inner.truncation == other.inner.truncation
                && self.inner.points_per_dim == other.inner.points_per_dim)
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

/// Bessel weight exponent wrapper: `<k>^s = (1 + |k|^2)^{s/2}`.
///
/// The constraint `s > d/2` (so the state space embeds into `L^inf`) is
/// enforced at configuration validation, not here.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SobolevIndex(pub f64);

impl SobolevIndex {
    pub fn value(self) -> f64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_mode_count() {
        // n = 3 keeps {-3, ..., 3}: 7 modes.
        let g = Grid::new(1, 3, 8).unwrap();
        assert_eq!(g.mode_count(), 7);
    }

    #[test]
    fn two_dimensional_ball_excludes_corners() {
        // |(1,1)|_2 = sqrt(2) > 1, so n = 1 keeps 5 modes.
        let g = Grid::new(2, 1, 4).unwrap();
        assert_eq!(g.mode_count(), 5);
    }

    #[test]
    fn rejects_wraparound_and_odd_points() {
        assert!(Grid::new(1, 4, 8).is_err()); // 2n + 2 = 10 > 8
        assert!(Grid::new(1, 3, 9).is_err()); // odd N
        assert!(Grid::new(4, 3, 16).is_err()); // unsupported dim
    }

    #[test]
    fn retained_set_is_symmetric() {
        let g = Grid::new(2, 3, 10).unwrap();
        for k in g.retained_modes() {
            let neg = [-k[0], -k[1], -k[2]];
            assert!(g.flat_index(&neg).is_some());
            let flat = g.flat_index_on(&neg, g.points_per_dim());
            assert!(g.mask()[flat], "mode {neg:?} missing");
        }
    }
}
