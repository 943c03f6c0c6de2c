//! Thin multi-dimensional FFT layer over `rustfft`.
//!
//! Transforms are unnormalized in both directions (forward kernel
//! `e^{-2pi i jk/N}`, inverse `e^{+2pi i jk/N}`); callers apply the
//! normalization that matches the continuous Fourier convention.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        cache
            .entry((len, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                }
            })
            .clone()
    })
}

/// In-place unnormalized FFT along every axis of a row-major cube.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let total: usize = shape.iter().product();
    debug_assert_eq!(data.len(), total);
    let dim = shape.len();
    for axis in 0..dim {
        let len = shape[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        let blocks = total / (len * stride);
        let fft = plan(len, inverse);
        let mut line = vec![Complex64::default(); len];
        for b in 0..blocks {
            for inner in 0..stride {
                let base = b * len * stride + inner;
                if stride == 1 {
                    fft.process(&mut data[base..base + len]);
                } else {
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + i * stride];
                    }
                    fft.process(&mut line);
                    for (i, value) in line.iter().enumerate() {
                        data[base + i * stride] = *value;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_dft_in_1d() {
        let n = 8;
        let input: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new(j as f64, (j * j % 3) as f64))
            .collect();
        let mut data = input.clone();
        fft_nd(&mut data, &[n], false);
        for k in 0..n {
            let mut direct = Complex64::default();
            for (j, v) in input.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                direct += v * Complex64::new(phase.cos(), phase.sin());
            }
            assert!((data[k] - direct).norm() < 1e-10);
        }
    }

    #[test]
    fn round_trip_2d() {
        let shape = [4usize, 6usize];
        let total: usize = shape.iter().product();
        let input: Vec<Complex64> = (0..total)
            .map(|j| Complex64::new((j as f64).sin(), (j as f64).cos()))
            .collect();
        let mut data = input.clone();
        fft_nd(&mut data, &shape, false);
        fft_nd(&mut data, &shape, true);
        for (a, b) in data.iter().zip(input.iter()) {
            assert!((a / total as f64 - b).norm() < 1e-12);
        }
    }
}
