//! Real-space/Fourier-space representation of periodic fields on the
//! d-torus: Sobolev inner products and norms, Galerkin projection, and the
//! exact linear Schrodinger propagator.

mod fft;
mod field;
mod grid;

pub use field::SpectralField;
pub use grid::{Grid, SobolevIndex};
