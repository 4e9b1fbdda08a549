//! Solvers for a Brownian polymer in ℝ^d rewarded by a compactly supported
//! radial potential: the Birman–Schwinger spectral problem, the radial
//! Feynman–Kac PDE, a weighted path sampler and the limiting critical process.

pub mod birman_schwinger;
pub mod critical_process;
pub mod dimension;
pub mod error;
pub mod feynman_kac_pde;
pub mod field;
pub mod greens_kernel;
pub mod linalg;
pub mod path_sampler;
pub mod potential;
pub mod quadrature;

pub use dimension::Dimension;
pub use error::{Error, Result};
pub use field::RadialField;
pub use potential::{Profile, RadialPotential};
