//! Multifractal analysis on dyadic grids.
//!
//! Builds measures whose singularity spectrum is prescribed, computes their
//! scaling functions and Legendre spectra, synthesizes saturation functions
//! from explicit wavelet coefficients, and estimates function spectra with
//! wavelet leaders.

pub mod analysis;
pub mod cli;
pub mod convex;
pub mod dyadic;
pub mod measure;
pub mod saturation;
pub mod spectra;
pub mod wavelet;
