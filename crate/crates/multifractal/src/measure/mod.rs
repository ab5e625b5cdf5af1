//! Measures with a prescribed spectrum: block vectors, Moran measures,
//! environments and auxiliary samplers.

mod block;
mod descriptor;
mod moran;
mod sampler;
mod spectrum;

pub use block::{log2_sum_exp2, BlockPolicy, BlockVector, EpsilonRule, MAX_BLOCK_WIDTH};
pub use descriptor::MeasureDescriptor;
pub use moran::{BlockAudit, Environment, MeasureConfig, MoranMeasure, Origin};
pub use sampler::AuxiliarySampler;
pub use spectrum::PrescribedSpectrum;

use crate::dyadic::{DyadicCube, DyadicError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("invalid construction parameters: {0}")]
    InvalidPolicy(String),
    #[error("block width {0} exceeds the materializable limit of {MAX_BLOCK_WIDTH}")]
    BlockTooWide(u32),
    #[error("block width {width} is too small: {reason}")]
    WidthTooSmall { width: u32, reason: String },
    #[error("no starting width up to {0} satisfies the construction constraints")]
    NoStartingWidth(u32),
    #[error("generation {requested} exceeds the depth budget {budget}")]
    BeyondDepth { requested: u32, budget: u32 },
    #[error("empty letter set for exponent {alpha} at block width {width}")]
    EmptyLetterSet { alpha: f64, width: u32 },
    #[error(transparent)]
    Dyadic(#[from] DyadicError),
    #[error("descriptor: {0}")]
    Descriptor(String),
}

/// Anything that assigns masses to dyadic cubes of `[0,1)^d`.
pub trait CubeMass {
    fn dim(&self) -> usize;

    /// Deepest generation that can be evaluated.
    fn depth(&self) -> u32;

    fn log2_mass(&self, cube: &DyadicCube) -> f64;

    fn mass(&self, cube: &DyadicCube) -> f64 {
        self.log2_mass(cube).exp2()
    }

    /// `log₂` masses of every cube of generation `j`, in flat row-major order.
    fn log2_masses(&self, j: u32) -> Vec<f64>;
}
