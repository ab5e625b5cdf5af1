//! JSON round-trip for built measures.

use serde::{Deserialize, Serialize};

use super::block::BlockVector;
use super::moran::{MoranMeasure, Origin};
use super::spectrum::PrescribedSpectrum;
use super::{CubeMass, MeasureError};
use crate::dyadic::GenerationSchedule;

pub const DESCRIPTOR_FORMAT: &str = "multifractal-measure/1";

/// Everything needed to rebuild a [`MoranMeasure`] bit for bit. Floats that
/// feed the masses are kept as shortest round-trip decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureDescriptor {
    pub format: String,
    pub dim: usize,
    pub depth: u32,
    pub spectrum: Option<PrescribedSpectrum>,
    pub origin: Origin,
    pub schedule: GenerationSchedule,
    pub blocks: Vec<BlockRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub width: u32,
    pub epsilon: String,
    pub alphas: Vec<String>,
    pub counts: Vec<u64>,
    pub i_d: usize,
    pub i_dprime: usize,
    /// Weight of one letter at each mesh exponent (or of each letter for homogeneous blocks).
    pub weights: Vec<String>,
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn parse(s: &str) -> Result<f64, MeasureError> {
    s.parse::<f64>().map_err(|e| MeasureError::Descriptor(format!("bad number {s:?}: {e}")))
}

impl BlockRecord {
    fn from_block(b: &BlockVector) -> Self {
        let weights = if b.is_explicit() {
            b.probs().iter().map(|&p| num(p)).collect()
        } else {
            b.mesh_probs().into_iter().map(num).collect()
        };
        Self {
            width: b.width,
            epsilon: num(b.epsilon),
            alphas: b.alphas.iter().map(|&a| num(a)).collect(),
            counts: b.counts.clone(),
            i_d: b.i_d,
            i_dprime: b.i_dprime,
            weights,
        }
    }

    fn to_block(&self, explicit: bool) -> Result<BlockVector, MeasureError> {
        let weights: Vec<f64> = self.weights.iter().map(|s| parse(s)).collect::<Result<_, _>>()?;
        if explicit {
            return BlockVector::from_probs(self.width, weights);
        }
        let alphas: Vec<f64> = self.alphas.iter().map(|s| parse(s)).collect::<Result<_, _>>()?;
        let b = BlockVector::from_parts(
            self.width,
            alphas,
            self.counts.clone(),
            parse(&self.epsilon)?,
            self.i_d,
            self.i_dprime,
        )?;
        if b.mesh_probs() != weights {
            return Err(MeasureError::Descriptor(format!(
                "weights of width {} do not match their counts and exponents",
                self.width
            )));
        }
        Ok(b)
    }
}

impl MeasureDescriptor {
    pub fn from_measure(m: &MoranMeasure) -> Self {
        Self {
            format: DESCRIPTOR_FORMAT.to_string(),
            dim: m.dim(),
            depth: m.depth(),
            spectrum: m.target().cloned(),
            origin: m.origin().clone(),
            schedule: m.schedule().clone(),
            blocks: m.blocks().iter().map(BlockRecord::from_block).collect(),
        }
    }

    pub fn to_measure(&self) -> Result<MoranMeasure, MeasureError> {
        if self.format != DESCRIPTOR_FORMAT {
            return Err(MeasureError::Descriptor(format!("unknown format {:?}", self.format)));
        }
        let explicit = matches!(self.origin, Origin::Bernoulli);
        let blocks: Vec<BlockVector> = self.blocks.iter().map(|b| b.to_block(explicit)).collect::<Result<_, _>>()?;
        if blocks.len() > self.schedule.spans().len() || blocks.is_empty() {
            return Err(MeasureError::Descriptor("block list does not fit the schedule".into()));
        }
        Ok(MoranMeasure::from_parts(
            self.dim,
            self.depth,
            self.spectrum.clone(),
            self.schedule.clone(),
            blocks,
            self.origin.clone(),
        ))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MeasureError> {
        serde_json::from_str(text).map_err(|e| MeasureError::Descriptor(e.to_string()))
    }
}
