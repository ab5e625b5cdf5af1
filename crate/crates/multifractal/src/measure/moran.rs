use serde::{Deserialize, Serialize};

use super::block::{BlockPolicy, BlockVector, MAX_BLOCK_WIDTH};
use super::spectrum::PrescribedSpectrum;
use super::{CubeMass, MeasureError};
use crate::convex::AdmissibleClass;
use crate::dyadic::{DyadicCube, GenerationSchedule, LetterRule, MAX_GENERATION};

/// Schedule and block parameters for [`MoranMeasure::build`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureConfig {
    /// Starting width; searched upward from `min_n0` when absent.
    pub n0: Option<u32>,
    pub min_n0: u32,
    pub letters: LetterRule,
    pub policy: BlockPolicy,
}

impl Default for MeasureConfig {
    /// `ℓ_N = N²` with `ε_N = 2 log₂ N / N`.
    fn default() -> Self {
        Self { n0: None, min_n0: 4, letters: LetterRule::Squares, policy: BlockPolicy::default() }
    }
}

impl MeasureConfig {
    /// One letter per width and the smallest closing `ε`: all widths appear
    /// within a few dozen generations.
    pub fn desk() -> Self {
        Self { n0: None, min_n0: 4, letters: LetterRule::Constant { letters: 1 }, policy: BlockPolicy::desk() }
    }

    pub fn with_n0(mut self, n0: u32) -> Self {
        self.n0 = Some(n0);
        self
    }

    pub fn with_letters(mut self, letters: LetterRule) -> Self {
        self.letters = letters;
        self
    }
}

/// Constants achieved by one block, recorded rather than asserted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockAudit {
    pub width: u32,
    pub epsilon: f64,
    pub mesh_points: usize,
    /// `max_i |p_i 2^{Nβ_i} − 1|`.
    pub normalization_defect: f64,
    /// `max R_i / (2^{N−1}N^{−2})` off the anchors; at most 1 in the limit regime.
    pub count_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Prescribed { config: MeasureConfig },
    Bernoulli,
}

/// A Moran measure on `[0,1)^d`, `ℤ^d`-periodic, tensorized for `d ≥ 2`.
#[derive(Clone, Debug)]
pub struct MoranMeasure {
    dim: usize,
    depth: u32,
    target: Option<PrescribedSpectrum>,
    schedule: GenerationSchedule,
    blocks: Vec<BlockVector>,
    origin: Origin,
}

impl MoranMeasure {
    /// The construction for an admissible `σ`, covering generations up to `depth`.
    pub fn build(sigma: &PrescribedSpectrum, depth: u32, config: &MeasureConfig) -> Result<Self, MeasureError> {
        let d = sigma.dim;
        check_depth(depth)?;
        let report = sigma.validate(AdmissibleClass::SdM);
        if !report.passed() {
            let why: Vec<String> = report.failures().iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
            return Err(MeasureError::InvalidSpectrum(why.join("; ")));
        }
        if sigma.is_point() {
            // admissibility pins a point spectrum at α = d
            return Ok(Self::lebesgue(d, depth));
        }
        let factor = if d == 1 { sigma.clone() } else { sigma.factor() };
        let candidates: Vec<u32> = match config.n0 {
            Some(n) => vec![n],
            None => (config.min_n0.max(1)..=MAX_BLOCK_WIDTH).collect(),
        };
        let mut last = MeasureError::NoStartingWidth(MAX_BLOCK_WIDTH);
        for n0 in candidates {
            let schedule = GenerationSchedule::new(n0, config.letters.clone());
            let widths = schedule.widths_up_to(depth as u64);
            let blocks: Result<Vec<_>, _> =
                widths.iter().map(|&w| BlockVector::build(&factor, w, &config.policy)).collect();
            match blocks {
                Ok(blocks) => {
                    return Ok(Self {
                        dim: d,
                        depth,
                        target: Some(sigma.clone()),
                        schedule,
                        blocks,
                        origin: Origin::Prescribed { config: config.clone() },
                    })
                }
                Err(e @ MeasureError::BlockTooWide(_)) => return Err(e),
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    /// Lebesgue measure: every cube of generation `j` has mass `2^{−jd}`.
    pub fn lebesgue(dim: usize, depth: u32) -> Self {
        let mut m = Self::bernoulli(dim, vec![0.5, 0.5], depth).expect("valid weights");
        m.target = Some(PrescribedSpectrum::point(dim, dim as f64));
        m
    }

    /// Homogeneous product of one block of `2^N` weights repeated at every letter.
    pub fn bernoulli(dim: usize, probs: Vec<f64>, depth: u32) -> Result<Self, MeasureError> {
        check_depth(depth)?;
        if dim == 0 {
            return Err(MeasureError::InvalidPolicy("dimension must be positive".into()));
        }
        if !probs.len().is_power_of_two() || probs.len() < 2 {
            return Err(MeasureError::InvalidPolicy("weight count must be a power of two ≥ 2".into()));
        }
        let width = probs.len().trailing_zeros();
        let block = BlockVector::from_probs(width, probs)?;
        Ok(Self {
            dim,
            depth,
            target: None,
            schedule: GenerationSchedule::homogeneous(width),
            blocks: vec![block],
            origin: Origin::Bernoulli,
        })
    }

    pub(crate) fn from_parts(
        dim: usize,
        depth: u32,
        target: Option<PrescribedSpectrum>,
        schedule: GenerationSchedule,
        blocks: Vec<BlockVector>,
        origin: Origin,
    ) -> Self {
        Self { dim, depth, target, schedule, blocks, origin }
    }

    pub(crate) fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn schedule(&self) -> &GenerationSchedule {
        &self.schedule
    }

    /// Block vectors of the one-dimensional factor, one per schedule span in use.
    pub fn blocks(&self) -> &[BlockVector] {
        &self.blocks
    }

    /// The prescribed spectrum, when the measure was built from one.
    pub fn target(&self) -> Option<&PrescribedSpectrum> {
        self.target.as_ref()
    }

    pub fn n0(&self) -> u32 {
        self.schedule.n0
    }

    pub fn audit(&self) -> Vec<BlockAudit> {
        self.blocks
            .iter()
            .map(|b| BlockAudit {
                width: b.width,
                epsilon: b.epsilon,
                mesh_points: b.alphas.len(),
                normalization_defect: b.normalization_defect(),
                count_ratio: b.count_ratio(),
            })
            .collect()
    }

    /// The limiting `L^q`-spectrum: `σ*` for a prescribed measure, the exact
    /// block spectrum for a homogeneous product.
    pub fn tau(&self, t: f64) -> f64 {
        match &self.target {
            Some(s) => s.legendre_exact(t),
            None => self.dim as f64 * self.blocks[0].tau(t),
        }
    }

    /// `[α_min, α_max]` of the limiting spectrum.
    pub fn alpha_range(&self) -> (f64, f64) {
        match &self.target {
            Some(s) => (s.alpha_min(), s.alpha_max()),
            None => {
                let b = &self.blocks[0];
                let lo = b.alphas.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = b.alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (lo * self.dim as f64, hi * self.dim as f64)
            }
        }
    }

    /// `log₂` mass along one coordinate: complete letters contribute their
    /// weight, a cut letter the total weight of its prefix class.
    pub fn log2_mass_1d(&self, j: u32, k: u64) -> f64 {
        let mut acc = 0.0;
        let mut bit = 0u32;
        for (span, block) in self.schedule.spans().iter().zip(&self.blocks) {
            for _ in 0..span.letters {
                if bit >= j {
                    return acc;
                }
                let used = span.width.min(j - bit);
                let shift = j - bit - used;
                let prefix = ((k >> shift) & ((1u64 << used) - 1)) as usize;
                acc += block.log2_prefix_mass(used, prefix);
                bit += used;
            }
        }
        acc
    }

    /// `log₂` masses of all `2^j` one-dimensional cubes of generation `j`.
    pub fn log2_masses_1d(&self, j: u32) -> Vec<f64> {
        let mut out = vec![0.0];
        let mut bit = 0u32;
        'outer: for (span, block) in self.schedule.spans().iter().zip(&self.blocks) {
            for _ in 0..span.letters {
                if bit >= j {
                    break 'outer;
                }
                let used = span.width.min(j - bit);
                let table: Vec<f64> = (0..1usize << used).map(|p| block.log2_prefix_mass(used, p)).collect();
                let mut next = Vec::with_capacity(out.len() << used);
                for &a in &out {
                    next.extend(table.iter().map(|&b| a + b));
                }
                out = next;
                bit += used;
            }
        }
        out
    }
}

fn check_depth(depth: u32) -> Result<(), MeasureError> {
    if depth > MAX_GENERATION {
        return Err(MeasureError::BeyondDepth { requested: depth, budget: MAX_GENERATION });
    }
    Ok(())
}

fn tensor(one: &[f64], d: usize) -> Vec<f64> {
    let mut out = one.to_vec();
    for _ in 1..d {
        let mut next = Vec::with_capacity(out.len() * one.len());
        for &a in &out {
            next.extend(one.iter().map(|&b| a + b));
        }
        out = next;
    }
    out
}

impl CubeMass for MoranMeasure {
    fn dim(&self) -> usize {
        self.dim
    }

    fn depth(&self) -> u32 {
        self.depth
    }

    fn log2_mass(&self, cube: &DyadicCube) -> f64 {
        assert!(cube.j <= self.depth, "generation {} beyond depth {}", cube.j, self.depth);
        cube.k.iter().map(|&k| self.log2_mass_1d(cube.j, k)).sum()
    }

    fn log2_masses(&self, j: u32) -> Vec<f64> {
        assert!(j <= self.depth, "generation {j} beyond depth {}", self.depth);
        tensor(&self.log2_masses_1d(j), self.dim)
    }
}

/// `λ ↦ μ(λ)^s |λ|^ε` with `|λ| = √d 2^{−j}`.
#[derive(Clone, Debug)]
pub struct Environment {
    pub base: MoranMeasure,
    pub power: f64,
    pub tilt: f64,
}

impl Environment {
    pub fn new(base: MoranMeasure, power: f64, tilt: f64) -> Result<Self, MeasureError> {
        if !(power > 0.0) {
            return Err(MeasureError::InvalidPolicy(format!("power {power} must be positive")));
        }
        let (amin, _) = base.alpha_range();
        if tilt <= -power * amin {
            return Err(MeasureError::InvalidPolicy(format!(
                "tilt {tilt} must exceed -s*alpha_min = {}",
                -power * amin
            )));
        }
        Ok(Self { base, power, tilt })
    }

    pub fn plain(base: MoranMeasure) -> Self {
        Self { base, power: 1.0, tilt: 0.0 }
    }

    pub fn with_tilt(&self, tilt: f64) -> Result<Self, MeasureError> {
        Self::new(self.base.clone(), self.power, tilt)
    }

    fn log2_diam(&self, j: u32) -> f64 {
        0.5 * (self.base.dim as f64).log2() - j as f64
    }

    /// `τ(t) = τ_base(st) + εt`.
    pub fn tau(&self, t: f64) -> f64 {
        self.base.tau(self.power * t) + self.tilt * t
    }

    pub fn alpha_range(&self) -> (f64, f64) {
        let (a, b) = self.base.alpha_range();
        (self.power * a + self.tilt, self.power * b + self.tilt)
    }

    /// Limiting spectrum `H ↦ σ((H − ε)/s)`, when the base has a target.
    pub fn spectrum(&self) -> Option<PrescribedSpectrum> {
        self.base.target().map(|s| PrescribedSpectrum {
            dim: s.dim,
            nodes: s.nodes.iter().map(|&(a, v)| (self.power * a + self.tilt, v)).collect(),
        })
    }

    /// `τ*` at `α`: the exact spectrum when available, otherwise
    /// a dense minimization of `tα − τ(t)` over `t ∈ [−64, 64]`.
    pub fn tau_star(&self, alpha: f64) -> f64 {
        if let Some(s) = self.spectrum() {
            return s.eval(alpha);
        }
        let (lo, hi) = self.alpha_range();
        if alpha < lo - 1e-12 || alpha > hi + 1e-12 {
            return f64::NEG_INFINITY;
        }
        (0..=12800)
            .map(|i| -64.0 + i as f64 * 0.01)
            .map(|t| t * alpha - self.tau(t))
            .fold(f64::INFINITY, f64::min)
    }
}

impl CubeMass for Environment {
    fn dim(&self) -> usize {
        self.base.dim
    }

    fn depth(&self) -> u32 {
        self.base.depth
    }

    fn log2_mass(&self, cube: &DyadicCube) -> f64 {
        self.power * self.base.log2_mass(cube) + self.tilt * self.log2_diam(cube.j)
    }

    fn log2_masses(&self, j: u32) -> Vec<f64> {
        let shift = self.tilt * self.log2_diam(j);
        let mut v = self.base.log2_masses(j);
        for x in v.iter_mut() {
            *x = self.power * *x + shift;
        }
        v
    }
}
