//! Probability vectors `p_N` on the `2^N` letters of width `N`.

use serde::{Deserialize, Serialize};

use super::spectrum::PrescribedSpectrum;
use super::MeasureError;

/// Widest letter for which the full vector is materialized.
pub const MAX_BLOCK_WIDTH: u32 = 24;

/// How the shift `ε_N` in the letter counts is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsilonRule {
    /// `ε_N = 2 log₂(N)/N`.
    Asymptotic,
    /// Smallest `ε = k/(16N)`, `k ≥ 0`, for which the counts close up: every
    /// count positive and the non-dominant counts at most `2^{N−2}`.
    Minimal,
    Fixed { epsilon: f64 },
}

/// Free parameters of the finite-`N` construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPolicy {
    pub epsilon: EpsilonRule,
    /// Target mesh step times `N`; must lie in `(1/4, 1)`.
    pub pitch: f64,
}

impl Default for BlockPolicy {
    fn default() -> Self {
        Self { epsilon: EpsilonRule::Asymptotic, pitch: 0.5 }
    }
}

impl BlockPolicy {
    pub fn desk() -> Self {
        Self { epsilon: EpsilonRule::Minimal, pitch: 0.5 }
    }
}

/// Letter exponents and counts for one block width.
///
/// The first half of the mesh is stored; the second half mirrors it, so the
/// letter exponents run `α_1 … α_m α_m … α_1` with multiplicities `R_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockVector {
    pub width: u32,
    pub alphas: Vec<f64>,
    pub counts: Vec<u64>,
    pub epsilon: f64,
    /// Index of `D` in `alphas`.
    pub i_d: usize,
    /// Index of `D′`; the dominant count lives here.
    pub i_dprime: usize,
    /// `log₂ Σ_i 2^{−Nβ_i}`.
    pub log2_norm: f64,
    #[serde(skip)]
    tables: Tables,
}

#[derive(Clone, Debug, Default, PartialEq)]
struct Tables {
    probs: Vec<f64>,
    log2_probs: Vec<f64>,
    /// `groups[r][b]`: total mass of the letters whose top `r` bits equal `b`.
    groups: Vec<Vec<f64>>,
}

impl BlockVector {
    /// The construction for one width: mesh, counts and normalized weights.
    pub fn build(sigma: &PrescribedSpectrum, width: u32, policy: &BlockPolicy) -> Result<Self, MeasureError> {
        if sigma.dim != 1 {
            return Err(MeasureError::InvalidSpectrum("block vectors are one-dimensional".into()));
        }
        if width > MAX_BLOCK_WIDTH {
            return Err(MeasureError::BlockTooWide(width));
        }
        if !(0.25 < policy.pitch && policy.pitch < 1.0) {
            return Err(MeasureError::InvalidPolicy(format!("pitch {} outside (1/4, 1)", policy.pitch)));
        }
        if sigma.is_point() {
            let alpha = sigma.alpha_min();
            return Ok(Self::homogeneous(width, alpha));
        }
        let (d, dp) = sigma.anchors()?;
        let n = width as f64;
        match policy.epsilon {
            EpsilonRule::Asymptotic => Self::with_epsilon(sigma, width, policy.pitch, 2.0 * n.log2() / n, d, dp),
            EpsilonRule::Fixed { epsilon } => Self::with_epsilon(sigma, width, policy.pitch, epsilon, d, dp),
            EpsilonRule::Minimal => {
                let step = 1.0 / (16.0 * n);
                let mut last = None;
                for k in 0..(16 * width) {
                    match Self::with_epsilon(sigma, width, policy.pitch, k as f64 * step, d, dp) {
                        Ok(v) => return Ok(v),
                        Err(e) => last = Some(e),
                    }
                }
                Err(last.unwrap_or(MeasureError::WidthTooSmall { width, reason: "no epsilon".into() }))
            }
        }
    }

    /// Uniform weights `2^{−N}` for a point spectrum at `α = 1`; a point
    /// spectrum elsewhere has no probability-vector realization.
    pub fn homogeneous(width: u32, alpha: f64) -> Self {
        let half = 1u64 << (width - 1);
        let mut v = Self {
            width,
            alphas: vec![alpha],
            counts: vec![half],
            epsilon: 0.0,
            i_d: 0,
            i_dprime: 0,
            log2_norm: 0.0,
            tables: Tables::default(),
        };
        v.finish();
        v
    }

    /// Weights given directly, one per letter. Used for Bernoulli-type products.
    pub fn from_probs(width: u32, probs: Vec<f64>) -> Result<Self, MeasureError> {
        if probs.len() != 1usize << width {
            return Err(MeasureError::InvalidPolicy(format!(
                "expected {} weights, got {}",
                1usize << width,
                probs.len()
            )));
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&p| !(p > 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(MeasureError::InvalidPolicy("weights must be positive and sum to 1".into()));
        }
        let n = width as f64;
        let alphas: Vec<f64> = probs.iter().map(|p| -p.log2() / n).collect();
        let log2_probs: Vec<f64> = probs.iter().map(|p| p.log2()).collect();
        let mut v = Self {
            width,
            alphas,
            counts: vec![1; probs.len()],
            epsilon: 0.0,
            i_d: 0,
            i_dprime: 0,
            log2_norm: 0.0,
            tables: Tables { probs, log2_probs, groups: Vec::new() },
        };
        v.tables.groups = group_sums(&v.tables.probs, width);
        Ok(v)
    }

    fn with_epsilon(
        sigma: &PrescribedSpectrum,
        width: u32,
        pitch: f64,
        eps: f64,
        d: f64,
        dp: f64,
    ) -> Result<Self, MeasureError> {
        let n = width as f64;
        let fail = |reason: String| MeasureError::WidthTooSmall { width, reason };
        let (a, b) = sigma
            .superlevel(1.0 / n + eps)
            .ok_or_else(|| fail(format!("superlevel {} is empty", 1.0 / n + eps)))?;
        let mesh = build_mesh(a, b, d, dp, width, pitch).ok_or_else(|| fail("mesh spacing constraints".into()))?;
        let i_d = mesh.iter().position(|&x| x == d).ok_or_else(|| fail("D not in mesh".into()))?;
        let i_dp = mesh.iter().position(|&x| x == dp).ok_or_else(|| fail("D' not in mesh".into()))?;
        let half = 1u64 << (width - 1);
        let mut counts = vec![0u64; mesh.len()];
        for (i, &x) in mesh.iter().enumerate() {
            if i == i_d || i == i_dp {
                continue;
            }
            counts[i] = floor_exp2(n * (sigma.eval(x) - eps) - 1.0);
            if counts[i] == 0 {
                return Err(fail(format!("empty count at alpha = {x}")));
            }
        }
        if i_d != i_dp {
            counts[i_d] = floor_exp2(n * d - 1.0);
            if counts[i_d] == 0 {
                return Err(fail("empty count at D".into()));
            }
        }
        let others: u64 = counts.iter().enumerate().filter(|&(i, _)| i != i_dp).map(|(_, &c)| c).sum();
        if others > half / 2 {
            return Err(fail(format!("margin: {others} > 2^(N-2)")));
        }
        counts[i_dp] = half - others;
        let mut v = Self {
            width,
            alphas: mesh,
            counts,
            epsilon: eps,
            i_d,
            i_dprime: i_dp,
            log2_norm: 0.0,
            tables: Tables::default(),
        };
        v.finish();
        Ok(v)
    }

    /// Normalization and lookup tables from `alphas`/`counts`.
    fn finish(&mut self) {
        let n = self.width as f64;
        // log₂ Z with Z = 2 Σ R_i 2^{−Nα_i}
        let terms: Vec<f64> = self
            .alphas
            .iter()
            .zip(&self.counts)
            .map(|(&a, &r)| 1.0 + (r as f64).log2() - n * a)
            .collect();
        self.log2_norm = log2_sum_exp2(&terms);
        let letters = self.betas();
        let log2_probs: Vec<f64> = letters.iter().map(|&b| -n * b - self.log2_norm).collect();
        let probs: Vec<f64> = log2_probs.iter().map(|&l| l.exp2()).collect();
        let groups = group_sums(&probs, self.width);
        self.tables = Tables { probs, log2_probs, groups };
    }

    /// A block from stored mesh data; the weights are recomputed.
    pub fn from_parts(
        width: u32,
        alphas: Vec<f64>,
        counts: Vec<u64>,
        epsilon: f64,
        i_d: usize,
        i_dprime: usize,
    ) -> Result<Self, MeasureError> {
        if width == 0 || width > MAX_BLOCK_WIDTH {
            return Err(MeasureError::BlockTooWide(width));
        }
        if alphas.len() != counts.len() || i_d >= alphas.len() || i_dprime >= alphas.len() {
            return Err(MeasureError::InvalidPolicy("inconsistent mesh data".into()));
        }
        if counts.iter().sum::<u64>() != 1u64 << (width - 1) {
            return Err(MeasureError::InvalidPolicy("counts must sum to 2^(N-1)".into()));
        }
        let mut v = Self { width, alphas, counts, epsilon, i_d, i_dprime, log2_norm: 0.0, tables: Tables::default() };
        v.finish();
        Ok(v)
    }

    /// True for blocks given letter by letter rather than by mesh and counts.
    pub fn is_explicit(&self) -> bool {
        self.alphas.len() == self.letters() && self.counts.iter().all(|&c| c == 1)
    }

    /// Weight of a single letter at each mesh exponent.
    pub fn mesh_probs(&self) -> Vec<f64> {
        let n = self.width as f64;
        self.alphas.iter().map(|&a| (-n * a - self.log2_norm).exp2()).collect()
    }

    /// Rebuilds the lookup tables after deserialization.
    pub fn rebuild_tables(&mut self) {
        if self.is_explicit() {
            let n = self.width as f64;
            let probs: Vec<f64> = self.alphas.iter().map(|a| (-n * a).exp2()).collect();
            let log2_probs = self.alphas.iter().map(|a| -n * a).collect();
            let groups = group_sums(&probs, self.width);
            self.tables = Tables { probs, log2_probs, groups };
        } else {
            self.finish();
        }
    }

    /// Number of letters, `2^N`.
    pub fn letters(&self) -> usize {
        1usize << self.width
    }

    /// Letter exponents `β_0 … β_{2^N−1}`.
    pub fn betas(&self) -> Vec<f64> {
        if self.is_explicit() {
            return self.alphas.clone();
        }
        let mut out = Vec::with_capacity(self.letters());
        for (a, &r) in self.alphas.iter().zip(&self.counts) {
            out.extend(std::iter::repeat_n(*a, r as usize));
        }
        for (a, &r) in self.alphas.iter().zip(&self.counts).rev() {
            out.extend(std::iter::repeat_n(*a, r as usize));
        }
        out
    }

    /// Full multiplicity list `R_1 … R_{2m}` including the mirrored half.
    pub fn mirrored_counts(&self) -> Vec<u64> {
        let mut out = self.counts.clone();
        out.extend(self.counts.iter().rev());
        out
    }

    pub fn probs(&self) -> &[f64] {
        &self.tables.probs
    }

    pub fn log2_probs(&self) -> &[f64] {
        &self.tables.log2_probs
    }

    pub fn prob(&self, letter: usize) -> f64 {
        self.tables.probs[letter]
    }

    /// Mass of the letters sharing the top `bits` bits `prefix`.
    pub fn prefix_mass(&self, bits: u32, prefix: usize) -> f64 {
        if bits == self.width {
            self.tables.probs[prefix]
        } else {
            self.tables.groups[bits as usize][prefix]
        }
    }

    pub fn log2_prefix_mass(&self, bits: u32, prefix: usize) -> f64 {
        if bits == self.width {
            self.tables.log2_probs[prefix]
        } else {
            self.tables.groups[bits as usize][prefix].log2()
        }
    }

    /// Largest `|p_i 2^{Nβ_i} − 1|`; tends to zero like `1/N` in the limit.
    pub fn normalization_defect(&self) -> f64 {
        (-self.log2_norm).exp2() - 1.0
    }

    /// `max_i R_i/(2^{N−1}N^{−2})` over the non-anchor counts.
    pub fn count_ratio(&self) -> f64 {
        let n = self.width as f64;
        let cap = (n - 1.0).exp2() / (n * n);
        self.counts
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.i_d && i != self.i_dprime)
            .map(|(_, &c)| c as f64 / cap)
            .fold(0.0, f64::max)
    }

    /// `L^q` spectrum of the block: `−(1/N) log₂ Σ_i p_i^t`.
    pub fn tau(&self, t: f64) -> f64 {
        let n = self.width as f64;
        let terms: Vec<f64> = if self.is_explicit() {
            self.tables.log2_probs.iter().map(|&l| t * l).collect()
        } else {
            self.alphas
                .iter()
                .zip(&self.counts)
                .map(|(&a, &r)| 1.0 + (r as f64).log2() + t * (-n * a - self.log2_norm))
                .collect()
        };
        -log2_sum_exp2(&terms) / n
    }
}

/// Mesh on `[a, b]` through the anchors: each gap between consecutive knots
/// is cut uniformly with step at most `pitch/N`. Knots closer than `1/(4N)`
/// to an anchor are merged into it.
fn build_mesh(a: f64, b: f64, d: f64, dp: f64, width: u32, pitch: f64) -> Option<Vec<f64>> {
    let n = width as f64;
    let min_gap = 1.0 / (4.0 * n);
    let (a, b) = (a.min(d), b.max(dp));
    let mut knots = vec![d, dp];
    if d - a > min_gap + 1e-12 {
        knots.insert(0, a);
    }
    if b - dp > min_gap + 1e-12 {
        knots.push(b);
    }
    knots.dedup();
    let mut mesh = vec![knots[0]];
    for w in knots.windows(2) {
        let len = w[1] - w[0];
        if len <= min_gap {
            return None;
        }
        let pieces = ((len * n / pitch) - 1e-9).ceil().max(1.0) as usize;
        for k in 1..pieces {
            mesh.push(w[0] + len * k as f64 / pieces as f64);
        }
        mesh.push(w[1]);
    }
    let ok = mesh.windows(2).all(|w| {
        let gap = w[1] - w[0];
        gap > min_gap - 1e-12 && gap < 1.0 / n
    });
    ok.then_some(mesh)
}

/// `⌊2^x⌋`, forgiving rounding noise at integer `x`: superlevel endpoints
/// sit exactly where the exponent is zero.
fn floor_exp2(x: f64) -> u64 {
    (x + 1e-9).exp2().floor() as u64
}

/// `groups[r][b]` for `r < width`, summed pairwise from the leaves.
fn group_sums(probs: &[f64], width: u32) -> Vec<Vec<f64>> {
    let mut levels: Vec<Vec<f64>> = vec![Vec::new(); width as usize];
    let mut cur = probs.to_vec();
    for r in (0..width as usize).rev() {
        cur = cur.chunks(2).map(|c| c[0] + c[1]).collect();
        levels[r] = cur.clone();
    }
    levels
}

/// `log₂ Σ 2^{x_i}` without overflow.
pub fn log2_sum_exp2(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp2()).sum::<f64>().log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent() -> PrescribedSpectrum {
        PrescribedSpectrum::tent(1, (0.8, 0.4), 1.0, (1.2, 0.5)).unwrap()
    }

    #[test]
    fn counts_close_up_and_mirror() {
        for n in 5..=12 {
            let v = BlockVector::build(&tent(), n, &BlockPolicy::desk()).unwrap();
            assert_eq!(v.mirrored_counts().iter().sum::<u64>(), 1u64 << n);
            let total: f64 = v.probs().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert_eq!(v.probs()[0], v.probs()[v.letters() - 1]);
            for w in v.probs().windows(2) {
                let r = w[0] / w[1];
                assert!((0.5..=2.0).contains(&r), "neighbor ratio {r} at N={n}");
            }
        }
    }

    #[test]
    fn asymptotic_epsilon_keeps_a_thin_superlevel() {
        // at N = 8, 1/N + 2 log2(N)/N = 0.875 leaves only exponents near the peak
        let v = BlockVector::build(&tent(), 8, &BlockPolicy::default()).unwrap();
        assert!(v.alphas.iter().all(|&a| (0.95..=1.06).contains(&a)), "{:?}", v.alphas);
        let w = BlockVector::build(&tent(), 8, &BlockPolicy::desk()).unwrap();
        assert!(w.epsilon < v.epsilon && w.alphas.len() > v.alphas.len());
    }

    #[test]
    fn straight_line_reimplementation() {
        // independent transcription of the count formula for σ = min(2(α−0.4), 1.5α−0.5, 4(1.25−α))
        let sigma = PrescribedSpectrum::new(1, vec![(0.4, 0.0), (0.6, 0.4), (1.0, 1.0), (1.25, 0.0)]).unwrap();
        // σ(1) = 1 so D = D' = 1 at the peak
        let policy = BlockPolicy { epsilon: EpsilonRule::Fixed { epsilon: 0.25 }, pitch: 0.5 };
        let v = BlockVector::build(&sigma, 8, &policy).unwrap();
        let n = 8.0f64;
        let s = |a: f64| (2.0 * (a - 0.4)).min(1.5 * a - 0.5).min(4.0 * (1.25 - a));
        let mut total = 0u64;
        for (i, &a) in v.alphas.iter().enumerate() {
            if i == v.i_dprime {
                continue;
            }
            let r = (n * (s(a) - 0.25) - 1.0 + 1e-9).exp2().floor() as u64;
            assert_eq!(v.counts[i], r, "alpha {a}");
            total += r;
        }
        assert_eq!(v.counts[v.i_dprime], 128 - total);
        let z: f64 = v.betas().iter().map(|b| (-n * b).exp2()).sum();
        for (i, b) in v.betas().iter().enumerate() {
            assert!(((-n * b).exp2() / z - v.prob(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn prefix_masses_sum_blocks() {
        let v = BlockVector::from_probs(2, vec![0.1, 0.4, 0.4, 0.1]).unwrap();
        assert!((v.prefix_mass(1, 0) - 0.5).abs() < 1e-15);
        assert!((v.prefix_mass(1, 1) - 0.5).abs() < 1e-15);
        assert!((v.prefix_mass(0, 0) - 1.0).abs() < 1e-15);
        assert_eq!(v.prefix_mass(2, 1), 0.4);
    }

    #[test]
    fn lebesgue_block_is_uniform() {
        let v = BlockVector::build(&PrescribedSpectrum::point(1, 1.0), 6, &BlockPolicy::default()).unwrap();
        assert!(v.probs().iter().all(|&p| (p - 1.0 / 64.0).abs() < 1e-18));
        assert!(v.tau(3.0) - 2.0 < 1e-12);
    }

    #[test]
    fn block_tau_at_one_and_zero() {
        let v = BlockVector::build(&tent(), 9, &BlockPolicy::desk()).unwrap();
        assert!(v.tau(1.0).abs() < 1e-12);
        assert!((v.tau(0.0) + 1.0).abs() < 1e-12);
    }
}
