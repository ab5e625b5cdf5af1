//! Dyadic cubes of `[0,1)^d` and the letter schedule that codes generations
//! of a Moran construction.
//!
//! Coordinates are stored as unsigned integers at a fixed generation, so at
//! most [`MAX_GENERATION`] bits per coordinate are available.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Deepest generation representable per coordinate.
pub const MAX_GENERATION: u32 = 62;

/// Half-open dyadic cube `2^{-j}(k + [0,1)^d)`, coordinates reduced mod `2^j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub j: u32,
    pub k: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DyadicError {
    #[error("generation {0} exceeds the {MAX_GENERATION}-bit coordinate limit")]
    GenerationOverflow(u32),
    #[error("coordinate {0} is outside [0, 1)")]
    OutsideUnitCube(f64),
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

impl DyadicCube {
    /// Builds a cube, reducing every coordinate periodically.
    pub fn new(j: u32, k: &[i64]) -> Result<Self, DyadicError> {
        if j > MAX_GENERATION {
            return Err(DyadicError::GenerationOverflow(j));
        }
        if k.is_empty() {
            return Err(DyadicError::ZeroDimension);
        }
        let modulus = 1i128 << j;
        let k = k
            .iter()
            .map(|&c| (c as i128).rem_euclid(modulus) as u64)
            .collect();
        Ok(Self { j, k })
    }

    pub fn root(d: usize) -> Self {
        Self { j: 0, k: vec![0; d] }
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn side(&self) -> f64 {
        (-(self.j as f64)).exp2()
    }

    /// Lower-left corner.
    pub fn corner(&self) -> Vec<f64> {
        let s = self.side();
        self.k.iter().map(|&c| c as f64 * s).collect()
    }

    pub fn parent(&self) -> Option<Self> {
        if self.j == 0 {
            return None;
        }
        Some(Self {
            j: self.j - 1,
            k: self.k.iter().map(|c| c >> 1).collect(),
        })
    }

    /// Ancestor at generation `g <= j`.
    pub fn ancestor(&self, g: u32) -> Self {
        assert!(g <= self.j, "ancestor generation above cube generation");
        let shift = self.j - g;
        Self {
            j: g,
            k: self.k.iter().map(|c| c >> shift).collect(),
        }
    }

    /// The `2^d` children, in row-major order of the child offsets.
    pub fn children(&self) -> Vec<Self> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| Self {
                j: self.j + 1,
                k: (0..d)
                    .map(|i| (self.k[i] << 1) | ((mask >> (d - 1 - i)) & 1) as u64)
                    .collect(),
            })
            .collect()
    }

    /// True when `self` is contained in `other` (same or coarser generation).
    pub fn is_within(&self, other: &Self) -> bool {
        other.j <= self.j && self.ancestor(other.j) == *other
    }

    /// Flat row-major index among the `2^{jd}` cubes of generation `j`.
    pub fn flat_index(&self) -> usize {
        self.k
            .iter()
            .fold(0usize, |acc, &c| (acc << self.j) | c as usize)
    }

    pub fn from_flat_index(j: u32, d: usize, mut idx: usize) -> Self {
        let mask = (1usize << j) - 1;
        let mut k = vec![0u64; d];
        for c in k.iter_mut().rev() {
            *c = (idx & mask) as u64;
            idx >>= j;
        }
        Self { j, k }
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(j={}, k={:?})", self.j, self.k)
    }
}

/// The cube of generation `j` containing `x` (left-closed convention).
pub fn locate(x: &[f64], j: u32) -> Result<DyadicCube, DyadicError> {
    if j > MAX_GENERATION {
        return Err(DyadicError::GenerationOverflow(j));
    }
    if x.is_empty() {
        return Err(DyadicError::ZeroDimension);
    }
    let scale = (j as f64).exp2();
    let mut k = Vec::with_capacity(x.len());
    for &c in x {
        if !(0.0..1.0).contains(&c) {
            return Err(DyadicError::OutsideUnitCube(c));
        }
        k.push(((c * scale).floor() as u64).min((1u64 << j) - 1));
    }
    Ok(DyadicCube { j, k })
}

/// The `3^d` cubes of the same generation touching `cube`, wrapped periodically.
///
/// For `j = 0` the wrap collapses every neighbour onto the root; the list still
/// has `3^d` entries so callers can rely on its length.
pub fn neighborhood3(cube: &DyadicCube) -> Vec<DyadicCube> {
    let d = cube.dim();
    let n = 3usize.pow(d as u32);
    let modulus = 1i128 << cube.j;
    let mut out = Vec::with_capacity(n);
    for code in 0..n {
        let mut rest = code;
        let mut k = vec![0u64; d];
        for i in (0..d).rev() {
            let off = (rest % 3) as i128 - 1;
            rest /= 3;
            k[i] = (cube.k[i] as i128 + off).rem_euclid(modulus) as u64;
        }
        out.push(DyadicCube { j: cube.j, k });
    }
    out
}

/// Coarsest representation `k̄ 2^{-j̄}` of the corner `k 2^{-j}`.
///
/// The zero corner has no odd representative and maps to the root.
pub fn irreducible(cube: &DyadicCube) -> DyadicCube {
    let combined = cube.k.iter().fold(0u64, |acc, &c| acc | c);
    if combined == 0 {
        return DyadicCube::root(cube.dim());
    }
    let shift = combined.trailing_zeros().min(cube.j);
    DyadicCube {
        j: cube.j - shift,
        k: cube.k.iter().map(|c| c >> shift).collect(),
    }
}

/// How many letters each block of width `N` carries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LetterRule {
    /// `ℓ_N = N²`, the smallest growth the limit theory allows.
    Squares,
    /// Same number of letters in every block. Finite-depth schedule only.
    Constant { letters: u64 },
    /// Explicit counts for `N0, N0+1, ...`; the last entry repeats.
    Explicit { letters: Vec<u64> },
}

impl LetterRule {
    fn letters(&self, n0: u32, width: u32) -> u64 {
        match self {
            LetterRule::Squares => (width as u64) * (width as u64),
            LetterRule::Constant { letters } => *letters,
            LetterRule::Explicit { letters } => {
                let idx = (width - n0) as usize;
                *letters.get(idx).or(letters.last()).unwrap_or(&1)
            }
        }
    }
}

/// One block of the schedule: `letters` consecutive letters of `width` bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSpan {
    pub width: u32,
    pub letters: u64,
    /// Generation at which the block starts.
    pub start_bit: u64,
    /// Number of letters completed before the block.
    pub start_letter: u64,
}

impl BlockSpan {
    pub fn end_bit(&self) -> u64 {
        self.start_bit + self.width as u64 * self.letters
    }
}

/// Result of [`GenerationSchedule::split_generation`]: `j = γ(letters) + residual`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenerationSplit {
    pub letters: u64,
    pub width: u32,
    pub residual: u32,
    pub block: usize,
}

/// Concatenation schedule `ℓ_{N0}` letters of width `N0`, then `ℓ_{N0+1}` of
/// width `N0+1`, and so on; or a single width repeated forever.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationSchedule {
    pub n0: u32,
    pub rule: LetterRule,
    /// Widths stay at `n0` forever when set.
    pub homogeneous: bool,
    spans: Vec<BlockSpan>,
}

impl GenerationSchedule {
    /// Growing schedule starting at width `n0`, tabulated past [`MAX_GENERATION`].
    pub fn new(n0: u32, rule: LetterRule) -> Self {
        assert!(n0 >= 1, "block width must be positive");
        let mut spans = Vec::new();
        let (mut bit, mut letter, mut width) = (0u64, 0u64, n0);
        while bit <= MAX_GENERATION as u64 {
            let letters = rule.letters(n0, width).max(1);
            spans.push(BlockSpan {
                width,
                letters,
                start_bit: bit,
                start_letter: letter,
            });
            bit += width as u64 * letters;
            letter += letters;
            width += 1;
        }
        Self {
            n0,
            rule,
            homogeneous: false,
            spans,
        }
    }

    /// A single block width repeated at every letter (Bernoulli-type products).
    pub fn homogeneous(width: u32) -> Self {
        assert!(width >= 1, "block width must be positive");
        let letters = (MAX_GENERATION as u64) / width as u64 + 1;
        Self {
            n0: width,
            rule: LetterRule::Constant { letters },
            homogeneous: true,
            spans: vec![BlockSpan {
                width,
                letters,
                start_bit: 0,
                start_letter: 0,
            }],
        }
    }

    pub fn spans(&self) -> &[BlockSpan] {
        &self.spans
    }

    /// True when `ℓ_N ≥ N²` and `ℓ_N` is non-decreasing, as the limit theory asks.
    pub fn satisfies_growth(&self) -> bool {
        !self.homogeneous
            && self
                .spans
                .iter()
                .all(|s| s.letters >= (s.width as u64).pow(2))
            && self.spans.windows(2).all(|w| w[0].letters <= w[1].letters)
    }

    /// Bit generation reached after `g` letters.
    pub fn gamma(&self, g: u64) -> u64 {
        let idx = self
            .spans
            .partition_point(|s| s.start_letter + s.letters <= g)
            .min(self.spans.len() - 1);
        let s = &self.spans[idx];
        s.start_bit + (g - s.start_letter) * s.width as u64
    }

    /// Inverse of [`gamma`](Self::gamma) with a residual prefix of the next letter.
    pub fn split_generation(&self, j: u64) -> GenerationSplit {
        let idx = self
            .spans
            .partition_point(|s| s.end_bit() <= j)
            .min(self.spans.len() - 1);
        let s = &self.spans[idx];
        let inside = j - s.start_bit;
        let done = inside / s.width as u64;
        GenerationSplit {
            letters: s.start_letter + done,
            width: s.width,
            residual: (inside % s.width as u64) as u32,
            block: idx,
        }
    }

    /// All letter boundaries `γ(g) ≤ max_j`, with `γ(0) = 0` omitted.
    pub fn boundaries_up_to(&self, max_j: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut g = 1;
        loop {
            let b = self.gamma(g);
            if b > max_j {
                break;
            }
            out.push(b);
            g += 1;
        }
        out
    }

    /// Distinct widths used by generations `< depth`.
    pub fn widths_up_to(&self, depth: u64) -> Vec<u32> {
        self.spans
            .iter()
            .filter(|s| s.start_bit < depth.max(1))
            .map(|s| s.width)
            .collect()
    }

    /// Walks the letters covering generations `0..j`: `(block index, width, bits used)`.
    /// The last entry has `bits used < width` when `j` cuts a letter.
    pub fn letters_for(&self, j: u64) -> Vec<(usize, u32, u32)> {
        let mut out = Vec::new();
        let mut bit = 0u64;
        for (b, s) in self.spans.iter().enumerate() {
            if bit >= j {
                break;
            }
            for _ in 0..s.letters {
                if bit >= j {
                    break;
                }
                let used = (j - bit).min(s.width as u64) as u32;
                out.push((b, s.width, used));
                bit += used as u64;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sched_2_4_9() -> GenerationSchedule {
        GenerationSchedule::new(2, LetterRule::Explicit { letters: vec![4, 9, 16] })
    }

    #[test]
    fn locate_examples() {
        assert_eq!(locate(&[0.0], 3).unwrap().k, vec![0]);
        assert_eq!(locate(&[0.625], 2).unwrap().k, vec![2]);
        let c = locate(&[0.3, 0.8], 4).unwrap();
        assert_eq!(c.k, vec![4, 12]);
        // brute-force containment scan over all 2^8 cubes
        let hits: Vec<_> = (0..256usize)
            .map(|i| DyadicCube::from_flat_index(4, 2, i))
            .filter(|q| {
                let lo = q.corner();
                (0..2).all(|a| [0.3, 0.8][a] >= lo[a] && [0.3, 0.8][a] < lo[a] + q.side())
            })
            .collect();
        assert_eq!(hits, vec![c]);
        assert!(locate(&[1.0], 2).is_err());
        assert!(locate(&[0.5], 63).is_err());
    }

    #[test]
    fn neighborhood_examples() {
        let ks = |c: DyadicCube| neighborhood3(&c).into_iter().map(|q| q.k[0]).collect::<Vec<_>>();
        assert_eq!(ks(DyadicCube::new(2, &[0]).unwrap()), vec![3, 0, 1]);
        assert_eq!(ks(DyadicCube::new(3, &[4]).unwrap()), vec![3, 4, 5]);
    }

    #[test]
    fn neighborhood_matches_boundary_contact_in_2d() {
        // wrapped cubes touch when every coordinate differs by at most one, mod 2^j
        for j in 1..4u32 {
            let m = 1u64 << j;
            for idx in 0..(1usize << (2 * j)) {
                let c = DyadicCube::from_flat_index(j, 2, idx);
                let mut got: Vec<_> = neighborhood3(&c);
                got.sort();
                got.dedup();
                let mut want: Vec<_> = (0..(1usize << (2 * j)))
                    .map(|i| DyadicCube::from_flat_index(j, 2, i))
                    .filter(|q| {
                        (0..2).all(|a| {
                            let diff = (q.k[a] + m - c.k[a]) % m;
                            diff <= 1 || diff == m - 1
                        })
                    })
                    .collect();
                want.sort();
                assert_eq!(got, want);
            }
        }
        assert_eq!(neighborhood3(&DyadicCube::root(2)).len(), 9);
    }

    #[test]
    fn irreducible_examples() {
        let r = |j, k| irreducible(&DyadicCube::new(j, &[k]).unwrap());
        assert_eq!(r(3, 5), DyadicCube::new(3, &[5]).unwrap());
        assert_eq!(r(3, 4), DyadicCube::new(1, &[1]).unwrap());
        assert_eq!(r(5, 0), DyadicCube::root(1));
        let two = irreducible(&DyadicCube::new(5, &[20, 8]).unwrap());
        assert_eq!(two, DyadicCube::new(3, &[5, 2]).unwrap());
    }

    #[test]
    fn gamma_examples() {
        let s = sched_2_4_9();
        assert_eq!(s.gamma(4), 8);
        assert_eq!(s.gamma(5), 11);
        assert_eq!(s.gamma(13), 35);
        let running: u64 = [2u64; 4].iter().sum::<u64>() + [3u64; 9].iter().sum::<u64>();
        assert_eq!(running, 35);
    }

    #[test]
    fn split_examples() {
        let s = sched_2_4_9();
        let t = s.split_generation(8);
        assert_eq!((t.letters, t.width, t.residual), (4, 3, 0));
        let t = s.split_generation(7);
        assert_eq!((t.letters, t.width, t.residual), (3, 2, 1));
        let t = s.split_generation(20);
        assert_eq!((t.letters, t.width, t.residual), (8, 3, 0));
        // linear scan for the largest g with γ(g) <= 20
        let g = (0..40).filter(|&g| s.gamma(g) <= 20).max().unwrap();
        assert_eq!(g, 8);
    }

    #[test]
    fn growth_flags() {
        assert!(GenerationSchedule::new(3, LetterRule::Squares).satisfies_growth());
        assert!(!GenerationSchedule::new(3, LetterRule::Constant { letters: 1 }).satisfies_growth());
        assert!(!GenerationSchedule::homogeneous(1).satisfies_growth());
    }

    #[test]
    fn letters_for_cuts_the_last_letter() {
        let s = sched_2_4_9();
        let l = s.letters_for(9);
        assert_eq!(l.len(), 5);
        assert_eq!(l[4], (1, 3, 1));
        let h = GenerationSchedule::homogeneous(1);
        assert_eq!(h.letters_for(20).len(), 20);
        assert_eq!(h.split_generation(20).letters, 20);
    }
}
