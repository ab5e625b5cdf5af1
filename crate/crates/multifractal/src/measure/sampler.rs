use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::moran::MoranMeasure;
use super::{CubeMass, MeasureError};
use crate::dyadic::GenerationSchedule;

/// Draws points typical for the auxiliary measure at exponent `α`: letter by
/// letter, uniformly among the odd letters whose exponent is within `1/N` of
/// the target.
#[derive(Clone, Debug)]
pub struct AuxiliarySampler {
    alpha: f64,
    dim: usize,
    depth: u32,
    schedule: GenerationSchedule,
    /// Allowed letters per schedule span, for the one-dimensional factor.
    letters: Vec<Vec<u32>>,
    rng: ChaCha8Rng,
}

impl AuxiliarySampler {
    /// `alpha` is on the scale of the `d`-dimensional measure; each coordinate
    /// uses the factor exponent `α/d`.
    pub fn new(measure: &MoranMeasure, alpha: f64, seed: u64) -> Result<Self, MeasureError> {
        let d = measure.dim();
        let (lo, hi) = measure.alpha_range();
        if alpha < lo - 1e-12 || alpha > hi + 1e-12 {
            return Err(MeasureError::InvalidPolicy(format!("alpha {alpha} outside [{lo}, {hi}]")));
        }
        let a = alpha / d as f64;
        let mut letters = Vec::new();
        for block in measure.blocks() {
            let n = block.width;
            let tol = 1.0 / n as f64 + 1e-12;
            let set: Vec<u32> = block
                .betas()
                .iter()
                .enumerate()
                .filter(|&(i, b)| i % 2 == 1 && (b - a).abs() <= tol)
                .map(|(i, _)| i as u32)
                .collect();
            if set.is_empty() {
                return Err(MeasureError::EmptyLetterSet { alpha, width: n });
            }
            letters.push(set);
        }
        Ok(Self {
            alpha,
            dim: d,
            depth: measure.depth(),
            schedule: measure.schedule().clone(),
            letters,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `#𝒥_{N,α}` for every block in use.
    pub fn letter_counts(&self) -> Vec<(u32, usize)> {
        self.schedule
            .spans()
            .iter()
            .zip(&self.letters)
            .map(|(s, l)| (s.width, l.len()))
            .collect()
    }

    /// An independent sampler whose stream is derived from this one's seed.
    pub fn fork(&mut self) -> Self {
        let seed = self.rng.gen();
        let mut other = self.clone();
        other.rng = ChaCha8Rng::seed_from_u64(seed);
        other
    }

    fn coordinate(&mut self) -> f64 {
        let mut x = 0.0;
        let mut bit = 0u32;
        'outer: for (span, set) in self.schedule.spans().iter().zip(&self.letters) {
            for _ in 0..span.letters {
                if bit >= self.depth {
                    break 'outer;
                }
                let letter = set[self.rng.gen_range(0..set.len())];
                bit += span.width;
                x += letter as f64 * (-(bit as f64)).exp2();
            }
        }
        // fill finer bits uniformly
        x + self.rng.gen::<f64>() * (-(bit as f64)).exp2()
    }

    /// One point of `[0,1)^d`.
    pub fn draw(&mut self) -> Vec<f64> {
        (0..self.dim).map(|_| self.coordinate().min(1.0 - f64::EPSILON)).collect()
    }

    pub fn draw_many(&mut self, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.draw()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebesgue_sampler_uses_every_odd_letter() {
        let m = MoranMeasure::lebesgue(1, 20);
        let mut s = AuxiliarySampler::new(&m, 1.0, 7).unwrap();
        assert_eq!(s.letter_counts()[0], (1, 1));
        let x = s.draw();
        assert!((0.0..1.0).contains(&x[0]));
    }

    #[test]
    fn deterministic_under_seed() {
        let m = MoranMeasure::lebesgue(2, 20);
        let a = AuxiliarySampler::new(&m, 2.0, 42).unwrap().draw_many(5);
        let b = AuxiliarySampler::new(&m, 2.0, 42).unwrap().draw_many(5);
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_exponent_outside_support() {
        let m = MoranMeasure::lebesgue(1, 10);
        assert!(AuxiliarySampler::new(&m, 1.5, 0).is_err());
    }
}
