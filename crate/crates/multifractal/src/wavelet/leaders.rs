use serde::{Deserialize, Serialize};

use super::WaveletField;
use crate::dyadic::{neighborhood3, DyadicCube};

/// `L_λ = sup{|c_{λ′}| : λ′ ⊂ 3λ}` for every cube of generations `0..J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeaderField {
    pub dim: usize,
    /// `values[j][k]`, `k` flat row-major.
    pub values: Vec<Vec<f64>>,
    /// `N` of the reference domain `N[0,1)^d`. Periodic fields tile it, so
    /// sums over it are `N^d` times the unit-cell sums.
    pub domain: u32,
}

impl LeaderField {
    pub fn levels(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn get(&self, cube: &DyadicCube) -> f64 {
        self.values[cube.j as usize][cube.flat_index()]
    }

    /// `log₂ N^d`, the offset between domain and unit-cell sums.
    pub fn log2_tiling(&self) -> f64 {
        self.dim as f64 * (self.domain.max(1) as f64).log2()
    }
}

/// Bottom-up: the largest coefficient inside each cube and its descendants,
/// then the maximum of that over the `3^d` neighbours.
pub fn leaders(field: &WaveletField, domain: u32) -> LeaderField {
    let d = field.dim;
    let levels = field.levels as usize;
    let mut inside: Vec<Vec<f64>> = Vec::with_capacity(levels);
    for j in (0..levels).rev() {
        let n = 1usize << (d * j);
        let mut own: Vec<f64> = (0..n)
            .map(|k| field.details[j].iter().map(|band| band[k].abs()).fold(0.0, f64::max))
            .collect();
        if let Some(finer) = inside.last() {
            for (k, slot) in own.iter_mut().enumerate() {
                let cube = DyadicCube::from_flat_index(j as u32, d, k);
                for child in cube.children() {
                    *slot = slot.max(finer[child.flat_index()]);
                }
            }
        }
        inside.push(own);
    }
    inside.reverse();
    let values = inside
        .iter()
        .enumerate()
        .map(|(j, own)| {
            (0..own.len())
                .map(|k| {
                    let cube = DyadicCube::from_flat_index(j as u32, d, k);
                    neighborhood3(&cube).iter().map(|c| own[c.flat_index()]).fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();
    LeaderField { dim: d, values, domain }
}

/// Direct supremum over every coefficient whose cube lies in `3λ`, with the
/// periodic wrap. Exponential cost: test oracle for small fields.
pub fn leaders_brute_force(field: &WaveletField, domain: u32) -> LeaderField {
    let d = field.dim;
    let levels = field.levels;
    let mut values = Vec::new();
    for j in 0..levels {
        let side = 1i64 << j;
        let mut row = Vec::new();
        for k in 0..1usize << (d as u32 * j) {
            let lam = DyadicCube::from_flat_index(j, d, k);
            let mut best: f64 = 0.0;
            for jp in j..levels {
                for kp in 0..1usize << (d as u32 * jp) {
                    let other = DyadicCube::from_flat_index(jp, d, kp);
                    let near = other.k.iter().zip(&lam.k).all(|(&a, &b)| {
                        let up = (a >> (jp - j)) as i64;
                        let diff = (up - b as i64).rem_euclid(side);
                        diff == 0 || diff == 1 || diff == side - 1
                    });
                    if near {
                        for i in 1..=field.orientations() {
                            best = best.max(field.get(i, &other).abs());
                        }
                    }
                }
            }
            row.push(best);
        }
        values.push(row);
    }
    LeaderField { dim: d, values, domain }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(d: usize, levels: u32, seed: u64) -> WaveletField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = WaveletField::zeros(d, levels, 2);
        for v in f.details.iter_mut().flatten().flatten() {
            *v = rng.gen_range(-1.0..1.0) * (-(rng.gen_range(0.0..6.0f64))).exp2();
        }
        f
    }

    #[test]
    fn dynamic_program_equals_brute_force() {
        for seed in 0..5 {
            let f = random_field(1, 6, seed);
            assert_eq!(leaders(&f, 1), leaders_brute_force(&f, 1));
            let f = random_field(2, 4, seed);
            assert_eq!(leaders(&f, 1), leaders_brute_force(&f, 1));
        }
    }

    #[test]
    fn single_atom() {
        let mut f = WaveletField::zeros(1, 8, 2);
        let atom = DyadicCube::new(6, &[20]).unwrap();
        f.set(1, &atom, -0.75);
        let l = leaders(&f, 1);
        for j in 0..8u32 {
            for k in 0..1u64 << j {
                let lam = DyadicCube::new(j, &[k as i64]).unwrap();
                let covered = j <= 6 && neighborhood3(&lam).iter().any(|n| atom.is_within(n));
                let want = if covered { 0.75 } else { 0.0 };
                assert_eq!(l.get(&lam), want, "({j},{k})");
            }
        }
    }
}
