//! Periodic orthonormal wavelets on `[0,1)^d`, wavelet leaders and the
//! estimators built on them.

mod estimate;
mod filters;
mod leaders;
mod transform;

pub use estimate::{
    besov_seminorm, leaders_spectrum, pointwise_exponent_estimate, regularity_order, structure_function,
    zeta_f_estimate, BesovNorm, PointwiseEstimate, ZetaEstimate,
};
pub use filters::{make_wavelet, Family, WaveletSpec, MAX_ORDER};
pub use leaders::{leaders, leaders_brute_force, LeaderField};
pub use transform::{analyze, synthesize};

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicCube;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WaveletError {
    #[error("unsupported wavelet order {0} (orders 1 to 10)")]
    UnsupportedOrder(u32),
    #[error("grid of {0} samples is not a power-of-two cube")]
    NotPowerOfTwo(usize),
    #[error("field: {0}")]
    Field(String),
}

/// Coefficients `c_λ = 2^{dj} ∫ f ψ_λ` for `0 ≤ j < levels`, plus the single
/// scaling coefficient of the periodic unit cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveletField {
    pub dim: usize,
    /// `J`: details exist for generations `0..J`.
    pub levels: u32,
    /// Order of the wavelet the field is meant for (informational).
    pub order: u32,
    pub scaling: f64,
    /// `details[j][i−1][k]`, `k` flat row-major over `(2^j)^d` cubes.
    pub details: Vec<Vec<Vec<f64>>>,
}

impl WaveletField {
    pub fn zeros(dim: usize, levels: u32, order: u32) -> Self {
        let details = (0..levels)
            .map(|j| vec![vec![0.0; 1usize << (dim as u32 * j)]; (1usize << dim) - 1])
            .collect();
        Self { dim, levels, order, scaling: 0.0, details }
    }

    pub fn orientations(&self) -> usize {
        (1usize << self.dim) - 1
    }

    pub fn get(&self, i: usize, cube: &DyadicCube) -> f64 {
        self.details[cube.j as usize][i - 1][cube.flat_index()]
    }

    pub fn set(&mut self, i: usize, cube: &DyadicCube, value: f64) {
        self.details[cube.j as usize][i - 1][cube.flat_index()] = value;
    }

    /// Sets `c` for every orientation of `cube`.
    pub fn set_all(&mut self, cube: &DyadicCube, value: f64) {
        let flat = cube.flat_index();
        for band in &mut self.details[cube.j as usize] {
            band[flat] = value;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scaling *= a;
        out.details.iter_mut().flatten().flatten().for_each(|c| *c *= a);
        out
    }

    /// Largest coefficient difference against another field of the same shape.
    pub fn max_difference(&self, other: &Self) -> f64 {
        let mut worst = (self.scaling - other.scaling).abs();
        for (a, b) in self.details.iter().flatten().zip(other.details.iter().flatten()) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }

    pub fn header_json(&self) -> String {
        serde_json::json!({ "dim": self.dim, "levels": self.levels, "order": self.order, "scaling": self.scaling })
            .to_string()
    }

    /// One row `i,j,k_1..k_d,value` per coefficient.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j");
        for c in 1..=self.dim {
            out.push_str(&format!(",k{c}"));
        }
        out.push_str(",value\n");
        for (j, lvl) in self.details.iter().enumerate() {
            for (i, band) in lvl.iter().enumerate() {
                for (flat, &v) in band.iter().enumerate() {
                    let cube = DyadicCube::from_flat_index(j as u32, self.dim, flat);
                    out.push_str(&format!("{},{}", i + 1, j));
                    for k in &cube.k {
                        out.push_str(&format!(",{k}"));
                    }
                    out.push_str(&format!(",{v:?}\n"));
                }
            }
        }
        out
    }

    pub fn from_parts(header: &str, csv: &str) -> Result<Self, WaveletError> {
        let h: serde_json::Value = serde_json::from_str(header).map_err(|e| WaveletError::Field(e.to_string()))?;
        let get = |key: &str| h.get(key).ok_or_else(|| WaveletError::Field(format!("header lacks {key}")));
        let dim = get("dim")?.as_u64().ok_or_else(|| WaveletError::Field("dim".into()))? as usize;
        let levels = get("levels")?.as_u64().ok_or_else(|| WaveletError::Field("levels".into()))? as u32;
        let order = get("order")?.as_u64().ok_or_else(|| WaveletError::Field("order".into()))? as u32;
        let mut field = Self::zeros(dim, levels, order);
        field.scaling = get("scaling")?.as_f64().ok_or_else(|| WaveletError::Field("scaling".into()))?;
        for (n, line) in csv.lines().enumerate().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            let bad = || WaveletError::Field(format!("line {}: {line:?}", n + 1));
            if cols.len() != dim + 3 {
                return Err(bad());
            }
            let i: usize = cols[0].parse().map_err(|_| bad())?;
            let j: u32 = cols[1].parse().map_err(|_| bad())?;
            let k: Vec<i64> = cols[2..2 + dim].iter().map(|c| c.parse()).collect::<Result<_, _>>().map_err(|_| bad())?;
            let v: f64 = cols[dim + 2].parse().map_err(|_| bad())?;
            if i == 0 || i > field.orientations() || j >= levels {
                return Err(bad());
            }
            let cube = DyadicCube::new(j, &k).map_err(|_| bad())?;
            field.set(i, &cube, v);
        }
        Ok(field)
    }
}
