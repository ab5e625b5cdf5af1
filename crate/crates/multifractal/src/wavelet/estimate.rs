//! Leader-based estimators and the environment-weighted Besov semi-norm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{LeaderField, WaveletError, WaveletField};
use crate::analysis::{fit_line, log2_partition_sum, LineFit};
use crate::convex::{legendre, CurveKind, Ext, SpectrumCurve};
use crate::dyadic::locate;
use crate::measure::CubeMass;
use crate::spectra::Integrability;

fn positive_log2(values: &[f64]) -> Vec<f64> {
    values.iter().filter(|&&v| v > 0.0).map(|v| v.log2()).collect()
}

/// `log₂ Σ_{λ ⊂ N[0,1)^d, L_λ > 0} L_λ^t`, `None` when every leader vanishes.
fn log2_leader_sum(lf: &LeaderField, logs: &[f64], t: f64) -> Option<f64> {
    (!logs.is_empty()).then(|| log2_partition_sum(logs, t) + lf.log2_tiling())
}

/// `ζ_{f,j}(t) = −(1/j) log₂ Σ L_λ^t` at one generation.
pub fn structure_function(lf: &LeaderField, t_grid: &[f64], j: u32) -> Result<SpectrumCurve, WaveletError> {
    if j == 0 || j >= lf.levels() {
        return Err(WaveletError::Field(format!("generation {j} outside 1..{}", lf.levels())));
    }
    let logs = positive_log2(&lf.values[j as usize]);
    let values = t_grid
        .iter()
        .map(|&t| log2_leader_sum(lf, &logs, t).map_or(Ext::NegInf, |s| Ext::Finite(-s / j as f64)))
        .collect();
    SpectrumCurve::new(CurveKind::Exponent, lf.dim, t_grid.to_vec(), values).map_err(|e| WaveletError::Field(e.to_string()))
}

/// Regression estimate of the scaling function across generations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaEstimate {
    pub curve: SpectrumCurve,
    /// Coefficient of determination per `t`.
    pub r2: Vec<f64>,
    pub j_range: (u32, u32),
    /// Generations in range where every leader vanished.
    pub empty_levels: Vec<u32>,
}

/// `[J/2, J−2]` for leaders of generations `0..J`.
pub fn default_j_range(levels: u32) -> (u32, u32) {
    ((levels / 2).max(1), levels.saturating_sub(2).max(levels / 2 + 1))
}

/// Per `t`, the slope of `log₂ Σ L_λ^t` against `−j` over `j_range`, equal weights.
pub fn zeta_f_estimate(lf: &LeaderField, t_grid: &[f64], j_range: Option<(u32, u32)>) -> Result<ZetaEstimate, WaveletError> {
    let (lo, hi) = j_range.unwrap_or_else(|| default_j_range(lf.levels()));
    if lo == 0 || hi <= lo || hi >= lf.levels() {
        return Err(WaveletError::Field(format!("j range [{lo}, {hi}] outside 1..{}", lf.levels())));
    }
    let logs: Vec<(u32, Vec<f64>)> = (lo..=hi).map(|j| (j, positive_log2(&lf.values[j as usize]))).collect();
    let empty_levels: Vec<u32> = logs.iter().filter(|(_, l)| l.is_empty()).map(|(j, _)| *j).collect();
    let usable: Vec<&(u32, Vec<f64>)> = logs.iter().filter(|(_, l)| !l.is_empty()).collect();
    let fits: Vec<Option<LineFit>> = t_grid
        .par_iter()
        .map(|&t| {
            if usable.len() < 2 {
                return None;
            }
            let xs: Vec<f64> = usable.iter().map(|(j, _)| -(*j as f64)).collect();
            let ys: Vec<f64> = usable.iter().map(|(_, l)| log2_leader_sum(lf, l, t).expect("non-empty")).collect();
            Some(fit_line(&xs, &ys, None))
        })
        .collect();
    let values = fits.iter().map(|f| f.map_or(Ext::NegInf, |f| Ext::Finite(f.slope))).collect();
    let r2 = fits.iter().map(|f| f.map_or(f64::NAN, |f| f.r2)).collect();
    let curve = SpectrumCurve::new(CurveKind::Exponent, lf.dim, t_grid.to_vec(), values)
        .map_err(|e| WaveletError::Field(e.to_string()))?;
    Ok(ZetaEstimate { curve, r2, j_range: (lo, hi), empty_levels })
}

/// Legendre transform of [`zeta_f_estimate`] on `h_grid`.
pub fn leaders_spectrum(
    lf: &LeaderField,
    t_grid: &[f64],
    j_range: Option<(u32, u32)>,
    h_grid: &[f64],
) -> Result<SpectrumCurve, WaveletError> {
    let est = zeta_f_estimate(lf, t_grid, j_range)?;
    legendre(&est.curve, h_grid).map_err(|e| WaveletError::Field(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseEstimate {
    pub fit: Option<LineFit>,
    /// The leaders are constant over the last three generations of the range.
    pub plateau: bool,
    pub zero_levels: Vec<u32>,
}

impl PointwiseEstimate {
    pub fn exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Slope of `log₂ L_{λ_j(x)}` against `−j`.
pub fn pointwise_exponent_estimate(lf: &LeaderField, x: &[f64], j_range: (u32, u32)) -> PointwiseEstimate {
    let (lo, hi) = j_range;
    let hi = hi.min(lf.levels().saturating_sub(1));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut raw = Vec::new();
    let mut zero_levels = Vec::new();
    for j in lo..=hi {
        let cube = locate(x, j).expect("point inside the unit cube");
        let l = lf.get(&cube);
        raw.push(l);
        if l > 0.0 {
            xs.push(-(j as f64));
            ys.push(l.log2());
        } else {
            zero_levels.push(j);
        }
    }
    let plateau = raw.len() >= 3 && raw[raw.len() - 3..].windows(2).all(|w| w[0] == w[1] && w[0] > 0.0);
    let fit = (xs.len() >= 2).then(|| fit_line(&xs, &ys, None));
    PointwiseEstimate { fit, plateau, zero_levels }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovNorm {
    pub value: f64,
    /// `ε_j = ‖(c_λ/μ(λ))_{λ∈Λ_j}‖_p` for `j = 0..J`.
    pub per_level: Vec<f64>,
}

fn lp_norm(values: impl Iterator<Item = f64>, p: Integrability) -> f64 {
    match p {
        Integrability::Infinite => values.map(f64::abs).fold(0.0, f64::max),
        Integrability::Finite(p) => values.map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

/// `‖(ε_j)_j‖_{ℓ^q}` with `ε_j` the `ℓ^p` norm of `c_λ/μ(λ)` over `Λ_j`.
pub fn besov_seminorm<M: CubeMass + ?Sized>(field: &WaveletField, env: &M, p: Integrability, q: Integrability) -> BesovNorm {
    assert!(env.depth() + 1 >= field.levels, "environment shallower than the field");
    assert_eq!(env.dim(), field.dim);
    let per_level: Vec<f64> = (0..field.levels)
        .map(|j| {
            let masses = env.log2_masses(j);
            let bands = &field.details[j as usize];
            lp_norm(
                bands.iter().flat_map(|band| band.iter().zip(&masses).map(|(c, m)| c * (-m).exp2())),
                p,
            )
        })
        .collect();
    let value = lp_norm(per_level.iter().copied(), q);
    BesovNorm { value, per_level }
}

/// `s_μ = ⌊τ′(−∞) + d/p⌋ + 1`, capped at the largest tabulated order.
pub fn regularity_order(alpha_max: f64, dim: usize, p: Integrability) -> u32 {
    let s = (alpha_max + dim as f64 * p.reciprocal()).floor() as i64 + 1;
    s.clamp(1, super::MAX_ORDER as i64) as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::grid_step;
    use crate::dyadic::DyadicCube;
    use crate::measure::{Environment, MoranMeasure};
    use crate::wavelet::leaders;

    fn lebesgue_leaders(h0: f64, levels: u32) -> LeaderField {
        LeaderField {
            dim: 1,
            values: (0..levels).map(|j| vec![(-(j as f64) * h0).exp2(); 1 << j]).collect(),
            domain: 1,
        }
    }

    #[test]
    fn monofractal_structure_function() {
        let lf = lebesgue_leaders(0.7, 12);
        let t = grid_step(-3.0, 3.0, 0.5);
        for j in 1..12 {
            let c = structure_function(&lf, &t, j).unwrap();
            for (i, &tt) in t.iter().enumerate() {
                assert!((c.values[i].to_f64() - (0.7 * tt - 1.0)).abs() < 1e-12);
            }
        }
        let h = grid_step(0.5, 0.9, 0.05);
        let s = leaders_spectrum(&lf, &t, None, &h).unwrap();
        for (i, &hh) in h.iter().enumerate() {
            let v = s.values[i];
            if (hh - 0.7).abs() < 1e-9 {
                assert!((v.to_f64() - 1.0).abs() < 1e-9);
            } else {
                assert_eq!(v, Ext::NegInf, "H = {hh}");
            }
        }
        let p = pointwise_exponent_estimate(&lf, &[0.3], (4, 11));
        assert!((p.exponent().unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn binomial_leaders_telescope() {
        let m = MoranMeasure::bernoulli(1, vec![0.25, 0.75], 14).unwrap();
        let lf = LeaderField {
            dim: 1,
            values: (0..14).map(|j| m.log2_masses(j).iter().map(|l| l.exp2()).collect()).collect(),
            domain: 1,
        };
        let t = grid_step(-3.0, 3.0, 0.25);
        let est = zeta_f_estimate(&lf, &t, Some((4, 13))).unwrap();
        for (i, &tt) in t.iter().enumerate() {
            let want = -(0.25f64.powf(tt) + 0.75f64.powf(tt)).log2();
            assert!((est.curve.values[i].to_f64() - want).abs() < 1e-3);
        }
    }

    #[test]
    fn t_zero_counts_positive_leaders() {
        let mut f = WaveletField::zeros(1, 6, 2);
        f.set(1, &DyadicCube::new(5, &[3]).unwrap(), 1.0);
        let lf = leaders(&f, 1);
        let c = structure_function(&lf, &[0.0], 5).unwrap();
        assert!((c.values[0].to_f64() + 3f64.log2() / 5.0).abs() < 1e-15);
        let empty = structure_function(&leaders(&WaveletField::zeros(1, 6, 2), 1), &[0.0, 1.0], 3).unwrap();
        assert!(empty.values.iter().all(|v| *v == Ext::NegInf));
    }

    #[test]
    fn single_atom_reaches_a_plateau() {
        let mut f = WaveletField::zeros(1, 12, 2);
        f.set(1, &DyadicCube::new(4, &[5]).unwrap(), 0.5);
        let lf = leaders(&f, 1);
        let est = pointwise_exponent_estimate(&lf, &[5.5 / 16.0], (1, 4));
        assert!(est.plateau);
        assert!(est.exponent().unwrap().abs() < 1e-12);
    }

    #[test]
    fn one_term_norm() {
        let mut f = WaveletField::zeros(1, 6, 2);
        f.set(1, &DyadicCube::new(3, &[5]).unwrap(), 1.0);
        let env = MoranMeasure::lebesgue(1, 6);
        let n = besov_seminorm(&f, &env, Integrability::Finite(2.0), Integrability::Finite(1.0));
        assert_eq!(n.value, 8.0);
        let zero = besov_seminorm(&WaveletField::zeros(1, 6, 2), &env, Integrability::Infinite, Integrability::Infinite);
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn norm_is_homogeneous_and_tilt_monotone() {
        let mut f = WaveletField::zeros(1, 8, 2);
        for (j, lvl) in f.details.iter_mut().enumerate() {
            for (k, c) in lvl[0].iter_mut().enumerate() {
                *c = ((k * 7 + j) % 5) as f64 - 2.0;
            }
        }
        let m = MoranMeasure::bernoulli(1, vec![0.3, 0.7], 8).unwrap();
        let env = Environment::plain(m);
        let (p, q) = (Integrability::Finite(2.0), Integrability::Finite(3.0));
        let base = besov_seminorm(&f, &env, p, q);
        assert_eq!(besov_seminorm(&f.scaled(4.0), &env, p, q).value, 4.0 * base.value);
        let minus = besov_seminorm(&f, &env.with_tilt(-0.1).unwrap(), p, q);
        let plus = besov_seminorm(&f, &env.with_tilt(0.1).unwrap(), p, q);
        for j in 0..8 {
            assert!(minus.per_level[j] <= base.per_level[j] && base.per_level[j] <= plus.per_level[j]);
        }
    }

    #[test]
    fn order_from_the_profile() {
        assert_eq!(regularity_order(1.2, 1, Integrability::Infinite), 2);
        assert_eq!(regularity_order(1.2, 1, Integrability::Finite(1.0)), 3);
        assert_eq!(regularity_order(40.0, 1, Integrability::Infinite), 10);
    }
}
