//! Finite-depth estimates for measures: partition functions, large-deviation
//! histograms, local exponents, almost doubling and property (P).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convex::{CurveKind, Ext, SpectrumCurve};
use crate::dyadic::{locate, neighborhood3, DyadicCube};
use crate::measure::CubeMass;

/// Cube counts above which verifiers switch from exhaustive scans to rays.
pub const EXHAUSTIVE_LIMIT: usize = 1 << 24;
pub const SAMPLED_RAYS: usize = 1 << 16;
pub const DEFAULT_BIN_WIDTH: f64 = 0.02;

/// Neumaier-compensated sum in the given order.
fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// `log₂ Σ_λ 2^{t·ℓ_λ}` over precomputed `log₂` masses, without overflow.
pub fn log2_partition_sum(log2_masses: &[f64], t: f64) -> f64 {
    if log2_masses.is_empty() {
        return f64::NEG_INFINITY;
    }
    if t == 0.0 {
        return (log2_masses.len() as f64).log2();
    }
    let (lo, hi) = log2_masses
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let peak = (t * lo).max(t * hi);
    peak + compensated_sum(log2_masses.iter().map(|&l| (t * l - peak).exp2())).log2()
}

/// `t ↦ −(1/j) log₂ Σ_{λ∈𝒟_j} μ(λ)^t` from the `log₂` masses at generation `j`.
pub fn tau_from_masses(log2_masses: &[f64], t_grid: &[f64], j: u32, dim: usize) -> SpectrumCurve {
    assert!(j >= 1, "partition function needs j >= 1");
    SpectrumCurve::from_fn(CurveKind::Exponent, dim, t_grid, |t| {
        -log2_partition_sum(log2_masses, t) / j as f64
    })
}

pub fn empirical_tau<M: CubeMass + ?Sized>(m: &M, t_grid: &[f64], j: u32) -> SpectrumCurve {
    let masses = m.log2_masses(j);
    tau_from_masses(&masses, t_grid, j, m.dim())
}

/// Histogram of the coarse exponents `log₂ μ(λ)/(−j)` over `𝒟_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargeDeviation {
    pub j: u32,
    pub bin_width: f64,
    /// Occupied bins: `(center, count)`, centers on multiples of the width.
    pub bins: Vec<(f64, u64)>,
}

impl LargeDeviation {
    /// `log₂(count)/j` per bin.
    pub fn value(&self, count: u64) -> f64 {
        (count as f64).log2() / self.j as f64
    }

    /// Occupied bins as a spectrum-side curve.
    pub fn curve(&self, dim: usize) -> SpectrumCurve {
        let args = self.bins.iter().map(|b| b.0).collect();
        let values = self.bins.iter().map(|b| Ext::Finite(self.value(b.1))).collect();
        SpectrumCurve::new(CurveKind::Spectrum, dim, args, values).expect("bins are increasing")
    }

    /// Value at the bin containing `alpha`, `-inf` when empty.
    pub fn at(&self, alpha: f64) -> Ext {
        let key = (alpha / self.bin_width).round();
        self.bins
            .iter()
            .find(|b| (b.0 / self.bin_width).round() == key)
            .map_or(Ext::NegInf, |b| Ext::Finite(self.value(b.1)))
    }
}

pub fn large_deviation_from_masses(log2_masses: &[f64], j: u32, bin_width: f64) -> LargeDeviation {
    assert!(j >= 1 && bin_width > 0.0);
    let mut counts = std::collections::BTreeMap::<i64, u64>::new();
    for &l in log2_masses {
        let a = -l / j as f64;
        *counts.entry((a / bin_width).round() as i64).or_default() += 1;
    }
    LargeDeviation {
        j,
        bin_width,
        bins: counts.into_iter().map(|(k, c)| (k as f64 * bin_width, c)).collect(),
    }
}

pub fn large_deviation_spectrum<M: CubeMass + ?Sized>(m: &M, j: u32, bin_width: f64) -> LargeDeviation {
    large_deviation_from_masses(&m.log2_masses(j), j, bin_width)
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Largest absolute residual.
    pub max_residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64], weights: Option<&[f64]>) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "a line fit needs two points");
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let sw: f64 = (0..xs.len()).map(w).sum();
    let mx = (0..xs.len()).map(|i| w(i) * xs[i]).sum::<f64>() / sw;
    let my = (0..xs.len()).map(|i| w(i) * ys[i]).sum::<f64>() / sw;
    let sxx: f64 = (0..xs.len()).map(|i| w(i) * (xs[i] - mx).powi(2)).sum();
    let sxy: f64 = (0..xs.len()).map(|i| w(i) * (xs[i] - mx) * (ys[i] - my)).sum();
    let syy: f64 = (0..xs.len()).map(|i| w(i) * (ys[i] - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = (0..xs.len())
        .map(|i| (ys[i] - slope * xs[i] - intercept).abs())
        .fold(0.0, f64::max);
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    LineFit { slope, intercept, r2, max_residual }
}

/// Least-squares slope of `log₂ μ(λ_j(x))` against `−j` over `j_range`.
pub fn local_exponent<M: CubeMass + ?Sized>(m: &M, x: &[f64], j_range: (u32, u32)) -> LineFit {
    let (lo, hi) = j_range;
    assert!(hi > lo && hi <= m.depth(), "j range must be increasing and within depth");
    let js: Vec<f64> = (lo..=hi).map(|j| -(j as f64)).collect();
    let ys: Vec<f64> = (lo..=hi)
        .map(|j| m.log2_mass(&locate(x, j).expect("point inside the unit cube")))
        .collect();
    fit_line(&js, &ys, None)
}

/// Cubes of generation `j` to test: all of them when affordable, otherwise
/// the cubes hit by seeded uniform rays.
fn test_cubes(dim: usize, j: u32, seed: u64) -> Vec<DyadicCube> {
    let total = 1usize.checked_shl(j * dim as u32).unwrap_or(usize::MAX);
    if j as usize * dim < usize::BITS as usize && total <= EXHAUSTIVE_LIMIT {
        return (0..total).map(|i| DyadicCube::from_flat_index(j, dim, i)).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ j as u64);
    (0..SAMPLED_RAYS)
        .map(|_| {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            locate(&x, j).expect("sample inside the unit cube")
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingRow {
    pub j: u32,
    /// `max ln(μ(3λ)/μ(λ))` over the tested cubes.
    pub phi: f64,
    pub witness: DyadicCube,
    pub exhaustive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub rows: Vec<DoublingRow>,
}

impl DoublingReport {
    /// `φ(j)/j` at the requested generations.
    pub fn ratio_at(&self, j: u32) -> Option<f64> {
        self.rows.iter().find(|r| r.j == j).map(|r| r.phi / j as f64)
    }
}

fn log2_masses_of<M: CubeMass + ?Sized>(m: &M, cubes: &[DyadicCube], all: Option<&[f64]>) -> Vec<f64> {
    match all {
        Some(v) => cubes.iter().map(|c| v[c.flat_index()]).collect(),
        None => cubes.iter().map(|c| m.log2_mass(c)).collect(),
    }
}

pub fn check_almost_doubling<M: CubeMass + ?Sized>(m: &M, depth: u32, seed: u64) -> DoublingReport {
    let d = m.dim();
    let mut rows = Vec::new();
    for j in 0..=depth.min(m.depth()) {
        let cubes = test_cubes(d, j, seed);
        let exhaustive = cubes.len() == 1usize << (j as usize * d);
        let all = exhaustive.then(|| m.log2_masses(j));
        let mut best = (f64::NEG_INFINITY, cubes[0].clone());
        for c in &cubes {
            let own = log2_masses_of(m, std::slice::from_ref(c), all.as_deref())[0];
            // distinct wrapped neighbours only; 3λ is a set
            let mut nb = neighborhood3(c);
            nb.sort();
            nb.dedup();
            let masses = log2_masses_of(m, &nb, all.as_deref());
            let total = crate::measure::log2_sum_exp2(&masses);
            let phi = (total - own) * std::f64::consts::LN_2;
            if phi > best.0 {
                best = (phi, c.clone());
            }
        }
        rows.push(DoublingRow { j, phi: best.0, witness: best.1, exhaustive });
    }
    DoublingReport { rows }
}

/// Per-generation extremes and the fitted (P) constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyPReport {
    pub depth_range: (u32, u32),
    pub s1: f64,
    pub s2: f64,
    /// Smallest `C` with `C^{-1}2^{−js₂} ≤ μ(λ) ≤ C 2^{−js₁}` on every tested cube.
    pub c: f64,
    /// `φ(j)`: largest `log₂ μ(λ̃)/μ(λ)` over touching pairs at generation `j`,
    /// net of `log₂ C`.
    pub phi: Vec<(u32, f64)>,
    /// Worst touching pair per generation.
    pub witnesses: Vec<(DyadicCube, DyadicCube)>,
    /// Set when `φ(j)/j` increases somewhere along the tested letter boundaries.
    pub phi_trend_violated: bool,
}

pub fn check_property_p<M: CubeMass + ?Sized>(m: &M, depth_range: (u32, u32), seed: u64) -> PropertyPReport {
    let d = m.dim();
    let (lo, hi) = (depth_range.0.max(1), depth_range.1.min(m.depth()));
    let mut js = Vec::new();
    let mut max_log = Vec::new();
    let mut min_log = Vec::new();
    let mut pair_max = Vec::new();
    let mut witnesses = Vec::new();
    for j in lo..=hi {
        let cubes = test_cubes(d, j, seed);
        let exhaustive = cubes.len() == 1usize << (j as usize * d);
        let all = exhaustive.then(|| m.log2_masses(j));
        let own = log2_masses_of(m, &cubes, all.as_deref());
        let (mut mx, mut mn) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut worst = (f64::NEG_INFINITY, cubes[0].clone(), cubes[0].clone());
        for (c, &l) in cubes.iter().zip(&own) {
            mx = mx.max(l);
            mn = mn.min(l);
            let nb = neighborhood3(c);
            let nm = log2_masses_of(m, &nb, all.as_deref());
            for (q, &lq) in nb.iter().zip(&nm) {
                if lq - l > worst.0 {
                    worst = (lq - l, q.clone(), c.clone());
                }
            }
        }
        js.push(j as f64);
        max_log.push(mx);
        min_log.push(mn);
        pair_max.push(worst.0);
        witnesses.push((worst.2, worst.1));
    }
    let (s1, s2, c) = if js.len() >= 2 {
        let up = fit_line(&js, &max_log, None);
        let down = fit_line(&js, &min_log, None);
        let (s1, s2) = (-up.slope, -down.slope);
        let c_log = js
            .iter()
            .enumerate()
            .map(|(i, &j)| (max_log[i] + j * s1).max(-(min_log[i] + j * s2)))
            .fold(0.0f64, f64::max);
        (s1, s2, c_log.exp2())
    } else {
        let j = js[0];
        (-max_log[0] / j, -min_log[0] / j, 1.0)
    };
    let log_c = c.log2();
    let phi: Vec<(u32, f64)> =
        js.iter().zip(&pair_max).map(|(&j, &p)| (j as u32, (p - log_c).max(0.0))).collect();
    let ratios: Vec<f64> = phi.iter().filter(|p| p.0 > 0).map(|p| p.1 / p.0 as f64).collect();
    let phi_trend_violated = ratios.windows(2).any(|w| w[1] > w[0] + 1e-12);
    PropertyPReport { depth_range: (lo, hi), s1, s2, c, phi, witnesses, phi_trend_violated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Environment, MeasureConfig, MoranMeasure, PrescribedSpectrum};

    fn binomial(depth: u32) -> MoranMeasure {
        MoranMeasure::bernoulli(1, vec![0.25, 0.75], depth).unwrap()
    }

    fn tau_binomial(t: f64) -> f64 {
        -(0.25f64.powf(t) + 0.75f64.powf(t)).log2()
    }

    #[test]
    fn lebesgue_tau_is_a_line() {
        let m = MoranMeasure::lebesgue(1, 16);
        let c = empirical_tau(&m, &[-2.0, 0.0, 1.0, 3.0], 12);
        let v: Vec<f64> = c.values.iter().map(|v| v.to_f64()).collect();
        assert_eq!(v, vec![-3.0, -1.0, 0.0, 2.0]);
    }

    #[test]
    fn binomial_tau_telescopes() {
        let m = binomial(14);
        let t: Vec<f64> = (-10..=10).map(|i| i as f64 * 0.5).collect();
        for j in [1u32, 7, 14] {
            let c = empirical_tau(&m, &t, j);
            for (i, &tt) in t.iter().enumerate() {
                assert!((c.values[i].to_f64() - tau_binomial(tt)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tau_concave_and_pinned() {
        let s = PrescribedSpectrum::tent(1, (0.8, 0.4), 1.0, (1.2, 0.5)).unwrap();
        let m = MoranMeasure::build(&s, 16, &MeasureConfig::desk()).unwrap();
        let t: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.25).collect();
        let c = empirical_tau(&m, &t, 16);
        let v: Vec<f64> = c.values.iter().map(|v| v.to_f64()).collect();
        for w in v.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-9);
            assert!(w[1] >= w[0]);
        }
        assert!((c.eval(0.0).to_f64() + 1.0).abs() < 1e-12);
        assert!(c.eval(1.0).to_f64().abs() < 1e-12);
    }

    #[test]
    fn power_identity_holds_exactly() {
        let s = PrescribedSpectrum::tent(1, (0.8, 0.4), 1.0, (1.2, 0.5)).unwrap();
        let m = MoranMeasure::build(&s, 14, &MeasureConfig::desk()).unwrap();
        let env = Environment::new(m.clone(), 2.0, 0.0).unwrap();
        let a = empirical_tau(&env, &[1.5], 12).values[0].to_f64();
        let b = empirical_tau(&m, &[3.0], 12).values[0].to_f64();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn large_deviation_lebesgue_and_binomial_counts() {
        let ld = large_deviation_spectrum(&MoranMeasure::lebesgue(1, 10), 10, DEFAULT_BIN_WIDTH);
        assert_eq!(ld.bins.len(), 1);
        assert!((ld.bins[0].0 - 1.0).abs() < 1e-12);
        assert_eq!(ld.value(ld.bins[0].1), 1.0);
        // a cube with k ones among 12 bits has exponent (24 − k log2 3 ... )/12
        let ld = large_deviation_spectrum(&binomial(12), 12, 1e-3);
        let mut want: Vec<(f64, u64)> = (0..=12u64)
            .map(|k| {
                let alpha = -((k as f64) * 0.75f64.log2() + (12 - k) as f64 * 0.25f64.log2()) / 12.0;
                (alpha, binom(12, k))
            })
            .collect();
        want.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(ld.bins.len(), 13);
        for (got, w) in ld.bins.iter().zip(&want) {
            assert_eq!(got.1, w.1);
            assert!((got.0 - w.0).abs() <= 5e-4);
        }
        let total: u64 = ld.bins.iter().map(|b| b.1).sum();
        assert_eq!(total, 1 << 12);
    }

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn local_exponent_of_lebesgue_is_one() {
        let fit = local_exponent(&MoranMeasure::lebesgue(1, 20), &[0.3], (5, 20));
        assert_eq!(fit.slope, 1.0);
        assert!(fit.max_residual < 1e-12);
    }

    #[test]
    fn zero_ray_matches_corner_product() {
        let s = PrescribedSpectrum::tent(1, (0.8, 0.4), 1.0, (1.2, 0.5)).unwrap();
        let m = MoranMeasure::build(&s, 18, &MeasureConfig::desk()).unwrap();
        for j in m.schedule().boundaries_up_to(18) {
            let direct: f64 = m
                .schedule()
                .letters_for(j)
                .iter()
                .map(|&(b, _, _)| m.blocks()[b].prob(0).log2())
                .sum();
            let got = m.log2_mass(&locate(&[0.0], j as u32).unwrap());
            assert!((got - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn lebesgue_is_exactly_doubling() {
        let r = check_almost_doubling(&MoranMeasure::lebesgue(1, 12), 12, 1);
        for row in &r.rows[2..] {
            assert!((row.phi - 3f64.ln()).abs() < 1e-12);
        }
        let p = check_property_p(&MoranMeasure::lebesgue(2, 8), (1, 8), 1);
        assert!((p.s1 - 2.0).abs() < 1e-12 && (p.s2 - 2.0).abs() < 1e-12);
        assert!(p.phi.iter().all(|&(_, f)| f == 0.0));
    }

    #[test]
    fn tilt_shifts_holder_exponents() {
        let s = PrescribedSpectrum::tent(1, (0.8, 0.4), 1.0, (1.2, 0.5)).unwrap();
        let m = MoranMeasure::build(&s, 16, &MeasureConfig::desk()).unwrap();
        let base = check_property_p(&m, (4, 16), 3);
        let env = Environment::new(m, 1.0, -0.05).unwrap();
        let tilted = check_property_p(&env, (4, 16), 3);
        assert!((tilted.s1 - (base.s1 - 0.05)).abs() < 1e-9);
        assert!((tilted.s2 - (base.s2 - 0.05)).abs() < 1e-9);
    }
}
