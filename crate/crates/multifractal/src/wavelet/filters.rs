//! Minimal-phase Daubechies filters by spectral factorization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::WaveletError;

pub const MAX_ORDER: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Haar,
    Daubechies,
}

/// An orthonormal compactly supported wavelet with `order` vanishing moments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveletSpec {
    pub family: Family,
    pub order: u32,
    /// Analysis low-pass `h`, `Σh = √2`.
    pub low: Vec<f64>,
    /// Analysis high-pass `g_k = (−1)^k h_{L−1−k}`.
    pub high: Vec<f64>,
}

impl WaveletSpec {
    pub fn support_length(&self) -> usize {
        self.low.len()
    }

    /// Haar is orthonormal but not even continuous.
    pub fn diagnostic_only(&self) -> Option<&'static str> {
        (self.family == Family::Haar).then_some("insufficient regularity for leaders formalism")
    }

    /// Largest deviation from `Σ h_k h_{k+2m} = δ_m` and `Σ h_k g_{k+2m} = 0`.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.low.len();
        let mut worst: f64 = 0.0;
        for m in 0..n / 2 {
            let shift = 2 * m;
            let hh: f64 = (0..n - shift).map(|k| self.low[k] * self.low[k + shift]).sum();
            let gg: f64 = (0..n - shift).map(|k| self.high[k] * self.high[k + shift]).sum();
            let want = if m == 0 { 1.0 } else { 0.0 };
            worst = worst.max((hh - want).abs()).max((gg - want).abs());
        }
        for m in -(n as isize / 2)..=(n as isize / 2) {
            let s: f64 = (0..n as isize)
                .filter_map(|k| {
                    let l = k + 2 * m;
                    (0..n as isize).contains(&l).then(|| self.low[k as usize] * self.high[l as usize])
                })
                .sum();
            worst = worst.max(s.abs());
        }
        worst
    }

    /// `max_{m<r} |Σ k^m g_k| / Σ |k^m g_k|`.
    pub fn moment_residual(&self) -> f64 {
        (0..self.order as i32)
            .map(|m| {
                let terms: Vec<f64> = self.high.iter().enumerate().map(|(k, g)| (k as f64).powi(m) * g).collect();
                let scale: f64 = terms.iter().map(|t| t.abs()).sum();
                terms.iter().sum::<f64>().abs() / scale
            })
            .fold(0.0, f64::max)
    }
}

/// Order 1 is Haar; orders 2 to 10 are the minimal-phase Daubechies family
/// with `2r` taps.
pub fn make_wavelet(order: u32) -> Result<WaveletSpec, WaveletError> {
    if order == 0 || order > MAX_ORDER {
        return Err(WaveletError::UnsupportedOrder(order));
    }
    let low = daubechies_low_pass(order);
    let n = low.len();
    let high = (0..n)
        .map(|k| if k % 2 == 0 { low[n - 1 - k] } else { -low[n - 1 - k] })
        .collect();
    let family = if order == 1 { Family::Haar } else { Family::Daubechies };
    Ok(WaveletSpec { family, order, low, high })
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `|H(ω)|² ∝ cos^{2r}(ω/2) P(sin²(ω/2))` with `P(y) = Σ_{k<r} C(r−1+k, k) y^k`.
/// Each root `y` of `P` gives a pair `z, 1/z` of `z + 1/z = 2 − 4y`; the one
/// inside the unit disc is kept.
fn daubechies_low_pass(r: u32) -> Vec<f64> {
    let p: Vec<f64> = (0..r as u64).map(|k| binomial(r as u64 - 1 + k, k)).collect();
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..r {
        poly = mul_linear(&poly, Complex64::new(-1.0, 0.0));
    }
    for y in polynomial_roots(&p) {
        let c = Complex64::new(1.0, 0.0) - 2.0 * y;
        let disc = (c * c - 1.0).sqrt();
        let (z1, z2) = (c + disc, c - disc);
        let z = if z1.norm() < z2.norm() { z1 } else { z2 };
        poly = mul_linear(&poly, z);
    }
    // descending powers, so the largest taps come first
    let mut h: Vec<f64> = poly.iter().rev().map(|c| c.re).collect();
    let sum: f64 = h.iter().sum();
    let scale = std::f64::consts::SQRT_2 / sum;
    h.iter_mut().for_each(|x| *x *= scale);
    h
}

/// `poly · (z − root)`, coefficients in ascending powers.
fn mul_linear(poly: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
    for (i, &c) in poly.iter().enumerate() {
        out[i + 1] += c;
        out[i] -= c * root;
    }
    out
}

fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Durand–Kerner iteration followed by Newton polishing. Coefficients are
/// real and ascending.
fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c / lead, 0.0)).collect();
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for k in 0..n {
                if k != i {
                    denom *= roots[i] - roots[k];
                }
            }
            let step = eval(&monic, roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    let deriv: Vec<Complex64> = monic.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect();
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let d = eval(&deriv, *r);
            if d.norm() > 0.0 {
                *r -= eval(&monic, *r) / d;
            }
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db2_matches_its_closed_form() {
        let w = make_wavelet(2).unwrap();
        let s3 = 3f64.sqrt();
        let norm = 4.0 * std::f64::consts::SQRT_2;
        let want = [(1.0 + s3) / norm, (3.0 + s3) / norm, (3.0 - s3) / norm, (1.0 - s3) / norm];
        for (a, b) in w.low.iter().zip(want) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
        assert!(w.orthonormality_residual() <= 1e-12);
    }

    #[test]
    fn every_order_is_orthonormal_with_vanishing_moments() {
        for r in 1..=MAX_ORDER {
            let w = make_wavelet(r).unwrap();
            assert_eq!(w.support_length(), 2 * r as usize);
            assert!(w.orthonormality_residual() <= 1e-12, "order {r}: {}", w.orthonormality_residual());
            assert!(w.moment_residual() <= 1e-8, "order {r}: {}", w.moment_residual());
        }
    }

    #[test]
    fn haar_is_flagged() {
        assert!(make_wavelet(1).unwrap().diagnostic_only().is_some());
        assert!(make_wavelet(4).unwrap().diagnostic_only().is_none());
        assert!(make_wavelet(0).is_err() && make_wavelet(11).is_err());
    }

    #[test]
    fn db4_first_tap() {
        // published value of the 8-tap minimal-phase filter
        let w = make_wavelet(4).unwrap();
        assert!((w.low[0] - 0.230_377_813_308_896_5).abs() < 1e-12, "{}", w.low[0]);
    }
}
