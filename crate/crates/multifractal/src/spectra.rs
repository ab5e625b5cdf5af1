//! Function-side scaling: `ζ_{μ,p}`, the `θ_p` map, the typical spectrum of
//! `μ`-adapted Besov spaces, and the two inverse problems (rescaling a
//! spectrum into the prescribable class, and the exhaustion map).

use serde::{Deserialize, Serialize};

use crate::convex::{concave_vertices, linspace, AdmissibleClass, CurveKind, Ext, SpectrumCurve};
use crate::measure::{Environment, MeasureConfig, MeasureError, MoranMeasure, PrescribedSpectrum};

/// Integrability exponent `p ∈ [1, ∞]`, with infinity kept as its own case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Integrability {
    Finite(f64),
    Infinite,
}

impl Integrability {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(p) => Some(p),
            Self::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }

    /// `1/p`, zero at infinity.
    pub fn reciprocal(self) -> f64 {
        self.finite().map_or(0.0, |p| 1.0 / p)
    }

    /// Parses `"inf"`, `"∞"` or a number.
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" | "+inf" => Some(Self::Infinite),
            t => t.parse::<f64>().ok().filter(|p| *p > 0.0 && p.is_finite()).map(Self::Finite),
        }
    }
}

impl From<f64> for Integrability {
    /// `f64::INFINITY` maps to [`Integrability::Infinite`].
    fn from(p: f64) -> Self {
        if p.is_infinite() {
            Self::Infinite
        } else {
            Self::Finite(p)
        }
    }
}

impl std::fmt::Display for Integrability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectraError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("precondition failed: {condition} (witness at H = {at}: {value})")]
    Precondition { condition: String, at: f64, value: f64 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Tolerance for subdifferential membership tests.
const SUBDIFF_TOL: f64 = 1e-8;
/// Argument tolerance of the `θ_p` inverse.
const INVERSE_TOL: f64 = 1e-10;

/// A concave piecewise-linear `τ`, extended linearly beyond its outer nodes,
/// together with its Legendre transform and the `θ_p` constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaProfile {
    pub dim: usize,
    pub p: Integrability,
    /// Vertices `(t, τ(t))` of `τ`, increasing in `t`.
    pub tau_nodes: Vec<(f64, f64)>,
    /// Vertices `(α, τ*(α))` of the transform, increasing in `α`.
    pub star_nodes: Vec<(f64, f64)>,
    /// `τ′(+∞)`.
    pub alpha_min: f64,
    /// `τ′(−∞)`.
    pub alpha_max: f64,
    pub alpha_p: f64,
    pub theta_at_alpha_min: f64,
    pub theta_at_alpha_p: f64,
}

impl ZetaProfile {
    /// From samples of `τ`. The concave envelope of the finite samples is used.
    pub fn from_tau(curve: &SpectrumCurve, p: Integrability) -> Result<Self, SpectraError> {
        let pts = curve.finite_points();
        if pts.len() < 2 {
            return Err(SpectraError::InvalidProfile("tau needs at least two finite samples".into()));
        }
        Self::from_nodes(curve.dim, concave_vertices(&pts), p)
    }

    /// From a prescribed spectrum `σ`; `τ = σ*` is exact, with vertices at the
    /// slopes of `σ` and one padding vertex on each side.
    pub fn from_spectrum(sigma: &PrescribedSpectrum, p: Integrability) -> Result<Self, SpectraError> {
        let n = &sigma.nodes;
        let mut ts: Vec<f64> = n.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        ts.sort_by(f64::total_cmp);
        let (lo, hi) = match (ts.first(), ts.last()) {
            (Some(&a), Some(&b)) => (a - 1.0, b + 1.0),
            _ => (-1.0, 1.0),
        };
        ts.push(lo);
        ts.push(hi);
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let nodes: Vec<(f64, f64)> = ts.iter().map(|&t| (t, sigma.legendre_exact(t))).collect();
        Self::from_nodes(sigma.dim, concave_vertices(&nodes), p)
    }

    fn from_nodes(dim: usize, tau_nodes: Vec<(f64, f64)>, p: Integrability) -> Result<Self, SpectraError> {
        if let Integrability::Finite(v) = p {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SpectraError::InvalidProfile(format!("p = {v} is not positive")));
            }
        }
        if tau_nodes.len() < 2 {
            return Err(SpectraError::InvalidProfile("tau needs at least two vertices".into()));
        }
        let slopes: Vec<f64> = tau_nodes
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        let alpha_max = slopes[0];
        let alpha_min = slopes[slopes.len() - 1];
        if alpha_min <= 0.0 {
            return Err(SpectraError::InvalidProfile(format!(
                "tau'(+inf) = {alpha_min} must be positive"
            )));
        }
        // one transform vertex per segment: τ*(s_k) = s_k t_k − τ(t_k)
        let mut star_nodes: Vec<(f64, f64)> = slopes
            .iter()
            .zip(&tau_nodes)
            .map(|(&s, &(t, v))| (s, s * t - v))
            .collect();
        star_nodes.reverse();
        let mut profile = Self {
            dim,
            p,
            tau_nodes,
            star_nodes,
            alpha_min,
            alpha_max,
            alpha_p: alpha_max,
            theta_at_alpha_min: alpha_min,
            theta_at_alpha_p: alpha_max,
        };
        profile.alpha_p = profile.scan_alpha_p();
        profile.theta_at_alpha_min = profile.theta_p(alpha_min);
        profile.theta_at_alpha_p = profile.theta_p(profile.alpha_p);
        Ok(profile)
    }

    /// The same `τ` under another exponent.
    pub fn with_p(&self, p: Integrability) -> Result<Self, SpectraError> {
        Self::from_nodes(self.dim, self.tau_nodes.clone(), p)
    }

    /// `τ(t)` with linear extension.
    pub fn tau(&self, t: f64) -> f64 {
        let n = &self.tau_nodes;
        let i = n.partition_point(|q| q.0 < t).clamp(1, n.len() - 1);
        let (a, b) = (n[i - 1], n[i]);
        a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
    }

    /// `τ*(α)`, `-inf` off `[α_min, α_max]`.
    pub fn tau_star(&self, alpha: f64) -> Ext {
        let n = &self.star_nodes;
        let tol = 1e-12 * (1.0 + alpha.abs());
        if alpha < self.alpha_min - tol || alpha > self.alpha_max + tol {
            return Ext::NegInf;
        }
        if n.len() == 1 {
            return Ext::Finite(n[0].1);
        }
        let x = alpha.clamp(self.alpha_min, self.alpha_max);
        let i = n.partition_point(|q| q.0 < x).clamp(1, n.len() - 1);
        let (a, b) = (n[i - 1], n[i]);
        Ext::Finite(a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0))
    }

    /// `ζ_{μ,p}(t)`.
    pub fn zeta(&self, t: f64) -> f64 {
        let p = match self.p {
            Integrability::Infinite => return self.tau(t),
            Integrability::Finite(p) => p,
        };
        if t >= p {
            return self.alpha_min * t;
        }
        let n = &self.tau_nodes;
        let (first, last) = (n[0], n[n.len() - 1]);
        let scale = (p - t) / p;
        // (p−t)/p · u = t, so the linear tails never multiply by u
        let u = p * t / (p - t);
        if u >= last.0 {
            return scale * (last.1 - self.alpha_min * last.0) + self.alpha_min * t;
        }
        if u <= first.0 {
            return scale * (first.1 - self.alpha_max * first.0) + self.alpha_max * t;
        }
        scale * self.tau(u)
    }

    pub fn zeta_curve(&self, t_grid: &[f64]) -> SpectrumCurve {
        SpectrumCurve::from_fn(CurveKind::Exponent, self.dim, t_grid, |t| self.zeta(t))
    }

    /// `θ_p(α) = α + τ*(α)/p`, identity at `p = ∞`.
    pub fn theta_p(&self, alpha: f64) -> f64 {
        match self.p {
            Integrability::Infinite => alpha,
            Integrability::Finite(p) => alpha + self.tau_star(alpha).to_f64() / p,
        }
    }

    fn scan_alpha_p(&self) -> f64 {
        let p = match self.p {
            Integrability::Infinite => return self.alpha_max,
            Integrability::Finite(p) => p,
        };
        let n = &self.star_nodes;
        let target = -p;
        for i in 0..n.len() {
            let right = if i + 1 < n.len() {
                (n[i + 1].1 - n[i].1) / (n[i + 1].0 - n[i].0)
            } else {
                f64::NEG_INFINITY
            };
            let left = if i > 0 {
                (n[i].1 - n[i - 1].1) / (n[i].0 - n[i - 1].0)
            } else {
                f64::INFINITY
            };
            if right - SUBDIFF_TOL <= target && target <= left + SUBDIFF_TOL {
                return n[i].0;
            }
        }
        self.alpha_max
    }

    /// `θ_p^{-1}` on the increasing branch `[α_min, α_p]`, by bisection.
    pub fn theta_inverse(&self, h: f64) -> Option<f64> {
        let (mut lo, mut hi) = (self.alpha_min, self.alpha_p);
        if h < self.theta_p(lo) - 1e-12 || h > self.theta_p(hi) + 1e-12 {
            return None;
        }
        while hi - lo > INVERSE_TOL {
            let mid = 0.5 * (lo + hi);
            if self.theta_p(mid) < h {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// `ζ*_{μ,p}(H)` by the three-branch formula.
    pub fn zeta_star(&self, h: f64) -> Ext {
        let tol = 1e-12 * (1.0 + h.abs());
        if h < self.alpha_min - tol || h > self.theta_at_alpha_p + tol {
            return Ext::NegInf;
        }
        if let Integrability::Finite(p) = self.p {
            if h < self.theta_at_alpha_min {
                return Ext::Finite(p * (h.max(self.alpha_min) - self.alpha_min));
            }
        }
        match self.theta_inverse(h.clamp(self.theta_at_alpha_min, self.theta_at_alpha_p)) {
            Some(a) => self.tau_star(a),
            None => Ext::NegInf,
        }
    }

    /// `ζ*` on `points` equally spaced exponents of `[α_min, θ_p(α_p)]`.
    pub fn typical_spectrum(&self, points: usize) -> SpectrumCurve {
        let (lo, hi) = (self.alpha_min, self.theta_at_alpha_p);
        let grid = if hi - lo > 1e-12 { linspace(lo, hi, points.max(2)) } else { vec![lo] };
        let values = grid.iter().map(|&h| self.zeta_star(h)).collect();
        SpectrumCurve::new(CurveKind::Spectrum, self.dim, grid, values).expect("increasing grid")
    }

    /// `ζ′(+∞)` and `ζ′(−∞)`.
    pub fn zeta_slopes_at_infinity(&self) -> (f64, f64) {
        (self.alpha_min, self.theta_at_alpha_p)
    }

    /// Outermost vertices of `τ`: beyond them `τ` is linear.
    pub fn linear_thresholds(&self) -> (f64, f64) {
        let n = &self.tau_nodes;
        if n.len() <= 2 {
            return (n[0].0, n[n.len() - 1].0);
        }
        (n[1].0, n[n.len() - 2].0)
    }
}

/// Free-function form of [`ZetaProfile::zeta`].
pub fn zeta_mu_p(profile: &ZetaProfile, t: f64) -> f64 {
    profile.zeta(t)
}

pub fn theta_p(profile: &ZetaProfile, alpha: f64) -> f64 {
    profile.theta_p(alpha)
}

pub fn alpha_p(profile: &ZetaProfile) -> f64 {
    profile.alpha_p
}

pub fn zeta_star_closed_form(profile: &ZetaProfile, h: f64) -> Ext {
    profile.zeta_star(h)
}

pub fn typical_spectrum(profile: &ZetaProfile, points: usize) -> SpectrumCurve {
    profile.typical_spectrum(points)
}

/// Rescaling of an arbitrary admissible spectrum into the prescribable class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrischParisiScale {
    /// The root of `s ↦ inf_H (sH − σ(H))`.
    pub s: f64,
    /// `σ_M(α) = σ(α/s)`.
    pub sigma_m: PrescribedSpectrum,
    /// `inf_H (sH − σ(H))` at the returned root.
    pub residual: f64,
}

impl FrischParisiScale {
    /// Power applied to a measure built for `σ_M` to recover `σ`.
    pub fn power(&self) -> f64 {
        1.0 / self.s
    }

    /// Builds `μ` for `σ_M` and returns the environment `μ^{1/s}`, whose
    /// spectrum is `σ`.
    pub fn environment(&self, depth: u32, config: &MeasureConfig) -> Result<Environment, SpectraError> {
        let base = MoranMeasure::build(&self.sigma_m, depth, config)?;
        Ok(Environment::new(base, self.power(), 0.0)?)
    }
}

fn infimal_gap(sigma: &PrescribedSpectrum, s: f64) -> f64 {
    sigma.legendre_exact(s)
}

pub fn frisch_parisi_scale(sigma: &PrescribedSpectrum) -> Result<FrischParisiScale, SpectraError> {
    let report = sigma.validate(AdmissibleClass::Sd);
    if !report.passed() {
        let what: Vec<String> = report.failures().iter().map(|c| c.detail.clone()).collect();
        return Err(MeasureError::InvalidSpectrum(what.join("; ")).into());
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while infimal_gap(sigma, hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if infimal_gap(sigma, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let s = hi;
    let nodes = sigma.nodes.iter().map(|&(h, v)| (s * h, v)).collect();
    let sigma_m = PrescribedSpectrum::new(sigma.dim, nodes)?;
    Ok(FrischParisiScale { s, sigma_m, residual: infimal_gap(sigma, s) })
}

/// Which branch of the exhaustion map applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum ExhaustionCase {
    /// `p` exceeds every slope of `σ`; `A` is strictly increasing.
    Regular,
    /// `σ` starts with the line `p(H − H_min)` up to `h_tilde_min`, which is collapsed.
    CollapsedSegment { h_tilde_min: f64 },
    /// `σ` is that line on its whole support: the result is a point mass.
    Degenerate { alpha: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionReport {
    pub p: f64,
    pub case: ExhaustionCase,
    /// `A(H) = H − σ(H)/p` at the nodes of `σ` that were kept.
    pub images: Vec<(f64, f64)>,
}

/// `σ̃` such that the typical spectrum of `μ`-adapted spaces with exponent
/// `p` is `σ` whenever `σ_μ = σ̃`.
pub fn exhaustion_map(sigma: &PrescribedSpectrum, p: f64) -> Result<(PrescribedSpectrum, ExhaustionReport), SpectraError> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(SpectraError::InvalidProfile(format!("p = {p} must be finite and positive")));
    }
    let n = &sigma.nodes;
    let (h_min, s_min) = n[0];
    if s_min.abs() > 1e-12 {
        return Err(SpectraError::Precondition {
            condition: "sigma(H_min) = 0".into(),
            at: h_min,
            value: s_min,
        });
    }
    if n.len() < 2 {
        return Err(SpectraError::InvalidProfile("sigma must have a non-trivial support".into()));
    }
    let slope = |i: usize| (n[i + 1].1 - n[i].1) / (n[i + 1].0 - n[i].0);
    let first = slope(0);
    let tol = 1e-9 * p.max(1.0);
    if first > p + tol {
        return Err(SpectraError::Precondition {
            condition: format!("sigma'(H_min+) <= p = {p}"),
            at: h_min,
            value: first,
        });
    }
    let mut kept_from = 0;
    while kept_from + 1 < n.len() && (slope(kept_from) - p).abs() <= tol {
        kept_from += 1;
    }
    let case = if kept_from == 0 {
        ExhaustionCase::Regular
    } else if kept_from + 1 == n.len() {
        ExhaustionCase::Degenerate { alpha: h_min }
    } else {
        ExhaustionCase::CollapsedSegment { h_tilde_min: n[kept_from].0 }
    };
    let images: Vec<(f64, f64)> = n[kept_from..].iter().map(|&(h, v)| (h - v / p, v)).collect();
    let tilde = match case {
        ExhaustionCase::Degenerate { alpha } => {
            let top = n[n.len() - 1].1;
            if (top - sigma.dim as f64).abs() > 1e-9 {
                return Err(SpectraError::Precondition {
                    condition: "maximum of sigma equals d".into(),
                    at: n[n.len() - 1].0,
                    value: top,
                });
            }
            PrescribedSpectrum::point(sigma.dim, alpha)
        }
        _ => PrescribedSpectrum::new(sigma.dim, images.clone())?,
    };
    Ok((tilde, ExhaustionReport { p, case, images }))
}
