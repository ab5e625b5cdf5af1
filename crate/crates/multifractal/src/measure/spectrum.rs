//! Target spectra for the measure construction.

use crate::convex::{
    legendre, validate_admissible, AdmissibilityReport, AdmissibleClass, CurveKind, Ext, SpectrumCurve,
};
use serde::{Deserialize, Serialize};

use super::MeasureError;

/// A concave, piecewise-linear `σ` on `[α_min, α_max]`, given by its nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrescribedSpectrum {
    pub dim: usize,
    /// Nodes `(α, σ(α))`, strictly increasing in `α`.
    pub nodes: Vec<(f64, f64)>,
}

impl PrescribedSpectrum {
    pub fn new(dim: usize, nodes: Vec<(f64, f64)>) -> Result<Self, MeasureError> {
        if nodes.is_empty() {
            return Err(MeasureError::InvalidSpectrum("no nodes".into()));
        }
        SpectrumCurve::from_points(CurveKind::Spectrum, dim, &nodes)
            .map_err(|e| MeasureError::InvalidSpectrum(e.to_string()))?;
        Ok(Self { dim, nodes })
    }

    /// Everything at a single exponent: `σ(α) = d` at `α` only.
    pub fn point(dim: usize, alpha: f64) -> Self {
        Self { dim, nodes: vec![(alpha, dim as f64)] }
    }

    /// Tent through `(lo, left)`, `(peak, d)`, `(hi, right)`.
    pub fn tent(dim: usize, lo: (f64, f64), peak: f64, hi: (f64, f64)) -> Result<Self, MeasureError> {
        Self::new(dim, vec![lo, (peak, dim as f64), hi])
    }

    pub fn from_curve(curve: &SpectrumCurve) -> Result<Self, MeasureError> {
        Self::new(curve.dim, curve.finite_points())
    }

    pub fn curve(&self) -> SpectrumCurve {
        SpectrumCurve::from_points(CurveKind::Spectrum, self.dim, &self.nodes).expect("validated nodes")
    }

    /// The curve resampled on a uniform grid of the given pitch (nodes kept).
    pub fn sampled(&self, pitch: f64) -> SpectrumCurve {
        let (lo, hi) = (self.alpha_min(), self.alpha_max());
        let mut args: Vec<f64> = if hi > lo {
            let n = ((hi - lo) / pitch).ceil() as usize;
            (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
        } else {
            vec![lo]
        };
        args.extend(self.nodes.iter().map(|n| n.0));
        args.sort_by(f64::total_cmp);
        args.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let values = args.iter().map(|&a| Ext::Finite(self.eval(a))).collect();
        SpectrumCurve::new(CurveKind::Spectrum, self.dim, args, values).expect("sorted grid")
    }

    pub fn alpha_min(&self) -> f64 {
        self.nodes[0].0
    }

    pub fn alpha_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].0
    }

    pub fn is_point(&self) -> bool {
        self.nodes.len() == 1 || self.alpha_max() - self.alpha_min() < 1e-12
    }

    /// `σ(α)`, `-inf` outside the support.
    pub fn eval(&self, alpha: f64) -> f64 {
        self.curve().eval(alpha).to_f64()
    }

    /// The piecewise-linear minimum of the slopes is attained at nodes, so the
    /// transform over nodes is exact.
    pub fn legendre_exact(&self, t: f64) -> f64 {
        self.nodes
            .iter()
            .map(|&(a, s)| t * a - s)
            .fold(f64::INFINITY, f64::min)
    }

    /// `σ*` sampled on `t_grid`, an exponent-side curve.
    pub fn tau_curve(&self, t_grid: &[f64]) -> SpectrumCurve {
        if self.nodes.len() >= 2 {
            legendre(&self.curve(), t_grid).expect("at least two nodes")
        } else {
            SpectrumCurve::from_fn(CurveKind::Exponent, self.dim, t_grid, |t| self.legendre_exact(t))
        }
    }

    pub fn validate(&self, class: AdmissibleClass) -> AdmissibilityReport {
        validate_admissible(&self.curve(), self.dim, class)
    }

    /// `α ↦ σ(dα)/d`, the one-dimensional factor of a tensor construction.
    pub fn factor(&self) -> PrescribedSpectrum {
        let d = self.dim as f64;
        Self {
            dim: 1,
            nodes: self.nodes.iter().map(|&(a, s)| (a / d, s / d)).collect(),
        }
    }

    /// `D` and `D′`: `D = D′ = d` when `σ(d) = d`, otherwise the leftmost
    /// solutions of `σ(D) = D` and `σ(D′) = d`.
    pub fn anchors(&self) -> Result<(f64, f64), MeasureError> {
        let d = self.dim as f64;
        if (self.eval(d) - d).abs() <= 1e-12 {
            return Ok((d, d));
        }
        let report = self.validate(AdmissibleClass::SdM);
        match (report.d_point, report.d_prime) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(MeasureError::InvalidSpectrum(
                "no anchors D, D' with sigma(D) = D and sigma(D') = d".into(),
            )),
        }
    }

    /// `{α : σ(α) ≥ level}` as a closed interval, when non-empty.
    pub fn superlevel(&self, level: f64) -> Option<(f64, f64)> {
        let (top_at, top) = self
            .nodes
            .iter()
            .copied()
            .fold((0.0, f64::NEG_INFINITY), |b, n| if n.1 > b.1 { n } else { b });
        if top < level {
            return None;
        }
        let left = if self.nodes[0].1 >= level {
            self.alpha_min()
        } else {
            crossing(&self.nodes, level, true)
        };
        let right = if self.nodes[self.nodes.len() - 1].1 >= level {
            self.alpha_max()
        } else {
            crossing(&self.nodes, level, false)
        };
        Some((left.min(top_at), right.max(top_at)))
    }
}

/// Where a concave piecewise-linear curve crosses `level` on its rising
/// (`rising = true`) or falling side.
fn crossing(nodes: &[(f64, f64)], level: f64, rising: bool) -> f64 {
    let pairs: Vec<_> = nodes.windows(2).collect();
    let it: Box<dyn Iterator<Item = &&[(f64, f64)]>> = if rising {
        Box::new(pairs.iter())
    } else {
        Box::new(pairs.iter().rev())
    };
    for w in it {
        let (a, b) = (w[0], w[1]);
        let inside = if rising { a.1 < level && b.1 >= level } else { a.1 >= level && b.1 < level };
        if inside {
            return a.0 + (level - a.1) * (b.0 - a.0) / (b.1 - a.1);
        }
    }
    if rising { nodes[0].0 } else { nodes[nodes.len() - 1].0 }
}
