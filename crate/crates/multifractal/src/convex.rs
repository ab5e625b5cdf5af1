//! Sampled concave curves, their Legendre transforms and the admissibility
//! checks for prescribed spectra.
//!
//! A spectrum-side curve `α ↦ σ(α)` is `-inf` outside its samples. An
//! exponent-side curve `t ↦ τ(t)` is a sample of a function on the whole line
//! and is extended by its boundary secants when transformed.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Extended real with an explicit `-inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Ext {
    Finite(f64),
    NegInf,
}

impl Ext {
    pub fn finite(self) -> Option<f64> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::NegInf => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Ext::Finite(_))
    }

    /// Converts an `f64`; `-inf` becomes [`Ext::NegInf`].
    pub fn from_f64(v: f64) -> Self {
        if v == f64::NEG_INFINITY {
            Ext::NegInf
        } else {
            Ext::Finite(v)
        }
    }

    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::NEG_INFINITY)
    }

    /// CSV token: shortest round-trip decimal or `-inf`.
    pub fn token(self) -> String {
        match self {
            Ext::Finite(v) => format!("{v}"),
            Ext::NegInf => "-inf".to_string(),
        }
    }

    pub fn parse_token(s: &str) -> Option<Self> {
        let s = s.trim();
        if s == "-inf" {
            Some(Ext::NegInf)
        } else {
            s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Ext::Finite)
        }
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        match (self, other) {
            (Ext::NegInf, Ext::NegInf) => Some(std::cmp::Ordering::Equal),
            (Ext::NegInf, _) => Some(std::cmp::Ordering::Less),
            (_, Ext::NegInf) => Some(std::cmp::Ordering::Greater),
            (Ext::Finite(a), Ext::Finite(b)) => a.partial_cmp(b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// `α ↦ σ(α)`, `-inf` off the samples.
    Spectrum,
    /// `t ↦ τ(t)`, linearly extended past the samples.
    Exponent,
}

impl CurveKind {
    pub fn dual(self) -> Self {
        match self {
            CurveKind::Spectrum => CurveKind::Exponent,
            CurveKind::Exponent => CurveKind::Spectrum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurveError {
    #[error("curve needs at least {needed} finite samples, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("arguments must be strictly increasing (at index {0})")]
    NotIncreasing(usize),
    #[error("finite samples must be contiguous")]
    Fragmented,
    #[error("argument or value is not a number at index {0}")]
    NotANumber(usize),
    #[error("malformed curve CSV at line {0}")]
    Csv(usize),
}

/// Ordered samples `(argument, value)` of a curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    pub kind: CurveKind,
    pub dim: usize,
    pub args: Vec<f64>,
    pub values: Vec<Ext>,
}

impl SpectrumCurve {
    pub fn new(kind: CurveKind, dim: usize, args: Vec<f64>, values: Vec<Ext>) -> Result<Self, CurveError> {
        assert_eq!(args.len(), values.len(), "argument and value lengths differ");
        for (i, a) in args.iter().enumerate() {
            if !a.is_finite() || values[i].finite().is_some_and(|v| !v.is_finite()) {
                return Err(CurveError::NotANumber(i));
            }
        }
        if let Some(i) = args.windows(2).position(|w| w[1] <= w[0]) {
            return Err(CurveError::NotIncreasing(i + 1));
        }
        let finite: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_finite()).collect();
        if let (Some(&lo), Some(&hi)) = (finite.first(), finite.last()) {
            if hi - lo + 1 != finite.len() {
                return Err(CurveError::Fragmented);
            }
        }
        Ok(Self { kind, dim, args, values })
    }

    /// All-finite curve from plain samples.
    pub fn from_fn(kind: CurveKind, dim: usize, args: &[f64], f: impl Fn(f64) -> f64) -> Self {
        let values = args.iter().map(|&a| Ext::from_f64(f(a))).collect();
        Self::new(kind, dim, args.to_vec(), values).expect("sampled curve is well formed")
    }

    pub fn from_points(kind: CurveKind, dim: usize, points: &[(f64, f64)]) -> Result<Self, CurveError> {
        let args = points.iter().map(|p| p.0).collect();
        let values = points.iter().map(|p| Ext::Finite(p.1)).collect();
        Self::new(kind, dim, args, values)
    }

    pub fn len(&self) -> usize {
        self.args.len()
    }

    pub fn is_empty(&self) -> bool {
        self.args.is_empty()
    }

    pub fn finite_points(&self) -> Vec<(f64, f64)> {
        self.args
            .iter()
            .zip(&self.values)
            .filter_map(|(&a, v)| v.finite().map(|v| (a, v)))
            .collect()
    }

    /// Piecewise-linear evaluation. Spectrum curves are `-inf` off their
    /// finite span; exponent curves extend along the boundary secants.
    pub fn eval(&self, x: f64) -> Ext {
        let pts = self.finite_points();
        if pts.is_empty() {
            return Ext::NegInf;
        }
        if pts.len() == 1 {
            return if self.kind == CurveKind::Exponent || (x - pts[0].0).abs() <= 1e-12 * (1.0 + x.abs()) {
                Ext::Finite(pts[0].1)
            } else {
                Ext::NegInf
            };
        }
        let (lo, hi) = (pts[0].0, pts[pts.len() - 1].0);
        let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if self.kind == CurveKind::Spectrum && (x < lo - tol || x > hi + tol) {
            return Ext::NegInf;
        }
        let i = pts.partition_point(|p| p.0 < x).clamp(1, pts.len() - 1);
        let (a, b) = (pts[i - 1], pts[i]);
        let x = if self.kind == CurveKind::Spectrum { x.clamp(lo, hi) } else { x };
        Ext::Finite(a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0))
    }

    /// Finite span `[first, last]` of the finite samples.
    pub fn support(&self) -> Option<(f64, f64)> {
        let pts = self.finite_points();
        Some((pts.first()?.0, pts.last()?.0))
    }

    pub fn max_value(&self) -> Option<(f64, f64)> {
        self.finite_points()
            .into_iter()
            .fold(None, |best: Option<(f64, f64)>, p| match best {
                Some(b) if b.1 >= p.1 => Some(b),
                _ => Some(p),
            })
    }

    /// Two-column CSV with a header row and `-inf` tokens.
    pub fn to_csv(&self, header: (&str, &str)) -> String {
        let mut s = format!("{},{}\n", header.0, header.1);
        for (a, v) in self.args.iter().zip(&self.values) {
            s.push_str(&format!("{a},{}\n", v.token()));
        }
        s
    }

    pub fn from_csv(kind: CurveKind, dim: usize, text: &str) -> Result<Self, CurveError> {
        let mut args = Vec::new();
        let mut values = Vec::new();
        for (n, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let a = cols.next().and_then(|c| c.trim().parse::<f64>().ok());
            let v = cols.next().and_then(Ext::parse_token);
            match (a, v) {
                (Some(a), Some(v)) => {
                    args.push(a);
                    values.push(v);
                }
                _ => return Err(CurveError::Csv(n + 1)),
            }
        }
        Self::new(kind, dim, args, values)
    }

    /// Sup-norm distance on the given arguments; `-inf` must match `-inf`.
    pub fn sup_distance(&self, other: &SpectrumCurve, at: &[f64]) -> f64 {
        at.iter()
            .map(|&x| match (self.eval(x), other.eval(x)) {
                (Ext::Finite(a), Ext::Finite(b)) => (a - b).abs(),
                (Ext::NegInf, Ext::NegInf) => 0.0,
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }
}

/// Legendre transform with the leftmost minimizer for every output point.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreResult {
    pub curve: SpectrumCurve,
    /// Leftmost grid argument attaining the infimum, `None` where it is `-inf`.
    pub argmin: Vec<Option<f64>>,
}

/// `g*(y) = inf_x (x y − g(x))` over the finite samples of `curve`.
///
/// For exponent-side input the infimum also runs along the linear extensions,
/// which makes it `-inf` whenever `y` lies outside the boundary secant slopes.
pub fn legendre(curve: &SpectrumCurve, out_grid: &[f64]) -> Result<SpectrumCurve, CurveError> {
    legendre_detailed(curve, out_grid).map(|r| r.curve)
}

/// Slack, relative to `1 + |y|`, when deciding that `y` lies beyond the
/// boundary secants of an exponent-side curve. Finite grids only approach the
/// asymptotic slopes, so an exact comparison would cut off the endpoints.
pub const DEFAULT_SLOPE_TOLERANCE: f64 = 1e-4;

pub fn legendre_detailed(curve: &SpectrumCurve, out_grid: &[f64]) -> Result<LegendreResult, CurveError> {
    legendre_with_tolerance(curve, out_grid, DEFAULT_SLOPE_TOLERANCE)
}

pub fn legendre_with_tolerance(
    curve: &SpectrumCurve,
    out_grid: &[f64],
    slope_tolerance: f64,
) -> Result<LegendreResult, CurveError> {
    let pts = curve.finite_points();
    if pts.len() < 2 {
        return Err(CurveError::TooFewPoints { needed: 2, got: pts.len() });
    }
    let n = pts.len();
    let left_slope = (pts[1].1 - pts[0].1) / (pts[1].0 - pts[0].0);
    let right_slope = (pts[n - 1].1 - pts[n - 2].1) / (pts[n - 1].0 - pts[n - 2].0);
    let mut values = Vec::with_capacity(out_grid.len());
    let mut argmin = Vec::with_capacity(out_grid.len());
    for &y in out_grid {
        if curve.kind == CurveKind::Exponent {
            let tol = slope_tolerance * (1.0 + y.abs());
            if y < right_slope - tol || y > left_slope + tol {
                values.push(Ext::NegInf);
                argmin.push(None);
                continue;
            }
        }
        let mut best = f64::INFINITY;
        let mut at = pts[0].0;
        for &(x, g) in &pts {
            let v = x * y - g;
            if v < best {
                best = v;
                at = x;
            }
        }
        values.push(Ext::Finite(best));
        argmin.push(Some(at));
    }
    let curve = SpectrumCurve::new(curve.kind.dual(), curve.dim, out_grid.to_vec(), values)?;
    Ok(LegendreResult { curve, argmin })
}

/// Vertices of the upper concave envelope, sorted by abscissa. Collinear
/// points are dropped.
pub fn concave_vertices(samples: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = samples.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.dedup_by(|b, a| a.0 == b.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or below the chord a→p
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Upper concave envelope of a point cloud, evaluated on the sample grid.
pub fn concave_hull(samples: &[(f64, f64)], kind: CurveKind, dim: usize) -> Result<SpectrumCurve, CurveError> {
    if samples.is_empty() {
        return Err(CurveError::TooFewPoints { needed: 1, got: 0 });
    }
    let hull = concave_vertices(samples);
    let hull_curve = SpectrumCurve::from_points(CurveKind::Spectrum, dim, &hull)?;
    let mut args: Vec<f64> = samples.iter().map(|p| p.0).collect();
    args.sort_by(f64::total_cmp);
    args.dedup();
    let values = args.iter().map(|&a| hull_curve.eval(a)).collect();
    SpectrumCurve::new(kind, dim, args, values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdmissibleClass {
    /// Concave, continuous, compact support in `(0,∞)`, maximum `d`.
    Sd,
    /// `Sd` plus `σ ≤ Id` and points `D`, `D′` with `σ(D)=D`, `σ(D′)=d`.
    SdM,
    /// Exponent side: concave, non-decreasing, `τ(1)=0`, `τ(0)=−d`,
    /// transform supported in `(0,∞)`.
    TdM,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub class: AdmissibleClass,
    pub checks: Vec<Check>,
    /// Leftmost point with `σ(D)=D`.
    pub d_point: Option<f64>,
    /// Set when `σ = Id` on a whole interval rather than a single point.
    pub d_interval: Option<(f64, f64)>,
    /// Leftmost point with `σ(D′)=d`.
    pub d_prime: Option<f64>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

/// Worst second difference of a sampled curve, in the concave direction.
fn concavity_defect(pts: &[(f64, f64)]) -> (f64, f64) {
    let scale = pts.iter().map(|p| p.1.abs()).fold(1.0, f64::max);
    let mut worst = 0.0f64;
    let mut at = pts.first().map_or(0.0, |p| p.0);
    for w in pts.windows(3) {
        let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
        let rise = (s2 - s1) / scale;
        if rise > worst {
            worst = rise;
            at = w[1].0;
        }
    }
    (worst, at)
}

/// Runs every condition of `class` and reports the outcome of each one.
pub fn validate_admissible(curve: &SpectrumCurve, d: usize, class: AdmissibleClass) -> AdmissibilityReport {
    let dd = d as f64;
    let pts = curve.finite_points();
    let mut checks = Vec::new();
    let mut report = AdmissibilityReport {
        class,
        checks: Vec::new(),
        d_point: None,
        d_interval: None,
        d_prime: None,
    };
    if pts.is_empty() {
        checks.push(check("non-empty", false, "no finite samples".into()));
        report.checks = checks;
        return report;
    }
    let (defect, at) = concavity_defect(&pts);
    checks.push(check(
        "concave",
        defect <= 1e-9,
        format!("worst slope increase {defect:.3e} at {at}"),
    ));
    match class {
        AdmissibleClass::Sd | AdmissibleClass::SdM => {
            let (amax_at, vmax) = curve.max_value().unwrap();
            checks.push(check(
                "maximum equals d",
                (vmax - dd).abs() <= 1e-9,
                format!("max {vmax} at {amax_at}"),
            ));
            let (lo, hi) = curve.support().unwrap();
            checks.push(check(
                "support in (0, inf)",
                lo > 0.0,
                format!("support [{lo}, {hi}]"),
            ));
            let nonneg = pts.iter().all(|p| p.1 >= -1e-12);
            checks.push(check("values in [0, d]", nonneg && vmax <= dd + 1e-9, String::new()));
            if class == AdmissibleClass::SdM {
                let excess = pts.iter().map(|p| p.1 - p.0).fold(f64::NEG_INFINITY, f64::max);
                checks.push(check(
                    "sigma <= Id",
                    excess <= 1e-9,
                    format!("max of sigma - Id is {excess:.3e}"),
                ));
                let (dp, dint) = locate_touching(&pts);
                report.d_point = dp;
                report.d_interval = dint;
                checks.push(check(
                    "D with sigma(D) = D",
                    dp.is_some(),
                    match (dp, dint) {
                        (Some(x), Some((a, b))) => format!("leftmost D = {x}; sigma = Id on [{a}, {b}]"),
                        (Some(x), None) => format!("D = {x}"),
                        _ => "no touching point".into(),
                    },
                ));
                let dprime = locate_level(&pts, dd);
                report.d_prime = dprime;
                checks.push(check(
                    "D' with sigma(D') = d",
                    dprime.is_some(),
                    dprime.map_or("maximum below d".into(), |x| format!("D' = {x}")),
                ));
            }
        }
        AdmissibleClass::TdM => {
            let monotone = pts.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
            checks.push(check("non-decreasing", monotone, String::new()));
            let at1 = curve.eval(1.0).to_f64();
            checks.push(check("tau(1) = 0", at1.abs() <= 1e-9, format!("tau(1) = {at1}")));
            let at0 = curve.eval(0.0).to_f64();
            checks.push(check("tau(0) = -d", (at0 + dd).abs() <= 1e-9, format!("tau(0) = {at0}")));
            let n = pts.len();
            if n >= 2 {
                let right = (pts[n - 1].1 - pts[n - 2].1) / (pts[n - 1].0 - pts[n - 2].0);
                checks.push(check(
                    "dual support in (0, inf)",
                    right > 0.0,
                    format!("asymptotic slope at +inf {right}"),
                ));
            }
        }
    }
    report.checks = checks;
    report
}

/// Leftmost point where the piecewise-linear curve meets the diagonal, plus
/// the interval when it runs along it.
fn locate_touching(pts: &[(f64, f64)]) -> (Option<f64>, Option<(f64, f64)>) {
    let tol = 1e-9;
    let on: Vec<f64> = pts.iter().filter(|p| (p.1 - p.0).abs() <= tol).map(|p| p.0).collect();
    match on.as_slice() {
        [] => (None, None),
        [x] => (Some(*x), None),
        [first, .., last] => {
            // consecutive touching nodes mean the curve lies on Id between them
            (Some(*first), Some((*first, *last)))
        }
    }
}

fn locate_level(pts: &[(f64, f64)], level: f64) -> Option<f64> {
    pts.iter().find(|p| (p.1 - level).abs() <= 1e-9).map(|p| p.0)
}

/// Evenly spaced grid with both endpoints.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Grid `lo, lo+step, ...` up to `hi` inclusive (within half a step).
pub fn grid_step(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 0.5).floor() as usize + 1;
    (0..n).map(|i| lo + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau_binomial(t: f64) -> f64 {
        -(0.25f64.powf(t) + 0.75f64.powf(t)).log2()
    }

    #[test]
    fn linear_tau_gives_point_spectrum() {
        let t = linspace(-4.0, 4.0, 81);
        let tau = SpectrumCurve::from_fn(CurveKind::Exponent, 1, &t, |t| 0.5 * t - 1.0);
        let h = vec![0.3, 0.5, 0.7];
        let s = legendre(&tau, &h).unwrap();
        assert_eq!(s.values[0], Ext::NegInf);
        assert_eq!(s.values[2], Ext::NegInf);
        assert!((s.values[1].to_f64() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_on_grid() {
        let t = linspace(-2.0, 2.0, 41);
        let f = SpectrumCurve::from_fn(CurveKind::Exponent, 1, &t, |t| t);
        let s = legendre(&f, &[0.5, 1.0, 1.5]).unwrap();
        assert_eq!(s.values, vec![Ext::NegInf, Ext::Finite(0.0), Ext::NegInf]);
    }

    #[test]
    fn binomial_transform_matches_dense_minimization() {
        let t = grid_step(-10.0, 10.0, 0.01);
        let tau = SpectrumCurve::from_fn(CurveKind::Exponent, 1, &t, tau_binomial);
        let s = legendre(&tau, &[1.2]).unwrap();
        let dense = (0..=2_000_000)
            .map(|i| -10.0 + i as f64 * 1e-5)
            .map(|t| 1.2 * t - tau_binomial(t))
            .fold(f64::INFINITY, f64::min);
        // interior accuracy is set by the 0.01 pitch: curvature * pitch^2 / 8
        assert!((s.values[0].to_f64() - dense).abs() < 1e-4);
        let at_two = legendre(&tau, &[2.0]).unwrap().values[0].to_f64();
        let dense2 = (0..=2_000_000)
            .map(|i| -10.0 + i as f64 * 1e-5)
            .map(|t| 2.0 * t - tau_binomial(t))
            .fold(f64::INFINITY, f64::min);
        assert!((at_two - dense2).abs() < 1e-6);
    }

    #[test]
    fn rejects_short_curves() {
        let c = SpectrumCurve::from_points(CurveKind::Spectrum, 1, &[(1.0, 1.0)]).unwrap();
        assert!(matches!(legendre(&c, &[0.0]), Err(CurveError::TooFewPoints { .. })));
    }

    #[test]
    fn hull_examples() {
        let h = concave_hull(&[(1.0, 0.5)], CurveKind::Spectrum, 1).unwrap();
        assert_eq!(h.finite_points(), vec![(1.0, 0.5)]);
        let line: Vec<_> = (0..5).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        let h = concave_hull(&line, CurveKind::Spectrum, 1).unwrap();
        for (p, q) in h.finite_points().iter().zip(&line) {
            assert!((p.1 - q.1).abs() < 1e-12);
        }
    }

    #[test]
    fn hull_matches_chord_envelope() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<(f64, f64)> = (0..20).map(|_| (rng.gen_range(0.0..3.0), rng.gen_range(-1.0..1.0))).collect();
        let h = concave_hull(&pts, CurveKind::Spectrum, 1).unwrap();
        for (x, v) in h.finite_points() {
            // O(n^3): best chord value over all pairs bracketing x
            let mut best = f64::NEG_INFINITY;
            for a in &pts {
                for b in &pts {
                    if a.0 <= x && x <= b.0 {
                        let y = if b.0 == a.0 { a.1.max(b.1) } else { a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0) };
                        best = best.max(y);
                    }
                }
            }
            assert!((v - best).abs() < 1e-9, "x={x} hull={v} chord={best}");
        }
    }

    #[test]
    fn triangle_is_admissible() {
        let sigma = SpectrumCurve::from_points(CurveKind::Spectrum, 1, &[(0.5, 0.0), (1.0, 1.0), (1.5, 0.0)]).unwrap();
        let dense = SpectrumCurve::from_fn(CurveKind::Spectrum, 1, &grid_step(0.5, 1.5, 0.01), |a| {
            sigma.eval(a).to_f64()
        });
        assert!(validate_admissible(&dense, 1, AdmissibleClass::Sd).passed());
        let r = validate_admissible(&dense, 1, AdmissibleClass::SdM);
        assert!(r.passed(), "{:?}", r.failures());
        // bisection oracle for σ(H) = H on the rising edge
        let (mut lo, mut hi) = (0.5, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if sigma.eval(mid).to_f64() - mid < 0.0 { lo = mid } else { hi = mid }
        }
        assert!((r.d_point.unwrap() - hi).abs() < 1e-9);
    }

    #[test]
    fn lebesgue_point_and_low_maximum() {
        let point = SpectrumCurve::from_points(CurveKind::Spectrum, 1, &[(1.0, 1.0)]).unwrap();
        let r = validate_admissible(&point, 1, AdmissibleClass::SdM);
        assert!(r.passed());
        assert_eq!((r.d_point, r.d_prime), (Some(1.0), Some(1.0)));
        let low = SpectrumCurve::from_points(CurveKind::Spectrum, 1, &[(0.5, 0.0), (1.0, 0.8), (1.5, 0.0)]).unwrap();
        let r = validate_admissible(&low, 1, AdmissibleClass::Sd);
        assert!(r.failures().iter().any(|c| c.name == "maximum equals d"));
    }

    #[test]
    fn csv_round_trip_keeps_neginf() {
        let c = SpectrumCurve::new(
            CurveKind::Spectrum,
            1,
            vec![0.0, 1.0, 2.0],
            vec![Ext::NegInf, Ext::Finite(0.25), Ext::NegInf],
        )
        .unwrap();
        let text = c.to_csv(("alpha", "sigma"));
        assert!(text.contains("-inf"));
        assert_eq!(SpectrumCurve::from_csv(CurveKind::Spectrum, 1, &text).unwrap(), c);
    }
}
