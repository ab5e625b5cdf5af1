//! Command-line harness: JSON run configuration, the three pipelines, and
//! atomic CSV/JSON/gnuplot output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{check_property_p, empirical_tau};
use crate::convex::{grid_step, legendre, AdmissibleClass, CurveKind, Ext, SpectrumCurve};
use crate::dyadic::MAX_GENERATION;
use crate::measure::{Environment, MeasureConfig, MeasureDescriptor, MeasureError, MoranMeasure, PrescribedSpectrum};
use crate::saturation::saturation_coefficients;
use crate::spectra::{exhaustion_map, frisch_parisi_scale, Integrability, SpectraError, ZetaProfile};
use crate::wavelet::{analyze, leaders, make_wavelet, regularity_order, synthesize, zeta_f_estimate, WaveletError};

/// Environment variable read for the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "MULTIFRACTAL_THREADS";

#[derive(Parser, Debug)]
#[command(name = "multifractal", version, about = "Prescribed multifractal measures, saturation functions and wavelet-leader estimates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for sampled audits; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Build a measure for a spectrum in the prescribable class and compare its scaling function.
    PrescribeMeasure,
    /// Solve the inverse problem for a target spectrum and optionally synthesize a saturation function.
    FrischParisi,
    /// Wavelet-leader analysis of a sampled signal.
    AnalyzeSignal,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("validation failed:\n{0}")]
    Validation(String),
    #[error("numeric precondition: {0}")]
    Precondition(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Precondition(_) => 3,
            _ => 2,
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::InvalidSpectrum(s) => CliError::Validation(s),
            MeasureError::InvalidPolicy(s) | MeasureError::Descriptor(s) => CliError::Config(s),
            MeasureError::BeyondDepth { .. } | MeasureError::Dyadic(_) => CliError::Config(e.to_string()),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Measure(m) => m.into(),
            SpectraError::InvalidProfile(s) => CliError::Validation(s),
            p @ SpectraError::Precondition { .. } => CliError::Precondition(p.to_string()),
        }
    }
}

impl From<WaveletError> for CliError {
    fn from(e: WaveletError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// A uniform grid or an explicit list of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Uniform { lo: f64, hi: f64, step: f64 },
    Points(Vec<f64>),
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::Uniform { lo, hi, step } => grid_step(*lo, *hi, *step),
            Grid::Points(p) => p.clone(),
        }
    }

    fn check(&self, name: &str) -> Result<(), CliError> {
        let bad = |why: &str| Err(CliError::Config(format!("grids.{name}: {why}")));
        match self {
            Grid::Uniform { lo, hi, step } => {
                if !(lo.is_finite() && hi.is_finite() && *step > 0.0 && hi >= lo) {
                    return bad("needs finite lo <= hi and a positive step");
                }
            }
            Grid::Points(p) => {
                if p.is_empty() {
                    return bad("empty grid");
                }
                if p.windows(2).any(|w| w[1] <= w[0]) || p.iter().any(|x| !x.is_finite()) {
                    return bad("points must be finite and strictly increasing");
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub t: Option<Grid>,
    pub h: Option<Grid>,
    pub alpha: Option<Grid>,
}

/// Nodes inline, or a two-column `alpha,sigma` CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    Nodes(Vec<(f64, f64)>),
    File(PathBuf),
}

/// `"inf"` or a number.
fn parse_exponent(v: &serde_json::Value, field: &str) -> Result<Integrability, CliError> {
    let p = match v {
        serde_json::Value::String(s) => Integrability::parse(s),
        serde_json::Value::Number(n) => n.as_f64().and_then(|x| Integrability::parse(&x.to_string())),
        _ => None,
    };
    match p {
        Some(Integrability::Finite(x)) if x < 1.0 => Err(CliError::Config(format!("{field} = {x} must be at least 1"))),
        Some(p) => Ok(p),
        None => Err(CliError::Config(format!("{field}: expected a number or \"inf\", got {v}"))),
    }
}

fn exponent_json(p: Integrability) -> serde_json::Value {
    match p {
        Integrability::Infinite => "inf".into(),
        Integrability::Finite(x) => x.into(),
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    spectrum: Option<SpectrumSource>,
    #[serde(default = "default_dim")]
    dim: usize,
    #[serde(default = "default_depth")]
    depth: u32,
    p: Option<serde_json::Value>,
    q: Option<serde_json::Value>,
    /// Power `s` of the environment `μ^s`.
    s: Option<f64>,
    #[serde(default)]
    tilts: Vec<f64>,
    wavelet_order: Option<u32>,
    #[serde(default)]
    grids: Grids,
    #[serde(default)]
    seed: u64,
    samples: Option<PathBuf>,
    j_range: Option<(u32, u32)>,
    #[serde(default = "default_true")]
    synthesize: bool,
    measure: Option<serde_json::Value>,
    out: Option<PathBuf>,
}

/// Overlays `patch` on `base`, recursing into objects.
fn merge(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                // a tagged variant replaces the whole object
                match b.get_mut(&k) {
                    Some(slot) if k != "letters" && k != "epsilon" => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

fn measure_config(patch: Option<serde_json::Value>) -> Result<MeasureConfig, CliError> {
    let mut value = serde_json::to_value(MeasureConfig::desk()).expect("serializable");
    if let Some(p) = patch {
        merge(&mut value, p);
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("measure: {e}")))
}

fn default_dim() -> usize {
    1
}
fn default_depth() -> u32 {
    16
}
fn default_true() -> bool {
    true
}

/// Resolved run configuration. Relative paths are taken from the directory
/// of the configuration file.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub spectrum: Option<SpectrumSource>,
    pub dim: usize,
    pub depth: u32,
    pub p: Integrability,
    pub q: Integrability,
    pub s: f64,
    pub tilts: Vec<f64>,
    pub wavelet_order: Option<u32>,
    pub grids: Grids,
    pub seed: u64,
    pub samples: Option<PathBuf>,
    pub j_range: Option<(u32, u32)>,
    pub synthesize: bool,
    pub measure: MeasureConfig,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str, base: &Path) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let cfg = RunConfig {
            spectrum: raw.spectrum.map(|s| match s {
                SpectrumSource::File(f) => SpectrumSource::File(resolve(f)),
                n => n,
            }),
            dim: raw.dim,
            depth: raw.depth,
            p: raw.p.as_ref().map_or(Ok(Integrability::Infinite), |v| parse_exponent(v, "p"))?,
            q: raw.q.as_ref().map_or(Ok(Integrability::Finite(2.0)), |v| parse_exponent(v, "q"))?,
            s: raw.s.unwrap_or(1.0),
            tilts: raw.tilts,
            wavelet_order: raw.wavelet_order,
            grids: raw.grids,
            seed: raw.seed,
            samples: raw.samples.map(resolve),
            j_range: raw.j_range,
            synthesize: raw.synthesize,
            measure: measure_config(raw.measure)?,
            out: raw.out.map(resolve).unwrap_or_else(|| base.join("out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.dim == 0 {
            return Err(CliError::Config("dim must be positive".into()));
        }
        if self.depth == 0 || self.depth as usize * self.dim > MAX_GENERATION as usize {
            return Err(CliError::Config(format!("depth {} must lie in 1..={}", self.depth, MAX_GENERATION as usize / self.dim)));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(CliError::Config(format!("s = {} must be positive", self.s)));
        }
        for (name, g) in [("t", &self.grids.t), ("h", &self.grids.h), ("alpha", &self.grids.alpha)] {
            if let Some(g) = g {
                g.check(name)?;
            }
        }
        if let Some(o) = self.wavelet_order {
            if !(1..=crate::wavelet::MAX_ORDER).contains(&o) {
                return Err(CliError::Config(format!("wavelet_order {o} outside 1..={}", crate::wavelet::MAX_ORDER)));
            }
        }
        for path in [self.samples.as_ref(), match &self.spectrum {
            Some(SpectrumSource::File(f)) => Some(f),
            _ => None,
        }]
        .into_iter()
        .flatten()
        {
            if !path.is_file() {
                return Err(CliError::Config(format!("referenced file {} does not exist", path.display())));
            }
        }
        Ok(())
    }

    /// The configuration with every default filled in.
    pub fn resolved_json(&self) -> String {
        let value = serde_json::json!({
            "spectrum": self.spectrum,
            "dim": self.dim,
            "depth": self.depth,
            "p": exponent_json(self.p),
            "q": exponent_json(self.q),
            "s": self.s,
            "tilts": self.tilts,
            "wavelet_order": self.wavelet_order,
            "grids": self.grids,
            "seed": self.seed,
            "samples": self.samples,
            "j_range": self.j_range,
            "synthesize": self.synthesize,
            "measure": self.measure,
            "out": self.out,
        });
        serde_json::to_string_pretty(&value).expect("serializable") + "\n"
    }

    fn t_grid(&self) -> Vec<f64> {
        self.grids.t.as_ref().map_or_else(|| grid_step(-5.0, 5.0, 0.05), Grid::points)
    }

    fn spectrum(&self) -> Result<PrescribedSpectrum, CliError> {
        match &self.spectrum {
            None => Err(CliError::Config("spectrum is required for this command".into())),
            Some(SpectrumSource::Nodes(n)) => Ok(PrescribedSpectrum::new(self.dim, n.clone())?),
            Some(SpectrumSource::File(f)) => {
                let text = read(f)?;
                let curve = SpectrumCurve::from_csv(CurveKind::Spectrum, self.dim, &text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", f.display())))?;
                Ok(PrescribedSpectrum::from_curve(&curve)?)
            }
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Collects output files and writes each one through a temporary sibling.
struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let io = |source| CliError::Io { path: path.clone(), source };
        std::fs::write(&tmp, contents).map_err(io)?;
        std::fs::rename(&tmp, &path).map_err(io)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write(name, &(serde_json::to_string_pretty(value).expect("serializable") + "\n"))
    }
}

/// Columns sharing a first column; `-inf` for missing values.
fn table(header: &[&str], first: &[f64], columns: &[Vec<Ext>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for (i, x) in first.iter().enumerate() {
        s.push_str(&format!("{x}"));
        for c in columns {
            s.push(',');
            s.push_str(&c[i].token());
        }
        s.push('\n');
    }
    s
}

fn plot_script(title: &str, file: &str, first: &str, columns: &[&str]) -> String {
    let mut s = String::new();
    writeln!(s, "# gnuplot script; run from the output directory").unwrap();
    writeln!(s, "set datafile separator ','").unwrap();
    writeln!(s, "set datafile missing '-inf'").unwrap();
    writeln!(s, "set title '{title}'").unwrap();
    writeln!(s, "set xlabel '{first}'").unwrap();
    writeln!(s, "set key left top").unwrap();
    let series: Vec<String> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| format!("'{file}' using 1:{} with linespoints title '{c}'", i + 2))
        .collect();
    writeln!(s, "plot {}", series.join(", \\\n     ")).unwrap();
    s
}

fn prescribe_measure(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let sigma = cfg.spectrum()?;
    let report = sigma.validate(AdmissibleClass::SdM);
    out.json("validation.json", &report)?;
    if !report.passed() {
        let lines: Vec<String> = report.failures().iter().map(|c| format!("  {}: {}", c.name, c.detail)).collect();
        return Err(CliError::Validation(lines.join("\n")));
    }
    let m = MoranMeasure::build(&sigma, cfg.depth, &cfg.measure)?;
    out.write("measure.json", &MeasureDescriptor::from_measure(&m).to_json())?;
    out.json("blocks.json", &m.audit())?;
    let p_report = check_property_p(&m, (1, cfg.depth), cfg.seed);
    out.json("property_p.json", &p_report)?;

    let t = cfg.t_grid();
    let target = sigma.tau_curve(&t);
    let mut gens: Vec<u32> = m.schedule().boundaries_up_to(cfg.depth as u64).into_iter().map(|g| g as u32).collect();
    if gens.last() != Some(&cfg.depth) {
        gens.push(cfg.depth);
    }
    gens.retain(|&g| g > 0);
    let env = Environment::new(m.clone(), cfg.s, 0.0)?;
    let deepest = empirical_tau(&env, &t, cfg.depth);
    let scaled: Vec<f64> = t.iter().map(|x| cfg.s * x).collect();
    let target_s: Vec<Ext> = scaled.iter().map(|&x| Ext::Finite(sigma.legendre_exact(x))).collect();
    let gap: Vec<Ext> = deepest
        .values
        .iter()
        .zip(&target_s)
        .map(|(a, b)| Ext::Finite((a.to_f64() - b.to_f64()).abs()))
        .collect();
    out.write(
        "tau_comparison.csv",
        &table(&["t", "target", "empirical", "abs_gap"], &t, &[target_s, deepest.values.clone(), gap]),
    )?;
    let mut gaps = String::from("generation,sup_gap\n");
    for &g in &gens {
        let d = empirical_tau(&m, &t, g).sup_distance(&target, &t);
        gaps.push_str(&format!("{g},{d}\n"));
    }
    out.write("tau_gaps.csv", &gaps)?;

    if !cfg.tilts.is_empty() {
        let mut cols = Vec::new();
        let mut header = vec!["t".to_string()];
        for &eps in &cfg.tilts {
            let e = Environment::new(m.clone(), cfg.s, eps)?;
            cols.push(empirical_tau(&e, &t, cfg.depth).values);
            header.push(format!("tilt_{eps}"));
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        out.write("tau_tilts.csv", &table(&header, &t, &cols))?;
    }
    out.write("plot.gp", &plot_script("scaling function", "tau_comparison.csv", "t", &["target", "empirical"]))
}

#[derive(Serialize)]
struct EnvironmentRecord<'a> {
    route: &'a str,
    p: serde_json::Value,
    s: f64,
    power: f64,
    sigma_m: &'a PrescribedSpectrum,
    sigma_tilde: Option<&'a PrescribedSpectrum>,
    exhaustion: Option<&'a crate::spectra::ExhaustionReport>,
    measure: MeasureDescriptor,
}

fn frisch_parisi(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let sigma = cfg.spectrum()?;
    let (solved, tilde) = match cfg.p {
        Integrability::Infinite => (sigma.clone(), None),
        Integrability::Finite(p) => {
            let (t, report) = exhaustion_map(&sigma, p)?;
            (t.clone(), Some((t, report)))
        }
    };
    let scale = frisch_parisi_scale(&solved)?;
    let env = scale.environment(cfg.depth, &cfg.measure)?;
    let record = EnvironmentRecord {
        route: if cfg.p.is_infinite() { "p_infinite" } else { "exhaustion" },
        p: exponent_json(cfg.p),
        s: scale.s,
        power: scale.power(),
        sigma_m: &scale.sigma_m,
        sigma_tilde: tilde.as_ref().map(|t| &t.0),
        exhaustion: tilde.as_ref().map(|t| &t.1),
        measure: MeasureDescriptor::from_measure(&env.base),
    };
    out.json("environment.json", &record)?;
    if let Some((t, _)) = &tilde {
        out.write("sigma_tilde.csv", &t.curve().to_csv(("alpha", "sigma_tilde")))?;
    }

    let env_sigma = env.spectrum().expect("prescribed base");
    let profile = ZetaProfile::from_spectrum(&env_sigma, cfg.p)?;
    let h = cfg.grids.h.as_ref().map_or_else(
        || grid_step(sigma.alpha_min(), sigma.alpha_max().max(sigma.alpha_min()), 0.01),
        Grid::points,
    );
    let predicted: Vec<Ext> = h.iter().map(|&x| profile.zeta_star(x)).collect();
    out.write("typical_spectrum.csv", &table(&["H", "zeta_star"], &h, std::slice::from_ref(&predicted)))?;
    let target: Vec<Ext> = h
        .iter()
        .map(|&x| if x < sigma.alpha_min() - 1e-12 || x > sigma.alpha_max() + 1e-12 { Ext::NegInf } else { Ext::Finite(sigma.eval(x)) })
        .collect();

    let mut columns = vec![target, predicted];
    let mut names = vec!["H", "target", "predicted"];
    if cfg.synthesize {
        let order = cfg.wavelet_order.unwrap_or_else(|| regularity_order(env.alpha_range().1, cfg.dim, cfg.p));
        let w = make_wavelet(order)?;
        let sat = saturation_coefficients(&env, cfg.p, cfg.q, order, cfg.depth);
        out.json("saturation_schedule.json", &sat.schedule)?;
        out.write("field.json", &(sat.field.header_json() + "\n"))?;
        out.write("field.csv", &sat.field.to_csv())?;
        let signal = synthesize(&sat.field, &w);
        out.write("signal.csv", &signal_csv(&signal))?;
        let lf = leaders(&analyze(&signal, cfg.dim, &w)?, 1);
        let est = zeta_f_estimate(&lf, &cfg.t_grid(), cfg.j_range)?;
        let spectrum = legendre(&est.curve, &h).map_err(|e| CliError::Precondition(e.to_string()))?;
        out.write("leaders_spectrum.csv", &spectrum.to_csv(("H", "estimate")))?;
        columns.push(spectrum.values);
        names.push("estimated");
    }
    out.write("overlay.csv", &table(&names, &h, &columns))?;
    out.write("plot.gp", &plot_script("typical spectrum", "overlay.csv", "H", &names[1..]))
}

fn signal_csv(samples: &[f64]) -> String {
    let mut s = String::from("value\n");
    for v in samples {
        s.push_str(&format!("{v:?}\n"));
    }
    s
}

/// One value per line after an optional header; `#` lines are comments.
pub fn parse_samples(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or(line).trim();
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            _ if n == 0 && out.is_empty() => continue,
            _ => return Err(CliError::Config(format!("samples line {}: {line:?}", n + 1))),
        }
    }
    Ok(out)
}

fn analyze_signal(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let path = cfg.samples.as_ref().ok_or_else(|| CliError::Config("samples is required for analyze-signal".into()))?;
    let samples = parse_samples(&read(path)?)?;
    let order = cfg.wavelet_order.unwrap_or(3);
    let w = make_wavelet(order)?;
    if let Some(why) = w.diagnostic_only() {
        eprintln!("warning: order {order}: {why}");
    }
    let field = analyze(&samples, cfg.dim, &w)?;
    let lf = leaders(&field, 1);
    let mut lcsv = String::from("j");
    for c in 1..=cfg.dim {
        lcsv.push_str(&format!(",k{c}"));
    }
    lcsv.push_str(",leader\n");
    for (j, level) in lf.values.iter().enumerate() {
        for (flat, v) in level.iter().enumerate() {
            let cube = crate::dyadic::DyadicCube::from_flat_index(j as u32, cfg.dim, flat);
            lcsv.push_str(&j.to_string());
            for k in &cube.k {
                lcsv.push_str(&format!(",{k}"));
            }
            lcsv.push_str(&format!(",{v:?}\n"));
        }
    }
    out.write("leaders.csv", &lcsv)?;
    let t = cfg.t_grid();
    let est = zeta_f_estimate(&lf, &t, cfg.j_range)?;
    let r2: Vec<Ext> = est.r2.iter().map(|&r| Ext::from_f64(r)).collect();
    out.write("zeta.csv", &table(&["t", "zeta", "r2"], &t, &[est.curve.values.clone(), r2]))?;
    let h = match &cfg.grids.h {
        Some(g) => g.points(),
        None => default_h_grid(&est.curve),
    };
    let spectrum = legendre(&est.curve, &h).map_err(|e| CliError::Precondition(e.to_string()))?;
    out.write("spectrum.csv", &spectrum.to_csv(("H", "spectrum")))?;
    out.json(
        "estimate.json",
        &serde_json::json!({ "j_range": est.j_range, "empty_levels": est.empty_levels, "order": order }),
    )?;
    out.write("plot.gp", &plot_script("leaders spectrum", "spectrum.csv", "H", &["spectrum"]))
}

/// Spans the chord slopes of the estimated scaling function, step 0.01.
fn default_h_grid(zeta: &SpectrumCurve) -> Vec<f64> {
    let pts = zeta.finite_points();
    let slopes: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return vec![0.0];
    }
    let lo = (lo * 100.0).floor() / 100.0;
    let hi = (hi * 100.0).ceil() / 100.0;
    grid_step(lo, hi.max(lo), 0.01)
}

fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| CliError::Config(format!("{THREADS_ENV}={v:?} is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Config("thread count must be positive".into()));
        }
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs one command and returns the names of the files written.
pub fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    configure_threads(cli.threads)?;
    let config_path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let text = read(config_path)?;
    let base = config_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut cfg = RunConfig::from_json(&text, &base)?;
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let mut out = Outputs::new(&cfg.out)?;
    out.write("resolved_config.json", &cfg.resolved_json())?;
    match cli.command {
        Command::PrescribeMeasure => prescribe_measure(&cfg, &mut out)?,
        Command::FrischParisi => frisch_parisi(&cfg, &mut out)?,
        Command::AnalyzeSignal => analyze_signal(&cfg, &mut out)?,
    }
    Ok(out.written)
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", cli.out.as_deref().map_or_else(|| PathBuf::from(&f), |d| d.join(&f)).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid_is_a_config_error_naming_the_field() {
        let text = r#"{"spectrum": {"nodes": [[1.0, 1.0]]}, "grids": {"t": []}}"#;
        match RunConfig::from_json(text, Path::new(".")) {
            Err(CliError::Config(msg)) => assert!(msg.contains("grids.t"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exponents_accept_inf_and_numbers() {
        let cfg = RunConfig::from_json(r#"{"p": "inf", "q": 1}"#, Path::new(".")).unwrap();
        assert_eq!((cfg.p, cfg.q), (Integrability::Infinite, Integrability::Finite(1.0)));
        assert!(RunConfig::from_json(r#"{"p": 0.5}"#, Path::new(".")).is_err());
    }

    #[test]
    fn depth_bound_depends_on_dimension() {
        assert!(RunConfig::from_json(r#"{"dim": 2, "depth": 31}"#, Path::new(".")).is_ok());
        assert!(RunConfig::from_json(r#"{"dim": 2, "depth": 32}"#, Path::new(".")).is_err());
    }

    #[test]
    fn missing_file_is_rejected() {
        let err = RunConfig::from_json(r#"{"samples": "no/such/file.csv"}"#, Path::new("/nonexistent")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn partial_measure_config_keeps_desk_defaults() {
        let cfg = RunConfig::from_json(r#"{"measure": {"n0": 7, "policy": {"pitch": 0.25}}}"#, Path::new(".")).unwrap();
        let desk = MeasureConfig::desk();
        assert_eq!(cfg.measure.n0, Some(7));
        assert_eq!(cfg.measure.policy.pitch, 0.25);
        assert_eq!((cfg.measure.letters, cfg.measure.policy.epsilon), (desk.letters, desk.policy.epsilon));
    }

    #[test]
    fn samples_parse_with_header_and_comments() {
        assert_eq!(parse_samples("value\n# c\n1.5\n-2\n").unwrap(), vec![1.5, -2.0]);
        assert!(parse_samples("1\nx\n").is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = RunConfig::from_json(r#"{"spectrum": {"nodes": [[1.0, 1.0]]}, "p": 2}"#, Path::new("/tmp")).unwrap();
        let again = RunConfig::from_json(&cfg.resolved_json(), Path::new("/elsewhere")).unwrap();
        assert_eq!(cfg, again);
    }
}
