//! Saturation functions: the wavelet coefficients that are as large as a
//! `μ`-adapted Besov space allows, and the audit of their leaders.

use serde::{Deserialize, Serialize};

use crate::dyadic::{irreducible, neighborhood3, DyadicCube};
use crate::measure::{CubeMass, Environment};
use crate::spectra::Integrability;
use crate::wavelet::{LeaderField, WaveletField};

/// `τ*` of an environment as a piecewise-linear table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarTable {
    pub nodes: Vec<(f64, f64)>,
}

impl StarTable {
    pub fn of(env: &Environment) -> Self {
        if let Some(s) = env.spectrum() {
            return Self { nodes: s.nodes };
        }
        let (lo, hi) = env.alpha_range();
        if hi - lo < 1e-12 {
            return Self { nodes: vec![(lo, env.tau_star(lo))] };
        }
        let n = 2000;
        let nodes = (0..=n)
            .map(|i| {
                let a = lo + (hi - lo) * i as f64 / n as f64;
                (a, env.tau_star(a))
            })
            .collect();
        Self { nodes }
    }

    pub fn alpha_min(&self) -> f64 {
        self.nodes[0].0
    }

    pub fn alpha_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].0
    }

    /// Evaluation clamped to the support.
    pub fn eval(&self, alpha: f64) -> f64 {
        let n = &self.nodes;
        if n.len() == 1 {
            return n[0].1;
        }
        let x = alpha.clamp(self.alpha_min(), self.alpha_max());
        let i = n.partition_point(|q| q.0 < x).clamp(1, n.len() - 1);
        let (a, b) = (n[i - 1], n[i]);
        a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
    }

    /// `max τ*` on `[lo, hi]`.
    pub fn max_on(&self, lo: f64, hi: f64) -> f64 {
        let inner = self.nodes.iter().filter(|q| q.0 > lo && q.0 < hi).map(|q| q.1);
        inner.fold(self.eval(lo).max(self.eval(hi)), f64::max)
    }

    pub fn min_on(&self, lo: f64, hi: f64) -> f64 {
        let inner = self.nodes.iter().filter(|q| q.0 > lo && q.0 < hi).map(|q| q.1);
        inner.fold(self.eval(lo).min(self.eval(hi)), f64::min)
    }
}

/// One `N` of the schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleBlock {
    pub n: u32,
    /// `M_N`.
    pub pieces: usize,
    /// `I^N_i` as closed intervals.
    pub intervals: Vec<(f64, f64)>,
    pub eta: f64,
    /// `J_N`.
    pub start: u32,
    /// Largest counting deviation over the intervals and the generations
    /// `J_N..` that were audited.
    pub achieved_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationSchedule {
    pub dim: usize,
    /// Coefficients exist for generations `0..levels`.
    pub levels: u32,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub blocks: Vec<ScheduleBlock>,
    /// Human-readable notes, e.g. when the depth is too shallow.
    pub notes: Vec<String>,
}

impl SaturationSchedule {
    /// `J_2`, when realized.
    pub fn first_active(&self) -> Option<u32> {
        self.blocks.iter().find(|b| b.n == 2).map(|b| b.start)
    }

    /// `N_j`, or `None` below `J_1`.
    pub fn n_at(&self, j: u32) -> Option<u32> {
        self.blocks.iter().rev().find(|b| b.start <= j).map(|b| b.n)
    }

    pub fn eta(&self, n: u32) -> Option<f64> {
        self.blocks.iter().find(|b| b.n == n).map(|b| b.eta)
    }
}

/// Sorted coarse exponents `log₂ μ(λ)/(−j)` per generation.
struct ExponentHistogram {
    sorted: Vec<Vec<f64>>,
}

impl ExponentHistogram {
    fn new(masses: &[Vec<f64>]) -> Self {
        let sorted = masses
            .iter()
            .enumerate()
            .map(|(j, m)| {
                let mut v: Vec<f64> = if j == 0 { vec![0.0] } else { m.iter().map(|l| -l / j as f64).collect() };
                v.sort_by(f64::total_cmp);
                v
            })
            .collect();
        Self { sorted }
    }

    /// `#𝒟_μ(j, [lo, hi])`.
    fn count(&self, j: u32, lo: f64, hi: f64) -> usize {
        let v = &self.sorted[j as usize];
        v.partition_point(|&a| a <= hi) - v.partition_point(|&a| a < lo)
    }
}

fn uniform_partition(lo: f64, hi: f64, pieces: usize) -> Vec<(f64, f64)> {
    (0..pieces)
        .map(|i| {
            let a = lo + (hi - lo) * i as f64 / pieces as f64;
            let b = lo + (hi - lo) * (i + 1) as f64 / pieces as f64;
            (a, b)
        })
        .collect()
}

fn partition_for(table: &StarTable, n: u32, at_least: usize) -> Vec<(f64, f64)> {
    let (lo, hi) = (table.alpha_min(), table.alpha_max());
    if hi - lo < 1e-12 {
        return vec![(lo, lo)];
    }
    let cap = 1.0 / n as f64;
    let mut pieces = at_least.max(1);
    loop {
        let parts = uniform_partition(lo, hi, pieces);
        let fine = parts
            .iter()
            .all(|&(a, b)| b - a <= cap + 1e-15 && table.max_on(a, b) - table.min_on(a, b) <= cap + 1e-15);
        if fine {
            return parts;
        }
        pieces += 1;
    }
}

fn deviation(hist: &ExponentHistogram, table: &StarTable, parts: &[(f64, f64)], n: u32, j: u32) -> f64 {
    let pad = 1.0 / n as f64;
    parts
        .iter()
        .map(|&(a, b)| {
            let count = hist.count(j, a - pad, b + pad);
            let top = table.max_on(a, b);
            if count == 0 {
                f64::INFINITY
            } else {
                ((count as f64).log2() / j as f64 - top).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// The partitions, tolerances `η_N` and thresholds `J_N` for generations
/// `1..levels`, all measured on the environment.
pub fn build_schedule(env: &Environment, levels: u32) -> SaturationSchedule {
    assert!(env.depth() + 1 >= levels, "environment shallower than the requested levels");
    let table = StarTable::of(env);
    let masses: Vec<Vec<f64>> = (0..levels).map(|j| env.log2_masses(j)).collect();
    let hist = ExponentHistogram::new(&masses);
    build_schedule_from(&table, &hist, env.dim(), levels)
}

fn build_schedule_from(table: &StarTable, hist: &ExponentHistogram, dim: usize, levels: u32) -> SaturationSchedule {
    let top = levels.saturating_sub(1);
    let point = table.alpha_max() - table.alpha_min() < 1e-12;
    let mut blocks: Vec<ScheduleBlock> = Vec::new();
    let mut notes = Vec::new();
    let mut n = 1u32;
    while top >= 1 && blocks.last().is_none_or(|b| b.start < top) {
        let prev = blocks.last();
        let at_least = prev.map_or(1, |b| b.pieces);
        let intervals = partition_for(table, n, at_least);
        let pieces = intervals.len();
        let first_candidate = prev.map_or(1, |b| b.start + 1);
        let mut chosen = None;
        for cand in first_candidate..=top {
            let achieved = (cand..=top).map(|j| deviation(hist, table, &intervals, n, j)).fold(0.0, f64::max);
            let eta = achieved.max(1.0 / n as f64);
            let ok = match blocks.len() {
                0 => true,
                len => {
                    let eta_prev = blocks[len - 1].eta;
                    let decreasing = eta <= eta_prev;
                    let room = (pieces as f64).log2() <= cand as f64 * eta_prev;
                    let growth = if len >= 2 {
                        (blocks[len - 1].start as f64) * blocks[len - 2].eta < cand as f64 * eta_prev
                    } else {
                        true
                    };
                    decreasing && room && growth
                }
            };
            if ok {
                chosen = Some((cand, eta, achieved));
                break;
            }
        }
        let Some((start, eta, achieved)) = chosen else {
            break;
        };
        blocks.push(ScheduleBlock { n, pieces, intervals, eta, start, achieved_deviation: achieved });
        n += 1;
    }
    let realized = blocks.last().map_or(0, |b| b.n);
    if realized < 3 {
        notes.push(format!(
            "depth {levels} realizes N only up to {realized}; generations from J_2 on all use the last block"
        ));
    }
    if point {
        notes.push("point spectrum: one degenerate interval per N".into());
    }
    SaturationSchedule {
        dim,
        levels,
        alpha_min: table.alpha_min(),
        alpha_max: table.alpha_max(),
        blocks,
        notes,
    }
}

/// The coefficients of `g^{μ,p,q}` together with the schedule that fixed them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationField {
    pub field: WaveletField,
    pub schedule: SaturationSchedule,
    pub p: Integrability,
    pub q: Integrability,
}

/// Zero below `J_2`; above it `w_λ μ(λ)` for `p = ∞` and
/// `w_λ μ(λ) 2^{−j̄ τ*(α_λ̄)/p}` otherwise, the same for every orientation.
pub fn saturation_coefficients(env: &Environment, p: Integrability, q: Integrability, order: u32, levels: u32) -> SaturationField {
    let table = StarTable::of(env);
    let masses: Vec<Vec<f64>> = (0..levels).map(|j| env.log2_masses(j)).collect();
    let hist = ExponentHistogram::new(&masses);
    let schedule = build_schedule_from(&table, &hist, env.dim(), levels);
    let d = env.dim();
    let mut field = WaveletField::zeros(d, levels, order);
    let Some(j2) = schedule.first_active() else {
        return SaturationField { field, schedule, p, q };
    };
    let q_inv = q.reciprocal();
    let (amin, amax) = (table.alpha_min(), table.alpha_max());
    for j in j2..levels {
        let jf = j as f64;
        let log2_w = match p {
            Integrability::Infinite => -2.0 * q_inv * jf.log2(),
            Integrability::Finite(pv) => {
                let n = schedule.n_at(j).expect("j >= J_2");
                let eta = schedule.eta(n - 1).expect("previous block exists");
                -3.0 * jf * eta / pv - (1.0 / pv + 2.0 * q_inv) * jf.log2()
            }
        };
        let level = &masses[j as usize];
        for (flat, &lm) in level.iter().enumerate() {
            let mut log2_c = log2_w + lm;
            if let Integrability::Finite(pv) = p {
                let cube = DyadicCube::from_flat_index(j, d, flat);
                let bar = irreducible(&cube);
                if bar.j > 0 {
                    let jb = bar.j as f64;
                    let alpha = (-masses[bar.j as usize][bar.flat_index()] / jb).clamp(amin, amax);
                    log2_c -= jb * table.eval(alpha) / pv;
                }
            }
            let c = log2_c.exp2();
            for band in &mut field.details[j as usize] {
                band[flat] = c;
            }
        }
    }
    SaturationField { field, schedule, p, q }
}

/// Per-generation outcome of the leader audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparabilityRow {
    pub j: u32,
    pub cubes: usize,
    pub lower_violations: usize,
    pub upper_violations: usize,
    /// `max log₂(L_λ/c̃_λ)/j` over cubes with `c̃_λ > 0`.
    pub worst_log_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparabilityReport {
    pub epsilon: f64,
    pub rows: Vec<ComparabilityRow>,
    /// Smallest `J^ε` in range from which the upper bound never fails.
    pub j_epsilon: Option<u32>,
}

impl ComparabilityReport {
    pub fn lower_violation_rate(&self) -> f64 {
        let total: usize = self.rows.iter().map(|r| r.cubes).sum();
        let bad: usize = self.rows.iter().map(|r| r.lower_violations).sum();
        bad as f64 / total.max(1) as f64
    }

    pub fn upper_violation_rate(&self) -> f64 {
        let total: usize = self.rows.iter().map(|r| r.cubes).sum();
        let bad: usize = self.rows.iter().map(|r| r.upper_violations).sum();
        bad as f64 / total.max(1) as f64
    }
}

/// Checks `c̃_λ ≤ L_λ ≤ 2^{jε} c̃_λ` with `c̃_λ` the largest same-generation
/// coefficient in `3λ`.
pub fn verify_leader_comparability(
    field: &WaveletField,
    leaders: &LeaderField,
    epsilon: f64,
    j_range: (u32, u32),
) -> ComparabilityReport {
    let d = field.dim;
    let (lo, hi) = j_range;
    let hi = hi.min(field.levels.saturating_sub(1));
    let mut rows = Vec::new();
    for j in lo..=hi {
        let own: Vec<f64> = (0..1usize << (d as u32 * j))
            .map(|k| field.details[j as usize].iter().map(|b| b[k].abs()).fold(0.0, f64::max))
            .collect();
        let mut row = ComparabilityRow {
            j,
            cubes: own.len(),
            lower_violations: 0,
            upper_violations: 0,
            worst_log_ratio: f64::NEG_INFINITY,
        };
        for k in 0..own.len() {
            let cube = DyadicCube::from_flat_index(j, d, k);
            let tilde = neighborhood3(&cube).iter().map(|c| own[c.flat_index()]).fold(0.0, f64::max);
            let l = leaders.values[j as usize][k];
            if tilde > l {
                row.lower_violations += 1;
            }
            if l > (j as f64 * epsilon).exp2() * tilde {
                row.upper_violations += 1;
            }
            if tilde > 0.0 && j > 0 {
                row.worst_log_ratio = row.worst_log_ratio.max((l / tilde).log2() / j as f64);
            }
        }
        rows.push(row);
    }
    let j_epsilon = match rows.iter().rposition(|r| r.upper_violations > 0) {
        None => rows.first().map(|r| r.j),
        Some(i) if i + 1 < rows.len() => Some(rows[i + 1].j),
        Some(_) => None,
    };
    ComparabilityReport { epsilon, rows, j_epsilon }
}
