//! Fidelity landscapes over the `(ε_A, δ)` imperfection plane.
//!
//! Gate quality is measured by the global-phase-insensitive fidelity
//! `F = ½|Tr[G†(Φ) U]|`, which equals 1 exactly when the realized propagator
//! matches the target gate up to a global phase. Scans evaluate F on a
//! uniform grid, contours of the infidelity `1-F` delineate the high-fidelity
//! plateaus, and plateau metrics (area fractions, axis half-widths) turn the
//! plateau comparisons into numbers.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

use crate::design::{target_gate, PhaseSequence};
use crate::pulse::{composite_propagator, ErrorPoint, IntegratorConfig, PulseEnvelope, PulseError};
use crate::su2::Unitary2;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ScanError {
    #[error("invalid scan grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Pulse(#[from] PulseError),
}

/// Global-phase-insensitive gate fidelity `½|Tr(target† · actual)|`.
pub fn fidelity(actual: &Unitary2, target: &Unitary2) -> f64 {
    let overlap = target.dagger().mul(actual).trace();
    (0.5 * overlap.norm()).clamp(0.0, 1.0)
}

/// Uniform rectangular grid over the error plane, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanGrid {
    pub eps_a_range: (f64, f64),
    pub delta_range: (f64, f64),
    pub n_eps: usize,
    pub n_delta: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self {
            eps_a_range: (-0.3, 0.3),
            delta_range: (-0.5, 0.5),
            n_eps: 100,
            n_delta: 100,
        }
    }
}

impl ScanGrid {
    pub fn validate(&self) -> Result<(), ScanError> {
        if self.n_eps < 2 || self.n_delta < 2 {
            return Err(ScanError::InvalidGrid(
                "need at least 2 points per axis".into(),
            ));
        }
        if self.eps_a_range.0 >= self.eps_a_range.1 || self.delta_range.0 >= self.delta_range.1 {
            return Err(ScanError::InvalidGrid("axis range must have min < max".into()));
        }
        if self.eps_a_range.0 <= -1.0 {
            return Err(ScanError::InvalidGrid(
                "eps_a range must stay above -1".into(),
            ));
        }
        Ok(())
    }

    pub fn eps_values(&self) -> Vec<f64> {
        linspace(self.eps_a_range.0, self.eps_a_range.1, self.n_eps)
    }

    pub fn delta_values(&self) -> Vec<f64> {
        linspace(self.delta_range.0, self.delta_range.1, self.n_delta)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Fidelity values over a [`ScanGrid`], row-major with ε_A varying slowest.
#[derive(Debug, Clone, Serialize)]
pub struct FidelityMap {
    pub grid: ScanGrid,
    pub values: Vec<f64>,
    pub sequence_id: String,
    pub target_phase: f64,
    pub envelope: PulseEnvelope,
}

impl FidelityMap {
    pub fn value(&self, i_eps: usize, j_delta: usize) -> f64 {
        self.values[i_eps * self.grid.n_delta + j_delta]
    }

    /// Fidelity at the grid point closest to the origin.
    pub fn value_nearest_origin(&self) -> f64 {
        let eps = self.grid.eps_values();
        let delta = self.grid.delta_values();
        let i = nearest_index(&eps, 0.0);
        let j = nearest_index(&delta, 0.0);
        self.value(i, j)
    }

    /// Largest pointwise |F_a - F_b| between two maps on identical grids.
    pub fn max_pointwise_diff(&self, other: &FidelityMap) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "grid shape mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// CSV rendering: header `eps_a,delta,fidelity`, ε_A varying slowest.
    pub fn to_csv(&self) -> String {
        let eps = self.grid.eps_values();
        let delta = self.grid.delta_values();
        let mut out = String::with_capacity(self.values.len() * 24);
        out.push_str("eps_a,delta,fidelity\n");
        for (i, ea) in eps.iter().enumerate() {
            for (j, d) in delta.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", ea, d, self.value(i, j)));
            }
        }
        out
    }
}

fn nearest_index(values: &[f64], x: f64) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .expect("axis is nonempty")
}

/// Evaluates the composite-gate fidelity at arbitrary points of the error
/// plane; the continuous model behind scans, cross-sections, and bisection.
pub struct Evaluator {
    seq: PhaseSequence,
    env: PulseEnvelope,
    cfg: IntegratorConfig,
    target: Unitary2,
}

impl Evaluator {
    pub fn new(seq: PhaseSequence, env: PulseEnvelope, cfg: IntegratorConfig) -> Self {
        let target = target_gate(seq.target_phase());
        Self {
            seq,
            env,
            cfg,
            target,
        }
    }

    pub fn sequence(&self) -> &PhaseSequence {
        &self.seq
    }

    pub fn fidelity_at(&self, eps_a: f64, delta: f64) -> f64 {
        let err = ErrorPoint::new(eps_a, delta);
        let u = composite_propagator(&self.seq, &self.env, &err, &self.cfg)
            .expect("pulse model accepts every in-range error point");
        fidelity(&u, &self.target)
    }

    pub fn infidelity_at(&self, eps_a: f64, delta: f64) -> f64 {
        1.0 - self.fidelity_at(eps_a, delta)
    }
}

/// Scan the error plane on `grid`. The result is a pure function of the
/// inputs: grid points are independent, so parallel evaluation cannot change
/// the values.
pub fn scan(
    seq: &PhaseSequence,
    grid: &ScanGrid,
    env: &PulseEnvelope,
    cfg: &IntegratorConfig,
) -> Result<FidelityMap, ScanError> {
    grid.validate()?;
    let ev = Evaluator::new(seq.clone(), *env, *cfg);
    let eps = grid.eps_values();
    let delta = grid.delta_values();
    let values: Vec<f64> = eps
        .par_iter()
        .flat_map_iter(|&ea| delta.iter().map(move |&d| (ea, d)))
        .map(|(ea, d)| ev.fidelity_at(ea, d))
        .collect();
    Ok(FidelityMap {
        grid: *grid,
        values,
        sequence_id: format!("{}-n{}", seq.family(), seq.n_pulses()),
        target_phase: seq.target_phase(),
        envelope: *env,
    })
}

/// Which axis of the error plane a cross-section runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    EpsA,
    Delta,
}

/// Infidelity along one axis through the origin, by direct evaluation of the
/// continuous model (not interpolation from a 2-D map).
pub fn cross_section(
    ev: &Evaluator,
    axis: Axis,
    range: (f64, f64),
    n_points: usize,
) -> Vec<(f64, f64)> {
    linspace(range.0, range.1, n_points)
        .into_iter()
        .map(|x| {
            let inf = match axis {
                Axis::EpsA => ev.infidelity_at(x, 0.0),
                Axis::Delta => ev.infidelity_at(0.0, x),
            };
            (x, inf)
        })
        .collect()
}

/// Isolines of the infidelity at fixed levels.
#[derive(Debug, Clone, Serialize)]
pub struct ContourSet {
    pub levels: Vec<f64>,
    /// One entry per level: a list of polylines in `(ε_A, δ)` coordinates.
    pub polylines: Vec<Vec<Vec<(f64, f64)>>>,
}

/// Marching-squares isolines of `1-F` with linear interpolation along cell
/// edges. Levels that are never crossed produce empty polyline lists.
pub fn extract_contours(map: &FidelityMap, levels: &[f64]) -> ContourSet {
    let eps = map.grid.eps_values();
    let delta = map.grid.delta_values();
    let infid =
        |i: usize, j: usize| -> f64 { 1.0 - map.value(i, j) };
    let polylines = levels
        .iter()
        .map(|&level| marching_squares(&eps, &delta, &infid, level))
        .collect();
    ContourSet {
        levels: levels.to_vec(),
        polylines,
    }
}

/// Global identifier of a cell edge; interpolated crossing points are
/// computed once per edge so shared segment endpoints match exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum EdgeKey {
    H(usize, usize),
    V(usize, usize),
}

fn marching_squares(
    xs: &[f64],
    ys: &[f64],
    value: &dyn Fn(usize, usize) -> f64,
    level: f64,
) -> Vec<Vec<(f64, f64)>> {
    let nx = xs.len();
    let ny = ys.len();
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();

    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            let a = value(i, j);
            let b = value(i + 1, j);
            let c = value(i + 1, j + 1);
            let d = value(i, j + 1);
            let mut case = 0usize;
            if a >= level {
                case |= 1;
            }
            if b >= level {
                case |= 2;
            }
            if c >= level {
                case |= 4;
            }
            if d >= level {
                case |= 8;
            }
            let bottom = EdgeKey::H(i, j);
            let top = EdgeKey::H(i, j + 1);
            let left = EdgeKey::V(i, j);
            let right = EdgeKey::V(i + 1, j);
            match case {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((right, top)),
                6 | 9 => segments.push((bottom, top)),
                7 | 8 => segments.push((left, top)),
                5 | 10 => {
                    // Saddle: disambiguate with the cell-center average.
                    let center = 0.25 * (a + b + c + d);
                    let pairs = if (case == 5) == (center >= level) {
                        [(left, top), (bottom, right)]
                    } else {
                        [(left, bottom), (top, right)]
                    };
                    segments.extend(pairs);
                }
                _ => unreachable!(),
            }
        }
    }

    let point_of = |key: EdgeKey| -> (f64, f64) {
        match key {
            EdgeKey::H(i, j) => {
                let (v0, v1) = (value(i, j), value(i + 1, j));
                let t = crossing(v0, v1, level);
                (xs[i] + t * (xs[i + 1] - xs[i]), ys[j])
            }
            EdgeKey::V(i, j) => {
                let (v0, v1) = (value(i, j), value(i, j + 1));
                let t = crossing(v0, v1, level);
                (xs[i], ys[j] + t * (ys[j + 1] - ys[j]))
            }
        }
    };

    chain_segments(&segments)
        .into_iter()
        .map(|chain| chain.into_iter().map(point_of).collect())
        .collect()
}

fn crossing(v0: f64, v1: f64, level: f64) -> f64 {
    if (v1 - v0).abs() < f64::MIN_POSITIVE {
        0.5
    } else {
        ((level - v0) / (v1 - v0)).clamp(0.0, 1.0)
    }
}

/// Join segments that share edge keys into chains; open chains first
/// (started from degree-1 edges), then closed loops.
fn chain_segments(segments: &[(EdgeKey, EdgeKey)]) -> Vec<Vec<EdgeKey>> {
    let mut adjacency: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (idx, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(idx);
        adjacency.entry(*b).or_default().push(idx);
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();

    let walk = |start_seg: usize, start_key: EdgeKey, used: &mut Vec<bool>| -> Vec<EdgeKey> {
        let mut chain = vec![start_key];
        let mut seg = start_seg;
        let mut key = start_key;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next_key = if a == key { b } else { a };
            chain.push(next_key);
            key = next_key;
            match adjacency
                .get(&key)
                .and_then(|ids| ids.iter().find(|&&id| !used[id]))
            {
                Some(&next_seg) => seg = next_seg,
                None => break,
            }
        }
        chain
    };

    // Open chains: start at edges used by exactly one segment.
    let mut starts: Vec<(EdgeKey, usize)> = adjacency
        .iter()
        .filter(|(_, ids)| ids.len() == 1)
        .map(|(k, ids)| (*k, ids[0]))
        .collect();
    starts.sort_by_key(|(k, _)| match *k {
        EdgeKey::H(i, j) => (0usize, i, j),
        EdgeKey::V(i, j) => (1usize, i, j),
    });
    for (key, seg) in starts {
        if !used[seg] {
            chains.push(walk(seg, key, &mut used));
        }
    }
    // Remaining segments form closed loops.
    for idx in 0..segments.len() {
        if !used[idx] {
            let start = segments[idx].0;
            let mut chain = walk(idx, start, &mut used);
            if chain.first() != chain.last() {
                chain.push(chain[0]);
            }
            chains.push(chain);
        }
    }
    chains
}

/// Plateau size measures per infidelity level.
#[derive(Debug, Clone, Serialize)]
pub struct PlateauMetrics {
    pub levels: Vec<f64>,
    /// Fraction of grid points with `1-F` below each level.
    pub area_fraction: Vec<f64>,
    /// Half-width of the connected sub-level interval through the origin
    /// along the ε_A axis, per level.
    pub eps_a_halfwidth: Vec<f64>,
    /// Same along the δ axis.
    pub delta_halfwidth: Vec<f64>,
}

/// Compute plateau metrics: area fractions by counting grid points of `map`,
/// half-widths by bisection on the continuous model to 1e-4 in coordinate.
pub fn plateau_metrics(map: &FidelityMap, ev: &Evaluator, levels: &[f64]) -> PlateauMetrics {
    let total = map.values.len() as f64;
    let area_fraction = levels
        .iter()
        .map(|&level| {
            map.values.iter().filter(|&&f| 1.0 - f < level).count() as f64 / total
        })
        .collect();
    let eps_a_halfwidth = levels
        .iter()
        .map(|&level| axis_halfwidth(ev, Axis::EpsA, map.grid.eps_a_range, level))
        .collect();
    let delta_halfwidth = levels
        .iter()
        .map(|&level| axis_halfwidth(ev, Axis::Delta, map.grid.delta_range, level))
        .collect();
    PlateauMetrics {
        levels: levels.to_vec(),
        area_fraction,
        eps_a_halfwidth,
        delta_halfwidth,
    }
}

fn axis_halfwidth(ev: &Evaluator, axis: Axis, range: (f64, f64), level: f64) -> f64 {
    let infid = |x: f64| match axis {
        Axis::EpsA => ev.infidelity_at(x, 0.0),
        Axis::Delta => ev.infidelity_at(0.0, x),
    };
    if infid(0.0) >= level {
        return 0.0;
    }
    let plus = first_crossing(&infid, range.1.max(0.0), level);
    let minus = first_crossing(&|x| infid(-x), (-range.0).max(0.0), level);
    0.5 * (plus + minus)
}

/// Distance from the origin to the first point where `infid` reaches
/// `level`, marching outward then bisecting to 1e-4; `bound` if never
/// reached.
fn first_crossing(infid: &dyn Fn(f64) -> f64, bound: f64, level: f64) -> f64 {
    const MARCH: usize = 256;
    if bound <= 0.0 {
        return 0.0;
    }
    let step = bound / MARCH as f64;
    let mut lo = 0.0;
    let mut hi = None;
    for k in 1..=MARCH {
        let x = step * k as f64;
        if infid(x) >= level {
            hi = Some(x);
            break;
        }
        lo = x;
    }
    let Some(mut hi) = hi else {
        return bound;
    };
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if infid(mid) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
