//! Heavy-tailed Poisson trees: event fields, traced paths and weaves.
//!
//! At level `n` events `(x, t, r)` arrive with intensity
//! `n^{1/α} dx ⊗ n dt ⊗ μ_n(dr)`, where `μ_n(A) = μ(n^{1/α} A)`. An event
//! pulls every path currently in `[x − r, x + r]` to `x`.

mod field;
mod model;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashSet};
use std::io::Write;

use ordered_float::OrderedFloat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use field::{EventField, DEFAULT_TRUNCATION_TOL};
pub use model::{default_mu, HeavyTailModel, ModelSpec};

use crate::crossing::CrossingWindow;
use crate::path::StepBuilder;
use crate::stats::{ks_critical, ks_statistic, mean, wilson};
use crate::{CadlagPath, Error, PathEnsemble, Result};

/// Mixes a list of words into one seed (SplitMix64 finalizer chained over the parts).
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x243F_6A88_85A3_08D3;
    for &p in parts {
        h ^= p;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventPoint {
    pub x: f64,
    pub t: f64,
    pub r: f64,
}

impl EventPoint {
    pub fn covers(&self, y: f64) -> bool {
        (y - self.x).abs() <= self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimWindow {
    pub x_lo: f64,
    pub x_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub n: f64,
}

impl SimWindow {
    pub fn new(x_lo: f64, x_hi: f64, t_lo: f64, t_hi: f64, n: f64) -> Result<Self> {
        let w = SimWindow { x_lo, x_hi, t_lo, t_hi, n };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_lo, self.x_hi, self.t_lo, self.t_hi].iter().all(|v| v.is_finite());
        if !finite || self.x_lo > self.x_hi || self.t_lo > self.t_hi || !(self.n >= 1.0) {
            return Err(Error::InvalidParameter(format!("invalid simulation window {self:?}")));
        }
        Ok(())
    }
}

/// Events whose reach meets `[x_lo, x_hi]` during `[t_lo, t_hi]`, sorted by time.
pub fn sample_events(model: &HeavyTailModel, window: &SimWindow, seed: u64) -> Result<Vec<EventPoint>> {
    window.validate()?;
    if window.t_lo == window.t_hi {
        return Ok(Vec::new());
    }
    let mut f = EventField::new(model, window.n, window.t_lo, window.t_hi, seed, DEFAULT_TRUNCATION_TOL);
    Ok(f.events_reaching(window.x_lo, window.x_hi))
}

/// Follows the path from `z = (x, t)` through a time-sorted event list up to `horizon`.
///
/// The result lives on `[t, ∞)`; beyond the horizon it keeps its last value.
pub fn trace_path(z: (f64, f64), events: &[EventPoint], horizon: f64) -> Result<CadlagPath> {
    let (mut y, t0) = z;
    let mut b = StepBuilder::new(t0, f64::INFINITY, y);
    let start = events.partition_point(|e| e.t < t0);
    for e in events[start..].iter().take_while(|e| e.t <= horizon) {
        if e.covers(y) && e.x != y {
            y = e.x;
            b = b.jump(e.t, y);
        }
    }
    b.build()
}

/// Start points of a weave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// `Z²_n` (pitch `n^{−1/α}` in space, `1/n` in time) intersected with the window.
    #[default]
    Lattice,
    /// `nx × nt` evenly spaced points, endpoints included.
    Uniform { nx: usize, nt: usize },
    Points { points: Vec<(f64, f64)> },
}

impl GridSpec {
    pub fn starts(&self, window: &SimWindow, alpha: f64) -> Vec<(f64, f64)> {
        let lin = |lo: f64, hi: f64, k: usize| -> Vec<f64> {
            match k {
                0 => vec![],
                1 => vec![(lo + hi) / 2.0],
                _ => (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect(),
            }
        };
        let (xs, ts) = match self {
            GridSpec::Points { points } => return points.clone(),
            GridSpec::Lattice => {
                let sx = window.n.powf(1.0 / alpha);
                let st = window.n;
                let xs = ((window.x_lo * sx).ceil() as i64..=(window.x_hi * sx).floor() as i64)
                    .map(|k| k as f64 / sx)
                    .collect::<Vec<_>>();
                let ts = ((window.t_lo * st).ceil() as i64..=(window.t_hi * st).floor() as i64)
                    .map(|k| k as f64 / st)
                    .collect::<Vec<_>>();
                (xs, ts)
            }
            GridSpec::Uniform { nx, nt } => (lin(window.x_lo, window.x_hi, *nx), lin(window.t_lo, window.t_hi, *nt)),
        };
        ts.iter().flat_map(|&t| xs.iter().map(move |&x| (x, t))).collect()
    }
}

/// A simulated weave restricted to finitely many start points.
#[derive(Debug, Clone)]
pub struct Weave {
    /// Paths on `[t_z, ∞)`, constant after `horizon`.
    pub ensemble: PathEnsemble,
    pub starts: Vec<(f64, f64)>,
    pub horizon: f64,
    /// Events processed at the same time as their predecessor.
    pub simultaneous_events: usize,
    pub truncation_radius: f64,
    pub truncation_bias: f64,
}

impl Weave {
    /// Every path is truncated at the horizon.
    pub fn truncated(&self) -> bool {
        true
    }
}

type QueueKey = Reverse<(OrderedFloat<f64>, usize, i64, usize)>;

/// Runs all start points through one shared field, coalescing paths that share a value.
pub fn trace_many(field: &mut EventField, starts: &[(f64, f64)], horizon: f64) -> (Vec<Vec<(f64, f64)>>, usize) {
    let mut births: Vec<usize> = (0..starts.len()).collect();
    births.sort_by(|&a, &b| starts[a].1.total_cmp(&starts[b].1).then(a.cmp(&b)));
    let mut jumps: Vec<Vec<(f64, f64)>> = vec![Vec::new(); starts.len()];
    let mut at: BTreeMap<OrderedFloat<f64>, Vec<usize>> = BTreeMap::new();
    let mut heap: BinaryHeap<QueueKey> = BinaryHeap::new();
    let mut queued: HashSet<(usize, i64)> = HashSet::new();
    let mut simultaneous = 0;
    let mut last_t = f64::NAN;

    let ensure = |field: &mut EventField, heap: &mut BinaryHeap<QueueKey>, queued: &mut HashSet<(usize, i64)>, y: f64, t: f64| {
        for band in 0..field.band_count() {
            for c in field.cells_reaching(band, y, y) {
                if queued.insert((band, c)) {
                    for (i, e) in field.cell(band, c).iter().enumerate() {
                        if e.t >= t && e.t <= horizon {
                            heap.push(Reverse((OrderedFloat(e.t), band, c, i)));
                        }
                    }
                }
            }
        }
    };

    let mut bi = 0;
    loop {
        let next_t = heap.peek().map(|Reverse((t, ..))| t.0);
        if bi < births.len() && next_t.is_none_or(|t| starts[births[bi]].1 <= t) {
            let id = births[bi];
            bi += 1;
            let (x, t) = starts[id];
            if t > horizon {
                continue;
            }
            at.entry(OrderedFloat(x)).or_default().push(id);
            ensure(field, &mut heap, &mut queued, x, t);
            continue;
        }
        let Some(Reverse((t, band, c, i))) = heap.pop() else {
            break;
        };
        let e = field.cell(band, c)[i];
        if t.0 == last_t {
            simultaneous += 1;
        }
        last_t = t.0;
        let keys: Vec<OrderedFloat<f64>> = at.range(OrderedFloat(e.x - e.r)..=OrderedFloat(e.x + e.r)).map(|(k, _)| *k).collect();
        if keys.is_empty() {
            continue;
        }
        let mut gathered = Vec::new();
        for k in keys {
            let ids = at.remove(&k).unwrap_or_default();
            if k.0 != e.x {
                for &id in &ids {
                    jumps[id].push((e.t, e.x));
                }
            }
            gathered.extend(ids);
        }
        at.entry(OrderedFloat(e.x)).or_default().extend(gathered);
        ensure(field, &mut heap, &mut queued, e.x, e.t);
    }
    (jumps, simultaneous)
}

fn path_from_jumps(x0: f64, t0: f64, jumps: &[(f64, f64)]) -> Result<CadlagPath> {
    jumps
        .iter()
        .fold(StepBuilder::new(t0, f64::INFINITY, x0), |b, &(t, v)| b.jump(t, v))
        .build()
}

/// Builds the weave from the grid starts inside `window`, up to `window.t_hi`.
pub fn build_weave(model: &HeavyTailModel, window: &SimWindow, grid: &GridSpec, seed: u64) -> Result<Weave> {
    build_weave_with_tol(model, window, grid, seed, DEFAULT_TRUNCATION_TOL)
}

pub fn build_weave_with_tol(model: &HeavyTailModel, window: &SimWindow, grid: &GridSpec, seed: u64, tol: f64) -> Result<Weave> {
    window.validate()?;
    let starts = grid.starts(window, model.alpha());
    if starts.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let t_lo = starts.iter().map(|s| s.1).fold(window.t_lo, f64::min);
    let mut field = EventField::new(model, window.n, t_lo, window.t_hi, seed, tol);
    let (jumps, simultaneous) = trace_many(&mut field, &starts, window.t_hi);
    let paths = starts
        .iter()
        .zip(&jumps)
        .map(|(&(x, t), j)| path_from_jumps(x, t, j))
        .collect::<Result<Vec<_>>>()?;
    let ids = (0..paths.len()).map(|i| format!("z{i}")).collect();
    Ok(Weave {
        ensemble: PathEnsemble::with_ids(ids, paths)?,
        starts,
        horizon: window.t_hi,
        simultaneous_events: simultaneous,
        truncation_radius: field.truncation_radius(),
        truncation_bias: field.truncation_bias(),
    })
}

/// Direct compound-Poisson sample of the one-particle motion at level `n` on `[0, duration]`.
pub fn one_particle_cp(model: &HeavyTailModel, n: f64, duration: f64, seed: u64) -> Result<CadlagPath> {
    let (_, jumps) = one_particle_jumps(model, n, duration, seed)?;
    let mut y = 0.0;
    let mut b = StepBuilder::new(0.0, duration, 0.0);
    for (t, j) in jumps {
        y += j;
        b = b.jump(t, y);
    }
    b.build()
}

/// Jump times and displacements of the compound-Poisson motion, already rescaled to level `n`.
fn one_particle_jumps(model: &HeavyTailModel, n: f64, duration: f64, seed: u64) -> Result<(usize, Vec<(f64, f64)>)> {
    if !(n >= 1.0) || !(duration >= 0.0) {
        return Err(Error::InvalidParameter(format!("need n >= 1 and duration >= 0, got n={n}, duration={duration}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = n * duration;
    let mean = model.k() * span;
    let count = if mean > 0.0 {
        Poisson::new(mean).map(|p| p.sample(&mut rng) as usize).unwrap_or(0)
    } else {
        0
    };
    let scale = n.powf(-1.0 / model.alpha());
    let mut times: Vec<f64> = (0..count).map(|_| rng.random::<f64>() * span).collect();
    times.sort_by(f64::total_cmp);
    let jumps = times
        .into_iter()
        .map(|t| (t / n, model.sample_jump(&mut rng) * scale))
        .collect();
    Ok((count, jumps))
}

/// Value at `duration` and hit count of a path traced from `(0, 0)` through a fresh field.
fn traced_marginal(model: &HeavyTailModel, n: f64, duration: f64, seed: u64) -> (usize, f64) {
    if duration <= 0.0 {
        return (0, 0.0);
    }
    let mut f = EventField::new(model, n, 0.0, duration, seed, DEFAULT_TRUNCATION_TOL);
    f.trace_hits(0.0, 0.0, duration)
}

/// Two-sample comparison of `X(duration)` between field tracing and the direct sampler.
#[derive(Debug, Clone, Serialize)]
pub struct TwoSampleReport {
    pub reps: usize,
    pub ks: f64,
    /// KS critical value at the 1% level.
    pub critical: f64,
    pub mean_jumps_a: f64,
    pub mean_jumps_b: f64,
    #[serde(skip)]
    pub sample_a: Vec<f64>,
    #[serde(skip)]
    pub sample_b: Vec<f64>,
}

impl TwoSampleReport {
    fn new(a: Vec<(usize, f64)>, b: Vec<(usize, f64)>) -> Self {
        let (ja, xa): (Vec<f64>, Vec<f64>) = a.into_iter().map(|(k, x)| (k as f64, x)).unzip();
        let (jb, xb): (Vec<f64>, Vec<f64>) = b.into_iter().map(|(k, x)| (k as f64, x)).unzip();
        TwoSampleReport {
            reps: xa.len(),
            ks: ks_statistic(&xa, &xb),
            critical: ks_critical(xa.len(), xb.len(), 0.01),
            mean_jumps_a: mean(&ja),
            mean_jumps_b: mean(&jb),
            sample_a: xa,
            sample_b: xb,
        }
    }

    pub fn passes(&self) -> bool {
        self.ks < self.critical
    }
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 replicates, got {reps}")));
    }
    Ok(())
}

/// Sample `a` is field tracing, sample `b` the compound-Poisson sampler.
pub fn cp_vs_trace_check(model: &HeavyTailModel, n: f64, duration: f64, reps: usize, seed: u64) -> Result<TwoSampleReport> {
    check_reps(reps)?;
    let a: Vec<(usize, f64)> = (0..reps)
        .into_par_iter()
        .map(|i| traced_marginal(model, n, duration, derive_seed(&[seed, 1, i as u64])))
        .collect();
    let b = (0..reps)
        .into_par_iter()
        .map(|i| {
            let (k, jumps) = one_particle_jumps(model, n, duration, derive_seed(&[seed, 2, i as u64]))?;
            Ok((k, jumps.iter().map(|j| j.1).sum::<f64>()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TwoSampleReport::new(a, b))
}

/// Sample `a` is `X_n(1)`, sample `b` is `n^{−1/α} X_1(n)`; both traced through fields.
pub fn scaling_check(model: &HeavyTailModel, n: f64, reps: usize, seed: u64) -> Result<TwoSampleReport> {
    check_reps(reps)?;
    if !(n >= 1.0) {
        return Err(Error::InvalidParameter(format!("need n >= 1, got {n}")));
    }
    let scale = n.powf(-1.0 / model.alpha());
    let a: Vec<(usize, f64)> = (0..reps)
        .into_par_iter()
        .map(|i| traced_marginal(model, n, 1.0, derive_seed(&[seed, 3, i as u64])))
        .collect();
    let b: Vec<(usize, f64)> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let (k, x) = traced_marginal(model, 1.0, n, derive_seed(&[seed, 4, i as u64]));
            (k, x * scale)
        })
        .collect();
    Ok(TwoSampleReport::new(a, b))
}

/// Exit times `τ_1, τ_2, …` of the strip `[r, r + 2ε]`, each path started at
/// `(r + ε, τ_{m−1})` with `τ_0 = −T`. Stops at the first `τ_m ≥ T`; an
/// infinite last entry means no exit before `horizon`.
pub fn stopping_times(field: &mut EventField, w: &CrossingWindow, horizon: f64) -> Vec<f64> {
    let (lo, hi) = (w.r, w.r + 2.0 * w.eps);
    let mut taus = Vec::new();
    let mut tau = -w.t;
    loop {
        let jumps = field.trace_jumps(w.r + w.eps, tau, horizon, |y| y <= lo || y >= hi);
        tau = match jumps.last() {
            Some(&(t, y)) if y <= lo || y >= hi => t,
            _ => f64::INFINITY,
        };
        taus.push(tau);
        if tau >= w.t {
            return taus;
        }
    }
}

/// `true` when some gap `τ_m − τ_{m−1}` (with `τ_0 = −T`) is at most `delta`.
pub fn short_gap(taus: &[f64], t_max: f64, delta: f64) -> bool {
    let mut prev = -t_max;
    for &t in taus {
        if t - prev <= delta {
            return true;
        }
        prev = t;
    }
    false
}

#[derive(Debug, Clone, Serialize)]
pub struct GapEstimate {
    pub delta: f64,
    pub estimate: f64,
    pub ci: (f64, f64),
    pub reps: usize,
}

/// Estimates `P[some exit gap ≤ δ]` for each `δ` on shared replicates.
pub fn stopping_time_diagnostic(
    model: &HeavyTailModel,
    n: f64,
    w: &CrossingWindow,
    deltas: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<GapEstimate>> {
    if reps == 0 {
        return Err(Error::InvalidParameter("need at least one replicate".into()));
    }
    let dmax = deltas.iter().copied().fold(0.0, f64::max);
    let horizon = w.t + dmax;
    let traces: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut f = EventField::new(model, n, -w.t, horizon, derive_seed(&[seed, 5, i as u64]), DEFAULT_TRUNCATION_TOL);
            stopping_times(&mut f, w, horizon)
        })
        .collect();
    Ok(deltas
        .iter()
        .map(|&delta| {
            let k = traces.iter().filter(|ts| short_gap(ts, w.t, delta)).count();
            GapEstimate {
                delta,
                estimate: k as f64 / reps as f64,
                ci: wilson(k, reps),
                reps,
            }
        })
        .collect())
}

pub fn write_events_csv<W: Write>(events: &[EventPoint], out: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["x", "t", "r"])?;
    for e in events {
        wr.serialize((e.x, e.t, e.r))?;
    }
    wr.flush()?;
    Ok(())
}
