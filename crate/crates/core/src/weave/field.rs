use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::{derive_seed, EventPoint, HeavyTailModel};

/// Default relative tolerance on hit rate lost to radius truncation.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
struct Band {
    /// unscaled radius range `(lo, hi]`
    lo: f64,
    hi: f64,
    mass: f64,
    /// scaled cell width; also twice the largest scaled radius in the band
    width: f64,
    /// expected event count per cell over the time range
    cell_mean: f64,
}

/// Lazily generated Poisson event field at level `n` over the time range
/// `[t_lo, t_hi]` and the whole real line.
///
/// Radii are split into dyadic bands; within a band the line is cut into cells
/// whose width is the band's reach. A cell's events depend only on
/// `(seed, band, cell)`, so the realization does not depend on which cells
/// are looked at or in what order.
#[derive(Debug, Clone)]
pub struct EventField {
    model: HeavyTailModel,
    n: f64,
    seed: u64,
    t_lo: f64,
    t_hi: f64,
    scale: f64,
    truncation_radius: f64,
    bands: Vec<Band>,
    cells: HashMap<(usize, i64), Vec<EventPoint>>,
}

impl EventField {
    pub fn new(model: &HeavyTailModel, n: f64, t_lo: f64, t_hi: f64, seed: u64, tol: f64) -> Self {
        let alpha = model.alpha();
        let scale = n.powf(-1.0 / alpha);
        let rstar = model.truncation_radius(tol);
        let duration = (t_hi - t_lo).max(0.0);
        let mut bands = Vec::new();
        let mut lo = 0.0;
        let mut hi = 1.0f64;
        loop {
            let top = hi.min(rstar);
            let mass = model.mass_above(lo) - model.mass_above(top);
            let width = 2.0 * top * scale;
            bands.push(Band {
                lo,
                hi: top,
                mass,
                width,
                cell_mean: (1.0 / scale) * width * n * duration * mass,
            });
            if top >= rstar {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        bands.retain(|b| b.mass > 0.0);
        EventField {
            model: model.clone(),
            n,
            seed,
            t_lo,
            t_hi,
            scale,
            truncation_radius: rstar,
            bands,
            cells: HashMap::new(),
        }
    }

    /// A field with no events.
    pub fn empty(model: &HeavyTailModel, n: f64, t_lo: f64, t_hi: f64) -> Self {
        let mut f = Self::new(model, n, t_lo, t_hi, 0, DEFAULT_TRUNCATION_TOL);
        f.bands.clear();
        f
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn time_range(&self) -> (f64, f64) {
        (self.t_lo, self.t_hi)
    }

    /// Unscaled `R*`.
    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    /// Fraction of the single-path hit rate dropped by truncating radii at `R*`.
    pub fn truncation_bias(&self) -> f64 {
        self.model.tail(self.truncation_radius) / self.model.first_moment()
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    /// Cells of `band` whose events can reach any point of `[a, b]`.
    pub fn cells_reaching(&self, band: usize, a: f64, b: f64) -> std::ops::RangeInclusive<i64> {
        let bd = &self.bands[band];
        let reach = bd.width / 2.0;
        let first = ((a - reach) / bd.width).floor() as i64;
        let last = ((b + reach) / bd.width).floor() as i64;
        first..=last
    }

    /// Events of one cell, sorted by time.
    pub fn cell(&mut self, band: usize, cell: i64) -> &[EventPoint] {
        if !self.cells.contains_key(&(band, cell)) {
            let evs = self.generate(band, cell);
            self.cells.insert((band, cell), evs);
        }
        &self.cells[&(band, cell)]
    }

    fn generate(&self, band: usize, cell: i64) -> Vec<EventPoint> {
        let bd = &self.bands[band];
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[self.seed, band as u64, cell as u64]));
        let count = if bd.cell_mean > 0.0 {
            Poisson::new(bd.cell_mean).map(|p| p.sample(&mut rng) as usize).unwrap_or(0)
        } else {
            0
        };
        let m_hi = self.model.mass_above(bd.hi);
        let x0 = cell as f64 * bd.width;
        let mut evs: Vec<EventPoint> = (0..count)
            .map(|_| {
                let x = x0 + rng.random::<f64>() * bd.width;
                let t = self.t_lo + rng.random::<f64>() * (self.t_hi - self.t_lo);
                let u: f64 = rng.random();
                let r = self.model.inv_mass_above(m_hi + (1.0 - u) * bd.mass).clamp(bd.lo, bd.hi);
                EventPoint {
                    x,
                    t,
                    r: r * self.scale,
                }
            })
            .filter(|e| e.r > 0.0)
            .collect();
        evs.sort_by(|a, b| a.t.total_cmp(&b.t));
        evs
    }

    /// Every event whose reach meets `[a, b]`, sorted by `(t, x)`.
    pub fn events_reaching(&mut self, a: f64, b: f64) -> Vec<EventPoint> {
        let mut out = Vec::new();
        for band in 0..self.bands.len() {
            for c in self.cells_reaching(band, a, b) {
                out.extend(
                    self.cell(band, c)
                        .iter()
                        .filter(|e| e.x + e.r >= a && e.x - e.r <= b)
                        .copied(),
                );
            }
        }
        out.sort_by(|p, q| p.t.total_cmp(&q.t).then(p.x.total_cmp(&q.x)));
        out
    }

    /// First event strictly after `after` (and not after `until`) that covers `y`.
    pub fn next_hit(&mut self, y: f64, after: f64, until: f64) -> Option<EventPoint> {
        let mut best: Option<EventPoint> = None;
        for band in 0..self.bands.len() {
            for c in self.cells_reaching(band, y, y) {
                let evs = self.cell(band, c);
                let start = evs.partition_point(|e| e.t <= after);
                for e in &evs[start..] {
                    if e.t > until || best.is_some_and(|b| b.t <= e.t) {
                        break;
                    }
                    if (e.x - y).abs() <= e.r {
                        best = Some(*e);
                        break;
                    }
                }
            }
        }
        best
    }

    /// Jumps `(t, new value)` of the path started at `(x, t0)` up to `until`,
    /// stopping early once `stop(value)` holds after a jump.
    pub fn trace_jumps(&mut self, x: f64, t0: f64, until: f64, mut stop: impl FnMut(f64) -> bool) -> Vec<(f64, f64)> {
        let mut y = x;
        let mut t = t0;
        let mut jumps = Vec::new();
        while let Some(e) = self.next_hit(y, t, until) {
            t = e.t;
            if e.x != y {
                y = e.x;
                jumps.push((t, y));
                if stop(y) {
                    break;
                }
            }
        }
        jumps
    }

    /// Number of events (including no-move hits) covering the path, and its final value.
    pub fn trace_hits(&mut self, x: f64, t0: f64, until: f64) -> (usize, f64) {
        let mut y = x;
        let mut t = t0;
        let mut hits = 0;
        while let Some(e) = self.next_hit(y, t, until) {
            t = e.t;
            y = e.x;
            hits += 1;
        }
        (hits, y)
    }
}
