//! Δ-witness sets, moduli of continuity, and the S/T/C^M crossing predicates.
//!
//! Everything here is decided on a finite list of graph points: for each
//! breakpoint time and each window boundary time inside the domain, the pair
//! `(π(t−), t)`, `(π(t+), t)`. Step paths are constant in between, so any
//! witness using another time can be slid onto one of these without changing
//! its values or lengthening its time span.

use std::io::Write;

use rayon::prelude::*;

use crate::path::{CadlagPath, PathEnsemble};
use crate::squeezed::{d_rbar, d_rbar_interval};
use crate::{Error, Result};

/// Parameters `(T, δ, ε, r)` of the S and C^M predicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingWindow {
    pub t: f64,
    pub delta: f64,
    pub eps: f64,
    pub r: f64,
}

impl CrossingWindow {
    pub fn new(t: f64, delta: f64, eps: f64, r: f64) -> Result<Self> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !(pos(t) && pos(delta) && pos(eps) && r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "crossing window needs T, delta, eps > 0 and finite r (got T={t}, delta={delta}, eps={eps}, r={r})"
            )));
        }
        Ok(CrossingWindow { t, delta, eps, r })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta2Witness {
    pub x: f64,
    pub y: f64,
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta3Witness {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub s: f64,
    pub t: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Witness {
    Two(Delta2Witness),
    Three(Delta3Witness),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SVariant {
    Plus,
    Minus,
    PlusMinus,
    MinusPlus,
    PlusPlus,
    MinusMinus,
    J,
    M,
    Two,
}

impl SVariant {
    pub const ALL: [SVariant; 9] = [
        SVariant::Plus,
        SVariant::Minus,
        SVariant::PlusMinus,
        SVariant::MinusPlus,
        SVariant::PlusPlus,
        SVariant::MinusMinus,
        SVariant::J,
        SVariant::M,
        SVariant::Two,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModulusKind {
    /// `m_{T,δ}`, the criterion for continuous paths.
    C,
    J,
    M,
}

impl std::str::FromStr for ModulusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c" | "two" => Ok(ModulusKind::C),
            "j" | "j1" => Ok(ModulusKind::J),
            "m" | "m1" => Ok(ModulusKind::M),
            other => Err(Error::InvalidParameter(format!("unknown modulus kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for ModulusKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModulusKind::C => "c",
            ModulusKind::J => "J",
            ModulusKind::M => "M",
        })
    }
}

/// A graph point `(x, t)`; lists of these are kept in ⪯ order.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Gp {
    x: f64,
    t: f64,
}

fn points_at_times(p: &CadlagPath, mut times: Vec<f64>) -> Vec<Gp> {
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut out = Vec::with_capacity(2 * times.len());
    for t in times {
        if let Some((l, r)) = p.eval(t) {
            out.push(Gp { x: l, t });
            out.push(Gp { x: r, t });
        }
    }
    out
}

/// ⪯-ordered graph points at breakpoint and window-boundary times in `[-T, T]`.
fn graph_points(p: &CadlagPath, t_max: f64) -> Vec<Gp> {
    let mut times: Vec<f64> = p
        .breakpoints()
        .iter()
        .map(|b| b.t)
        .filter(|&t| -t_max <= t && t <= t_max)
        .collect();
    times.push(-t_max);
    times.push(t_max);
    points_at_times(p, times)
}

/// End index (exclusive) of the ⪯-suffix starting at `i` within time budget `delta`.
fn reach(g: &[Gp], i: usize, delta: f64) -> usize {
    let lim = g[i].t + delta;
    i + g[i..].partition_point(|q| q.t <= lim)
}

fn w2(a: Gp, b: Gp) -> Delta2Witness {
    Delta2Witness {
        x: a.x,
        y: b.x,
        s: a.t,
        t: b.t,
    }
}

fn w3(a: Gp, b: Gp, c: Gp) -> Delta3Witness {
    Delta3Witness {
        x: a.x,
        y: b.x,
        z: c.x,
        s: a.t,
        t: b.t,
        u: c.t,
    }
}

/// Extremal two-point witnesses: all ⪯-ordered pairs of candidate graph points
/// with time span at most `delta`.
pub fn enum_delta2(p: &CadlagPath, t_max: f64, delta: f64) -> Vec<Delta2Witness> {
    let g = graph_points(p, t_max);
    let mut out = Vec::new();
    for i in 0..g.len() {
        for k in i..reach(&g, i, delta) {
            out.push(w2(g[i], g[k]));
        }
    }
    out
}

/// Extremal three-point witnesses, as [`enum_delta2`] with ⪯-ordered triples.
pub fn enum_delta3(p: &CadlagPath, t_max: f64, delta: f64) -> Vec<Delta3Witness> {
    let g = graph_points(p, t_max);
    let mut out = Vec::new();
    for i in 0..g.len() {
        let end = reach(&g, i, delta);
        for j in i..end {
            for k in j..end {
                out.push(w3(g[i], g[j], g[k]));
            }
        }
    }
    out
}

fn modulus_on(g: &[Gp], delta: f64, kind: ModulusKind) -> f64 {
    let mut best = 0.0f64;
    for i in 0..g.len() {
        let end = reach(g, i, delta);
        match kind {
            ModulusKind::C => {
                for k in i..end {
                    best = best.max(d_rbar(g[i].x, g[k].x));
                }
            }
            ModulusKind::J => {
                for j in i..end {
                    for k in j..end {
                        let d = d_rbar(g[j].x, g[i].x).min(d_rbar(g[j].x, g[k].x));
                        best = best.max(d);
                    }
                }
            }
            ModulusKind::M => {
                for j in i..end {
                    for k in j..end {
                        best = best.max(d_rbar_interval(g[j].x, g[i].x, g[k].x));
                    }
                }
            }
        }
    }
    best
}

pub fn modulus(p: &CadlagPath, t_max: f64, delta: f64, kind: ModulusKind) -> f64 {
    modulus_on(&graph_points(p, t_max), delta, kind)
}

/// `m_{T,δ}`: sup of `d(x, y)` over two-point witnesses.
pub fn modulus2(p: &CadlagPath, t_max: f64, delta: f64) -> f64 {
    modulus(p, t_max, delta, ModulusKind::C)
}

/// `m^J_{T,δ}`: sup of `d(y, {x, z})` over three-point witnesses.
pub fn modulus_j(p: &CadlagPath, t_max: f64, delta: f64) -> f64 {
    modulus(p, t_max, delta, ModulusKind::J)
}

/// `m^M_{T,δ}`: sup of `d(y, [x, z])` over three-point witnesses.
pub fn modulus_m(p: &CadlagPath, t_max: f64, delta: f64) -> f64 {
    modulus(p, t_max, delta, ModulusKind::M)
}

fn in_s_on(g: &[Gp], v: SVariant, w: &CrossingWindow) -> Option<Witness> {
    let (r, e) = (w.r, w.eps);
    let lo = |x: f64| x <= r;
    let hi = |x: f64| r + e <= x;
    let band = |x: f64| r + e <= x && x <= r + 2.0 * e;
    let top = |x: f64| r + 3.0 * e <= x;
    match v {
        SVariant::Two => in_s_on(g, SVariant::Plus, w).or_else(|| in_s_on(g, SVariant::Minus, w)),
        SVariant::J => in_s_on(g, SVariant::PlusPlus, w).or_else(|| in_s_on(g, SVariant::MinusMinus, w)),
        SVariant::M => in_s_on(g, SVariant::PlusMinus, w).or_else(|| in_s_on(g, SVariant::MinusPlus, w)),
        _ => {
            for i in 0..g.len() {
                let (mut imax, mut imin, mut iband) = (i, i, None);
                for k in i..reach(g, i, w.delta) {
                    if g[k].x > g[imax].x {
                        imax = k;
                    }
                    if g[k].x < g[imin].x {
                        imin = k;
                    }
                    if iband.is_none() && band(g[k].x) {
                        iband = Some(k);
                    }
                    let (a, c) = (g[i], g[k]);
                    let found = match v {
                        SVariant::Plus => (lo(a.x) && hi(c.x)).then(|| Witness::Two(w2(a, c))),
                        SVariant::Minus => (hi(a.x) && lo(c.x)).then(|| Witness::Two(w2(a, c))),
                        SVariant::PlusMinus => (lo(a.x) && lo(c.x) && hi(g[imax].x))
                            .then(|| Witness::Three(w3(a, g[imax], c))),
                        SVariant::MinusPlus => (hi(a.x) && hi(c.x) && lo(g[imin].x))
                            .then(|| Witness::Three(w3(a, g[imin], c))),
                        SVariant::PlusPlus => match iband {
                            Some(j) if lo(a.x) && top(c.x) => Some(Witness::Three(w3(a, g[j], c))),
                            _ => None,
                        },
                        SVariant::MinusMinus => match iband {
                            Some(j) if top(a.x) && lo(c.x) => Some(Witness::Three(w3(a, g[j], c))),
                            _ => None,
                        },
                        _ => unreachable!(),
                    };
                    if found.is_some() {
                        return found;
                    }
                }
            }
            None
        }
    }
}

/// Membership of `p` in `S^v_{T,δ,ε,r}`, with a witness when it holds.
pub fn in_s(p: &CadlagPath, v: SVariant, w: &CrossingWindow) -> Option<Witness> {
    in_s_on(&graph_points(p, w.t), v, w)
}

/// Checks a witness against the defining inequalities of `S^v`.
pub fn witness_satisfies(wit: &Witness, v: SVariant, w: &CrossingWindow) -> bool {
    let (r, e) = (w.r, w.eps);
    match (v, wit) {
        (SVariant::Two, _) => witness_satisfies(wit, SVariant::Plus, w) || witness_satisfies(wit, SVariant::Minus, w),
        (SVariant::J, _) => {
            witness_satisfies(wit, SVariant::PlusPlus, w) || witness_satisfies(wit, SVariant::MinusMinus, w)
        }
        (SVariant::M, _) => {
            witness_satisfies(wit, SVariant::PlusMinus, w) || witness_satisfies(wit, SVariant::MinusPlus, w)
        }
        (_, Witness::Two(d)) => {
            let ok_t = -w.t <= d.s && d.s <= d.t && d.t <= w.t && d.t - d.s <= w.delta;
            ok_t && match v {
                SVariant::Plus => d.x <= r && r + e <= d.y,
                SVariant::Minus => d.y <= r && r + e <= d.x,
                _ => false,
            }
        }
        (_, Witness::Three(d)) => {
            let ok_t = -w.t <= d.s && d.s <= d.t && d.t <= d.u && d.u <= w.t && d.u - d.s <= w.delta;
            let band = r + e <= d.y && d.y <= r + 2.0 * e;
            ok_t && match v {
                SVariant::PlusMinus => d.x <= r && d.z <= r && r + e <= d.y,
                SVariant::MinusPlus => d.y <= r && r + e <= d.x && r + e <= d.z,
                SVariant::PlusPlus => d.x <= r && band && r + 3.0 * e <= d.z,
                SVariant::MinusMinus => d.z <= r && band && r + 3.0 * e <= d.x,
                _ => false,
            }
        }
    }
}

/// Membership of `p` in `T^v_{T,δ,η}`.
///
/// `Two`, `J` and `M` are the unsigned sets `{m > η}`, `{m^J > η}`, `{m^M > η}`;
/// the signed variants restrict to `x < y` (plus), `x > y` (minus) and the
/// corresponding strict orderings of triples.
pub fn in_t(p: &CadlagPath, v: SVariant, t_max: f64, delta: f64, eta: f64) -> bool {
    let g = graph_points(p, t_max);
    match v {
        SVariant::Two => modulus_on(&g, delta, ModulusKind::C) > eta,
        SVariant::J => modulus_on(&g, delta, ModulusKind::J) > eta,
        SVariant::M => modulus_on(&g, delta, ModulusKind::M) > eta,
        SVariant::Plus | SVariant::Minus => (0..g.len()).any(|i| {
            (i..reach(&g, i, delta)).any(|k| {
                let (x, y) = (g[i].x, g[k].x);
                let ordered = if v == SVariant::Plus { x < y } else { x > y };
                ordered && d_rbar(x, y) > eta
            })
        }),
        _ => (0..g.len()).any(|i| {
            let end = reach(&g, i, delta);
            (i..end).any(|j| {
                (j..end).any(|k| {
                    let (x, y, z) = (g[i].x, g[j].x, g[k].x);
                    let ordered = match v {
                        SVariant::PlusPlus => x < y && y < z,
                        SVariant::PlusMinus => x < y && y > z,
                        SVariant::MinusPlus => x > y && y < z,
                        SVariant::MinusMinus => x > y && y > z,
                        _ => unreachable!(),
                    };
                    ordered && d_rbar(x, y) > eta && d_rbar(y, z) > eta
                })
            })
        }),
    }
}

/// A pair witness for `C^M`: an up-crossing of `[r, r+ε]` by the first path
/// and a down-crossing by the second, jointly within time `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairWitness {
    pub first: Delta2Witness,
    pub second: Delta2Witness,
}

/// Minimal crossing intervals of `[r, r+ε]` with span at most `δ`.
fn crossings(g: &[Gp], w: &CrossingWindow, up: bool) -> Vec<Delta2Witness> {
    let (r, e) = (w.r, w.eps);
    let start = |x: f64| if up { x <= r } else { r + e <= x };
    let finish = |x: f64| if up { r + e <= x } else { x <= r };
    let mut out = Vec::new();
    for i in 0..g.len() {
        if !start(g[i].x) {
            continue;
        }
        if let Some(k) = (i..reach(g, i, w.delta)).find(|&k| finish(g[k].x)) {
            out.push(w2(g[i], g[k]));
        }
    }
    out
}

fn match_crossings(ups: &[Delta2Witness], downs: &mut [Delta2Witness], delta: f64) -> Option<PairWitness> {
    downs.sort_by(|a, b| a.s.total_cmp(&b.s));
    for a in ups {
        // a matching b needs t_a − δ ≤ s_b ≤ s_a + δ
        let from = downs.partition_point(|b| b.s < a.t - delta);
        for b in &downs[from..] {
            if b.s > a.s + delta {
                break;
            }
            if a.t.max(b.t) - a.s.min(b.s) <= delta {
                return Some(PairWitness { first: *a, second: *b });
            }
        }
    }
    None
}

/// Membership of `(p1, p2)` in `C^M_{T,δ,ε,r}`.
pub fn pair_in_cm(p1: &CadlagPath, p2: &CadlagPath, w: &CrossingWindow) -> Option<PairWitness> {
    let ups = crossings(&graph_points(p1, w.t), w, true);
    if ups.is_empty() {
        return None;
    }
    let mut downs = crossings(&graph_points(p2, w.t), w, false);
    match_crossings(&ups, &mut downs, w.delta)
}

/// Whether `C^M ∩ (A × A) ≠ ∅`, self-pairs included; returns the pair indices
/// and witness of one hit.
pub fn ensemble_in_cm(a: &PathEnsemble, w: &CrossingWindow) -> Option<(usize, usize, PairWitness)> {
    let per_path: Vec<(Vec<Delta2Witness>, Vec<Delta2Witness>)> = a
        .paths()
        .iter()
        .map(|p| {
            let g = graph_points(p, w.t);
            (crossings(&g, w, true), crossings(&g, w, false))
        })
        .collect();
    let ups: Vec<(usize, Delta2Witness)> = per_path
        .iter()
        .enumerate()
        .flat_map(|(i, (u, _))| u.iter().map(move |x| (i, *x)))
        .collect();
    let mut downs: Vec<(usize, Delta2Witness)> = per_path
        .iter()
        .enumerate()
        .flat_map(|(i, (_, d))| d.iter().map(move |x| (i, *x)))
        .collect();
    downs.sort_by(|a, b| a.1.s.total_cmp(&b.1.s));
    for (i, a) in &ups {
        let from = downs.partition_point(|b| b.1.s < a.t - w.delta);
        for (j, b) in &downs[from..] {
            if b.s > a.s + w.delta {
                break;
            }
            if a.t.max(b.t) - a.s.min(b.s) <= w.delta {
                return Some((*i, *j, PairWitness { first: *a, second: *b }));
            }
        }
    }
    None
}

/// Whether some path of the ensemble lies in `S^v`.
pub fn ensemble_in_s(a: &PathEnsemble, v: SVariant, w: &CrossingWindow) -> Option<(usize, Witness)> {
    a.paths()
        .iter()
        .enumerate()
        .find_map(|(i, p)| in_s(p, v, w).map(|x| (i, x)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModuliRow {
    pub t: f64,
    pub delta: f64,
    pub kind: ModulusKind,
    pub value: f64,
}

/// Sup over the ensemble of a modulus on a `(T, δ)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuliTable {
    pub rows: Vec<ModuliRow>,
}

impl ModuliTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["T", "delta", "modulus", "value"])?;
        for r in &self.rows {
            wr.write_record([r.t.to_string(), r.delta.to_string(), r.kind.to_string(), r.value.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn precompactness_score(
    a: &PathEnsemble,
    kind: ModulusKind,
    t_grid: &[f64],
    delta_grid: &[f64],
) -> Result<ModuliTable> {
    if a.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut rows = Vec::with_capacity(t_grid.len() * delta_grid.len());
    for &t in t_grid {
        let graphs: Vec<Vec<Gp>> = a.paths().par_iter().map(|p| graph_points(p, t)).collect();
        for &delta in delta_grid {
            let value = graphs
                .par_iter()
                .map(|g| modulus_on(g, delta, kind))
                .reduce(|| 0.0, f64::max);
            rows.push(ModuliRow { t, delta, kind, value });
        }
    }
    Ok(ModuliTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::StepBuilder;
    use crate::squeezed::k_pm;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const INF: f64 = f64::INFINITY;

    fn win(t: f64, d: f64, e: f64, r: f64) -> CrossingWindow {
        CrossingWindow::new(t, d, e, r).unwrap()
    }

    fn zigzag(gap: f64) -> CadlagPath {
        StepBuilder::new(-INF, INF, 0.0).jump(0.0, 1.0).jump(gap, 0.0).build().unwrap()
    }

    #[test]
    fn window_validation() {
        assert!(CrossingWindow::new(0.0, 0.1, 0.1, 0.0).is_err());
        assert!(CrossingWindow::new(1.0, 0.1, 0.1, f64::NAN).is_err());
    }

    #[test]
    fn delta2_examples() {
        let c = CadlagPath::constant(2.0, -INF, INF).unwrap();
        assert!(enum_delta2(&c, 1.0, 0.5).iter().all(|w| w.x == w.y));
        let s = CadlagPath::step(0.0, 0.0, 1.0, -INF, INF).unwrap();
        assert!(enum_delta2(&s, 1.0, 0.5).contains(&Delta2Witness {
            x: 0.0,
            y: 1.0,
            s: 0.0,
            t: 0.0
        }));
        let two = StepBuilder::new(-INF, INF, 0.0).jump(0.0, 1.0).jump(0.3, 2.0).build().unwrap();
        assert!(!enum_delta2(&two, 1.0, 0.25).iter().any(|w| w.x == 0.0 && w.y == 2.0));
    }

    #[test]
    fn delta3_examples() {
        let c = CadlagPath::constant(2.0, -INF, INF).unwrap();
        assert!(enum_delta3(&c, 1.0, 0.5).iter().all(|w| w.x == w.y && w.y == w.z));
        let z = zigzag(0.1);
        let hit = Delta3Witness {
            x: 0.0,
            y: 1.0,
            z: 0.0,
            s: 0.0,
            t: 0.0,
            u: 0.1,
        };
        assert!(enum_delta3(&z, 1.0, 0.2).contains(&hit));
        assert!(!enum_delta3(&z, 1.0, 0.05).iter().any(|w| w.x == 0.0 && w.y == 1.0 && w.z == 0.0));
    }

    #[test]
    fn moduli_examples() {
        let c = CadlagPath::constant(2.0, -INF, INF).unwrap();
        for k in [ModulusKind::C, ModulusKind::J, ModulusKind::M] {
            assert_eq!(modulus(&c, 1.0, 0.1, k), 0.0);
        }
        let s = CadlagPath::step(0.0, 0.0, 1.0, -INF, INF).unwrap();
        assert_relative_eq!(modulus2(&s, 1.0, 0.1), d_rbar(0.0, 1.0));
        assert_eq!(modulus_j(&s, 1.0, 0.1), 0.0);
        assert_eq!(modulus_m(&s, 1.0, 0.1), 0.0);
        assert_relative_eq!(modulus_m(&zigzag(0.05), 1.0, 0.1), d_rbar(0.0, 1.0));
    }

    #[test]
    fn s_examples() {
        let c = CadlagPath::constant(0.0, -INF, INF).unwrap();
        for v in SVariant::ALL {
            assert!(in_s(&c, v, &win(1.0, 0.1, 0.5, 0.25)).is_none());
        }
        let s = CadlagPath::step(0.0, 0.0, 1.0, -INF, INF).unwrap();
        let w = win(1.0, 0.1, 0.5, 0.25);
        let wit = in_s(&s, SVariant::Plus, &w).unwrap();
        assert_eq!(
            wit,
            Witness::Two(Delta2Witness {
                x: 0.0,
                y: 1.0,
                s: 0.0,
                t: 0.0
            })
        );
        let z = zigzag(0.05);
        let wit = in_s(&z, SVariant::PlusMinus, &w).unwrap();
        assert!(witness_satisfies(&wit, SVariant::PlusMinus, &w));
        assert!(in_s(&z, SVariant::PlusMinus, &win(1.0, 0.01, 0.5, 0.25)).is_none());
    }

    #[test]
    fn jump_outside_window_ignored() {
        let s = CadlagPath::step(2.0, 0.0, 1.0, -INF, INF).unwrap();
        assert!(in_s(&s, SVariant::Plus, &win(1.0, 5.0, 0.5, 0.25)).is_none());
        assert!(in_s(&s, SVariant::Plus, &win(2.0, 5.0, 0.5, 0.25)).is_some());
    }

    #[test]
    fn infinite_values_count_as_beyond() {
        let s = CadlagPath::step(0.0, 0.0, INF, -INF, INF).unwrap();
        assert!(in_s(&s, SVariant::Plus, &win(1.0, 0.1, 1e6, 0.0)).is_some());
    }

    #[test]
    fn t_examples() {
        let c = CadlagPath::constant(0.0, -INF, INF).unwrap();
        for v in SVariant::ALL {
            assert!(!in_t(&c, v, 1.0, 0.1, 0.0));
        }
        let s = CadlagPath::step(0.0, 0.0, 1.0, -INF, INF).unwrap();
        assert!(in_t(&s, SVariant::Plus, 1.0, 0.1, 0.5));
        assert!(!in_t(&s, SVariant::Minus, 1.0, 0.1, 0.5));
    }

    #[test]
    fn s_to_t_fails_only_on_equality() {
        // x = r and y = r + ε give d(x, y) = η exactly, and T requires a strict excess
        let s = CadlagPath::step(0.0, 0.0, 1.0, -INF, INF).unwrap();
        let w = win(1.0, 0.1, 1.0, 0.0);
        assert!(in_s(&s, SVariant::Plus, &w).is_some());
        assert!(!in_t(&s, SVariant::Plus, 1.0, 0.1, d_rbar(0.0, 1.0)));
    }

    #[test]
    fn cm_examples() {
        let c = CadlagPath::constant(0.5, -INF, INF).unwrap();
        let w = win(1.0, 0.1, 1.0, 0.0);
        assert!(pair_in_cm(&c, &c, &w).is_none());
        let up = CadlagPath::step(0.0, -0.1, 1.1, -INF, INF).unwrap();
        let down = CadlagPath::step(0.05, 1.1, -0.1, -INF, INF).unwrap();
        let hit = pair_in_cm(&up, &down, &w).unwrap();
        assert_eq!(hit.first.s, 0.0);
        assert_eq!(hit.second.t, 0.05);
        let far = CadlagPath::step(0.5, 1.1, -0.1, -INF, INF).unwrap();
        assert!(pair_in_cm(&up, &far, &w).is_none());
        let e = PathEnsemble::new(vec![c, up, down]).unwrap();
        let (i, j, _) = ensemble_in_cm(&e, &w).unwrap();
        assert_eq!((i, j), (1, 2));
    }

    #[test]
    fn precompactness_examples() {
        let c = PathEnsemble::new(vec![CadlagPath::constant(0.0, -INF, INF).unwrap()]).unwrap();
        let t = precompactness_score(&c, ModulusKind::M, &[1.0, 2.0], &[0.1, 0.2]).unwrap();
        assert!(t.rows.iter().all(|r| r.value == 0.0));
        let s = PathEnsemble::new(vec![CadlagPath::step(0.0, 0.0, 1.0, -INF, INF).unwrap()]).unwrap();
        let t = precompactness_score(&s, ModulusKind::J, &[1.0], &[0.4, 0.1, 0.01]).unwrap();
        assert!(t.rows.iter().all(|r| r.value == 0.0));
        let steps: Vec<CadlagPath> = (1..=8)
            .map(|k| CadlagPath::step(1.0 / k as f64, 0.0, 1.0, -INF, INF).unwrap())
            .collect();
        let t = precompactness_score(&PathEnsemble::new(steps).unwrap(), ModulusKind::C, &[2.0], &[0.5, 0.05]).unwrap();
        assert_eq!(t.rows[0].value, t.rows[1].value);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("T,delta,modulus,value\n2,0.5,c,"));
    }

    pub(crate) fn random_path() -> impl Strategy<Value = CadlagPath> {
        (
            -1.5..0.5f64,
            prop::bool::ANY,
            -2.0..2.0f64,
            prop::collection::vec((0.001..0.4f64, -2.5..2.5f64), 0..8),
        )
            .prop_map(|(lo, bounded, v0, js)| {
                let lo = if bounded { lo } else { -INF };
                let mut t = if bounded { lo } else { -1.2 };
                let mut b = StepBuilder::new(lo, INF, v0);
                for (dt, v) in js {
                    t += dt;
                    b = b.jump(t, v);
                }
                b.build().unwrap()
            })
    }

    fn window() -> impl Strategy<Value = CrossingWindow> {
        (0.3..1.5f64, 0.01..0.5f64, 0.05..1.0f64, -1.5..1.5f64).prop_map(|(t, d, e, r)| win(t, d, e, r))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn extremal_points_suffice(p in random_path(), w in window(), extra in prop::collection::vec(-1.5..1.5f64, 1..30)) {
            let base = graph_points(&p, w.t);
            let mut times: Vec<f64> = base.iter().map(|g| g.t).collect();
            times.extend(extra.into_iter().filter(|t| t.abs() <= w.t));
            let dense = points_at_times(&p, times);
            for v in SVariant::ALL {
                prop_assert_eq!(in_s_on(&base, v, &w).is_some(), in_s_on(&dense, v, &w).is_some());
            }
            for k in [ModulusKind::C, ModulusKind::J, ModulusKind::M] {
                prop_assert_eq!(modulus_on(&base, w.delta, k), modulus_on(&dense, w.delta, k));
            }
        }

        #[test]
        fn witnesses_valid_and_monotone_in_delta(p in random_path(), w in window(), f in 0.1..1.0f64) {
            let smaller = CrossingWindow { delta: w.delta * f, ..w };
            for v in SVariant::ALL {
                if let Some(wit) = in_s(&p, v, &w) {
                    prop_assert!(witness_satisfies(&wit, v, &w), "{:?} {:?}", v, wit);
                }
                if in_s(&p, v, &smaller).is_some() {
                    prop_assert!(in_s(&p, v, &w).is_some());
                }
            }
            for k in [ModulusKind::C, ModulusKind::J, ModulusKind::M] {
                prop_assert!(modulus(&p, w.t, smaller.delta, k) <= modulus(&p, w.t, w.delta, k));
                prop_assert!(modulus(&p, w.t * f, w.delta, k) <= modulus(&p, w.t, w.delta, k));
            }
        }

        #[test]
        fn setcom_inclusions(p in random_path(), w in window()) {
            let eta1 = d_rbar(w.r, w.r + w.eps);
            for v in [SVariant::Plus, SVariant::Minus, SVariant::PlusMinus, SVariant::MinusPlus] {
                if in_s(&p, v, &w).is_some() {
                    prop_assert!(in_t(&p, v, w.t, w.delta, eta1));
                }
            }
            let eta3 = eta1.min(d_rbar(w.r + 2.0 * w.eps, w.r + 3.0 * w.eps));
            for v in [SVariant::PlusPlus, SVariant::MinusMinus] {
                if in_s(&p, v, &w).is_some() {
                    prop_assert!(in_t(&p, v, w.t, w.delta, eta3));
                }
            }
            let (km, kp) = k_pm(w.eps).unwrap();
            for (v, top) in [
                (SVariant::Plus, kp - 1),
                (SVariant::Minus, kp - 1),
                (SVariant::PlusMinus, kp - 1),
                (SVariant::MinusPlus, kp - 1),
                (SVariant::PlusPlus, kp - 3),
                (SVariant::MinusMinus, kp - 3),
            ] {
                if in_t(&p, v, w.t, w.delta, 2.0 * w.eps) {
                    let hit = (km..=top).any(|k| in_s(&p, v, &CrossingWindow { r: k as f64 * w.eps, ..w }).is_some());
                    prop_assert!(hit, "{:?}", v);
                }
            }
        }

        #[test]
        fn s_m_implies_self_cm(p in random_path(), w in window()) {
            if in_s(&p, SVariant::M, &w).is_some() {
                prop_assert!(pair_in_cm(&p, &p, &w).is_some());
            }
        }
    }
}
