//! Ordering, crossing and collision of connected paths.
//!
//! `π₁ ⊲ π₂` is decided through the regions `L(π₁)` and `R(π₂)`: they
//! intersect iff some split time `t±` admissible for both has
//! `π₂(t±) < π₁(t±)`. Both paths are constant between breakpoints, so it is
//! enough to probe split times at breakpoints, between consecutive
//! breakpoints, and beyond the outermost ones.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::path::{CadlagPath, PathEnsemble};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

/// A point `t−` or `t+` of the split real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitTime {
    pub t: f64,
    pub side: Side,
}

impl SplitTime {
    pub fn minus(t: f64) -> Self {
        SplitTime { t, side: Side::Minus }
    }

    pub fn plus(t: f64) -> Self {
        SplitTime { t, side: Side::Plus }
    }
}

impl PartialOrd for SplitTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.t.partial_cmp(&other.t)? {
            Ordering::Equal => Some(self.side.cmp(&other.side)),
            o => Some(o),
        }
    }
}

fn require_connected(p: &CadlagPath) -> Result<(f64, f64)> {
    match p.components() {
        [c] => Ok((c.lo(), c.hi())),
        _ => Err(Error::RequiresConnected),
    }
}

/// Value `π(t±)`, or `None` outside the domain.
fn value_at(p: &CadlagPath, st: SplitTime) -> Option<f64> {
    p.eval(st.t).map(|(l, r)| match st.side {
        Side::Minus => l,
        Side::Plus => r,
    })
}

fn in_is((s, u): (f64, f64), st: SplitTime) -> bool {
    if !(s <= st.t && st.t <= u) {
        return false;
    }
    !((st.t == s && st.side == Side::Minus) || (st.t == u && st.side == Side::Plus))
}

/// Membership in `I^l_π`.
fn in_il(p: &CadlagPath, dom: (f64, f64), st: SplitTime) -> bool {
    if in_is(dom, st) {
        return true;
    }
    let Some((l, r)) = p.eval(st.t) else {
        return false;
    };
    (st.t == dom.0 && st.side == Side::Minus && r < l) || (st.t == dom.1 && st.side == Side::Plus && l < r)
}

/// Membership in `I^r_π`.
fn in_ir(p: &CadlagPath, dom: (f64, f64), st: SplitTime) -> bool {
    if in_is(dom, st) {
        return true;
    }
    let Some((l, r)) = p.eval(st.t) else {
        return false;
    };
    (st.t == dom.0 && st.side == Side::Minus && l < r) || (st.t == dom.1 && st.side == Side::Plus && r < l)
}

/// The split-time index sets of a connected path, at its breakpoint times.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitIndexSets {
    pub s: Vec<SplitTime>,
    pub l: Vec<SplitTime>,
    pub r: Vec<SplitTime>,
}

pub fn split_index_sets(p: &CadlagPath) -> Result<SplitIndexSets> {
    let dom = require_connected(p)?;
    let mut out = SplitIndexSets {
        s: Vec::new(),
        l: Vec::new(),
        r: Vec::new(),
    };
    for b in p.breakpoints() {
        for st in [SplitTime::minus(b.t), SplitTime::plus(b.t)] {
            if in_is(dom, st) {
                out.s.push(st);
            }
            if in_il(p, dom, st) {
                out.l.push(st);
            }
            if in_ir(p, dom, st) {
                out.r.push(st);
            }
        }
    }
    Ok(out)
}

/// Probe times: all breakpoint times of both paths, midpoints between
/// consecutive ones, and one time beyond each end.
fn probe_times(p1: &CadlagPath, p2: &CadlagPath) -> Vec<f64> {
    let mut ts: Vec<f64> = p1
        .breakpoints()
        .iter()
        .chain(p2.breakpoints())
        .map(|b| b.t)
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    if ts.is_empty() {
        return vec![0.0];
    }
    let mut out = Vec::with_capacity(2 * ts.len() + 1);
    out.push(ts[0] - 1.0);
    for w in ts.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.push(ts[ts.len() - 1]);
    out.push(ts[ts.len() - 1] + 1.0);
    out
}

/// A split time witnessing `L(p1) ∩ R(p2) ≠ ∅`, if any.
pub fn order_violation(p1: &CadlagPath, p2: &CadlagPath) -> Result<Option<SplitTime>> {
    let d1 = require_connected(p1)?;
    let d2 = require_connected(p2)?;
    for t in probe_times(p1, p2) {
        for st in [SplitTime::minus(t), SplitTime::plus(t)] {
            if !(in_il(p1, d1, st) && in_ir(p2, d2, st)) {
                continue;
            }
            let (Some(a), Some(b)) = (value_at(p1, st), value_at(p2, st)) else {
                continue;
            };
            if b < a {
                return Ok(Some(st));
            }
        }
    }
    Ok(None)
}

/// `p1 ⊲ p2`.
pub fn is_ordered(p1: &CadlagPath, p2: &CadlagPath) -> Result<bool> {
    Ok(order_violation(p1, p2)?.is_none())
}

pub fn crosses(p1: &CadlagPath, p2: &CadlagPath) -> Result<bool> {
    Ok(!is_ordered(p1, p2)? && !is_ordered(p2, p1)?)
}

/// Whether the two paths jump over a common interval in opposite directions at `t`.
pub fn collides_at(p1: &CadlagPath, p2: &CadlagPath, t: f64) -> bool {
    let (Some((a1, b1)), Some((a2, b2))) = (p1.eval(t), p2.eval(t)) else {
        return false;
    };
    b1.max(a2) < a1.min(b2) || a1.max(b2) < b1.min(a2)
}

fn is_boundary(p: &CadlagPath, t: f64) -> bool {
    p.components().iter().any(|c| c.lo() == t || c.hi() == t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Collision {
    pub t: f64,
    /// `t` is a finite boundary time of either domain.
    pub boundary: bool,
}

/// Breakpoint times at which the paths collide.
pub fn collision_scan(p1: &CadlagPath, p2: &CadlagPath, boundary_only: bool) -> Vec<Collision> {
    let mut ts: Vec<f64> = p1
        .breakpoints()
        .iter()
        .chain(p2.breakpoints())
        .map(|b| b.t)
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts.into_iter()
        .filter(|&t| collides_at(p1, p2, t))
        .map(|t| Collision {
            t,
            boundary: is_boundary(p1, t) || is_boundary(p2, t),
        })
        .filter(|c| c.boundary || !boundary_only)
        .collect()
}

/// First crossing pair `(i, j)` with `i < j`, or `None` for a noncrossing ensemble.
pub fn is_noncrossing_set(a: &PathEnsemble) -> Result<Option<(usize, usize)>> {
    for p in a.paths() {
        require_connected(p)?;
    }
    let n = a.len();
    let paths = a.paths();
    let first = (0..n)
        .into_par_iter()
        .map(|i| {
            for j in i + 1..n {
                if paths[i] == paths[j] {
                    continue;
                }
                if crosses(&paths[i], &paths[j]).expect("connectivity checked") {
                    return Some((i, j));
                }
            }
            None
        })
        .find_first(Option::is_some)
        .flatten();
    Ok(first)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub pair: [String; 2],
    pub witness_time: f64,
    pub boundary: bool,
}

/// Report for a crossing pair: a collision time when there is one, else the
/// split time at which `p1 ⊲ p2` fails.
pub fn crossing_report(a: &PathEnsemble, i: usize, j: usize) -> Result<CrossingReport> {
    let (p1, p2) = (&a.paths()[i], &a.paths()[j]);
    let t = match collision_scan(p1, p2, false).first() {
        Some(c) => c.t,
        None => order_violation(p1, p2)?.map_or(f64::NAN, |s| s.t),
    };
    Ok(CrossingReport {
        pair: [a.ids()[i].clone(), a.ids()[j].clone()],
        witness_time: t,
        boundary: is_boundary(p1, t) || is_boundary(p2, t),
    })
}
