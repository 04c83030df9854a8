//! Closed and filled graphs as ⪯-ordered polylines in the squeezed space.

use super::{CadlagPath, DomainComponent};
use crate::squeezed::SqueezedPoint;
use crate::{Error, Result};

/// Closed time window; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub lo: f64,
    pub hi: f64,
}

impl TimeWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::InvalidWindow { lo, hi });
        }
        Ok(TimeWindow { lo, hi })
    }

    pub fn all() -> Self {
        TimeWindow {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    Closed,
    Filled,
}

/// How a vertex connects to its successor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    /// No graph points strictly between the two vertices.
    Gap,
    /// Constant value over the time span between the vertices.
    Horizontal,
    /// Vertical jump segment at a single time (filled graphs only).
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphVertex {
    pub point: SqueezedPoint,
    pub link: Link,
}

/// ⪯-ordered vertices from `(∗, −∞)` to `(∗, +∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPolyline {
    pub kind: GraphKind,
    pub vertices: Vec<GraphVertex>,
}

impl GraphPolyline {
    pub fn points(&self) -> impl Iterator<Item = SqueezedPoint> + '_ {
        self.vertices.iter().map(|v| v.point)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

struct Acc {
    kind: GraphKind,
    out: Vec<GraphVertex>,
}

impl Acc {
    fn push(&mut self, point: SqueezedPoint, link_from_prev: Link) {
        let last = self.out.last_mut().expect("star_minus pushed first");
        if last.point == point {
            return;
        }
        last.link = link_from_prev;
        self.out.push(GraphVertex { point, link: Link::Gap });
    }

    /// Both values at time `t`, left before right.
    fn push_pair(&mut self, left: f64, right: f64, t: f64, link_from_prev: Link) {
        self.push(SqueezedPoint::interior(left, t), link_from_prev);
        let jump = match self.kind {
            GraphKind::Closed => Link::Gap,
            GraphKind::Filled => Link::Vertical,
        };
        self.push(SqueezedPoint::interior(right, t), jump);
    }
}

fn build(p: &CadlagPath, window: TimeWindow, kind: GraphKind) -> GraphPolyline {
    let mut acc = Acc {
        kind,
        out: vec![GraphVertex {
            point: SqueezedPoint::StarMinus,
            link: Link::Gap,
        }],
    };
    let mut open_to_plus = false;
    for (ci, comp) in p.components().iter().enumerate() {
        let lo = comp.lo().max(window.lo);
        let hi = comp.hi().min(window.hi);
        if lo > hi {
            continue;
        }
        if let DomainComponent::Point(t) = *comp {
            let (l, r) = p.eval(t).expect("point component has a breakpoint");
            acc.push_pair(l, r, t, Link::Gap);
            continue;
        }
        let bps = p.component_breakpoints(ci);
        let mut link = Link::Gap;
        if lo == f64::NEG_INFINITY {
            // horizontal ray from star_minus
            link = Link::Horizontal;
        } else {
            let (l, r) = p.eval(lo).expect("clipped start lies in the component");
            acc.push_pair(l, r, lo, Link::Gap);
            link = if lo < hi { Link::Horizontal } else { link };
        }
        for b in bps.iter().filter(|b| lo < b.t && b.t < hi) {
            acc.push_pair(b.left, b.right, b.t, link);
            link = Link::Horizontal;
        }
        if hi == f64::INFINITY {
            open_to_plus = true;
        } else if lo < hi {
            let (l, r) = p.eval(hi).expect("clipped end lies in the component");
            acc.push_pair(l, r, hi, link);
        }
    }
    let link = if open_to_plus { Link::Horizontal } else { Link::Gap };
    acc.push(SqueezedPoint::StarPlus, link);
    GraphPolyline {
        kind,
        vertices: acc.out,
    }
}

/// Closed graph `{(x, t) : t ∈ I, x ∈ {π(t−), π(t+)}}` restricted to `window`,
/// compactified with the two star points.
pub fn closed_graph(p: &CadlagPath, window: TimeWindow) -> Result<GraphPolyline> {
    let window = TimeWindow::new(window.lo, window.hi)?;
    Ok(build(p, window, GraphKind::Closed))
}

/// Filled graph: as [`closed_graph`] with each jump's vertical segment included.
pub fn filled_graph(p: &CadlagPath, window: TimeWindow) -> Result<GraphPolyline> {
    let window = TimeWindow::new(window.lo, window.hi)?;
    Ok(build(p, window, GraphKind::Filled))
}

impl CadlagPath {
    pub fn graph(&self, kind: GraphKind, window: TimeWindow) -> Result<GraphPolyline> {
        match kind {
            GraphKind::Closed => closed_graph(self, window),
            GraphKind::Filled => filled_graph(self, window),
        }
    }
}
