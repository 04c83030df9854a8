//! Cadlag paths on general closed time domains.
//!
//! A path is a finite union of closed time components (points and
//! intervals) together with a step-function description of its left and
//! right values. Between consecutive breakpoints the path is constant; every
//! finite component endpoint carries a breakpoint, so jumps at the start or
//! end of a component (and at isolated times) are representable.

mod builder;
mod format;
mod graph;

use std::fmt;

pub use builder::StepBuilder;
pub use format::{ExtRealJson, NamedPathJson, PathJson};
pub use graph::{closed_graph, filled_graph, GraphKind, GraphPolyline, GraphVertex, Link, TimeWindow};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainComponent {
    Point(f64),
    /// Closed interval; `lo = −∞` or `hi = +∞` marks an unbounded side.
    Interval { lo: f64, hi: f64 },
}

impl DomainComponent {
    pub fn lo(&self) -> f64 {
        match *self {
            DomainComponent::Point(t) => t,
            DomainComponent::Interval { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> f64 {
        match *self {
            DomainComponent::Point(t) => t,
            DomainComponent::Interval { hi, .. } => hi,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo() <= t && t <= self.hi()
    }
}

/// Left and right values at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    pub t: f64,
    pub left: f64,
    pub right: f64,
}

impl Breakpoint {
    pub fn new(t: f64, left: f64, right: f64) -> Self {
        Breakpoint { t, left, right }
    }

    pub fn is_jump(&self) -> bool {
        self.left != self.right
    }
}

/// Eventual values of components unbounded below (`lower`) or above (`upper`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tails {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    InvalidComponent { index: usize, reason: &'static str },
    ComponentsOutOfOrder { index: usize },
    NanValue { t: f64 },
    BreakpointsOutOfOrder { index: usize },
    BreakpointOutsideDomain { t: f64 },
    MissingEndpointBreakpoint { t: f64 },
    /// Left value inside a component disagrees with the limit of right values.
    LeftLimitMismatch { t: f64, left: f64, expected: f64 },
    MissingTail { side: &'static str },
    UnexpectedTail { side: &'static str },
    TailMismatch { side: &'static str, tail: f64, expected: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InvalidComponent { index, reason } => {
                write!(f, "component {index} is invalid: {reason}")
            }
            Violation::ComponentsOutOfOrder { index } => {
                write!(f, "component {index} overlaps or precedes its predecessor")
            }
            Violation::NanValue { t } => write!(f, "NaN value at t={t}"),
            Violation::BreakpointsOutOfOrder { index } => {
                write!(f, "breakpoint {index} is not strictly after its predecessor")
            }
            Violation::BreakpointOutsideDomain { t } => {
                write!(f, "breakpoint outside domain at t={t}")
            }
            Violation::MissingEndpointBreakpoint { t } => {
                write!(f, "finite component endpoint t={t} has no breakpoint")
            }
            Violation::LeftLimitMismatch { t, left, expected } => write!(
                f,
                "left value {left} at t={t} differs from the left limit {expected} of right values"
            ),
            Violation::MissingTail { side } => write!(f, "missing {side} tail value"),
            Violation::UnexpectedTail { side } => {
                write!(f, "{side} tail given but the domain is bounded on that side")
            }
            Violation::TailMismatch { side, tail, expected } => {
                write!(f, "{side} tail {tail} differs from adjacent path value {expected}")
            }
        }
    }
}

/// Flags classifying a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PathClass {
    pub continuous: bool,
    pub connected: bool,
    pub up_infinite: bool,
    pub down_infinite: bool,
    pub bi_infinite: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CadlagPath {
    components: Vec<DomainComponent>,
    breakpoints: Vec<Breakpoint>,
    tails: Tails,
}

impl CadlagPath {
    /// Builds and validates a path.
    pub fn new(
        components: Vec<DomainComponent>,
        breakpoints: Vec<Breakpoint>,
        tails: Tails,
    ) -> Result<Self> {
        let p = Self::from_raw(components, breakpoints, tails);
        match p.validate() {
            Ok(()) => Ok(p),
            Err(v) => Err(Error::InvalidPath(v)),
        }
    }

    /// Builds a path without checking any invariant.
    pub fn from_raw(
        components: Vec<DomainComponent>,
        breakpoints: Vec<Breakpoint>,
        tails: Tails,
    ) -> Self {
        CadlagPath {
            components,
            breakpoints,
            tails,
        }
    }

    pub fn empty() -> Self {
        Self::from_raw(Vec::new(), Vec::new(), Tails::default())
    }

    /// Constant path with value `c` on the interval `[lo, hi]`.
    pub fn constant(c: f64, lo: f64, hi: f64) -> Result<Self> {
        StepBuilder::new(lo, hi, c).build()
    }

    /// Path on `[lo, hi]` equal to `before` up to time `t` and `after` from `t` on.
    pub fn step(t: f64, before: f64, after: f64, lo: f64, hi: f64) -> Result<Self> {
        StepBuilder::new(lo, hi, before).jump(t, after).build()
    }

    /// Step approximation of the linear ramp from `from` at `t0` to `to` at `t1`.
    ///
    /// The ramp value at grid time `t0 + k(t1 − t0)/steps` is held until the
    /// next grid time, so the path jumps `steps` times, the last time at `t1`.
    pub fn ramp(lo: f64, hi: f64, t0: f64, t1: f64, from: f64, to: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !(t0 < t1) {
            return Err(Error::InvalidParameter(format!(
                "ramp needs steps >= 1 and t0 < t1 (got steps={steps}, t0={t0}, t1={t1})"
            )));
        }
        let mut b = StepBuilder::new(lo, hi, from);
        for k in 1..=steps {
            let s = k as f64 / steps as f64;
            let t = if k == steps { t1 } else { t0 + s * (t1 - t0) };
            b = b.jump(t, from + s * (to - from));
        }
        b.build()
    }

    pub fn components(&self) -> &[DomainComponent] {
        &self.components
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    pub fn tails(&self) -> Tails {
        self.tails
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Checks every representation invariant, reporting all violations.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        for (i, c) in self.components.iter().enumerate() {
            match *c {
                DomainComponent::Point(t) => {
                    if !t.is_finite() {
                        out.push(Violation::InvalidComponent { index: i, reason: "point time must be finite" });
                    }
                }
                DomainComponent::Interval { lo, hi } => {
                    if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                        out.push(Violation::InvalidComponent { index: i, reason: "bad interval endpoint" });
                    } else if !(lo < hi) {
                        out.push(Violation::InvalidComponent { index: i, reason: "interval needs lo < hi" });
                    }
                }
            }
            if i > 0 && !(self.components[i - 1].hi() < c.lo()) {
                out.push(Violation::ComponentsOutOfOrder { index: i });
            }
        }
        for (i, b) in self.breakpoints.iter().enumerate() {
            if b.t.is_nan() || b.left.is_nan() || b.right.is_nan() {
                out.push(Violation::NanValue { t: b.t });
            }
            if i > 0 && !(self.breakpoints[i - 1].t < b.t) {
                out.push(Violation::BreakpointsOutOfOrder { index: i });
            }
            if !b.t.is_finite() || self.component_index(b.t).is_none() {
                out.push(Violation::BreakpointOutsideDomain { t: b.t });
            }
        }
        if !out.is_empty() {
            // later checks assume sorted, well-formed data
            return Err(out);
        }

        for (ci, c) in self.components.iter().enumerate() {
            let bps = self.component_breakpoints(ci);
            for t in [c.lo(), c.hi()] {
                if t.is_finite() && !bps.iter().any(|b| b.t == t) {
                    out.push(Violation::MissingEndpointBreakpoint { t });
                }
            }
            if matches!(c, DomainComponent::Point(_)) {
                continue;
            }
            for w in bps.windows(2) {
                if w[1].left != w[0].right {
                    out.push(Violation::LeftLimitMismatch {
                        t: w[1].t,
                        left: w[1].left,
                        expected: w[0].right,
                    });
                }
            }
        }

        let first_unbounded = self.components.first().is_some_and(|c| c.lo() == f64::NEG_INFINITY);
        let last_unbounded = self.components.last().is_some_and(|c| c.hi() == f64::INFINITY);
        match (first_unbounded, self.tails.lower) {
            (true, None) => out.push(Violation::MissingTail { side: "lower" }),
            (false, Some(_)) => out.push(Violation::UnexpectedTail { side: "lower" }),
            (true, Some(v)) => {
                if v.is_nan() {
                    out.push(Violation::NanValue { t: f64::NEG_INFINITY });
                } else if let Some(b) = self.component_breakpoints(0).first() {
                    if b.left != v {
                        out.push(Violation::TailMismatch { side: "lower", tail: v, expected: b.left });
                    }
                }
            }
            (false, None) => {}
        }
        match (last_unbounded, self.tails.upper) {
            (true, None) => out.push(Violation::MissingTail { side: "upper" }),
            (false, Some(_)) => out.push(Violation::UnexpectedTail { side: "upper" }),
            (true, Some(v)) => {
                let last = self.components.len() - 1;
                if v.is_nan() {
                    out.push(Violation::NanValue { t: f64::INFINITY });
                } else if let Some(b) = self.component_breakpoints(last).last() {
                    if b.right != v {
                        out.push(Violation::TailMismatch { side: "upper", tail: v, expected: b.right });
                    }
                } else if let Some(lower) = self.tails.lower {
                    // whole line without breakpoints: constant
                    if lower != v {
                        out.push(Violation::TailMismatch { side: "upper", tail: v, expected: lower });
                    }
                }
            }
            (false, None) => {}
        }

        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// Index of the component containing `t`.
    pub fn component_index(&self, t: f64) -> Option<usize> {
        let i = self.components.partition_point(|c| c.hi() < t);
        (i < self.components.len() && self.components[i].contains(t)).then_some(i)
    }

    /// Breakpoints lying in component `ci`.
    pub fn component_breakpoints(&self, ci: usize) -> &[Breakpoint] {
        let c = self.components[ci];
        let a = self.breakpoints.partition_point(|b| b.t < c.lo());
        let z = self.breakpoints.partition_point(|b| b.t <= c.hi());
        &self.breakpoints[a..z]
    }

    /// `(π(t−), π(t+))`, or `None` when `t` is outside the domain.
    pub fn eval(&self, t: f64) -> Option<(f64, f64)> {
        let ci = self.component_index(t)?;
        let bps = self.component_breakpoints(ci);
        let k = bps.partition_point(|b| b.t < t);
        if k < bps.len() && bps[k].t == t {
            return Some((bps[k].left, bps[k].right));
        }
        let v = if k > 0 {
            bps[k - 1].right
        } else if let Some(b) = bps.first() {
            b.left
        } else {
            self.tails.lower.or(self.tails.upper)?
        };
        Some((v, v))
    }

    /// Infimum of the domain; `None` for the empty path.
    pub fn initial_time(&self) -> Option<f64> {
        self.components.first().map(|c| c.lo())
    }

    /// Supremum of the domain; `None` for the empty path.
    pub fn final_time(&self) -> Option<f64> {
        self.components.last().map(|c| c.hi())
    }

    pub fn classify(&self) -> PathClass {
        let connected = self.components.len() == 1;
        let up = connected && self.components[0].hi() == f64::INFINITY;
        let down = connected && self.components[0].lo() == f64::NEG_INFINITY;
        PathClass {
            continuous: self.breakpoints.iter().all(|b| !b.is_jump()),
            connected,
            up_infinite: up,
            down_infinite: down,
            bi_infinite: up && down,
        }
    }

    /// Times at which the path's value may change, in increasing order.
    pub fn jump_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints.iter().filter(|b| b.is_jump()).map(|b| b.t)
    }

    pub fn jump_count(&self) -> usize {
        self.breakpoints.iter().filter(|b| b.is_jump()).count()
    }
}

/// A finite, nonempty set of nonempty paths with string identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    ids: Vec<String>,
    paths: Vec<CadlagPath>,
}

impl PathEnsemble {
    pub fn new(paths: Vec<CadlagPath>) -> Result<Self> {
        let ids = (0..paths.len()).map(|i| format!("p{i}")).collect();
        Self::with_ids(ids, paths)
    }

    pub fn with_ids(ids: Vec<String>, paths: Vec<CadlagPath>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if ids.len() != paths.len() {
            return Err(Error::InvalidParameter("ids and paths differ in length".into()));
        }
        if paths.iter().any(CadlagPath::is_empty) {
            return Err(Error::InvalidParameter("ensembles may not contain empty paths".into()));
        }
        Ok(PathEnsemble { ids, paths })
    }

    pub fn paths(&self) -> &[CadlagPath] {
        &self.paths
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &CadlagPath)> {
        self.ids.iter().map(String::as_str).zip(self.paths.iter())
    }
}
