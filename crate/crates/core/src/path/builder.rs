use super::{Breakpoint, CadlagPath, DomainComponent, Tails};
use crate::Result;

/// Builds a connected step path on `[lo, hi]`.
///
/// The path starts with `initial` and changes value at each `jump`. A jump
/// at the start time is expressed with [`StepBuilder::start_left`]: the path
/// then has `π(lo−) = start_left` and `π(lo+) = initial`. Likewise
/// [`StepBuilder::end_right`] sets `π(hi+)` for a finite `hi`.
#[derive(Debug, Clone)]
pub struct StepBuilder {
    lo: f64,
    hi: f64,
    initial: f64,
    start_left: Option<f64>,
    end_right: Option<f64>,
    jumps: Vec<(f64, f64)>,
}

impl StepBuilder {
    pub fn new(lo: f64, hi: f64, initial: f64) -> Self {
        StepBuilder {
            lo,
            hi,
            initial,
            start_left: None,
            end_right: None,
            jumps: Vec::new(),
        }
    }

    pub fn start_left(mut self, x: f64) -> Self {
        self.start_left = Some(x);
        self
    }

    pub fn end_right(mut self, x: f64) -> Self {
        self.end_right = Some(x);
        self
    }

    /// Value becomes `value` at time `t`; jumps must be added in time order.
    pub fn jump(mut self, t: f64, value: f64) -> Self {
        self.jumps.push((t, value));
        self
    }

    pub fn build(self) -> Result<CadlagPath> {
        let mut bps: Vec<Breakpoint> = Vec::with_capacity(self.jumps.len() + 2);
        let mut current = self.initial;
        if self.lo.is_finite() {
            bps.push(Breakpoint::new(self.lo, self.start_left.unwrap_or(current), current));
        }
        for &(t, v) in &self.jumps {
            match bps.last_mut() {
                // a jump at an existing breakpoint time overrides its right value
                Some(b) if b.t == t => {
                    b.right = v;
                }
                _ => bps.push(Breakpoint::new(t, current, v)),
            }
            current = v;
        }
        if self.hi.is_finite() {
            let right = self.end_right.unwrap_or(current);
            match bps.last_mut() {
                Some(b) if b.t == self.hi => {
                    if self.end_right.is_some() {
                        b.right = right;
                    }
                }
                _ => bps.push(Breakpoint::new(self.hi, current, right)),
            }
        }
        let tails = Tails {
            lower: (self.lo == f64::NEG_INFINITY).then_some(self.initial),
            upper: (self.hi == f64::INFINITY).then_some(current),
        };
        let comp = if self.lo == self.hi {
            DomainComponent::Point(self.lo)
        } else {
            DomainComponent::Interval { lo: self.lo, hi: self.hi }
        };
        CadlagPath::new(vec![comp], bps, tails)
    }
}
