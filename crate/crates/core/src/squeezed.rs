//! Geometry of the extended real line and the squeezed space.
//!
//! Extended reals are plain `f64` values where `±INFINITY` stand for the
//! points at infinity; NaN is never a legal value. The squeezed space is
//! realized through a fixed chart into `[-1, 1]²`:
//!
//! ```text
//! (x, t)      ↦ (φ(x)·(1 − |tanh t|), tanh t)
//! (∗, −∞)     ↦ (0, −1)
//! (∗, +∞)     ↦ (0, +1)
//! ```
//!
//! with the max-metric on chart coordinates. Every spatial slice collapses
//! onto the star points as `|t| → ∞`, which is exactly the squeeze.

use serde::{Deserialize, Serialize};

/// `φ(x) = x / √(1 + x²)`, extended by `φ(±∞) = ±1`.
pub fn phi(x: f64) -> f64 {
    if x.is_infinite() {
        return x.signum();
    }
    if x.abs() <= 1.0 {
        x / (1.0 + x * x).sqrt()
    } else {
        // avoids overflow of x² for huge finite x
        x.signum() / (1.0 + 1.0 / (x * x)).sqrt()
    }
}

/// Metric on the extended real line, `|φ(x) − φ(y)|`.
pub fn d_rbar(x: f64, y: f64) -> f64 {
    (phi(x) - phi(y)).abs()
}

/// Distance from `y` to the order interval `[x, z] = [x ∧ z, x ∨ z]`.
pub fn d_rbar_interval(y: f64, x: f64, z: f64) -> f64 {
    let (lo, hi) = if x <= z { (x, z) } else { (z, x) };
    if y < lo {
        d_rbar(y, lo)
    } else if y > hi {
        d_rbar(y, hi)
    } else {
        0.0
    }
}

/// A point of the squeezed space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SqueezedPoint {
    StarMinus,
    Interior { x: f64, t: f64 },
    StarPlus,
}

impl SqueezedPoint {
    pub fn interior(x: f64, t: f64) -> Self {
        SqueezedPoint::Interior { x, t }
    }

    pub fn chart(&self) -> ChartCoords {
        to_chart(*self)
    }
}

/// Chart coordinates: `u` is compactified space, `v` compactified time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartCoords {
    pub u: f64,
    pub v: f64,
}

impl ChartCoords {
    pub fn new(u: f64, v: f64) -> Self {
        ChartCoords { u, v }
    }

    /// Max-metric distance.
    pub fn dist(&self, other: &ChartCoords) -> f64 {
        (self.u - other.u).abs().max((self.v - other.v).abs())
    }

    pub fn lerp(&self, other: &ChartCoords, s: f64) -> ChartCoords {
        ChartCoords {
            u: self.u + s * (other.u - self.u),
            v: self.v + s * (other.v - self.v),
        }
    }
}

/// Spatial contraction factor `1 − |tanh t|` of the chart at time `t`.
pub fn squeeze_factor(t: f64) -> f64 {
    1.0 - t.tanh().abs()
}

/// Chart coordinates of a point with value `x` at (possibly infinite) time `t`.
///
/// Infinite times map to the corresponding star point regardless of `x`.
pub fn chart_at(x: f64, t: f64) -> ChartCoords {
    if t == f64::INFINITY {
        return ChartCoords::new(0.0, 1.0);
    }
    if t == f64::NEG_INFINITY {
        return ChartCoords::new(0.0, -1.0);
    }
    let v = t.tanh();
    ChartCoords::new(phi(x) * (1.0 - v.abs()), v)
}

pub fn to_chart(p: SqueezedPoint) -> ChartCoords {
    match p {
        SqueezedPoint::StarMinus => ChartCoords::new(0.0, -1.0),
        SqueezedPoint::StarPlus => ChartCoords::new(0.0, 1.0),
        SqueezedPoint::Interior { x, t } => chart_at(x, t),
    }
}

pub fn d_sqz(p: SqueezedPoint, q: SqueezedPoint) -> f64 {
    to_chart(p).dist(&to_chart(q))
}

/// Integers `k₋ < 0 < k₊` with `d_rbar(±∞, k±·ε) < ε`.
///
/// `k₊` is the smallest admissible positive integer and `k₋ = −k₊`.
pub fn k_pm(eps: f64) -> crate::Result<(i64, i64)> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(crate::Error::InvalidParameter(format!(
            "k_pm needs eps > 0, got {eps}"
        )));
    }
    if eps >= 1.0 {
        return Ok((-1, 1));
    }
    // φ(y) = 1 − ε solves to y = (1 − ε)/√(1 − (1 − ε)²); start near y/ε and settle
    let a = 1.0 - eps;
    let y = a / (1.0 - a * a).sqrt();
    let mut k = ((y / eps).floor() as i64).max(1);
    while k > 1 && d_rbar(f64::INFINITY, (k - 1) as f64 * eps) < eps {
        k -= 1;
    }
    while d_rbar(f64::INFINITY, k as f64 * eps) >= eps {
        k += 1;
    }
    Ok((-k, k))
}
