use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Jump-radius measure `μ` together with the stability index `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeavyTailModel {
    alpha: f64,
    family: Family,
}

#[derive(Debug, Clone, PartialEq)]
enum Family {
    /// `μ(dr) = (1 ∧ r^{−α−2}) dr`.
    OneWedgePareto,
    PointMass { r0: f64 },
    /// Piecewise-constant density on `edges`, continued beyond the last edge
    /// by `d_last·(r/e_last)^{−α−2}`.
    Table {
        edges: Vec<f64>,
        density: Vec<f64>,
        /// `μ(e_i, ∞)`
        mass_above: Vec<f64>,
        /// `∫_{e_i}^∞ r μ(dr)`
        moment_above: Vec<f64>,
    },
}

/// Config-file form of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    OneWedgePareto {
        alpha: f64,
    },
    PointMass {
        r0: f64,
        #[serde(default = "default_point_alpha")]
        alpha: f64,
    },
    /// CSV with columns `r_lo,r_hi,density`.
    Table {
        file: String,
        alpha: f64,
    },
}

fn default_point_alpha() -> f64 {
    1.0
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("alpha must lie in (0, 2), got {alpha}")))
    }
}

pub fn default_mu(alpha: f64) -> Result<HeavyTailModel> {
    HeavyTailModel::default_mu(alpha)
}

impl HeavyTailModel {
    pub fn default_mu(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(HeavyTailModel {
            alpha,
            family: Family::OneWedgePareto,
        })
    }

    /// `μ = δ_{r0}`. It has no heavy tail; `alpha` only fixes the space-time scaling.
    pub fn point_mass(r0: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::InvalidModel(format!("point mass radius must be positive, got {r0}")));
        }
        Ok(HeavyTailModel {
            alpha,
            family: Family::PointMass { r0 },
        })
    }

    pub fn table(alpha: f64, edges: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        check_alpha(alpha)?;
        if edges.len() < 2 || density.len() + 1 != edges.len() {
            return Err(Error::InvalidModel("table needs k+1 edges for k densities, k >= 1".into()));
        }
        if edges[0] < 0.0 || edges.windows(2).any(|w| !(w[0] < w[1])) || !edges.iter().all(|e| e.is_finite()) {
            return Err(Error::InvalidModel("table edges must be finite, nonnegative and increasing".into()));
        }
        if density.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Error::InvalidModel("table densities must be finite and nonnegative".into()));
        }
        let k = density.len();
        let last = density[k - 1];
        let ek = edges[k];
        if last <= 0.0 {
            return Err(Error::InvalidModel("last table density must be positive to carry the power tail".into()));
        }
        let mut mass_above = vec![0.0; k + 1];
        let mut moment_above = vec![0.0; k + 1];
        mass_above[k] = last * ek / (alpha + 1.0);
        moment_above[k] = last * ek * ek / alpha;
        for i in (0..k).rev() {
            let (a, b) = (edges[i], edges[i + 1]);
            mass_above[i] = mass_above[i + 1] + density[i] * (b - a);
            moment_above[i] = moment_above[i + 1] + density[i] * (b * b - a * a) / 2.0;
        }
        Ok(HeavyTailModel {
            alpha,
            family: Family::Table {
                edges,
                density,
                mass_above,
                moment_above,
            },
        })
    }

    pub fn from_spec(spec: &ModelSpec, base_dir: Option<&Path>) -> Result<Self> {
        match spec {
            ModelSpec::OneWedgePareto { alpha } => Self::default_mu(*alpha),
            ModelSpec::PointMass { r0, alpha } => Self::point_mass(*r0, *alpha),
            ModelSpec::Table { file, alpha } => {
                let path = match base_dir {
                    Some(d) => d.join(file),
                    None => file.into(),
                };
                let mut rd = csv::Reader::from_path(&path)?;
                let mut edges = Vec::new();
                let mut density = Vec::new();
                for rec in rd.deserialize() {
                    let (lo, hi, d): (f64, f64, f64) = rec?;
                    match edges.last() {
                        None => edges.push(lo),
                        Some(&e) if e != lo => {
                            return Err(Error::InvalidModel(format!("table bins must be contiguous at r={lo}")));
                        }
                        _ => {}
                    }
                    edges.push(hi);
                    density.push(d);
                }
                Self::table(*alpha, edges, density)
            }
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `μ(R, ∞)`.
    pub fn mass_above(&self, r: f64) -> f64 {
        let a = self.alpha;
        match &self.family {
            Family::OneWedgePareto => {
                if r >= 1.0 {
                    r.powf(-a - 1.0) / (a + 1.0)
                } else {
                    (1.0 - r.max(0.0)) + 1.0 / (a + 1.0)
                }
            }
            Family::PointMass { r0 } => {
                if r < *r0 {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Table {
                edges,
                density,
                mass_above,
                ..
            } => {
                let k = density.len();
                if r >= edges[k] {
                    return density[k - 1] * edges[k].powf(a + 2.0) * r.powf(-a - 1.0) / (a + 1.0);
                }
                let r = r.max(edges[0]);
                let i = edges.partition_point(|e| *e <= r) - 1;
                mass_above[i + 1] + density[i] * (edges[i + 1] - r)
            }
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.mass_above(0.0)
    }

    /// `∫_R^∞ r μ(dr)`.
    pub fn tail(&self, r: f64) -> f64 {
        let a = self.alpha;
        match &self.family {
            Family::OneWedgePareto => {
                if r >= 1.0 {
                    r.powf(-a) / a
                } else {
                    let r = r.max(0.0);
                    (1.0 - r * r) / 2.0 + 1.0 / a
                }
            }
            Family::PointMass { r0 } => {
                if r <= *r0 {
                    *r0
                } else {
                    0.0
                }
            }
            Family::Table {
                edges,
                density,
                moment_above,
                ..
            } => {
                let k = density.len();
                if r >= edges[k] {
                    return density[k - 1] * edges[k].powf(a + 2.0) * r.powf(-a) / a;
                }
                let r = r.max(edges[0]);
                let i = edges.partition_point(|e| *e <= r) - 1;
                let b = edges[i + 1];
                moment_above[i + 1] + density[i] * (b * b - r * r) / 2.0
            }
        }
    }

    /// `∫ r μ(dr)`.
    pub fn first_moment(&self) -> f64 {
        self.tail(0.0)
    }

    /// Event-hit rate `K = 2 ∫ r μ(dr)` of a single path.
    pub fn k(&self) -> f64 {
        2.0 * self.first_moment()
    }

    /// `P[J ≥ R]` for the displacement of a hit path, `R ≥ 0`:
    /// `(1/K) ∫ (r − R) ∨ 0 μ(dr)`.
    pub fn jump_tail(&self, r: f64) -> f64 {
        (self.tail(r) - r * self.mass_above(r)) / self.k()
    }

    /// `lim_{R→∞} R^α ∫_R^∞ r μ(dr)`; zero for the point mass.
    pub fn stable_limit(&self) -> f64 {
        match &self.family {
            Family::OneWedgePareto => 1.0 / self.alpha,
            Family::PointMass { .. } => 0.0,
            Family::Table { edges, density, .. } => {
                let k = density.len();
                density[k - 1] * edges[k].powf(self.alpha + 2.0) / self.alpha
            }
        }
    }

    /// Largest radius carrying mass, if bounded.
    pub fn max_radius(&self) -> Option<f64> {
        match &self.family {
            Family::PointMass { r0 } => Some(*r0),
            _ => None,
        }
    }

    /// Radius `R` with `μ(R, ∞) = m` for `0 < m ≤ μ(0, ∞)`.
    pub fn inv_mass_above(&self, m: f64) -> f64 {
        let a = self.alpha;
        match &self.family {
            Family::OneWedgePareto => {
                let pareto = 1.0 / (a + 1.0);
                if m >= pareto {
                    (1.0 - (m - pareto)).max(0.0)
                } else {
                    ((a + 1.0) * m).powf(-1.0 / (a + 1.0))
                }
            }
            Family::PointMass { r0 } => *r0,
            Family::Table {
                edges,
                density,
                mass_above,
                ..
            } => {
                let k = density.len();
                if m <= mass_above[k] {
                    return edges[k] * (m / mass_above[k]).powf(-1.0 / (a + 1.0));
                }
                // mass_above is decreasing; find bin i with mass_above[i+1] < m <= mass_above[i]
                let i = (mass_above.partition_point(|x| *x >= m)).saturating_sub(1).min(k - 1);
                if density[i] == 0.0 {
                    return edges[i + 1];
                }
                edges[i + 1] - (m - mass_above[i + 1]) / density[i]
            }
        }
    }

    /// Radius `R` with `∫_R^∞ r μ(dr) = q` for `0 < q ≤ ∫ r μ(dr)`.
    pub fn inv_tail(&self, q: f64) -> f64 {
        let a = self.alpha;
        match &self.family {
            Family::OneWedgePareto => {
                if q >= 1.0 / a {
                    (1.0 - 2.0 * (q - 1.0 / a)).max(0.0).sqrt()
                } else {
                    (a * q).powf(-1.0 / a)
                }
            }
            Family::PointMass { r0 } => *r0,
            Family::Table {
                edges,
                density,
                moment_above,
                ..
            } => {
                let k = density.len();
                if q <= moment_above[k] {
                    return edges[k] * (q / moment_above[k]).powf(-1.0 / a);
                }
                let i = (moment_above.partition_point(|x| *x >= q)).saturating_sub(1).min(k - 1);
                if density[i] == 0.0 {
                    return edges[i + 1];
                }
                let b = edges[i + 1];
                (b * b - 2.0 * (q - moment_above[i + 1]) / density[i]).max(0.0).sqrt()
            }
        }
    }

    /// Radius drawn from `μ / μ(0, ∞)`.
    pub fn sample_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        // 1 − u lies in (0, 1], keeping the mass argument away from zero
        self.inv_mass_above((1.0 - u) * self.total_mass())
    }

    /// Radius drawn from the size-biased law `r μ(dr) / ∫ r μ`.
    pub fn sample_size_biased<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.inv_tail((1.0 - u) * self.first_moment())
    }

    /// Displacement of a path hit by an event: `r·(2U − 1)` with `r` size-biased.
    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let r = self.sample_size_biased(rng);
        let u: f64 = rng.random();
        r * (2.0 * u - 1.0)
    }

    /// Smallest radius `R*` with `∫_{R*}^∞ r μ(dr) ≤ tol · ∫ r μ(dr)`.
    pub fn truncation_radius(&self, tol: f64) -> f64 {
        if let Some(r) = self.max_radius() {
            return r;
        }
        self.inv_tail(tol * self.first_moment())
    }
}
