//! Monte Carlo estimates of crossing-set probabilities over parameter grids.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossing::{ensemble_in_cm, ensemble_in_s, CrossingWindow, SVariant};
use crate::path::StepBuilder;
use crate::stats::{isotonic_nonincreasing, wilson};
use crate::weave::{build_weave_with_tol, derive_seed, GridSpec, HeavyTailModel, ModelSpec, SimWindow};
use crate::{CadlagPath, Error, PathEnsemble, Result};

/// Default floor for the "violation signature" verdict.
pub const DEFAULT_FLOOR: f64 = 0.05;

pub const DISCLAIMER: &str = "Diagnostic only: finite Monte Carlo tables can exhibit trends but cannot establish tightness.";

pub const SUP_RULE: &str = "The supremum over the family is taken as the maximum over the configured n-list.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    #[serde(rename = "two")]
    Two,
    J,
    M,
    CM,
}

impl Criterion {
    pub fn variant(self) -> Option<SVariant> {
        match self {
            Criterion::Two => Some(SVariant::Two),
            Criterion::J => Some(SVariant::J),
            Criterion::M => Some(SVariant::M),
            Criterion::CM => None,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Two => "two",
            Criterion::J => "J",
            Criterion::M => "M",
            Criterion::CM => "CM",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two" | "c" => Ok(Criterion::Two),
            "J" | "j" => Ok(Criterion::J),
            "M" | "m" => Ok(Criterion::M),
            "CM" | "cm" => Ok(Criterion::CM),
            other => Err(Error::InvalidParameter(format!("unknown criterion {other:?}"))),
        }
    }
}

fn default_x_lo() -> f64 {
    -1.0
}
fn default_x_hi() -> f64 {
    1.0
}
fn default_tol() -> f64 {
    crate::weave::DEFAULT_TRUNCATION_TOL
}
fn default_n() -> Vec<f64> {
    vec![1.0]
}

/// Source of ensemble replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Weave {
        model: ModelSpec,
        #[serde(default = "default_n")]
        n: Vec<f64>,
        #[serde(default = "default_x_lo")]
        x_lo: f64,
        #[serde(default = "default_x_hi")]
        x_hi: f64,
        #[serde(default)]
        grid: GridSpec,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    /// Constant paths on `[−T, T]`.
    Constant { values: Vec<f64> },
    /// One path on `[−T, T]` alternating between `low` and `high` at times `k·gap`.
    Zigzag { gap: f64, low: f64, high: f64 },
}

impl GeneratorSpec {
    pub fn n_list(&self) -> Vec<f64> {
        match self {
            GeneratorSpec::Weave { n, .. } => n.clone(),
            _ => vec![1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    pub delta: Vec<f64>,
    pub eps: Vec<f64>,
    #[serde(default = "default_r")]
    pub r: Vec<f64>,
}

fn default_r() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    pub table: Option<String>,
    pub report: Option<String>,
}

fn default_criteria() -> Vec<Criterion> {
    vec![Criterion::Two, Criterion::J, Criterion::M, Criterion::CM]
}
fn default_reps() -> usize {
    100
}
fn default_refinement() -> f64 {
    crate::metrics::DEFAULT_REFINEMENT
}
fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Share one replicate stream across all `(T, δ, ε, r)` cells of each `n`.
    #[serde(default)]
    pub paired: bool,
    #[serde(default = "default_criteria")]
    pub criteria: Vec<Criterion>,
    pub generator: GeneratorSpec,
    pub grids: Grids,
    #[serde(default)]
    pub output: OutputSpec,
    /// Metric refinement `h`; carried for tools that compare replicate paths.
    #[serde(default = "default_refinement")]
    pub refinement: f64,
    #[serde(default = "default_floor")]
    pub floor: f64,
    /// Directory that relative file names in the config resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl DiagnosticConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut c = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)?
        } else {
            Self::from_toml(&text)?
        };
        c.base_dir = path.parent().map(Path::to_path_buf);
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grids;
        if g.t.is_empty() || g.delta.is_empty() || g.eps.is_empty() || g.r.is_empty() {
            return Err(Error::Config("every grid must be nonempty".into()));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.criteria.is_empty() {
            return Err(Error::Config("no criteria requested".into()));
        }
        if self.generator.n_list().is_empty() || self.generator.n_list().iter().any(|n| !(*n >= 1.0)) {
            return Err(Error::Config("n-list must be nonempty with n >= 1".into()));
        }
        for &t in &g.t {
            for &d in &g.delta {
                for &e in &g.eps {
                    for &r in &g.r {
                        CrossingWindow::new(t, d, e, r).map_err(|e| Error::Config(e.to_string()))?;
                    }
                }
            }
        }
        Ok(())
    }

    fn model(&self) -> Result<Option<HeavyTailModel>> {
        match &self.generator {
            GeneratorSpec::Weave { model, .. } => HeavyTailModel::from_spec(model, self.base_dir.as_deref()).map(Some),
            _ => Ok(None),
        }
    }
}

/// One ensemble replicate on the time window `[−t_max, t_max]`.
pub fn generate(spec: &GeneratorSpec, model: Option<&HeavyTailModel>, n: f64, t_max: f64, seed: u64) -> Result<PathEnsemble> {
    match spec {
        GeneratorSpec::Weave { x_lo, x_hi, grid, tol, .. } => {
            let model = model.ok_or_else(|| Error::InvalidModel("weave generator without a model".into()))?;
            let w = SimWindow::new(*x_lo, *x_hi, -t_max, t_max, n)?;
            Ok(build_weave_with_tol(model, &w, grid, seed, *tol)?.ensemble)
        }
        GeneratorSpec::Constant { values } => {
            let paths = values
                .iter()
                .map(|&c| CadlagPath::constant(c, -t_max, t_max))
                .collect::<Result<Vec<_>>>()?;
            PathEnsemble::new(paths)
        }
        GeneratorSpec::Zigzag { gap, low, high } => {
            if !(*gap > 0.0) {
                return Err(Error::InvalidParameter(format!("zigzag gap must be positive, got {gap}")));
            }
            let first = (-t_max / gap).floor() as i64 + 1;
            let mut k = first;
            let mut b = StepBuilder::new(-t_max, t_max, if first.rem_euclid(2) == 0 { *high } else { *low });
            while (k as f64) * gap < t_max {
                b = b.jump(k as f64 * gap, if k.rem_euclid(2) == 0 { *low } else { *high });
                k += 1;
            }
            PathEnsemble::new(vec![b.build()?])
        }
    }
}

/// Indicator of the criterion event on one replicate.
pub fn criterion_hit(a: &PathEnsemble, c: Criterion, w: &CrossingWindow) -> bool {
    match c.variant() {
        Some(v) => ensemble_in_s(a, v, w).is_some(),
        None => ensemble_in_cm(a, w).is_some(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessCell {
    pub n: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub delta: f64,
    pub eps: f64,
    pub r: f64,
    pub criterion: Criterion,
    pub estimate: f64,
    /// Half-width of the 95% Wilson interval.
    pub ci: f64,
    pub reps: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    #[serde(skip)]
    pub hits: usize,
}

impl TightnessCell {
    pub fn interval(&self) -> (f64, f64) {
        wilson(self.hits, self.reps)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TightnessTable {
    pub cells: Vec<TightnessCell>,
}

pub const TABLE_HEADER: [&str; 9] = ["n", "T", "delta", "eps", "r", "criterion", "estimate", "ci", "reps"];

impl TightnessTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        wr.write_record(TABLE_HEADER)?;
        for c in &self.cells {
            wr.write_record([
                c.n.to_string(),
                c.t.to_string(),
                c.delta.to_string(),
                c.eps.to_string(),
                c.r.to_string(),
                c.criterion.to_string(),
                c.estimate.to_string(),
                c.ci.to_string(),
                c.reps.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn get(&self, n: f64, t: f64, delta: f64, eps: f64, r: f64, c: Criterion) -> Option<&TightnessCell> {
        self.cells
            .iter()
            .find(|x| x.n == n && x.t == t && x.delta == delta && x.eps == eps && x.r == r && x.criterion == c)
    }

    pub fn merge(tables: &[TightnessTable]) -> TightnessTable {
        TightnessTable {
            cells: tables.iter().flat_map(|t| t.cells.iter().cloned()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct CellKey {
    n: f64,
    t: f64,
    delta: f64,
    eps: f64,
    r: f64,
}

fn cell_keys(cfg: &DiagnosticConfig) -> Vec<CellKey> {
    let g = &cfg.grids;
    let mut out = Vec::new();
    for &n in &cfg.generator.n_list() {
        for &t in &g.t {
            for &delta in &g.delta {
                for &eps in &g.eps {
                    for &r in &g.r {
                        out.push(CellKey { n, t, delta, eps, r });
                    }
                }
            }
        }
    }
    out
}

fn replicate_seed(cfg: &DiagnosticConfig, k: &CellKey, rep: usize) -> u64 {
    if cfg.paired {
        derive_seed(&[cfg.seed, k.n.to_bits(), rep as u64])
    } else {
        derive_seed(&[
            cfg.seed,
            k.n.to_bits(),
            k.t.to_bits(),
            k.delta.to_bits(),
            k.eps.to_bits(),
            k.r.to_bits(),
            rep as u64,
        ])
    }
}

/// Runs every requested criterion in one pass. Criteria share replicate
/// streams, so per-replicate implications between criteria hold exactly.
pub fn estimate_table(cfg: &DiagnosticConfig, criteria: &[Criterion]) -> Result<TightnessTable> {
    cfg.validate()?;
    let model = cfg.model()?;
    let keys = cell_keys(cfg);
    let t_max = cfg.grids.t.iter().copied().fold(0.0, f64::max);
    type Outcome = std::result::Result<Vec<bool>, String>;
    let outcomes: Vec<Vec<Outcome>> = if cfg.paired {
        // one replicate per (n, rep), evaluated on every cell of that n
        let ns = cfg.generator.n_list();
        let per_n: Vec<Vec<Vec<Outcome>>> = ns
            .iter()
            .map(|&n| {
                let ks: Vec<&CellKey> = keys.iter().filter(|k| k.n == n).collect();
                (0..cfg.reps)
                    .into_par_iter()
                    .map(|rep| {
                        let seed = replicate_seed(cfg, ks[0], rep);
                        match generate(&cfg.generator, model.as_ref(), n, t_max, seed) {
                            Ok(a) => ks.iter().map(|k| Ok(eval_cell(&a, k, criteria))).collect(),
                            Err(e) => ks.iter().map(|_| Err(e.to_string())).collect(),
                        }
                    })
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        for per_rep in per_n {
            let cells = per_rep.first().map_or(0, Vec::len);
            for ci in 0..cells {
                out.push(per_rep.iter().map(|r| r[ci].clone()).collect());
            }
        }
        out
    } else {
        keys.iter()
            .map(|k| {
                (0..cfg.reps)
                    .into_par_iter()
                    .map(|rep| {
                        let seed = replicate_seed(cfg, k, rep);
                        generate(&cfg.generator, model.as_ref(), k.n, k.t, seed)
                            .map(|a| eval_cell(&a, k, criteria))
                            .map_err(|e| e.to_string())
                    })
                    .collect()
            })
            .collect()
    };
    let mut cells = Vec::new();
    for (k, reps) in keys.iter().zip(outcomes) {
        let error = reps.iter().find_map(|r| r.as_ref().err().cloned());
        for (ci, &c) in criteria.iter().enumerate() {
            let hits = reps.iter().filter(|r| matches!(r, Ok(v) if v[ci])).count();
            let n_ok = if error.is_some() { 0 } else { reps.len() };
            let (lo, hi) = wilson(hits, n_ok);
            cells.push(TightnessCell {
                n: k.n,
                t: k.t,
                delta: k.delta,
                eps: k.eps,
                r: k.r,
                criterion: c,
                estimate: if n_ok == 0 { f64::NAN } else { hits as f64 / n_ok as f64 },
                ci: (hi - lo) / 2.0,
                reps: n_ok,
                error: error.clone(),
                hits,
            });
        }
    }
    Ok(TightnessTable { cells })
}

fn eval_cell(a: &PathEnsemble, k: &CellKey, criteria: &[Criterion]) -> Vec<bool> {
    let w = CrossingWindow {
        t: k.t,
        delta: k.delta,
        eps: k.eps,
        r: k.r,
    };
    criteria.iter().map(|&c| criterion_hit(a, c, &w)).collect()
}

/// `P[S^v ∩ A ≠ ∅]` for `criterion ∈ {two, J, M}`.
pub fn estimate_s_probability(cfg: &DiagnosticConfig, criterion: Criterion) -> Result<TightnessTable> {
    if criterion == Criterion::CM {
        return Err(Error::InvalidParameter("use estimate_cm_probability for CM".into()));
    }
    estimate_table(cfg, &[criterion])
}

/// `P[C^M ∩ (A × A) ≠ ∅]`, self-pairs included.
pub fn estimate_cm_probability(cfg: &DiagnosticConfig) -> Result<TightnessTable> {
    estimate_table(cfg, &[Criterion::CM])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "consistent with tightness")]
    Consistent,
    #[serde(rename = "inconclusive")]
    Inconclusive,
    #[serde(rename = "violation signature")]
    Violation,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent with tightness",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Violation => "violation signature",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnReport {
    #[serde(rename = "T")]
    pub t: f64,
    pub eps: f64,
    pub r: f64,
    pub criterion: Criterion,
    /// δ values, largest first.
    pub deltas: Vec<f64>,
    /// Max over `n` at each δ.
    pub sup_estimates: Vec<f64>,
    pub sup_intervals: Vec<(f64, f64)>,
    pub isotonic_fit: Vec<f64>,
    pub terminal: f64,
    /// δ pairs `(larger, smaller)` whose estimates increase with disjoint intervals.
    pub inversions: Vec<(f64, f64)>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessReport {
    pub disclaimer: String,
    pub sup_rule: String,
    pub floor: f64,
    pub columns: Vec<ColumnReport>,
    pub summary: Verdict,
}

impl TightnessReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n{}\n", self.disclaimer, self.sup_rule);
        for c in &self.columns {
            s += &format!(
                "T={} eps={} r={} {}: sup estimates {:?} over delta {:?}; terminal {:.4}; {}\n",
                c.t, c.eps, c.r, c.criterion, c.sup_estimates, c.deltas, c.terminal, c.verdict
            );
        }
        s += &format!("summary: {}\n", self.summary);
        s
    }
}

fn disjoint(a: (f64, f64), b: (f64, f64)) -> bool {
    a.1 < b.0 || b.1 < a.0
}

/// Merges tables and assigns a verdict to every `(T, ε, r, criterion)` column.
///
/// "violation signature" needs the smallest-δ sup estimate above `floor`, its
/// interval clear of zero, and no significant drop from the largest δ.
/// A column that is above the floor but dropping is "inconclusive".
pub fn tightness_report(tables: &[TightnessTable], floor: f64) -> Result<TightnessReport> {
    if tables.is_empty() {
        return Err(Error::InvalidParameter("tightness_report needs at least one table".into()));
    }
    let merged = TightnessTable::merge(tables);
    type ColKey = (u64, u64, u64, Criterion);
    let mut cols: BTreeMap<ColKey, BTreeMap<u64, Vec<&TightnessCell>>> = BTreeMap::new();
    let mut order: Vec<ColKey> = Vec::new();
    for c in merged.cells.iter().filter(|c| c.error.is_none()) {
        let key = (c.t.to_bits(), c.eps.to_bits(), c.r.to_bits(), c.criterion);
        if !cols.contains_key(&key) {
            order.push(key);
        }
        cols.entry(key).or_default().entry(c.delta.to_bits()).or_default().push(c);
    }
    let mut columns = Vec::new();
    for key in order {
        let by_delta = &cols[&key];
        let mut deltas: Vec<f64> = by_delta.keys().map(|b| f64::from_bits(*b)).collect();
        deltas.sort_by(|a, b| b.total_cmp(a));
        let mut sup = Vec::new();
        let mut ints = Vec::new();
        for d in &deltas {
            let best = by_delta[&d.to_bits()]
                .iter()
                .max_by(|a, b| a.estimate.total_cmp(&b.estimate).then(b.n.total_cmp(&a.n)))
                .expect("nonempty column");
            sup.push(best.estimate);
            ints.push(best.interval());
        }
        let fit = isotonic_nonincreasing(&sup);
        let last = sup.len() - 1;
        let terminal = sup[last];
        let inversions = (0..last)
            .filter(|&i| sup[i + 1] > sup[i] && disjoint(ints[i], ints[i + 1]))
            .map(|i| (deltas[i], deltas[i + 1]))
            .collect();
        let above = terminal > floor && ints[last].0 > 0.0;
        let dropping = last > 0 && ints[last].1 < ints[0].0;
        let verdict = match (above, dropping) {
            (false, _) => Verdict::Consistent,
            (true, true) => Verdict::Inconclusive,
            (true, false) => Verdict::Violation,
        };
        columns.push(ColumnReport {
            t: f64::from_bits(key.0),
            eps: f64::from_bits(key.1),
            r: f64::from_bits(key.2),
            criterion: key.3,
            deltas,
            sup_estimates: sup,
            sup_intervals: ints,
            isotonic_fit: fit,
            terminal,
            inversions,
            verdict,
        });
    }
    let summary = columns.iter().map(|c| c.verdict).max().unwrap_or(Verdict::Consistent);
    Ok(TightnessReport {
        disclaimer: DISCLAIMER.into(),
        sup_rule: SUP_RULE.into(),
        floor,
        columns,
        summary,
    })
}
