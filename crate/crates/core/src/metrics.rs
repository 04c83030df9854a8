//! J1 and M1 distances between paths as min–max problems over monotone
//! correspondences of their compactified graphs.
//!
//! Graphs are densified in chart coordinates so that consecutive vertices
//! along every connected piece are at most `h` apart; the discrete Fréchet
//! recursion over staircase couplings then brackets the continuum value
//! within `h`.

use std::io::Write;

use rayon::prelude::*;

use crate::path::{CadlagPath, GraphKind, GraphPolyline, Link, PathEnsemble, TimeWindow};
use crate::squeezed::{to_chart, ChartCoords, SqueezedPoint};
use crate::{Error, Result};

pub const DEFAULT_REFINEMENT: f64 = 0.01;
pub const DEFAULT_ORACLE_MAX: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    J1,
    M1,
}

impl Metric {
    pub fn graph_kind(self) -> GraphKind {
        match self {
            Metric::J1 => GraphKind::Closed,
            Metric::M1 => GraphKind::Filled,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "j1" => Ok(Metric::J1),
            "m1" => Ok(Metric::M1),
            other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathDistanceResult {
    pub value: f64,
    /// Staircase coupling of refined vertex indices, from `(0, 0)` to the last pair.
    pub witness: Vec<(usize, usize)>,
    pub error_bound: f64,
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidRefinement(h))
    }
}

/// The straight chart pieces traced by the link from `a` to `b`.
fn link_pieces(a: SqueezedPoint, b: SqueezedPoint, link: Link) -> Vec<(ChartCoords, ChartCoords)> {
    let (ca, cb) = (to_chart(a), to_chart(b));
    match link {
        Link::Gap => Vec::new(),
        Link::Vertical => vec![(ca, cb)],
        Link::Horizontal => {
            let x = match (a, b) {
                (SqueezedPoint::Interior { x, .. }, _) | (_, SqueezedPoint::Interior { x, .. }) => x,
                _ => 0.0,
            };
            if ca.v < 0.0 && cb.v > 0.0 {
                let kink = crate::squeezed::chart_at(x, 0.0);
                vec![(ca, kink), (kink, cb)]
            } else {
                vec![(ca, cb)]
            }
        }
    }
}

/// Isolated vertices and straight segments making up a graph in the chart.
pub fn graph_geometry(g: &GraphPolyline) -> (Vec<ChartCoords>, Vec<(ChartCoords, ChartCoords)>) {
    let points = g.points().map(to_chart).collect();
    let mut segs = Vec::new();
    for w in g.vertices.windows(2) {
        segs.extend(link_pieces(w[0].point, w[1].point, w[0].link));
    }
    (points, segs)
}

/// ⪯-ordered chart vertices with every connected piece subdivided at step ≤ `h`.
pub fn refine(g: &GraphPolyline, h: f64) -> Result<Vec<ChartCoords>> {
    check_h(h)?;
    let mut out = Vec::with_capacity(g.len() * 2);
    let Some(first) = g.vertices.first() else {
        return Ok(out);
    };
    out.push(to_chart(first.point));
    for w in g.vertices.windows(2) {
        let pieces = link_pieces(w[0].point, w[1].point, w[0].link);
        if pieces.is_empty() {
            out.push(to_chart(w[1].point));
            continue;
        }
        for (a, b) in pieces {
            let k = (a.dist(&b) / h).ceil().max(1.0) as usize;
            for i in 1..k {
                out.push(a.lerp(&b, i as f64 / k as f64));
            }
            out.push(b);
        }
    }
    Ok(out)
}

fn refined_graph(p: &CadlagPath, kind: GraphKind, window: TimeWindow, h: f64) -> Result<Vec<ChartCoords>> {
    refine(&p.graph(kind, window)?, h)
}

/// Discrete Fréchet distance under the max-metric with the lexicographically
/// smallest optimal staircase coupling.
pub fn frechet(a: &[ChartCoords], b: &[ChartCoords]) -> (f64, Vec<(usize, usize)>) {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return (0.0, Vec::new());
    }
    // best[i*m + j]: optimal value of the coupling suffix starting at (i, j)
    let mut best = vec![0.0f64; n * m];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            let d = a[i].dist(&b[j]);
            let mut next = f64::INFINITY;
            if i + 1 < n {
                next = next.min(best[(i + 1) * m + j]);
            }
            if j + 1 < m {
                next = next.min(best[i * m + j + 1]);
            }
            if i + 1 < n && j + 1 < m {
                next = next.min(best[(i + 1) * m + j + 1]);
            }
            best[i * m + j] = if next.is_finite() { d.max(next) } else { d };
        }
    }
    let value = best[0];
    let mut witness = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0, 0);
    witness.push((0, 0));
    while (i, j) != (n - 1, m - 1) {
        let options = [(i, j + 1), (i + 1, j), (i + 1, j + 1)];
        let (ni, nj) = options
            .into_iter()
            .find(|&(x, y)| x < n && y < m && best[x * m + y] <= value)
            .expect("an optimal continuation exists");
        i = ni;
        j = nj;
        witness.push((i, j));
    }
    (value, witness)
}

pub fn distance(p1: &CadlagPath, p2: &CadlagPath, metric: Metric, h: f64) -> Result<PathDistanceResult> {
    distance_in_window(p1, p2, metric, TimeWindow::all(), h)
}

/// Distance between the graphs restricted to `window` and compactified.
pub fn distance_in_window(
    p1: &CadlagPath,
    p2: &CadlagPath,
    metric: Metric,
    window: TimeWindow,
    h: f64,
) -> Result<PathDistanceResult> {
    let a = refined_graph(p1, metric.graph_kind(), window, h)?;
    let b = refined_graph(p2, metric.graph_kind(), window, h)?;
    let (value, witness) = frechet(&a, &b);
    Ok(PathDistanceResult {
        value,
        witness,
        error_bound: h,
    })
}

pub fn d_j1(p1: &CadlagPath, p2: &CadlagPath, h: f64) -> Result<PathDistanceResult> {
    distance(p1, p2, Metric::J1, h)
}

pub fn d_m1(p1: &CadlagPath, p2: &CadlagPath, h: f64) -> Result<PathDistanceResult> {
    distance(p1, p2, Metric::M1, h)
}

/// Min over all staircase couplings of the max pairwise distance, by
/// exhaustive enumeration.
pub fn oracle_frechet(a: &[ChartCoords], b: &[ChartCoords]) -> f64 {
    fn walk(a: &[ChartCoords], b: &[ChartCoords], i: usize, j: usize, so_far: f64, best: &mut f64) {
        let cur = so_far.max(a[i].dist(&b[j]));
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(cur);
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, cur, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, cur, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, cur, best);
        }
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

/// Exhaustive counterpart of [`distance`] on the same refined graphs.
pub fn oracle_distance(
    p1: &CadlagPath,
    p2: &CadlagPath,
    kind: GraphKind,
    h: f64,
    max_vertices: usize,
) -> Result<f64> {
    let a = refined_graph(p1, kind, TimeWindow::all(), h)?;
    let b = refined_graph(p2, kind, TimeWindow::all(), h)?;
    if a.len() > max_vertices || b.len() > max_vertices {
        return Err(Error::TooLarge {
            rows: a.len(),
            cols: b.len(),
            max: max_vertices,
        });
    }
    Ok(oracle_frechet(&a, &b))
}

/// Pairwise distances with row and column identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec![String::from("id")];
        header.extend(self.col_ids.iter().cloned());
        wr.write_record(&header)?;
        for (id, row) in self.row_ids.iter().zip(&self.values) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn distance_matrix(a: &PathEnsemble, b: &PathEnsemble, metric: Metric, h: f64) -> Result<DistanceMatrix> {
    check_h(h)?;
    let kind = metric.graph_kind();
    let ra: Vec<Vec<ChartCoords>> = a
        .paths()
        .par_iter()
        .map(|p| refined_graph(p, kind, TimeWindow::all(), h))
        .collect::<Result<_>>()?;
    let rb: Vec<Vec<ChartCoords>> = b
        .paths()
        .par_iter()
        .map(|p| refined_graph(p, kind, TimeWindow::all(), h))
        .collect::<Result<_>>()?;
    let values = ra
        .par_iter()
        .map(|x| rb.iter().map(|y| frechet(x, y).0).collect())
        .collect();
    Ok(DistanceMatrix {
        row_ids: a.ids().to_vec(),
        col_ids: b.ids().to_vec(),
        values,
    })
}

/// Hausdorff distance between two finite ensembles under d_J1 or d_M1.
pub fn hausdorff(a: &PathEnsemble, b: &PathEnsemble, metric: Metric, h: f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let m = distance_matrix(a, b, metric, h)?;
    let rows = m
        .values
        .iter()
        .map(|r| r.iter().copied().fold(f64::INFINITY, f64::min))
        .fold(0.0f64, f64::max);
    let cols = (0..m.col_ids.len())
        .map(|j| m.values.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min))
        .fold(0.0f64, f64::max);
    Ok(rows.max(cols))
}

/// Max-metric distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: ChartCoords, a: ChartCoords, b: ChartCoords) -> f64 {
    let (du, dv) = (b.u - a.u, b.v - a.v);
    let (eu, ev) = (a.u - p.u, a.v - p.v);
    // the objective is convex piecewise linear in λ; its minimum sits at a kink or an end
    let mut cands = vec![0.0, 1.0];
    if du != 0.0 {
        cands.push(-eu / du);
    }
    if dv != 0.0 {
        cands.push(-ev / dv);
    }
    for s in [1.0, -1.0] {
        let den = du - s * dv;
        if den != 0.0 {
            cands.push((s * ev - eu) / den);
        }
    }
    cands
        .into_iter()
        .filter(|l| l.is_finite())
        .map(|l| a.lerp(&b, l.clamp(0.0, 1.0)).dist(&p))
        .fold(f64::INFINITY, f64::min)
}

fn directed_hausdorff(from: &[ChartCoords], to: &(Vec<ChartCoords>, Vec<(ChartCoords, ChartCoords)>)) -> f64 {
    from.par_iter()
        .map(|p| {
            let dp = to.0.iter().map(|q| q.dist(p)).fold(f64::INFINITY, f64::min);
            let ds = to
                .1
                .iter()
                .map(|&(a, b)| point_segment_distance(*p, a, b))
                .fold(f64::INFINITY, f64::min);
            dp.min(ds)
        })
        .reduce(|| 0.0, f64::max)
}

/// Hausdorff distance in the chart between the windowed compactified graphs.
///
/// The source side of each directed term is sampled at step `h`; distances to
/// the target side are exact, so the result is within `h` below the true value.
pub fn graph_hausdorff_window(
    p1: &CadlagPath,
    p2: &CadlagPath,
    kind: GraphKind,
    window: TimeWindow,
    h: f64,
) -> Result<f64> {
    check_h(h)?;
    let g1 = p1.graph(kind, window)?;
    let g2 = p2.graph(kind, window)?;
    let (r1, r2) = (refine(&g1, h)?, refine(&g2, h)?);
    let (geo1, geo2) = (graph_geometry(&g1), graph_geometry(&g2));
    Ok(directed_hausdorff(&r1, &geo2).max(directed_hausdorff(&r2, &geo1)))
}
