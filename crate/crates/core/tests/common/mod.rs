#![allow(dead_code)]

use pathweave::crossing::CrossingWindow;
use pathweave::path::StepBuilder;
use pathweave::CadlagPath;
use rand::Rng;

const INF: f64 = f64::INFINITY;

/// Step path on `[lo, hi]` with up to `max_jumps` jumps at uniform times.
pub fn small_step<R: Rng>(rng: &mut R, max_jumps: usize) -> CadlagPath {
    let lo = rng.random_range(-1.5..-0.5);
    let hi = rng.random_range(0.5..1.5);
    let k = rng.random_range(0..=max_jumps);
    let mut ts: Vec<f64> = (0..k).map(|_| rng.random_range(lo..hi)).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut b = StepBuilder::new(lo, hi, rng.random_range(-2.0..2.0));
    for t in ts {
        if t > lo {
            b = b.jump(t, rng.random_range(-2.0..2.0));
        }
    }
    b.build().unwrap()
}

/// Path on `[lo, ∞)` or `(−∞, ∞)` with up to seven jumps.
pub fn crossing_path<R: Rng>(rng: &mut R) -> CadlagPath {
    let bounded = rng.random_bool(0.5);
    let lo = if bounded { rng.random_range(-1.5..0.5) } else { -INF };
    let mut t = if bounded { lo } else { -1.2 };
    let mut b = StepBuilder::new(lo, INF, rng.random_range(-2.0..2.0));
    for _ in 0..rng.random_range(0..8) {
        t += rng.random_range(0.001..0.4);
        b = b.jump(t, rng.random_range(-2.5..2.5));
    }
    b.build().unwrap()
}

pub fn crossing_window<R: Rng>(rng: &mut R) -> CrossingWindow {
    CrossingWindow::new(
        rng.random_range(0.3..1.5),
        rng.random_range(0.01..0.5),
        rng.random_range(0.05..1.0),
        rng.random_range(-1.5..1.5),
    )
    .unwrap()
}

/// Two sequences of paths and their limits.
pub struct Family {
    pub name: String,
    /// `true` when the limits are expected to collide at a boundary time.
    pub collides: bool,
    pub seq: Vec<(CadlagPath, CadlagPath)>,
    pub limit: (CadlagPath, CadlagPath),
}

fn fam(name: String, collides: bool, f: impl Fn(f64) -> (CadlagPath, CadlagPath), limit: (CadlagPath, CadlagPath)) -> Family {
    Family {
        name,
        collides,
        seq: [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0].iter().map(|&n| f(n)).collect(),
        limit,
    }
}

/// Convergent noncrossing families covering both outcomes of the limit dichotomy.
pub fn dichotomy_families() -> Vec<Family> {
    let mut out = Vec::new();

    // One path starts with a downward jump just as the other ends with an upward jump;
    // in the limit the two jumps happen at the same boundary time.
    for (lo, hi) in [(0.0, 1.0), (-1.0, 2.0), (0.5, 0.75), (-3.0, -2.0)] {
        out.push(fam(
            format!("start-down/end-up {lo}..{hi}"),
            true,
            |n| {
                let a = StepBuilder::new(0.0, INF, hi).start_left(hi).jump(1.0 / n, lo).build().unwrap();
                let b = StepBuilder::new(-INF, 0.5 / n, lo).end_right(hi).build().unwrap();
                (a, b)
            },
            (
                StepBuilder::new(0.0, INF, lo).start_left(hi).build().unwrap(),
                StepBuilder::new(-INF, 0.0, lo).end_right(hi).build().unwrap(),
            ),
        ));
    }
    // Mirror image: an upward jump at a start meets a downward jump at an end.
    for (lo, hi) in [(0.0, 1.0), (-2.0, 1.0), (1.0, 1.5)] {
        out.push(fam(
            format!("start-up/end-down {lo}..{hi}"),
            true,
            |n| {
                let a = StepBuilder::new(0.0, INF, lo).start_left(lo).jump(1.0 / n, hi).build().unwrap();
                let b = StepBuilder::new(-INF, 0.5 / n, hi).end_right(lo).build().unwrap();
                (a, b)
            },
            (
                StepBuilder::new(0.0, INF, hi).start_left(lo).build().unwrap(),
                StepBuilder::new(-INF, 0.0, hi).end_right(lo).build().unwrap(),
            ),
        ));
    }
    // Both limits start at the same time with opposite entry jumps.
    for gap in [1.0, 0.25, 3.0] {
        out.push(fam(
            format!("two starts, gap {gap}"),
            true,
            |n| {
                let a = StepBuilder::new(0.0, INF, 0.0).start_left(gap).build().unwrap();
                let b = StepBuilder::new(1.0 / n, INF, gap).start_left(0.0).build().unwrap();
                (a, b)
            },
            (
                StepBuilder::new(0.0, INF, 0.0).start_left(gap).build().unwrap(),
                StepBuilder::new(0.0, INF, gap).start_left(0.0).build().unwrap(),
            ),
        ));
    }

    // Separated constants converging to touching or separated limits.
    for (c, d) in [(0.0, 0.0), (0.0, 1.0), (-1.0, 0.5), (2.0, 0.0)] {
        out.push(fam(
            format!("constants {c}, +{d}"),
            false,
            |n| {
                (
                    CadlagPath::constant(c, -INF, INF).unwrap(),
                    CadlagPath::constant(c + d + 1.0 / n, -INF, INF).unwrap(),
                )
            },
            (CadlagPath::constant(c, -INF, INF).unwrap(), CadlagPath::constant(c + d, -INF, INF).unwrap()),
        ));
    }
    // Jumps in the same direction merging in time.
    for (a0, a1, b0, b1) in [(0.0, 1.0, 0.5, 2.0), (0.0, 1.0, 0.0, 1.0), (-1.0, 0.0, -1.0, 3.0)] {
        out.push(fam(
            format!("same-direction jumps {a0}->{a1}, {b0}->{b1}"),
            false,
            |n| {
                (
                    CadlagPath::step(1.0 / n, a0, a1, -INF, INF).unwrap(),
                    CadlagPath::step(0.0, b0, b1, -INF, INF).unwrap(),
                )
            },
            (
                CadlagPath::step(0.0, a0, a1, -INF, INF).unwrap(),
                CadlagPath::step(0.0, b0, b1, -INF, INF).unwrap(),
            ),
        ));
    }
    // Staircase ramps steepening into a jump under a higher constant.
    for top in [1.0, 1.5] {
        out.push(fam(
            format!("ramp under constant {top}"),
            false,
            |n| {
                (
                    CadlagPath::ramp(-INF, INF, 0.0, 1.0 / n, 0.0, 1.0, 16).unwrap(),
                    CadlagPath::constant(top, -INF, INF).unwrap(),
                )
            },
            (
                CadlagPath::step(0.0, 0.0, 1.0, -INF, INF).unwrap(),
                CadlagPath::constant(top, -INF, INF).unwrap(),
            ),
        ));
    }
    // A path ending exactly where the other starts, with jumps in the same direction.
    out.push(fam(
        "end-up meets start-up".into(),
        false,
        |n| {
            let a = StepBuilder::new(-INF, 0.5 / n, 0.0).end_right(1.0).build().unwrap();
            let b = StepBuilder::new(1.0 / n, INF, 2.0).start_left(1.0).build().unwrap();
            (a, b)
        },
        (
            StepBuilder::new(-INF, 0.0, 0.0).end_right(1.0).build().unwrap(),
            StepBuilder::new(0.0, INF, 2.0).start_left(1.0).build().unwrap(),
        ),
    ));
    out
}
