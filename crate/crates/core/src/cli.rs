//! Command-line front end.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossing::{in_s, pair_in_cm, precompactness_score, CrossingWindow, ModulusKind, SVariant};
use crate::diagnostics::{estimate_table, tightness_report, DiagnosticConfig};
use crate::metrics::{distance, distance_matrix, hausdorff, oracle_distance, Metric, DEFAULT_REFINEMENT};
use crate::order::{collides_at, crosses, is_noncrossing_set};
use crate::path::StepBuilder;
use crate::weave::{
    build_weave_with_tol, cp_vs_trace_check, default_mu, derive_seed, scaling_check, write_events_csv, EventField, GridSpec,
    HeavyTailModel, ModelSpec, SimWindow, DEFAULT_TRUNCATION_TOL,
};
use crate::{CadlagPath, Error, PathEnsemble, Result};

pub const THREADS_ENV: &str = "PATHWEAVE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "pathweave", version, about = "Cadlag path metrics, crossing diagnostics and Poisson weave simulation")]
pub struct Cli {
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Worker threads; the PATHWEAVE_THREADS environment variable takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build weave realizations and write ensembles and events.
    Simulate {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        n: Option<f64>,
        /// Use an nx-by-nt uniform grid instead of the lattice.
        #[arg(long, requires = "nt")]
        nx: Option<usize>,
        #[arg(long, requires = "nx")]
        nt: Option<usize>,
    },
    /// Distance between two persisted paths, or all pairs of two ensembles.
    Distance {
        #[arg(long, default_value = "j1")]
        metric: String,
        #[arg(long, default_value_t = DEFAULT_REFINEMENT)]
        refinement: f64,
        /// Report the Hausdorff distance between the two ensembles.
        #[arg(long)]
        hausdorff: bool,
        a: PathBuf,
        b: PathBuf,
    },
    /// Modulus tables for a persisted ensemble.
    Moduli {
        input: PathBuf,
        #[arg(long, default_value = "M")]
        kind: String,
        #[arg(long = "T", value_delimiter = ',', default_value = "1")]
        t: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
        delta: Vec<f64>,
    },
    /// Estimate crossing probabilities over a grid and write the table and report.
    Diagnose,
    /// Compound-Poisson and scaling KS suites.
    ScalingCheck {
        #[arg(long, value_delimiter = ',', default_value = "0.8,1,1.5")]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "4,16")]
        n: Vec<f64>,
    },
    /// Quick oracle and property checks.
    Selftest,
}

/// Parses `argv` (program name first) and runs the command.
///
/// Returns 0 on success, 1 on usage or runtime errors and 2 when `selftest` fails.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .or(cli.threads);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn out_dir(cli: &Cli) -> Result<PathBuf> {
    let d = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&d)?;
    Ok(d)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Simulate { alpha, n, nx, nt } => simulate(cli, *alpha, *n, nx.zip(*nt)),
        Command::Distance {
            metric,
            refinement,
            hausdorff,
            a,
            b,
        } => distance_cmd(cli, metric, *refinement, *hausdorff, a, b),
        Command::Moduli { input, kind, t, delta } => moduli_cmd(cli, input, kind, t, delta),
        Command::Diagnose => diagnose(cli),
        Command::ScalingCheck { alpha, n } => scaling_cmd(cli, alpha, n),
        Command::Selftest => Ok(selftest(cli.seed.unwrap_or(0))),
    }
}

fn default_model() -> ModelSpec {
    ModelSpec::OneWedgePareto { alpha: 1.0 }
}
fn one() -> f64 {
    1.0
}
fn minus_one() -> f64 {
    -1.0
}

/// `simulate` configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_model")]
    pub model: ModelSpec,
    #[serde(default = "one")]
    pub n: f64,
    #[serde(default = "minus_one")]
    pub x_lo: f64,
    #[serde(default = "one")]
    pub x_hi: f64,
    #[serde(default = "minus_one")]
    pub t_lo: f64,
    #[serde(default = "one")]
    pub t_hi: f64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "one_rep")]
    pub reps: usize,
}

fn default_tol() -> f64 {
    DEFAULT_TRUNCATION_TOL
}
fn one_rep() -> usize {
    1
}

impl Default for SimulateConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

#[derive(Debug, Serialize)]
struct SimulateSummary {
    replicate: usize,
    seed: u64,
    paths: usize,
    events: usize,
    simultaneous_events: usize,
    truncation_radius: f64,
    truncation_bias: f64,
    horizon: f64,
    truncated: bool,
}

fn simulate(cli: &Cli, alpha: Option<f64>, n: Option<f64>, grid: Option<(usize, usize)>) -> Result<i32> {
    let (mut cfg, base) = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            let c: SimulateConfig = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
            (c, p.parent().map(Path::to_path_buf))
        }
        None => (SimulateConfig::default(), None),
    };
    if let Some(a) = alpha {
        cfg.model = match cfg.model {
            ModelSpec::OneWedgePareto { .. } => ModelSpec::OneWedgePareto { alpha: a },
            ModelSpec::PointMass { r0, .. } => ModelSpec::PointMass { r0, alpha: a },
            ModelSpec::Table { file, .. } => ModelSpec::Table { file, alpha: a },
        };
    }
    if let Some(n) = n {
        cfg.n = n;
    }
    if let Some((nx, nt)) = grid {
        cfg.grid = GridSpec::Uniform { nx, nt };
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(r) = cli.reps {
        cfg.reps = r;
    }
    let model = HeavyTailModel::from_spec(&cfg.model, base.as_deref())?;
    let window = SimWindow::new(cfg.x_lo, cfg.x_hi, cfg.t_lo, cfg.t_hi, cfg.n)?;
    let dir = out_dir(cli)?;
    let format = cli.format.unwrap_or(Format::Csv);
    let results = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = derive_seed(&[cfg.seed, rep as u64]);
            let weave = build_weave_with_tol(&model, &window, &cfg.grid, seed, cfg.tol)?;
            let mut field = EventField::new(&model, window.n, window.t_lo, window.t_hi, seed, cfg.tol);
            let events = field.events_reaching(window.x_lo, window.x_hi);
            Ok((rep, seed, weave, events))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summaries = Vec::new();
    for (rep, seed, weave, events) in results {
        fs::write(dir.join(format!("weave_{rep}.json")), weave.ensemble.to_json())?;
        match format {
            Format::Csv => write_events_csv(&events, create(&dir.join(format!("events_{rep}.csv")))?)?,
            Format::Json => fs::write(dir.join(format!("events_{rep}.json")), serde_json::to_string_pretty(&events)?)?,
        }
        summaries.push(SimulateSummary {
            replicate: rep,
            seed,
            paths: weave.ensemble.len(),
            events: events.len(),
            simultaneous_events: weave.simultaneous_events,
            truncation_radius: weave.truncation_radius,
            truncation_bias: weave.truncation_bias,
            horizon: weave.horizon,
            truncated: weave.truncated(),
        });
    }
    fs::write(dir.join("simulate_summary.json"), serde_json::to_string_pretty(&summaries)?)?;
    println!("wrote {} weave replicate(s) to {}", summaries.len(), dir.display());
    Ok(0)
}

/// Reads an ensemble file, or a single-path file as a one-path ensemble.
pub fn load_ensemble(path: &Path) -> Result<PathEnsemble> {
    let text = fs::read_to_string(path)?;
    match PathEnsemble::from_json(&text) {
        Ok(e) => Ok(e),
        Err(_) => PathEnsemble::new(vec![CadlagPath::from_json(&text)?]),
    }
}

fn distance_cmd(cli: &Cli, metric: &str, h: f64, use_hausdorff: bool, a: &Path, b: &Path) -> Result<i32> {
    let metric: Metric = metric.parse()?;
    let ea = load_ensemble(a)?;
    let eb = load_ensemble(b)?;
    if use_hausdorff {
        let d = hausdorff(&ea, &eb, metric, h)?;
        println!("{d} (error bound {h})");
        return Ok(0);
    }
    if ea.len() == 1 && eb.len() == 1 {
        let r = distance(&ea.paths()[0], &eb.paths()[0], metric, h)?;
        println!("{} (error bound {})", r.value, r.error_bound);
        return Ok(0);
    }
    let m = distance_matrix(&ea, &eb, metric, h)?;
    match cli.out {
        Some(_) => {
            let dir = out_dir(cli)?;
            m.write_csv(create(&dir.join("distance.csv"))?)?;
        }
        None => m.write_csv(std::io::stdout().lock())?,
    }
    Ok(0)
}

fn moduli_cmd(cli: &Cli, input: &Path, kind: &str, t: &[f64], delta: &[f64]) -> Result<i32> {
    let kind: ModulusKind = kind.parse()?;
    let a = load_ensemble(input)?;
    let table = precompactness_score(&a, kind, t, delta)?;
    let dir = out_dir(cli)?;
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => table.write_csv(create(&dir.join("moduli.csv"))?)?,
        Format::Json => {
            let rows: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|r| serde_json::json!({"T": r.t, "delta": r.delta, "modulus": r.kind.to_string(), "value": r.value}))
                .collect();
            fs::write(dir.join("moduli.json"), serde_json::to_string_pretty(&rows)?)?;
        }
    }
    Ok(0)
}

fn diagnose(cli: &Cli) -> Result<i32> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("diagnose needs --config <file>".into()))?;
    let mut cfg = DiagnosticConfig::from_path(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(r) = cli.reps {
        cfg.reps = r;
    }
    let table = estimate_table(&cfg, &cfg.criteria)?;
    let report = tightness_report(std::slice::from_ref(&table), cfg.floor)?;
    let dir = out_dir(cli)?;
    let format = cli.format.unwrap_or(Format::Csv);
    let table_name = cfg.output.table.clone().unwrap_or_else(|| match format {
        Format::Csv => "tightness.csv".into(),
        Format::Json => "tightness.json".into(),
    });
    match format {
        Format::Csv => table.write_csv(create(&dir.join(&table_name))?)?,
        Format::Json => fs::write(dir.join(&table_name), table.to_json()?)?,
    }
    let report_name = cfg.output.report.clone().unwrap_or_else(|| "report.json".into());
    fs::write(dir.join(report_name), report.to_json()?)?;
    print!("{}", report.to_text());
    Ok(0)
}

#[derive(Debug, Serialize)]
struct KsRow {
    check: String,
    alpha: f64,
    n: f64,
    reps: usize,
    ks: f64,
    critical: f64,
    pass: bool,
}

fn scaling_cmd(cli: &Cli, alphas: &[f64], ns: &[f64]) -> Result<i32> {
    let reps = cli.reps.unwrap_or(2000);
    let seed = cli.seed.unwrap_or(0);
    let mut rows = Vec::new();
    let models = [
        ("cp_vs_trace_default", default_mu(1.0)?),
        ("cp_vs_trace_point_mass", HeavyTailModel::point_mass(1.0, 1.0)?),
    ];
    for (name, m) in &models {
        let r = cp_vs_trace_check(m, 1.0, 1.0, reps, seed)?;
        rows.push(KsRow {
            check: name.to_string(),
            alpha: m.alpha(),
            n: 1.0,
            reps,
            ks: r.ks,
            critical: r.critical,
            pass: r.passes(),
        });
    }
    for &a in alphas {
        let m = default_mu(a)?;
        for &n in ns {
            let r = scaling_check(&m, n, reps, derive_seed(&[seed, a.to_bits(), n.to_bits()]))?;
            rows.push(KsRow {
                check: "scaling".into(),
                alpha: a,
                n,
                reps,
                ks: r.ks,
                critical: r.critical,
                pass: r.passes(),
            });
        }
    }
    for r in &rows {
        println!(
            "{} {} alpha={} n={} ks={:.4} critical={:.4}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.alpha,
            r.n,
            r.ks,
            r.critical
        );
    }
    if cli.out.is_some() {
        let dir = out_dir(cli)?;
        match cli.format.unwrap_or(Format::Csv) {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(create(&dir.join("scaling.csv"))?);
                for r in &rows {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
            Format::Json => fs::write(dir.join("scaling.json"), serde_json::to_string_pretty(&rows)?)?,
        }
    }
    Ok(0)
}

fn random_step(rng: &mut ChaCha8Rng, max_jumps: usize) -> CadlagPath {
    let k = rng.random_range(0..=max_jumps);
    let mut ts: Vec<f64> = (0..k).map(|_| rng.random_range(-0.9..0.9)).collect();
    ts.sort_by(f64::total_cmp);
    let mut b = StepBuilder::new(-1.0, 1.0, rng.random_range(-2.0..2.0));
    for t in ts {
        b = b.jump(t, rng.random_range(-2.0..2.0));
    }
    b.build().expect("valid random step path")
}

/// Runs the quick suite, printing one line per check. Returns the exit code.
pub fn selftest(seed: u64) -> i32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results: Vec<(&str, bool)> = Vec::new();

    let pairs: Vec<(CadlagPath, CadlagPath)> = (0..200).map(|_| (random_step(&mut rng, 2), random_step(&mut rng, 2))).collect();
    let oracle_ok = pairs.iter().all(|(p, q)| {
        [Metric::J1, Metric::M1].iter().all(|&m| {
            let dp = distance(p, q, m, 10.0).map(|r| r.value);
            let or = oracle_distance(p, q, m.graph_kind(), 10.0, 12);
            matches!((dp, or), (Ok(a), Ok(b)) if a == b)
        })
    });
    results.push(("dp matches oracle", oracle_ok));

    let h = 0.05;
    let axioms_ok = (0..100).all(|_| {
        let (a, b, c) = (random_step(&mut rng, 3), random_step(&mut rng, 3), random_step(&mut rng, 3));
        [Metric::J1, Metric::M1].iter().all(|&m| {
            let d = |x: &CadlagPath, y: &CadlagPath| distance(x, y, m, h).map(|r| r.value).unwrap_or(f64::NAN);
            let (ab, ba, bc, ac) = (d(&a, &b), d(&b, &a), d(&b, &c), d(&a, &c));
            ab == ba && ac <= ab + bc + 3.0 * h && d(&a, &a) == 0.0
        })
    });
    results.push(("metric axioms", axioms_ok));

    let cs_ok = (0..300).all(|_| {
        let p = random_step(&mut rng, 6);
        let w = CrossingWindow::new(1.0, rng.random_range(0.05..1.0), rng.random_range(0.1..1.0), rng.random_range(-1.0..1.0))
            .expect("valid window");
        in_s(&p, SVariant::M, &w).is_none() || pair_in_cm(&p, &p, &w).is_some()
    });
    results.push(("S^M implies self C^M", cs_ok));

    let collision_ok = (0..300).all(|_| {
        let t: f64 = rng.random_range(-0.5..0.5);
        let (a, b) = (rng.random_range(-2.0..0.0), rng.random_range(0.0..2.0));
        let up = CadlagPath::step(t, a, b, -1.0, 1.0).expect("valid");
        let down = CadlagPath::step(t, b + 0.1, a - 0.1, -1.0, 1.0).expect("valid");
        !collides_at(&up, &down, t) || crosses(&up, &down).unwrap_or(false)
    });
    results.push(("collision implies crossing", collision_ok));

    let weave_ok = default_mu(1.0)
        .and_then(|m| {
            let w = SimWindow::new(-1.0, 1.0, -1.0, 1.0, 4.0)?;
            (0..5u64).try_fold(true, |ok, s| {
                let wv = build_weave_with_tol(&m, &w, &GridSpec::Uniform { nx: 10, nt: 10 }, seed ^ s, DEFAULT_TRUNCATION_TOL)?;
                Ok(ok && is_noncrossing_set(&wv.ensemble)?.is_none())
            })
        })
        .unwrap_or(false);
    results.push(("weaves are noncrossing", weave_ok));

    let cp_ok = HeavyTailModel::point_mass(1.0, 1.0)
        .and_then(|m| cp_vs_trace_check(&m, 1.0, 1.0, 2000, seed))
        .map(|r| r.passes())
        .unwrap_or(false);
    results.push(("compound Poisson matches tracing", cp_ok));

    let mut all = true;
    for (name, ok) in &results {
        println!("{} {name}", if *ok { "ok  " } else { "FAIL" });
        all &= ok;
    }
    if all {
        0
    } else {
        2
    }
}
