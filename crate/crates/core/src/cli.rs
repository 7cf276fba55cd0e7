//! Command-line front end: `plan`, `simulate` and `bench-arclength`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phspline::{PHSpline, SplineExport};
use crate::quadrature::integrate_with_breaks;
use crate::scenario::{ScenarioConfig, SimMode};
use crate::sim::{lyapunov_monitor, run_scenario, write_trace_csv, SimResult, StopReason};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

pub const DEFAULT_SEED: u64 = 20_240_917;
/// Track-error level regarded as converged (m).
pub const CONVERGED_TOL: f64 = 0.05;
/// Fraction of the run, at the end, used to judge a steady error.
const TAIL_FRACTION: f64 = 0.25;
const SUMMARY_BENCH_REPS: usize = 3;

#[derive(Debug, Parser)]
#[command(name = "phguide", version, about = "PH spline path planning and path-following simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the spline, write its JSON export and report the length.
    Plan(PlanArgs),
    /// Run the closed loop and write the trace and summary.
    Simulate(SimulateArgs),
    /// Time closed-form arc length against adaptive quadrature.
    BenchArclength(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Built-in scenario (1, 2 or 3).
    #[arg(long, conflicts_with = "config")]
    pub scenario: Option<u32>,
    /// Scenario JSON file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Source {
    pub fn load(&self) -> Result<ScenarioConfig> {
        match (&self.scenario, &self.config) {
            (Some(id), None) => ScenarioConfig::builtin(*id),
            (None, Some(p)) => ScenarioConfig::load(p),
            _ => Err(Error::Config("give exactly one of --scenario or --config".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: Source,
    /// Run the three built-in scenarios in parallel.
    #[arg(long, conflicts_with_all = ["scenario", "config"])]
    pub all_scenarios: bool,
    /// kinematic-basic | kinematic-extended | dynamic
    #[arg(long)]
    pub mode: Option<String>,
    /// on | off
    #[arg(long)]
    pub current: Option<String>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Seed for the arc-length timing intervals; the simulation itself is deterministic.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Comma-separated path parameters at which to report times of arrival.
    #[arg(long, value_delimiter = ',')]
    pub toa_at: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Random subintervals per repetition.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToaPair {
    pub u: f64,
    pub estimated: f64,
    pub simulated: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovSummary {
    pub violations: usize,
    pub max_vdot_e: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub mode: String,
    pub total_length: f64,
    pub stop: String,
    pub t_end: f64,
    pub final_error: f64,
    /// Time after which `|eps| < 0.05 m` holds; absent if never.
    pub settle_time: Option<f64>,
    /// Smallest `|eps|` over the last quarter of the run.
    pub tail_min_error: f64,
    pub converged: bool,
    pub final_estimate_error: [f64; 3],
    pub toa: Vec<ToaPair>,
    pub lyapunov: Option<LyapunovSummary>,
    pub max_abs_tau: Option<[f64; 3]>,
    pub clamp_events: usize,
    /// Closed-form vs quadrature arc-length timing on random subintervals.
    pub arclength_bench: Option<BenchReport>,
}

impl RunSummary {
    pub fn from_run(cfg: &ScenarioConfig, spline: &PHSpline<f64>, res: &SimResult, toa_at: &[f64]) -> Result<Self> {
        let last = res.last();
        let n = res.trace.len();
        let tail = &res.trace[((n as f64) * (1.0 - TAIL_FRACTION)) as usize..];
        let tail_min_error = tail.iter().map(|r| r.err_norm).fold(f64::INFINITY, f64::min);
        let settle_time = res.settle_time(CONVERGED_TOL);
        let toa = toa_at
            .iter()
            .map(|&u| {
                Ok(ToaPair {
                    u,
                    estimated: spline.toa_estimate(u, cfg.guidance.u0)?,
                    simulated: res.simulated_toa(u),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let lyapunov = (res.mode != SimMode::KinematicBasic).then(|| {
            let rep = lyapunov_monitor(&res.trace, res.true_current, cfg.guidance.k_c);
            LyapunovSummary { violations: rep.violations.len(), max_vdot_e: rep.max_vdot_e }
        });
        let max_abs_tau = (res.mode == SimMode::Dynamic).then(|| {
            res.trace.iter().filter_map(|r| r.tau).fold([0.0f64; 3], |m, t| {
                [m[0].max(t[0].abs()), m[1].max(t[1].abs()), m[2].max(t[2].abs())]
            })
        });
        let est = res.final_estimate_error();
        let summary = Self {
            scenario: cfg.name.clone(),
            mode: res.mode.as_str().to_string(),
            total_length: spline.total_length(),
            stop: match res.stop {
                StopReason::PathEnd => "path_end".into(),
                StopReason::TimeLimit => "time_limit".into(),
                StopReason::Diverged { t } => format!("diverged at t = {t}"),
            },
            t_end: last.t,
            final_error: last.err_norm,
            settle_time,
            tail_min_error,
            converged: settle_time.is_some() && res.stop != StopReason::TimeLimit,
            final_estimate_error: [est.x, est.y, est.z],
            toa,
            lyapunov,
            max_abs_tau,
            clamp_events: res.clamp_events,
            arclength_bench: None,
        };
        Ok(summary)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub samples: usize,
    pub reps: usize,
    pub exact_seconds: f64,
    pub quadrature_seconds: f64,
    pub ratio: f64,
    pub max_rel_error: f64,
    pub quadrature_evaluations: usize,
}

/// Random `[lo, hi]` pairs within the spline domain.
pub fn random_intervals(spline: &PHSpline<f64>, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (spline.u_start(), spline.u_end());
    (0..n)
        .map(|_| {
            let x: f64 = rng.gen_range(a..=b);
            let y: f64 = rng.gen_range(a..=b);
            (x.min(y), x.max(y))
        })
        .collect()
}

/// Arc length of `[lo, hi]` by adaptive quadrature of `|eta_p'(u)|`, with
/// the knots as breakpoints.
pub fn quadrature_arc_length(spline: &PHSpline<f64>, lo: f64, hi: f64, tol: f64) -> (f64, usize) {
    let r = integrate_with_breaks(|u| spline.hodograph(u).norm(), lo, hi, spline.knots(), tol);
    (r.value, r.evaluations)
}

pub fn bench_arclength(spline: &PHSpline<f64>, samples: usize, reps: usize, tol: f64, seed: u64) -> BenchReport {
    let iv = random_intervals(spline, samples, seed);
    let reps = reps.max(1);

    let start = Instant::now();
    let mut exact = vec![0.0; iv.len()];
    for _ in 0..reps {
        for (e, &(lo, hi)) in exact.iter_mut().zip(&iv) {
            *e = std::hint::black_box(spline.arc_length(lo, hi));
        }
    }
    let exact_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let mut quad = vec![0.0; iv.len()];
    let mut evals = 0;
    for _ in 0..reps {
        evals = 0;
        for (q, &(lo, hi)) in quad.iter_mut().zip(&iv) {
            let (v, n) = quadrature_arc_length(spline, lo, hi, tol);
            *q = std::hint::black_box(v);
            evals += n;
        }
    }
    let quadrature_seconds = start.elapsed().as_secs_f64();

    let max_rel_error = exact
        .iter()
        .zip(&quad)
        .map(|(e, q)| if *e == 0.0 && *q == 0.0 { 0.0 } else { (e - q).abs() / e.abs().max(q.abs()) })
        .fold(0.0, f64::max);
    BenchReport {
        samples,
        reps,
        exact_seconds,
        quadrature_seconds,
        ratio: quadrature_seconds / exact_seconds.max(1e-12),
        max_rel_error,
        quadrature_evaluations: evals,
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

pub fn cmd_plan(args: &PlanArgs) -> Result<i32> {
    let cfg = args.source.load()?;
    let spline = cfg.build_spline()?;
    fs::create_dir_all(&args.out)?;
    let path = args.out.join("spline.json");
    SplineExport::from_spline(&spline).write(&path)?;
    println!("{}", cfg.name);
    println!("segments      {}", spline.segments().len());
    println!("total length  {:.4} m", spline.total_length());
    println!("chord length  {:.4} m", spline.chord_length());
    println!("ph residual   {:.3e}", spline.ph_residual());
    println!("C1 mismatch   {:.3e}", spline.continuity_mismatch());
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

fn apply_overrides(cfg: &mut ScenarioConfig, args: &SimulateArgs) -> Result<()> {
    if let Some(m) = &args.mode {
        cfg.mode = SimMode::parse(m)?;
    }
    if let Some(c) = &args.current {
        cfg.current_enabled = match c.as_str() {
            "on" => true,
            "off" => false,
            other => return Err(Error::Config(format!("--current expects on|off, got '{other}'"))),
        };
    }
    if let Some(dt) = args.dt {
        cfg.dt = dt;
    }
    if let Some(t) = args.tmax {
        cfg.t_max = t;
    }
    cfg.validate()
}

/// Run one configuration and write `trace.csv` and `summary.json` into `out`.
pub fn simulate_to(cfg: &ScenarioConfig, out: &Path, toa_at: &[f64], seed: u64) -> Result<(RunSummary, bool)> {
    let spline = cfg.build_spline()?;
    let res = run_scenario(cfg, &spline)?;
    fs::create_dir_all(out)?;
    let mut f = std::io::BufWriter::new(fs::File::create(out.join("trace.csv"))?);
    write_trace_csv(&mut f, &res.trace)?;
    let mut summary = RunSummary::from_run(cfg, &spline, &res, toa_at)?;
    summary.arclength_bench = Some(bench_arclength(&spline, 100, SUMMARY_BENCH_REPS, 1e-10, seed));
    write_json(&out.join("summary.json"), &summary)?;
    Ok((summary, matches!(res.stop, StopReason::Diverged { .. })))
}

fn print_summary(s: &RunSummary) {
    println!("{} [{}]", s.scenario, s.mode);
    println!("  length {:.4} m, stop {}, t_end {:.1} s", s.total_length, s.stop, s.t_end);
    println!(
        "  final |eps| {:.4} m, settled {}, tail min {:.4} m, converged {}",
        s.final_error,
        s.settle_time.map_or("never".into(), |t| format!("at {t:.1} s")),
        s.tail_min_error,
        s.converged
    );
    let e = s.final_estimate_error;
    println!("  current estimate error ({:.4}, {:.4}, {:.4}) m/s", e[0], e[1], e[2]);
    if let Some(l) = &s.lyapunov {
        println!("  lyapunov increases {}, max closed-form rate {:.3e}", l.violations, l.max_vdot_e);
    }
    if let Some(t) = s.max_abs_tau {
        println!("  max |tau| surge {:.2} N, pitch {:.2} N m, yaw {:.2} N m", t[0], t[1], t[2]);
    }
    if let Some(b) = &s.arclength_bench {
        println!("  arc length: closed form {:.1}x faster than quadrature, max rel diff {:.1e}", b.ratio, b.max_rel_error);
    }
    for p in &s.toa {
        let sim = p.simulated.map_or("-".into(), |v| format!("{v:.2}"));
        println!("  ToA u = {:>8.2}: estimated {:>8.2} s, simulated {:>8} s", p.u, p.estimated, sim);
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    if args.all_scenarios {
        let mut cfgs = Vec::new();
        for id in 1..=3 {
            let mut c = ScenarioConfig::builtin(id)?;
            apply_overrides(&mut c, args)?;
            cfgs.push((id, c));
        }
        let results: Vec<_> = std::thread::scope(|s| {
            let handles: Vec<_> = cfgs
                .iter()
                .map(|(id, c)| {
                    let out = args.out.join(format!("scenario_{id}"));
                    s.spawn(move || simulate_to(c, &out, &args.toa_at, args.seed))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        let mut code = EXIT_OK;
        for r in results {
            let (summary, diverged) = r?;
            print_summary(&summary);
            if diverged {
                code = EXIT_DIVERGED;
            }
        }
        return Ok(code);
    }
    let mut cfg = args.source.load()?;
    apply_overrides(&mut cfg, args)?;
    let (summary, diverged) = simulate_to(&cfg, &args.out, &args.toa_at, args.seed)?;
    print_summary(&summary);
    Ok(if diverged { EXIT_DIVERGED } else { EXIT_OK })
}

pub fn cmd_bench(args: &BenchArgs) -> Result<i32> {
    let cfg = args.source.load()?;
    let spline = cfg.build_spline()?;
    let r = bench_arclength(&spline, args.samples, args.reps, args.tol, args.seed);
    println!("{}", cfg.name);
    println!("  intervals {} x {} reps", r.samples, r.reps);
    println!("  closed form  {:.6} s", r.exact_seconds);
    println!("  quadrature   {:.6} s ({} integrand calls per rep)", r.quadrature_seconds, r.quadrature_evaluations);
    println!("  speed-up     {:.1}x", r.ratio);
    println!("  max relative difference {:.2e}", r.max_rel_error);
    Ok(EXIT_OK)
}

/// Map an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Diverged { .. } => EXIT_DIVERGED,
        _ => EXIT_CONFIG,
    }
}

pub fn run(cli: &Cli) -> i32 {
    let r = match &cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::BenchArclength(a) => cmd_bench(a),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
