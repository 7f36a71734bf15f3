//! The `radii`, `solve`, `certify` and `sweep` pipelines.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::{debug, info, warn};
use majorant_newton::certify::{self, check_envelope, slack, CertificationReport, CertifyOptions};
use majorant_newton::registry::{self, ResolvedMajorant};
use majorant_newton::scalar::HypothesisCheck;
use majorant_newton::{
    compute_radii, holder_radii, newton_solve, scalar_sequence, worst_case_instance, Problem, RadiiReport, ScalarTrace,
    SequenceOptions, SolveStatus,
};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, RadialSweep, StartSpec, WORST_CASE};
use crate::plot::{sweep_svg, Series};
use crate::trace::{rows, write_csv, TraceRow};
use crate::{Exit, Failure};

/// Environment variable capping sweep threads.
pub const THREADS_ENV: &str = "MAJORANT_NEWTON_THREADS";

/// Start points used by `certify` when the config lists none.
pub const DEFAULT_CERTIFY_STARTS: usize = 20;

#[derive(Debug, Clone)]
pub struct Context {
    pub out_dir: PathBuf,
    /// Overrides the config seed.
    pub seed: Option<u64>,
}

impl Context {
    fn seed(&self, cfg: &ExperimentConfig) -> u64 {
        self.seed.unwrap_or(cfg.seed)
    }
}

struct Setup {
    problem: Option<Problem>,
    majorant: ResolvedMajorant,
    kappa: f64,
}

fn setup(cfg: &ExperimentConfig) -> Result<Setup, Failure> {
    let id = cfg.problem.as_deref();
    let spec = match (&cfg.majorant, id) {
        (Some(spec), _) => spec.clone(),
        (None, Some(id)) => registry::matched_majorant(id)?,
        (None, None) => return Err(Failure::config("config needs a majorant or a registry problem")),
    };
    let majorant = spec.resolve(id)?;
    let roots = cfg.root_options();
    let problem = match id {
        None => None,
        Some(WORST_CASE) => Some(worst_case_instance(&majorant.model, &roots)?.problem),
        Some(id) => Some(registry::problem(id)?),
    };
    let problem = match (problem, cfg.kappa) {
        (Some(p), Some(k)) => Some(p.with_kappa(k)?),
        (p, _) => p,
    };
    let kappa = match (&problem, cfg.kappa) {
        (Some(p), _) => p.kappa(),
        (None, Some(k)) => k,
        (None, None) => return Err(Failure::config("kappa is required when no problem is given")),
    };
    Ok(Setup { problem, majorant, kappa })
}

fn require_problem(s: &Setup) -> Result<&Problem, Failure> {
    s.problem.as_ref().ok_or_else(|| Failure::config("this command needs a `problem`"))
}

fn require_root(p: &Problem) -> Result<&DVector<f64>, Failure> {
    p.x_star().ok_or_else(|| Failure::config(format!("problem {} has no known root", p.name())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| Failure::file(path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), value)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn point(v: &[f64], dim: usize) -> Result<DVector<f64>, Failure> {
    if v.len() != dim {
        return Err(Failure::config(format!("start point has {} components, problem has {dim}", v.len())));
    }
    Ok(DVector::from_column_slice(v))
}

fn radial_points(
    radial: &RadialSweep,
    allow_outside: bool,
    center: &DVector<f64>,
    r: f64,
) -> Result<Vec<(f64, DVector<f64>)>, Failure> {
    let dim = center.len();
    let dir = match &radial.direction {
        Some(d) => point(d, dim)?,
        None => {
            let mut e = DVector::zeros(dim);
            e[0] = 1.0;
            e
        }
    };
    let n = dir.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Failure::config("sweep direction must be a nonzero finite vector"));
    }
    let dir = dir / n;
    Ok(radial.fractions(allow_outside)?.into_iter().map(|f| (f, center + &dir * (f * r))).collect())
}

fn start_points(cfg: &ExperimentConfig, p: &Problem, r: Option<f64>) -> Result<Vec<DVector<f64>>, Failure> {
    let dim = p.dim();
    match &cfg.x0 {
        None => Ok(Vec::new()),
        Some(StartSpec::Scalar(v)) => point(&[*v], dim).map(|x| vec![x]),
        Some(StartSpec::Point(v)) => point(v, dim).map(|x| vec![x]),
        Some(StartSpec::Points(vs)) => vs.iter().map(|v| point(v, dim)).collect(),
        Some(StartSpec::Radial { radial }) => {
            let center = require_root(p)?;
            let r = r.ok_or_else(|| Failure::config("radial starts need a convergence radius"))?;
            Ok(radial_points(radial, cfg.allow_outside, center, r)?.into_iter().map(|(_, x)| x).collect())
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiiOutput {
    pub majorant: String,
    pub radii: RadiiReport,
    /// Closed-form radii when the majorant is Hölder or Lipschitz.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<RadiiReport>,
    pub h2: HypothesisCheck,
    /// Sampled third hypothesis for the declared rate exponent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h3: Option<HypothesisCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_h: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_error: Option<f64>,
    #[serde(skip)]
    pub exit: Exit,
}

pub fn run_radii(cfg: &ExperimentConfig, ctx: &Context) -> Result<RadiiOutput, Failure> {
    let s = setup(cfg)?;
    let roots = cfg.root_options();
    let model = &s.majorant.model;
    let radii = compute_radii(model, s.kappa, &roots)?;
    let h2 = model.verify_h2(&roots)?;
    let h3 = match model.rate() {
        Some(p) => Some(model.verify_h3(radii.nu, p, &roots)?),
        None => None,
    };
    let closed_form = match s.majorant.holder {
        Some(params) => Some(holder_radii(params, s.kappa)?),
        None => None,
    };
    let out = RadiiOutput {
        majorant: model.name().to_string(),
        radii,
        closed_form,
        h2,
        h3,
        condition_h: s.majorant.condition_h,
        quadrature_error: s.majorant.density.as_ref().and_then(|d| d.quadrature_error_estimate()),
        exit: Exit::Success,
    };
    let r = &out.radii;
    println!("majorant  {}", out.majorant);
    println!("kappa     {:.16}", r.kappa);
    println!("nu        {:.16}{}", r.nu, if r.nu_unbounded { "  (f' < 0 up to the scan cap)" } else { "" });
    println!("rho       {:.16}{}", r.rho, if r.rho_noncontiguous { "  (h < 1 again beyond rho)" } else { "" });
    println!("sigma     {:.16}", r.sigma);
    println!("r         {:.16}", r.r);
    println!("optimal   {}", r.rho_is_optimal);
    if let Some(c) = &out.closed_form {
        println!("closed form: nu {:.16}  rho {:.16}  sigma {:.16}", c.nu, c.rho, c.sigma);
    }
    if let Some(h3) = &out.h3 {
        println!(
            "h3 (p = {})  {}",
            model.rate().unwrap_or(f64::NAN),
            if h3.holds { "no sampled violation" } else { "violated" }
        );
    }
    let path = cfg.output(&ctx.out_dir, &cfg.outputs.report_path, "radii.json");
    write_json(&path, &out)?;
    info!("wrote {}", path.display());
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub rows: Vec<TraceRow>,
    pub status: SolveStatus,
    pub csv_path: PathBuf,
    pub exit: Exit,
}

pub fn run_solve(cfg: &ExperimentConfig, ctx: &Context) -> Result<SolveOutput, Failure> {
    let s = setup(cfg)?;
    let p = require_problem(&s)?;
    let model = &s.majorant.model;
    let radii = compute_radii(model, p.kappa(), &cfg.root_options())?;
    let starts = start_points(cfg, p, Some(radii.r))?;
    let [x0] = starts.as_slice() else {
        return Err(Failure::config("solve needs exactly one start point `x0`"));
    };
    let trace = newton_solve(p, x0, &cfg.tolerances.newton())?;
    let scalar = match p.x_star() {
        Some(x_star) => {
            let t0 = (x0 - x_star).norm();
            if t0 > 0.0 && t0 < radii.r {
                Some(scalar_sequence(model, t0, radii.r, &SequenceOptions::default())?)
            } else {
                if t0 > 0.0 {
                    warn!("‖x0 − x*‖ = {t0} is not below r = {}; no majorant sequence", radii.r);
                }
                None
            }
        }
        None => None,
    };
    let rows = rows(&trace, scalar.as_ref(), model.rate());
    let csv_path = cfg.output(&ctx.out_dir, &cfg.outputs.csv_path, "trace.csv");
    let file = File::create(&csv_path).map_err(|e| Failure::file(&csv_path, e))?;
    write_csv(BufWriter::new(file), &rows)?;
    println!("{}: {} after {} iterations", p.name(), trace.status, trace.iterations());
    if let Some(e) = trace.error_norms.as_ref().and_then(|e| e.last()) {
        println!("final error {e:.6e}");
    }
    info!("wrote {}", csv_path.display());
    let exit = if trace.converged() { Exit::Success } else { Exit::Solver };
    Ok(SolveOutput { rows, status: trace.status, csv_path, exit })
}

#[derive(Debug, Clone)]
pub struct CertifyOutput {
    pub report: CertificationReport,
    pub report_path: PathBuf,
    pub exit: Exit,
}

pub fn run_certify(cfg: &ExperimentConfig, ctx: &Context) -> Result<CertifyOutput, Failure> {
    let s = setup(cfg)?;
    let p = require_problem(&s)?;
    require_root(p)?;
    let model = &s.majorant.model;
    let seed = ctx.seed(cfg);
    let opts = CertifyOptions { newton: cfg.tolerances.newton(), seed, ..CertifyOptions::default() };
    let radii = compute_radii(model, p.kappa(), &opts.roots)?;
    let mut starts = start_points(cfg, p, Some(radii.r))?;
    if starts.is_empty() {
        starts = certify::interior_starts(p, radii.r, DEFAULT_CERTIFY_STARTS, seed)?;
    }
    let report = certify::certify(p, model, &starts, &opts)?;
    println!("{} against {}", report.problem, report.majorant);
    println!("r = {:.16}  sigma = {:.16}", report.radii.r, report.radii.sigma);
    for c in [
        &report.hypothesis,
        &report.invertibility,
        &report.linearization,
        &report.envelope,
        &report.contraction,
        &report.uniqueness,
    ] {
        let verdict = if c.ok { "ok" } else { "VIOLATED" };
        println!("{:<20} {verdict:<9} samples {:>6}  worst margin {:+.3e}", c.check, c.samples, c.worst_margin);
    }
    if let Some(o) = &report.order {
        println!(
            "{:<20} {:<9} samples {:>6}  worst margin {:+.3e}",
            o.check,
            if o.ok { "ok" } else { "VIOLATED" },
            o.samples,
            o.worst_margin
        );
    }
    if let Some(t) = report.superlinear_tail {
        println!("superlinear tail     {t:.3e}");
    }
    for v in report.violations.iter().take(10) {
        println!("violation: {} k={:?} lhs={:.6e} rhs={:.6e}", v.check, v.k, v.lhs, v.rhs);
    }
    let report_path = cfg.output(&ctx.out_dir, &cfg.outputs.report_path, "certificate.json");
    write_json(&report_path, &report)?;
    info!("wrote {}", report_path.display());
    let exit = if report.all_ok() { Exit::Success } else { Exit::Violation };
    Ok(CertifyOutput { report, report_path, exit })
}

/// One start point of a radial sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// `‖x0 − x*‖ / r`.
    pub fraction: f64,
    pub x0_norm: f64,
    pub status: SolveStatus,
    /// Converged, with the error shrinking at every step.
    pub converged: bool,
    pub iterations: usize,
    pub final_error: f64,
    /// Envelope and contraction checks; absent outside `r`.
    pub envelope_ok: Option<bool>,
    /// Last `‖x_{k+1} − x*‖/‖x_k − x*‖^{p+1}`, with `p` the majorant rate.
    pub order_tail: Option<f64>,
    /// `q^{[(p+1)^k − 1]/p}·‖x0 − x*‖` at the final `k`.
    pub q_bound: Option<f64>,
    /// Every error below its q-exponent bound.
    pub q_bound_ok: Option<bool>,
    /// `x_2 = x_0 ≠ x_1`: the first two steps form a 2-cycle.
    pub two_cycle: bool,
    #[serde(skip)]
    pub errors: Vec<f64>,
}

/// `q` at `t0`: exact density integrals when available, else `|n_f(t0)|/t0`.
pub fn q_factor(majorant: &ResolvedMajorant, t0: f64) -> Option<f64> {
    let q = match &majorant.density {
        Some(d) => d.q_factor(t0),
        None => majorant.model.newton_map(t0).ok()?.abs() / t0,
    };
    (q.is_finite() && (0.0..1.0).contains(&q)).then_some(q)
}

/// `q^{[(p+1)^k − 1]/p}`, or `q^k` at `p = 0`.
pub fn q_power(q: f64, p: f64, k: usize) -> f64 {
    let e = if p == 0.0 { k as f64 } else { ((p + 1.0).powi(k as i32) - 1.0) / p };
    q.powf(e)
}

fn sweep_row(
    p: &Problem,
    majorant: &ResolvedMajorant,
    r: f64,
    fraction: f64,
    x0: &DVector<f64>,
    cfg: &ExperimentConfig,
) -> Result<SweepRow, Failure> {
    let model = &majorant.model;
    let x_star = require_root(p)?;
    let t0 = (x0 - x_star).norm();
    let trace = newton_solve(p, x0, &cfg.tolerances.newton())?;
    let errors = trace.error_norms.clone().unwrap_or_default();
    let shrinking = errors.windows(2).all(|w| w[1] < w[0] || w[0] == 0.0);

    let envelope_ok = if t0 > 0.0 && t0 < r {
        let scalar: ScalarTrace = scalar_sequence(model, t0, r, &SequenceOptions::default())?;
        let e = check_envelope(model, &trace, &scalar)?;
        Some(e.envelope.ok && e.contraction.ok)
    } else {
        None
    };
    let order_tail = model
        .rate()
        .and_then(|rate| errors.windows(2).rfind(|w| w[0] > 0.0 && w[1] > 0.0).map(|w| w[1] / w[0].powf(rate + 1.0)));
    let (q_bound, q_bound_ok) = match (model.rate(), t0 > 0.0 && t0 < r) {
        (Some(rate), true) => match q_factor(majorant, t0) {
            Some(q) => {
                let ok = errors.iter().enumerate().all(|(k, &e)| {
                    let b = q_power(q, rate, k) * t0;
                    e <= b + slack(b)
                });
                (Some(q_power(q, rate, trace.iterations()) * t0), Some(ok))
            }
            None => (None, None),
        },
        _ => (None, None),
    };
    let gap = 1e-10 * (1.0 + x0.norm());
    let two_cycle =
        trace.iterates.len() >= 3 && (&trace.iterates[2] - x0).norm() <= gap && (&trace.iterates[1] - x0).norm() > gap;
    let converged = trace.converged() && shrinking && !two_cycle;
    debug!("fraction {fraction}: {} in {} iterations", trace.status, trace.iterations());
    Ok(SweepRow {
        fraction,
        x0_norm: t0,
        status: trace.status,
        converged,
        iterations: trace.iterations(),
        final_error: errors.last().copied().unwrap_or(f64::NAN),
        envelope_ok,
        order_tail,
        q_bound,
        q_bound_ok,
        two_cycle,
        errors,
    })
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|n| *n > 0)
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// `ρ` of the majorant, which equals `r` unless `κ` cuts it off.
    pub rho: f64,
    pub r: f64,
    pub csv_path: PathBuf,
    pub plot_path: PathBuf,
    pub exit: Exit,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

fn fmt_flag(v: Option<bool>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

pub fn run_sweep(cfg: &ExperimentConfig, ctx: &Context) -> Result<SweepOutput, Failure> {
    let s = setup(cfg)?;
    let p = require_problem(&s)?;
    let x_star = require_root(p)?;
    let Some(StartSpec::Radial { radial }) = &cfg.x0 else {
        return Err(Failure::config("sweep needs a radial `x0`"));
    };
    let roots = cfg.root_options();
    let radii = compute_radii(&s.majorant.model, p.kappa(), &roots)?;
    let starts = radial_points(radial, cfg.allow_outside, x_star, radii.r)?;
    for (f, x0) in &starts {
        let d = (x0 - x_star).norm();
        if d >= p.kappa() {
            return Err(Failure::config(format!(
                "sweep fraction {f} puts x0 at distance {d}, outside the domain ball κ = {}",
                p.kappa()
            )));
        }
    }

    let job = || -> Result<Vec<SweepRow>, Failure> {
        starts.par_iter().map(|(f, x0)| sweep_row(p, &s.majorant, radii.r, *f, x0, cfg)).collect()
    };
    let mut rows = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::config(format!("thread pool: {e}")))?
            .install(job)?,
        None => job()?,
    };
    rows.sort_by(|a, b| a.x0_norm.total_cmp(&b.x0_norm).then(a.fraction.total_cmp(&b.fraction)));

    let csv_path = cfg.output(&ctx.out_dir, &cfg.outputs.csv_path, "sweep.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(Failure::io)?;
    w.write_record([
        "fraction",
        "x0_norm",
        "status",
        "converged",
        "iterations",
        "final_error",
        "envelope_ok",
        "order_tail",
        "q_bound",
        "q_bound_ok",
        "two_cycle",
    ])
    .map_err(Failure::io)?;
    for row in &rows {
        w.write_record([
            format!("{:.16e}", row.fraction),
            format!("{:.16e}", row.x0_norm),
            row.status.to_string(),
            row.converged.to_string(),
            row.iterations.to_string(),
            format!("{:.16e}", row.final_error),
            fmt_flag(row.envelope_ok),
            fmt_opt(row.order_tail),
            fmt_opt(row.q_bound),
            fmt_flag(row.q_bound_ok),
            row.two_cycle.to_string(),
        ])
        .map_err(Failure::io)?;
    }
    w.flush().map_err(|e| Failure::io(e.into()))?;

    let series: Vec<Series> = rows
        .iter()
        .map(|r| Series { fraction: r.fraction, converged: r.converged, errors: r.errors.clone() })
        .collect();
    let title = format!("{} against {}", p.name(), s.majorant.model.name());
    let plot_path = cfg.output(&ctx.out_dir, &cfg.outputs.plot_path, "sweep.svg");
    std::fs::write(&plot_path, sweep_svg(&title, &series)).map_err(|e| Failure::file(&plot_path, e))?;

    println!(
        "{:>10} {:>12} {:>18} {:>10} {:>6} {:>12} {:>9} {:>6}",
        "fraction", "x0_norm", "status", "converged", "iters", "final_err", "envelope", "cycle"
    );
    for r in &rows {
        println!(
            "{:>10.4} {:>12.6e} {:>18} {:>10} {:>6} {:>12.3e} {:>9} {:>6}",
            r.fraction,
            r.x0_norm,
            r.status.to_string(),
            r.converged,
            r.iterations,
            r.final_error,
            fmt_flag(r.envelope_ok),
            r.two_cycle
        );
    }
    let violated = rows.iter().any(|r| r.envelope_ok == Some(false) || r.q_bound_ok == Some(false));
    if violated {
        warn!("a certified bound failed inside r");
    }
    Ok(SweepOutput {
        rows,
        rho: radii.rho,
        r: radii.r,
        csv_path,
        plot_path,
        exit: if violated { Exit::Violation } else { Exit::Success },
    })
}
