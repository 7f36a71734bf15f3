//! Runtime checks of the majorant bounds against actual Newton runs.
//!
//! Every inequality `lhs ≤ rhs` is accepted with additive slack
//! `1e-10·(1 + |rhs|)`. All checks are sampled: a clean report means no
//! sampled violation, not a proof.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{operator_norm, PivotedLu};
use crate::newton::{newton_solve, worst_case_instance, NewtonOptions, NewtonTrace, Problem, SolveStatus};
use crate::scalar::{
    compute_radii, log_spaced, scalar_sequence, MajorantModel, RadiiReport, RootFindOptions, ScalarTrace,
    SequenceOptions,
};

pub const INEQUALITY_SLACK: f64 = 1e-10;
pub const EQUALITY_TOL: f64 = 1e-12;
/// Final `‖x_{k+1} − x*‖/‖x_k − x*‖` must fall below this.
pub const TAIL_THRESHOLD: f64 = 0.1;
/// A converged probe limit farther than this from `x*` is a second zero.
pub const UNIQUENESS_TOL: f64 = 1e-8;
pub const RESIDUAL_FLOOR: f64 = 1e-12;

pub fn slack(rhs: f64) -> f64 {
    INEQUALITY_SLACK * (1.0 + rhs.abs())
}

/// One failed comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    /// Iteration index, for trace-based checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Sample point, for sampled checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Conjunction of per-sample comparisons `lhs ≤ rhs + slack`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub ok: bool,
    pub samples: usize,
    /// `min(rhs − lhs)`; `+∞` with no samples.
    pub worst_margin: f64,
    /// `max |rhs − lhs|`; zero up to roundoff in equality cases.
    pub max_gap: f64,
    pub violations: Vec<Violation>,
}

impl CheckResult {
    pub fn new(check: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            ok: true,
            samples: 0,
            worst_margin: f64::INFINITY,
            max_gap: 0.0,
            violations: Vec::new(),
        }
    }

    /// Records `lhs ≤ rhs`; returns whether it held.
    pub fn compare(&mut self, lhs: f64, rhs: f64, site: impl FnOnce(&mut Violation)) -> bool {
        self.samples += 1;
        let margin = rhs - lhs;
        self.worst_margin = self.worst_margin.min(margin);
        self.max_gap = self.max_gap.max(margin.abs());
        let held = margin >= -slack(rhs);
        if !held {
            self.ok = false;
            let mut v = Violation { check: self.check.clone(), k: None, point: None, tau: None, lhs, rhs };
            site(&mut v);
            self.violations.push(v);
        }
        held
    }

    /// Marks a failure that is not an inequality (e.g. a domain exit).
    pub fn fail(&mut self, violation: Violation) {
        self.ok = false;
        self.violations.push(violation);
    }

    pub fn merge(&mut self, other: CheckResult) {
        self.ok &= other.ok;
        self.samples += other.samples;
        self.worst_margin = self.worst_margin.min(other.worst_margin);
        self.max_gap = self.max_gap.max(other.max_gap);
        self.violations.extend(other.violations);
    }

    /// Holds with `|rhs − lhs| ≤ tol` at every sample.
    pub fn is_equality(&self, tol: f64) -> bool {
        self.ok && self.samples > 0 && self.max_gap <= tol
    }
}

fn inverse_at_root(problem: &Problem) -> Result<(DVector<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let x_star =
        problem.x_star().cloned().ok_or_else(|| Error::Precondition(format!("{}: root is unknown", problem.name())))?;
    let j_star = problem.jacobian_at(&x_star);
    let lu = PivotedLu::factor(&j_star).ok_or_else(|| Error::Precondition("F'(x*) is singular".into()))?;
    Ok((x_star, j_star, lu.inverse()))
}

/// Sampling plan for the majorant hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HypothesisSampling {
    /// Radii log-spaced in `[1e-3 κ, κ)`.
    pub radii: usize,
    /// `τ` evenly spaced in `[0, 1]`.
    pub taus: usize,
    /// Gaussian directions in addition to `±e_i`.
    pub random_directions: usize,
    pub seed: u64,
}

impl Default for HypothesisSampling {
    fn default() -> Self {
        Self { radii: 48, taus: 17, random_directions: 16, seed: 0 }
    }
}

fn unit_directions(dim: usize, extra: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let mut dirs = Vec::with_capacity(2 * dim + extra);
    for i in 0..dim {
        let mut e = DVector::zeros(dim);
        e[i] = 1.0;
        dirs.push(e.clone());
        dirs.push(-e);
    }
    if dim > 1 {
        dirs.extend((0..extra).map(|_| random_unit(dim, rng)));
    }
    dirs
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Samples `‖F'(x*)⁻¹[F'(x) − F'(x* + τ(x − x*))]‖ ≤ f'(‖x − x*‖) − f'(τ‖x − x*‖)`
/// over `x` in the ball of radius `κ` and `τ ∈ [0, 1]`.
pub fn check_majorant_hypothesis(
    problem: &Problem,
    model: &MajorantModel,
    sampling: &HypothesisSampling,
) -> Result<CheckResult> {
    let (x_star, _, j_inv) = inverse_at_root(problem)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let dirs = unit_directions(problem.dim(), sampling.random_directions, &mut rng);
    let reach = problem.kappa().min(model.domain()) * (1.0 - 1e-9);
    let taus: Vec<f64> = match sampling.taus {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    };
    let mut result = CheckResult::new("majorant_hypothesis");
    for t in log_spaced(reach * 1e-3, reach, sampling.radii) {
        for d in &dirs {
            let x = &x_star + d * t;
            let jx = problem.jacobian_at(&x);
            for &tau in &taus {
                let inner = &x_star + d * (tau * t);
                let lhs = operator_norm(&(&j_inv * (&jx - problem.jacobian_at(&inner))))?;
                let rhs = model.fprime(t) - model.fprime(tau * t);
                result.compare(lhs, rhs, |v| {
                    v.point = Some(x.as_slice().to_vec());
                    v.tau = Some(tau);
                });
            }
        }
    }
    Ok(result)
}

fn ensure_inside(problem: &Problem, model: &MajorantModel, nu: f64, trace: &NewtonTrace) -> Result<()> {
    let limit = problem.kappa().min(nu).min(model.domain());
    let errs = trace_errors(trace)?;
    if let Some((k, e)) = errs.iter().enumerate().find(|(_, e)| **e >= limit) {
        return Err(Error::Domain(format!("iterate {k} lies at distance {e} from x*, outside min(κ, ν) = {limit}")));
    }
    Ok(())
}

fn trace_errors(trace: &NewtonTrace) -> Result<&[f64]> {
    trace.error_norms.as_deref().ok_or_else(|| Error::Precondition("trace has no error norms; root is unknown".into()))
}

/// `‖F'(x_k)⁻¹F'(x*)‖ ≤ 1/|f'(‖x_k − x*‖)|` at every iterate.
pub fn check_invertibility_bound(
    problem: &Problem,
    model: &MajorantModel,
    nu: f64,
    trace: &NewtonTrace,
) -> Result<CheckResult> {
    let (_, j_star, _) = inverse_at_root(problem)?;
    ensure_inside(problem, model, nu, trace)?;
    let errs = trace_errors(trace)?;
    let mut result = CheckResult::new("invertibility");
    for (k, (x, &e)) in trace.iterates.iter().zip(errs).enumerate() {
        let rhs = 1.0 / model.fprime(e).abs();
        let lhs = match PivotedLu::factor(&problem.jacobian_at(x)) {
            Some(lu) => operator_norm(&lu.solve_matrix(&j_star))?,
            None => f64::INFINITY,
        };
        result.compare(lhs, rhs, |v| v.k = Some(k));
    }
    Ok(result)
}

/// `‖F'(x*)⁻¹E_F(x_k, x*)‖ ≤ e_f(‖x_k − x*‖, 0)` with
/// `E_F(x, y) = F(y) − [F(x) + F'(x)(y − x)]`.
pub fn check_linearization_bound(problem: &Problem, model: &MajorantModel, trace: &NewtonTrace) -> Result<CheckResult> {
    let (x_star, _, j_inv) = inverse_at_root(problem)?;
    let errs = trace_errors(trace)?;
    let f_star = problem.residual(&x_star);
    let mut result = CheckResult::new("linearization");
    for (k, (x, &e)) in trace.iterates.iter().zip(errs).enumerate() {
        if e >= problem.kappa() {
            return Err(Error::Domain(format!("iterate {k} lies outside the domain ball")));
        }
        let lin = &f_star - (problem.residual(x) + problem.jacobian_at(x) * (&x_star - x));
        let lhs = (&j_inv * lin).norm();
        let rhs = model.linearization_error(e, 0.0);
        result.compare(lhs, rhs, |v| v.k = Some(k));
    }
    Ok(result)
}

/// Envelope `‖x_k − x*‖ ≤ t_k` and pointwise contraction
/// `‖x_{k+1} − x*‖ ≤ |n_f(‖x_k − x*‖)|`, on the common prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub envelope: CheckResult,
    pub contraction: CheckResult,
}

pub fn check_envelope(model: &MajorantModel, trace: &NewtonTrace, scalar: &ScalarTrace) -> Result<EnvelopeCheck> {
    let errs = trace_errors(trace)?;
    let mut envelope = CheckResult::new("envelope");
    for (k, (&e, &t)) in errs.iter().zip(&scalar.t).enumerate() {
        envelope.compare(e, t, |v| v.k = Some(k));
    }
    let mut contraction = CheckResult::new("contraction");
    for (k, w) in errs.windows(2).enumerate() {
        let rhs = model.newton_map(w[0])?.abs();
        contraction.compare(w[1], rhs, |v| v.k = Some(k + 1));
    }
    Ok(EnvelopeCheck { envelope, contraction })
}

/// `r[k] = a[k+1]/a[k]^{exponent}` over consecutive positive terms.
pub fn order_ratios(terms: &[f64], exponent: f64) -> Vec<f64> {
    terms.windows(2).take_while(|w| w[0] > 0.0 && w[1] > 0.0).map(|w| w[1] / w[0].powf(exponent)).collect()
}

/// Superlinear tail and, with an exponent, the order-`(p+1)` bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// `‖x_{k+1} − x*‖/‖x_k − x*‖` while both are positive.
    pub linear_ratios: Vec<f64>,
    pub tail_ratio: f64,
    pub tail_ok: bool,
    /// `‖x_{k+1} − x*‖ ≤ (t_{k+1}/t_k^{p+1})‖x_k − x*‖^{p+1}`.
    pub order: Option<CheckResult>,
    /// `t_{k+1}/t_k^{p+1}` strictly decreasing.
    pub order_ratio_decreasing: Option<bool>,
}

impl RateReport {
    pub fn ok(&self) -> bool {
        self.tail_ok && self.order.as_ref().is_none_or(|o| o.ok) && self.order_ratio_decreasing.unwrap_or(true)
    }
}

/// Needs at least three positive error ratios.
pub fn check_rates(trace: &NewtonTrace, scalar: &ScalarTrace, p: Option<f64>) -> Result<RateReport> {
    let errs = trace_errors(trace)?;
    let mut linear_ratios = Vec::new();
    for w in errs.windows(2) {
        if w[0] <= 0.0 {
            break;
        }
        linear_ratios.push(w[1] / w[0]);
    }
    if linear_ratios.len() < 3 {
        return Err(Error::InsufficientIterations { needed: 3, available: linear_ratios.len() });
    }
    let tail_ratio = linear_ratios[linear_ratios.len() - 1];
    let (order, order_ratio_decreasing) = match p {
        Some(p) => {
            let mut check = CheckResult::new("order");
            let n = errs.len().min(scalar.t.len());
            for k in 0..n.saturating_sub(1) {
                let (tk, tk1) = (scalar.t[k], scalar.t[k + 1]);
                let rhs = tk1 / tk.powf(p + 1.0) * errs[k].powf(p + 1.0);
                check.compare(errs[k + 1], rhs, |v| v.k = Some(k + 1));
            }
            let ratios = order_ratios(&scalar.t, p + 1.0);
            (Some(check), Some(ratios.windows(2).all(|w| w[1] < w[0])))
        }
        None => (None, None),
    };
    Ok(RateReport { linear_ratios, tail_ratio, tail_ok: tail_ratio < TAIL_THRESHOLD, order, order_ratio_decreasing })
}

/// Random Newton probes and residual samples inside the open `σ`-ball.
///
/// A probe converging to a point inside the ball but farther than
/// [`UNIQUENESS_TOL`] from `x*`, or a sample with `‖F(y)‖ ≤` [`RESIDUAL_FLOOR`],
/// counts as a violation.
pub fn check_uniqueness(
    problem: &Problem,
    sigma: f64,
    probes: usize,
    seed: u64,
    newton: &NewtonOptions,
) -> Result<CheckResult> {
    let (x_star, _, _) = inverse_at_root(problem)?;
    if !(sigma > 0.0 && sigma <= problem.kappa()) {
        return Err(Error::Domain(format!("σ = {sigma} must lie in (0, κ]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut result = CheckResult::new("uniqueness");
    for _ in 0..probes {
        let radius = sigma * rng.random_range(1e-3..1.0);
        let x0 = &x_star + random_unit(problem.dim(), &mut rng) * radius;
        let trace = newton_solve(problem, &x0, newton)?;
        if trace.status == SolveStatus::Converged {
            let dist = (trace.last() - &x_star).norm();
            if dist < sigma {
                result.compare(dist, UNIQUENESS_TOL, |v| v.point = Some(trace.last().as_slice().to_vec()));
            }
        }
        let y = &x_star + random_unit(problem.dim(), &mut rng) * (sigma * rng.random_range(1e-3..1.0));
        let res = problem.residual(&y).norm();
        // ‖F(y)‖ > floor, phrased as −‖F(y)‖ ≤ −floor
        result.compare(-res, -RESIDUAL_FLOOR, |v| v.point = Some(y.as_slice().to_vec()));
    }
    Ok(result)
}

/// Behaviour of the odd-extension instance at and inside `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityWitness {
    pub rho: f64,
    /// `|x_1 + x_0|` from `x_0 = ρ`.
    pub first_step_gap: f64,
    /// `|x_2 − x_0|` from `x_0 = ρ`.
    pub two_cycle_gap: f64,
    /// Iteration from `ρ(1 + 1e-6)` converged within `probe_iters` steps.
    pub converged_beyond_rho: bool,
    pub probe_iters: usize,
    /// Iteration from `0.99ρ` converged.
    pub converged_inside: bool,
    pub inside_iterations: usize,
    pub ok: bool,
}

/// The cycle at `ρ` is repelling, so a binary64 orbit started exactly at `ρ`
/// drifts off it after a few dozen steps; the witness therefore checks the
/// cycle identity for two steps and non-convergence just outside `ρ`.
pub fn check_optimality_witness(model: &MajorantModel, opts: &RootFindOptions) -> Result<OptimalityWitness> {
    let wc = worst_case_instance(model, opts)?;
    let rho = wc.rho;
    let v = |x: f64| DVector::from_element(1, x);
    let two = newton_solve(&wc.problem, &v(rho), &NewtonOptions { max_iters: 2, ..Default::default() })?;
    let x1 = two.iterates.get(1).map_or(f64::NAN, |x| x[0]);
    let x2 = two.iterates.get(2).map_or(f64::NAN, |x| x[0]);
    let first_step_gap = (x1 + rho).abs();
    let two_cycle_gap = (x2 - rho).abs();
    let probe_iters = 50;
    let beyond_start = (rho * (1.0 + 1e-6)).min(wc.nu * (1.0 - 1e-12));
    let beyond =
        newton_solve(&wc.problem, &v(beyond_start), &NewtonOptions { max_iters: probe_iters, ..Default::default() })?;
    let inside = newton_solve(&wc.problem, &v(0.99 * rho), &NewtonOptions { max_iters: 60, ..Default::default() })?;
    let converged_inside = inside.converged() && inside.last()[0].abs() <= 1e-12;
    let ok = two_cycle_gap <= 1e-10 && first_step_gap <= 1e-10 && !beyond.converged() && converged_inside;
    Ok(OptimalityWitness {
        rho,
        first_step_gap,
        two_cycle_gap,
        converged_beyond_rho: beyond.converged(),
        probe_iters,
        converged_inside,
        inside_iterations: inside.iterations(),
        ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyOptions {
    pub newton: NewtonOptions,
    pub sequence: SequenceOptions,
    pub roots: RootFindOptions,
    pub hypothesis: HypothesisSampling,
    pub uniqueness_probes: usize,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            sequence: SequenceOptions::default(),
            roots: RootFindOptions::default(),
            hypothesis: HypothesisSampling::default(),
            uniqueness_probes: 32,
            seed: 0,
        }
    }
}

/// Checks on one Newton run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunCertificate {
    pub x0: Vec<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub final_error: f64,
    pub scalar: ScalarTrace,
    pub invertibility: CheckResult,
    pub linearization: CheckResult,
    pub envelope: CheckResult,
    pub contraction: CheckResult,
    /// Absent when the run stopped before three positive error ratios.
    pub rates: Option<RateReport>,
}

impl RunCertificate {
    pub fn ok(&self) -> bool {
        self.status == SolveStatus::Converged
            && self.invertibility.ok
            && self.linearization.ok
            && self.envelope.ok
            && self.contraction.ok
            && self.rates.as_ref().is_none_or(RateReport::ok)
    }
}

/// Aggregated result for a (problem, majorant) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub problem: String,
    pub majorant: String,
    pub radii: RadiiReport,
    pub hypothesis: CheckResult,
    pub invertibility: CheckResult,
    pub linearization: CheckResult,
    pub envelope: CheckResult,
    pub contraction: CheckResult,
    /// `None` when the majorant declares no rate exponent.
    pub order: Option<CheckResult>,
    pub order_ratio_decreasing: Option<bool>,
    /// Smallest final linear ratio over runs with a rate report.
    pub superlinear_tail: Option<f64>,
    pub tail_ok: bool,
    pub uniqueness: CheckResult,
    pub runs: Vec<RunCertificate>,
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

impl CertificationReport {
    pub fn all_ok(&self) -> bool {
        self.violations.is_empty()
            && self.hypothesis.ok
            && self.invertibility.ok
            && self.linearization.ok
            && self.envelope.ok
            && self.contraction.ok
            && self.order.as_ref().is_none_or(|o| o.ok)
            && self.order_ratio_decreasing.unwrap_or(true)
            && self.tail_ok
            && self.uniqueness.ok
            && self.runs.iter().all(RunCertificate::ok)
    }
}

/// Certifies one Newton run from `x0`, which must satisfy `‖x0 − x*‖ < r`.
pub fn certify_run(
    problem: &Problem,
    model: &MajorantModel,
    radii: &RadiiReport,
    x0: &DVector<f64>,
    opts: &CertifyOptions,
) -> Result<RunCertificate> {
    let x_star = problem.x_star().ok_or_else(|| Error::Precondition(format!("{}: root is unknown", problem.name())))?;
    let t0 = (x0 - x_star).norm();
    if !(t0 < radii.r) {
        return Err(Error::Precondition(format!(
            "‖x0 − x*‖ = {t0} is not inside the convergence radius r = {}",
            radii.r
        )));
    }
    let trace = newton_solve(problem, x0, &opts.newton)?;
    let errs = trace_errors(&trace)?.to_vec();
    let scalar = if t0 == 0.0 {
        ScalarTrace {
            t: vec![0.0],
            ratio_linear: Vec::new(),
            ratio_order: model.rate().map(|_| Vec::new()),
            p: model.rate(),
        }
    } else {
        scalar_sequence(model, t0, radii.r, &opts.sequence)?
    };

    let limit = problem.kappa().min(radii.nu).min(model.domain());
    let inside = errs.iter().take_while(|e| **e < limit).count();
    let mut prefix = trace.clone();
    prefix.iterates.truncate(inside);
    if let Some(e) = prefix.error_norms.as_mut() {
        e.truncate(inside);
    }

    let mut invertibility = check_invertibility_bound(problem, model, radii.nu, &prefix)?;
    let mut linearization = check_linearization_bound(problem, model, &prefix)?;
    if inside < errs.len() {
        let escape = Violation {
            check: "domain".into(),
            k: Some(inside),
            point: Some(trace.iterates[inside].as_slice().to_vec()),
            tau: None,
            lhs: errs[inside],
            rhs: limit,
        };
        invertibility.fail(escape.clone());
        linearization.fail(escape);
    }
    let EnvelopeCheck { envelope, contraction } = check_envelope(model, &trace, &scalar)?;
    let rates = match check_rates(&trace, &scalar, model.rate()) {
        Ok(r) => Some(r),
        Err(Error::InsufficientIterations { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(RunCertificate {
        x0: x0.as_slice().to_vec(),
        status: trace.status,
        iterations: trace.iterations(),
        final_error: errs[errs.len() - 1],
        scalar,
        invertibility,
        linearization,
        envelope,
        contraction,
        rates,
    })
}

/// Runs every check for `problem` against `model` from each start point.
pub fn certify(
    problem: &Problem,
    model: &MajorantModel,
    starts: &[DVector<f64>],
    opts: &CertifyOptions,
) -> Result<CertificationReport> {
    inverse_at_root(problem)?;
    let radii = compute_radii(model, problem.kappa(), &opts.roots)?;
    let hypothesis =
        check_majorant_hypothesis(problem, model, &HypothesisSampling { seed: opts.seed, ..opts.hypothesis })?;
    let uniqueness = check_uniqueness(problem, radii.sigma, opts.uniqueness_probes, opts.seed, &opts.newton)?;

    let mut invertibility = CheckResult::new("invertibility");
    let mut linearization = CheckResult::new("linearization");
    let mut envelope = CheckResult::new("envelope");
    let mut contraction = CheckResult::new("contraction");
    let mut order = model.rate().map(|_| CheckResult::new("order"));
    let mut order_ratio_decreasing = model.rate().map(|_| true);
    let mut tail: Option<f64> = None;
    let mut tail_ok = true;
    let mut violations = hypothesis.violations.clone();
    let mut runs = Vec::with_capacity(starts.len());

    for x0 in starts {
        let run = certify_run(problem, model, &radii, x0, opts)?;
        invertibility.merge(run.invertibility.clone());
        linearization.merge(run.linearization.clone());
        envelope.merge(run.envelope.clone());
        contraction.merge(run.contraction.clone());
        if let Some(rates) = &run.rates {
            tail = Some(tail.map_or(rates.tail_ratio, |t: f64| t.max(rates.tail_ratio)));
            tail_ok &= rates.tail_ok;
            if let (Some(total), Some(o)) = (order.as_mut(), rates.order.clone()) {
                total.merge(o);
            }
            if let (Some(all), Some(d)) = (order_ratio_decreasing.as_mut(), rates.order_ratio_decreasing) {
                *all &= d;
            }
        }
        if run.status != SolveStatus::Converged {
            violations.push(Violation {
                check: format!("convergence ({})", run.status),
                k: Some(run.iterations),
                point: Some(run.x0.clone()),
                tau: None,
                lhs: run.final_error,
                rhs: 0.0,
            });
        }
        runs.push(run);
    }
    for c in [&invertibility, &linearization, &envelope, &contraction, &uniqueness] {
        violations.extend(c.violations.iter().cloned());
    }
    if let Some(o) = &order {
        violations.extend(o.violations.iter().cloned());
    }
    let notes = vec![
        format!("inequalities accepted with slack {INEQUALITY_SLACK:e}·(1 + |rhs|)"),
        "majorant hypothesis and uniqueness are sampled; a clean result means no sampled violation".into(),
        format!("superlinear tail judged by final error ratio < {TAIL_THRESHOLD}"),
    ];
    Ok(CertificationReport {
        problem: problem.name().to_string(),
        majorant: model.name().to_string(),
        radii,
        hypothesis,
        invertibility,
        linearization,
        envelope,
        contraction,
        order,
        order_ratio_decreasing,
        superlinear_tail: tail,
        tail_ok,
        uniqueness,
        runs,
        violations,
        notes,
    })
}

/// `count` points at distance `frac·r` from `x*`, fractions evenly spaced in
/// `[0.05, 0.95]`, directions alternating `±e_i` then seeded random.
pub fn interior_starts(problem: &Problem, r: f64, count: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
    let x_star = problem.x_star().ok_or_else(|| Error::Precondition(format!("{}: root is unknown", problem.name())))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = problem.dim();
    let axes = unit_directions(dim, 0, &mut rng);
    Ok((0..count)
        .map(|i| {
            let frac = if count == 1 { 0.5 } else { 0.05 + 0.9 * i as f64 / (count - 1) as f64 };
            let d = if i < axes.len() { axes[i].clone() } else { random_unit(dim, &mut rng) };
            x_star + d * (frac * r)
        })
        .collect())
}
