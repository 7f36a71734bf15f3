//! Scalar majorant calculus.
//!
//! A [`MajorantModel`] is a pair `(f, f')` on `[0, R)` with `f(0) = 0`,
//! `f'(0) = -1` and `f'` strictly increasing. From it we derive
//!
//! * `ν`, the end of the interval on which `f' < 0`,
//! * `ρ`, the end of the interval on which the scalar Newton map contracts,
//!   `|n_f(t)| < t`,
//! * `σ`, the end of the interval on which `f < 0` (uniqueness ball),
//! * `r = min(κ, ρ)`, the certified convergence radius,
//!
//! plus the majorant sequence `t_{k+1} = |n_f(t_k)|` that dominates the
//! Newton errors. All radii are located by a uniform grid scan followed by
//! bisection; no derivative of the defining functions is assumed.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};

/// Shared scalar evaluator.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Scalar majorant function `f` with derivative `f'` on `[0, R)`.
///
/// `rate` is the exponent `p` of the optional third hypothesis: the map
/// `t ↦ [f(t)/f'(t) − t]/t^{p+1}` is strictly increasing on `(0, ν)`.
///
/// Near `0`, `t f'(t) − f(t)` is a difference of two numbers close to `−t`.
/// A model that also knows its nonlinear part `φ(t) = f(t) + t` (see
/// [`MajorantModel::with_excess`]) evaluates it as `t φ'(t) − φ(t)` instead.
#[derive(Clone)]
pub struct MajorantModel {
    name: String,
    f: ScalarFn,
    fprime: ScalarFn,
    excess: Option<(ScalarFn, ScalarFn)>,
    domain: f64,
    rate: Option<f64>,
}

impl fmt::Debug for MajorantModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MajorantModel")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("rate", &self.rate)
            .finish_non_exhaustive()
    }
}

impl MajorantModel {
    /// Wraps `f` and `f'` defined on `[0, domain)`. `domain` may be `f64::INFINITY`.
    pub fn new<F, D>(name: impl Into<String>, f: F, fprime: D, domain: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(domain > 0.0) {
            return Err(Error::Domain(format!("majorant domain must be positive, got {domain}")));
        }
        Ok(Self { name: name.into(), f: Arc::new(f), fprime: Arc::new(fprime), excess: None, domain, rate: None })
    }

    /// Supplies `φ(t) = f(t) + t` and `φ'(t) = f'(t) + 1` in a form that
    /// does not cancel for small `t`.
    pub fn with_excess<F, D>(mut self, phi: F, dphi: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.excess = Some((Arc::new(phi), Arc::new(dphi)));
        self
    }

    /// `t f'(t) − f(t)`, which is `e_f(t, 0)` and `f'(t)·n_f(t)`.
    fn defect(&self, t: f64) -> f64 {
        match &self.excess {
            Some((phi, dphi)) => t * dphi(t) - phi(t),
            None => t * self.fprime(t) - self.f(t),
        }
    }

    /// Declares the rate exponent `p ∈ [0, 1]`. Not verified here; see [`MajorantModel::verify_h3`].
    pub fn with_rate(mut self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("rate exponent must lie in [0, 1], got {p}")));
        }
        self.rate = Some(p);
        Ok(self)
    }

    pub fn without_rate(mut self) -> Self {
        self.rate = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The bound `R` of the domain `[0, R)`.
    pub fn domain(&self) -> f64 {
        self.domain
    }

    pub fn rate(&self) -> Option<f64> {
        self.rate
    }

    #[inline]
    pub fn f(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    #[inline]
    pub fn fprime(&self, t: f64) -> f64 {
        (self.fprime)(t)
    }

    /// Scalar Newton map `n_f(t) = t − f(t)/f'(t)`, nonpositive on `(0, ν)`.
    ///
    /// Fails with a domain error when `f'(t) ≥ 0`, which under strict
    /// monotonicity of `f'` is the same as `t ≥ ν`.
    pub fn newton_map(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t < self.domain) {
            return Err(Error::Domain(format!("n_f evaluated at t = {t} outside [0, {})", self.domain)));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let fp = finite(t, self.fprime(t))?;
        if fp >= 0.0 {
            return Err(Error::Domain(format!(
                "n_f undefined at t = {t}: f'(t) = {fp} is not negative (t is at or beyond ν)"
            )));
        }
        let d = finite(t, self.defect(t))?;
        Ok(d / fp)
    }

    /// `h(t) = f(t)/(t f'(t)) − 1 = [f(t)/f'(t) − t]/t`, equal to `|n_f(t)|/t` on `(0, ν)`.
    ///
    /// Returns `+∞` where `f'(t) ≥ 0` and NaN on invalid evaluations.
    pub fn contraction_ratio(&self, t: f64) -> f64 {
        let fp = self.fprime(t);
        if fp >= 0.0 {
            return f64::INFINITY;
        }
        -self.defect(t) / (t * fp)
    }

    /// `[f(t)/f'(t) − t]/t^{p+1}`, the quotient the third hypothesis asks to be increasing.
    pub fn order_quotient(&self, t: f64, p: f64) -> f64 {
        let fp = self.fprime(t);
        if fp >= 0.0 {
            return f64::INFINITY;
        }
        -self.defect(t) / fp / t.powf(p + 1.0)
    }

    /// Linearization error `e_f(t, u) = f(u) − [f(t) + f'(t)(u − t)]`.
    pub fn linearization_error(&self, t: f64, u: f64) -> f64 {
        if u == 0.0 {
            return self.defect(t);
        }
        self.f(u) - (self.f(t) + self.fprime(t) * (u - t))
    }

    /// `f(0) = 0` and `f'(0) = −1`, up to an absolute `1e-12`.
    pub fn verify_h1(&self) -> Result<()> {
        let f0 = self.f(0.0);
        let fp0 = self.fprime(0.0);
        if f0.abs() <= 1e-12 && (fp0 + 1.0).abs() <= 1e-12 {
            Ok(())
        } else {
            Err(Error::Model(format!(
                "{}: h1 requires f(0) = 0 and f'(0) = -1, got f(0) = {f0}, f'(0) = {fp0}",
                self.name
            )))
        }
    }

    /// Sampled strict monotonicity of `f'` (second hypothesis).
    ///
    /// Samples `t = 0` followed by log-spaced points up to `min(R, scan_cap)`.
    /// A tie counts as a violation. An overflowing `f'` ends the sampled range.
    pub fn verify_h2(&self, opts: &RootFindOptions) -> Result<HypothesisCheck> {
        let hi = scan_end(self.domain, opts.scan_cap);
        let lo = 1e-6 * hi.min(1.0);
        let mut check = HypothesisCheck::new("h2", opts.hypothesis_samples);
        let mut prev = finite(0.0, self.fprime(0.0))?;
        for t in log_spaced(lo, hi, opts.hypothesis_samples) {
            let v = self.fprime(t);
            if v.is_nan() {
                return Err(Error::NonFinite { at: t, value: v });
            }
            if v.is_infinite() {
                break;
            }
            check.sampled_up_to = t;
            if !(v > prev) {
                check.fail(t);
                break;
            }
            prev = v;
        }
        Ok(check)
    }

    /// Sampled strict monotonicity of `[f/f' − t]/t^{p+1}` on `(0, ν)` (third hypothesis).
    ///
    /// Samples are log-spaced in `[1e-4 ν, ν(1 − 1e-6)]`; closer to zero the
    /// quotient is dominated by cancellation in `f/f' − t`.
    pub fn verify_h3(&self, nu: f64, p: f64, opts: &RootFindOptions) -> Result<HypothesisCheck> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("rate exponent must lie in [0, 1], got {p}")));
        }
        if !(nu > 0.0) {
            return Err(Error::Domain(format!("ν must be positive, got {nu}")));
        }
        let mut check = HypothesisCheck::new("h3", opts.hypothesis_samples);
        let mut prev = f64::NEG_INFINITY;
        for t in log_spaced(1e-4 * nu, nu * (1.0 - 1e-6), opts.hypothesis_samples) {
            let v = self.order_quotient(t, p);
            if v.is_nan() {
                return Err(Error::NonFinite { at: t, value: v });
            }
            if v.is_infinite() {
                break;
            }
            check.sampled_up_to = t;
            if !(v > prev) {
                check.fail(t);
                break;
            }
            prev = v;
        }
        Ok(check)
    }
}

/// Outcome of a sampled hypothesis check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub hypothesis: String,
    pub holds: bool,
    pub samples: usize,
    /// Largest sample reached before the range ended.
    pub sampled_up_to: f64,
    /// First sample at which the monotonicity failed.
    pub first_violation: Option<f64>,
}

impl HypothesisCheck {
    fn new(hypothesis: &str, samples: usize) -> Self {
        Self { hypothesis: hypothesis.to_string(), holds: true, samples, sampled_up_to: 0.0, first_violation: None }
    }

    fn fail(&mut self, t: f64) {
        self.holds = false;
        self.first_violation = Some(t);
    }
}

/// Tolerances for the radius root-finders and the hypothesis sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RootFindOptions {
    /// Uniform grid points used to bracket the first crossing.
    pub grid_points: usize,
    /// Final bisection bracket width.
    pub atol: f64,
    pub max_bisections: usize,
    /// Replacement for `R = +∞` when scanning.
    pub scan_cap: f64,
    pub hypothesis_samples: usize,
    /// `|h(ρ) − 1|` below which `ρ` is reported as an exact crossing.
    pub optimality_tol: f64,
}

impl Default for RootFindOptions {
    fn default() -> Self {
        Self {
            grid_points: 4096,
            atol: 1e-12,
            max_bisections: 200,
            scan_cap: 1e8,
            hypothesis_samples: 512,
            optimality_tol: 1e-8,
        }
    }
}

/// Certified constants of a majorant model on a ball of radius `κ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiiReport {
    pub kappa: f64,
    pub nu: f64,
    pub rho: f64,
    pub sigma: f64,
    pub r: f64,
    /// `ρ < κ` and `h(ρ) = 1`: no larger radius works for every majorized problem.
    pub rho_is_optimal: bool,
    /// `R = +∞` and `f'` stayed negative up to the scan cap.
    pub nu_unbounded: bool,
    /// `h` dropped back below 1 somewhere in `(ρ, ν)`.
    pub rho_noncontiguous: bool,
    pub tolerances: RootFindOptions,
}

impl RadiiReport {
    pub(crate) fn assemble(kappa: f64, nu: f64, rho: f64, sigma: f64, optimal: bool, opts: &RootFindOptions) -> Self {
        Self {
            kappa,
            nu,
            rho,
            sigma,
            r: kappa.min(rho),
            rho_is_optimal: optimal,
            nu_unbounded: false,
            rho_noncontiguous: false,
            tolerances: *opts,
        }
    }
}

fn scan_end(domain: f64, cap: f64) -> f64 {
    if domain <= cap {
        domain * (1.0 - 1e-12)
    } else {
        cap
    }
}

/// `n` points log-spaced in `[lo, hi]`, endpoints included.
pub(crate) fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![hi],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

/// Bisection on a bracket where `fails(lo)` is false and `fails(hi)` is true,
/// down to width `atol·min(1, hi)`.
/// Returns the `lo` end, where the defining inequality still holds.
fn bisect<P>(mut lo: f64, mut hi: f64, mut fails: P, opts: &RootFindOptions) -> Result<f64>
where
    P: FnMut(f64) -> Result<bool>,
{
    let mut steps = 0;
    while hi - lo > opts.atol * hi.min(1.0) && steps < opts.max_bisections {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if fails(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }
    Ok(lo)
}

fn nan_guard(t: f64, v: f64) -> Result<f64> {
    if v.is_nan() {
        Err(Error::NonFinite { at: t, value: v })
    } else {
        Ok(v)
    }
}

/// `ν = sup{t ∈ [0, R) : f'(t) < 0}`.
///
/// Returns the zero of `f'` if one exists, else `R` (or the scan cap when `R = +∞`).
pub fn compute_nu(model: &MajorantModel, opts: &RootFindOptions) -> Result<f64> {
    let fp0 = finite(0.0, model.fprime(0.0))?;
    if fp0 >= 0.0 {
        return Err(Error::Model(format!("{}: f'(0) = {fp0} is not negative", model.name())));
    }
    let end = scan_end(model.domain(), opts.scan_cap);
    let n = opts.grid_points.max(1);
    let fails = |t: f64| nan_guard(t, model.fprime(t)).map(|v| v >= 0.0);
    let mut prev = 0.0;
    for i in 1..=n {
        let t = end * i as f64 / n as f64;
        if fails(t)? {
            return bisect(prev, t, fails, opts);
        }
        prev = t;
    }
    Ok(model.domain().min(opts.scan_cap))
}

struct RhoScan {
    rho: f64,
    noncontiguous: bool,
}

fn scan_rho(model: &MajorantModel, nu: f64, opts: &RootFindOptions) -> Result<RhoScan> {
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("ν must be positive, got {nu}")));
    }
    let n = opts.grid_points.max(2);
    let fails = |t: f64| nan_guard(t, model.contraction_ratio(t)).map(|h| h >= 1.0);
    let grid = |i: usize| nu * i as f64 / n as f64;

    let mut prev = 0.0;
    let mut bracket = None;
    for i in 1..n {
        let t = grid(i);
        if fails(t)? {
            bracket = Some((prev, t, i + 1));
            break;
        }
        prev = t;
    }
    if bracket.is_none() && fails(nu)? {
        bracket = Some((prev, nu, n));
    }
    let Some((lo, hi, resume)) = bracket else {
        return Ok(RhoScan { rho: nu, noncontiguous: false });
    };
    let rho = bisect(lo, hi, fails, opts)?;
    let mut noncontiguous = false;
    for i in resume..n {
        if !fails(grid(i))? {
            noncontiguous = true;
            break;
        }
    }
    Ok(RhoScan { rho, noncontiguous })
}

/// `ρ`: first crossing of `h(t) = 1` in `(0, ν)`, or `ν` when `h < 1` throughout.
pub fn compute_rho(model: &MajorantModel, nu: f64, opts: &RootFindOptions) -> Result<f64> {
    scan_rho(model, nu, opts).map(|s| s.rho)
}

/// `σ = sup{t ∈ (0, κ) : f(t) < 0}`: smallest positive zero of `f` below `κ`, else `κ`.
pub fn compute_sigma(model: &MajorantModel, kappa: f64, opts: &RootFindOptions) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("κ must be positive, got {kappa}")));
    }
    let limit = kappa.min(opts.scan_cap);
    let end = if model.domain() <= limit { model.domain() * (1.0 - 1e-12) } else { limit };
    let n = opts.grid_points.max(1);
    let fails = |t: f64| nan_guard(t, model.f(t)).map(|v| v >= 0.0);
    let mut prev = 0.0;
    for i in 1..=n {
        let t = end * i as f64 / n as f64;
        if fails(t)? {
            return bisect(prev, t, fails, opts);
        }
        prev = t;
    }
    Ok(limit.min(model.domain()))
}

/// Verifies h1/h2 by sampling and computes `ν, ρ, σ, r` and the optimality flag.
pub fn compute_radii(model: &MajorantModel, kappa: f64, opts: &RootFindOptions) -> Result<RadiiReport> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("κ must be positive, got {kappa}")));
    }
    model.verify_h1()?;
    let h2 = model.verify_h2(opts)?;
    if !h2.holds {
        return Err(Error::Model(format!(
            "{}: f' is not strictly increasing (sampled violation at t = {})",
            model.name(),
            h2.first_violation.unwrap_or(f64::NAN)
        )));
    }
    let nu = compute_nu(model, opts)?;
    let scan = scan_rho(model, nu, opts)?;
    let sigma = compute_sigma(model, kappa, opts)?;
    let optimal = scan.rho < kappa && (model.contraction_ratio(scan.rho) - 1.0).abs() <= opts.optimality_tol;
    let mut report = RadiiReport::assemble(kappa, nu, scan.rho, sigma, optimal, opts);
    report.nu_unbounded = model.domain() > opts.scan_cap && nu >= opts.scan_cap;
    report.rho_noncontiguous = scan.noncontiguous;
    Ok(report)
}

/// Majorant sequence `t_{k+1} = |n_f(t_k)|` with its rate diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarTrace {
    pub t: Vec<f64>,
    /// `t_{k+1}/t_k`.
    pub ratio_linear: Vec<f64>,
    /// `t_{k+1}/t_k^{p+1}`, present iff the model declares `p`.
    pub ratio_order: Option<Vec<f64>>,
    pub p: Option<f64>,
}

impl ScalarTrace {
    fn from_terms(t: Vec<f64>, p: Option<f64>) -> Self {
        let ratio_linear = t.windows(2).map(|w| w[1] / w[0]).collect();
        let ratio_order = p.map(|p| t.windows(2).map(|w| w[1] / w[0].powf(p + 1.0)).collect());
        Self { t, ratio_linear, ratio_order, p }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.t.windows(2).all(|w| w[1] < w[0])
    }

    /// `None` without a rate exponent.
    pub fn order_ratio_strictly_decreasing(&self) -> Option<bool> {
        self.ratio_order.as_ref().map(|r| r.windows(2).all(|w| w[1] < w[0]))
    }
}

/// Stopping rule for [`scalar_sequence`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SequenceOptions {
    pub max_iters: usize,
    pub atol: f64,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        Self { max_iters: 100, atol: 1e-14 }
    }
}

/// Iterates `t_{k+1} = |n_f(t_k)|` from `t0 ∈ (0, radius)` until `t_k < atol` or `max_iters`.
///
/// An exact zero ends the sequence without being recorded. Any term that fails
/// to decrease or leaves `(0, radius)` is an iteration error.
pub fn scalar_sequence(model: &MajorantModel, t0: f64, radius: f64, opts: &SequenceOptions) -> Result<ScalarTrace> {
    if !(t0 > 0.0 && t0 < radius) {
        return Err(Error::Domain(format!("t0 = {t0} must lie in (0, {radius})")));
    }
    let mut t = vec![t0];
    while t.len() <= opts.max_iters {
        let last = t[t.len() - 1];
        if last < opts.atol {
            break;
        }
        let next = model.newton_map(last)?.abs();
        if next == 0.0 {
            break;
        }
        if !(next < last && next < radius) {
            return Err(Error::Iteration { k: t.len(), t: next, radius });
        }
        t.push(next);
    }
    Ok(ScalarTrace::from_terms(t, model.rate()))
}

/// A-priori error bound `t0 (t1/t0)^{[(p+1)^k − 1]/p}`, geometric `t0 (t1/t0)^k` at `p = 0`.
pub fn a_priori_bound(t0: f64, t1: f64, p: f64, k: u32) -> Result<f64> {
    if !(t0 > 0.0 && t1 > 0.0 && t1 < t0) {
        return Err(Error::Domain(format!("need 0 < t1 < t0, got t0 = {t0}, t1 = {t1}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("rate exponent must lie in [0, 1], got {p}")));
    }
    let q = t1 / t0;
    let exponent = if p == 0.0 { f64::from(k) } else { ((p + 1.0).powi(k as i32) - 1.0) / p };
    Ok(t0 * q.powf(exponent))
}
