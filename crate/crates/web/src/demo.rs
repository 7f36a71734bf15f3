//! The computations behind each panel, independent of the browser.

use majorant_newton::registry::{matched_majorant, problem};
use majorant_newton::{
    compute_radii, holder_model, holder_radii, newton_solve, scalar_sequence, worst_case_instance, HolderParams,
    NewtonOptions, Result, RootFindOptions, SequenceOptions,
};
use nalgebra::DVector;
use serde::Serialize;

/// Radii of `f(t) = K t^{p+1}/(p+1) − t` with the curves needed to draw them.
#[derive(Debug, Serialize)]
pub struct HolderView {
    pub nu: f64,
    pub rho: f64,
    pub sigma: f64,
    /// Closed-form `ρ`, for comparison with the bisection result.
    pub rho_closed: f64,
    /// `(t, f(t), h(t))` with `h(t) = f/(t f') − 1`; `h` is blank past `ν`.
    pub curve: Vec<(f64, f64, Option<f64>)>,
}

pub fn holder_view(k: f64, p: f64, samples: usize) -> Result<HolderView> {
    let params = HolderParams::new(k, p)?;
    let model = holder_model(params);
    let closed = holder_radii(params, f64::INFINITY)?;
    let radii = compute_radii(&model, f64::INFINITY, &RootFindOptions::default())?;
    let t_max = 1.15 * closed.sigma;
    let n = samples.clamp(16, 4096);
    let curve = (1..=n)
        .map(|i| {
            let t = t_max * i as f64 / n as f64;
            let (f, d) = (model.f(t), model.fprime(t));
            let h = (d < 0.0).then(|| f / (t * d) - 1.0);
            (t, f, h)
        })
        .collect();
    Ok(HolderView { nu: radii.nu, rho: radii.rho, sigma: radii.sigma, rho_closed: closed.rho, curve })
}

/// Newton errors on a registry problem next to the majorant sequence.
#[derive(Debug, Serialize)]
pub struct EnvelopeView {
    pub problem: String,
    pub r: f64,
    pub x0: Vec<f64>,
    pub status: String,
    /// `‖x_k − x*‖`.
    pub errors: Vec<f64>,
    /// `t_k` from `t_0 = ‖x_0 − x*‖`.
    pub envelope: Vec<f64>,
}

/// Starts at `x* + fraction·r·d`, where `d` points at `angle` (the sign of
/// `cos(angle)` in one dimension).
pub fn envelope_view(problem_id: &str, fraction: f64, angle: f64) -> Result<EnvelopeView> {
    let p = problem(problem_id)?;
    let majorant = matched_majorant(problem_id)?.resolve(Some(problem_id))?;
    let r = compute_radii(&majorant.model, p.kappa(), &RootFindOptions::default())?.r;
    let x_star = p.x_star().cloned().unwrap_or_else(|| DVector::zeros(p.dim()));
    let dir = match p.dim() {
        1 => DVector::from_element(1, if angle.cos() < 0.0 { -1.0 } else { 1.0 }),
        2 => DVector::from_vec(vec![angle.cos(), angle.sin()]),
        n => DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 }),
    };
    let t0 = fraction * r;
    let x0 = &x_star + dir * t0;
    let trace = newton_solve(&p, &x0, &NewtonOptions::default())?;
    let envelope = if t0 > 0.0 && t0 < r {
        scalar_sequence(&majorant.model, t0, r, &SequenceOptions::default())?.t
    } else {
        Vec::new()
    };
    Ok(EnvelopeView {
        problem: problem_id.to_string(),
        r,
        x0: x0.as_slice().to_vec(),
        status: trace.status.to_string(),
        errors: trace.error_norms.unwrap_or_default(),
        envelope,
    })
}

/// Orbit of Newton on the odd extension `sign(x) f(|x|)` of a Hölder majorant.
#[derive(Debug, Serialize)]
pub struct OrbitView {
    pub rho: f64,
    pub nu: f64,
    pub status: String,
    pub orbit: Vec<f64>,
}

pub fn worst_case_orbit(k: f64, p: f64, fraction: f64, iters: usize) -> Result<OrbitView> {
    let model = holder_model(HolderParams::new(k, p)?);
    let wc = worst_case_instance(&model, &RootFindOptions::default())?;
    let x0 = (fraction * wc.rho).min(wc.nu * (1.0 - 1e-12));
    let opts = NewtonOptions { max_iters: iters.clamp(1, 500), ..Default::default() };
    let trace = newton_solve(&wc.problem, &DVector::from_element(1, x0), &opts)?;
    Ok(OrbitView {
        rho: wc.rho,
        nu: wc.nu,
        status: trace.status.to_string(),
        orbit: trace.iterates.iter().map(|x| x[0]).collect(),
    })
}
